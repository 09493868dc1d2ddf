//! Config files, flag parsing, and their merge.
//!
//! Precedence is flags, then the `--config` file, then built-in defaults.

use std::fs;
use std::path::{Path, PathBuf};

use ncindex_core::smoothing::MollifierConfig;
use ncindex_core::{Error, FunctionSpec, Result, SamplingConfig};
use serde::Deserialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub function: Option<FunctionSpec>,
    pub sampling: Option<SamplingConfig>,
    pub mollifier: Option<MollifierConfig>,
    pub scan: Option<ScanSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    /// One `[lo, hi]` pair per axis.
    pub region: Option<Vec<[f64; 2]>>,
    /// Points per axis; a single entry applies to every axis.
    pub grid: Option<Vec<usize>>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

pub fn load(path: Option<&Path>) -> Result<ConfigFile> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Error::input(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::input(format!("invalid config {}: {e}", path.display())))
}

/// Parses `a=2,b=-3`. A value with `;` is a list, and `|` separates the
/// rows of a nested list: `q=2;0|0;1`.
pub fn parse_params(text: &str) -> Result<Vec<(String, Value)>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| Error::input(format!("parameter {item:?} is not of the form key=value")))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::input(format!("parameter {item:?} has an empty name")));
        }
        out.push((key.to_string(), parse_value(raw.trim())?));
    }
    Ok(out)
}

fn parse_value(raw: &str) -> Result<Value> {
    if raw.contains('|') {
        return raw.split('|').map(parse_list).collect::<Result<Vec<_>>>().map(Value::Array);
    }
    if raw.contains(';') {
        return parse_list(raw);
    }
    Ok(Value::from(parse_number(raw)?))
}

fn parse_list(raw: &str) -> Result<Value> {
    raw.split(';')
        .map(|s| parse_number(s.trim()).map(Value::from))
        .collect::<Result<Vec<_>>>()
        .map(Value::Array)
}

fn parse_number(raw: &str) -> Result<f64> {
    let v: f64 = raw
        .parse()
        .map_err(|_| Error::input(format!("{raw:?} is not a number")))?;
    if !v.is_finite() {
        return Err(Error::input(format!("{raw:?} is not finite")));
    }
    Ok(v)
}

/// Comma-separated decimals; scientific notation accepted.
pub fn parse_point(text: &str) -> Result<Vec<f64>> {
    let pts: Vec<f64> = text.split(',').map(|s| parse_number(s.trim())).collect::<Result<_>>()?;
    if pts.is_empty() {
        return Err(Error::input("empty point"));
    }
    Ok(pts)
}

/// `lo:hi` per axis, comma-separated: `-3:3,-3:3`.
pub fn parse_region(text: &str) -> Result<Vec<[f64; 2]>> {
    text.split(',')
        .map(|axis| {
            let (lo, hi) = axis
                .split_once(':')
                .ok_or_else(|| Error::input(format!("region axis {axis:?} is not of the form lo:hi")))?;
            Ok([parse_number(lo.trim())?, parse_number(hi.trim())?])
        })
        .collect()
}

pub fn parse_grid(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::input(format!("grid size {s:?} is not a nonnegative integer")))
        })
        .collect()
}

pub fn parse_eps(text: &str) -> Result<Vec<f64>> {
    text.split(',').map(|s| parse_number(s.trim())).collect()
}

/// Function spec from `--function`/`--params` over the config file. Flag
/// parameters are merged into the file's parameters when the family matches.
pub fn function_spec(family: Option<&str>, params: Option<&str>, file: Option<FunctionSpec>) -> Result<FunctionSpec> {
    let mut spec = match (family, file) {
        (Some(f), Some(file)) if file.family == f => file,
        (Some(f), _) => FunctionSpec::new(f),
        (None, Some(file)) => file,
        (None, None) => return Err(Error::input("no function given: use --function or a config file")),
    };
    if let Some(p) = params {
        for (k, v) in parse_params(p)? {
            spec.params.insert(k, v);
        }
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn params() {
        let p = parse_params("a=2,b=-3e-1").unwrap();
        assert_eq!(p, vec![("a".into(), json!(2.0)), ("b".into(), json!(-0.3))]);
        let p = parse_params("diag=1;-2").unwrap();
        assert_eq!(p[0].1, json!([1.0, -2.0]));
        let p = parse_params("q=2;0|0;1").unwrap();
        assert_eq!(p[0].1, json!([[2.0, 0.0], [0.0, 1.0]]));
        assert!(parse_params("a").unwrap_err().is_input());
        assert!(parse_params("a=x").unwrap_err().is_input());
        assert!(parse_params("a=inf").is_err());
    }

    #[test]
    fn points_regions_grids() {
        assert_eq!(parse_point("1.5, -2e-3").unwrap(), vec![1.5, -0.002]);
        assert!(parse_point("1,,2").is_err());
        assert_eq!(parse_region("-3:3,0:1e-1").unwrap(), vec![[-3.0, 3.0], [0.0, 0.1]]);
        assert!(parse_region("-3,3").is_err());
        assert_eq!(parse_grid("61,3").unwrap(), vec![61, 3]);
        assert!(parse_grid("-1").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = FunctionSpec::new("pw_quad").with("a", 1.0).with("b", 2.0);
        let spec = function_spec(None, Some("b=5"), Some(file.clone())).unwrap();
        assert_eq!(spec.params["a"], json!(1.0));
        assert_eq!(spec.params["b"], json!(5.0));
        let spec = function_spec(Some("kink"), None, Some(file)).unwrap();
        assert_eq!(spec, FunctionSpec::new("kink"));
        assert!(function_spec(None, None, None).is_err());
    }

    #[test]
    fn config_file_schema() {
        let cfg: ConfigFile = serde_json::from_str(
            r#"{"function": {"family": "kink"}, "sampling": {"seed": 7},
                "mollifier": {"epsilons": [0.1]}, "scan": {"region": [[-1, 1]], "grid": [3], "format": "json"}}"#,
        )
        .unwrap();
        assert_eq!(cfg.sampling.unwrap().seed, 7);
        assert_eq!(cfg.scan.unwrap().format, Some(Format::Json));
        assert!(serde_json::from_str::<ConfigFile>(r#"{"point": [0]}"#).is_err());
    }
}
