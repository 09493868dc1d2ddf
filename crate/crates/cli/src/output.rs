use std::fs;
use std::io::{self, Write};
use std::path::Path;

use ncindex_core::{Error, NonconvexityInterval, Result};
use serde::Serialize;

/// `printf("%.12g")` formatting: 12 significant digits, trailing zeros
/// dropped, exponent form outside `[1e−5, 1e12)`.
pub fn fmt_g(v: f64) -> String {
    const P: i32 = 12;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (P - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= P {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (P - 1 - exp) as usize, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub const CSV_FIELDS: [&str; 9] = [
    "loc_low",
    "loc_high",
    "nloc_low",
    "nloc_high",
    "conv_low",
    "conv_high",
    "rho",
    "exact",
    "approximate_nloc",
];

pub fn csv_header(dim: usize) -> String {
    let mut cols: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    cols.extend(CSV_FIELDS.iter().map(|s| s.to_string()));
    cols.join(",")
}

pub fn csv_row(x: &[f64], i: &NonconvexityInterval) -> String {
    let mut cols: Vec<String> = x.iter().map(|&v| fmt_g(v)).collect();
    for v in [i.loc_low, i.loc_high, i.nloc_low, i.nloc_high, i.conv_low, i.conv_high, i.rho] {
        cols.push(fmt_g(v));
    }
    cols.push(i.exact.to_string());
    cols.push(i.approximate_nloc.to_string());
    cols.join(",")
}

pub fn csv_table(rows: &[(Vec<f64>, NonconvexityInterval)], dim: usize) -> String {
    let mut out = csv_header(dim);
    out.push('\n');
    for (x, i) in rows {
        out.push_str(&csv_row(x, i));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
pub struct JsonRow<'a> {
    pub x: &'a [f64],
    #[serde(flatten)]
    pub interval: &'a NonconvexityInterval,
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

/// Writes to `path`, or to standard output when absent.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::input(format!("cannot write {}: {e}", p.display()))),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Error::input(format!("cannot write to standard output: {e}"))),
    }
}
