//! `ncindex`: point queries, grid scans, property verification and
//! mollification experiments for the local nonconvexity index.
//!
//! Exit codes: 0 success, 1 failed verification or mollification check,
//! 2 input error, 3 numerical failure.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ncindex_core::smoothing::{mollification_membership_check, MollifierConfig};
use ncindex_core::{compute_interval, make_builtin, verify, Error, NonconvexityInterval, Oracle, Result, SamplingConfig};
use rayon::prelude::*;

use config::{ConfigFile, Format};
use output::{csv_row, csv_table, emit, to_json, JsonRow};

#[derive(Parser)]
#[command(name = "ncindex", version, about = "Local nonconvexity index of C^{1,1} functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Interval index at one point, as JSON.
    Index(IndexArgs),
    /// Interval index over a rectangular grid.
    Scan(ScanArgs),
    /// Run property suites and report the worst slack of each.
    Verify(VerifyArgs),
    /// Check mollified Hessians against the generalized Hessian hull.
    Mollify(MollifyArgs),
}

#[derive(Args)]
struct FunctionArgs {
    /// Built-in family: neg_cos_sum, pw_quad, kink, mixed, quadratic, convex_smooth.
    #[arg(long)]
    function: Option<String>,
    /// Family parameters, e.g. `a=-1,b=-3`; lists as `1;2`, matrices as `1;0|0;2`.
    #[arg(long, allow_hyphen_values = true)]
    params: Option<String>,
    /// JSON config with keys `function`, `sampling`, `mollifier`, `scan`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for all random sampling.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct IndexArgs {
    #[command(flatten)]
    common: FunctionArgs,
    /// Comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true)]
    point: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    common: FunctionArgs,
    /// Box as `lo:hi` per axis, e.g. `-3:3,-3:3`.
    #[arg(long, allow_hyphen_values = true)]
    region: Option<String>,
    /// Points per axis; one value applies to every axis.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name, or `all`.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long)]
    output: Option<PathBuf>,
    /// `json` for a machine-readable report.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct MollifyArgs {
    #[command(flatten)]
    common: FunctionArgs,
    #[arg(long, allow_hyphen_values = true)]
    point: String,
    /// Comma-separated decreasing mollification radii.
    #[arg(long)]
    eps: Option<String>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_input() { 2 } else { 3 },
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Index(a) => cmd_index(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Mollify(a) => cmd_mollify(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("ncindex: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Oracle and sampling settings shared by every function command.
struct Setup {
    oracle: Oracle,
    sampling: SamplingConfig,
    file: ConfigFile,
}

fn setup(common: &FunctionArgs) -> Result<Setup> {
    let mut file = config::load(common.config.as_deref())?;
    let spec = config::function_spec(common.function.as_deref(), common.params.as_deref(), file.function.take())?;
    let oracle = make_builtin(&spec)?;
    let mut sampling = file.sampling.take().unwrap_or_default();
    if let Some(seed) = common.seed {
        sampling.seed = seed;
    }
    sampling.validate()?;
    Ok(Setup { oracle, sampling, file })
}

fn check_point(oracle: &Oracle, x: &[f64]) -> Result<()> {
    if x.len() != oracle.dim() {
        return Err(Error::DimensionMismatch {
            expected: oracle.dim(),
            got: x.len(),
        });
    }
    Ok(())
}

fn cmd_index(args: IndexArgs) -> std::result::Result<u8, Failure> {
    let s = setup(&args.common)?;
    let x = config::parse_point(&args.point)?;
    check_point(&s.oracle, &x)?;
    let interval = compute_interval(s.oracle.as_ref(), &x, &s.sampling)?;
    let text = match args.format {
        Format::Json => to_json(&interval),
        Format::Csv => format!("{}\n{}\n", output::csv_header(x.len()), csv_row(&x, &interval)),
    };
    emit(args.common.output.as_deref(), &text)?;
    Ok(0)
}

fn axis_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        1 => vec![(lo + hi) / 2.0],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Grid points in row-major order: the last axis varies fastest.
fn grid_points(region: &[[f64; 2]], grid: &[usize]) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = region.iter().zip(grid).map(|(r, &n)| axis_points(r[0], r[1], n)).collect();
    let mut points = vec![vec![]];
    for axis in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    points
}

/// Seed for the `index`-th grid point; independent of evaluation order.
fn point_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

fn cmd_scan(args: ScanArgs) -> std::result::Result<u8, Failure> {
    let mut s = setup(&args.common)?;
    let scan = s.file.scan.take().unwrap_or_default();
    let d = s.oracle.dim();
    let region = match args.region.as_deref() {
        Some(r) => config::parse_region(r)?,
        None => scan.region.ok_or_else(|| Error::input("no region given: use --region or scan.region"))?,
    };
    if region.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: region.len() }.into());
    }
    if region.iter().any(|[lo, hi]| !(lo.is_finite() && hi.is_finite() && lo < hi)) {
        return Err(Error::input("region must be nondegenerate: lo < hi on every axis").into());
    }
    let mut grid = match args.grid.as_deref() {
        Some(g) => config::parse_grid(g)?,
        None => scan.grid.unwrap_or_else(|| vec![11]),
    };
    if grid.len() == 1 {
        grid = vec![grid[0]; d];
    }
    if grid.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: grid.len() }.into());
    }
    if grid.iter().any(|&n| n == 0) {
        return Err(Error::input("grid needs at least one point per axis").into());
    }
    let format = args.format.or(scan.format).unwrap_or(Format::Csv);
    let output = args.common.output.or(scan.output);

    let points = grid_points(&region, &grid);
    let margin = s.sampling.max_radius();
    if let Some(p) = points.iter().find(|p| !s.oracle.contains(p, margin)) {
        return Err(Error::Domain {
            point: p.clone(),
            margin,
        }
        .into());
    }
    let rows: Vec<(Vec<f64>, NonconvexityInterval)> = points
        .into_par_iter()
        .enumerate()
        .map(|(k, x)| {
            let cfg = SamplingConfig {
                seed: point_seed(s.sampling.seed, k),
                ..s.sampling.clone()
            };
            compute_interval(s.oracle.as_ref(), &x, &cfg).map(|i| (x, i))
        })
        .collect::<Result<_>>()?;
    let text = match format {
        Format::Csv => csv_table(&rows, d),
        Format::Json => to_json(&rows.iter().map(|(x, i)| JsonRow { x, interval: i }).collect::<Vec<_>>()),
    };
    emit(output.as_deref(), &text)?;
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> std::result::Result<u8, Failure> {
    let results = verify::run(&args.suite)?;
    let text = match args.format {
        Some(Format::Json) => to_json(&results),
        _ => {
            let mut t: String = results.iter().map(|r| format!("{r}\n")).collect();
            let failed = results.iter().filter(|r| !r.pass).count();
            t.push_str(&format!("{} of {} suites passed\n", results.len() - failed, results.len()));
            t
        }
    };
    emit(args.output.as_deref(), &text)?;
    Ok(if results.iter().all(|r| r.pass) { 0 } else { 1 })
}

fn cmd_mollify(args: MollifyArgs) -> std::result::Result<u8, Failure> {
    let mut s = setup(&args.common)?;
    let mut cfg: MollifierConfig = s.file.mollifier.take().unwrap_or_default();
    if let Some(eps) = args.eps.as_deref() {
        cfg.epsilons = config::parse_eps(eps)?;
    }
    if let Some(seed) = args.common.seed {
        cfg.seed = seed;
    }
    let x = config::parse_point(&args.point)?;
    check_point(&s.oracle, &x)?;
    let report = mollification_membership_check(s.oracle.as_ref(), &x, &cfg, &s.sampling)?;
    emit(args.common.output.as_deref(), &to_json(&report.entries))?;
    eprintln!(
        "interval [{}, {}]; {}",
        output::fmt_g(report.loc_low),
        output::fmt_g(report.loc_high),
        if report.pass { "pass" } else { "FAIL" }
    );
    Ok(if report.pass { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_order_and_single_point() {
        let pts = grid_points(&[[0.0, 1.0], [-1.0, 1.0]], &[2, 3]);
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0], vec![0.0, -1.0]);
        assert_eq!(pts[1], vec![0.0, 0.0]);
        assert_eq!(pts[5], vec![1.0, 1.0]);
        assert_eq!(grid_points(&[[-1.0, 1.0]], &[1]), vec![vec![0.0]]);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Failure::from(Error::input("x")).code, 2);
        assert_eq!(Failure::from(Error::UnknownFamily("f".into())).code, 2);
        assert_eq!(Failure::from(Error::SamplingFailure { drawn: 64, differentiable: 0 }).code, 3);
        let e = Error::EigenNonConvergence { sweeps: 100, off_diagonal: 1.0 };
        assert_eq!(Failure::from(e).code, 3);
    }

    #[test]
    fn point_seeds_differ() {
        assert_ne!(point_seed(0, 0), point_seed(0, 1));
        assert_eq!(point_seed(5, 3), point_seed(5, 3));
    }
}
