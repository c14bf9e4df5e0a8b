//! Command-line front end and the grid CSV format.
//!
//! Exit status is 0 on success, 1 when `check` or `identities` finds a
//! violation, and 2 on usage, parse and parameter errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::copula::{sample_grid, GridCopula, Point};
use crate::error::{Error, Result};
use crate::measures::{self, full_report, MeasureReport, DEFAULT_RESOLUTION, DEFAULT_SUP_TOL};
use crate::spec::parse_copula_spec;
use crate::verify::{self, Projection, SuiteReport, DEFAULT_RECTANGLES, DEFAULT_SEED, DEFAULT_VOLUME_TOL};

/// Caps the rayon pool when set to a positive integer.
pub const THREADS_ENV: &str = "COPULA_FORGE_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "copula-forge", version, about = "Bivariate copula expressions, measures and checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Emit JSON instead of key/value text
    #[arg(long)]
    pub json: bool,
    /// Write output to a file instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a copula at one point
    Eval {
        #[arg(short = 'c', long = "copula")]
        copula: String,
        #[arg(short = 'u', allow_negative_numbers = true)]
        u: f64,
        #[arg(short = 'v', allow_negative_numbers = true)]
        v: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Dependence and asymmetry measures
    Measures {
        #[arg(short = 'c', long = "copula")]
        copula: String,
        #[arg(short = 'n', long = "grid", default_value_t = DEFAULT_RESOLUTION)]
        grid: usize,
        #[arg(long, default_value_t = DEFAULT_SUP_TOL)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check the copula axioms
    Check {
        #[arg(short = 'c', long = "copula")]
        copula: String,
        #[arg(long, default_value_t = DEFAULT_RECTANGLES)]
        rectangles: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Violation tolerance
        #[arg(long, default_value_t = DEFAULT_VOLUME_TOL)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sample a copula on the (n+1)^2 lattice as CSV
    Grid {
        #[arg(short = 'c', long = "copula")]
        copula: String,
        #[arg(short = 'n', long = "grid", default_value_t = DEFAULT_RESOLUTION)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certified bounds on the asymmetry measures mu and nu
    Asymmetry {
        #[arg(short = 'c', long = "copula")]
        copula: String,
        #[arg(long, default_value_t = DEFAULT_SUP_TOL)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the identity, convexity, inverse-problem and projection suites
    Identities {
        /// Copula for the projection-optimality suites
        #[arg(short = 'c', long = "copula", default_value = "mo:0.5,0.25")]
        copula: String,
        #[arg(long, default_value_t = DEFAULT_SUP_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn open_sink<'a>(out: &Option<PathBuf>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| io_error(path, e))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(stdout)),
    }
}

fn io_error(path: &std::path::Path, e: io::Error) -> Error {
    Error::InvalidParameter { constructor: "io", reason: format!("{}: {e}", path.display()) }
}

fn emit<T: Serialize>(output: &OutputArgs, stdout: &mut dyn Write, value: &T, text: String) -> Result<()> {
    let mut sink = open_sink(&output.out, stdout)?;
    let body = if output.json {
        let mut s = serde_json::to_string_pretty(value).expect("serializable report");
        s.push('\n');
        s
    } else {
        text
    };
    sink.write_all(body.as_bytes()).and_then(|_| sink.flush()).map_err(|e| Error::InvalidParameter {
        constructor: "io",
        reason: e.to_string(),
    })
}

#[derive(Serialize)]
struct EvalOutput {
    copula: String,
    u: f64,
    v: f64,
    value: f64,
}

#[derive(Serialize)]
struct AsymmetryOutput {
    mu_lower: f64,
    mu_upper: f64,
    nu_lower: f64,
    nu_upper: f64,
    tol: f64,
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Eval { copula, u, v, output } => {
            let c = parse_copula_spec(&copula)?;
            let value = c.eval(Point::new(u, v)?);
            let text = format!("{value}\n");
            emit(&output, stdout, &EvalOutput { copula, u, v, value }, text)?;
            Ok(EXIT_OK)
        }
        Command::Measures { copula, grid, tol, output } => {
            let c = parse_copula_spec(&copula)?;
            let report = full_report(&c, grid, tol)?;
            emit(&output, stdout, &report, measure_text(&report))?;
            Ok(EXIT_OK)
        }
        Command::Check { copula, rectangles, seed, tol, output } => {
            let c = parse_copula_spec(&copula)?;
            let report = verify::check_axioms(&c, rectangles, seed, tol)?;
            emit(&output, stdout, &report, report.to_kv_text())?;
            Ok(if report.passed { EXIT_OK } else { EXIT_VIOLATION })
        }
        Command::Grid { copula, grid, out } => {
            let c = parse_copula_spec(&copula)?;
            let g = sample_grid(&c, grid)?;
            let mut sink = open_sink(&out, stdout)?;
            write_grid_csv(&g, &mut sink)?;
            Ok(EXIT_OK)
        }
        Command::Asymmetry { copula, tol, output } => {
            let c = parse_copula_spec(&copula)?;
            let mu = measures::asymmetry_mu(&c, tol)?;
            let nu = measures::radial_asymmetry_nu(&c, tol)?;
            let out = AsymmetryOutput {
                mu_lower: mu.lower,
                mu_upper: mu.upper,
                nu_lower: nu.lower,
                nu_upper: nu.upper,
                tol,
            };
            let text = format!(
                "mu = [{}, {}]\nnu = [{}, {}]\ntol = {}\n",
                mu.lower, mu.upper, nu.lower, nu.upper, tol
            );
            emit(&output, stdout, &out, text)?;
            Ok(EXIT_OK)
        }
        Command::Identities { copula, tol, seed, output } => {
            let c = parse_copula_spec(&copula)?;
            let suites = identity_suites(&c, tol, seed)?;
            let text: String = suites.iter().map(SuiteReport::to_kv_text).collect::<Vec<_>>().join("\n");
            emit(&output, stdout, &suites, text)?;
            Ok(if suites.iter().all(SuiteReport::passed) { EXIT_OK } else { EXIT_VIOLATION })
        }
    }
}

/// The suites behind `identities`, in output order.
pub fn identity_suites(c: &crate::CopulaExpr, tol: f64, seed: u64) -> Result<Vec<SuiteReport>> {
    use crate::catalog::*;
    use crate::transforms::{mix, radial_symmetrize, symmetrize};

    let symmetric = vec![
        independence(),
        upper_frechet(),
        lower_frechet(),
        symmetrize(&perturbed_p(0.7)?),
        mix(&[0.5, 0.5], &[independence(), upper_frechet()])?,
        mix(&[0.5, 0.5], &[upper_frechet(), lower_frechet()])?,
    ];
    let radial = vec![
        independence(),
        upper_frechet(),
        lower_frechet(),
        radial_symmetrize(&perturbed_q(0.7)?),
        mix(&[0.5, 0.5], &[independence(), lower_frechet()])?,
    ];
    Ok(vec![
        verify::identity_suite(seed),
        verify::convexity_suite(seed),
        verify::inverse_problem_suite(tol)?,
        verify::projection_optimality_suite(c, &symmetric, tol, Projection::Symmetric)?,
        verify::projection_optimality_suite(c, &radial, tol, Projection::Radial)?,
    ])
}

fn measure_text(r: &MeasureReport) -> String {
    let opt = |x: Option<f64>| x.map_or_else(|| "absent".to_string(), |v| v.to_string());
    let mut s = format!(
        "tau = {}\nrho = {}\ngamma = {}\nbeta = {}\nlambda_upper = {}\nlambda_lower = {}\nmu = {}\nnu = {}\nresolution = {}\n",
        r.tau,
        r.rho,
        r.gamma,
        r.beta,
        opt(r.lambda_upper),
        opt(r.lambda_lower),
        r.mu,
        r.nu,
        r.resolution
    );
    for (name, err) in &r.error_estimates {
        s.push_str(&format!("error_estimates.{name} = {err}\n"));
    }
    s
}

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::MalformedGrid(e.to_string())
}

/// `u,v,value` header, then the `(n+1)^2` lattice in row-major order with
/// 17 significant digits per number.
pub fn write_grid_csv(g: &GridCopula, w: &mut dyn Write) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    writer.write_record(["u", "v", "value"]).map_err(csv_error)?;
    let n = g.n();
    for i in 0..=n {
        for j in 0..=n {
            writer
                .write_record([
                    format!("{:.16e}", g.coord(i)),
                    format!("{:.16e}", g.coord(j)),
                    format!("{:.16e}", g.get(i, j)),
                ])
                .map_err(csv_error)?;
        }
    }
    writer.flush().map_err(csv_error)
}

/// Inverse of [`write_grid_csv`]; checks the header, the row count and the
/// lattice coordinates.
pub fn read_grid_csv(r: impl Read) -> Result<GridCopula> {
    let mut reader = csv::Reader::from_reader(r);
    let header = reader.headers().map_err(csv_error)?;
    if header != vec!["u", "v", "value"] {
        return Err(Error::MalformedGrid(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let parse = |k: usize| -> Result<f64> {
            record
                .get(k)
                .ok_or_else(|| Error::MalformedGrid("short row".into()))?
                .parse::<f64>()
                .map_err(csv_error)
        };
        rows.push((parse(0)?, parse(1)?, parse(2)?));
    }
    let side = (rows.len() as f64).sqrt().round() as usize;
    if side < 2 || side * side != rows.len() {
        return Err(Error::MalformedGrid(format!("{} rows is not (n+1)^2 with n >= 1", rows.len())));
    }
    let n = side - 1;
    let mut values = Vec::with_capacity(rows.len());
    for (k, (u, v, value)) in rows.into_iter().enumerate() {
        let (i, j) = (k / side, k % side);
        if u != crate::copula::lattice_coord(i, n) || v != crate::copula::lattice_coord(j, n) {
            return Err(Error::MalformedGrid(format!("row {k} is at ({u}, {v}), expected lattice point ({i}, {j})")));
        }
        values.push(value);
    }
    GridCopula::from_values(n, values)
}

/// Applies `COPULA_FORGE_THREADS` to the global rayon pool.
pub fn configure_threads() {
    if let Some(k) = std::env::var(THREADS_ENV).ok().and_then(|s| s.trim().parse::<usize>().ok()) {
        if k > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("copula-forge").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn eval_prints_value() {
        let (code, out, _) = run_capture(&["eval", "-c", "pp:1", "-u", "0.6666667", "-v", "0.3333333"]);
        assert_eq!(code, 0);
        let value: f64 = out.trim().parse().unwrap();
        assert!((value - 7.0 / 27.0).abs() < 1e-6);
    }

    #[test]
    fn usage_and_parse_errors_exit_two() {
        assert_eq!(run_capture(&["frobnicate"]).0, 2);
        assert_eq!(run_capture(&["eval", "-c", "pi"]).0, 2);
        let (code, _, err) = run_capture(&["eval", "-c", "mo:1.5,0.2", "-u", "0.5", "-v", "0.5"]);
        assert_eq!(code, 2);
        assert!(err.contains("mo: alpha must be in (0,1)"), "{err}");
        let (code, _, err) = run_capture(&["eval", "-c", "t(pi", "-u", "0.5", "-v", "0.5"]);
        assert_eq!(code, 2);
        assert!(err.contains("byte 4"), "{err}");
        assert_eq!(run_capture(&["eval", "-c", "pi", "-u", "1.5", "-v", "0.5"]).0, 2);
        assert_eq!(run_capture(&["measures", "-c", "pi", "-n", "100"]).0, 2);
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_capture(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("measures"));
    }

    #[test]
    fn grid_csv_round_trips_bitwise() {
        let c = parse_copula_spec("sym(mo:0.5,0.25)").unwrap();
        let g = sample_grid(&c, 16).unwrap();
        let mut buf = Vec::new();
        write_grid_csv(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("u,v,value\n"));
        assert_eq!(text.lines().count(), 1 + 17 * 17);
        let back = read_grid_csv(buf.as_slice()).unwrap();
        assert_eq!(back.n(), 16);
        assert!(back.values().iter().zip(g.values()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn malformed_grids_are_rejected() {
        assert!(read_grid_csv("x,y,z\n".as_bytes()).is_err());
        assert!(read_grid_csv("u,v,value\n0,0,0\n0,1,0\n1,0,0\n".as_bytes()).is_err());
        assert!(read_grid_csv("u,v,value\n0,0,0\n0,1,0\n1,0,0\n1,0.5,1\n".as_bytes()).is_err());
    }
}
