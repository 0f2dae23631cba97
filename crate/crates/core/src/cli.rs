//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid problem or failed check, 2 overflow
//! (predicted or encountered), 64 usage error, 66 I/O failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::oracle::{compare, fd_solve, FdConfig};
use crate::problem_io::{emit_csv, emit_gnuplot, parse_document, ProblemDocument};
use crate::solver::{
    build, check_divergence, evaluate_grid_in, evaluate_points, interior_samples, residual,
    Field, PiecewiseSolution, Severity,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_DIVERGENCE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_IO: i32 = 66;

/// Residual acceptance threshold relative to the problem scale.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;
/// Max-norm agreement required between spectral and finite-difference fields.
pub const COMPARE_TOLERANCE: f64 = 5e-3;

const DEFAULT_GRID: usize = 21;
const SAMPLE_SEED: u64 = 0x5eed;

#[derive(Parser, Debug)]
#[command(name = "stepwave", version, about = "Explicit solutions of linear PDEs with step-function coefficients")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GridArgs {
    /// Number of time samples over [0, T[
    #[arg(long)]
    nt: Option<usize>,
    /// Number of space samples over the x-range
    #[arg(long)]
    nx: Option<usize>,
    /// Left end of the sampled x-range (default -l)
    #[arg(long = "strip-x0", allow_negative_numbers = true)]
    strip_x0: Option<f64>,
    /// Right end (exclusive) of the sampled x-range (default l)
    #[arg(long = "strip-x1", allow_negative_numbers = true)]
    strip_x1: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve and write the sampled field as CSV
    Solve {
        #[arg(short = 'p', long = "problem")]
        problem: PathBuf,
        /// Output CSV (stdout when omitted)
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Check a problem document and predict growing modes
    Validate {
        #[arg(short = 'p', long = "problem")]
        problem: PathBuf,
    },
    /// Check the PDE residual at sampled interior points
    Residual {
        #[arg(short = 'p', long = "problem")]
        problem: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1e-4)]
        dt: f64,
    },
    /// Compare against the finite-difference oracle (order <= 2)
    Compare {
        #[arg(short = 'p', long = "problem")]
        problem: PathBuf,
        #[arg(long, default_value_t = 256)]
        nx: usize,
        #[arg(long, default_value_t = 1e-4)]
        dt: f64,
        #[arg(long = "t-end")]
        t_end: Option<f64>,
    },
    /// Write the sampled field as CSV plus a gnuplot script
    Plot {
        #[arg(short = 'p', long = "problem")]
        problem: PathBuf,
        /// Output gnuplot script
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        #[arg(long)]
        csv: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
    },
}

/// Failure carrying its exit code; the message goes to stderr.
struct Exit(i32, String);

impl Exit {
    fn from_error(e: Error) -> Self {
        Exit(EXIT_FAILURE, e.to_string())
    }
}

type CliResult = Result<i32, Exit>;

/// Runs the CLI with the given arguments (including the program name).
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Solve { problem, output, grid } => cmd_solve(&problem, output.as_deref(), &grid),
        Command::Validate { problem } => cmd_validate(&problem),
        Command::Residual { problem, samples, dt } => cmd_residual(&problem, samples, dt),
        Command::Compare { problem, nx, dt, t_end } => cmd_compare(&problem, nx, dt, t_end),
        Command::Plot { problem, output, csv, grid } => cmd_plot(&problem, &output, &csv, &grid),
    };
    match result {
        Ok(code) => code,
        Err(Exit(code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}

fn load(path: &Path) -> Result<ProblemDocument, Exit> {
    let text = fs::read_to_string(path)
        .map_err(|e| Exit(EXIT_IO, format!("cannot read {}: {e}", path.display())))?;
    parse_document(&text).map_err(|e| match e {
        Error::Validation(diags) => {
            for d in &diags {
                eprintln!("{}: {d}", path.display());
            }
            Exit(EXIT_FAILURE, format!("{} is not a valid problem", path.display()))
        }
        other => Exit(EXIT_FAILURE, format!("{}: {other}", path.display())),
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), Exit> {
    fs::write(path, text).map_err(|e| Exit(EXIT_IO, format!("cannot write {}: {e}", path.display())))
}

fn solve_field(doc: &ProblemDocument, grid: &GridArgs) -> Result<(PiecewiseSolution, Field), Exit> {
    let sol = build(&doc.problem).map_err(Exit::from_error)?;
    let nt = grid.nt.or(doc.settings.grid_nt).unwrap_or(DEFAULT_GRID);
    let nx = grid.nx.or(doc.settings.grid_nx).unwrap_or(DEFAULT_GRID);
    let l = doc.problem.l();
    let x0 = grid.strip_x0.unwrap_or(-l);
    let x1 = grid.strip_x1.unwrap_or(l);
    let field = evaluate_grid_in(&sol, nt, nx, x0, x1).map_err(Exit::from_error)?;
    for note in &field.notes {
        eprintln!("{note}");
    }
    Ok((sol, field))
}

fn overflow_code(sol: &PiecewiseSolution) -> i32 {
    if sol.has_overflow() {
        EXIT_DIVERGENCE
    } else {
        EXIT_OK
    }
}

fn cmd_solve(problem: &Path, output: Option<&Path>, grid: &GridArgs) -> CliResult {
    let doc = load(problem)?;
    let (sol, field) = solve_field(&doc, grid)?;
    let csv = emit_csv(&field);
    match output {
        Some(path) => write_file(path, &csv)?,
        None => std::io::stdout()
            .write_all(csv.as_bytes())
            .map_err(|e| Exit(EXIT_IO, format!("cannot write to stdout: {e}")))?,
    }
    Ok(overflow_code(&sol))
}

fn cmd_validate(problem: &Path) -> CliResult {
    let doc = load(problem)?;
    let p = &doc.problem;
    let notes = check_divergence(p);
    for note in &notes {
        eprintln!("{note}");
    }
    let overflow = notes.iter().any(|n| n.severity == Severity::Overflow);
    let growth = notes.len() - notes.iter().filter(|n| n.severity == Severity::Overflow).count();
    println!(
        "valid: {} time rows x {} strips, order {}, K = {}; {} growth, {} overflow predictions",
        p.rows(),
        p.strips(),
        p.order(),
        p.truncation(),
        growth,
        notes.len() - growth
    );
    Ok(if overflow { EXIT_DIVERGENCE } else { EXIT_OK })
}

fn cmd_residual(problem: &Path, samples: usize, dt: f64) -> CliResult {
    let doc = load(problem)?;
    let sol = build(&doc.problem).map_err(Exit::from_error)?;
    let scale = sol.scale();
    let points = interior_samples(&sol, samples, 2.0 * dt, SAMPLE_SEED);
    if points.is_empty() {
        return Err(Exit(EXIT_FAILURE, "no interior cell is wide enough to sample".into()));
    }
    let (mut max_a, mut max_fd) = (0.0_f64, 0.0_f64);
    for (t, x) in points {
        let (a, fd) = residual(&sol, t, x, dt).map_err(Exit::from_error)?;
        max_a = max_a.max(a.abs());
        max_fd = max_fd.max(fd.abs());
    }
    let denom = if scale > 0.0 { scale } else { 1.0 };
    println!("scale: {scale:e}");
    println!("max analytic residual: {max_a:e} ({:e} scaled)", max_a / denom);
    println!("max fd residual (dt = {dt:e}): {max_fd:e} ({:e} scaled)", max_fd / denom);
    Ok(if max_a <= RESIDUAL_TOLERANCE * scale {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}

fn cmd_compare(problem: &Path, nx: usize, dt: f64, t_end: Option<f64>) -> CliResult {
    let doc = load(problem)?;
    let p = &doc.problem;
    let t_end = t_end.unwrap_or(if 0.5 < p.horizon() { 0.5 } else { p.horizon() / 2.0 });
    let cfg = FdConfig::new(nx, dt).map_err(Exit::from_error)?;
    let reference = fd_solve(p, &cfg, t_end).map_err(Exit::from_error)?;
    let sol = build(p).map_err(Exit::from_error)?;
    let spectral =
        evaluate_points(&sol, &reference.t_values, &reference.x_values).map_err(Exit::from_error)?;
    let report = compare(&spectral, &reference).map_err(Exit::from_error)?;
    println!("t_end: {t_end}");
    println!("max error: {:e} at x = {}", report.max_abs, report.argmax.1);
    println!("rms error: {:e} over {} points", report.l2, report.compared);
    Ok(if report.max_abs <= COMPARE_TOLERANCE {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}

fn cmd_plot(problem: &Path, output: &Path, csv: &Path, grid: &GridArgs) -> CliResult {
    let doc = load(problem)?;
    let (sol, field) = solve_field(&doc, grid)?;
    let csv_name = csv
        .to_str()
        .ok_or_else(|| Exit(EXIT_FAILURE, "csv path is not valid UTF-8".into()))?;
    let script = emit_gnuplot(&field, csv_name).map_err(Exit::from_error)?;
    write_file(csv, &emit_csv(&field))?;
    write_file(output, &script)?;
    Ok(overflow_code(&sol))
}
