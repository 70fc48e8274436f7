use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use densecode::closed_form::{cross_validate_grid, OracleGrid, CROSS_VALIDATION_TOL};
use densecode::protect::optimize_strengths;
use densecode::sweep::{
    evaluate, run_surface, run_sweep, write_rows, Grid, OutputFormat, SurfaceSpec, SweepSpec,
    DEFAULT_MU_VALUES,
};
use densecode::{ChannelKind, ChannelParams, Error, MeasurementStrengths};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_BAD_INPUT: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(
    name = "densecode",
    version,
    about = "Dense coding capacity through correlated noisy channels"
)]
struct Cli {
    /// Worker threads for sweeps (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Capacity at a single parameter point.
    Capacity(CapacityArgs),
    /// Capacity over a λ grid for several memory strengths.
    Sweep(SweepArgs),
    /// Protected capacity over an (m, n) grid at a fixed channel point.
    Surface(SurfaceArgs),
    /// Search measurement strengths that maximize the protected capacity.
    Optimize(OptimizeArgs),
    /// Compare closed-form states against the Kraus pipeline.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum RecordFormat {
    Text,
    Json,
}

#[derive(Args)]
struct Point {
    /// ad | pd | depol
    #[arg(long)]
    channel: ChannelKind,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    mu: f64,
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
    alpha: f64,
}

#[derive(Args)]
struct CapacityArgs {
    #[command(flatten)]
    point: Point,
    /// Weak-measurement strength.
    #[arg(long, requires = "n")]
    m: Option<f64>,
    /// Reversal-measurement strength.
    #[arg(long, requires = "m")]
    n: Option<f64>,
    #[arg(long, value_enum, default_value = "text")]
    format: RecordFormat,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    channel: ChannelKind,
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
    alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    lambda_start: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda_stop: f64,
    #[arg(long, default_value_t = 0.01)]
    lambda_step: f64,
    /// Comma-separated memory strengths.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_MU_VALUES.to_vec())]
    mu: Vec<f64>,
    #[arg(long, requires = "n")]
    m: Option<f64>,
    #[arg(long, requires = "m")]
    n: Option<f64>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: TableFormat,
}

#[derive(Args)]
struct SurfaceArgs {
    #[arg(long, default_value = "ad")]
    channel: ChannelKind,
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    #[arg(long, default_value_t = 0.5)]
    mu: f64,
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    m_start: f64,
    #[arg(long, default_value_t = 0.999)]
    m_stop: f64,
    #[arg(long, default_value_t = 0.05)]
    m_step: f64,
    #[arg(long, default_value_t = 0.0)]
    n_start: f64,
    #[arg(long, default_value_t = 0.999)]
    n_stop: f64,
    #[arg(long, default_value_t = 0.05)]
    n_step: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: TableFormat,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    point: Point,
    /// Coarse grid points per axis.
    #[arg(long, default_value_t = 21)]
    grid: usize,
    /// Refinement rounds after the coarse scan.
    #[arg(long, default_value_t = 5)]
    refine: usize,
    #[arg(long, value_enum, default_value = "text")]
    format: RecordFormat,
}

#[derive(Args)]
struct VerifyArgs {
    /// Evenly spaced λ and μ values in [0, 1].
    #[arg(long, default_value_t = 5)]
    points: usize,
    /// Offset added to the closed-form |00⟩ population (negative control).
    #[arg(long, hide = true, default_value_t = 0.0)]
    inject_oracle_error: f64,
}

enum Failure {
    Lib(Error),
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
    {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_NUMERIC);
    }
    let outcome = match cli.command {
        Command::Capacity(a) => cmd_capacity(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Surface(a) => cmd_surface(a),
        Command::Optimize(a) => cmd_optimize(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify) => ExitCode::from(EXIT_VERIFY_FAILED),
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            if e.is_validation() || matches!(e, Error::Io(_)) {
                ExitCode::from(EXIT_BAD_INPUT)
            } else {
                ExitCode::from(EXIT_NUMERIC)
            }
        }
    }
}

fn strengths(m: Option<f64>, n: Option<f64>) -> Result<Option<MeasurementStrengths>, Error> {
    match (m, n) {
        (Some(m), Some(n)) => Ok(Some(MeasurementStrengths::new(m, n)?)),
        _ => Ok(None),
    }
}

fn print_record<T: Serialize>(record: &T, format: RecordFormat, fields: &[(&str, String)]) {
    match format {
        RecordFormat::Json => {
            println!(
                "{}",
                serde_json::to_string_pretty(record).expect("serializable")
            )
        }
        RecordFormat::Text => {
            let width = fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, v) in fields {
                println!("{k:<width$}  {v}");
            }
        }
    }
}

fn cmd_capacity(a: CapacityArgs) -> Result<(), Failure> {
    let p = a.point;
    let s = strengths(a.m, a.n)?;
    let rec = evaluate(p.channel, p.alpha, p.lambda, p.mu, s)?;
    print_record(
        &rec,
        a.format,
        &[
            ("chi", format!("{:.10}", rec.chi)),
            ("entropy_avg", format!("{:.10}", rec.entropy_avg)),
            ("entropy_state", format!("{:.10}", rec.entropy_state)),
            ("success_prob", format!("{:.10}", rec.success_prob)),
        ],
    );
    Ok(())
}

fn emit(
    rows: &[densecode::sweep::Row],
    out: Option<PathBuf>,
    format: TableFormat,
) -> Result<(), Error> {
    let format = match format {
        TableFormat::Csv => OutputFormat::Csv,
        TableFormat::Json => OutputFormat::Json,
    };
    match out {
        Some(path) => {
            let file =
                File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            write_rows(rows, format, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            write_rows(rows, format, stdout.lock())?;
        }
    }
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> Result<(), Failure> {
    let spec = SweepSpec {
        channel: a.channel,
        alpha: a.alpha,
        lambda_grid: Grid::new(a.lambda_start, a.lambda_stop, a.lambda_step)?,
        mu_values: a.mu,
        strengths: strengths(a.m, a.n)?,
    };
    let rows = run_sweep(&spec)?;
    emit(&rows, a.out, a.format)?;
    Ok(())
}

fn cmd_surface(a: SurfaceArgs) -> Result<(), Failure> {
    let spec = SurfaceSpec {
        channel: a.channel,
        lambda: a.lambda,
        mu: a.mu,
        alpha: a.alpha,
        m_grid: Grid {
            start: a.m_start,
            stop: a.m_stop,
            step: a.m_step,
        },
        n_grid: Grid {
            start: a.n_start,
            stop: a.n_stop,
            step: a.n_step,
        },
    };
    let rows = run_surface(&spec)?;
    emit(&rows, a.out, a.format)?;
    Ok(())
}

#[derive(Serialize)]
struct OptimizeRecord {
    channel: ChannelKind,
    alpha: f64,
    lambda: f64,
    mu: f64,
    m: f64,
    n: f64,
    chi: f64,
    baseline_chi: f64,
    improvement: f64,
    success_prob: f64,
}

fn cmd_optimize(a: OptimizeArgs) -> Result<(), Failure> {
    let p = a.point;
    let params = ChannelParams::new(p.lambda, p.mu)?;
    let opt = optimize_strengths(p.channel, params, p.alpha, a.grid, a.refine)?;
    let rec = OptimizeRecord {
        channel: p.channel,
        alpha: p.alpha,
        lambda: p.lambda,
        mu: p.mu,
        m: opt.strengths.m(),
        n: opt.strengths.n(),
        chi: opt.result.chi,
        baseline_chi: opt.baseline_chi,
        improvement: opt.improvement(),
        success_prob: opt.result.success_prob,
    };
    print_record(
        &rec,
        a.format,
        &[
            ("m", format!("{:.6}", rec.m)),
            ("n", format!("{:.6}", rec.n)),
            ("chi", format!("{:.10}", rec.chi)),
            ("baseline_chi", format!("{:.10}", rec.baseline_chi)),
            ("improvement", format!("{:.10}", rec.improvement)),
            ("success_prob", format!("{:.10}", rec.success_prob)),
        ],
    );
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<(), Failure> {
    if a.points < 2 {
        return Err(
            Error::InvalidGrid(format!("--points must be at least 2, got {}", a.points)).into(),
        );
    }
    let grid = OracleGrid::with_points(a.points);
    let mut all_ok = true;
    for kind in ChannelKind::ALL {
        let report = cross_validate_grid(kind, &grid, a.inject_oracle_error);
        let worst = report
            .iter()
            .max_by(|x, y| x.residual.total_cmp(&y.residual))
            .expect("non-empty grid");
        let failed = report.iter().filter(|r| !r.passed).count();
        all_ok &= failed == 0;
        println!(
            "{:<6} cases={:<5} worst_residual={:.3e} (lambda={}, mu={}, m={}, n={}, alpha={:.4}) {}",
            kind.tag(),
            report.len(),
            worst.residual,
            worst.lambda,
            worst.mu,
            worst.m,
            worst.n,
            worst.alpha,
            if failed == 0 { "PASS".to_string() } else { format!("FAIL ({failed} cases)") }
        );
    }
    println!(
        "tolerance {CROSS_VALIDATION_TOL:e}: {}",
        if all_ok {
            "all channels agree"
        } else {
            "MISMATCH"
        }
    );
    if all_ok {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}
