//! `beltrami`: eigenvalue, spline, and zeta experiments on model manifolds.
//!
//! Exit status: 0 success, 2 configuration error, 3 numerical failure,
//! 4 i/o error. Failures print a single machine-readable JSON record to
//! standard error.

mod config;
mod experiments;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use config::{build_config, parse_config_file, Experiment, RunConfig};

const CONFIG_HELP: &str = "\
Every value flag can instead come from a config file (--config PATH) with \
flat `key = value` lines and `#` comments; the key names equal the flag \
names, command-line flags override file values, and unknown keys are \
rejected with a nearest-key suggestion. Output is written atomically \
(temp file + rename). The NUM_THREADS environment variable caps internal \
parallelism.";

#[derive(Parser)]
#[command(
    name = "beltrami",
    version,
    about = "Laplace operator eigenvalues, splines, and zeta functions on model manifolds",
    after_help = CONFIG_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct CommonArgs {
    /// Manifold: circle | torus1 | torus2 | torus3 | sphere2
    #[arg(long)]
    manifold: Option<String>,
    /// Seed for node generation and random band-limited vectors [default: 0]
    #[arg(long)]
    seed: Option<String>,
    /// Output file path [default: <experiment>.<format>]
    #[arg(long)]
    output: Option<String>,
    /// Output format: csv | json [default: csv]
    #[arg(long)]
    format: Option<String>,
    /// Significant digits for CSV floats, 1..=17 [default: 17]
    #[arg(long)]
    digits: Option<String>,
    /// Scalar precision: auto | f64 | dd [default: auto; dd picks the
    /// wide scalar, used automatically on 1-dimensional manifolds]
    #[arg(long)]
    precision: Option<String>,
    /// Config file with `key = value` lines; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact spectrum of the manifold up to a cutoff
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        /// Largest eigenvalue to enumerate
        #[arg(long = "lambda-max")]
        lambda_max: Option<String>,
    },
    /// Generate an admissible node set and validate its properties
    Pointset {
        #[command(flatten)]
        common: CommonArgs,
        /// Mesh parameter rho (0 < rho < injectivity radius / 6)
        #[arg(long)]
        rho: Option<String>,
        /// Probe count for the covering/multiplicity estimate [default: 10000]
        #[arg(long)]
        probes: Option<String>,
    },
    /// Ritz eigenvalues against the exact spectrum
    Eigs {
        #[command(flatten)]
        common: CommonArgs,
        /// Mesh parameter rho
        #[arg(long)]
        rho: Option<String>,
        /// Spline order k (requires k > d/2)
        #[arg(long)]
        k: Option<String>,
        /// Band cutoff: exact eigenvalues up to omega are compared
        #[arg(long)]
        omega: Option<String>,
    },
    /// Eigenvalue-gap convergence study over (rho, k) schedules
    Convergence {
        #[command(flatten)]
        common: CommonArgs,
        /// Band cutoff for tracked eigenvalues
        #[arg(long)]
        omega: Option<String>,
        /// Comma-separated rho values
        #[arg(long = "rho-schedule")]
        rho_schedule: Option<String>,
        /// Comma-separated spline orders
        #[arg(long = "k-schedule")]
        k_schedule: Option<String>,
    },
    /// Eigenfunction reconstruction errors over a band
    Reconstruct {
        #[command(flatten)]
        common: CommonArgs,
        /// Mesh parameter rho
        #[arg(long)]
        rho: Option<String>,
        /// Spline order k
        #[arg(long)]
        k: Option<String>,
        /// Band cutoff: eigenfunctions with lambda <= omega
        #[arg(long)]
        omega: Option<String>,
    },
    /// Projector-remainder scaling fit across a rho schedule
    Poincare {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated rho values
        #[arg(long = "rho-schedule")]
        rho_schedule: Option<String>,
        /// Spline order k [default: 2]
        #[arg(long)]
        k: Option<String>,
        /// Power-of-two Laplacian exponent multiplier m [default: 1]
        #[arg(long)]
        m: Option<String>,
        /// Band limit of the random test vector [default: 9]
        #[arg(long)]
        omega: Option<String>,
    },
    /// Discrete vs exact spectral zeta over a rho schedule and s-grid
    Zeta {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated rho values
        #[arg(long = "rho-schedule")]
        rho_schedule: Option<String>,
        /// Spline order k
        #[arg(long)]
        k: Option<String>,
        /// Comma-separated s values, e.g. "1,1.5,2,2+i"
        #[arg(long = "s-grid")]
        s_grid: Option<String>,
        /// Tail tolerance for exact zeta evaluation [default: 1e-10]
        #[arg(long = "tail-tol")]
        tail_tol: Option<String>,
    },
}

enum Failure {
    Config(Vec<String>),
    Run(beltrami::Error),
    Io(String, std::io::Error),
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Run(beltrami::Error::Io(_)) => 4,
            Failure::Run(e) if e.is_numerical() => 3,
            Failure::Run(_) => 2,
            Failure::Io(..) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "config",
            3 => "numerical",
            _ => "io",
        }
    }

    fn record(&self) -> String {
        let messages: Vec<String> = match self {
            Failure::Config(errs) => errs.clone(),
            Failure::Run(e) => vec![e.to_string()],
            Failure::Io(context, e) => vec![format!("{context}: {e}")],
        };
        serde_json::json!({
            "error": {
                "kind": self.kind(),
                "exit": self.exit_code(),
                "messages": messages,
            }
        })
        .to_string()
    }
}

fn main() {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => {}
        Err(failure) => {
            eprintln!("{}", failure.record());
            std::process::exit(failure.exit_code());
        }
    }
}

/// (experiment, common, experiment-specific flag values)
fn split(command: Command) -> (Experiment, CommonArgs, Vec<(&'static str, Option<String>)>) {
    match command {
        Command::Spectrum { common, lambda_max } => (
            Experiment::Spectrum,
            common,
            vec![("lambda-max", lambda_max)],
        ),
        Command::Pointset {
            common,
            rho,
            probes,
        } => (
            Experiment::Pointset,
            common,
            vec![("rho", rho), ("probes", probes)],
        ),
        Command::Eigs {
            common,
            rho,
            k,
            omega,
        } => (
            Experiment::Eigs,
            common,
            vec![("rho", rho), ("k", k), ("omega", omega)],
        ),
        Command::Convergence {
            common,
            omega,
            rho_schedule,
            k_schedule,
        } => (
            Experiment::Convergence,
            common,
            vec![
                ("omega", omega),
                ("rho-schedule", rho_schedule),
                ("k-schedule", k_schedule),
            ],
        ),
        Command::Reconstruct {
            common,
            rho,
            k,
            omega,
        } => (
            Experiment::Reconstruct,
            common,
            vec![("rho", rho), ("k", k), ("omega", omega)],
        ),
        Command::Poincare {
            common,
            rho_schedule,
            k,
            m,
            omega,
        } => (
            Experiment::Poincare,
            common,
            vec![
                ("rho-schedule", rho_schedule),
                ("k", k),
                ("m", m),
                ("omega", omega),
            ],
        ),
        Command::Zeta {
            common,
            rho_schedule,
            k,
            s_grid,
            tail_tol,
        } => (
            Experiment::Zeta,
            common,
            vec![
                ("rho-schedule", rho_schedule),
                ("k", k),
                ("s-grid", s_grid),
                ("tail-tol", tail_tol),
            ],
        ),
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    let (experiment, common, mut flags) = split(command);
    flags.extend([
        ("manifold", common.manifold),
        ("seed", common.seed),
        ("output", common.output),
        ("format", common.format),
        ("digits", common.digits),
        ("precision", common.precision),
    ]);

    let file_entries = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Io(format!("reading config file {}", path.display()), e))?;
            parse_config_file(&text).map_err(Failure::Config)?
        }
        None => Vec::new(),
    };

    let config: RunConfig =
        build_config(experiment, &flags, &file_entries).map_err(Failure::Config)?;

    let output = experiments::run(&config).map_err(Failure::Run)?;

    for warning in &output.warnings {
        eprintln!("warning: {warning}");
    }
    write_atomic(Path::new(&config.output), &output.document)
        .map_err(|e| Failure::Io(format!("writing {}", config.output), e))?;
    for line in &output.summaries {
        println!("{line}");
    }
    println!("wrote {}", config.output);
    Ok(())
}

/// Writes via a temp file in the target directory plus rename, so an
/// interrupted run never leaves a partial file at the target path.
fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| {
            std::io::Error::new(
                std::io::ErrorKind::InvalidInput,
                "output path has no file name",
            )
        })?
        .to_string_lossy()
        .into_owned();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    std::fs::write(&tmp, bytes)?;
    match std::fs::rename(&tmp, path) {
        Ok(()) => Ok(()),
        Err(e) => {
            let _ = std::fs::remove_file(&tmp);
            Err(e)
        }
    }
}
