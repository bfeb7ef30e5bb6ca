//! Command-line front end: reproducible monotonization, simulation, fitting,
//! and bootstrap-band pipelines with CSV/JSON artifacts.
//!
//! Exit codes: 0 success, 2 input error, 3 numeric failure, 4 infeasible
//! monotone band. Set `REARRANGE_THREADS` to cap worker threads.

mod commands;
mod io;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rearrange::Error;

#[derive(Parser)]
#[command(name = "rearrange", version, about = "Monotone rearrangement of estimated curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sort a curve's values into its nondecreasing rearrangement.
    Rearrange {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Project a curve onto nondecreasing curves by least squares.
    Isotonize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit the sine demo curve with its rearrangement, CDF, density, and sparsity.
    DemoSine {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 99)]
        net: usize,
    },
    /// Draw a seeded sample from the location-model DGP.
    Simulate {
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit quantile or distribution curves to a sample.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        method: String,
        #[arg(long, default_value = "0.01:0.99:0.01")]
        taus: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bootstrap uniform confidence band for a cell's quantile curve.
    Bands {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value = "control")]
        cell: String,
        #[arg(long, default_value_t = 99)]
        net: usize,
        #[arg(long, default_value_t = 500)]
        b: usize,
        #[arg(long, default_value_t = 0.9)]
        level: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Test monotonicity of the population quantile curve.
    TestMonotone {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 99)]
        net: usize,
        #[arg(long, default_value_t = 500)]
        b: usize,
        #[arg(long, default_value_t = 0.9)]
        level: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Monte Carlo estimation-error ratio table.
    Montecarlo {
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 99)]
        net: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Lorenz curve and box-kernel smoothing of a curve.
    Functionals {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        lorenz: bool,
        /// Smoothing spec of the form delta=0.05.
        #[arg(long)]
        smooth: Option<String>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Run the full simulate/fit/monotonize/bands/test/score pipeline.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::InvalidArgument(_) => "invalid_argument",
        Error::GridMismatch => "grid_mismatch",
        Error::RangeNotCovered => "range_not_covered",
        Error::CriticalValue { .. } => "critical_value",
        Error::WeakInstrument(_) => "weak_instrument",
        Error::SingularDesign(_) => "singular_design",
        Error::GridBoundary => "grid_boundary",
        Error::InsufficientReplicates { .. } => "insufficient_replicates",
        Error::TooManyFailedReplicates { .. } => "too_many_failed_replicates",
        Error::InfeasibleBand => "infeasible_band",
        Error::DegenerateCurve(_) => "degenerate_curve",
        Error::Io(_) => "io",
        Error::Csv(_) => "csv",
        Error::Parse(_) => "parse",
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidArgument(_)
        | Error::GridMismatch
        | Error::RangeNotCovered
        | Error::Io(_)
        | Error::Csv(_)
        | Error::Parse(_) => 2,
        Error::InfeasibleBand => 4,
        _ => 3,
    }
}

fn init_threads() {
    if let Ok(v) = std::env::var("REARRANGE_THREADS") {
        if let Ok(threads) = v.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn dispatch(cli: Cli) -> rearrange::Result<()> {
    match cli.command {
        Command::Rearrange { input, out } => commands::cmd_rearrange(&input, &out),
        Command::Isotonize { input, out } => commands::cmd_isotonize(&input, &out),
        Command::DemoSine { out_dir, net } => commands::cmd_demo_sine(&out_dir, net),
        Command::Simulate { params, n, seed, out } => {
            commands::cmd_simulate(params.as_deref(), n, seed, &out)
        }
        Command::Fit { input, method, taus, out } => {
            let taus = io::parse_taus(&taus)?;
            commands::cmd_fit(&input, &method, &taus, &out)
        }
        Command::Bands { input, out_dir, cell, net, b, level, seed } => {
            commands::cmd_bands(&input, &out_dir, &cell, net, b, level, seed)
        }
        Command::TestMonotone { input, out_dir, net, b, level, seed } => {
            commands::cmd_test_monotone(&input, net, b, level, seed, out_dir.as_deref())
        }
        Command::Montecarlo { n, reps, seed, net, out } => {
            commands::cmd_montecarlo(n, reps, seed, net, &out)
        }
        Command::Functionals { curve, lorenz, smooth, out_dir } => {
            let delta = smooth.as_deref().map(io::parse_smooth).transpose()?;
            commands::cmd_functionals(&curve, lorenz, delta, &out_dir)
        }
        Command::Pipeline { config, out_dir } => {
            commands::cmd_pipeline(&config, out_dir.as_deref())
        }
    }
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let record = serde_json::json!({
                "error": error_kind(&err),
                "message": err.to_string(),
            });
            eprintln!("{record}");
            ExitCode::from(exit_code(&err))
        }
    }
}
