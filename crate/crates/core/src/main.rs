use clap::{Parser, Subcommand};
use log::{error, info, warn};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use trt_core::harness::{self, Level, RunConfig};

#[derive(Parser)]
#[command(name = "trt", version, about = "Restricted transverse ray transform: simulate, reconstruct, validate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the phantom and tabulate TRT data on the curve.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to `outputs.data` of the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reconstruct the field from a simulated dataset.
    Reconstruct {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to `outputs.data` of the config.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Defaults to `outputs.recon` of the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare two tensor rasters over the support ball.
    Validate {
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        estimate: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Certify the configured curve against the support ball.
    CheckCurve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 400)]
        planes: usize,
        #[arg(long, default_value_t = 32)]
        points: usize,
    },
    /// Run the identity checks of every layer.
    Selftest {
        /// Also run an m = 1 end-to-end reconstruction.
        #[arg(long)]
        full: bool,
    },
}

fn init_threads() {
    let Ok(v) = std::env::var("TRT_THREADS") else { return };
    match v.parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                warn!("TRT_THREADS ignored: {e}");
            }
        }
        _ => warn!("TRT_THREADS must be a positive integer, got {v:?}"),
    }
}

fn load(config: &Path) -> trt_core::Result<RunConfig> {
    RunConfig::load(config)
}

fn run(cli: Cli) -> trt_core::Result<bool> {
    match cli.command {
        Command::Simulate { config, out } => {
            let cfg = load(&config)?;
            let out = out.unwrap_or_else(|| cfg.resolve(&cfg.outputs.data));
            let r = harness::simulate(&cfg, &out)?;
            println!("wrote {} and {}", r.field.display(), r.data.display());
            Ok(true)
        }
        Command::Reconstruct { config, data, out } => {
            let cfg = load(&config)?;
            let data = data.unwrap_or_else(|| cfg.resolve(&cfg.outputs.data));
            let out = out.unwrap_or_else(|| cfg.resolve(&cfg.outputs.recon));
            let r = harness::reconstruct(&cfg, &data, &out)?;
            for (x, why) in &r.failures {
                warn!("no estimate at {x:?}: {why}");
            }
            println!("wrote {} and {}", r.estimate.display(), r.probes.display());
            if let Some(t) = &r.truth {
                println!("wrote {}", t.display());
            }
            Ok(r.failures.is_empty())
        }
        Command::Validate { truth, estimate, report } => {
            let r = harness::validate(&truth, &estimate, &report)?;
            print!("{}", r.summary());
            Ok(true)
        }
        Command::CheckCurve { config, planes, points } => {
            let cfg = load(&config)?;
            let c = harness::check_curve(&cfg, planes, points)?;
            println!("encompasses = {}", c.encompass.encompasses);
            if let Some(w) = &c.encompass.witness {
                println!("encompass witness: piece {} lambda {:.6}: {}", w.at.piece, w.at.lambda, w.reason);
            }
            print!("{}", c.kt);
            Ok(c.passed())
        }
        Command::Selftest { full } => {
            let level = if full { Level::Full } else { Level::Quick };
            let r = harness::selftest_suite(level, 0.0);
            println!("{r}");
            Ok(r.passed())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    init_threads();
    let cli = Cli::parse();
    let t0 = std::time::Instant::now();
    let outcome = run(cli);
    info!("total: {:.3} s", t0.elapsed().as_secs_f64());
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            error!("{e}");
            ExitCode::from(2)
        }
    }
}
