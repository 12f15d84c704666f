//! `qplab`: config-driven batch runs over the quasi-periodic cocycle
//! toolkit, with deterministic CSV/JSON artifacts.

mod config;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};

use config::RunConfig;
use tasks::TaskIo;

#[derive(Parser)]
#[command(name = "qplab", version, about = "Quasi-periodic cocycle laboratory")]
struct Cli {
    /// TOML run configuration (required by every task except `verify`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "qplab-out")]
    out: PathBuf,

    /// Worker threads for independent energy jobs.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    /// Significant decimal digits kept for decimal frequency inputs.
    #[arg(long, global = true, default_value_t = 50)]
    precision: usize,

    #[command(subcommand)]
    task: Task,
}

#[derive(Subcommand)]
enum Task {
    /// Continued-fraction expansion: convergents, beta exponents, norms.
    Cf,
    /// Finite-scale Lyapunov exponents over the energy spec.
    Lyapunov,
    /// Acceleration estimates (quantized slope of the complexified
    /// exponent).
    Acceleration,
    /// Zero structure of the rational trace function at a convergent scale.
    Zeros,
    /// Large-deviation set of v_m with arcs and measures.
    Deviation,
    /// Box eigenfunction, decay audit and per-site bounds.
    Localize,
    /// Fitted C_v and the derived scheme constants.
    Constants,
    /// Run the acceptance suite and write the deterministic report.
    Verify,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3), // verify ran, some criterion failed
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<bool, Box<dyn std::error::Error>> {
    std::fs::create_dir_all(&cli.out)?;

    if matches!(cli.task, Task::Verify) {
        let io = TaskIo {
            out_dir: cli.out.clone(),
            config_sha256: "none".into(),
            jobs: cli.jobs,
        };
        return Ok(tasks::run_verify(&io)?);
    }

    let config_path = cli
        .config
        .as_ref()
        .ok_or("this task needs --config PATH")?;
    let (cfg, raw) = RunConfig::from_path(config_path)?;
    let digest = Sha256::digest(raw.as_bytes());
    let io = TaskIo {
        out_dir: cli.out.clone(),
        config_sha256: hex::encode(digest),
        jobs: cli.jobs.max(1),
    };
    let precision = cfg.precision.unwrap_or(cli.precision);

    match cli.task {
        Task::Cf => tasks::run_cf(&cfg, &io, precision)?,
        Task::Lyapunov => tasks::run_lyapunov(&cfg, &io, precision)?,
        Task::Acceleration => tasks::run_acceleration(&cfg, &io, precision)?,
        Task::Zeros => tasks::run_zeros(&cfg, &io, precision)?,
        Task::Deviation => tasks::run_deviation(&cfg, &io, precision)?,
        Task::Localize => tasks::run_localize(&cfg, &io, precision)?,
        Task::Constants => tasks::run_constants(&cfg, &io, precision)?,
        Task::Verify => unreachable!("handled above"),
    }
    Ok(true)
}
