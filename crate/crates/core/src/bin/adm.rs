//! `adm` command line: run the whole pipeline or a single stage.
//!
//! Exit codes: 0 on success, 1 when a stage fails, 2 for configuration or
//! usage errors. Log verbosity comes from `ADM_LOG` (default `info`).

use std::path::PathBuf;
use std::process::ExitCode;

use adm_core::pipeline::{run_pipeline, run_stage, PipelineConfig, PipelineError, Stage};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "adm", version, about = "Anticipatory discourse mining over short social-media posts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Every stage in order, then the manifest.
    Run(Common),
    Ingest(Common),
    Embed(Common),
    Topics(Common),
    Keywords(Common),
    Affect(Common),
    Stats(Common),
    Kols(Common),
    /// Charts, run summary and manifest.
    Report(Common),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ADM_LOG", "info")).init();
    let cli = Cli::parse();
    let (stage, common) = match cli.command {
        Command::Run(c) => (None, c),
        Command::Ingest(c) => (Some(Stage::Ingest), c),
        Command::Embed(c) => (Some(Stage::Embed), c),
        Command::Topics(c) => (Some(Stage::Topics), c),
        Command::Keywords(c) => (Some(Stage::Keywords), c),
        Command::Affect(c) => (Some(Stage::Affect), c),
        Command::Stats(c) => (Some(Stage::Stats), c),
        Command::Kols(c) => (Some(Stage::Kols), c),
        Command::Report(c) => (Some(Stage::Report), c),
    };

    let mut cfg = match PipelineConfig::load(&common.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(out) = common.out {
        // Relative to the working directory, not the config file.
        cfg.output_dir = std::path::absolute(out).unwrap_or_default();
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = common.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(2);
        }
    };

    let result: Result<(), PipelineError> = pool.install(|| match stage {
        Some(s) => run_stage(&cfg, s),
        None => run_pipeline(&cfg).map(|bundle| {
            log::info!(
                "wrote {} files to {}",
                bundle.manifest.files.len(),
                bundle.output_dir.display()
            );
        }),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
