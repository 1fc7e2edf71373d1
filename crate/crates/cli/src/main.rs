use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use commands::{execute, exit_code};
use config::{CommandConfig, Format, MatrixSource, RunConfig, DEFAULT_HORIZON};

#[derive(Parser)]
#[command(name = "hedgeplay", version, about = "Optimal and myopic play against a Hedge learner in 2x2 games")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Loss matrix of the learner, e.g. "1,0;-1,3". Entries are decimals or p/q.
    #[arg(long, conflicts_with = "matrix_file")]
    matrix: Option<String>,
    /// File holding the matrix, inline syntax or one row per line.
    #[arg(long)]
    matrix_file: Option<PathBuf>,
    /// Learning rate, or "auto" for sqrt(8 ln 2 / T).
    #[arg(long, default_value = "auto")]
    eta: String,
    #[arg(long = "T", default_value_t = DEFAULT_HORIZON)]
    horizon: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    format: Format,
}

#[derive(Subcommand)]
enum Cmd {
    /// Play the learner against an opponent policy.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// mbr, zero, const-L, const-R, stage-nash or script:<path>
        #[arg(long, default_value = "mbr")]
        policy: String,
    },
    /// Compute the opponent's optimal action sequence.
    Solve {
        #[command(flatten)]
        common: Common,
        /// dp, periodic or brute
        #[arg(long, default_value = "dp")]
        method: String,
    },
    /// Print thresholds, period and landmarks of a game.
    Analyze {
        #[command(flatten)]
        common: Common,
    },
    /// Run the structural check suite; exits 1 if any check fails.
    Verify {
        #[command(flatten)]
        common: Common,
        /// fast or full
        #[arg(long, default_value = "fast")]
        depth: String,
        /// Break one primitive on purpose (transition, payoff, s0-star,
        /// zero-threshold, gamma).
        #[arg(long)]
        mutate: Option<String>,
        /// Number of sampled games when no matrix is given.
        #[arg(long, default_value_t = 200)]
        count: usize,
    },
    /// Re-run a recorded run_config.json.
    Replay {
        config: PathBuf,
        /// Override the recorded output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn config_from(common: Common, command: CommandConfig) -> RunConfig {
    let matrix = match (common.matrix, common.matrix_file) {
        (Some(text), _) => Some(MatrixSource::Inline(text)),
        (None, Some(path)) => Some(MatrixSource::File(path)),
        (None, None) => None,
    };
    RunConfig {
        command,
        matrix,
        eta: common.eta,
        horizon: common.horizon,
        seed: common.seed,
        out: common.out,
        format: common.format,
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match cli.command {
        Cmd::Simulate { common, policy } => config_from(common, CommandConfig::Simulate { policy }),
        Cmd::Solve { common, method } => config_from(common, CommandConfig::Solve { method }),
        Cmd::Analyze { common } => config_from(common, CommandConfig::Analyze),
        Cmd::Verify {
            common,
            depth,
            mutate,
            count,
        } => config_from(common, CommandConfig::Verify { depth, mutate, count }),
        Cmd::Replay { config, out } => {
            let mut cfg = RunConfig::read(&config)?;
            if let Some(out) = out {
                cfg.out = out;
            }
            cfg
        }
    };
    log::debug!("running {}", cfg.command.name());
    execute(&cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
