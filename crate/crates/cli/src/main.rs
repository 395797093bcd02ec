mod artifacts;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use satd_core::eval::Task;
use satd_core::pretrain::PretrainMode;

use config::Overrides;

#[derive(Parser)]
#[command(
    name = "satd-forge",
    version,
    about = "Mine, detect and generate self-admitted technical debt"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract outermost `if` statements and their comments from Java sources.
    Mine {
        src_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Label mined records with the keyword protocol.
    Label {
        corpus: PathBuf,
        /// Defaults to rewriting the input in place.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Deduplicate, filter, shuffle and optionally balance labeled records.
    Dataset {
        corpus: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        balance: bool,
        #[arg(long)]
        out: PathBuf,
        /// Where the non-SATD records dropped by balancing go.
        #[arg(long)]
        pool_out: Option<PathBuf>,
    },
    /// Score every grid setting on the held-out tuning set.
    Tune {
        data: PathBuf,
        #[arg(long)]
        task: Task,
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.1)]
        fraction: f64,
        #[arg(long, default_value_t = 3)]
        top: usize,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// K-fold cross-validation of every configured model.
    Cv {
        data: PathBuf,
        #[arg(long)]
        task: Task,
        #[arg(long)]
        hp: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        report: PathBuf,
        /// Use every item instead of holding out the tuning set first.
        #[arg(long)]
        no_holdout: bool,
        #[arg(long, default_value_t = 0.1)]
        fraction: f64,
        #[command(flatten)]
        pretrained: PretrainedArgs,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Train a next-token language model on unlabeled sequences.
    Pretrain {
        pool: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "detect-code")]
        task: Task,
        #[arg(long)]
        hp: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Train one detector or generator on a whole dataset.
    Train {
        data: PathBuf,
        #[arg(long)]
        task: Task,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        hp: Option<PathBuf>,
        /// Detector kind to pick from the config: dl, mnb or svm.
        #[arg(long)]
        model: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        pretrained: PretrainedArgs,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Score each input line with a trained detector.
    Detect {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "detect-code")]
        task: Task,
    },
    /// Write a comment for each input line with a trained generator.
    Generate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
    /// Leave-one-project-out evaluation.
    Xproject {
        data: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value = "detect-comment")]
        task: Task,
        #[arg(long)]
        hp: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated projects to hold out (default: all).
        #[arg(long, value_delimiter = ',')]
        projects: Option<Vec<String>>,
        #[command(flatten)]
        pretrained: PretrainedArgs,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct PretrainedArgs {
    /// Language-model checkpoint to start detectors from.
    #[arg(long)]
    init: Option<PathBuf>,
    #[arg(long, value_parser = parse_mode, requires = "init")]
    mode: Option<PretrainMode>,
}

fn parse_mode(s: &str) -> Result<PretrainMode, String> {
    match s {
        "end2end" => Ok(PretrainMode::End2end),
        "embedding-only" | "embedding_only" => Ok(PretrainMode::EmbeddingOnly),
        _ => Err(format!("expected end2end or embedding-only, got {s:?}")),
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("SATD_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("SATD_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
