//! `colabel`: command-line front end for the co-training pipeline.

mod commands;
mod manifest;
mod settings;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use colabel::Level;

use settings::Settings;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] colabel::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    /// 2 for bad input, 3 for scorer protocol failures, 4 for internal errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Core(e) => core_exit_code(e),
        }
    }
}

fn core_exit_code(e: &colabel::Error) -> u8 {
    use colabel::Error as E;
    match e {
        E::Protocol(_) | E::Timeout { .. } => 3,
        E::Scoring { source, .. } => core_exit_code(source),
        E::Io(_)
        | E::Parse { .. }
        | E::DuplicateId { .. }
        | E::Invalid(_)
        | E::Training(_)
        | E::ModelFormat(_)
        | E::VersionMismatch { .. } => 2,
    }
}

fn parse_kv(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected key=value, got `{s}`"))
}

#[derive(Debug, Args)]
pub struct Common {
    /// Taxonomy level (A, B or C).
    #[arg(long, global = true)]
    level: Option<Level>,
    /// Seed for every seeded operation [default: 13241].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Plain-text `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for labeling.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override any configuration key, e.g. `--set pmi.min_count=3`.
    #[arg(long = "set", global = true, value_parser = parse_kv)]
    set: Vec<(String, String)>,
}

impl Common {
    fn settings(&self) -> Result<Settings, CliError> {
        let mut overrides = self.set.clone();
        if let Some(l) = self.level {
            overrides.push(("level".into(), l.to_string()));
        }
        if let Some(s) = self.seed {
            overrides.push(("seed".into(), s.to_string()));
        }
        if let Some(t) = self.threads {
            overrides.push(("threads".into(), t.to_string()));
        }
        Settings::load(self.config.as_deref(), &overrides)
    }
}

#[derive(Debug, Parser)]
#[command(name = "colabel", version, about = "Democratic co-training for offensive-language distant labeling")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Filter, anonymize and tokenize a raw JSONL corpus.
    Ingest(commands::IngestArgs),
    /// Train a native model on gold (and optionally distilled distant) data.
    Train(commands::TrainArgs),
    /// Run the three-level cascade over a corpus and write score files.
    Label(commands::LabelArgs),
    /// Select confident distant instances for one level.
    Select(commands::SelectArgs),
    /// Assign Level A easy/hard buckets from per-model predictions.
    Partition(commands::PartitionArgs),
    /// Macro-F1 reports, optionally split into easy and hard slices.
    Eval(commands::EvalArgs),
    /// Histogram of one score column.
    Hist(commands::HistArgs),
    /// Write a seeded synthetic corpus with a planted lexicon signal.
    Synth(commands::SynthArgs),
    /// Serve native models over the scorer protocol on stdin/stdout.
    Serve(commands::ServeArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let settings = cli.common.settings()?;
    let seed = settings.seed()?;
    eprintln!("seed: {seed}");
    match cli.command {
        Command::Ingest(a) => commands::ingest(&settings, a),
        Command::Train(a) => commands::train(&settings, a),
        Command::Label(a) => commands::label(&settings, a),
        Command::Select(a) => commands::select(&settings, a),
        Command::Partition(a) => commands::partition(&settings, a),
        Command::Eval(a) => commands::eval(&settings, a),
        Command::Hist(a) => commands::hist(&settings, a),
        Command::Synth(a) => commands::synth(&settings, a),
        Command::Serve(a) => commands::serve(&settings, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
        Err(_) => ExitCode::from(4),
    }
}
