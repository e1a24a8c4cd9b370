//! `ecg-phase`: ingest ECG records, render phase-space images, train and
//! evaluate the classifier.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ecg_phase::phase_space::DerivativeScheme;

use config::RunConfig;
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "ecg-phase", version, about = "Phase-space ECG classification")]
struct Cli {
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Overrides {
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Use the generated corpus instead of the data directory.
    #[arg(long, global = true)]
    synth: bool,
    #[arg(long, global = true)]
    synth_duration: Option<f64>,
    #[arg(long, global = true)]
    channel: Option<String>,
    /// `third_order_forward` or `first_order_forward`.
    #[arg(long, global = true, value_parser = parse_scheme)]
    derivative_scheme: Option<DerivativeScheme>,
    #[arg(long, global = true)]
    q_window_ms: Option<f64>,
    #[arg(long, global = true)]
    margin: Option<f64>,
    #[arg(long, global = true)]
    epochs: Option<usize>,
    #[arg(long, global = true)]
    learning_rate: Option<f64>,
    #[arg(long, global = true)]
    batch_size: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Read records and cache one signal per usable record.
    Ingest,
    /// Render cached signals to phase-space images.
    Render,
    /// Train on the rendered images and evaluate.
    Train,
    /// Evaluate a checkpoint without training.
    Eval {
        /// Defaults to the checkpoint in the output directory.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Comma-separated record ids to keep.
        #[arg(long, value_delimiter = ',')]
        records: Option<Vec<String>>,
        /// Defaults to `eval_report.json` in the output directory.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Ingest, render and train in one go.
    RunAll,
    /// Write the synthetic corpus as WFDB records into the data directory.
    Synth,
}

fn parse_scheme(s: &str) -> Result<DerivativeScheme, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let o = &cli.overrides;
    macro_rules! set {
        ($($field:ident <- $value:expr),* $(,)?) => {
            $(if let Some(v) = $value.clone() { cfg.$field = v; })*
        };
    }
    set!(
        data_dir <- o.data_dir,
        output_dir <- o.output_dir,
        synth_duration_s <- o.synth_duration,
        channel <- o.channel,
        derivative_scheme <- o.derivative_scheme,
        q_window_ms <- o.q_window_ms,
        margin <- o.margin,
        epochs <- o.epochs,
        learning_rate <- o.learning_rate,
        batch_size <- o.batch_size,
        seed <- o.seed,
    );
    cfg.synth |= o.synth;
    cfg.train().validate().map_err(|e| CliError::Usage(e.to_string()))?;
    cfg.split.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = resolve(&cli)?;
    match cli.command {
        Command::Ingest => commands::ingest(&cfg).map(drop),
        Command::Render => commands::render(&cfg).map(drop),
        Command::Train => commands::train_cmd(&cfg).map(drop),
        Command::Eval {
            checkpoint,
            records,
            report,
        } => {
            let checkpoint = checkpoint.unwrap_or_else(|| cfg.output_dir.join(commands::CHECKPOINT));
            let report = report.unwrap_or_else(|| cfg.output_dir.join(commands::EVAL_REPORT));
            commands::eval(&cfg, &checkpoint, records.as_deref(), &report).map(drop)
        }
        Command::RunAll => commands::run_all(&cfg).map(drop),
        Command::Synth => commands::synth(&cfg, &cfg.data_dir).map(drop),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
