//! Command-line front end for the sentence-relatedness toolkit.
//!
//! Every command is driven by a JSON config (`--config`); any flag with a
//! dotted name overrides the matching config key (`--train.batch_size 8`).
//! Commands are deterministic given the config file and seed: outputs carry
//! no timestamps, so a rerun reproduces files byte for byte. Diagnostics go
//! to stderr, data to files and stdout; the exit code is 0 exactly when no
//! error occurred.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use semrel_core::corpus::Split;

use semrel_cli::commands::{self, sweep::SweepAxis};
use semrel_cli::config::RunConfig;
use semrel_cli::overrides;

#[derive(Parser)]
#[command(
    name = "semrel",
    version,
    about = "Train and evaluate sentence-pair relatedness models",
    after_help = "Any flag with a dotted name overrides a config key, e.g. --train.batch_size 8.\n\
                  The SEMREL_CACHE_DIR environment variable relocates the translation cache."
)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the run seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Translate and multiply the training data through every backend.
    Augment,
    /// Train the configured model; writes checkpoints and history.
    Train,
    /// Score a dataset with a saved checkpoint.
    Eval {
        /// Checkpoint directory (manifest.json + params.bin).
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        lang: String,
        #[arg(long, default_value = "dev")]
        split: String,
    },
    /// Train once per axis value and tabulate dev scores per language.
    Sweep {
        #[arg(long, value_enum)]
        axis: SweepAxis,
    },
    /// Evaluate languages with cross-lingually routed models.
    Crosslingual {
        /// Registry directory written by `train` (index.json + models).
        #[arg(long)]
        registry: PathBuf,
        /// Comma-separated language codes; defaults to the config's data keys.
        #[arg(long)]
        langs: Option<String>,
        #[arg(long, default_value = "dev")]
        split: String,
    },
    /// Verify analytic gradients against finite differences.
    Gradcheck {
        #[arg(long, hide = true)]
        inject_wrong_sign: bool,
    },
    /// Render stored evaluation results against the baseline.
    Report {
        /// Results file (JSON lines); defaults to <out>/results.jsonl.
        #[arg(long)]
        results: Option<PathBuf>,
        /// Emit CSV instead of the text table.
        #[arg(long)]
        csv: bool,
    },
}

fn load_config(cli: &Cli, dotted: &[(String, String)]) -> Result<RunConfig> {
    let mut document = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?
        }
        None => serde_json::json!({}),
    };
    for (key, value) in dotted {
        overrides::apply(&mut document, key, value)
            .with_context(|| format!("applying override --{key}"))?;
    }
    let mut config = RunConfig::from_value(document)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.out_dir = out.clone();
    }
    Ok(config)
}

fn run() -> Result<()> {
    let (plain, dotted) = overrides::split_args(std::env::args().collect());
    let cli = Cli::parse_from(plain);
    let config = load_config(&cli, &dotted)?;
    match &cli.command {
        Command::Augment => commands::augment::run(&config),
        Command::Train => commands::train::run(&config),
        Command::Eval {
            checkpoint,
            lang,
            split,
        } => commands::eval::run(&config, checkpoint, lang, split.parse::<Split>()?),
        Command::Sweep { axis } => commands::sweep::run(&config, *axis),
        Command::Crosslingual {
            registry,
            langs,
            split,
        } => commands::crosslingual::run(&config, registry, langs.as_deref(), split.parse()?),
        Command::Gradcheck { inject_wrong_sign } => commands::gradcheck::run(*inject_wrong_sign),
        Command::Report { results, csv } => commands::report::run(&config, results.as_deref(), *csv),
    }
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
