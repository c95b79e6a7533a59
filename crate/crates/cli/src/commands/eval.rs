//! `semrel eval`: score a dataset with a saved checkpoint.
//!
//! Predictions are always written (against the original pair ids, even when
//! evaluation ran on translated text). When the split carries gold scores a
//! Spearman result is printed and appended to `results.jsonl`; a test split
//! without gold produces predictions only.

use std::path::Path;

use anyhow::{bail, Context, Result};

use semrel_core::corpus::{write_predictions, Split};
use semrel_core::metrics::{self, EvalResult, MetricsError};

use crate::commands::load_eval_dataset;
use crate::config::RunConfig;
use crate::store;

pub fn run(config: &RunConfig, checkpoint_dir: &Path, lang: &str, split: Split) -> Result<()> {
    let checkpoint = store::load_checkpoint(checkpoint_dir)?;
    let manifest = &checkpoint.manifest;
    let tok = &config.encoder.tokenizer;
    if manifest.vocab_size != tok.vocab_size
        || manifest.hash_seed != tok.hash_seed
        || manifest.lowercase != tok.lowercase
        || manifest.dim != config.encoder.dim
    {
        bail!(
            "checkpoint does not match the configured encoder: \
             checkpoint has V={} d={} hash_seed={} lowercase={}, \
             config has V={} d={} hash_seed={} lowercase={}",
            manifest.vocab_size,
            manifest.dim,
            manifest.hash_seed,
            manifest.lowercase,
            tok.vocab_size,
            config.encoder.dim,
            tok.hash_seed,
            tok.lowercase
        );
    }

    let (original, eval_ds) = load_eval_dataset(config, lang, split)?;
    let predictions = checkpoint.predict(&eval_ds);
    if predictions.zero_norm_warnings > 0 {
        eprintln!(
            "warning: {} pairs produced zero-norm embeddings (scored 0)",
            predictions.zero_norm_warnings
        );
    }
    let csv = write_predictions(&original, &predictions.scores)?;
    let predictions_path = config.out(&format!("predictions_{lang}_{split}.csv"));
    store::write_file(&predictions_path, csv)?;
    eprintln!("predictions written to {}", predictions_path.display());

    let Some(gold) = original.gold_scores() else {
        // unscored split: predictions only
        return Ok(());
    };
    match metrics::spearman(&predictions.scores, &gold) {
        Ok(spearman) => {
            let result = EvalResult {
                model: manifest.model_kind.clone(),
                lang: original.lang().clone(),
                split,
                spearman,
                n: original.len(),
            };
            let line = serde_json::to_string(&result)?;
            let results_path = config.out("results.jsonl");
            append_line(&results_path, &line)?;
            println!("{line}");
        }
        Err(MetricsError::Undefined) => {
            eprintln!("spearman undefined: predictions or gold scores are constant");
            println!(
                "{}",
                serde_json::json!({
                    "model": manifest.model_kind,
                    "lang": lang,
                    "split": split.as_str(),
                    "spearman": null,
                    "n": original.len(),
                })
            );
        }
        Err(err) => return Err(err).context("computing dev spearman"),
    }
    Ok(())
}

fn append_line(path: &Path, line: &str) -> Result<()> {
    use std::io::Write;
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    writeln!(file, "{line}")?;
    Ok(())
}
