//! `semrel augment`: translate and multiply the training data.

use anyhow::{bail, Result};
use serde::Serialize;

use semrel_core::corpus::{format_columnar, Split};
use semrel_core::translate::augment_training;

use crate::commands::TranslationLayer;
use crate::config::RunConfig;
use crate::store;

#[derive(Serialize)]
struct AugmentSummary {
    lang: String,
    in_count: usize,
    out_count: usize,
    backends: Vec<String>,
    passthrough: bool,
}

pub fn run(config: &RunConfig) -> Result<()> {
    let langs = config.langs_with(Split::Train);
    if langs.is_empty() {
        bail!("no languages with training data configured");
    }
    let mut layer = TranslationLayer::open(config)?;
    let backend_names: Vec<String> = layer
        .backends
        .iter()
        .map(|b| b.name().to_string())
        .collect();

    let mut summaries = Vec::new();
    for lang in &langs {
        let dataset = store::read_dataset(
            config.path_for(lang, Split::Train)?,
            config.format,
            lang,
            Split::Train,
        )?;
        let outcome = augment_training(&dataset, &layer.backends, &mut layer.cache)?;
        let out_path = config.out(&format!("augmented/{lang}_train.tsv"));
        store::write_file(&out_path, format_columnar(&outcome.dataset)?)?;
        eprintln!(
            "{lang}: {} -> {} pairs ({})",
            dataset.len(),
            outcome.dataset.len(),
            out_path.display()
        );
        summaries.push(AugmentSummary {
            lang: lang.clone(),
            in_count: dataset.len(),
            out_count: outcome.dataset.len(),
            backends: backend_names.clone(),
            passthrough: outcome.passthrough,
        });
    }
    layer.save()?;

    let summary = serde_json::to_string_pretty(&summaries)?;
    store::write_file(&config.out("augmented/summary.json"), format!("{summary}\n"))?;
    println!("{summary}");
    Ok(())
}
