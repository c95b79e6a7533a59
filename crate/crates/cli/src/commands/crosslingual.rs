//! `semrel crosslingual`: evaluate each language with the routed model.
//!
//! English data goes to the Spanish-trained model; everything else goes to
//! the English-trained model. The registry directory must therefore hold
//! `eng` and `esp` models. Data is evaluated untranslated: transfer happens
//! through the model, not the text.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};

use semrel_core::corpus::{LanguageCode, Split};
use semrel_core::crossenc::crosslingual_route;
use semrel_core::metrics::{self, EvalResult};

use crate::config::RunConfig;
use crate::store;

pub fn run(
    config: &RunConfig,
    registry_dir: &Path,
    langs: Option<&str>,
    split: Split,
) -> Result<()> {
    let registry = store::load_registry(registry_dir)?;
    let langs: Vec<String> = match langs {
        Some(list) => list
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect(),
        None => config.langs_with(split),
    };

    let mut results: Vec<EvalResult> = Vec::new();
    let mut routing: BTreeMap<String, String> = BTreeMap::new();
    for lang in &langs {
        let code = LanguageCode::new(lang)?;
        let model_name = crosslingual_route(&code, &registry)?;
        routing.insert(lang.clone(), model_name.to_string());
        let checkpoint = registry
            .get(model_name)
            .with_context(|| format!("registry is missing model {model_name:?}"))?;
        let dataset = store::read_dataset(config.path_for(lang, split)?, config.format, lang, split)?;
        let gold = dataset
            .gold_scores()
            .with_context(|| format!("{lang} {split} data has no gold scores to evaluate against"))?;
        let predictions = checkpoint.predict(&dataset);
        match metrics::spearman(&predictions.scores, &gold) {
            Ok(spearman) => results.push(EvalResult {
                model: "crosslingual".to_string(),
                lang: code,
                split,
                spearman,
                n: dataset.len(),
            }),
            Err(_) => eprintln!("{lang}: spearman undefined"),
        }
        eprintln!("{lang} evaluated by the {model_name} model");
    }

    let routing_json = serde_json::to_string_pretty(&routing)?;
    store::write_file(&config.out("crosslingual_routing.json"), format!("{routing_json}\n"))?;

    let baseline = config.baselines()?;
    let table = metrics::report_table(&results, &baseline);
    store::write_file(&config.out("crosslingual.txt"), &table)?;
    store::write_file(
        &config.out("crosslingual.csv"),
        metrics::report_csv(&results, &baseline),
    )?;
    print!("{table}");
    Ok(())
}
