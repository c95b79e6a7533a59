//! `semrel train`: fit the configured model and write checkpoints.
//!
//! The Siamese model trains with early stopping and writes its best
//! checkpoint plus a JSONL history. The cross-encoder trains its regime's
//! models for a fixed epoch budget, writes every per-epoch checkpoint, and
//! records which epoch the dev data selected; the trained models also form
//! a registry directory usable by `semrel crosslingual`.

use std::collections::BTreeMap;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use semrel_core::biencoder;
use semrel_core::checkpoint::Checkpoint;
use semrel_core::corpus::{merge_datasets, Dataset, Split};
use semrel_core::crossenc::{self, Regime};
use semrel_core::translate::translate_eval;

use crate::commands::{prepare_biencoder_data, TranslationLayer};
use crate::config::{ModelKind, RunConfig};
use crate::store;

pub fn run(config: &RunConfig) -> Result<()> {
    match config.model {
        ModelKind::Biencoder => train_biencoder(config),
        ModelKind::Crossenc => train_crossenc(config),
    }
}

#[derive(Serialize)]
struct TrainSummary<'a> {
    model: &'a str,
    best_epoch: usize,
    dev_spearman: Option<f64>,
    epochs_run: usize,
}

fn history_jsonl(history: &[biencoder::EpochRecord]) -> Result<String> {
    let mut out = String::new();
    for record in history {
        out.push_str(&serde_json::to_string(record)?);
        out.push('\n');
    }
    Ok(out)
}

fn train_biencoder(config: &RunConfig) -> Result<()> {
    let data = prepare_biencoder_data(config)?;
    let cfg = config.train_config();
    eprintln!(
        "training biencoder on {} pairs (dev {}), effective batch {}",
        data.train.len(),
        data.dev.len(),
        cfg.effective_batch()
    );
    let output = biencoder::train(&data.train, &data.dev, &config.encoder, &cfg)?;
    store::save_checkpoint(&output.best, &config.out("checkpoint"))?;
    store::write_file(&config.out("history.jsonl"), history_jsonl(&output.history)?)?;

    let summary = TrainSummary {
        model: "biencoder",
        best_epoch: output.best.manifest.epoch,
        dev_spearman: output.best.manifest.dev_spearman,
        epochs_run: output.history.len(),
    };
    println!("{}", serde_json::to_string(&summary)?);
    Ok(())
}

#[derive(Serialize)]
struct SelectionRecord {
    model: String,
    chosen_epoch: usize,
    dev_spearman: Option<f64>,
    fixed_epoch: bool,
}

fn train_crossenc(config: &RunConfig) -> Result<()> {
    let regime = config.cross.regime;
    let langs = config.langs_with(Split::Train);
    if langs.is_empty() {
        bail!("no languages with training data configured");
    }
    let mut train_sets = Vec::new();
    let mut dev_sets: BTreeMap<String, Dataset> = BTreeMap::new();
    for lang in &langs {
        train_sets.push(store::read_dataset(
            config.path_for(lang, Split::Train)?,
            config.format,
            lang,
            Split::Train,
        )?);
        let dev_path = config
            .path_for(lang, Split::Dev)
            .with_context(|| format!("language {lang:?} has train data but no dev data"))?;
        dev_sets.insert(
            lang.clone(),
            store::read_dataset(dev_path, config.format, lang, Split::Dev)?,
        );
    }

    let mut layer = if regime == Regime::Translated {
        Some(TranslationLayer::open(config)?)
    } else {
        None
    };
    let cfg = config.cross_config();
    let models = {
        let (backends, cache) = match layer.as_mut() {
            Some(layer) => (&layer.backends[..], &mut layer.cache),
            None => (&[][..], &mut Default::default()),
        };
        crossenc::train_regime(&train_sets, regime, backends, cache, &config.encoder, &cfg)?
    };

    // each model is selected on its own dev data: its language's dev for
    // individual models, the merged dev otherwise (translated through the
    // primary backend when the model trained on translated data)
    let mut registry: BTreeMap<String, Checkpoint> = BTreeMap::new();
    for model in &models {
        let model_dir = config.out(&format!("models/{}", model.name));
        for ckpt in &model.checkpoints {
            store::save_checkpoint(ckpt, &model_dir.join(format!("epoch_{:03}", ckpt.manifest.epoch)))?;
        }
        store::write_file(&model_dir.join("history.jsonl"), history_jsonl(&model.history)?)?;

        let dev = selection_dev(regime, &model.name, &dev_sets, layer.as_mut())?;
        let (best, score, fixed) = match config.cross.fixed_epoch {
            Some(epoch) => {
                let ckpt = model
                    .checkpoints
                    .iter()
                    .find(|c| c.manifest.epoch == epoch)
                    .with_context(|| {
                        format!("fixed epoch {epoch} is outside 1..={}", model.checkpoints.len())
                    })?;
                let gold = dev.gold_scores().context("dev data must be scored")?;
                let score =
                    semrel_core::metrics::spearman(&ckpt.predict(&dev).scores, &gold).ok();
                let mut best = ckpt.clone();
                best.manifest.dev_spearman = score;
                (best, score, true)
            }
            None => {
                let (best, score) = crossenc::select_checkpoint(&model.checkpoints, &dev)?;
                (best, score, false)
            }
        };
        store::save_checkpoint(&best, &model_dir.join("best"))?;
        let selection = SelectionRecord {
            model: model.name.clone(),
            chosen_epoch: best.manifest.epoch,
            dev_spearman: score,
            fixed_epoch: fixed,
        };
        store::write_file(
            &model_dir.join("selection.json"),
            format!("{}\n", serde_json::to_string_pretty(&selection)?),
        )?;
        println!("{}", serde_json::to_string(&selection)?);
        registry.insert(model.name.clone(), best);
    }
    if let Some(layer) = &layer {
        layer.save()?;
    }
    store::save_registry(&registry, &config.out("models"))?;
    Ok(())
}

fn selection_dev(
    regime: Regime,
    model_name: &str,
    dev_sets: &BTreeMap<String, Dataset>,
    layer: Option<&mut TranslationLayer>,
) -> Result<Dataset> {
    match regime {
        Regime::Individual => dev_sets
            .get(model_name)
            .cloned()
            .with_context(|| format!("no dev data for language {model_name:?}")),
        Regime::Unified => {
            let sets: Vec<Dataset> = dev_sets.values().cloned().collect();
            Ok(merge_datasets(&sets)?)
        }
        Regime::Translated => {
            let layer = layer.context("translated regime without a translation layer")?;
            let mut translated = Vec::new();
            for ds in dev_sets.values() {
                translated.push(translate_eval(ds, &layer.backends, &mut layer.cache)?.dataset);
            }
            Ok(merge_datasets(&translated)?)
        }
    }
}
