//! Command implementations. Diagnostics go to stderr; data goes to files
//! under the configured output directory or to stdout.

pub mod augment;
pub mod crosslingual;
pub mod eval;
pub mod gradcheck;
pub mod report;
pub mod sweep;
pub mod train;

use anyhow::{bail, Context, Result};

use semrel_core::corpus::{merge_datasets, Dataset, Split};
use semrel_core::translate::{augment_training, translate_eval, TranslationCache, Translator};

use crate::config::RunConfig;
use crate::store;

/// Training and dev data for the Siamese model: merged training set, merged
/// dev set for early stopping, and per-language dev sets for reporting.
pub struct PreparedData {
    pub train: Dataset,
    pub dev: Dataset,
    pub dev_by_lang: Vec<(String, Dataset)>,
}

/// Loads every language with a train file (each also needs a dev file),
/// optionally routes everything through the translation layer, and merges.
pub fn prepare_biencoder_data(config: &RunConfig) -> Result<PreparedData> {
    let langs = config.langs_with(Split::Train);
    if langs.is_empty() {
        bail!("no languages with training data configured");
    }
    let mut train_sets = Vec::new();
    let mut dev_sets = Vec::new();
    for lang in &langs {
        train_sets.push(store::read_dataset(
            config.path_for(lang, Split::Train)?,
            config.format,
            lang,
            Split::Train,
        )?);
        dev_sets.push(store::read_dataset(
            config.path_for(lang, Split::Dev)
                .with_context(|| format!("language {lang:?} has train data but no dev data"))?,
            config.format,
            lang,
            Split::Dev,
        )?);
    }

    if config.translate {
        let backends = config.build_backends()?;
        let cache_path = store::cache_path(&config.out_dir);
        let mut cache = store::load_cache(&cache_path)?;
        for ds in &mut train_sets {
            *ds = augment_training(ds, &backends, &mut cache)?.dataset;
        }
        for ds in &mut dev_sets {
            *ds = translate_eval(ds, &backends, &mut cache)?.dataset;
        }
        store::save_cache(&cache, &cache_path)?;
    }

    let train = merge_datasets(&train_sets)?;
    let dev = merge_datasets(&dev_sets)?;
    let dev_by_lang = langs.into_iter().zip(dev_sets).collect();
    Ok(PreparedData {
        train,
        dev,
        dev_by_lang,
    })
}

/// Loads an eval split and, when the config says so, translates it through
/// the primary backend. Returns the original dataset too: predictions are
/// written against the original pair ids.
pub fn load_eval_dataset(
    config: &RunConfig,
    lang: &str,
    split: Split,
) -> Result<(Dataset, Dataset)> {
    let original = store::read_dataset(config.path_for(lang, split)?, config.format, lang, split)?;
    let eval_ds = if config.translate {
        let backends = config.build_backends()?;
        let cache_path = store::cache_path(&config.out_dir);
        let mut cache = store::load_cache(&cache_path)?;
        let outcome = translate_eval(&original, &backends, &mut cache)?;
        store::save_cache(&cache, &cache_path)?;
        outcome.dataset
    } else {
        original.clone()
    };
    Ok((original, eval_ds))
}

/// Shared handle for commands that translate: backends plus the cache and
/// where to put it back.
pub struct TranslationLayer {
    pub backends: Vec<Box<dyn Translator>>,
    pub cache: TranslationCache,
    pub cache_path: std::path::PathBuf,
}

impl TranslationLayer {
    pub fn open(config: &RunConfig) -> Result<Self> {
        let backends = config.build_backends()?;
        let cache_path = store::cache_path(&config.out_dir);
        let cache = store::load_cache(&cache_path)?;
        Ok(Self {
            backends,
            cache,
            cache_path,
        })
    }

    pub fn save(&self) -> Result<()> {
        store::save_cache(&self.cache, &self.cache_path)
    }
}
