//! Run configuration: one JSON document drives every command.
//!
//! Command-line flags override config keys one-for-one: `--train.batch_size 8`
//! replaces `train.batch_size` before the document is deserialized. A single
//! top-level `seed` drives initialization and shuffling everywhere.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use semrel_core::biencoder::TrainConfig;
use semrel_core::corpus::{Format, LanguageCode, Split};
use semrel_core::crossenc::{CrossConfig, Regime};
use semrel_core::encoder::{EncoderConfig, PoolingMode};
use semrel_core::translate::{LexiconBackend, Translator};

use crate::remote::{RemoteBackend, RemoteOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Biencoder,
    Crossenc,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitPaths {
    pub train: Option<PathBuf>,
    pub dev: Option<PathBuf>,
    pub test: Option<PathBuf>,
}

impl SplitPaths {
    pub fn for_split(&self, split: Split) -> Option<&PathBuf> {
        match split {
            Split::Train => self.train.as_ref(),
            Split::Dev => self.dev.as_ref(),
            Split::Test => self.test.as_ref(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Identity,
    Lexicon,
    Remote,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub name: String,
    pub kind: BackendKind,
    pub is_primary: bool,
    /// Source languages the backend supports; absent means all.
    pub languages: Option<Vec<String>>,
    pub lexicon: Option<BTreeMap<String, String>>,
    pub endpoint: Option<String>,
    pub max_batch: usize,
    pub parallelism: usize,
    pub timeout_secs: u64,
    pub attempts: u32,
    pub backoff_ms: u64,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            name: String::new(),
            kind: BackendKind::Identity,
            is_primary: false,
            languages: None,
            lexicon: None,
            endpoint: None,
            max_batch: 32,
            parallelism: 4,
            timeout_secs: 30,
            attempts: 3,
            backoff_ms: 250,
        }
    }
}

impl BackendConfig {
    pub fn build(&self) -> Result<Box<dyn Translator>> {
        if self.name.is_empty() {
            bail!("every backend needs a name");
        }
        let languages: Option<Vec<&str>> = self
            .languages
            .as_ref()
            .map(|langs| langs.iter().map(String::as_str).collect());
        Ok(match self.kind {
            BackendKind::Identity => {
                let mut backend =
                    semrel_core::translate::IdentityBackend::new(&self.name, self.is_primary);
                if let Some(langs) = &languages {
                    backend = backend.with_languages(langs);
                }
                Box::new(backend)
            }
            BackendKind::Lexicon => {
                let lexicon = self
                    .lexicon
                    .clone()
                    .with_context(|| format!("lexicon backend {:?} needs a lexicon", self.name))?;
                let mut backend = LexiconBackend::new(&self.name, self.is_primary, lexicon);
                if let Some(langs) = &languages {
                    backend = backend.with_languages(langs);
                }
                Box::new(backend)
            }
            BackendKind::Remote => {
                let endpoint = self
                    .endpoint
                    .clone()
                    .with_context(|| format!("remote backend {:?} needs an endpoint", self.name))?;
                Box::new(RemoteBackend::new(
                    &self.name,
                    self.is_primary,
                    endpoint,
                    self.languages.clone(),
                    RemoteOptions {
                        max_batch: self.max_batch.max(1),
                        parallelism: self.parallelism.max(1),
                        attempts: self.attempts.max(1),
                        backoff_ms: self.backoff_ms,
                        timeout_secs: self.timeout_secs,
                    },
                ))
            }
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossSettings {
    pub regime: Regime,
    /// Epoch budget; absent means the regime default (10, or 2 translated).
    pub epochs: Option<usize>,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub pooling: PoolingMode,
    /// Skip best-on-dev selection and ship this epoch instead.
    pub fixed_epoch: Option<usize>,
}

impl Default for CrossSettings {
    fn default() -> Self {
        Self {
            regime: Regime::Individual,
            epochs: None,
            batch_size: 16,
            learning_rate: 1e-5,
            weight_decay: 0.01,
            pooling: PoolingMode::Mean,
            fixed_epoch: None,
        }
    }
}

impl CrossSettings {
    pub fn to_core(&self, seed: u64) -> CrossConfig {
        CrossConfig {
            epochs: self.epochs.unwrap_or_else(|| self.regime.default_epochs()),
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            weight_decay: self.weight_decay,
            seed,
            pooling: self.pooling,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub format: Format,
    pub data: BTreeMap<String, SplitPaths>,
    pub backends: Vec<BackendConfig>,
    pub model: ModelKind,
    /// Route training and evaluation data through the translation layer.
    pub translate: bool,
    pub encoder: EncoderConfig,
    pub train: TrainConfig,
    pub cross: CrossSettings,
    pub baseline: BTreeMap<String, f64>,
    /// Optional JSON file of per-language baseline scores; inline `baseline`
    /// entries win on conflict.
    pub baseline_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out_dir: PathBuf::from("out"),
            format: Format::Columnar,
            data: BTreeMap::new(),
            backends: Vec::new(),
            model: ModelKind::Biencoder,
            translate: false,
            encoder: EncoderConfig::default(),
            train: TrainConfig::default(),
            cross: CrossSettings::default(),
            baseline: BTreeMap::new(),
            baseline_path: None,
        }
    }
}

impl RunConfig {
    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        let config: RunConfig =
            serde_json::from_value(value).context("invalid run configuration")?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        for (lang, paths) in &self.data {
            LanguageCode::new(lang)
                .with_context(|| format!("bad language key {lang:?} in data"))?;
            for path in [&paths.train, &paths.dev, &paths.test].into_iter().flatten() {
                if !path.exists() {
                    bail!("data file {} does not exist", path.display());
                }
            }
        }
        if let Some(path) = &self.baseline_path {
            if !path.exists() {
                bail!("baseline file {} does not exist", path.display());
            }
        }
        Ok(())
    }

    /// Core training config with the run seed applied.
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed,
            ..self.train.clone()
        }
    }

    pub fn cross_config(&self) -> CrossConfig {
        self.cross.to_core(self.seed)
    }

    pub fn build_backends(&self) -> Result<Vec<Box<dyn Translator>>> {
        let backends: Vec<Box<dyn Translator>> = self
            .backends
            .iter()
            .map(|b| b.build())
            .collect::<Result<_>>()?;
        semrel_core::translate::validate_backends(&backends)?;
        Ok(backends)
    }

    /// Baseline map: file values overlaid by inline entries.
    pub fn baselines(&self) -> Result<BTreeMap<LanguageCode, f64>> {
        let mut merged: BTreeMap<LanguageCode, f64> = BTreeMap::new();
        if let Some(path) = &self.baseline_path {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let file: BTreeMap<String, f64> =
                serde_json::from_str(&text).context("baseline file must map language to score")?;
            for (lang, score) in file {
                merged.insert(LanguageCode::new(&lang)?, score);
            }
        }
        for (lang, score) in &self.baseline {
            merged.insert(LanguageCode::new(lang)?, *score);
        }
        Ok(merged)
    }

    pub fn out(&self, relative: &str) -> PathBuf {
        self.out_dir.join(relative)
    }

    /// Languages that have a file for the given split, in sorted order.
    pub fn langs_with(&self, split: Split) -> Vec<String> {
        self.data
            .iter()
            .filter(|(_, paths)| paths.for_split(split).is_some())
            .map(|(lang, _)| lang.clone())
            .collect()
    }

    pub fn path_for(&self, lang: &str, split: Split) -> Result<&Path> {
        self.data
            .get(lang)
            .and_then(|paths| paths.for_split(split))
            .map(PathBuf::as_path)
            .with_context(|| format!("no {split} file configured for language {lang:?}"))
    }
}
