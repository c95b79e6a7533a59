//! Pluggable sentence translation into English, with caching and
//! training-set augmentation.
//!
//! Backends implement [`Translator`]; the identity and lexicon backends
//! live here for desk-scale use and tests, while a deployment can add
//! remote machine-translation services behind the same trait. The method
//! only depends on the number and identity of the configured backends:
//! translating every training pair through each of N backends yields an
//! N-fold augmented training set, and evaluation data is translated once
//! through the single backend marked primary.
//!
//! Languages no backend supports pass through untranslated with a flag, so
//! downstream training can still consume them.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::corpus::{CorpusError, Dataset, LabeledPair, LanguageCode, Split};

#[derive(Debug, PartialEq, thiserror::Error)]
pub enum TranslateError {
    #[error("backend {backend:?} does not support language {lang}")]
    UnsupportedLanguage { backend: String, lang: LanguageCode },
    #[error("no backend is marked primary")]
    NoPrimaryBackend,
    #[error("{count} backends are marked primary; exactly one is required")]
    MultiplePrimaryBackends { count: usize },
    #[error("backend names must be unique: {name:?} appears twice")]
    DuplicateBackendName { name: String },
    #[error("no translation backends configured")]
    EmptyBackends,
    #[error("expected a {expected} dataset, found {found}")]
    WrongSplit { expected: &'static str, found: Split },
    #[error("backend {backend:?} failed: {message}")]
    Backend { backend: String, message: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// A translation backend. `translate_batch` must return one output per
/// input, in order; anything else is a backend failure.
pub trait Translator {
    fn name(&self) -> &str;
    fn is_primary(&self) -> bool;
    fn supports(&self, lang: &LanguageCode) -> bool;
    fn translate_batch(
        &self,
        lang: &LanguageCode,
        texts: &[String],
    ) -> Result<Vec<String>, TranslateError>;
}

/// Checks the backend-set invariants: unique names, exactly one primary.
pub fn validate_backends(backends: &[Box<dyn Translator>]) -> Result<(), TranslateError> {
    let mut names = BTreeSet::new();
    for b in backends {
        if !names.insert(b.name().to_string()) {
            return Err(TranslateError::DuplicateBackendName {
                name: b.name().to_string(),
            });
        }
    }
    let primaries = backends.iter().filter(|b| b.is_primary()).count();
    match primaries {
        0 => Err(TranslateError::NoPrimaryBackend),
        1 => Ok(()),
        count => Err(TranslateError::MultiplePrimaryBackends { count }),
    }
}

/// Passes text through unchanged; useful for desk-scale runs and tests.
#[derive(Clone, Debug)]
pub struct IdentityBackend {
    name: String,
    primary: bool,
    languages: Option<BTreeSet<String>>,
}

impl IdentityBackend {
    pub fn new(name: &str, primary: bool) -> Self {
        Self {
            name: name.to_string(),
            primary,
            languages: None,
        }
    }

    /// Restricts the backend to the given source languages.
    pub fn with_languages(mut self, langs: &[&str]) -> Self {
        self.languages = Some(langs.iter().map(|l| l.to_string()).collect());
        self
    }
}

impl Translator for IdentityBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn is_primary(&self) -> bool {
        self.primary
    }

    fn supports(&self, lang: &LanguageCode) -> bool {
        self.languages
            .as_ref()
            .is_none_or(|set| set.contains(lang.as_str()))
    }

    fn translate_batch(
        &self,
        _lang: &LanguageCode,
        texts: &[String],
    ) -> Result<Vec<String>, TranslateError> {
        Ok(texts.to_vec())
    }
}

/// Token-for-token substitution through a fixed map; unmapped tokens are
/// kept verbatim. Deterministic by construction.
#[derive(Clone, Debug)]
pub struct LexiconBackend {
    name: String,
    primary: bool,
    lexicon: BTreeMap<String, String>,
    languages: Option<BTreeSet<String>>,
}

impl LexiconBackend {
    pub fn new(name: &str, primary: bool, lexicon: BTreeMap<String, String>) -> Self {
        Self {
            name: name.to_string(),
            primary,
            lexicon,
            languages: None,
        }
    }

    pub fn with_languages(mut self, langs: &[&str]) -> Self {
        self.languages = Some(langs.iter().map(|l| l.to_string()).collect());
        self
    }
}

impl Translator for LexiconBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn is_primary(&self) -> bool {
        self.primary
    }

    fn supports(&self, lang: &LanguageCode) -> bool {
        self.languages
            .as_ref()
            .is_none_or(|set| set.contains(lang.as_str()))
    }

    fn translate_batch(
        &self,
        _lang: &LanguageCode,
        texts: &[String],
    ) -> Result<Vec<String>, TranslateError> {
        Ok(texts
            .iter()
            .map(|text| {
                let words: Vec<&str> = text
                    .split_whitespace()
                    .map(|w| self.lexicon.get(w).map(String::as_str).unwrap_or(w))
                    .collect();
                words.join(" ")
            })
            .collect())
    }
}

/// 64-bit FNV-1a over the UTF-8 bytes; the stable digest used in cache keys.
pub fn text_digest(text: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in text.as_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CacheKey {
    pub backend: String,
    pub lang: String,
    pub digest: u64,
}

/// Translation memo keyed by (backend name, source language, text digest).
/// A hit returns the translated text byte for byte.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TranslationCache {
    entries: BTreeMap<CacheKey, String>,
}

impl TranslationCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, backend: &str, lang: &LanguageCode, text: &str) -> Option<&str> {
        self.entries
            .get(&CacheKey {
                backend: backend.to_string(),
                lang: lang.as_str().to_string(),
                digest: text_digest(text),
            })
            .map(String::as_str)
    }

    pub fn insert(&mut self, backend: &str, lang: &LanguageCode, text: &str, translated: String) {
        self.entries.insert(
            CacheKey {
                backend: backend.to_string(),
                lang: lang.as_str().to_string(),
                digest: text_digest(text),
            },
            translated,
        );
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in key order, for persistence.
    pub fn iter(&self) -> impl Iterator<Item = (&CacheKey, &str)> {
        self.entries.iter().map(|(k, v)| (k, v.as_str()))
    }

    pub fn insert_raw(&mut self, key: CacheKey, translated: String) {
        self.entries.insert(key, translated);
    }
}

/// Translates one pair into English through `backend`, consulting and
/// updating the cache. The id gains a `.{backend}` suffix so the same
/// source pair stays unique across backends; the gold score is copied
/// untouched.
pub fn translate_pair(
    backend: &dyn Translator,
    pair: &LabeledPair,
    cache: &mut TranslationCache,
) -> Result<LabeledPair, TranslateError> {
    if !backend.supports(&pair.lang) {
        return Err(TranslateError::UnsupportedLanguage {
            backend: backend.name().to_string(),
            lang: pair.lang.clone(),
        });
    }
    let mut translated: Vec<String> = Vec::with_capacity(2);
    let sentences = [&pair.sentence1, &pair.sentence2];
    let misses: Vec<String> = sentences
        .iter()
        .filter(|s| cache.get(backend.name(), &pair.lang, s).is_none())
        .map(|s| (*s).clone())
        .collect();
    if !misses.is_empty() {
        let outputs = backend.translate_batch(&pair.lang, &misses)?;
        if outputs.len() != misses.len() {
            return Err(TranslateError::Backend {
                backend: backend.name().to_string(),
                message: alloc::format!(
                    "returned {} translations for {} texts",
                    outputs.len(),
                    misses.len()
                ),
            });
        }
        for (src, out) in misses.iter().zip(outputs) {
            cache.insert(backend.name(), &pair.lang, src, out);
        }
    }
    for s in sentences {
        translated.push(
            cache
                .get(backend.name(), &pair.lang, s)
                .expect("just inserted")
                .to_string(),
        );
    }
    let sentence2 = translated.pop().expect("two sentences");
    let sentence1 = translated.pop().expect("two sentences");
    Ok(LabeledPair {
        id: alloc::format!("{}.{}", pair.id, backend.name()),
        lang: LanguageCode::new("eng").expect("eng is valid"),
        sentence1,
        sentence2,
        score: pair.score,
    })
}

/// A translated dataset plus a flag marking that the source language was
/// unsupported and passed through untouched.
#[derive(Clone, Debug)]
pub struct TranslateOutcome {
    pub dataset: Dataset,
    pub passthrough: bool,
}

/// N-fold training augmentation: every pair translated by every supporting
/// backend, ordered backend-major. When no backend supports the language
/// the original dataset is returned with `passthrough` set.
pub fn augment_training(
    dataset: &Dataset,
    backends: &[Box<dyn Translator>],
    cache: &mut TranslationCache,
) -> Result<TranslateOutcome, TranslateError> {
    if backends.is_empty() {
        return Err(TranslateError::EmptyBackends);
    }
    if dataset.split() != Split::Train {
        return Err(TranslateError::WrongSplit {
            expected: "train",
            found: dataset.split(),
        });
    }
    let supporting: Vec<&Box<dyn Translator>> = backends
        .iter()
        .filter(|b| b.supports(dataset.lang()))
        .collect();
    if supporting.is_empty() {
        return Ok(TranslateOutcome {
            dataset: dataset.clone(),
            passthrough: true,
        });
    }
    let mut pairs = Vec::with_capacity(supporting.len() * dataset.len());
    for backend in supporting {
        prefetch(backend.as_ref(), dataset, cache)?;
        for pair in dataset.pairs() {
            pairs.push(translate_pair(backend.as_ref(), pair, cache)?);
        }
    }
    Ok(TranslateOutcome {
        dataset: Dataset::new(
            LanguageCode::new("eng").expect("eng is valid"),
            Split::Train,
            pairs,
        )?,
        passthrough: false,
    })
}

/// Evaluation-time translation through the single primary backend. Size and
/// order are unchanged; an unsupported language passes through untouched.
pub fn translate_eval(
    dataset: &Dataset,
    backends: &[Box<dyn Translator>],
    cache: &mut TranslationCache,
) -> Result<TranslateOutcome, TranslateError> {
    if dataset.split() == Split::Train {
        return Err(TranslateError::WrongSplit {
            expected: "dev or test",
            found: dataset.split(),
        });
    }
    let primaries: Vec<&Box<dyn Translator>> =
        backends.iter().filter(|b| b.is_primary()).collect();
    let primary = match primaries.as_slice() {
        [] => return Err(TranslateError::NoPrimaryBackend),
        [one] => one.as_ref(),
        many => {
            return Err(TranslateError::MultiplePrimaryBackends { count: many.len() });
        }
    };
    if !primary.supports(dataset.lang()) {
        return Ok(TranslateOutcome {
            dataset: dataset.clone(),
            passthrough: true,
        });
    }
    prefetch(primary, dataset, cache)?;
    let mut pairs = Vec::with_capacity(dataset.len());
    for pair in dataset.pairs() {
        pairs.push(translate_pair(primary, pair, cache)?);
    }
    Ok(TranslateOutcome {
        dataset: Dataset::new(
            LanguageCode::new("eng").expect("eng is valid"),
            dataset.split(),
            pairs,
        )?,
        passthrough: false,
    })
}

/// Translates every uncached sentence of the dataset in one batch, so the
/// per-pair calls afterwards are pure cache hits. Keeps remote backends to
/// one request per dataset instead of one per pair.
fn prefetch(
    backend: &dyn Translator,
    dataset: &Dataset,
    cache: &mut TranslationCache,
) -> Result<(), TranslateError> {
    let mut misses: Vec<String> = Vec::new();
    let mut seen = BTreeSet::new();
    for pair in dataset.pairs() {
        for s in [&pair.sentence1, &pair.sentence2] {
            if cache.get(backend.name(), dataset.lang(), s).is_none() && seen.insert(s.clone()) {
                misses.push(s.clone());
            }
        }
    }
    if misses.is_empty() {
        return Ok(());
    }
    let outputs = backend.translate_batch(dataset.lang(), &misses)?;
    if outputs.len() != misses.len() {
        return Err(TranslateError::Backend {
            backend: backend.name().to_string(),
            message: alloc::format!(
                "returned {} translations for {} texts",
                outputs.len(),
                misses.len()
            ),
        });
    }
    for (src, out) in misses.iter().zip(outputs) {
        cache.insert(backend.name(), dataset.lang(), src, out);
    }
    Ok(())
}
