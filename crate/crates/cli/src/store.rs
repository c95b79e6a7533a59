//! On-disk formats: datasets, checkpoints, the model registry, and the
//! translation cache.
//!
//! A checkpoint directory holds `manifest.json` and `params.bin`. A registry
//! directory holds one checkpoint directory per model name plus an
//! `index.json` listing the names. The translation cache is a JSON map
//! keyed `backend|lang|digest-hex`, written in sorted order.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use semrel_core::checkpoint::{Checkpoint, Manifest};
use semrel_core::corpus::{parse_dataset, Dataset, Format, LanguageCode, Split};
use semrel_core::crossenc::ModelRegistry;
use semrel_core::translate::{text_digest, CacheKey, TranslationCache};

pub fn read_dataset(path: &Path, format: Format, lang: &str, split: Split) -> Result<Dataset> {
    let bytes =
        std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let lang = LanguageCode::new(lang)?;
    parse_dataset(&bytes, format, lang, split)
        .with_context(|| format!("parsing {}", path.display()))
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn save_checkpoint(checkpoint: &Checkpoint, dir: &Path) -> Result<()> {
    let manifest = serde_json::to_string_pretty(&checkpoint.manifest)
        .context("serializing manifest")?;
    write_file(&dir.join("manifest.json"), format!("{manifest}\n"))?;
    write_file(&dir.join("params.bin"), checkpoint.params_bytes())
}

pub fn load_checkpoint(dir: &Path) -> Result<Checkpoint> {
    let manifest_path = dir.join("manifest.json");
    let manifest_text = std::fs::read_to_string(&manifest_path)
        .with_context(|| format!("reading {}", manifest_path.display()))?;
    let manifest: Manifest =
        serde_json::from_str(&manifest_text).context("parsing manifest.json")?;
    let params_path = dir.join("params.bin");
    let bytes = std::fs::read(&params_path)
        .with_context(|| format!("reading {}", params_path.display()))?;
    Ok(Checkpoint::from_parts(manifest, &bytes)?)
}

#[derive(serde::Serialize, serde::Deserialize)]
struct RegistryIndex {
    models: Vec<String>,
}

/// Writes named best checkpoints under `dir/<name>/` plus `index.json`.
pub fn save_registry(models: &BTreeMap<String, Checkpoint>, dir: &Path) -> Result<()> {
    for (name, checkpoint) in models {
        save_checkpoint(checkpoint, &dir.join(name))?;
    }
    let index = RegistryIndex {
        models: models.keys().cloned().collect(),
    };
    let text = serde_json::to_string_pretty(&index).context("serializing index")?;
    write_file(&dir.join("index.json"), format!("{text}\n"))
}

pub fn load_registry(dir: &Path) -> Result<ModelRegistry> {
    let index_path = dir.join("index.json");
    let text = std::fs::read_to_string(&index_path)
        .with_context(|| format!("reading {}", index_path.display()))?;
    let index: RegistryIndex = serde_json::from_str(&text).context("parsing index.json")?;
    let mut registry = ModelRegistry::new();
    for name in &index.models {
        registry.insert(name, load_checkpoint(&dir.join(name))?);
    }
    Ok(registry)
}

/// Cache location: `$SEMREL_CACHE_DIR` when set, the run's output directory
/// otherwise.
pub fn cache_path(out_dir: &Path) -> PathBuf {
    match std::env::var_os("SEMREL_CACHE_DIR") {
        Some(dir) => PathBuf::from(dir).join("translation_cache.json"),
        None => out_dir.join("translation_cache.json"),
    }
}

pub fn load_cache(path: &Path) -> Result<TranslationCache> {
    let mut cache = TranslationCache::new();
    if !path.exists() {
        return Ok(cache);
    }
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let entries: BTreeMap<String, String> =
        serde_json::from_str(&text).context("parsing translation cache")?;
    for (key, translated) in entries {
        let parts: Vec<&str> = key.splitn(3, '|').collect();
        let [backend, lang, digest_hex] = parts.as_slice() else {
            bail!("bad cache key {key:?}");
        };
        let digest = u64::from_str_radix(digest_hex, 16)
            .with_context(|| format!("bad cache digest in {key:?}"))?;
        cache.insert_raw(
            CacheKey {
                backend: backend.to_string(),
                lang: lang.to_string(),
                digest,
            },
            translated,
        );
    }
    Ok(cache)
}

pub fn save_cache(cache: &TranslationCache, path: &Path) -> Result<()> {
    let entries: BTreeMap<String, &str> = cache
        .iter()
        .map(|(key, text)| {
            (
                format!("{}|{}|{:016x}", key.backend, key.lang, key.digest),
                text,
            )
        })
        .collect();
    let text = serde_json::to_string_pretty(&entries).context("serializing cache")?;
    write_file(path, format!("{text}\n"))
}

/// Round-trip sanity used by tests: digest of a text matches its key form.
#[allow(dead_code)]
pub fn cache_key_for(backend: &str, lang: &str, text: &str) -> String {
    format!("{backend}|{lang}|{:016x}", text_digest(text))
}
