//! Checkpoint snapshots: quantized parameters plus a manifest.
//!
//! A checkpoint on disk is a `manifest.json` / `params.bin` pair. The binary
//! blob is every parameter in the manifest-declared layout order, row-major,
//! as little-endian IEEE-754 32-bit floats. Snapshots taken during training
//! round parameters through f32 at creation time, so the dev score recorded
//! in the manifest is computed from exactly the values a reader of
//! `params.bin` will see.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::biencoder::cosine;
use crate::corpus::Dataset;
use crate::crossenc::{cross_forward_tokens, RegressionHead};
use crate::encoder::{encode_sentence, EncoderParams, PoolingMode, TokenizerConfig};
use crate::mat::Mat;

pub const SCHEMA_VERSION: u32 = 1;
pub const KIND_BIENCODER: &str = "biencoder";
pub const KIND_CROSSENC: &str = "crossenc";

/// One named segment of `params.bin`, in order, with its f32 entry count.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LayoutEntry {
    pub name: String,
    pub len: usize,
}

/// Hyperparameters echoed into the manifest for provenance. Fields that do
/// not apply to a model kind stay `None`.
#[derive(Clone, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConfigEcho {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub grad_accum_steps: Option<usize>,
    pub patience: Option<usize>,
    pub max_epochs: Option<usize>,
    pub epochs: Option<usize>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Manifest {
    pub schema_version: u32,
    pub model_kind: String,
    pub dim: usize,
    pub vocab_size: usize,
    pub hash_seed: u64,
    pub lowercase: bool,
    pub pooling: PoolingMode,
    pub epoch: usize,
    pub dev_spearman: Option<f64>,
    pub config: ConfigEcho,
    pub param_layout: Vec<LayoutEntry>,
}

impl Manifest {
    pub fn tokenizer_config(&self) -> TokenizerConfig {
        TokenizerConfig {
            vocab_size: self.vocab_size,
            hash_seed: self.hash_seed,
            lowercase: self.lowercase,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelParams {
    BiEncoder(EncoderParams),
    CrossEncoder {
        encoder: EncoderParams,
        head: RegressionHead,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub manifest: Manifest,
    pub params: ModelParams,
}

#[derive(Debug, PartialEq, thiserror::Error)]
pub enum CheckpointError {
    #[error("unknown model kind {kind:?}")]
    UnknownKind { kind: String },
    #[error("unsupported schema version {found} (this build reads {expected})")]
    SchemaVersion { expected: u32, found: u32 },
    #[error("parameter layout does not match the manifest dimensions")]
    LayoutMismatch,
    #[error("params blob holds {found} bytes, manifest declares {expected}")]
    LengthMismatch { expected: usize, found: usize },
}

/// Predictions over a dataset, index-aligned with its pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct Predictions {
    pub scores: Vec<f64>,
    /// Pairs whose score was forced to 0 because an embedding had zero norm.
    pub zero_norm_warnings: usize,
}

fn quantize_vec(values: &[f64]) -> Vec<f64> {
    values.iter().map(|&v| v as f32 as f64).collect()
}

fn quantize_mat(m: &Mat) -> Mat {
    let mut out = Mat::zeros(m.rows(), m.cols());
    for (o, &v) in out.data_mut().iter_mut().zip(m.data()) {
        *o = v as f32 as f64;
    }
    out
}

fn quantize_encoder(params: &EncoderParams) -> EncoderParams {
    EncoderParams {
        embedding: quantize_mat(&params.embedding),
        projection: quantize_mat(&params.projection),
        bias: quantize_vec(&params.bias),
    }
}

fn encoder_layout(vocab_size: usize, dim: usize) -> Vec<LayoutEntry> {
    alloc::vec![
        LayoutEntry {
            name: "embedding".to_string(),
            len: vocab_size * dim,
        },
        LayoutEntry {
            name: "projection".to_string(),
            len: dim * dim,
        },
        LayoutEntry {
            name: "bias".to_string(),
            len: dim,
        },
    ]
}

fn cross_layout(vocab_size: usize, dim: usize) -> Vec<LayoutEntry> {
    let mut layout = encoder_layout(vocab_size, dim);
    layout.push(LayoutEntry {
        name: "head_weights".to_string(),
        len: dim,
    });
    layout.push(LayoutEntry {
        name: "head_bias".to_string(),
        len: 1,
    });
    layout
}

impl Checkpoint {
    /// Snapshot of a Siamese encoder; parameters are rounded through f32.
    pub fn bi_encoder(
        params: &EncoderParams,
        tok: &TokenizerConfig,
        pooling: PoolingMode,
        epoch: usize,
        config: ConfigEcho,
    ) -> Self {
        let (vocab_size, dim) = (params.vocab_size(), params.dim());
        Self {
            manifest: Manifest {
                schema_version: SCHEMA_VERSION,
                model_kind: KIND_BIENCODER.to_string(),
                dim,
                vocab_size,
                hash_seed: tok.hash_seed,
                lowercase: tok.lowercase,
                pooling,
                epoch,
                dev_spearman: None,
                config,
                param_layout: encoder_layout(vocab_size, dim),
            },
            params: ModelParams::BiEncoder(quantize_encoder(params)),
        }
    }

    /// Snapshot of a cross-encoder (encoder plus regression head).
    pub fn cross_encoder(
        params: &EncoderParams,
        head: &RegressionHead,
        tok: &TokenizerConfig,
        pooling: PoolingMode,
        epoch: usize,
        config: ConfigEcho,
    ) -> Self {
        let (vocab_size, dim) = (params.vocab_size(), params.dim());
        Self {
            manifest: Manifest {
                schema_version: SCHEMA_VERSION,
                model_kind: KIND_CROSSENC.to_string(),
                dim,
                vocab_size,
                hash_seed: tok.hash_seed,
                lowercase: tok.lowercase,
                pooling,
                epoch,
                dev_spearman: None,
                config,
                param_layout: cross_layout(vocab_size, dim),
            },
            params: ModelParams::CrossEncoder {
                encoder: quantize_encoder(params),
                head: RegressionHead {
                    weights: quantize_vec(&head.weights),
                    bias: head.bias as f32 as f64,
                },
            },
        }
    }

    pub fn encoder(&self) -> &EncoderParams {
        match &self.params {
            ModelParams::BiEncoder(p) => p,
            ModelParams::CrossEncoder { encoder, .. } => encoder,
        }
    }

    pub fn is_cross_encoder(&self) -> bool {
        matches!(self.params, ModelParams::CrossEncoder { .. })
    }

    /// All parameters in layout order as little-endian f32 bytes.
    pub fn params_bytes(&self) -> Vec<u8> {
        let mut values: Vec<f64> = Vec::new();
        match &self.params {
            ModelParams::BiEncoder(p) => {
                values.extend_from_slice(p.embedding.data());
                values.extend_from_slice(p.projection.data());
                values.extend_from_slice(&p.bias);
            }
            ModelParams::CrossEncoder { encoder, head } => {
                values.extend_from_slice(encoder.embedding.data());
                values.extend_from_slice(encoder.projection.data());
                values.extend_from_slice(&encoder.bias);
                values.extend_from_slice(&head.weights);
                values.push(head.bias);
            }
        }
        let mut bytes = Vec::with_capacity(values.len() * 4);
        for v in values {
            bytes.extend_from_slice(&(v as f32).to_le_bytes());
        }
        bytes
    }

    /// Rebuilds a checkpoint from a manifest and a `params.bin` blob,
    /// validating the layout against the manifest dimensions.
    pub fn from_parts(manifest: Manifest, bytes: &[u8]) -> Result<Self, CheckpointError> {
        if manifest.schema_version != SCHEMA_VERSION {
            return Err(CheckpointError::SchemaVersion {
                expected: SCHEMA_VERSION,
                found: manifest.schema_version,
            });
        }
        let expected_layout = match manifest.model_kind.as_str() {
            KIND_BIENCODER => encoder_layout(manifest.vocab_size, manifest.dim),
            KIND_CROSSENC => cross_layout(manifest.vocab_size, manifest.dim),
            other => {
                return Err(CheckpointError::UnknownKind {
                    kind: other.to_string(),
                });
            }
        };
        if manifest.param_layout != expected_layout {
            return Err(CheckpointError::LayoutMismatch);
        }
        let total: usize = expected_layout.iter().map(|e| e.len).sum();
        if bytes.len() != total * 4 {
            return Err(CheckpointError::LengthMismatch {
                expected: total * 4,
                found: bytes.len(),
            });
        }
        let mut values = Vec::with_capacity(total);
        for chunk in bytes.chunks_exact(4) {
            values.push(f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]) as f64);
        }
        let (v, d) = (manifest.vocab_size, manifest.dim);
        let mut cursor = 0usize;
        let mut take = |len: usize| {
            let slice = values[cursor..cursor + len].to_vec();
            cursor += len;
            slice
        };
        let mut embedding = Mat::zeros(v, d);
        embedding.data_mut().copy_from_slice(&take(v * d));
        let mut projection = Mat::zeros(d, d);
        projection.data_mut().copy_from_slice(&take(d * d));
        let bias = take(d);
        let encoder = EncoderParams {
            embedding,
            projection,
            bias,
        };
        let params = if manifest.model_kind == KIND_CROSSENC {
            let weights = take(d);
            let head_bias = take(1)[0];
            ModelParams::CrossEncoder {
                encoder,
                head: RegressionHead {
                    weights,
                    bias: head_bias,
                },
            }
        } else {
            ModelParams::BiEncoder(encoder)
        };
        Ok(Self { manifest, params })
    }

    /// Scores a dataset with whichever model this checkpoint holds. The
    /// Siamese model outputs cosine relatedness in [-1, 1] (zero-norm
    /// embeddings map to 0 and are counted); the cross-encoder outputs the
    /// unclamped regression value.
    pub fn predict(&self, dataset: &Dataset) -> Predictions {
        let tok = self.manifest.tokenizer_config();
        let pooling = self.manifest.pooling;
        let mut scores = Vec::with_capacity(dataset.len());
        let mut zero_norm_warnings = 0usize;
        match &self.params {
            ModelParams::BiEncoder(params) => {
                for pair in dataset.pairs() {
                    let s1 = encode_sentence(params, &tok, &pair.sentence1, pooling);
                    let s2 = encode_sentence(params, &tok, &pair.sentence2, pooling);
                    match cosine(&s1, &s2) {
                        Ok(c) => scores.push(c),
                        Err(_) => {
                            zero_norm_warnings += 1;
                            scores.push(0.0);
                        }
                    }
                }
            }
            ModelParams::CrossEncoder { encoder, head } => {
                for pair in dataset.pairs() {
                    scores.push(cross_forward_tokens(
                        encoder,
                        head,
                        &tok,
                        &pair.sentence1,
                        &pair.sentence2,
                        pooling,
                    ));
                }
            }
        }
        Predictions {
            scores,
            zero_norm_warnings,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RunRng;

    fn tok() -> TokenizerConfig {
        TokenizerConfig {
            vocab_size: 16,
            hash_seed: 1,
            lowercase: true,
        }
    }

    #[test]
    fn params_bytes_round_trip_bitwise() {
        let params = EncoderParams::init(16, 4, &mut RunRng::new(9));
        let ckpt = Checkpoint::bi_encoder(&params, &tok(), PoolingMode::Mean, 3, ConfigEcho::default());
        let bytes = ckpt.params_bytes();
        assert_eq!(bytes.len(), (16 * 4 + 4 * 4 + 4) * 4);
        let back = Checkpoint::from_parts(ckpt.manifest.clone(), &bytes).unwrap();
        // quantized at snapshot time, so the round trip is exact
        assert_eq!(back.params, ckpt.params);
    }

    #[test]
    fn cross_checkpoint_appends_head_segments() {
        let params = EncoderParams::init(16, 4, &mut RunRng::new(9));
        let head = RegressionHead::init(4, &mut RunRng::new(10));
        let ckpt = Checkpoint::cross_encoder(
            &params,
            &head,
            &tok(),
            PoolingMode::Mean,
            1,
            ConfigEcho::default(),
        );
        assert_eq!(ckpt.manifest.model_kind, KIND_CROSSENC);
        let names: Vec<&str> = ckpt
            .manifest
            .param_layout
            .iter()
            .map(|e| e.name.as_str())
            .collect();
        assert_eq!(
            names,
            ["embedding", "projection", "bias", "head_weights", "head_bias"]
        );
        let back = Checkpoint::from_parts(ckpt.manifest.clone(), &ckpt.params_bytes()).unwrap();
        assert_eq!(back.params, ckpt.params);
    }

    #[test]
    fn truncated_blob_is_rejected() {
        let params = EncoderParams::init(16, 4, &mut RunRng::new(9));
        let ckpt = Checkpoint::bi_encoder(&params, &tok(), PoolingMode::Mean, 1, ConfigEcho::default());
        let mut bytes = ckpt.params_bytes();
        bytes.pop();
        assert!(matches!(
            Checkpoint::from_parts(ckpt.manifest.clone(), &bytes).unwrap_err(),
            CheckpointError::LengthMismatch { .. }
        ));
    }

    #[test]
    fn tampered_layout_is_rejected() {
        let params = EncoderParams::init(16, 4, &mut RunRng::new(9));
        let mut ckpt =
            Checkpoint::bi_encoder(&params, &tok(), PoolingMode::Mean, 1, ConfigEcho::default());
        let bytes = ckpt.params_bytes();
        ckpt.manifest.param_layout[0].len += 1;
        assert_eq!(
            Checkpoint::from_parts(ckpt.manifest.clone(), &bytes).unwrap_err(),
            CheckpointError::LayoutMismatch
        );
    }
}
