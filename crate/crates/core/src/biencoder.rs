//! Siamese bi-encoder trained with a cosine-similarity MSE objective.
//!
//! Both sentences of a pair go through one shared encoder; the model's
//! prediction is the cosine of the two sentence embeddings and the per-pair
//! loss is `(cos(s1, s2) - y)²`. Cosine ranges over [-1, 1] while gold
//! scores live in [0, 1]; no rescaling is applied because the rank-based
//! evaluation metric is invariant to monotone maps.
//!
//! Training runs AdamW over shuffled micro-batches with gradient
//! accumulation, evaluates the dev split after every epoch, and stops once
//! the best dev Spearman has not strictly improved for `patience`
//! consecutive epochs (ties do not reset the counter). The returned
//! checkpoint is the best epoch's snapshot.

use alloc::string::String;
use alloc::vec::Vec;

use crate::checkpoint::{Checkpoint, ConfigEcho};
use crate::corpus::Dataset;
use crate::encoder::{
    encode_tokens, encode_tokens_backward, tokenize, EncoderConfig, EncoderError, EncoderParams,
    PoolingMode,
};
use crate::metrics;
use crate::optim::{adamw_step, AdamWState, GradientAccumulator, OptimError};
use crate::rng::RunRng;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub grad_accum_steps: usize,
    pub patience: usize,
    pub max_epochs: Option<usize>,
    pub seed: u64,
    pub pooling: PoolingMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-5,
            weight_decay: 0.01,
            batch_size: 16,
            grad_accum_steps: 2,
            patience: 10,
            max_epochs: None,
            seed: 0,
            pooling: PoolingMode::Mean,
        }
    }
}

impl TrainConfig {
    pub fn effective_batch(&self) -> usize {
        self.batch_size * self.grad_accum_steps
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        if self.learning_rate <= 0.0 || !self.learning_rate.is_finite() {
            return Err(TrainError::InvalidConfig {
                reason: String::from("learning_rate must be positive"),
            });
        }
        if self.batch_size == 0 || self.grad_accum_steps == 0 || self.patience == 0 {
            return Err(TrainError::InvalidConfig {
                reason: String::from("batch_size, grad_accum_steps, and patience must be >= 1"),
            });
        }
        if self.max_epochs == Some(0) {
            return Err(TrainError::InvalidConfig {
                reason: String::from("max_epochs must be >= 1 when set"),
            });
        }
        Ok(())
    }

    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            learning_rate: self.learning_rate,
            weight_decay: self.weight_decay,
            batch_size: self.batch_size,
            grad_accum_steps: Some(self.grad_accum_steps),
            patience: Some(self.patience),
            max_epochs: self.max_epochs,
            epochs: None,
            seed: self.seed,
        }
    }
}

#[derive(Debug, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error("vectors have different dimensions")]
    DimensionMismatch,
    #[error("cosine undefined: a vector has zero norm")]
    ZeroNorm,
    #[error("pair {id:?} has no gold score")]
    MissingScore { id: String },
    #[error("batch is empty")]
    EmptyBatch,
    #[error("training set is empty")]
    EmptyTrainSet,
    #[error("checkpoint list is empty")]
    NoCheckpoints,
    #[error("model {name:?} missing from the registry")]
    MissingModel { name: String },
    #[error("invalid training config: {reason}")]
    InvalidConfig { reason: String },
    #[error(transparent)]
    Encoder(#[from] EncoderError),
    #[error(transparent)]
    Optim(#[from] OptimError),
}

/// Cosine similarity `u·v / (‖u‖‖v‖)`, clamped into [-1, 1] against
/// floating-point overshoot. Zero-norm inputs are an error.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, TrainError> {
    if u.len() != v.len() {
        return Err(TrainError::DimensionMismatch);
    }
    let mut dot = 0.0;
    let mut uu = 0.0;
    let mut vv = 0.0;
    for (&a, &b) in u.iter().zip(v) {
        dot += a * b;
        uu += a * a;
        vv += b * b;
    }
    if uu == 0.0 || vv == 0.0 {
        return Err(TrainError::ZeroNorm);
    }
    Ok((dot / (libm::sqrt(uu) * libm::sqrt(vv))).clamp(-1.0, 1.0))
}

/// Squared error of the pair's cosine against its gold score.
pub fn pair_loss(
    params: &EncoderParams,
    enc: &EncoderConfig,
    pair: &crate::corpus::LabeledPair,
    pooling: PoolingMode,
) -> Result<f64, TrainError> {
    let y = pair.score.ok_or_else(|| TrainError::MissingScore {
        id: pair.id.clone(),
    })?;
    let s1 = crate::encoder::encode_sentence(params, &enc.tokenizer, &pair.sentence1, pooling);
    let s2 = crate::encoder::encode_sentence(params, &enc.tokenizer, &pair.sentence2, pooling);
    let c = cosine(&s1, &s2)?;
    Ok((c - y) * (c - y))
}

/// Adds one pair's loss and exact gradients to the accumulator. Gradients
/// flow through the cosine into both towers; since the encoder is shared,
/// both contributions land on the same parameters.
pub fn accumulate_pair(
    params: &EncoderParams,
    enc: &EncoderConfig,
    pair: &crate::corpus::LabeledPair,
    pooling: PoolingMode,
    acc: &mut GradientAccumulator,
) -> Result<(), TrainError> {
    let y = pair.score.ok_or_else(|| TrainError::MissingScore {
        id: pair.id.clone(),
    })?;
    let ids1 = tokenize(&enc.tokenizer, &pair.sentence1);
    let ids2 = tokenize(&enc.tokenizer, &pair.sentence2);
    let s1 = encode_tokens(params, &ids1, pooling)?;
    let s2 = encode_tokens(params, &ids2, pooling)?;

    let mut dot = 0.0;
    let mut uu = 0.0;
    let mut vv = 0.0;
    for (&a, &b) in s1.iter().zip(&s2) {
        dot += a * b;
        uu += a * a;
        vv += b * b;
    }
    if uu == 0.0 || vv == 0.0 {
        return Err(TrainError::ZeroNorm);
    }
    let nu = libm::sqrt(uu);
    let nv = libm::sqrt(vv);
    let c = (dot / (nu * nv)).clamp(-1.0, 1.0);
    let loss = (c - y) * (c - y);
    let d_cos = 2.0 * (c - y);

    // d cos / d s1 = s2/(‖s1‖‖s2‖) − cos · s1/‖s1‖², and symmetrically
    let mut up1 = alloc::vec![0.0; s1.len()];
    let mut up2 = alloc::vec![0.0; s2.len()];
    for i in 0..s1.len() {
        up1[i] = d_cos * (s2[i] / (nu * nv) - c * s1[i] / uu);
        up2[i] = d_cos * (s1[i] / (nu * nv) - c * s2[i] / vv);
    }
    acc.add_encode_grad(&encode_tokens_backward(params, &ids1, pooling, &up1)?);
    acc.add_encode_grad(&encode_tokens_backward(params, &ids2, pooling, &up2)?);
    acc.add_loss(loss);
    Ok(())
}

/// Mean loss and mean gradients over a batch of scored pairs.
pub fn batch_gradients(
    params: &EncoderParams,
    enc: &EncoderConfig,
    pairs: &[crate::corpus::LabeledPair],
    pooling: PoolingMode,
) -> Result<(f64, crate::optim::ModelGradients), TrainError> {
    if pairs.is_empty() {
        return Err(TrainError::EmptyBatch);
    }
    let mut acc = GradientAccumulator::for_encoder(enc.tokenizer.vocab_size, enc.dim);
    for pair in pairs {
        accumulate_pair(params, enc, pair, pooling, &mut acc)?;
    }
    Ok(acc.finish())
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_spearman: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainOutput {
    pub best: Checkpoint,
    pub history: Vec<EpochRecord>,
}

/// Trains with early stopping on dev Spearman. See `train_with_scorer` for
/// the loop; this wires in the real dev evaluation (an undefined Spearman —
/// constant predictions, or a dev set too small to rank — counts as minus
/// infinity and training continues).
pub fn train(
    train_ds: &Dataset,
    dev_ds: &Dataset,
    enc: &EncoderConfig,
    cfg: &TrainConfig,
) -> Result<TrainOutput, TrainError> {
    let gold: Vec<f64> = dev_ds
        .gold_scores()
        .ok_or_else(|| TrainError::MissingScore {
            id: String::from("<dev>"),
        })?;
    train_with_scorer(train_ds, enc, cfg, |ckpt| {
        let predictions = ckpt.predict(dev_ds);
        metrics::spearman(&predictions.scores, &gold).ok()
    })
}

/// The training loop with an injectable per-epoch dev scorer. The scorer
/// receives each epoch's checkpoint (already quantized exactly as it would
/// be serialized) and returns the dev score, or `None` when it is
/// undefined. Exists so tests and callers can script the early-stopping
/// signal; `train` is the production entry point.
pub fn train_with_scorer(
    train_ds: &Dataset,
    enc: &EncoderConfig,
    cfg: &TrainConfig,
    mut scorer: impl FnMut(&Checkpoint) -> Option<f64>,
) -> Result<TrainOutput, TrainError> {
    cfg.validate()?;
    enc.tokenizer.validate()?;
    if train_ds.is_empty() {
        return Err(TrainError::EmptyTrainSet);
    }

    let mut rng = RunRng::new(cfg.seed);
    let mut params = EncoderParams::init(enc.tokenizer.vocab_size, enc.dim, &mut rng);
    let mut state = AdamWState::for_encoder(enc.tokenizer.vocab_size, enc.dim);

    let n = train_ds.len();
    let mut indices: Vec<usize> = (0..n).collect();
    let mut history = Vec::new();
    let mut best: Option<Checkpoint> = None;
    let mut best_score: Option<f64> = None;
    let mut stale = 0usize;
    let mut epoch = 0usize;

    loop {
        epoch += 1;
        rng.shuffle(&mut indices);

        let mut epoch_loss_sum = 0.0;
        let mut acc = GradientAccumulator::for_encoder(enc.tokenizer.vocab_size, enc.dim);
        let mut micro_batches = 0usize;
        for chunk in indices.chunks(cfg.batch_size) {
            for &i in chunk {
                accumulate_pair(&params, enc, &train_ds.pairs()[i], cfg.pooling, &mut acc)?;
            }
            micro_batches += 1;
            if micro_batches == cfg.grad_accum_steps {
                epoch_loss_sum += acc.loss_sum();
                let (_, grads) = acc.finish();
                adamw_step(&mut params, &grads, &mut state, cfg.learning_rate, cfg.weight_decay)?;
                acc = GradientAccumulator::for_encoder(enc.tokenizer.vocab_size, enc.dim);
                micro_batches = 0;
            }
        }
        if acc.count() > 0 {
            epoch_loss_sum += acc.loss_sum();
            let (_, grads) = acc.finish();
            adamw_step(&mut params, &grads, &mut state, cfg.learning_rate, cfg.weight_decay)?;
        }
        let train_loss = epoch_loss_sum / n as f64;

        let mut ckpt =
            Checkpoint::bi_encoder(&params, &enc.tokenizer, cfg.pooling, epoch, cfg.echo());
        let dev_spearman = scorer(&ckpt);
        ckpt.manifest.dev_spearman = dev_spearman;
        history.push(EpochRecord {
            epoch,
            train_loss,
            dev_spearman,
        });

        // strict improvement of the best dev score; None never improves an
        // existing best, but the first epoch is always retained
        let improved = best.is_none()
            || match (dev_spearman, best_score) {
                (Some(s), Some(b)) => s > b,
                (Some(_), None) => true,
                (None, _) => false,
            };
        if improved {
            best = Some(ckpt);
            best_score = dev_spearman;
            stale = 0;
        } else {
            stale += 1;
        }

        if stale >= cfg.patience || cfg.max_epochs.is_some_and(|m| epoch >= m) {
            break;
        }
    }

    Ok(TrainOutput {
        best: best.expect("at least one epoch ran"),
        history,
    })
}
