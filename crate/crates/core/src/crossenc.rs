//! Cross-encoder regressor over joint sentence pairs.
//!
//! The pair is encoded as one token sequence — prefix token, sentence one,
//! separator, sentence two — and a scalar head reads the pooled encoding:
//! `ŷ = w · encode(joint) + c`. The prediction is deliberately left
//! unclamped; the rank-based metric only cares about order and clamping
//! could introduce ties.
//!
//! Training runs a fixed epoch budget with a checkpoint at the end of every
//! epoch (no early stopping); the dev split then picks the best epoch via
//! `select_checkpoint`. Three regimes cover per-language models, one model
//! over all languages untranslated, and one model over the
//! translated-and-augmented data.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::checkpoint::{Checkpoint, ConfigEcho};
use crate::corpus::{merge_datasets, Dataset, LanguageCode};
use crate::encoder::{
    content_token_ids, encode_tokens, encode_tokens_backward, EncoderConfig, EncoderParams,
    PoolingMode, TokenizerConfig, CLS_ID, INIT_RANGE, SEP_ID,
};
use crate::biencoder::{EpochRecord, TrainError};
use crate::metrics;
use crate::optim::{adamw_step_with_head, AdamWState, GradientAccumulator};
use crate::rng::RunRng;
use crate::translate::{augment_training, TranslateError, TranslationCache, Translator};

/// How the cross-encoder's training data is assembled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Regime {
    /// One model per language, trained on that language alone.
    Individual,
    /// One model over every language's data, untranslated.
    Unified,
    /// One model over the translated-and-augmented data.
    Translated,
}

impl Regime {
    /// Fixed epoch budget: the translated regime sees several times the
    /// data, so it trains for 2 epochs instead of 10.
    pub fn default_epochs(self) -> usize {
        match self {
            Regime::Translated => 2,
            _ => 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct CrossConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub seed: u64,
    pub pooling: PoolingMode,
}

impl Default for CrossConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            batch_size: 16,
            learning_rate: 1e-5,
            weight_decay: 0.01,
            seed: 0,
            pooling: PoolingMode::Mean,
        }
    }
}

impl CrossConfig {
    pub fn for_regime(regime: Regime) -> Self {
        Self {
            epochs: regime.default_epochs(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(TrainError::InvalidConfig {
                reason: String::from("epochs and batch_size must be >= 1"),
            });
        }
        if self.learning_rate <= 0.0 || !self.learning_rate.is_finite() {
            return Err(TrainError::InvalidConfig {
                reason: String::from("learning_rate must be positive"),
            });
        }
        Ok(())
    }

    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            learning_rate: self.learning_rate,
            weight_decay: self.weight_decay,
            batch_size: self.batch_size,
            grad_accum_steps: None,
            patience: None,
            max_epochs: None,
            epochs: Some(self.epochs),
            seed: self.seed,
        }
    }
}

/// Scalar regression head over the pooled joint encoding.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionHead {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl RegressionHead {
    /// Weights uniform in [-0.1, 0.1]; bias starts at the label midpoint.
    pub fn init(dim: usize, rng: &mut RunRng) -> Self {
        Self {
            weights: (0..dim).map(|_| rng.uniform(-INIT_RANGE, INIT_RANGE)).collect(),
            bias: 0.5,
        }
    }
}

/// Joint token sequence `[CLS] s1-tokens [SEP] s2-tokens`. An empty
/// sentence contributes its unknown-token placeholder, so the sequence is
/// asymmetric in the sentence order by construction.
pub fn joint_tokens(tok: &TokenizerConfig, sentence1: &str, sentence2: &str) -> Vec<usize> {
    let mut ids = alloc::vec![CLS_ID];
    ids.extend(content_token_ids(tok, sentence1));
    ids.push(SEP_ID);
    ids.extend(content_token_ids(tok, sentence2));
    ids
}

/// Forward pass: `ŷ = w · encode(joint) + c`, unclamped.
pub fn cross_forward(
    params: &EncoderParams,
    head: &RegressionHead,
    enc: &EncoderConfig,
    pair: &crate::corpus::LabeledPair,
    pooling: PoolingMode,
) -> f64 {
    cross_forward_tokens(
        params,
        head,
        &enc.tokenizer,
        &pair.sentence1,
        &pair.sentence2,
        pooling,
    )
}

pub(crate) fn cross_forward_tokens(
    params: &EncoderParams,
    head: &RegressionHead,
    tok: &TokenizerConfig,
    sentence1: &str,
    sentence2: &str,
    pooling: PoolingMode,
) -> f64 {
    let ids = joint_tokens(tok, sentence1, sentence2);
    let encoded = encode_tokens(params, &ids, pooling).expect("joint sequence is never empty");
    let mut y = head.bias;
    for (w, e) in head.weights.iter().zip(&encoded) {
        y += w * e;
    }
    y
}

/// Adds one pair's squared-error loss and exact gradients (encoder and
/// head) to the accumulator.
pub fn accumulate_pair(
    params: &EncoderParams,
    head: &RegressionHead,
    enc: &EncoderConfig,
    pair: &crate::corpus::LabeledPair,
    pooling: PoolingMode,
    acc: &mut GradientAccumulator,
) -> Result<(), TrainError> {
    let y = pair.score.ok_or_else(|| TrainError::MissingScore {
        id: pair.id.clone(),
    })?;
    let ids = joint_tokens(&enc.tokenizer, &pair.sentence1, &pair.sentence2);
    let encoded = encode_tokens(params, &ids, pooling)?;
    let mut prediction = head.bias;
    for (w, e) in head.weights.iter().zip(&encoded) {
        prediction += w * e;
    }
    let residual = prediction - y;
    let loss = residual * residual;
    let d_pred = 2.0 * residual;

    let d_weights: Vec<f64> = encoded.iter().map(|e| d_pred * e).collect();
    let upstream: Vec<f64> = head.weights.iter().map(|w| d_pred * w).collect();
    acc.add_encode_grad(&encode_tokens_backward(params, &ids, pooling, &upstream)?);
    acc.add_head_grad(&d_weights, d_pred);
    acc.add_loss(loss);
    Ok(())
}

/// Mean loss and mean gradients over a batch of scored pairs.
pub fn batch_gradients(
    params: &EncoderParams,
    head: &RegressionHead,
    enc: &EncoderConfig,
    pairs: &[crate::corpus::LabeledPair],
    pooling: PoolingMode,
) -> Result<(f64, crate::optim::ModelGradients), TrainError> {
    if pairs.is_empty() {
        return Err(TrainError::EmptyBatch);
    }
    let mut acc = GradientAccumulator::for_cross_encoder(enc.tokenizer.vocab_size, enc.dim);
    for pair in pairs {
        accumulate_pair(params, head, enc, pair, pooling, &mut acc)?;
    }
    Ok(acc.finish())
}

/// A named model with every per-epoch checkpoint it produced.
#[derive(Clone, Debug)]
pub struct TrainedModel {
    pub name: String,
    pub checkpoints: Vec<Checkpoint>,
    pub history: Vec<EpochRecord>,
}

/// Fixed-budget training of one cross-encoder; one checkpoint per epoch.
pub fn train_cross(
    train_ds: &Dataset,
    enc: &EncoderConfig,
    cfg: &CrossConfig,
) -> Result<(Vec<Checkpoint>, Vec<EpochRecord>), TrainError> {
    cfg.validate()?;
    enc.tokenizer.validate()?;
    if train_ds.is_empty() {
        return Err(TrainError::EmptyTrainSet);
    }
    let (vocab, dim) = (enc.tokenizer.vocab_size, enc.dim);
    let mut rng = RunRng::new(cfg.seed);
    let mut params = EncoderParams::init(vocab, dim, &mut rng);
    let mut head = RegressionHead::init(dim, &mut rng);
    let mut state = AdamWState::for_cross_encoder(vocab, dim);

    let n = train_ds.len();
    let mut indices: Vec<usize> = (0..n).collect();
    let mut checkpoints = Vec::with_capacity(cfg.epochs);
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        rng.shuffle(&mut indices);
        let mut epoch_loss_sum = 0.0;
        for chunk in indices.chunks(cfg.batch_size) {
            let mut acc = GradientAccumulator::for_cross_encoder(vocab, dim);
            for &i in chunk {
                accumulate_pair(&params, &head, enc, &train_ds.pairs()[i], cfg.pooling, &mut acc)?;
            }
            epoch_loss_sum += acc.loss_sum();
            let (_, grads) = acc.finish();
            adamw_step_with_head(
                &mut params,
                &mut head.weights,
                &mut head.bias,
                &grads,
                &mut state,
                cfg.learning_rate,
                cfg.weight_decay,
            )?;
        }
        checkpoints.push(Checkpoint::cross_encoder(
            &params,
            &head,
            &enc.tokenizer,
            cfg.pooling,
            epoch,
            cfg.echo(),
        ));
        history.push(EpochRecord {
            epoch,
            train_loss: epoch_loss_sum / n as f64,
            dev_spearman: None,
        });
    }
    Ok((checkpoints, history))
}

/// Trains the models a regime calls for over per-language training sets.
/// `Individual` yields one model per input dataset (named by language);
/// `Unified` merges everything untranslated into one `unified` model;
/// `Translated` augments each set through the configured backends and
/// trains one `translated` model.
pub fn train_regime(
    train_sets: &[Dataset],
    regime: Regime,
    backends: &[alloc::boxed::Box<dyn Translator>],
    cache: &mut TranslationCache,
    enc: &EncoderConfig,
    cfg: &CrossConfig,
) -> Result<Vec<TrainedModel>, RegimeError> {
    if train_sets.is_empty() {
        return Err(RegimeError::NoTrainingData);
    }
    let mut models = Vec::new();
    match regime {
        Regime::Individual => {
            for ds in train_sets {
                let (checkpoints, history) = train_cross(ds, enc, cfg)?;
                models.push(TrainedModel {
                    name: ds.lang().as_str().to_string(),
                    checkpoints,
                    history,
                });
            }
        }
        Regime::Unified => {
            let merged = merge_datasets(train_sets)?;
            let (checkpoints, history) = train_cross(&merged, enc, cfg)?;
            models.push(TrainedModel {
                name: String::from("unified"),
                checkpoints,
                history,
            });
        }
        Regime::Translated => {
            if backends.is_empty() {
                return Err(RegimeError::NoBackends);
            }
            let mut augmented = Vec::with_capacity(train_sets.len());
            for ds in train_sets {
                // unsupported languages pass through untranslated and still
                // join the training mix
                augmented.push(augment_training(ds, backends, cache)?.dataset);
            }
            let merged = merge_datasets(&augmented)?;
            let (checkpoints, history) = train_cross(&merged, enc, cfg)?;
            models.push(TrainedModel {
                name: String::from("translated"),
                checkpoints,
                history,
            });
        }
    }
    Ok(models)
}

#[derive(Debug, PartialEq, thiserror::Error)]
pub enum RegimeError {
    #[error("no training datasets provided")]
    NoTrainingData,
    #[error("the translated regime needs at least one backend")]
    NoBackends,
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Corpus(#[from] crate::corpus::CorpusError),
    #[error(transparent)]
    Translate(#[from] TranslateError),
}

/// Index of the largest score; `None` sorts below every `Some` and ties go
/// to the earliest index.
pub fn argmax_earliest(scores: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<(usize, Option<f64>)> = None;
    for (i, &s) in scores.iter().enumerate() {
        let better = match (&best, s) {
            (None, _) => true,
            (Some((_, None)), Some(_)) => true,
            (Some((_, Some(b))), Some(v)) => v > *b,
            (Some(_), None) => false,
        };
        if better {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}

/// Scores every checkpoint on the dev set and returns the argmax (earliest
/// epoch on ties) with its dev Spearman recorded in the manifest.
pub fn select_checkpoint(
    checkpoints: &[Checkpoint],
    dev_ds: &Dataset,
) -> Result<(Checkpoint, Option<f64>), TrainError> {
    if checkpoints.is_empty() {
        return Err(TrainError::NoCheckpoints);
    }
    let gold = dev_ds.gold_scores().ok_or_else(|| TrainError::MissingScore {
        id: String::from("<dev>"),
    })?;
    let scores: Vec<Option<f64>> = checkpoints
        .iter()
        .map(|ckpt| {
            let predictions = ckpt.predict(dev_ds);
            metrics::spearman(&predictions.scores, &gold).ok()
        })
        .collect();
    let idx = argmax_earliest(&scores).expect("non-empty checkpoint list");
    let mut best = checkpoints[idx].clone();
    best.manifest.dev_spearman = scores[idx];
    Ok((best, scores[idx]))
}

/// Named models available for cross-lingual evaluation.
#[derive(Clone, Debug, Default)]
pub struct ModelRegistry {
    models: alloc::collections::BTreeMap<String, Checkpoint>,
}

impl ModelRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: &str, checkpoint: Checkpoint) {
        self.models.insert(name.to_string(), checkpoint);
    }

    pub fn get(&self, name: &str) -> Option<&Checkpoint> {
        self.models.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.models.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.models.keys().map(|s| s.as_str())
    }
}

/// Cross-lingual routing: English data is evaluated by the Spanish-trained
/// model, every other language by the English-trained model.
pub fn crosslingual_route<'r>(
    lang: &LanguageCode,
    registry: &'r ModelRegistry,
) -> Result<&'r str, TrainError> {
    let target = if lang.as_str() == "eng" { "esp" } else { "eng" };
    if !registry.contains(target) {
        return Err(TrainError::MissingModel {
            name: target.to_string(),
        });
    }
    Ok(match target {
        "esp" => "esp",
        _ => "eng",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{LabeledPair, Split};
    use crate::translate::IdentityBackend;

    fn lang(code: &str) -> LanguageCode {
        LanguageCode::new(code).unwrap()
    }

    fn enc(vocab: usize, dim: usize) -> EncoderConfig {
        EncoderConfig {
            tokenizer: TokenizerConfig {
                vocab_size: vocab,
                hash_seed: 5,
                lowercase: true,
            },
            dim,
        }
    }

    fn pair(id: &str, l: &str, s1: &str, s2: &str, score: f64) -> LabeledPair {
        LabeledPair {
            id: id.into(),
            lang: lang(l),
            sentence1: s1.into(),
            sentence2: s2.into(),
            score: Some(score),
        }
    }

    fn synthetic_cross_task(e: &EncoderConfig, l: &str, n: usize, seed: u64) -> Dataset {
        // labels from a frozen random cross-encoder, rejected into [0, 1]
        let mut rng = RunRng::new(seed);
        let frozen_params = EncoderParams::init(e.tokenizer.vocab_size, e.dim, &mut rng);
        let frozen_head = RegressionHead::init(e.dim, &mut rng);
        let mut pairs = Vec::new();
        let mut sentence = |rng: &mut RunRng| {
            let len = 3 + rng.below(3);
            let mut s = String::new();
            for i in 0..len {
                if i > 0 {
                    s.push(' ');
                }
                s.push_str(&alloc::format!("w{}", rng.below(16)));
            }
            s
        };
        while pairs.len() < n {
            let s1 = sentence(&mut rng);
            let s2 = sentence(&mut rng);
            let y = cross_forward_tokens(
                &frozen_params,
                &frozen_head,
                &e.tokenizer,
                &s1,
                &s2,
                PoolingMode::Mean,
            );
            if (0.0..=1.0).contains(&y) {
                pairs.push(pair(&alloc::format!("{l}{}", pairs.len()), l, &s1, &s2, y));
            }
        }
        Dataset::new(lang(l), Split::Train, pairs).unwrap()
    }

    #[test]
    fn constant_head_predicts_its_bias() {
        let e = enc(32, 4);
        let params = EncoderParams::init(32, 4, &mut RunRng::new(1));
        let head = RegressionHead {
            weights: alloc::vec![0.0; 4],
            bias: 0.5,
        };
        for p in [
            pair("a", "eng", "one two", "three", 0.0),
            pair("b", "eng", "完全 different", "words here", 0.0),
        ] {
            assert_eq!(cross_forward(&params, &head, &e, &p, PoolingMode::Mean), 0.5);
        }
    }

    #[test]
    fn joint_sequence_places_the_separator_between_sentences() {
        let e = enc(32, 4);
        let ids = joint_tokens(&e.tokenizer, "alpha beta", "gamma");
        assert_eq!(ids[0], CLS_ID);
        assert_eq!(ids[3], SEP_ID);
        assert_eq!(ids.len(), 5);
        // swapping sentences moves the separator
        let swapped = joint_tokens(&e.tokenizer, "gamma", "alpha beta");
        assert_ne!(ids, swapped);
    }

    #[test]
    fn swap_symmetry_of_the_position_free_encoder() {
        // token embeddings carry no positional signal, so pooling over the
        // joint sequence sees the same multiset either way and the
        // prediction is symmetric under sentence swap
        let e = enc(32, 4);
        let params = EncoderParams::init(32, 4, &mut RunRng::new(2));
        let head = RegressionHead::init(4, &mut RunRng::new(3));
        let forward = pair("a", "eng", "alpha beta", "gamma delta", 0.0);
        let reversed = pair("a", "eng", "gamma delta", "alpha beta", 0.0);
        for mode in [PoolingMode::Cls, PoolingMode::Max] {
            let y1 = cross_forward(&params, &head, &e, &forward, mode);
            let y2 = cross_forward(&params, &head, &e, &reversed, mode);
            assert_eq!(y1, y2);
        }
        let y1 = cross_forward(&params, &head, &e, &forward, PoolingMode::Mean);
        let y2 = cross_forward(&params, &head, &e, &reversed, PoolingMode::Mean);
        assert!((y1 - y2).abs() < 1e-12);
    }

    #[test]
    fn gradients_match_finite_differences_including_head() {
        let e = enc(16, 4);
        let params = EncoderParams::init(16, 4, &mut RunRng::new(4));
        let head = RegressionHead::init(4, &mut RunRng::new(5));
        let pairs = [
            pair("a", "eng", "one two three", "four five", 0.3),
            pair("b", "eng", "six seven", "one six", 0.9),
        ];
        let mode = PoolingMode::Mean;
        let (_, grads) = batch_gradients(&params, &head, &e, &pairs, mode).unwrap();
        let loss = |p: &EncoderParams, h: &RegressionHead| -> f64 {
            pairs
                .iter()
                .map(|pr| {
                    let y = cross_forward(p, h, &e, pr, mode);
                    let r = y - pr.score.unwrap();
                    r * r
                })
                .sum::<f64>()
                / pairs.len() as f64
        };
        let eps = 1e-5;
        let rel = |a: f64, n: f64| (a - n).abs() / (n.abs() + 1e-8);
        for r in 0..16 {
            for c in 0..4 {
                let mut plus = params.clone();
                plus.embedding.add_at(r, c, eps);
                let mut minus = params.clone();
                minus.embedding.add_at(r, c, -eps);
                let numeric = (loss(&plus, &head) - loss(&minus, &head)) / (2.0 * eps);
                assert!(rel(grads.embedding.get(r, c), numeric) < 1e-6, "dE[{r}][{c}]");
            }
        }
        let head_grads = grads.head_weights.as_ref().unwrap();
        for i in 0..4 {
            let mut plus = head.clone();
            plus.weights[i] += eps;
            let mut minus = head.clone();
            minus.weights[i] -= eps;
            let numeric = (loss(&params, &plus) - loss(&params, &minus)) / (2.0 * eps);
            assert!(rel(head_grads[i], numeric) < 1e-6, "dw[{i}]");
        }
        let mut plus = head.clone();
        plus.bias += eps;
        let mut minus = head.clone();
        minus.bias -= eps;
        let numeric = (loss(&params, &plus) - loss(&params, &minus)) / (2.0 * eps);
        assert!(rel(grads.head_bias, numeric) < 1e-6, "dc");
    }

    #[test]
    fn one_checkpoint_per_epoch() {
        let e = enc(32, 4);
        let ds = synthetic_cross_task(&e, "eng", 8, 10);
        let cfg = CrossConfig {
            epochs: 10,
            batch_size: 4,
            seed: 1,
            ..CrossConfig::default()
        };
        let (checkpoints, history) = train_cross(&ds, &e, &cfg).unwrap();
        assert_eq!(checkpoints.len(), 10);
        assert_eq!(history.len(), 10);
        for (i, ckpt) in checkpoints.iter().enumerate() {
            assert_eq!(ckpt.manifest.epoch, i + 1);
            assert_eq!(ckpt.manifest.model_kind, "crossenc");
        }
    }

    #[test]
    fn individual_regime_trains_one_model_per_language() {
        let e = enc(32, 4);
        let sets = [
            synthetic_cross_task(&e, "eng", 6, 20),
            synthetic_cross_task(&e, "esp", 6, 21),
        ];
        let mut cache = TranslationCache::new();
        let cfg = CrossConfig {
            epochs: 10,
            batch_size: 4,
            seed: 2,
            ..CrossConfig::default()
        };
        let models = train_regime(&sets, Regime::Individual, &[], &mut cache, &e, &cfg).unwrap();
        assert_eq!(models.len(), 2);
        assert_eq!(models[0].name, "eng");
        assert_eq!(models[1].name, "esp");
        assert!(models.iter().all(|m| m.checkpoints.len() == 10));
    }

    #[test]
    fn translated_regime_uses_the_short_epoch_budget() {
        let e = enc(32, 4);
        let sets = [synthetic_cross_task(&e, "esp", 5, 22)];
        let mut cache = TranslationCache::new();
        let cfg = CrossConfig {
            seed: 3,
            batch_size: 4,
            ..CrossConfig::for_regime(Regime::Translated)
        };
        assert_eq!(cfg.epochs, 2);
        let backends: Vec<alloc::boxed::Box<dyn Translator>> =
            alloc::vec![alloc::boxed::Box::new(IdentityBackend::new("ident", true))];
        let models =
            train_regime(&sets, Regime::Translated, &backends, &mut cache, &e, &cfg).unwrap();
        assert_eq!(models.len(), 1);
        assert_eq!(models[0].name, "translated");
        assert_eq!(models[0].checkpoints.len(), 2);
    }

    #[test]
    fn translated_regime_without_backends_is_an_error() {
        let e = enc(32, 4);
        let sets = [synthetic_cross_task(&e, "esp", 5, 23)];
        let mut cache = TranslationCache::new();
        let cfg = CrossConfig::for_regime(Regime::Translated);
        assert_eq!(
            train_regime(&sets, Regime::Translated, &[], &mut cache, &e, &cfg).unwrap_err(),
            RegimeError::NoBackends
        );
    }

    #[test]
    fn unified_regime_merges_everything() {
        let e = enc(32, 4);
        let sets = [
            synthetic_cross_task(&e, "eng", 4, 24),
            synthetic_cross_task(&e, "hin", 5, 25),
        ];
        let mut cache = TranslationCache::new();
        let cfg = CrossConfig {
            epochs: 2,
            batch_size: 4,
            seed: 4,
            ..CrossConfig::default()
        };
        let models = train_regime(&sets, Regime::Unified, &[], &mut cache, &e, &cfg).unwrap();
        assert_eq!(models.len(), 1);
        assert_eq!(models[0].name, "unified");
    }

    #[test]
    fn training_loss_decreases_on_a_realizable_task() {
        let e = enc(48, 6);
        let ds = synthetic_cross_task(&e, "eng", 24, 30);
        let cfg = CrossConfig {
            learning_rate: 1e-2,
            batch_size: 8,
            epochs: 10,
            seed: 31,
            ..CrossConfig::default()
        };
        let (_, history) = train_cross(&ds, &e, &cfg).unwrap();
        assert!(
            history.last().unwrap().train_loss < history[0].train_loss,
            "loss did not decrease: {history:?}"
        );
    }

    #[test]
    fn argmax_earliest_picks_the_best_and_breaks_ties_low() {
        assert_eq!(argmax_earliest(&[Some(0.1), Some(0.3), Some(0.2)]), Some(1));
        assert_eq!(argmax_earliest(&[Some(0.3), Some(0.3)]), Some(0));
        assert_eq!(argmax_earliest(&[Some(0.5)]), Some(0));
        assert_eq!(argmax_earliest(&[None, Some(0.1)]), Some(1));
        assert_eq!(argmax_earliest(&[None, None]), Some(0));
        assert_eq!(argmax_earliest(&[]), None);
    }

    #[test]
    fn select_checkpoint_is_deterministic_and_ties_go_early() {
        let e = enc(32, 4);
        let train_ds = synthetic_cross_task(&e, "eng", 8, 40);
        let dev_ds = Dataset::new(
            lang("eng"),
            Split::Dev,
            synthetic_cross_task(&e, "eng", 6, 41).pairs().to_vec(),
        )
        .unwrap();
        let cfg = CrossConfig {
            epochs: 4,
            batch_size: 4,
            seed: 42,
            ..CrossConfig::default()
        };
        let (checkpoints, _) = train_cross(&train_ds, &e, &cfg).unwrap();
        let (best_a, score_a) = select_checkpoint(&checkpoints, &dev_ds).unwrap();
        let (best_b, score_b) = select_checkpoint(&checkpoints, &dev_ds).unwrap();
        assert_eq!(best_a.manifest.epoch, best_b.manifest.epoch);
        assert_eq!(score_a, score_b);
        // independently recompute the argmax through the public predict path
        let gold = dev_ds.gold_scores().unwrap();
        let scores: Vec<Option<f64>> = checkpoints
            .iter()
            .map(|c| metrics::spearman(&c.predict(&dev_ds).scores, &gold).ok())
            .collect();
        assert_eq!(
            best_a.manifest.epoch,
            argmax_earliest(&scores).unwrap() + 1
        );
        // identical checkpoints tie; the earliest must win
        let twin = alloc::vec![checkpoints[0].clone(), checkpoints[0].clone()];
        let (tied, _) = select_checkpoint(&twin, &dev_ds).unwrap();
        assert_eq!(tied.manifest.epoch, checkpoints[0].manifest.epoch);
    }

    #[test]
    fn select_checkpoint_rejects_an_empty_list() {
        let e = enc(32, 4);
        let dev = synthetic_cross_task(&e, "eng", 4, 43);
        assert_eq!(
            select_checkpoint(&[], &dev).unwrap_err(),
            TrainError::NoCheckpoints
        );
    }

    fn registry_with(names: &[&str]) -> ModelRegistry {
        let e = enc(16, 2);
        let params = EncoderParams::init(16, 2, &mut RunRng::new(1));
        let head = RegressionHead::init(2, &mut RunRng::new(2));
        let ckpt = Checkpoint::cross_encoder(
            &params,
            &head,
            &e.tokenizer,
            PoolingMode::Mean,
            1,
            ConfigEcho::default(),
        );
        let mut registry = ModelRegistry::new();
        for name in names {
            registry.insert(name, ckpt.clone());
        }
        registry
    }

    #[test]
    fn routing_sends_english_to_the_spanish_model_and_back() {
        let registry = registry_with(&["eng", "esp"]);
        assert_eq!(crosslingual_route(&lang("eng"), &registry).unwrap(), "esp");
        assert_eq!(crosslingual_route(&lang("esp"), &registry).unwrap(), "eng");
        assert_eq!(crosslingual_route(&lang("afr"), &registry).unwrap(), "eng");
    }

    #[test]
    fn routing_without_the_required_model_fails() {
        let registry = registry_with(&["eng"]);
        assert_eq!(
            crosslingual_route(&lang("eng"), &registry).unwrap_err(),
            TrainError::MissingModel {
                name: String::from("esp")
            }
        );
    }
}
