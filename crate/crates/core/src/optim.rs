//! AdamW with decoupled weight decay, plus gradient accumulation.
//!
//! Decay is applied to weight matrices (embeddings, projection, and the
//! regression head weights) but not to bias terms. The accumulator sums
//! per-pair gradient contributions in visit order and divides once at the
//! end, so accumulating k micro-batches and averaging is bit-identical to
//! one batch over the same pairs.

use alloc::vec::Vec;

use crate::encoder::{EncodeGrad, EncoderParams};
use crate::mat::Mat;

#[derive(Debug, PartialEq, thiserror::Error)]
pub enum OptimError {
    #[error("non-finite gradient entry in {group}")]
    NonFiniteGradient { group: &'static str },
    #[error("gradient shape does not match parameters")]
    ShapeMismatch,
}

/// First/second-moment accumulators mirroring the parameter shapes.
#[derive(Clone, Debug)]
pub struct AdamWState {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    m_embedding: Mat,
    v_embedding: Mat,
    m_projection: Mat,
    v_projection: Mat,
    m_bias: Vec<f64>,
    v_bias: Vec<f64>,
    m_head_weights: Vec<f64>,
    v_head_weights: Vec<f64>,
    m_head_bias: f64,
    v_head_bias: f64,
}

impl AdamWState {
    /// State for the Siamese encoder (no regression head).
    pub fn for_encoder(vocab_size: usize, dim: usize) -> Self {
        Self::sized(vocab_size, dim, 0)
    }

    /// State for the cross-encoder (encoder plus head of `dim` weights).
    pub fn for_cross_encoder(vocab_size: usize, dim: usize) -> Self {
        Self::sized(vocab_size, dim, dim)
    }

    fn sized(vocab_size: usize, dim: usize, head: usize) -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m_embedding: Mat::zeros(vocab_size, dim),
            v_embedding: Mat::zeros(vocab_size, dim),
            m_projection: Mat::zeros(dim, dim),
            v_projection: Mat::zeros(dim, dim),
            m_bias: alloc::vec![0.0; dim],
            v_bias: alloc::vec![0.0; dim],
            m_head_weights: alloc::vec![0.0; head],
            v_head_weights: alloc::vec![0.0; head],
            m_head_bias: 0.0,
            v_head_bias: 0.0,
        }
    }
}

/// Dense mean gradients over a batch, mirroring the parameter shapes. The
/// head fields are used only by the cross-encoder.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelGradients {
    pub embedding: Mat,
    pub projection: Mat,
    pub bias: Vec<f64>,
    pub head_weights: Option<Vec<f64>>,
    pub head_bias: f64,
}

/// Sums per-pair losses and gradients; `finish` divides by the pair count.
#[derive(Clone, Debug)]
pub struct GradientAccumulator {
    grads: ModelGradients,
    loss_sum: f64,
    count: usize,
}

impl GradientAccumulator {
    pub fn for_encoder(vocab_size: usize, dim: usize) -> Self {
        Self::sized(vocab_size, dim, false)
    }

    pub fn for_cross_encoder(vocab_size: usize, dim: usize) -> Self {
        Self::sized(vocab_size, dim, true)
    }

    fn sized(vocab_size: usize, dim: usize, with_head: bool) -> Self {
        Self {
            grads: ModelGradients {
                embedding: Mat::zeros(vocab_size, dim),
                projection: Mat::zeros(dim, dim),
                bias: alloc::vec![0.0; dim],
                head_weights: with_head.then(|| alloc::vec![0.0; dim]),
                head_bias: 0.0,
            },
            loss_sum: 0.0,
            count: 0,
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Raw loss sum before averaging; handy for epoch bookkeeping.
    pub fn loss_sum(&self) -> f64 {
        self.loss_sum
    }

    /// Folds one sparse encoder gradient into the dense sums.
    pub fn add_encode_grad(&mut self, g: &EncodeGrad) {
        for (&id, row) in &g.embedding_rows {
            for (j, &v) in row.iter().enumerate() {
                self.grads.embedding.add_at(id, j, v);
            }
        }
        for (o, &v) in self
            .grads
            .projection
            .data_mut()
            .iter_mut()
            .zip(g.projection.data())
        {
            *o += v;
        }
        for (o, &v) in self.grads.bias.iter_mut().zip(&g.bias) {
            *o += v;
        }
    }

    pub fn add_head_grad(&mut self, d_weights: &[f64], d_bias: f64) {
        let head = self
            .grads
            .head_weights
            .as_mut()
            .expect("accumulator was built without a head");
        for (o, &v) in head.iter_mut().zip(d_weights) {
            *o += v;
        }
        self.grads.head_bias += d_bias;
    }

    /// Records one pair's loss; call exactly once per accumulated pair.
    pub fn add_loss(&mut self, loss: f64) {
        self.loss_sum += loss;
        self.count += 1;
    }

    /// Mean loss and mean gradients over everything accumulated so far.
    pub fn finish(mut self) -> (f64, ModelGradients) {
        let n = self.count.max(1) as f64;
        for v in self.grads.embedding.data_mut() {
            *v /= n;
        }
        for v in self.grads.projection.data_mut() {
            *v /= n;
        }
        for v in &mut self.grads.bias {
            *v /= n;
        }
        if let Some(head) = &mut self.grads.head_weights {
            for v in head {
                *v /= n;
            }
        }
        self.grads.head_bias /= n;
        (self.loss_sum / n, self.grads)
    }
}

/// One decoupled-weight-decay update for a slice of parameters:
/// m ← β₁m + (1−β₁)g, v ← β₂v + (1−β₂)g², then
/// p ← p − lr·m̂/(√v̂+ε) − lr·wd·p with bias-corrected m̂, v̂.
#[allow(clippy::too_many_arguments)]
fn update_slice(
    p: &mut [f64],
    g: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    state_step: u64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    lr: f64,
    wd: f64,
    decay: bool,
    group: &'static str,
) -> Result<(), OptimError> {
    if p.len() != g.len() || p.len() != m.len() || p.len() != v.len() {
        return Err(OptimError::ShapeMismatch);
    }
    if g.iter().any(|x| !x.is_finite()) {
        return Err(OptimError::NonFiniteGradient { group });
    }
    let bc1 = 1.0 - libm::pow(beta1, state_step as f64);
    let bc2 = 1.0 - libm::pow(beta2, state_step as f64);
    for i in 0..p.len() {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        let decay_term = if decay { lr * wd * p[i] } else { 0.0 };
        p[i] -= lr * m_hat / (libm::sqrt(v_hat) + eps) + decay_term;
    }
    Ok(())
}

/// AdamW step over the Siamese encoder parameters. Decay applies to the
/// embedding table and projection, not to the bias.
pub fn adamw_step(
    params: &mut EncoderParams,
    grads: &ModelGradients,
    state: &mut AdamWState,
    lr: f64,
    weight_decay: f64,
) -> Result<(), OptimError> {
    state.step += 1;
    let (b1, b2, eps, t) = (state.beta1, state.beta2, state.eps, state.step);
    update_slice(
        params.embedding.data_mut(),
        grads.embedding.data(),
        state.m_embedding.data_mut(),
        state.v_embedding.data_mut(),
        t,
        b1,
        b2,
        eps,
        lr,
        weight_decay,
        true,
        "embedding",
    )?;
    update_slice(
        params.projection.data_mut(),
        grads.projection.data(),
        state.m_projection.data_mut(),
        state.v_projection.data_mut(),
        t,
        b1,
        b2,
        eps,
        lr,
        weight_decay,
        true,
        "projection",
    )?;
    update_slice(
        &mut params.bias,
        &grads.bias,
        &mut state.m_bias,
        &mut state.v_bias,
        t,
        b1,
        b2,
        eps,
        lr,
        weight_decay,
        false,
        "bias",
    )
}

/// AdamW step over encoder plus regression head. Head weights decay, the
/// head bias does not.
pub fn adamw_step_with_head(
    params: &mut EncoderParams,
    head_weights: &mut [f64],
    head_bias: &mut f64,
    grads: &ModelGradients,
    state: &mut AdamWState,
    lr: f64,
    weight_decay: f64,
) -> Result<(), OptimError> {
    adamw_step(params, grads, state, lr, weight_decay)?;
    let (b1, b2, eps, t) = (state.beta1, state.beta2, state.eps, state.step);
    let head_grads = grads.head_weights.as_ref().ok_or(OptimError::ShapeMismatch)?;
    update_slice(
        head_weights,
        head_grads,
        &mut state.m_head_weights,
        &mut state.v_head_weights,
        t,
        b1,
        b2,
        eps,
        lr,
        weight_decay,
        true,
        "head_weights",
    )?;
    let mut bias_slice = [*head_bias];
    let mut m = [state.m_head_bias];
    let mut v = [state.v_head_bias];
    update_slice(
        &mut bias_slice,
        &[grads.head_bias],
        &mut m,
        &mut v,
        t,
        b1,
        b2,
        eps,
        lr,
        weight_decay,
        false,
        "head_bias",
    )?;
    *head_bias = bias_slice[0];
    state.m_head_bias = m[0];
    state.v_head_bias = v[0];
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RunRng;

    fn tiny_params(seed: u64) -> EncoderParams {
        EncoderParams::init(4, 2, &mut RunRng::new(seed))
    }

    fn zero_grads() -> ModelGradients {
        ModelGradients {
            embedding: Mat::zeros(4, 2),
            projection: Mat::zeros(2, 2),
            bias: alloc::vec![0.0; 2],
            head_weights: None,
            head_bias: 0.0,
        }
    }

    #[test]
    fn zero_gradient_without_decay_is_a_fixed_point() {
        let mut params = tiny_params(1);
        let before = params.clone();
        let mut state = AdamWState::for_encoder(4, 2);
        adamw_step(&mut params, &zero_grads(), &mut state, 1e-5, 0.0).unwrap();
        assert_eq!(params, before);
        assert_eq!(state.step, 1);
    }

    #[test]
    fn decay_alone_shrinks_weights_by_lr_times_wd() {
        // p = 1, g = 0, lr = 1e-5, wd = 0.01 -> p' = 1 - 1e-7
        let mut params = tiny_params(1);
        for v in params.embedding.data_mut() {
            *v = 1.0;
        }
        params.bias = alloc::vec![1.0; 2];
        let mut state = AdamWState::for_encoder(4, 2);
        adamw_step(&mut params, &zero_grads(), &mut state, 1e-5, 0.01).unwrap();
        for &v in params.embedding.data() {
            assert_eq!(v, 1.0 - 1e-7);
        }
        // bias is exempt from decay
        assert_eq!(params.bias, alloc::vec![1.0; 2]);
    }

    #[test]
    fn first_step_moves_against_gradient_sign_by_lr() {
        // at t = 1, m̂ = g and √v̂ = |g|, so the update is ≈ −lr · sign(g)
        let mut params = tiny_params(2);
        let before = params.embedding.get(3, 0);
        let mut grads = zero_grads();
        grads.embedding.set(3, 0, 0.5);
        let mut state = AdamWState::for_encoder(4, 2);
        let lr = 1e-3;
        adamw_step(&mut params, &grads, &mut state, lr, 0.0).unwrap();
        let delta = params.embedding.get(3, 0) - before;
        // eps makes the magnitude slightly under lr
        assert!(delta < 0.0 && (delta + lr).abs() < 1e-7, "delta = {delta}");
    }

    #[test]
    fn non_finite_gradients_are_rejected() {
        let mut params = tiny_params(3);
        let mut grads = zero_grads();
        grads.projection.set(0, 0, f64::NAN);
        let mut state = AdamWState::for_encoder(4, 2);
        let err = adamw_step(&mut params, &grads, &mut state, 1e-5, 0.0).unwrap_err();
        assert_eq!(err, OptimError::NonFiniteGradient { group: "projection" });
    }

    #[test]
    fn accumulator_means_losses_and_counts() {
        let mut acc = GradientAccumulator::for_encoder(4, 2);
        acc.add_loss(1.0);
        acc.add_loss(3.0);
        assert_eq!(acc.count(), 2);
        let (loss, grads) = acc.finish();
        assert_eq!(loss, 2.0);
        assert!(grads.head_weights.is_none());
    }
}
