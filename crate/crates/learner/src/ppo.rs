//! Clipped-surrogate PPO with a clipped value loss, an entropy bonus and
//! Adam, all over the flat weight vector of [`PolicyParams`].

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{entropy, log_softmax, softmax, PolicyParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip_ratio: f64,
    /// Maximum change of the value prediction per update that the value
    /// loss rewards.
    pub value_clip: f64,
    pub learning_rate: f64,
    pub minibatch_size: usize,
    pub epochs: usize,
    /// Decisions collected per update (each yields one sample per agent).
    pub rollout_decisions: usize,
    /// Training budget in environment ticks.
    pub total_env_steps: u64,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub max_grad_norm: f64,
    /// Multiplies environment rewards before advantage estimation.
    pub reward_scale: f64,
    pub hidden: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            gae_lambda: 0.95,
            clip_ratio: 0.2,
            value_clip: 15.0,
            learning_rate: 3e-4,
            minibatch_size: 256,
            epochs: 4,
            rollout_decisions: 2048,
            total_env_steps: 400_000,
            entropy_coef: 0.01,
            value_coef: 0.5,
            max_grad_norm: 0.5,
            reward_scale: 1.0,
            hidden: 64,
            seed: 0,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
}

impl TrainConfig {
    /// Settings for small floor plans with a 10-tick decision interval:
    /// shorter credit horizon, larger steps, smaller batches.
    pub fn desk() -> Self {
        Self {
            gamma: 0.95,
            gae_lambda: 0.9,
            learning_rate: 1e-3,
            minibatch_size: 64,
            epochs: 10,
            rollout_decisions: 500,
            total_env_steps: 300_000,
            reward_scale: 0.1,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma must lie in (0, 1)");
        }
        if !(self.gae_lambda > 0.0 && self.gae_lambda <= 1.0) {
            return bad("gae_lambda must lie in (0, 1]");
        }
        if !(self.clip_ratio > 0.0) {
            return bad("clip_ratio must be positive");
        }
        if !(self.value_clip > 0.0) {
            return bad("value_clip must be positive");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if self.minibatch_size == 0 || self.epochs == 0 || self.rollout_decisions == 0 || self.hidden == 0 {
            return bad("minibatch_size, epochs, rollout_decisions and hidden must be positive");
        }
        if !(self.entropy_coef >= 0.0 && self.value_coef >= 0.0 && self.max_grad_norm > 0.0 && self.reward_scale > 0.0) {
            return bad("coefficients must be non-negative and max_grad_norm, reward_scale positive");
        }
        Ok(())
    }
}

/// One training example.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub obs: Vec<f64>,
    pub action: usize,
    pub old_log_prob: f64,
    pub old_value: f64,
    pub advantage: f64,
    pub target: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossStats {
    pub total: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    pub approx_kl: f64,
}

/// Mean loss over `batch` and its gradient with respect to the weights:
///
/// `-min(rho*A, clip(rho, 1-eps, 1+eps)*A)
///   + c_v * 0.5 * max((V - R)^2, (V_old + clip(V - V_old, -vc, vc) - R)^2)
///   - c_e * H`
pub fn ppo_loss(params: &PolicyParams, batch: &[Sample], cfg: &TrainConfig) -> (LossStats, Vec<f64>) {
    let mut grad = vec![0.0; params.weights.len()];
    let mut stats = LossStats::default();
    if batch.is_empty() {
        return (stats, grad);
    }
    let n = batch.len() as f64;
    let eps = cfg.clip_ratio;
    let vc = cfg.value_clip;
    let mut d_logits = vec![0.0; params.arch.actions];

    for s in batch {
        let fwd = params.forward(&s.obs);
        let probs = softmax(&fwd.logits);
        let logp = log_softmax(&fwd.logits);
        let ratio = (logp[s.action] - s.old_log_prob).exp();
        let clipped = ratio.clamp(1.0 - eps, 1.0 + eps);
        let unclipped_obj = ratio * s.advantage;
        let clipped_obj = clipped * s.advantage;
        // d(-surrogate)/d(log pi(a)); zero when the clipped branch binds
        let d_logp = if unclipped_obj <= clipped_obj {
            -unclipped_obj
        } else {
            0.0
        };
        let h = entropy(&probs);

        for (j, d) in d_logits.iter_mut().enumerate() {
            let onehot = if j == s.action { 1.0 } else { 0.0 };
            let d_policy = d_logp * (onehot - probs[j]);
            let d_entropy = if probs[j] > 0.0 {
                cfg.entropy_coef * probs[j] * (logp[j] + h)
            } else {
                0.0
            };
            *d = (d_policy + d_entropy) / n;
        }

        let v = fwd.value;
        let delta = v - s.old_value;
        let v_clipped = s.old_value + delta.clamp(-vc, vc);
        let loss_unclipped = (v - s.target).powi(2);
        let loss_clipped = (v_clipped - s.target).powi(2);
        let d_value = if loss_unclipped >= loss_clipped {
            v - s.target
        } else if delta.abs() < vc {
            v_clipped - s.target
        } else {
            0.0
        };
        let value_loss = 0.5 * loss_unclipped.max(loss_clipped);

        params.backward(&fwd, &d_logits, cfg.value_coef * d_value / n, &mut grad);

        stats.policy_loss -= unclipped_obj.min(clipped_obj) / n;
        stats.value_loss += value_loss / n;
        stats.entropy += h / n;
        stats.approx_kl += (s.old_log_prob - logp[s.action]) / n;
        if (ratio - 1.0).abs() > eps {
            stats.clip_fraction += 1.0 / n;
        }
    }
    stats.total = stats.policy_loss + cfg.value_coef * stats.value_loss - cfg.entropy_coef * stats.entropy;
    (stats, grad)
}

/// Adam with bias correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(num_params: usize) -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
            t: 0,
        }
    }

    pub fn step(&mut self, weights: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..weights.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            weights[i] -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + self.eps);
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UpdateError {
    #[error("empty batch")]
    EmptyBatch,
    #[error("non-finite loss or gradient at epoch {epoch}: {stats:?}")]
    NonFinite { epoch: usize, stats: LossStats },
}

/// Runs `cfg.epochs` passes of shuffled minibatch steps. On a non-finite
/// loss the parameters and optimiser are left exactly as they were.
pub fn ppo_update(
    params: &mut PolicyParams,
    adam: &mut Adam,
    batch: &[Sample],
    cfg: &TrainConfig,
    rng: &mut impl Rng,
) -> Result<LossStats, UpdateError> {
    if batch.is_empty() {
        return Err(UpdateError::EmptyBatch);
    }
    let snapshot = (params.weights.clone(), adam.clone());
    let mut order: Vec<usize> = (0..batch.len()).collect();
    let mut mean = LossStats::default();
    let mut count = 0.0;
    let mut minibatch = Vec::with_capacity(cfg.minibatch_size);
    for epoch in 0..cfg.epochs {
        order.shuffle(rng);
        for chunk in order.chunks(cfg.minibatch_size) {
            minibatch.clear();
            minibatch.extend(chunk.iter().map(|&i| batch[i].clone()));
            let (stats, mut grad) = ppo_loss(params, &minibatch, cfg);
            if !stats.total.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                params.weights = snapshot.0;
                *adam = snapshot.1;
                return Err(UpdateError::NonFinite { epoch, stats });
            }
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if norm > cfg.max_grad_norm {
                let k = cfg.max_grad_norm / norm;
                grad.iter_mut().for_each(|g| *g *= k);
            }
            adam.step(&mut params.weights, &grad, cfg.learning_rate);
            mean.total += stats.total;
            mean.policy_loss += stats.policy_loss;
            mean.value_loss += stats.value_loss;
            mean.entropy += stats.entropy;
            mean.clip_fraction += stats.clip_fraction;
            mean.approx_kl += stats.approx_kl;
            count += 1.0;
        }
    }
    mean.total /= count;
    mean.policy_loss /= count;
    mean.value_loss /= count;
    mean.entropy /= count;
    mean.clip_fraction /= count;
    mean.approx_kl /= count;
    Ok(mean)
}
