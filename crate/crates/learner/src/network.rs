//! Two-layer tanh network with a policy head and a value head, stored as a
//! single flat weight vector so optimisers and checkpoints stay trivial.
//!
//! Layout of `weights`:
//!
//! | block | shape |
//! |-------|-------|
//! | `w1`  | hidden × input |
//! | `b1`  | hidden |
//! | `w2`  | hidden × hidden |
//! | `b2`  | hidden |
//! | `wp`  | actions × hidden |
//! | `bp`  | actions |
//! | `wv`  | hidden |
//! | `bv`  | 1 |

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub input: usize,
    pub hidden: usize,
    pub actions: usize,
}

impl Architecture {
    /// Policy over `num_slots` task slots plus Stay.
    pub fn for_slots(num_slots: usize, hidden: usize) -> Self {
        Self {
            input: 2 * num_slots,
            hidden,
            actions: num_slots + 1,
        }
    }

    pub fn num_params(&self) -> usize {
        let Self { input, hidden, actions } = *self;
        hidden * input + hidden + hidden * hidden + hidden + actions * hidden + actions + hidden + 1
    }

    fn offsets(&self) -> Offsets {
        let Self { input, hidden, actions } = *self;
        let w1 = 0;
        let b1 = w1 + hidden * input;
        let w2 = b1 + hidden;
        let b2 = w2 + hidden * hidden;
        let wp = b2 + hidden;
        let bp = wp + actions * hidden;
        let wv = bp + actions;
        let bv = wv + hidden;
        Offsets { w1, b1, w2, b2, wp, bp, wv, bv }
    }
}

#[derive(Debug, Clone, Copy)]
struct Offsets {
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
    wp: usize,
    bp: usize,
    wv: usize,
    bv: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    pub arch: Architecture,
    pub weights: Vec<f64>,
}

/// Activations kept from a forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct Forward {
    pub input: Vec<f64>,
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
    pub logits: Vec<f64>,
    pub value: f64,
}

fn affine(w: &[f64], b: &[f64], x: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.extend(b.iter().zip(w.chunks_exact(x.len())).map(|(bi, row)| {
        bi + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }));
}

impl PolicyParams {
    /// Uniform fan-in initialisation; the policy head is scaled down so the
    /// initial action distribution is close to uniform.
    pub fn init(arch: Architecture, rng: &mut impl Rng) -> Self {
        let o = arch.offsets();
        let mut weights = vec![0.0; arch.num_params()];
        let mut fill = |range: std::ops::Range<usize>, fan_in: usize, gain: f64| {
            let bound = gain * (3.0 / fan_in as f64).sqrt();
            for w in &mut weights[range] {
                *w = rng.gen_range(-bound..bound);
            }
        };
        fill(o.w1..o.b1, arch.input, 1.0);
        fill(o.w2..o.b2, arch.hidden, 1.0);
        fill(o.wp..o.bp, arch.hidden, 0.01);
        fill(o.wv..o.bv, arch.hidden, 1.0);
        Self { arch, weights }
    }

    pub fn zeros(arch: Architecture) -> Self {
        Self {
            arch,
            weights: vec![0.0; arch.num_params()],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.is_finite())
    }

    pub fn forward(&self, input: &[f64]) -> Forward {
        let Architecture { input: n_in, hidden, actions } = self.arch;
        assert_eq!(input.len(), n_in, "input dimension mismatch");
        let o = self.arch.offsets();
        let w = &self.weights;
        let mut h1 = Vec::with_capacity(hidden);
        affine(&w[o.w1..o.b1], &w[o.b1..o.w2], input, &mut h1);
        h1.iter_mut().for_each(|v| *v = v.tanh());
        let mut h2 = Vec::with_capacity(hidden);
        affine(&w[o.w2..o.b2], &w[o.b2..o.wp], &h1, &mut h2);
        h2.iter_mut().for_each(|v| *v = v.tanh());
        let mut logits = Vec::with_capacity(actions);
        affine(&w[o.wp..o.bp], &w[o.bp..o.wv], &h2, &mut logits);
        let value = w[o.bv] + w[o.wv..o.bv].iter().zip(&h2).map(|(a, b)| a * b).sum::<f64>();
        Forward {
            input: input.to_vec(),
            h1,
            h2,
            logits,
            value,
        }
    }

    /// Accumulates into `grad` the gradient of a scalar whose partials with
    /// respect to the logits and the value are `d_logits` and `d_value`.
    pub fn backward(&self, fwd: &Forward, d_logits: &[f64], d_value: f64, grad: &mut [f64]) {
        let Architecture { input: n_in, hidden, actions } = self.arch;
        let o = self.arch.offsets();
        let w = &self.weights;

        let mut d_h2 = vec![0.0; hidden];
        for a in 0..actions {
            let g = d_logits[a];
            if g == 0.0 {
                continue;
            }
            grad[o.bp + a] += g;
            let row = o.wp + a * hidden;
            for j in 0..hidden {
                grad[row + j] += g * fwd.h2[j];
                d_h2[j] += g * w[row + j];
            }
        }
        grad[o.bv] += d_value;
        for j in 0..hidden {
            grad[o.wv + j] += d_value * fwd.h2[j];
            d_h2[j] += d_value * w[o.wv + j];
        }

        let d_z2: Vec<f64> = d_h2.iter().zip(&fwd.h2).map(|(d, h)| d * (1.0 - h * h)).collect();
        let mut d_h1 = vec![0.0; hidden];
        for (j, &g) in d_z2.iter().enumerate() {
            grad[o.b2 + j] += g;
            let row = o.w2 + j * hidden;
            for k in 0..hidden {
                grad[row + k] += g * fwd.h1[k];
                d_h1[k] += g * w[row + k];
            }
        }

        for (j, (d, h)) in d_h1.iter().zip(&fwd.h1).enumerate() {
            let g = d * (1.0 - h * h);
            grad[o.b1 + j] += g;
            let row = o.w1 + j * n_in;
            for k in 0..n_in {
                grad[row + k] += g * fwd.input[k];
            }
        }
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    logits.iter().map(|l| l - lse).collect()
}

pub fn entropy(probs: &[f64]) -> f64 {
    -probs.iter().filter(|p| **p > 0.0).map(|p| p * p.ln()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parameter_count() {
        let arch = Architecture::for_slots(3, 64);
        assert_eq!(arch.input, 6);
        assert_eq!(arch.actions, 4);
        assert_eq!(arch.num_params(), 64 * 6 + 64 + 64 * 64 + 64 + 4 * 64 + 4 + 64 + 1);
        let p = PolicyParams::init(arch, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(p.weights.len(), arch.num_params());
        assert!(p.is_finite());
    }

    #[test]
    fn zero_network_outputs_zero() {
        let p = PolicyParams::zeros(Architecture::for_slots(2, 3));
        let f = p.forward(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(f.logits, vec![0.0; 3]);
        assert_eq!(f.value, 0.0);
    }

    #[test]
    fn backward_matches_finite_differences() {
        let arch = Architecture::for_slots(2, 3);
        let p = PolicyParams::init(arch, &mut ChaCha8Rng::seed_from_u64(5));
        let x = [0.3, -1.2, 2.0, 0.5];
        let coef = [0.7, -0.2, 1.3];
        let cv = -0.9;
        let f = |params: &PolicyParams| {
            let out = params.forward(&x);
            out.logits.iter().zip(&coef).map(|(l, c)| l * c).sum::<f64>() + cv * out.value
        };
        let mut grad = vec![0.0; arch.num_params()];
        p.backward(&p.forward(&x), &coef, cv, &mut grad);
        let h = 1e-6;
        for i in 0..arch.num_params() {
            let mut plus = p.clone();
            plus.weights[i] += h;
            let mut minus = p.clone();
            minus.weights[i] -= h;
            let numeric = (f(&plus) - f(&minus)) / (2.0 * h);
            assert!((numeric - grad[i]).abs() < 1e-7, "param {i}: {numeric} vs {}", grad[i]);
        }
    }

    #[test]
    fn softmax_is_a_distribution() {
        let p = softmax(&[1000.0, 999.0, -5.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|x| *x >= 0.0));
        let lp = log_softmax(&[1000.0, 999.0, -5.0]);
        for (a, b) in p.iter().zip(&lp) {
            assert!((a.ln() - b).abs() < 1e-9 || *a == 0.0);
        }
        assert!((entropy(&[0.25; 4]) - 4f64.ln()).abs() < 1e-12);
    }
}
