//! Acting with a [`PolicyParams`] snapshot. Action index `i < N_T` targets
//! slot `i`; index `N_T` is Stay. Nothing is masked: picking an empty slot is
//! left to the environment's penalty.

use rand::Rng;
use thiserror::Error;
use wareflow_core::{Action, DecisionContext, Observation, Scheduler};

use crate::network::{log_softmax, softmax, PolicyParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InputError {
    #[error("observation has {found} slots, policy expects {expected}")]
    Shape { expected: usize, found: usize },
    #[error("observation contains a non-finite value")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActMode {
    Sample,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActOutput {
    pub action: usize,
    pub log_prob: f64,
    pub value: f64,
}

pub fn encode_action(action: Action, num_slots: usize) -> usize {
    match action {
        Action::Slot(i) => i,
        Action::Stay => num_slots,
    }
}

pub fn decode_action(index: usize, num_slots: usize) -> Action {
    if index < num_slots {
        Action::Slot(index)
    } else {
        Action::Stay
    }
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn sample_categorical(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Network input for one observation: `ln(1 + v)` of every entry, so that
/// distances on larger plans and the empty-slot sentinel stay in tanh range.
pub fn features(obs: &Observation) -> Vec<f64> {
    obs.flat().into_iter().map(|v| v.max(0.0).ln_1p()).collect()
}

pub fn check_observation(params: &PolicyParams, obs: &Observation) -> Result<(), InputError> {
    let expected = params.arch.input / 2;
    if obs.num_slots() != expected {
        return Err(InputError::Shape {
            expected,
            found: obs.num_slots(),
        });
    }
    if obs.rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(InputError::NonFinite);
    }
    Ok(())
}

pub fn policy_act(
    params: &PolicyParams,
    obs: &Observation,
    rng: &mut impl Rng,
    mode: ActMode,
) -> Result<ActOutput, InputError> {
    check_observation(params, obs)?;
    let fwd = params.forward(&features(obs));
    let action = match mode {
        ActMode::Greedy => argmax(&fwd.logits),
        ActMode::Sample => sample_categorical(&softmax(&fwd.logits), rng),
    };
    Ok(ActOutput {
        action,
        log_prob: log_softmax(&fwd.logits)[action],
        value: fwd.value,
    })
}

/// Deploys one parameter snapshot as every agent's policy, acting greedily.
#[derive(Debug, Clone)]
pub struct PolicyScheduler {
    params: PolicyParams,
    label: String,
}

impl PolicyScheduler {
    pub fn new(params: PolicyParams, label: impl Into<String>) -> Self {
        Self {
            params,
            label: label.into(),
        }
    }

    pub fn params(&self) -> &PolicyParams {
        &self.params
    }
}

impl Scheduler for PolicyScheduler {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Vec<Action> {
        let num_slots = ctx.tasks.len();
        ctx.observations
            .iter()
            .map(|obs| {
                check_observation(&self.params, obs).expect("engine observations match the policy's slot count");
                decode_action(argmax(&self.params.forward(&features(obs)).logits), num_slots)
            })
            .collect()
    }
}
