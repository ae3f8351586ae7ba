//! Training loop, greedy evaluation and checkpoints.
//!
//! All agents share one parameter vector. Every decision of every agent is a
//! sample whose reward is the shared reward of the interval that followed;
//! each agent's decisions form their own trajectory for advantage estimation.

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use wareflow_core::{episode_seed, run_episodes, EngineError, Env, EnvConfig};

use crate::gae::{compute_gae, normalize_advantages, Step, Trajectory};
use crate::network::{Architecture, PolicyParams};
use crate::policy::{decode_action, features, policy_act, ActMode, PolicyScheduler};
use crate::ppo::{ppo_update, Adam, ConfigError, Sample, TrainConfig, UpdateError};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("training diverged after {env_steps} environment steps: {source}")]
    Diverged {
        env_steps: u64,
        #[source]
        source: UpdateError,
    },
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("cannot access checkpoint {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed checkpoint: {0}")]
    Format(#[from] serde_json::Error),
    #[error("checkpoint version {0} is not supported")]
    Version(u32),
    #[error("checkpoint holds {found} weights, architecture needs {expected}")]
    Shape { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub env_steps: u64,
    /// Mean undiscounted return of the episodes collected for this update.
    pub mean_reward: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    pub value_loss: f64,
    /// Greedy validation mean, when one ran after this update.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_reward: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub params: PolicyParams,
    pub train_config: TrainConfig,
    #[serde(default)]
    pub env_steps: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub build: Option<String>,
    /// Environment the policy was trained on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub env: Option<EnvConfig>,
}

impl Checkpoint {
    pub fn new(params: PolicyParams, train_config: TrainConfig, env_steps: u64) -> Self {
        Self {
            version: CHECKPOINT_VERSION,
            params,
            train_config,
            env_steps,
            build: None,
            env: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoints always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, CheckpointError> {
        let ck: Self = serde_json::from_str(text)?;
        if ck.version != CHECKPOINT_VERSION {
            return Err(CheckpointError::Version(ck.version));
        }
        let expected = ck.params.arch.num_params();
        if ck.params.weights.len() != expected {
            return Err(CheckpointError::Shape {
                expected,
                found: ck.params.weights.len(),
            });
        }
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        fs::write(path, self.to_json()).map_err(|source| CheckpointError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        let text = fs::read_to_string(path).map_err(|source| CheckpointError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}

/// Greedy validation during training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Validation {
    pub episodes: usize,
    /// Run after every this many updates; 0 disables validation and the
    /// final parameters are returned.
    pub every: usize,
    pub base_seed: u64,
}

impl Default for Validation {
    fn default() -> Self {
        Self {
            episodes: 40,
            every: 2,
            base_seed: 0x7A11_DA7E,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    /// Best parameters by greedy validation mean (or the last ones).
    pub best: PolicyParams,
    pub best_eval: Option<f64>,
    pub last: PolicyParams,
    pub curve: Vec<CurvePoint>,
    pub env_steps: u64,
}

impl TrainOutcome {
    pub fn checkpoint(&self, cfg: &TrainConfig) -> Checkpoint {
        Checkpoint::new(self.best.clone(), cfg.clone(), self.env_steps)
    }
}

/// Episodes collected for one update.
struct Rollout {
    samples: Vec<Sample>,
    episode_returns: Vec<f64>,
    env_steps: u64,
}

fn collect(
    params: &PolicyParams,
    env_cfg: &EnvConfig,
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
    next_episode: &mut u64,
    budget: u64,
) -> Result<Rollout, EngineError> {
    let n_slots = env_cfg.num_slots();
    let mut samples = Vec::new();
    let mut episode_returns = Vec::new();
    let mut env_steps = 0;
    let mut decisions = 0;
    while decisions < cfg.rollout_decisions && env_steps + env_cfg.horizon <= budget {
        let config = env_cfg.with_seed(episode_seed(cfg.seed, *next_episode));
        *next_episode += 1;
        let (mut env, mut observations) = Env::reset(config)?;
        let mut trajectories = vec![Trajectory::default(); env.agents().len()];
        while !env.is_done() {
            let mut actions = Vec::with_capacity(observations.len());
            for (obs, traj) in observations.iter().zip(&mut trajectories) {
                let out = policy_act(params, obs, rng, ActMode::Sample)
                    .map_err(|e| EngineError::Protocol(e.to_string()))?;
                actions.push(decode_action(out.action, n_slots));
                traj.steps.push(Step {
                    obs: features(obs),
                    action: out.action,
                    log_prob: out.log_prob,
                    value: out.value,
                    reward: 0.0,
                    done: false,
                });
            }
            env.submit_assignments(&actions)?;
            let mut reward = 0.0;
            loop {
                let report = env.tick()?;
                env_steps += 1;
                reward += report.shared_reward;
                if let Some(obs) = report.observations {
                    observations = obs;
                    break;
                }
            }
            let done = env.is_done();
            for traj in &mut trajectories {
                let step = traj.steps.last_mut().expect("a step was just pushed");
                step.reward = reward * cfg.reward_scale;
                step.done = done;
            }
            decisions += 1;
        }
        episode_returns.push(env.cumulative_reward());
        for traj in &trajectories {
            let gae = compute_gae(traj, cfg.gamma, cfg.gae_lambda);
            for ((step, adv), ret) in traj.steps.iter().zip(gae.advantages).zip(gae.returns) {
                samples.push(Sample {
                    obs: step.obs.clone(),
                    action: step.action,
                    old_log_prob: step.log_prob,
                    old_value: step.value,
                    advantage: adv,
                    target: ret,
                });
            }
        }
    }
    Ok(Rollout {
        samples,
        episode_returns,
        env_steps,
    })
}

/// Trains a shared policy on `env_cfg` (its seed is ignored; episode seeds
/// derive from `cfg.seed`). Rollouts hold whole episodes and the total
/// number of simulated ticks never exceeds `cfg.total_env_steps`.
pub fn train(env_cfg: &EnvConfig, cfg: &TrainConfig, validation: &Validation) -> Result<TrainOutcome, TrainError> {
    train_with(env_cfg, cfg, validation, |_| {})
}

/// As [`train`], calling `progress` after every update.
pub fn train_with(
    env_cfg: &EnvConfig,
    cfg: &TrainConfig,
    validation: &Validation,
    mut progress: impl FnMut(&CurvePoint),
) -> Result<TrainOutcome, TrainError> {
    cfg.validate()?;
    env_cfg.validate()?;
    let arch = Architecture::for_slots(env_cfg.num_slots(), cfg.hidden);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = PolicyParams::init(arch, &mut rng);
    let mut adam = Adam::new(arch.num_params());
    let mut curve = Vec::new();
    let mut env_steps = 0;
    let mut next_episode = 0;
    let mut best: Option<(f64, PolicyParams)> = None;
    let mut updates = 0;

    if env_cfg.horizon > cfg.total_env_steps {
        return Err(ConfigError::Invalid(format!(
            "training budget of {} steps is shorter than one {}-tick episode",
            cfg.total_env_steps, env_cfg.horizon
        ))
        .into());
    }

    loop {
        let rollout = collect(&params, env_cfg, cfg, &mut rng, &mut next_episode, cfg.total_env_steps - env_steps)?;
        if rollout.samples.is_empty() {
            break;
        }
        env_steps += rollout.env_steps;
        let last = env_steps + env_cfg.horizon > cfg.total_env_steps;
        let mut samples = rollout.samples;
        let mut adv: Vec<f64> = samples.iter().map(|s| s.advantage).collect();
        normalize_advantages(&mut adv);
        for (s, a) in samples.iter_mut().zip(adv) {
            s.advantage = a;
        }
        let stats = ppo_update(&mut params, &mut adam, &samples, cfg, &mut rng)
            .map_err(|source| TrainError::Diverged { env_steps, source })?;
        updates += 1;

        let eval_reward = if validation.every > 0 && (updates % validation.every == 0 || last) {
            let report = evaluate(&params, env_cfg, validation.episodes, validation.base_seed)?;
            if best.as_ref().map_or(true, |(b, _)| report.mean > *b) {
                best = Some((report.mean, params.clone()));
            }
            Some(report.mean)
        } else {
            None
        };
        let point = CurvePoint {
            env_steps,
            mean_reward: rollout.episode_returns.iter().sum::<f64>() / rollout.episode_returns.len() as f64,
            entropy: stats.entropy,
            clip_fraction: stats.clip_fraction,
            value_loss: stats.value_loss,
            eval_reward,
        };
        progress(&point);
        curve.push(point);
    }

    let (best_eval, best_params) = match best {
        Some((score, p)) => (Some(score), p),
        None => (None, params.clone()),
    };
    Ok(TrainOutcome {
        best: best_params,
        best_eval,
        last: params,
        curve,
        env_steps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub seeds: Vec<u64>,
    pub rewards: Vec<f64>,
    pub mean: f64,
    pub stderr: f64,
}

impl EvalReport {
    pub fn from_rewards(seeds: Vec<u64>, rewards: Vec<f64>) -> Self {
        let n = rewards.len() as f64;
        let (mean, stderr) = if rewards.is_empty() {
            (0.0, 0.0)
        } else if rewards.len() == 1 {
            (rewards[0], 0.0)
        } else {
            let mean = rewards.iter().sum::<f64>() / n;
            let var = rewards.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (mean, (var / n).sqrt())
        };
        Self {
            seeds,
            rewards,
            mean,
            stderr,
        }
    }
}

/// Greedy evaluation on episodes seeded `episode_seed(base_seed, i)`, the same
/// seeds the baseline schedulers get for paired comparison.
pub fn evaluate(
    params: &PolicyParams,
    env_cfg: &EnvConfig,
    episodes: usize,
    base_seed: u64,
) -> Result<EvalReport, EngineError> {
    let expected = params.arch.input / 2;
    if env_cfg.num_slots() != expected {
        return Err(EngineError::Config(format!(
            "policy expects {expected} task slots, environment has {}",
            env_cfg.num_slots()
        )));
    }
    let mut sched = PolicyScheduler::new(params.clone(), "policy");
    let outcomes = run_episodes(env_cfg, &mut sched, episodes, base_seed)?;
    Ok(EvalReport::from_rewards(
        outcomes.iter().map(|o| o.seed).collect(),
        outcomes.iter().map(|o| o.metrics.total_reward).collect(),
    ))
}
