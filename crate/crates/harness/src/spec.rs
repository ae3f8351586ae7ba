//! Declarative experiment files and the pieces they resolve to.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use wareflow_core::{EngineError, EnvConfig, GreedyScheduler, MaxFlowScheduler, RandomScheduler, Scheduler};
use wareflow_learner::{Checkpoint, CheckpointError, PolicyScheduler, TrainConfig, TrainError, Validation};

use crate::scenario::Scenario;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("checkpoint {path}: {source}")]
    Checkpoint {
        path: String,
        #[source]
        source: CheckpointError,
    },
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    /// Process exit status for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Checkpoint { .. } => 2,
            HarnessError::Engine(EngineError::Config(_)) | HarnessError::Engine(EngineError::Domain(_)) => 2,
            HarnessError::Train(TrainError::Config(_)) => 2,
            _ => 1,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// Version string embedded in every artifact.
pub fn build_id() -> String {
    format!("wareflow {} ({})", env!("CARGO_PKG_VERSION"), env!("WAREFLOW_GIT_DESCRIBE"))
}

/// Reads a JSON file into `T`; relative paths inside it are resolved by the
/// caller against the file's directory.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
}

pub fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// An environment given inline, as a full engine config, or by reference to
/// another JSON file holding either form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EnvSource {
    Include { include: PathBuf },
    Config { config: Box<EnvConfig> },
    Scenario(Scenario),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolvedEnv {
    Scenario(Scenario),
    Config(Box<EnvConfig>),
}

const MAX_INCLUDE_DEPTH: usize = 8;

impl EnvSource {
    pub fn resolve(&self, base: &Path) -> Result<ResolvedEnv, HarnessError> {
        self.resolve_at(base, 0)
    }

    fn resolve_at(&self, base: &Path, depth: usize) -> Result<ResolvedEnv, HarnessError> {
        match self {
            EnvSource::Scenario(s) => Ok(ResolvedEnv::Scenario(s.clone())),
            EnvSource::Config { config } => Ok(ResolvedEnv::Config(config.clone())),
            EnvSource::Include { include } => {
                if depth >= MAX_INCLUDE_DEPTH {
                    return Err(HarnessError::Config(format!("env includes nest deeper than {MAX_INCLUDE_DEPTH}")));
                }
                let path = base.join(include);
                if !path.is_file() {
                    return Err(HarnessError::Config(format!("included env file {} does not exist", path.display())));
                }
                let inner: EnvSource = load_json(&path)?;
                inner.resolve_at(&base_dir(&path), depth + 1)
            }
        }
    }
}

impl ResolvedEnv {
    /// Engine config with the agent count and skills per agent overridden
    /// when given; only scenarios can be swept.
    pub fn config_for(&self, agents: Option<usize>, skills: Option<usize>) -> Result<EnvConfig, HarnessError> {
        let cfg = match self {
            ResolvedEnv::Scenario(s) => {
                let s = Scenario {
                    agents: agents.unwrap_or(s.agents),
                    skills: skills.unwrap_or(s.skills),
                    ..s.clone()
                };
                s.build().map_err(|e| HarnessError::Config(format!("floor plan: {e}")))?
            }
            ResolvedEnv::Config(c) => {
                if agents.is_some_and(|a| a != c.num_agents()) || skills.is_some() {
                    return Err(HarnessError::Config(
                        "agent/skill sweeps need a scenario env, not a full engine config".into(),
                    ));
                }
                (**c).clone()
            }
        };
        cfg.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn default_cell(&self) -> (usize, usize) {
        match self {
            ResolvedEnv::Scenario(s) => (s.agents, s.skills),
            ResolvedEnv::Config(c) => (c.num_agents(), c.agents.iter().map(|a| a.skills.len()).max().unwrap_or(0)),
        }
    }
}

/// Cells of a skills × agents grid. Explicit `cells` take precedence over
/// the cartesian product of `agents` and `skills`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    pub agents: Vec<usize>,
    pub skills: Vec<usize>,
    /// `[agents, skills]` pairs.
    pub cells: Vec<(usize, usize)>,
}

impl Sweep {
    pub fn cells(&self, default: (usize, usize)) -> Vec<(usize, usize)> {
        if !self.cells.is_empty() {
            return self.cells.clone();
        }
        let agents = if self.agents.is_empty() { vec![default.0] } else { self.agents.clone() };
        let skills = if self.skills.is_empty() { vec![default.1] } else { self.skills.clone() };
        skills
            .iter()
            .flat_map(|&s| agents.iter().map(move |&a| (a, s)))
            .collect()
    }
}

/// A scheduler named in a config file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchedulerSpec {
    MaxFlow,
    Greedy,
    Random,
    Policy(PathBuf),
}

impl SchedulerSpec {
    pub fn parse(name: &str) -> Result<Self, HarnessError> {
        match name {
            "maxflow" => Ok(Self::MaxFlow),
            "greedy" => Ok(Self::Greedy),
            "random" => Ok(Self::Random),
            _ => match name.strip_prefix("policy:") {
                Some(path) if !path.is_empty() => Ok(Self::Policy(PathBuf::from(path))),
                _ => Err(HarnessError::Config(format!(
                    "unknown scheduler {name:?}; expected maxflow, greedy, random or policy:<path>"
                ))),
            },
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::MaxFlow => "maxflow".into(),
            Self::Greedy => "greedy".into(),
            Self::Random => "random".into(),
            Self::Policy(p) => format!("policy:{}", p.display()),
        }
    }

    /// Builds the scheduler; checkpoint paths are relative to `base`.
    /// `num_slots` is checked against a policy's action dimension.
    pub fn instantiate(&self, base: &Path, num_slots: usize, seed: u64) -> Result<Box<dyn Scheduler>, HarnessError> {
        Ok(match self {
            Self::MaxFlow => Box::new(MaxFlowScheduler),
            Self::Greedy => Box::new(GreedyScheduler),
            Self::Random => Box::new(RandomScheduler::new(seed)),
            Self::Policy(p) => {
                let path = base.join(p);
                let ck = Checkpoint::load(&path).map_err(|source| HarnessError::Checkpoint {
                    path: path.display().to_string(),
                    source,
                })?;
                let expected = ck.params.arch.input / 2;
                if expected != num_slots {
                    return Err(HarnessError::Config(format!(
                        "policy {} was trained for {expected} task slots, environment has {num_slots}",
                        path.display()
                    )));
                }
                Box::new(PolicyScheduler::new(ck.params, self.label()))
            }
        })
    }
}

fn default_episodes() -> usize {
    100
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

/// Input of `run` and `compare`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub env: EnvSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    pub schedulers: Vec<String>,
    #[serde(default = "default_episodes")]
    pub episodes: usize,
    /// Base seeds; episode `i` of base seed `s` uses `episode_seed(s, i)`
    /// for every cell and scheduler.
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<PathBuf>,
    /// Write a JSON-lines trace per episode.
    #[serde(default)]
    pub trace: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.schedulers.is_empty() {
            return Err(HarnessError::Config("at least one scheduler is required".into()));
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::Config("seeds must not be empty".into()));
        }
        for s in &self.schedulers {
            SchedulerSpec::parse(s)?;
        }
        Ok(())
    }
}

/// Input of `train`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSpec {
    pub name: String,
    pub env: EnvSource,
    #[serde(default = "TrainConfig::desk")]
    pub train: TrainConfig,
    #[serde(default)]
    pub validation: Validation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<PathBuf>,
}

/// Input of `transfer`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferSpec {
    pub name: String,
    pub train_env: EnvSource,
    pub eval_env: EnvSource,
    #[serde(default = "TrainConfig::desk")]
    pub train: TrainConfig,
    #[serde(default)]
    pub validation: Validation,
    #[serde(default = "default_episodes")]
    pub episodes: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<PathBuf>,
}
