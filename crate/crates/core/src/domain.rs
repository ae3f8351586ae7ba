//! Tasks, agents, skills and the per-task reward.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::floorplan::Coord;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("reward scale must be >= 1, got {0}")]
    RewardScale(f64),
    #[error("priority must be >= 1, got {0}")]
    Priority(u32),
    #[error("priority {hi} does not rank strictly above {lo}")]
    PriorityOrder { hi: u32, lo: u32 },
    #[error("invalid task spec: {0}")]
    TaskSpec(String),
}

/// A task category, e.g. one of the red/green/blue colours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaskType(pub u8);

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SkillSet(BTreeSet<TaskType>);

impl SkillSet {
    pub fn new(types: impl IntoIterator<Item = TaskType>) -> Self {
        Self(types.into_iter().collect())
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// `count` consecutive types starting at `first`, wrapping modulo
    /// `num_types`.
    pub fn circular(first: usize, count: usize, num_types: usize) -> Self {
        Self::new((0..count.min(num_types)).map(|k| TaskType(((first + k) % num_types) as u8)))
    }

    pub fn contains(&self, t: TaskType) -> bool {
        self.0.contains(&t)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = TaskType> + '_ {
        self.0.iter().copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Stationary(Coord),
    NonStationary,
}

fn default_reward_scale() -> f64 {
    1.0
}

fn default_priority() -> u32 {
    1
}

/// Template for the tasks that occupy one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub task_type: TaskType,
    pub workload: u32,
    pub capacity: u32,
    #[serde(default = "default_priority")]
    pub priority: u32,
    #[serde(default = "default_reward_scale")]
    pub reward_scale: f64,
    #[serde(default = "TaskSpec::default_placement")]
    pub placement: Placement,
}

impl TaskSpec {
    fn default_placement() -> Placement {
        Placement::NonStationary
    }

    pub fn new(task_type: TaskType, workload: u32, capacity: u32) -> Self {
        Self {
            task_type,
            workload,
            capacity,
            priority: 1,
            reward_scale: 1.0,
            placement: Placement::NonStationary,
        }
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if self.workload == 0 {
            return Err(DomainError::TaskSpec("workload must be >= 1".into()));
        }
        if self.capacity == 0 {
            return Err(DomainError::TaskSpec("capacity must be >= 1".into()));
        }
        check_reward_args(self.reward_scale, self.priority)
    }

    pub fn step_reward(&self) -> f64 {
        task_step_reward(self.reward_scale, self.priority).expect("validated task spec")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskInstance {
    pub slot: usize,
    pub spec: TaskSpec,
    pub location: Coord,
    pub remaining_work: u32,
    pub arrival_time: u64,
    pub completion_time: Option<u64>,
}

impl TaskInstance {
    pub fn spawn(slot: usize, spec: TaskSpec, location: Coord, arrival_time: u64) -> Self {
        Self {
            slot,
            remaining_work: spec.workload,
            spec,
            location,
            arrival_time,
            completion_time: None,
        }
    }

    /// Time in system divided by the single-agent service time.
    pub fn slowdown(&self) -> Option<f64> {
        self.completion_time
            .map(|done| (done - self.arrival_time) as f64 / self.spec.workload as f64)
    }
}

/// What an agent is told to do for one decision interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Stay,
    Slot(usize),
}

impl Action {
    pub fn slot(self) -> Option<usize> {
        match self {
            Action::Stay => None,
            Action::Slot(i) => Some(i),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: usize,
    pub location: Coord,
    pub skills: SkillSet,
    pub assignment: Action,
}

fn check_reward_args(r: f64, p: u32) -> Result<(), DomainError> {
    if !(r >= 1.0) || !r.is_finite() {
        return Err(DomainError::RewardScale(r));
    }
    if p < 1 {
        return Err(DomainError::Priority(p));
    }
    Ok(())
}

/// Reward a live task emits every time-step: `-exp(-(p + 1/r))`.
///
/// Lower `p` means higher priority; `r` scales importance within a priority
/// level. Because `1/r` lies in `(0, 1]`, every priority-`p` task outweighs
/// every priority-`p + 1` task.
pub fn task_step_reward(r: f64, p: u32) -> Result<f64, DomainError> {
    check_reward_args(r, p)?;
    Ok(-(-(p as f64 + 1.0 / r)).exp())
}

/// Bounds proving that a priority level outranks another for every choice
/// of reward scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominanceWitness {
    /// Smallest `|R|` at the higher priority, attained at `r = 1`.
    pub min_high: f64,
    /// Supremum of `|R|` at the lower priority, approached as `r -> inf`
    /// and never attained.
    pub sup_low: f64,
}

impl DominanceWitness {
    pub fn holds(&self) -> bool {
        // sup_low is not attained, so equality still gives strict dominance
        self.min_high >= self.sup_low
    }
}

/// Checks that priority `p_hi` (numerically smaller) strictly dominates
/// `p_lo` in reward magnitude.
pub fn priority_dominates(p_hi: u32, p_lo: u32) -> Result<DominanceWitness, DomainError> {
    check_reward_args(1.0, p_hi)?;
    check_reward_args(1.0, p_lo)?;
    if p_hi >= p_lo {
        return Err(DomainError::PriorityOrder { hi: p_hi, lo: p_lo });
    }
    Ok(DominanceWitness {
        min_high: (-(p_hi as f64 + 1.0)).exp(),
        sup_low: (-(p_lo as f64)).exp(),
    })
}

/// Whether `agent` does a unit of work on `task` this step, given how many
/// agents (in ascending id order) already counted toward it.
pub fn can_contribute(agent: &AgentState, task: &TaskInstance, contributors_so_far: u32) -> bool {
    agent.assignment == Action::Slot(task.slot)
        && agent.skills.contains(task.spec.task_type)
        && contributors_so_far < task.spec.capacity
        && agent.location == task.location
        && task.remaining_work > 0
}
