//! Discrete-time warehouse environment.
//!
//! Every tick runs five phases in a fixed order:
//!
//! 1. arrivals: with probability `c` one non-stationary task spawns into the
//!    lowest empty non-stationary slot, on a random free cell that holds no
//!    task;
//! 2. movement: agents walk one cell along their A* path to the assigned task;
//! 3. work: each task loses one unit per contributing agent, clipped at its
//!    capacity, counting agents in ascending id order;
//! 4. completion: finished tasks are retired, stationary slots respawn at
//!    their fixed cell;
//! 5. reward: every task live during the tick emits its step reward, plus
//!    any illegal-action penalty from this interval's decision.
//!
//! Assignments are submitted every `decision_interval` ticks and cannot be
//! changed in between.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{can_contribute, Action, AgentState, DomainError, Placement, SkillSet, TaskInstance, TaskSpec};
use crate::floorplan::{Coord, FloorPlan};
use crate::pathing::{default_sentinel, PathError, PathMemo};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spawn {
    Fixed(Coord),
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub skills: SkillSet,
    pub spawn: Spawn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub plan: FloorPlan,
    /// One template per task slot; its length is the action dimension.
    pub task_catalog: Vec<TaskSpec>,
    pub agents: Vec<AgentSpec>,
    pub arrival_probability: f64,
    pub decision_interval: u32,
    pub horizon: u64,
    pub illegal_action_penalty: f64,
    /// Distance reported for empty or unreachable slots. Defaults to the
    /// plan's cell count plus one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentinel: Option<u32>,
    pub seed: u64,
}

impl EnvConfig {
    pub fn num_slots(&self) -> usize {
        self.task_catalog.len()
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn sentinel(&self) -> u32 {
        self.sentinel.unwrap_or_else(|| default_sentinel(&self.plan))
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: String| Err(EngineError::Config(m));
        if self.task_catalog.is_empty() {
            return bad("task catalog is empty".into());
        }
        for (i, spec) in self.task_catalog.iter().enumerate() {
            spec.validate()?;
            if let Placement::Stationary(c) = spec.placement {
                if !self.plan.is_free(c) {
                    return bad(format!("stationary slot {i} at {c} is not a free cell"));
                }
            }
        }
        for (i, agent) in self.agents.iter().enumerate() {
            if let Spawn::Fixed(c) = agent.spawn {
                if !self.plan.is_free(c) {
                    return bad(format!("agent {i} spawns on {c}, which is not a free cell"));
                }
            }
        }
        if !(0.0..=1.0).contains(&self.arrival_probability) {
            return bad(format!("arrival probability {} outside [0, 1]", self.arrival_probability));
        }
        if self.decision_interval == 0 {
            return bad("decision interval must be positive".into());
        }
        if self.horizon == 0 || self.horizon % self.decision_interval as u64 != 0 {
            return bad(format!(
                "horizon {} must be a positive multiple of the decision interval {}",
                self.horizon, self.decision_interval
            ));
        }
        if !(self.illegal_action_penalty <= 0.0) {
            return bad(format!("illegal-action penalty {} must be <= 0", self.illegal_action_penalty));
        }
        Ok(())
    }
}

/// One agent's view: a row per task slot holding
/// `[distance to task, remaining work]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Observation {
    pub rows: Vec<[f64; 2]>,
}

impl Observation {
    pub fn num_slots(&self) -> usize {
        self.rows.len()
    }

    pub fn distance(&self, slot: usize) -> f64 {
        self.rows[slot][0]
    }

    pub fn work(&self, slot: usize) -> f64 {
        self.rows[slot][1]
    }

    /// Row-major flattening, `[d0, w0, d1, w1, ...]`.
    pub fn flat(&self) -> Vec<f64> {
        self.rows.iter().flatten().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    /// Time after the tick.
    pub time: u64,
    /// Present when the tick ended on a decision boundary.
    pub observations: Option<Vec<Observation>>,
    pub shared_reward: f64,
    pub illegal_flags: Vec<bool>,
    pub completed_this_interval: Vec<usize>,
    /// Work removed from each slot during this tick.
    pub decrements: Vec<u32>,
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub total_reward: f64,
    pub completed: usize,
    pub uncompleted: usize,
    pub mean_slowdown: Option<f64>,
    pub slowdowns: Vec<f64>,
    pub illegal_actions: u64,
}

#[derive(Debug, Clone)]
pub struct Env {
    config: EnvConfig,
    sentinel: u32,
    time: u64,
    tasks: Vec<Option<TaskInstance>>,
    agents: Vec<AgentState>,
    rng: ChaCha8Rng,
    cumulative_reward: f64,
    completed: Vec<TaskInstance>,
    pending_penalty: f64,
    awaiting_decision: bool,
    illegal_flags: Vec<bool>,
    illegal_total: u64,
    completed_this_interval: Vec<usize>,
    memo: PathMemo,
}

impl Env {
    /// Starts an episode: places agents, pre-spawns stationary tasks and
    /// returns the first observations.
    pub fn reset(config: EnvConfig) -> Result<(Self, Vec<Observation>), EngineError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let free = config.plan.free_cells();
        let agents = config
            .agents
            .iter()
            .enumerate()
            .map(|(id, spec)| AgentState {
                id,
                location: match spec.spawn {
                    Spawn::Fixed(c) => c,
                    Spawn::Random => free[rng.gen_range(0..free.len())],
                },
                skills: spec.skills.clone(),
                assignment: Action::Stay,
            })
            .collect::<Vec<_>>();
        let tasks = config
            .task_catalog
            .iter()
            .enumerate()
            .map(|(slot, spec)| match spec.placement {
                Placement::Stationary(c) => Some(TaskInstance::spawn(slot, spec.clone(), c, 0)),
                Placement::NonStationary => None,
            })
            .collect();
        let n_agents = agents.len();
        let env = Self {
            sentinel: config.sentinel(),
            config,
            time: 0,
            tasks,
            agents,
            rng,
            cumulative_reward: 0.0,
            completed: Vec::new(),
            pending_penalty: 0.0,
            awaiting_decision: true,
            illegal_flags: vec![false; n_agents],
            illegal_total: 0,
            completed_this_interval: Vec::new(),
            memo: PathMemo::new(),
        };
        let obs = env.observe();
        Ok((env, obs))
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn plan(&self) -> &FloorPlan {
        &self.config.plan
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn tasks(&self) -> &[Option<TaskInstance>] {
        &self.tasks
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn completed(&self) -> &[TaskInstance] {
        &self.completed
    }

    pub fn cumulative_reward(&self) -> f64 {
        self.cumulative_reward
    }

    pub fn sentinel(&self) -> u32 {
        self.sentinel
    }

    pub fn is_done(&self) -> bool {
        self.time >= self.config.horizon
    }

    /// True when the next call must be [`Env::submit_assignments`].
    pub fn awaiting_decision(&self) -> bool {
        self.awaiting_decision
    }

    /// Fixes every agent's assignment for the coming interval. Targeting an
    /// empty slot is illegal: the agent stays put and the interval's reward
    /// is penalised once per offending agent.
    pub fn submit_assignments(&mut self, actions: &[Action]) -> Result<Vec<bool>, EngineError> {
        if self.is_done() {
            return Err(EngineError::Protocol("episode is over".into()));
        }
        if !self.awaiting_decision {
            return Err(EngineError::Protocol(format!(
                "assignments submitted at t={} which is not a decision boundary",
                self.time
            )));
        }
        if actions.len() != self.agents.len() {
            return Err(EngineError::Protocol(format!(
                "expected {} actions, got {}",
                self.agents.len(),
                actions.len()
            )));
        }
        let n_slots = self.tasks.len();
        if let Some(bad) = actions.iter().find_map(|a| a.slot().filter(|&s| s >= n_slots)) {
            return Err(EngineError::Protocol(format!("slot {bad} out of range (N_T = {n_slots})")));
        }

        let mut flags = vec![false; actions.len()];
        let mut penalty = 0.0;
        for ((agent, action), flag) in self.agents.iter_mut().zip(actions).zip(flags.iter_mut()) {
            agent.assignment = match *action {
                Action::Slot(i) if self.tasks[i].is_none() => {
                    *flag = true;
                    penalty += self.config.illegal_action_penalty;
                    Action::Stay
                }
                a => a,
            };
        }
        self.illegal_total += flags.iter().filter(|f| **f).count() as u64;
        self.pending_penalty = penalty;
        self.illegal_flags = flags.clone();
        self.completed_this_interval.clear();
        self.awaiting_decision = false;
        Ok(flags)
    }

    pub fn tick(&mut self) -> Result<StepReport, EngineError> {
        if self.is_done() {
            return Err(EngineError::Protocol("tick after the episode ended".into()));
        }
        if self.awaiting_decision {
            return Err(EngineError::Protocol(format!(
                "t={} is a decision boundary; submit assignments first",
                self.time
            )));
        }
        let t = self.time;
        self.memo.clear();

        self.arrivals(t);
        self.movement()?;
        let decrements = self.work();
        self.completion(t);

        let mut reward = 0.0;
        for task in self.tasks.iter().flatten() {
            if task.arrival_time <= t {
                reward += task.spec.step_reward();
            }
        }
        reward += std::mem::take(&mut self.pending_penalty);
        self.cumulative_reward += reward;

        self.time += 1;
        let done = self.is_done();
        let boundary = self.time % self.config.decision_interval as u64 == 0;
        if boundary && !done {
            self.awaiting_decision = true;
        }
        Ok(StepReport {
            time: self.time,
            observations: boundary.then(|| self.observe()),
            shared_reward: reward,
            illegal_flags: self.illegal_flags.clone(),
            completed_this_interval: self.completed_this_interval.clone(),
            decrements,
            done,
        })
    }

    fn arrivals(&mut self, t: u64) {
        let roll: f64 = self.rng.gen();
        if roll >= self.config.arrival_probability {
            return;
        }
        let Some(slot) = (0..self.tasks.len()).find(|&i| {
            self.tasks[i].is_none() && self.config.task_catalog[i].placement == Placement::NonStationary
        }) else {
            return;
        };
        let occupied: Vec<Coord> = self.tasks.iter().flatten().map(|t| t.location).collect();
        let candidates: Vec<Coord> = self
            .config
            .plan
            .free_cells()
            .iter()
            .copied()
            .filter(|c| !occupied.contains(c))
            .collect();
        if candidates.is_empty() {
            return;
        }
        let location = candidates[self.rng.gen_range(0..candidates.len())];
        let spec = self.config.task_catalog[slot].clone();
        self.tasks[slot] = Some(TaskInstance::spawn(slot, spec, location, t));
    }

    fn movement(&mut self) -> Result<(), EngineError> {
        for agent in &mut self.agents {
            let Some(task) = agent.assignment.slot().and_then(|i| self.tasks[i].as_ref()) else {
                continue;
            };
            if agent.location == task.location {
                continue;
            }
            let path = self.memo.path(&self.config.plan, agent.location, task.location)?;
            if let Some(next) = path.first_step() {
                agent.location = next;
            }
        }
        Ok(())
    }

    fn work(&mut self) -> Vec<u32> {
        let mut decrements = vec![0; self.tasks.len()];
        for (slot, task) in self.tasks.iter_mut().enumerate() {
            let Some(task) = task else { continue };
            let mut contributors = 0;
            for agent in &self.agents {
                if can_contribute(agent, task, contributors) {
                    contributors += 1;
                }
            }
            let done = contributors.min(task.remaining_work);
            task.remaining_work -= done;
            decrements[slot] = done;
        }
        decrements
    }

    fn completion(&mut self, t: u64) {
        for slot in 0..self.tasks.len() {
            if !matches!(&self.tasks[slot], Some(task) if task.remaining_work == 0) {
                continue;
            }
            let mut task = self.tasks[slot].take().unwrap();
            task.completion_time = Some(t + 1);
            if let Placement::Stationary(c) = task.spec.placement {
                self.tasks[slot] = Some(TaskInstance::spawn(slot, task.spec.clone(), c, t + 1));
            }
            self.completed.push(task);
            self.completed_this_interval.push(slot);
        }
    }

    fn task_locations(&self) -> Vec<Option<Coord>> {
        self.tasks.iter().map(|t| t.as_ref().map(|t| t.location)).collect()
    }

    fn distance_rows(&self) -> Vec<Vec<u32>> {
        let mut memo = PathMemo::new();
        let targets = self.task_locations();
        self.agents
            .iter()
            .map(|agent| {
                targets
                    .iter()
                    .map(|t| {
                        memo.distance_or(&self.config.plan, agent.location, *t, self.sentinel)
                            .expect("agents and tasks stay on free cells")
                    })
                    .collect()
            })
            .collect()
    }

    fn work_row(&self) -> Vec<u32> {
        self.tasks
            .iter()
            .map(|t| t.as_ref().map_or(0, |t| t.remaining_work))
            .collect()
    }

    /// Per-agent `N_T x 2` observations. Each agent sees its own distances
    /// and the shared remaining-work column only.
    pub fn observe(&self) -> Vec<Observation> {
        let work = self.work_row();
        self.distance_rows()
            .into_iter()
            .map(|dists| Observation {
                rows: dists
                    .into_iter()
                    .zip(&work)
                    .map(|(d, w)| [d as f64, *w as f64])
                    .collect(),
            })
            .collect()
    }

    /// The centralised `(N_A + 1) x N_T` matrix: one distance row per agent
    /// followed by the remaining-work row.
    pub fn full_state_matrix(&self) -> Vec<Vec<f64>> {
        let mut rows: Vec<Vec<f64>> = self
            .distance_rows()
            .into_iter()
            .map(|r| r.into_iter().map(f64::from).collect())
            .collect();
        rows.push(self.work_row().into_iter().map(f64::from).collect());
        rows
    }

    pub fn episode_metrics(&self) -> Metrics {
        let slowdowns: Vec<f64> = self.completed.iter().filter_map(TaskInstance::slowdown).collect();
        let mean_slowdown = (!slowdowns.is_empty()).then(|| slowdowns.iter().sum::<f64>() / slowdowns.len() as f64);
        Metrics {
            total_reward: self.cumulative_reward,
            completed: self.completed.len(),
            uncompleted: self.tasks.iter().flatten().count(),
            mean_slowdown,
            slowdowns,
            illegal_actions: self.illegal_total,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::TaskType;
    use crate::floorplan::{make_corridor, make_open_grid};

    fn base_config() -> EnvConfig {
        EnvConfig {
            plan: make_open_grid(4, 4),
            task_catalog: vec![TaskSpec::new(TaskType(0), 3, 1), TaskSpec::new(TaskType(1), 3, 1)],
            agents: vec![AgentSpec {
                skills: SkillSet::new([TaskType(0)]),
                spawn: Spawn::Fixed(Coord::new(0, 0)),
            }],
            arrival_probability: 0.0,
            decision_interval: 2,
            horizon: 10,
            illegal_action_penalty: -1.0,
            sentinel: None,
            seed: 7,
        }
    }

    fn stationary(slot_type: u8, at: Coord, workload: u32, capacity: u32) -> TaskSpec {
        TaskSpec {
            placement: Placement::Stationary(at),
            ..TaskSpec::new(TaskType(slot_type), workload, capacity)
        }
    }

    #[test]
    fn fixed_spawn_on_wall_is_rejected() {
        let mut cfg = base_config();
        cfg.plan = make_corridor(1, 1);
        cfg.agents[0].spawn = Spawn::Fixed(Coord::new(0, 1));
        assert!(matches!(Env::reset(cfg), Err(EngineError::Config(_))));
    }

    #[test]
    fn horizon_must_align_with_interval() {
        let mut cfg = base_config();
        cfg.horizon = 9;
        assert!(matches!(Env::reset(cfg), Err(EngineError::Config(_))));
    }

    #[test]
    fn stationary_tasks_exist_at_reset() {
        let mut cfg = base_config();
        cfg.task_catalog[1] = stationary(1, Coord::new(2, 2), 3, 1);
        let (env, obs) = Env::reset(cfg).unwrap();
        let task = env.tasks()[1].as_ref().unwrap();
        assert_eq!(task.remaining_work, 3);
        assert_eq!(task.location, Coord::new(2, 2));
        assert_eq!(obs[0].rows, vec![[17.0, 0.0], [4.0, 3.0]]);
    }

    #[test]
    fn empty_slot_is_illegal() {
        let (mut env, _) = Env::reset(base_config()).unwrap();
        let flags = env.submit_assignments(&[Action::Slot(1)]).unwrap();
        assert_eq!(flags, vec![true]);
        assert_eq!(env.agents()[0].assignment, Action::Stay);
        let r = env.tick().unwrap();
        assert_eq!(r.shared_reward, -1.0);
        assert_eq!(env.agents()[0].location, Coord::new(0, 0));
        // penalty is charged once per decision
        assert_eq!(env.tick().unwrap().shared_reward, 0.0);
    }

    #[test]
    fn stay_is_always_legal() {
        let (mut env, _) = Env::reset(base_config()).unwrap();
        assert_eq!(env.submit_assignments(&[Action::Stay]).unwrap(), vec![false]);
        assert_eq!(env.tick().unwrap().shared_reward, 0.0);
    }

    #[test]
    fn unskilled_assignment_is_accepted_but_idle() {
        let mut cfg = base_config();
        cfg.task_catalog[1] = stationary(1, Coord::new(0, 0), 3, 1);
        let (mut env, _) = Env::reset(cfg).unwrap();
        assert_eq!(env.submit_assignments(&[Action::Slot(1)]).unwrap(), vec![false]);
        let r = env.tick().unwrap();
        assert_eq!(r.decrements, vec![0, 0]);
        assert!((r.shared_reward + (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn protocol_errors() {
        let (mut env, _) = Env::reset(base_config()).unwrap();
        assert!(matches!(env.tick(), Err(EngineError::Protocol(_))));
        assert!(matches!(env.submit_assignments(&[Action::Slot(2)]), Err(EngineError::Protocol(_))));
        assert!(matches!(env.submit_assignments(&[]), Err(EngineError::Protocol(_))));
        env.submit_assignments(&[Action::Stay]).unwrap();
        assert!(matches!(env.submit_assignments(&[Action::Stay]), Err(EngineError::Protocol(_))));
        env.tick().unwrap();
        assert!(matches!(env.submit_assignments(&[Action::Stay]), Err(EngineError::Protocol(_))));
        env.tick().unwrap();
        while !env.is_done() {
            if env.awaiting_decision() {
                env.submit_assignments(&[Action::Stay]).unwrap();
            }
            env.tick().unwrap();
        }
        assert!(matches!(env.tick(), Err(EngineError::Protocol(_))));
    }

    #[test]
    fn capacity_clips_work() {
        let mut cfg = base_config();
        cfg.decision_interval = 1;
        cfg.horizon = 6;
        cfg.task_catalog = vec![stationary(0, Coord::new(1, 1), 3, 1)];
        let skilled = AgentSpec {
            skills: SkillSet::new([TaskType(0)]),
            spawn: Spawn::Fixed(Coord::new(1, 1)),
        };
        cfg.agents = vec![skilled.clone(), skilled];
        let (mut env, _) = Env::reset(cfg).unwrap();
        let mut finished_at = None;
        for _ in 0..6 {
            env.submit_assignments(&[Action::Slot(0), Action::Slot(0)]).unwrap();
            let r = env.tick().unwrap();
            assert!(r.decrements[0] <= 1);
            if finished_at.is_none() && !r.completed_this_interval.is_empty() {
                finished_at = Some(r.time);
            }
        }
        assert_eq!(finished_at, Some(3));
        assert_eq!(env.completed()[0].completion_time, Some(3));
        assert_eq!(env.completed()[0].slowdown(), Some(1.0));
    }

    #[test]
    fn single_live_task_reward() {
        let mut cfg = base_config();
        cfg.agents.clear();
        cfg.task_catalog = vec![stationary(0, Coord::new(1, 1), 3, 1)];
        let (mut env, _) = Env::reset(cfg).unwrap();
        env.submit_assignments(&[]).unwrap();
        let r = env.tick().unwrap();
        assert!((r.shared_reward + 0.1353352832366127).abs() < 1e-15);
    }

    #[test]
    fn no_tasks_no_reward() {
        let (mut env, _) = Env::reset(base_config()).unwrap();
        while !env.is_done() {
            if env.awaiting_decision() {
                env.submit_assignments(&[Action::Stay]).unwrap();
            }
            assert_eq!(env.tick().unwrap().shared_reward, 0.0);
        }
        assert!(env.tasks().iter().all(Option::is_none));
        let m = env.episode_metrics();
        assert_eq!(m.total_reward, 0.0);
        assert_eq!(m.mean_slowdown, None);
    }

    #[test]
    fn observation_rows() {
        let mut cfg = base_config();
        cfg.task_catalog[0] = stationary(0, Coord::new(1, 1), 10, 1);
        cfg.agents.push(AgentSpec {
            skills: SkillSet::empty(),
            spawn: Spawn::Fixed(Coord::new(3, 3)),
        });
        let (env, obs) = Env::reset(cfg).unwrap();
        let s = env.sentinel() as f64;
        assert_eq!(obs[0].rows, vec![[2.0, 10.0], [s, 0.0]]);
        assert_eq!(obs[1].rows, vec![[4.0, 10.0], [s, 0.0]]);
        let m = env.full_state_matrix();
        assert_eq!(m.len(), 3);
        assert_eq!(m[0], vec![2.0, s]);
        assert_eq!(m[2], vec![10.0, 0.0]);
    }

    #[test]
    fn agent_walks_to_assigned_task() {
        let mut cfg = base_config();
        cfg.task_catalog[0] = stationary(0, Coord::new(2, 1), 2, 1);
        let (mut env, _) = Env::reset(cfg).unwrap();
        env.submit_assignments(&[Action::Slot(0)]).unwrap();
        let mut last = env.agents()[0].location;
        for _ in 0..2 {
            env.tick().unwrap();
            let now = env.agents()[0].location;
            assert_eq!(last.manhattan(now), 1);
            last = now;
        }
        env.submit_assignments(&[Action::Slot(0)]).unwrap();
        env.tick().unwrap();
        assert_eq!(env.agents()[0].location, Coord::new(2, 1));
        assert_eq!(env.tasks()[0].as_ref().unwrap().remaining_work, 1);
    }

    #[test]
    fn arrivals_fill_lowest_slot() {
        let mut cfg = base_config();
        cfg.arrival_probability = 1.0;
        let (mut env, _) = Env::reset(cfg).unwrap();
        env.submit_assignments(&[Action::Stay]).unwrap();
        env.tick().unwrap();
        assert!(env.tasks()[0].is_some() && env.tasks()[1].is_none());
        env.tick().unwrap();
        assert!(env.tasks()[1].is_some());
        let a = env.tasks()[0].as_ref().unwrap().location;
        let b = env.tasks()[1].as_ref().unwrap().location;
        assert_ne!(a, b);
        assert_eq!(env.tasks()[1].as_ref().unwrap().arrival_time, 1);
    }
}
