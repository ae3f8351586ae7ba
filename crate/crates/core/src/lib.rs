//! Simulator for location-aware multi-agent warehouse scheduling.
//!
//! Agents with skill sets are assigned to task slots every few ticks; tasks
//! arrive on a 2-D floor plan, need a fixed amount of work, accept a limited
//! number of parallel workers and emit a priority-shaped negative reward
//! while they are alive. Each agent observes only its own A* distances to the
//! task slots plus the shared remaining-work column.

pub mod domain;
pub mod engine;
pub mod floorplan;
pub mod pathing;
pub mod rollout;
pub mod schedulers;
pub mod trace;

pub use domain::{
    can_contribute, priority_dominates, task_step_reward, Action, AgentState, DomainError, Placement, SkillSet,
    TaskInstance, TaskSpec, TaskType,
};
pub use engine::{AgentSpec, EngineError, Env, EnvConfig, Metrics, Observation, Spawn, StepReport};
pub use floorplan::{make_corridor, make_maze, make_open_grid, parse_floorplan, CellKind, Coord, FloorPlan, ParseError};
pub use pathing::{astar, distance_row, PathError, PathResult};
pub use rollout::{episode_seed, run_episode, run_episodes, EpisodeOutcome};
pub use schedulers::{DecisionContext, GreedyScheduler, MaxFlowScheduler, RandomScheduler, Scheduler};
