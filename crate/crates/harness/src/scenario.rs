//! Compact scenario descriptions that expand into full [`EnvConfig`]s.

use serde::{Deserialize, Serialize};
use wareflow_core::{
    make_corridor, make_maze, make_open_grid, parse_floorplan, AgentSpec, EnvConfig, FloorPlan, ParseError, SkillSet,
    Spawn, TaskSpec, TaskType,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Layout {
    Corridor { arm: usize, stem: usize },
    OpenGrid { width: usize, height: usize },
    Maze { width: usize, height: usize, seed: u64 },
    Ascii { rows: Vec<String> },
}

impl Layout {
    pub fn build(&self) -> Result<FloorPlan, ParseError> {
        let too_small = match *self {
            Layout::Corridor { arm, stem } => (arm == 0 || stem == 0).then_some((2 * arm + 1, stem + 1)),
            Layout::OpenGrid { width, height } => (width == 0 || height == 0).then_some((width, height)),
            Layout::Maze { width, height, .. } => (width < 3 || height < 3).then_some((width, height)),
            Layout::Ascii { .. } => None,
        };
        if let Some((width, height)) = too_small {
            return Err(ParseError::Dimensions { width, height });
        }
        Ok(match self {
            Layout::Corridor { arm, stem } => make_corridor(*arm, *stem),
            Layout::OpenGrid { width, height } => make_open_grid(*width, *height),
            Layout::Maze { width, height, seed } => make_maze(*width, *height, *seed),
            Layout::Ascii { rows } => parse_floorplan(&rows.join("\n"))?,
        })
    }
}

/// Homogeneous-task scenario: slot `j` holds task type `j`, agent `i` knows
/// `skills` consecutive types starting at `i` (wrapping around).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub layout: Layout,
    pub agents: usize,
    pub skills: usize,
    pub slots: usize,
    pub workload: u32,
    pub capacity: u32,
    pub priority: u32,
    pub arrival_probability: f64,
    pub decision_interval: u32,
    pub horizon: u64,
    pub illegal_action_penalty: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sentinel: Option<u32>,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            layout: Layout::Corridor { arm: 5, stem: 5 },
            agents: 1,
            skills: 3,
            slots: 3,
            workload: 10,
            capacity: 5,
            priority: 1,
            arrival_probability: 0.05,
            decision_interval: 10,
            horizon: 500,
            illegal_action_penalty: -1.0,
            sentinel: None,
            seed: 0,
        }
    }
}

impl Scenario {
    pub fn corridor(agents: usize, skills: usize) -> Self {
        Self {
            agents,
            skills,
            ..Self::default()
        }
    }

    pub fn with_layout(self, layout: Layout) -> Self {
        Self { layout, ..self }
    }

    pub fn build(&self) -> Result<EnvConfig, ParseError> {
        let plan = self.layout.build()?;
        let task_catalog = (0..self.slots)
            .map(|j| TaskSpec {
                priority: self.priority,
                ..TaskSpec::new(TaskType(j as u8), self.workload, self.capacity)
            })
            .collect();
        let agents = (0..self.agents)
            .map(|i| AgentSpec {
                skills: SkillSet::circular(i, self.skills, self.slots),
                spawn: Spawn::Random,
            })
            .collect();
        Ok(EnvConfig {
            plan,
            task_catalog,
            agents,
            arrival_probability: self.arrival_probability,
            decision_interval: self.decision_interval,
            horizon: self.horizon,
            illegal_action_penalty: self.illegal_action_penalty,
            sentinel: self.sentinel,
            seed: self.seed,
        })
    }
}
