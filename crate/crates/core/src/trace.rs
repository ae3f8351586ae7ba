//! JSON-lines episode traces and bit-exact replay.
//!
//! A trace starts with a header record carrying the full [`EnvConfig`],
//! followed by one record per tick. Tick records carry the actions submitted
//! at that tick's decision (if any), so the trace alone is enough to re-run
//! the episode and compare every line byte-for-byte.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Action, TaskType};
use crate::engine::{EngineError, Env, EnvConfig, StepReport};
use crate::floorplan::Coord;

pub const TRACE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub slot: usize,
    #[serde(rename = "type")]
    pub task_type: TaskType,
    pub loc: Coord,
    pub work: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    /// Tick index (time before the tick ran).
    pub t: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actions: Option<Vec<Action>>,
    pub agents: Vec<Coord>,
    pub tasks: Vec<SlotRecord>,
    pub shared_reward: f64,
    pub flags: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceRecord {
    Header {
        v: u32,
        config: Box<EnvConfig>,
        /// Identifies the program that wrote the trace; ignored by replay.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        build: Option<String>,
    },
    Tick { v: u32, #[serde(flatten)] record: TickRecord },
}

impl TraceRecord {
    pub fn header(config: &EnvConfig) -> Self {
        Self::Header {
            v: TRACE_VERSION,
            config: Box::new(config.clone()),
            build: None,
        }
    }

    pub fn tick(env: &Env, t: u64, actions: Option<&[Action]>, report: &StepReport) -> Self {
        Self::Tick {
            v: TRACE_VERSION,
            record: TickRecord {
                t,
                actions: actions.map(<[Action]>::to_vec),
                agents: env.agents().iter().map(|a| a.location).collect(),
                tasks: env
                    .tasks()
                    .iter()
                    .flatten()
                    .map(|task| SlotRecord {
                        slot: task.slot,
                        task_type: task.spec.task_type,
                        loc: task.location,
                        work: task.remaining_work,
                    })
                    .collect(),
                shared_reward: report.shared_reward,
                flags: report.illegal_flags.clone(),
            },
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("trace records always serialize")
    }
}

/// Destination for trace lines.
pub trait TraceSink {
    fn record(&mut self, record: &TraceRecord) -> io::Result<()>;
}

impl<W: Write> TraceSink for W {
    fn record(&mut self, record: &TraceRecord) -> io::Result<()> {
        writeln!(self, "{}", record.to_line())
    }
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        source: serde_json::Error,
    },
    #[error("trace does not start with a header record")]
    MissingHeader,
    #[error("unsupported trace version {0}")]
    Version(u32),
    #[error("line {line}: engine error {source}")]
    Engine { line: usize, source: EngineError },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub ticks: usize,
    /// 1-based line numbers whose regenerated record differs from the trace.
    pub mismatched_lines: Vec<usize>,
    /// Sum of `shared_reward` over the trace's tick records.
    pub trace_total: f64,
    /// Cumulative reward of the re-simulated episode.
    pub engine_total: f64,
}

impl ReplayReport {
    pub fn is_exact(&self) -> bool {
        self.mismatched_lines.is_empty()
    }
}

/// Re-simulates a trace from its header and recorded actions, comparing
/// every regenerated tick line with the original.
pub fn replay(reader: impl BufRead) -> Result<ReplayReport, ReplayError> {
    let mut lines = reader.lines().enumerate();
    let (_, first) = lines.next().ok_or(ReplayError::MissingHeader)?;
    let header: TraceRecord = serde_json::from_str(&first?).map_err(|source| ReplayError::Parse { line: 1, source })?;
    let TraceRecord::Header { v, config, .. } = header else {
        return Err(ReplayError::MissingHeader);
    };
    if v != TRACE_VERSION {
        return Err(ReplayError::Version(v));
    }
    let (mut env, _) = Env::reset(*config).map_err(|source| ReplayError::Engine { line: 1, source })?;

    let mut report = ReplayReport {
        ticks: 0,
        mismatched_lines: Vec::new(),
        trace_total: 0.0,
        engine_total: 0.0,
    };
    for (i, line) in lines {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: TraceRecord = serde_json::from_str(&line).map_err(|source| ReplayError::Parse { line: lineno, source })?;
        let TraceRecord::Tick { v, record } = record else {
            report.mismatched_lines.push(lineno);
            continue;
        };
        if v != TRACE_VERSION {
            return Err(ReplayError::Version(v));
        }
        report.trace_total += record.shared_reward;
        let engine = |source| ReplayError::Engine { line: lineno, source };
        if let Some(actions) = &record.actions {
            env.submit_assignments(actions).map_err(engine)?;
        }
        let t = env.time();
        let step = env.tick().map_err(engine)?;
        let regenerated = TraceRecord::tick(&env, t, record.actions.as_deref(), &step).to_line();
        if regenerated != line {
            report.mismatched_lines.push(lineno);
        }
        report.ticks += 1;
    }
    report.engine_total = env.cumulative_reward();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{SkillSet, TaskSpec};
    use crate::engine::{AgentSpec, Spawn};
    use crate::floorplan::make_corridor;

    #[test]
    fn record_shape() {
        let config = EnvConfig {
            plan: make_corridor(1, 1),
            task_catalog: vec![TaskSpec::new(TaskType(0), 2, 1)],
            agents: vec![AgentSpec {
                skills: SkillSet::new([TaskType(0)]),
                spawn: Spawn::Fixed(Coord::new(1, 1)),
            }],
            arrival_probability: 1.0,
            decision_interval: 1,
            horizon: 2,
            illegal_action_penalty: -1.0,
            sentinel: None,
            seed: 0,
        };
        let (mut env, _) = Env::reset(config.clone()).unwrap();
        let actions = [Action::Stay];
        env.submit_assignments(&actions).unwrap();
        let report = env.tick().unwrap();
        let line = TraceRecord::tick(&env, 0, Some(&actions), &report).to_line();
        let value: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(value["kind"], "tick");
        assert_eq!(value["v"], 1);
        assert_eq!(value["t"], 0);
        assert_eq!(value["actions"], serde_json::json!(["stay"]));
        assert_eq!(value["agents"], serde_json::json!([{"x": 1, "y": 1}]));
        assert_eq!(value["tasks"][0]["slot"], 0);
        assert_eq!(value["tasks"][0]["work"], 2);
        assert_eq!(value["flags"], serde_json::json!([false]));

        let header = TraceRecord::header(&config).to_line();
        let back: TraceRecord = serde_json::from_str(&header).unwrap();
        assert_eq!(back, TraceRecord::header(&config));
    }

    #[test]
    fn replay_requires_header() {
        let err = replay("".as_bytes()).unwrap_err();
        assert!(matches!(err, ReplayError::MissingHeader));
    }
}
