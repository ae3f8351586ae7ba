//! Line-delimited JSON server driving one environment over a byte stream.
//!
//! Every request line gets exactly one reply line. One `act` request covers
//! a whole decision interval: the assignments are submitted and the engine
//! ticks until the next decision boundary or the horizon.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use wareflow_core::trace::TraceRecord;
use wareflow_core::{Action, EngineError, Env, EnvConfig, Metrics, Observation};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Request {
    Hello {
        v: u32,
        /// Protocol versions the client speaks.
        #[serde(default)]
        versions: Vec<u32>,
    },
    Reset {
        v: u32,
        config: Box<EnvConfig>,
        /// Attach trace records to replies.
        #[serde(default)]
        trace: bool,
    },
    Obs {
        v: u32,
    },
    Act {
        v: u32,
        actions: Vec<Action>,
    },
    Close {
        v: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    Parse,
    Version,
    Sequence,
    Config,
    Protocol,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reply {
    Hello {
        v: u32,
        version: u32,
        engine: String,
    },
    Obs {
        v: u32,
        time: u64,
        done: bool,
        num_slots: usize,
        observations: Vec<Observation>,
        /// Trace lines, verbatim.
        #[serde(skip_serializing_if = "Option::is_none")]
        trace: Option<Vec<String>>,
    },
    Report {
        v: u32,
        time: u64,
        done: bool,
        /// Sum of the interval's per-tick rewards.
        shared_reward: f64,
        tick_rewards: Vec<f64>,
        illegal_flags: Vec<bool>,
        completed: Vec<usize>,
        observations: Vec<Observation>,
        #[serde(skip_serializing_if = "Option::is_none")]
        metrics: Option<Metrics>,
        #[serde(skip_serializing_if = "Option::is_none")]
        trace: Option<Vec<String>>,
    },
    Close {
        v: u32,
    },
    Error {
        v: u32,
        code: ErrorCode,
        message: String,
    },
}

impl Reply {
    fn error(code: ErrorCode, message: impl Into<String>) -> Self {
        Reply::Error {
            v: PROTOCOL_VERSION,
            code,
            message: message.into(),
        }
    }
}

struct Episode {
    env: Env,
    observations: Vec<Observation>,
    trace: bool,
}

#[derive(Default)]
pub struct Server {
    negotiated: bool,
    episode: Option<Episode>,
    closed: bool,
}

impl Server {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Answers one request line.
    pub fn handle_line(&mut self, line: &str) -> Reply {
        let value: Value = match serde_json::from_str(line) {
            Ok(v) => v,
            Err(e) => return Reply::error(ErrorCode::Parse, format!("malformed JSON: {e}")),
        };
        match value.get("v").and_then(Value::as_u64) {
            Some(v) if v == PROTOCOL_VERSION as u64 => {}
            Some(v) => return Reply::error(ErrorCode::Version, format!("unsupported message version {v}")),
            None => return Reply::error(ErrorCode::Parse, "message lacks a numeric \"v\" field"),
        }
        match serde_json::from_value::<Request>(value) {
            Ok(req) => self.handle(req),
            Err(e) => Reply::error(ErrorCode::Parse, format!("bad request: {e}")),
        }
    }

    pub fn handle(&mut self, req: Request) -> Reply {
        let v = PROTOCOL_VERSION;
        match req {
            Request::Hello { versions, .. } => {
                if !versions.is_empty() && !versions.contains(&PROTOCOL_VERSION) {
                    return Reply::error(
                        ErrorCode::Version,
                        format!("no common protocol version; server speaks {PROTOCOL_VERSION}"),
                    );
                }
                self.negotiated = true;
                Reply::Hello {
                    v,
                    version: PROTOCOL_VERSION,
                    engine: format!("wareflow {}", env!("CARGO_PKG_VERSION")),
                }
            }
            _ if !self.negotiated => Reply::error(ErrorCode::Sequence, "hello must come first"),
            Request::Close { .. } => {
                self.closed = true;
                self.episode = None;
                Reply::Close { v }
            }
            Request::Reset { config, trace, .. } => match Env::reset(*config) {
                Ok((env, observations)) => {
                    let header = trace.then(|| vec![TraceRecord::header(env.config()).to_line()]);
                    let reply = Reply::Obs {
                        v,
                        time: env.time(),
                        done: env.is_done(),
                        num_slots: env.config().num_slots(),
                        observations: observations.clone(),
                        trace: header,
                    };
                    self.episode = Some(Episode {
                        env,
                        observations,
                        trace,
                    });
                    reply
                }
                Err(e) => {
                    self.episode = None;
                    Reply::error(ErrorCode::Config, e.to_string())
                }
            },
            Request::Obs { .. } => match &self.episode {
                Some(ep) => Reply::Obs {
                    v,
                    time: ep.env.time(),
                    done: ep.env.is_done(),
                    num_slots: ep.env.config().num_slots(),
                    observations: ep.observations.clone(),
                    trace: None,
                },
                None => Reply::error(ErrorCode::Sequence, "no episode; send reset first"),
            },
            Request::Act { actions, .. } => match &mut self.episode {
                Some(ep) => match step_interval(ep, &actions) {
                    Ok(reply) => reply,
                    Err(e) => Reply::error(ErrorCode::Protocol, e.to_string()),
                },
                None => Reply::error(ErrorCode::Sequence, "no episode; send reset first"),
            },
        }
    }
}

fn step_interval(ep: &mut Episode, actions: &[Action]) -> Result<Reply, EngineError> {
    let flags = ep.env.submit_assignments(actions)?;
    let mut tick_rewards = Vec::new();
    let mut completed = Vec::new();
    let mut trace = ep.trace.then(Vec::new);
    loop {
        let t = ep.env.time();
        let report = ep.env.tick()?;
        if let Some(records) = &mut trace {
            let decided = (tick_rewards.is_empty()).then_some(actions);
            records.push(TraceRecord::tick(&ep.env, t, decided, &report).to_line());
        }
        tick_rewards.push(report.shared_reward);
        completed.clone_from(&report.completed_this_interval);
        if let Some(obs) = report.observations {
            ep.observations = obs;
            break;
        }
    }
    let done = ep.env.is_done();
    Ok(Reply::Report {
        v: PROTOCOL_VERSION,
        time: ep.env.time(),
        done,
        shared_reward: tick_rewards.iter().sum(),
        tick_rewards,
        illegal_flags: flags,
        completed,
        observations: ep.observations.clone(),
        metrics: done.then(|| ep.env.episode_metrics()),
        trace,
    })
}

/// Serves requests from `input` until `close` or end of input.
pub fn serve(input: impl BufRead, mut output: impl Write) -> io::Result<()> {
    let mut server = Server::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = server.handle_line(&line);
        writeln!(output, "{}", serde_json::to_string(&reply).expect("replies always serialize"))?;
        output.flush()?;
        if server.is_closed() {
            break;
        }
    }
    Ok(())
}
