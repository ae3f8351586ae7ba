use std::io::{BufRead, Write};
use std::process::{Command, Stdio};

use serde_json::{json, Value};
use wareflow_core::trace::TraceRecord;
use wareflow_core::{run_episode, RandomScheduler};
use wareflow_harness::scenario::Scenario;
use wareflow_harness::serve::{serve, Reply, Server};

const GOLDEN_IN: &str = include_str!("golden/session.in.jsonl");
const GOLDEN_OUT: &str = include_str!("golden/session.out.jsonl");

fn run_session(input: &str) -> String {
    let mut out = Vec::new();
    serve(input.as_bytes(), &mut out).unwrap();
    String::from_utf8(out).unwrap()
}

#[test]
fn golden_session_in_process() {
    assert_eq!(run_session(GOLDEN_IN), GOLDEN_OUT);
}

#[test]
fn golden_session_through_binary() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_wareflow"))
        .args(["serve", "--stdio"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(GOLDEN_IN.as_bytes()).unwrap();
    let output = child.wait_with_output().unwrap();
    assert!(output.status.success());
    assert_eq!(String::from_utf8(output.stdout).unwrap(), GOLDEN_OUT);
}

#[test]
fn one_reply_per_request() {
    let requests = GOLDEN_IN.lines().filter(|l| !l.trim().is_empty()).count();
    assert_eq!(GOLDEN_OUT.lines().count(), requests);
    for line in GOLDEN_OUT.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["v"], 1);
        let kind = v["kind"].as_str().unwrap();
        assert!(["hello", "obs", "report", "close", "error"].contains(&kind));
    }
}

#[test]
fn version_negotiation() {
    let out = run_session("{\"v\":1,\"kind\":\"hello\",\"versions\":[2,3]}\n{\"v\":1,\"kind\":\"hello\"}\n");
    let replies: Vec<Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(replies[0]["kind"], "error");
    assert_eq!(replies[0]["code"], "version");
    assert_eq!(replies[1]["kind"], "hello");
    assert_eq!(replies[1]["version"], 1);
}

fn request(server: &mut Server, value: Value) -> Value {
    let reply: Reply = server.handle_line(&value.to_string());
    serde_json::to_value(&reply).unwrap()
}

/// A seeded episode driven through the protocol reproduces the in-process
/// trace line for line.
#[test]
fn served_episode_matches_engine_trace() {
    let config = Scenario::corridor(2, 2).build().unwrap().with_seed(31);
    let mut trace = Vec::new();
    let outcome = run_episode(&config, &mut RandomScheduler::new(4), Some(&mut trace)).unwrap();
    let lines: Vec<String> = trace.lines().map(Result::unwrap).collect();

    let mut server = Server::new();
    request(&mut server, json!({"v": 1, "kind": "hello"}));
    let obs = request(&mut server, json!({"v": 1, "kind": "reset", "config": config, "trace": true}));
    let mut served = vec![obs["trace"][0].as_str().unwrap().to_string()];
    let mut decisions = 0;
    let mut total = 0.0;
    for line in &lines[1..] {
        let TraceRecord::Tick { record, .. } = serde_json::from_str(line).unwrap() else {
            panic!("tick expected");
        };
        let Some(actions) = record.actions else { continue };
        let reply = request(&mut server, json!({"v": 1, "kind": "act", "actions": actions}));
        assert_eq!(reply["kind"], "report", "{reply}");
        total += reply["shared_reward"].as_f64().unwrap();
        served.extend(reply["trace"].as_array().unwrap().iter().map(|l| l.as_str().unwrap().to_string()));
        decisions += 1;
        assert_eq!(reply["done"], decisions == 50);
        if decisions == 50 {
            assert_eq!(reply["metrics"]["total_reward"].as_f64().unwrap(), outcome.metrics.total_reward);
        }
    }
    assert_eq!(decisions, 50);
    assert_eq!(served, lines);
    assert!((total - outcome.metrics.total_reward).abs() < 1e-9);

    let after = request(&mut server, json!({"v": 1, "kind": "act", "actions": ["stay", "stay"]}));
    assert_eq!(after["kind"], "error");
}

#[test]
fn reset_twice_gives_identical_observations() {
    let config = Scenario::corridor(3, 1).build().unwrap().with_seed(5);
    let mut server = Server::new();
    request(&mut server, json!({"v": 1, "kind": "hello"}));
    let a = request(&mut server, json!({"v": 1, "kind": "reset", "config": config}));
    let b = request(&mut server, json!({"v": 1, "kind": "reset", "config": config}));
    assert_eq!(a, b);
    let shape = a["observations"].as_array().unwrap();
    assert_eq!(shape.len(), 3);
    for agent in shape {
        let rows = agent.as_array().unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.as_array().unwrap().len() == 2));
    }
}

#[test]
fn invalid_config_is_reported_not_fatal() {
    let mut config = serde_json::to_value(Scenario::default().build().unwrap()).unwrap();
    config["decision_interval"] = json!(0);
    let mut server = Server::new();
    request(&mut server, json!({"v": 1, "kind": "hello"}));
    let reply = request(&mut server, json!({"v": 1, "kind": "reset", "config": config}));
    assert_eq!(reply["code"], "config");
    let reply = request(&mut server, json!({"v": 1, "kind": "obs"}));
    assert_eq!(reply["code"], "sequence");
    assert!(!server.is_closed());
    let reply = request(&mut server, json!({"v": 1, "kind": "close"}));
    assert_eq!(reply["kind"], "close");
    assert!(server.is_closed());
}
