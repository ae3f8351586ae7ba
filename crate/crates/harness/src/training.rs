//! `train` and `transfer` commands.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use wareflow_core::{EnvConfig, RandomScheduler};
use wareflow_learner::{evaluate, train_with, Checkpoint, CurvePoint, TrainConfig, TrainOutcome};

use crate::experiment::evaluate_scheduler;
use crate::spec::{build_id, HarnessError, TrainSpec, TransferSpec};
use crate::stats::{paired_test, summarize, PairedTest, Summary};

fn stamped_checkpoint(out: &TrainOutcome, cfg: &TrainConfig, env: &EnvConfig) -> Checkpoint {
    Checkpoint {
        build: Some(build_id()),
        env: Some(env.clone()),
        ..out.checkpoint(cfg)
    }
}

fn write_curve(path: &Path, curve: &[CurvePoint], manifest: &serde_json::Value) -> Result<(), HarnessError> {
    let mut text = format!("# build: {}\n# config: {manifest}\n", build_id());
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in curve {
        w.serialize(p)?;
    }
    text.push_str(&String::from_utf8(w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?).expect("csv output is utf-8"));
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

fn save_checkpoint(ck: &Checkpoint, path: &Path) -> Result<(), HarnessError> {
    ck.save(path).map_err(|source| HarnessError::Checkpoint {
        path: path.display().to_string(),
        source,
    })
}

/// Trains one shared policy. With an output directory it writes
/// `checkpoint.json` (best validation parameters), `curve.csv` and
/// `manifest.json`.
pub fn run_train(
    spec: &TrainSpec,
    base: &Path,
    out: Option<&Path>,
    progress: impl FnMut(&CurvePoint),
) -> Result<(TrainOutcome, Checkpoint), HarnessError> {
    let env = spec.env.resolve(base)?.config_for(None, None)?;
    spec.train.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
    let outcome = train_with(&env, &spec.train, &spec.validation, progress)?;
    let ck = stamped_checkpoint(&outcome, &spec.train, &env);
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        let manifest = serde_json::json!({ "build": build_id(), "spec": spec, "env": env });
        let path = dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n")
            .map_err(|e| HarnessError::io(&path, e))?;
        save_checkpoint(&ck, &dir.join("checkpoint.json"))?;
        write_curve(&dir.join("curve.csv"), &outcome.curve, &manifest)?;
    }
    Ok((outcome, ck))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub build: String,
    pub seeds: Vec<u64>,
    pub transferred_rewards: Vec<f64>,
    pub native_rewards: Vec<f64>,
    pub random_rewards: Vec<f64>,
    pub transferred: Summary,
    pub native: Summary,
    pub random: Summary,
    /// `transferred.mean / native.mean`.
    pub reward_ratio: f64,
    /// `(transferred - random) / (native - random)` on mean rewards.
    pub improvement_ratio: f64,
    /// One-sided test that the transferred policy beats the native one.
    pub transferred_vs_native: Option<PairedTest>,
}

/// Both environments must expose the same observation and action spaces
/// and give agents the same skills.
pub fn check_transferable(train_env: &EnvConfig, eval_env: &EnvConfig) -> Result<(), HarnessError> {
    if train_env.num_slots() != eval_env.num_slots() {
        return Err(HarnessError::Config(format!(
            "transfer needs equal task slot counts, got {} and {}",
            train_env.num_slots(),
            eval_env.num_slots()
        )));
    }
    let skills = |c: &EnvConfig| c.agents.iter().map(|a| a.skills.clone()).collect::<Vec<_>>();
    if skills(train_env) != skills(eval_env) {
        return Err(HarnessError::Config("transfer needs identical agent skill sets".into()));
    }
    let types = |c: &EnvConfig| c.task_catalog.iter().map(|t| t.task_type).collect::<Vec<_>>();
    if types(train_env) != types(eval_env) {
        return Err(HarnessError::Config("transfer needs identical task types per slot".into()));
    }
    Ok(())
}

/// Evaluates two trained parameter sets and the random baseline on the same
/// episode seeds of `eval_env`.
pub fn transfer_report(
    transferred: &TrainOutcome,
    native: &TrainOutcome,
    eval_env: &EnvConfig,
    episodes: usize,
    seed: u64,
) -> Result<TransferReport, HarnessError> {
    let t = evaluate(&transferred.best, eval_env, episodes, seed)?;
    let n = evaluate(&native.best, eval_env, episodes, seed)?;
    let mut random = RandomScheduler::new(seed);
    let r: Vec<f64> = evaluate_scheduler(eval_env, &mut random, "random", (0, 0), episodes, &[seed], None)?
        .rows
        .iter()
        .map(|row| row.total_reward)
        .collect();
    let (ts, ns, rs) = (summarize(&t.rewards), summarize(&n.rewards), summarize(&r));
    Ok(TransferReport {
        build: build_id(),
        seeds: t.seeds.clone(),
        reward_ratio: ts.mean / ns.mean,
        improvement_ratio: (ts.mean - rs.mean) / (ns.mean - rs.mean),
        transferred_vs_native: (episodes >= 2).then(|| paired_test(&t.rewards, &n.rewards, 0.95)),
        transferred_rewards: t.rewards,
        native_rewards: n.rewards,
        random_rewards: r,
        transferred: ts,
        native: ns,
        random: rs,
    })
}

/// Trains on `train_env`, trains a fresh policy on `eval_env` with the same
/// budget, and evaluates both on `eval_env`. Writes `transfer.json`, both
/// checkpoints and `episodes.csv` when given an output directory.
pub fn run_transfer(spec: &TransferSpec, base: &Path, out: Option<&Path>) -> Result<TransferReport, HarnessError> {
    let train_env = spec.train_env.resolve(base)?.config_for(None, None)?;
    let eval_env = spec.eval_env.resolve(base)?.config_for(None, None)?;
    check_transferable(&train_env, &eval_env)?;
    spec.train.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
    let transferred = train_with(&train_env, &spec.train, &spec.validation, |_| {})?;
    let native = train_with(&eval_env, &spec.train, &spec.validation, |_| {})?;
    let report = transfer_report(&transferred, &native, &eval_env, spec.episodes, spec.seed)?;
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        let manifest = serde_json::json!({
            "build": build_id(),
            "spec": spec,
            "train_env": train_env,
            "eval_env": eval_env,
        });
        let doc = serde_json::json!({ "config": manifest, "report": report });
        let path = dir.join("transfer.json");
        fs::write(&path, serde_json::to_string_pretty(&doc).expect("report serializes") + "\n")
            .map_err(|e| HarnessError::io(&path, e))?;
        save_checkpoint(&stamped_checkpoint(&transferred, &spec.train, &train_env), &dir.join("transferred.json"))?;
        save_checkpoint(&stamped_checkpoint(&native, &spec.train, &eval_env), &dir.join("native.json"))?;

        let mut text = format!("# build: {}\n# config: {manifest}\n", build_id());
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["episode", "seed", "transferred", "native", "random"])?;
        for i in 0..report.seeds.len() {
            w.write_record([
                i.to_string(),
                report.seeds[i].to_string(),
                report.transferred_rewards[i].to_string(),
                report.native_rewards[i].to_string(),
                report.random_rewards[i].to_string(),
            ])?;
        }
        text.push_str(&String::from_utf8(w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?).expect("csv output is utf-8"));
        let path = dir.join("episodes.csv");
        fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))?;
    }
    Ok(report)
}
