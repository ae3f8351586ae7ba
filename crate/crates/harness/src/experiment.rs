//! Baseline tables and paired scheduler comparisons.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wareflow_core::trace::{TraceRecord, TraceSink};
use wareflow_core::{episode_seed, run_episode, EnvConfig, Scheduler};

use crate::spec::{build_id, ExperimentSpec, HarnessError, SchedulerSpec};
use crate::stats::{paired_test, summarize, win_rate, PairedTest};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub scheduler: String,
    pub agents: usize,
    pub skills: usize,
    pub base_seed: u64,
    pub episode: usize,
    pub seed: u64,
    pub total_reward: f64,
    pub completed: usize,
    pub uncompleted: usize,
    pub mean_slowdown: Option<f64>,
    pub illegal_actions: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scheduler: String,
    pub agents: usize,
    pub skills: usize,
    pub episodes: usize,
    pub mean_reward: f64,
    pub stderr: f64,
    /// Pooled over every task completed in the cell's episodes.
    pub mean_slowdown: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

impl SummaryTable {
    pub fn get(&self, scheduler: &str, agents: usize, skills: usize) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.scheduler == scheduler && r.agents == agents && r.skills == skills)
    }

    /// Aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let header = ["scheduler", "agents", "skills", "episodes", "mean_reward", "stderr", "mean_slowdown"];
        let body: Vec<[String; 7]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.scheduler.clone(),
                    r.agents.to_string(),
                    r.skills.to_string(),
                    r.episodes.to_string(),
                    format!("{:.3}", r.mean_reward),
                    format!("{:.3}", r.stderr),
                    r.mean_slowdown.map_or("-".into(), |s| format!("{s:.3}")),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &body {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = String::new();
        let line = |cells: Vec<&str>, out: &mut String| {
            let parts: Vec<String> = cells
                .iter()
                .zip(widths)
                .enumerate()
                .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            out.push_str(parts.join("  ").trim_end());
            out.push('\n');
        };
        line(header.to_vec(), &mut out);
        for row in &body {
            line(row.iter().map(String::as_str).collect(), &mut out);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub build: String,
    pub episodes: Vec<EpisodeRow>,
    pub table: SummaryTable,
}

/// Adds the build id to trace headers.
struct StampedTrace<W: Write> {
    inner: W,
    build: String,
}

impl<W: Write> TraceSink for StampedTrace<W> {
    fn record(&mut self, record: &TraceRecord) -> io::Result<()> {
        match record {
            TraceRecord::Header { v, config, .. } => {
                let stamped = TraceRecord::Header {
                    v: *v,
                    config: config.clone(),
                    build: Some(self.build.clone()),
                };
                self.inner.record(&stamped)
            }
            tick => self.inner.record(tick),
        }
    }
}

fn file_label(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CellRun {
    pub rows: Vec<EpisodeRow>,
    /// Slowdown of every completed task, over all episodes.
    pub slowdowns: Vec<f64>,
}

/// Plays `episodes` episodes per base seed, episode `i` of base seed `s`
/// using `episode_seed(s, i)`.
pub fn evaluate_scheduler(
    env: &EnvConfig,
    sched: &mut dyn Scheduler,
    label: &str,
    cell: (usize, usize),
    episodes: usize,
    seeds: &[u64],
    trace_dir: Option<&Path>,
) -> Result<CellRun, HarnessError> {
    let mut run = CellRun::default();
    for &base in seeds {
        for i in 0..episodes {
            let seed = episode_seed(base, i as u64);
            let cfg = env.with_seed(seed);
            let outcome = match trace_dir {
                Some(dir) => {
                    let path = dir.join(format!("{}_a{}_s{}_seed{base}_ep{i}.jsonl", file_label(label), cell.0, cell.1));
                    let file = File::create(&path).map_err(|e| HarnessError::io(&path, e))?;
                    let mut sink = StampedTrace {
                        inner: BufWriter::new(file),
                        build: build_id(),
                    };
                    let outcome = run_episode(&cfg, sched, Some(&mut sink))?;
                    sink.inner.flush().map_err(|e| HarnessError::io(&path, e))?;
                    outcome
                }
                None => run_episode(&cfg, sched, None)?,
            };
            let m = outcome.metrics;
            run.slowdowns.extend_from_slice(&m.slowdowns);
            run.rows.push(EpisodeRow {
                scheduler: label.to_string(),
                agents: cell.0,
                skills: cell.1,
                base_seed: base,
                episode: i,
                seed,
                total_reward: m.total_reward,
                completed: m.completed,
                uncompleted: m.uncompleted,
                mean_slowdown: m.mean_slowdown,
                illegal_actions: m.illegal_actions,
            });
        }
    }
    Ok(run)
}

fn summarize_rows(rows: &[EpisodeRow], slowdowns: &[f64]) -> SummaryRow {
    let rewards: Vec<f64> = rows.iter().map(|r| r.total_reward).collect();
    let s = summarize(&rewards);
    SummaryRow {
        scheduler: rows[0].scheduler.clone(),
        agents: rows[0].agents,
        skills: rows[0].skills,
        episodes: rows.len(),
        mean_reward: s.mean,
        stderr: s.stderr,
        mean_slowdown: (!slowdowns.is_empty()).then(|| slowdowns.iter().sum::<f64>() / slowdowns.len() as f64),
    }
}

/// Everything an experiment needs, resolved from its spec.
struct Plan {
    cells: Vec<((usize, usize), EnvConfig)>,
    schedulers: Vec<SchedulerSpec>,
}

fn plan(spec: &ExperimentSpec, base: &Path) -> Result<Plan, HarnessError> {
    spec.validate()?;
    let env = spec.env.resolve(base)?;
    let cells = match &spec.sweep {
        Some(sweep) => sweep
            .cells(env.default_cell())
            .into_iter()
            .map(|(a, s)| Ok(((a, s), env.config_for(Some(a), Some(s))?)))
            .collect::<Result<Vec<_>, HarnessError>>()?,
        None => vec![(env.default_cell(), env.config_for(None, None)?)],
    };
    let schedulers = spec.schedulers.iter().map(|s| SchedulerSpec::parse(s)).collect::<Result<Vec<_>, _>>()?;
    for (_, cfg) in &cells {
        for s in &schedulers {
            s.instantiate(base, cfg.num_slots(), 0)?;
        }
    }
    Ok(Plan { cells, schedulers })
}

fn manifest(spec: &ExperimentSpec, plan: &Plan) -> serde_json::Value {
    serde_json::json!({
        "build": build_id(),
        "spec": spec,
        "cells": plan.cells.iter().map(|((a, s), cfg)| serde_json::json!({
            "agents": a,
            "skills": s,
            "config": cfg,
        })).collect::<Vec<_>>(),
    })
}

fn create_dir(dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

/// Output directory: the explicit one, else the experiment's `outputs` relative to
/// its own directory.
pub fn output_dir(explicit: Option<&Path>, spec_outputs: Option<&PathBuf>, base: &Path) -> Option<PathBuf> {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| spec_outputs.map(|p| base.join(p)))
}

/// Runs every scheduler on every cell of the experiment. With an output directory
/// it writes `manifest.json`, `episodes.csv`, `summary.csv`, `summary.txt`
/// and, if the experiment asks for them, per-episode traces under `traces/`.
pub fn run_experiment(spec: &ExperimentSpec, base: &Path, out: Option<&Path>) -> Result<ExperimentReport, HarnessError> {
    let plan = plan(spec, base)?;
    let trace_dir = match out {
        Some(dir) if spec.trace => {
            let t = dir.join("traces");
            create_dir(&t)?;
            Some(t)
        }
        Some(dir) => {
            create_dir(dir)?;
            None
        }
        None => None,
    };

    let mut episodes = Vec::new();
    let mut table = SummaryTable::default();
    for sched_spec in &plan.schedulers {
        for (cell, cfg) in &plan.cells {
            let mut sched = sched_spec.instantiate(base, cfg.num_slots(), spec.seeds[0])?;
            let label = sched_spec.label();
            let run = evaluate_scheduler(cfg, sched.as_mut(), &label, *cell, spec.episodes, &spec.seeds, trace_dir.as_deref())?;
            if run.rows.is_empty() {
                continue;
            }
            table.rows.push(summarize_rows(&run.rows, &run.slowdowns));
            episodes.extend(run.rows);
        }
    }
    let report = ExperimentReport {
        name: spec.name.clone(),
        build: build_id(),
        episodes,
        table,
    };
    if let Some(dir) = out {
        write_artifacts(&report, &manifest(spec, &plan), dir)?;
    }
    Ok(report)
}

fn csv_writer(path: &Path, manifest: &serde_json::Value) -> Result<csv::Writer<File>, HarnessError> {
    let mut file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    writeln!(file, "# build: {}", build_id()).map_err(|e| HarnessError::io(path, e))?;
    writeln!(file, "# config: {manifest}").map_err(|e| HarnessError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

/// Reader for CSVs written by this crate (skips the `#` preamble).
pub fn csv_reader(path: &Path) -> Result<csv::Reader<File>, HarnessError> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file))
}

fn write_artifacts(report: &ExperimentReport, manifest: &serde_json::Value, dir: &Path) -> Result<(), HarnessError> {
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(manifest).expect("manifest serializes") + "\n")
        .map_err(|e| HarnessError::io(&path, e))?;

    let mut w = csv_writer(&dir.join("episodes.csv"), manifest)?;
    for row in &report.episodes {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| HarnessError::io(dir, e))?;

    let mut w = csv_writer(&dir.join("summary.csv"), manifest)?;
    for row in &report.table.rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| HarnessError::io(dir, e))?;

    let path = dir.join("summary.txt");
    let text = format!("# {}\n# build: {}\n# config: {manifest}\n{}", report.name, report.build, report.table.to_text());
    fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareEntry {
    pub scheduler: String,
    pub rewards: Vec<f64>,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub a: String,
    pub b: String,
    /// Share of episodes where `a` scored higher (ties count one half).
    pub win_rate: f64,
    /// One-sided test that `a` beats `b`.
    pub test: PairedTest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub agents: usize,
    pub skills: usize,
    pub seeds: Vec<u64>,
    /// Sorted by mean reward, best first.
    pub ranked: Vec<CompareEntry>,
    pub pairs: Vec<PairRow>,
}

/// Runs every scheduler on identical episode seeds and reports pairwise
/// win rates and paired tests (95% one-sided).
pub fn compare_schedulers(
    env: &EnvConfig,
    schedulers: &mut [(String, Box<dyn Scheduler>)],
    cell: (usize, usize),
    episodes: usize,
    seeds: &[u64],
) -> Result<Comparison, HarnessError> {
    let mut entries = Vec::new();
    let mut episode_seeds = Vec::new();
    for (label, sched) in schedulers.iter_mut() {
        let rows = evaluate_scheduler(env, sched.as_mut(), label, cell, episodes, seeds, None)?.rows;
        episode_seeds = rows.iter().map(|r| r.seed).collect();
        let rewards: Vec<f64> = rows.iter().map(|r| r.total_reward).collect();
        let s = summarize(&rewards);
        entries.push(CompareEntry {
            scheduler: label.clone(),
            rewards,
            mean: s.mean,
            stderr: s.stderr,
        });
    }
    let mut pairs = Vec::new();
    if episode_seeds.len() >= 2 {
        for a in &entries {
            for b in &entries {
                if a.scheduler != b.scheduler {
                    pairs.push(PairRow {
                        a: a.scheduler.clone(),
                        b: b.scheduler.clone(),
                        win_rate: win_rate(&a.rewards, &b.rewards),
                        test: paired_test(&a.rewards, &b.rewards, 0.95),
                    });
                }
            }
        }
    }
    let mut ranked = entries;
    ranked.sort_by(|x, y| y.mean.total_cmp(&x.mean));
    Ok(Comparison {
        agents: cell.0,
        skills: cell.1,
        seeds: episode_seeds,
        ranked,
        pairs,
    })
}

/// `compare` over every cell of an experiment spec; writes `comparison.json`
/// and `comparison.txt` when given an output directory.
pub fn run_comparison(spec: &ExperimentSpec, base: &Path, out: Option<&Path>) -> Result<Vec<Comparison>, HarnessError> {
    let plan = plan(spec, base)?;
    let mut all = Vec::new();
    for (cell, cfg) in &plan.cells {
        let mut scheds = plan
            .schedulers
            .iter()
            .map(|s| Ok((s.label(), s.instantiate(base, cfg.num_slots(), spec.seeds[0])?)))
            .collect::<Result<Vec<_>, HarnessError>>()?;
        all.push(compare_schedulers(cfg, &mut scheds, *cell, spec.episodes, &spec.seeds)?);
    }
    if let Some(dir) = out {
        create_dir(dir)?;
        let manifest = manifest(spec, &plan);
        let doc = serde_json::json!({ "build": build_id(), "config": manifest, "comparisons": all });
        let path = dir.join("comparison.json");
        fs::write(&path, serde_json::to_string_pretty(&doc).expect("comparison serializes") + "\n")
            .map_err(|e| HarnessError::io(&path, e))?;
        let path = dir.join("comparison.txt");
        let text = format!("# {}\n# build: {}\n# config: {manifest}\n{}", spec.name, build_id(), comparison_text(&all));
        fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))?;
    }
    Ok(all)
}

pub fn comparison_text(comparisons: &[Comparison]) -> String {
    let mut out = String::new();
    for c in comparisons {
        out.push_str(&format!("agents={} skills={} episodes={}\n", c.agents, c.skills, c.seeds.len()));
        let width = c.ranked.iter().map(|e| e.scheduler.len()).max().unwrap_or(0);
        for (rank, e) in c.ranked.iter().enumerate() {
            out.push_str(&format!("  {}. {:<width$} {:>10.3} ± {:.3}\n", rank + 1, e.scheduler, e.mean, e.stderr));
        }
        for p in &c.pairs {
            out.push_str(&format!(
                "  {} vs {}: win rate {:.3}, mean diff {:.3}, p = {:.4}{}\n",
                p.a,
                p.b,
                p.win_rate,
                p.test.mean_diff,
                p.test.p_value,
                if p.test.significant() { " *" } else { "" }
            ));
        }
    }
    out
}
