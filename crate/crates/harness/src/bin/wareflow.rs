use std::io::{self, BufReader};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wareflow_core::trace::replay;
use wareflow_harness::experiment::{comparison_text, output_dir, run_comparison, run_experiment};
use wareflow_harness::serve::serve;
use wareflow_harness::spec::{base_dir, build_id, load_json, ExperimentSpec, HarnessError, TrainSpec, TransferSpec};
use wareflow_harness::training::{run_train, run_transfer};

#[derive(Parser)]
#[command(name = "wareflow", version, about = "Warehouse multi-agent scheduling simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment file (JSON).
    spec: PathBuf,
    /// Override the base seed(s) with a single seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the episode count.
    #[arg(long)]
    episodes: Option<usize>,
    /// Output directory (defaults to the experiment's `outputs`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a JSON-lines trace for every episode.
    #[arg(long)]
    trace: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate schedulers over a skills × agents grid.
    Run(Common),
    /// Train a shared policy.
    Train(Common),
    /// Train on one floor plan, evaluate on another.
    Transfer(Common),
    /// Paired comparison of schedulers on identical seeds.
    Compare(Common),
    /// Drive an environment over newline-delimited JSON.
    Serve {
        /// Use standard input and output.
        #[arg(long)]
        stdio: bool,
    },
    /// Re-simulate a trace and check it line by line.
    Replay { trace: PathBuf },
}

fn experiment(c: &Common) -> Result<(ExperimentSpec, PathBuf), HarnessError> {
    let mut spec: ExperimentSpec = load_json(&c.spec)?;
    if let Some(s) = c.seed {
        spec.seeds = vec![s];
    }
    if let Some(e) = c.episodes {
        spec.episodes = e;
    }
    spec.trace |= c.trace;
    Ok((spec, base_dir(&c.spec)))
}

fn run(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Run(c) => {
            let (spec, base) = experiment(&c)?;
            let out = output_dir(c.out.as_deref(), spec.outputs.as_ref(), &base);
            if spec.trace && out.is_none() {
                return Err(HarnessError::Config("--trace needs an output directory".into()));
            }
            let report = run_experiment(&spec, &base, out.as_deref())?;
            print!("{}", report.table.to_text());
        }
        Command::Compare(c) => {
            let (spec, base) = experiment(&c)?;
            let out = output_dir(c.out.as_deref(), spec.outputs.as_ref(), &base);
            let comparisons = run_comparison(&spec, &base, out.as_deref())?;
            print!("{}", comparison_text(&comparisons));
        }
        Command::Train(c) => {
            let mut spec: TrainSpec = load_json(&c.spec)?;
            if let Some(s) = c.seed {
                spec.train.seed = s;
            }
            if let Some(e) = c.episodes {
                spec.validation.episodes = e;
            }
            let base = base_dir(&c.spec);
            let out = output_dir(c.out.as_deref(), spec.outputs.as_ref(), &base);
            let (outcome, _) = run_train(&spec, &base, out.as_deref(), |p| {
                eprintln!(
                    "steps {:>8}  reward {:>9.3}  entropy {:.3}  clip {:.3}{}",
                    p.env_steps,
                    p.mean_reward,
                    p.entropy,
                    p.clip_fraction,
                    p.eval_reward.map_or(String::new(), |e| format!("  eval {e:.3}"))
                )
            })?;
            println!(
                "trained {} steps; best validation mean {}",
                outcome.env_steps,
                outcome.best_eval.map_or("-".into(), |e| format!("{e:.3}"))
            );
        }
        Command::Transfer(c) => {
            let mut spec: TransferSpec = load_json(&c.spec)?;
            if let Some(s) = c.seed {
                spec.seed = s;
            }
            if let Some(e) = c.episodes {
                spec.episodes = e;
            }
            let base = base_dir(&c.spec);
            let out = output_dir(c.out.as_deref(), spec.outputs.as_ref(), &base);
            let r = run_transfer(&spec, &base, out.as_deref())?;
            println!(
                "transferred {:.3} ± {:.3}\nnative      {:.3} ± {:.3}\nrandom      {:.3} ± {:.3}\nreward ratio {:.3}\nimprovement ratio {:.3}",
                r.transferred.mean,
                r.transferred.stderr,
                r.native.mean,
                r.native.stderr,
                r.random.mean,
                r.random.stderr,
                r.reward_ratio,
                r.improvement_ratio
            );
        }
        Command::Serve { stdio } => {
            if !stdio {
                return Err(HarnessError::Config("only --stdio is supported".into()));
            }
            serve(io::stdin().lock(), io::stdout().lock()).map_err(|e| HarnessError::io(Path::new("<stdio>"), e))?;
        }
        Command::Replay { trace } => {
            let file = std::fs::File::open(&trace).map_err(|e| HarnessError::io(&trace, e))?;
            let report = replay(BufReader::new(file)).map_err(|e| HarnessError::Config(format!("{}: {e}", trace.display())))?;
            println!(
                "{} ticks, {} mismatched lines, trace total {}, engine total {}",
                report.ticks,
                report.mismatched_lines.len(),
                report.trace_total,
                report.engine_total
            );
            if !report.is_exact() {
                return Err(HarnessError::Config(format!(
                    "replay diverged at lines {:?}",
                    report.mismatched_lines
                )));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("({})", build_id());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
