//! Experiment orchestration for the wareflow simulator: declarative specs,
//! baseline tables, paired comparisons, transfer runs and the stdio server.

pub mod experiment;
pub mod scenario;
pub mod serve;
pub mod spec;
pub mod stats;
pub mod training;

pub use experiment::{compare_schedulers, run_comparison, run_experiment, Comparison, ExperimentReport, SummaryTable};
pub use scenario::{Layout, Scenario};
pub use spec::{build_id, EnvSource, ExperimentSpec, HarnessError, SchedulerSpec, TrainSpec, TransferSpec};
pub use training::{run_train, run_transfer, TransferReport};
