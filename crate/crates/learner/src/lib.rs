//! Proximal policy optimisation for shared warehouse scheduling policies.

pub mod gae;
pub mod network;
pub mod policy;
pub mod ppo;
pub mod train;

pub use network::{Architecture, PolicyParams};
pub use policy::{features, policy_act, ActMode, ActOutput, InputError, PolicyScheduler};
pub use ppo::{ppo_loss, ppo_update, Adam, ConfigError, LossStats, Sample, TrainConfig, UpdateError};
pub use train::{
    evaluate, train, train_with, Checkpoint, CheckpointError, CurvePoint, EvalReport, TrainError, TrainOutcome,
    Validation,
};
