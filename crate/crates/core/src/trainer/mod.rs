//! Avatar optimization: loss, Adam, schedules, densification and the training loop.

pub mod adam;
pub mod config;
pub mod densify;
pub mod loss;
pub mod model;
pub mod schedule;
pub mod train;

pub use adam::{adam_step, AdamState};
pub use config::TrainConfig;
pub use densify::{densify_and_prune, DensifyParams, DensifyPlan, GradStats};
pub use loss::{total_loss, LossParts, LossWeights, Perceptual, PooledL1};
pub use model::{net_features, AvatarModel, PosedAvatar};
pub use schedule::{is_densify_step, position_lr, sh_schedule};
pub use train::{loss_csv, train, write_loss_csv, DensifyEvent, FrameSample, IterLog, TrainOutcome};
