//! Diffusion sampler math: noise schedules, DDIM updates and guidance, plus a
//! Gaussian toy model with known answers.

pub mod ddim;
pub mod schedule;
pub mod toy;

pub use ddim::{cfg, ddim_sample, ddim_step, ddim_update, eps_to_v, timesteps, v_to_eps, Denoiser, Prediction, SamplerConfig};
pub use schedule::{NoiseSchedule, BETA_END, BETA_START, TRAIN_STEPS};
pub use toy::{continuous_gain, convergence_table, trajectory_gain, GaussianDenoiser};
