pub mod avatar;
pub mod cli;
pub mod diffusion;
pub mod error;
pub mod fitting;
pub mod fusion;
pub mod image_io;
pub mod pose_tools;
pub mod splat;
pub mod synth;
pub mod trainer;
