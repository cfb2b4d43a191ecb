//! Body pose fitting to 2D keypoint sequences, and depth-map alignment.

pub mod depth;
pub mod fit;
pub mod keypoints;
pub mod objective;

pub use depth::align_depth;
pub use fit::{fit, momentum_params, smooth_params, smooth_params_with, FitResult};
pub use keypoints::{body_keypoints, project_joints, project_keypoints, KEYPOINT_JOINTS};
pub use objective::{kpt_loss, objective, reg_loss, temp_loss, FitSequence, FitWeights};
