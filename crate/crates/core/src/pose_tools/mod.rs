//! 2D pose alignment, temporal smoothing and sequence chunking.

pub mod scales;
pub mod skeleton;
pub mod smoothing;
pub mod windows;

pub use scales::{apply_scales, compute_scales, BodyPart, BodyPartScales, PARTS};
pub use skeleton::{read_skeletons, write_skeletons, Skeleton2D, NUM_KEYPOINTS};
pub use smoothing::{momentum_smooth, momentum_smooth_quats, quat_continuity, savgol, savgol_quats};
pub use windows::{sliding_windows, Windows};
