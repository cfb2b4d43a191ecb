//! Synthetic subjects, turntable ground truth, corruptions and dataset files.

pub mod corrupt;
pub mod dataset;
pub mod landmarks;
pub mod sequence;
pub mod subject;

pub use corrupt::{corrupt, Corruption};
pub use dataset::{generate_dataset, read_cameras, read_dataset, read_poses, read_template, Dataset, SynthConfig, HELDOUT_DIR};
pub use landmarks::face_landmarks;
pub use sequence::{ground_truth_gaussians, render_frame, render_sequence, turntable_pose, SynthFrame};
pub use subject::{make_subject, SubjectParams, SyntheticSubject};
