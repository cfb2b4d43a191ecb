//! Face fusion: landmark gating, similarity alignment, hull masks and Poisson blending.

pub mod affine;
pub mod hull;
pub mod landmarks;
pub mod pipeline;
pub mod poisson;
pub mod procrustes;

pub use affine::{composite, estimate_partial_affine, warp_affine, AffineTransform};
pub use hull::{convex_hull, convex_hull_mask, HullMask};
pub use landmarks::LandmarkSet;
pub use pipeline::{fuse_face, FuseOutcome, FuseStatus};
pub use poisson::{poisson_blend, poisson_residual};
pub use procrustes::{gate, procrustes_disparity, DEFAULT_GATE};
