//! Isotropic Gaussian splats: representation, projection, rasterization and image metrics.

pub mod camera;
pub mod gaussian;
pub mod metrics;
pub mod raster;
pub mod sh;

pub use camera::{Camera, CameraRecord};
pub use gaussian::{logit, sigmoid, GaussianSet, ShCoeffs};
pub use metrics::{psnr, ssim};
pub use raster::{project, rasterize, rasterize_backward, render, GaussianGrads, Rendered, Splat2D};
pub use sh::{eval_sh, SH_COEFFS};
