//! Real spherical harmonics up to degree 3 for view-dependent color.

use nalgebra::Vector3;

pub const SH_COEFFS: usize = 16;
pub const MAX_SH_DEGREE: usize = 3;

pub const SH_C0: f64 = 0.282_094_791_773_878_14;
const SH_C1: f64 = 0.488_602_511_902_919_9;
const SH_C2: [f64; 5] = [
    1.092_548_430_592_079_2,
    -1.092_548_430_592_079_2,
    0.315_391_565_252_520_05,
    -1.092_548_430_592_079_2,
    0.546_274_215_296_039_6,
];
const SH_C3: [f64; 7] = [
    -0.590_043_589_926_643_5,
    2.890_611_442_640_554,
    -0.457_045_799_464_465_8,
    0.373_176_332_590_115_4,
    -0.457_045_799_464_465_8,
    1.445_305_721_320_277,
    -0.590_043_589_926_643_5,
];

/// Number of active coefficients for a degree.
#[inline]
pub fn coeff_count(degree: usize) -> usize {
    (degree + 1) * (degree + 1)
}

/// Basis values and their gradients with respect to the (unnormalized) direction components.
pub fn basis_with_grad(d: &Vector3<f64>) -> ([f64; SH_COEFFS], [[f64; 3]; SH_COEFFS]) {
    let (x, y, z) = (d.x, d.y, d.z);
    let (xx, yy, zz) = (x * x, y * y, z * z);
    let (xy, yz, xz) = (x * y, y * z, x * z);
    let b = [
        SH_C0,
        -SH_C1 * y,
        SH_C1 * z,
        -SH_C1 * x,
        SH_C2[0] * xy,
        SH_C2[1] * yz,
        SH_C2[2] * (2.0 * zz - xx - yy),
        SH_C2[3] * xz,
        SH_C2[4] * (xx - yy),
        SH_C3[0] * y * (3.0 * xx - yy),
        SH_C3[1] * xy * z,
        SH_C3[2] * y * (4.0 * zz - xx - yy),
        SH_C3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy),
        SH_C3[4] * x * (4.0 * zz - xx - yy),
        SH_C3[5] * z * (xx - yy),
        SH_C3[6] * x * (xx - 3.0 * yy),
    ];
    let g = [
        [0.0, 0.0, 0.0],
        [0.0, -SH_C1, 0.0],
        [0.0, 0.0, SH_C1],
        [-SH_C1, 0.0, 0.0],
        [SH_C2[0] * y, SH_C2[0] * x, 0.0],
        [0.0, SH_C2[1] * z, SH_C2[1] * y],
        [-2.0 * SH_C2[2] * x, -2.0 * SH_C2[2] * y, 4.0 * SH_C2[2] * z],
        [SH_C2[3] * z, 0.0, SH_C2[3] * x],
        [2.0 * SH_C2[4] * x, -2.0 * SH_C2[4] * y, 0.0],
        [6.0 * SH_C3[0] * xy, SH_C3[0] * (3.0 * xx - 3.0 * yy), 0.0],
        [SH_C3[1] * yz, SH_C3[1] * xz, SH_C3[1] * xy],
        [-2.0 * SH_C3[2] * xy, SH_C3[2] * (4.0 * zz - xx - 3.0 * yy), 8.0 * SH_C3[2] * yz],
        [-6.0 * SH_C3[3] * xz, -6.0 * SH_C3[3] * yz, SH_C3[3] * (6.0 * zz - 3.0 * xx - 3.0 * yy)],
        [SH_C3[4] * (4.0 * zz - 3.0 * xx - yy), -2.0 * SH_C3[4] * xy, 8.0 * SH_C3[4] * xz],
        [2.0 * SH_C3[5] * xz, -2.0 * SH_C3[5] * yz, SH_C3[5] * (xx - yy)],
        [SH_C3[6] * (3.0 * xx - 3.0 * yy), -6.0 * SH_C3[6] * xy, 0.0],
    ];
    (b, g)
}

/// Unclamped SH color `sum_k b_k c_k + 0.5` over the active coefficients.
pub fn eval_sh_raw(coeffs: &[[f64; 3]; SH_COEFFS], dir: &Vector3<f64>, degree: usize) -> [f64; 3] {
    let (b, _) = basis_with_grad(dir);
    let mut rgb = [0.5; 3];
    for (k, bk) in b.iter().enumerate().take(coeff_count(degree.min(MAX_SH_DEGREE))) {
        for c in 0..3 {
            rgb[c] += bk * coeffs[k][c];
        }
    }
    rgb
}

/// View-dependent color for a unit direction, clamped at zero.
pub fn eval_sh(coeffs: &[[f64; 3]; SH_COEFFS], dir: &Vector3<f64>, degree: usize) -> [f64; 3] {
    eval_sh_raw(coeffs, dir, degree).map(|v| v.max(0.0))
}

/// DC coefficient that reproduces `rgb` at degree 0.
pub fn rgb_to_dc(rgb: f64) -> f64 {
    (rgb - 0.5) / SH_C0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs_from(seed: u64) -> [[f64; 3]; SH_COEFFS] {
        let mut c = [[0.0; 3]; SH_COEFFS];
        let mut s = seed;
        for row in &mut c {
            for v in row.iter_mut() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                *v = ((s >> 33) as f64 / (1u64 << 31) as f64) - 0.5;
            }
        }
        c
    }

    #[test]
    fn degree_zero_is_dc_plus_half() {
        let mut c = [[0.0; 3]; SH_COEFFS];
        c[0] = [0.3, -0.2, 1.0];
        let rgb = eval_sh(&c, &Vector3::new(0.0, 0.0, 1.0), 0);
        assert!((rgb[0] - (0.3 * 0.28209479 + 0.5)).abs() < 1e-8);
        assert!((rgb[1] - (-0.2 * 0.28209479 + 0.5)).abs() < 1e-8);
    }

    #[test]
    fn degree_zero_ignores_direction() {
        let c = coeffs_from(3);
        let a = eval_sh(&c, &Vector3::new(0.0, 0.0, 1.0), 0);
        let b = eval_sh(&c, &Vector3::new(0.6, -0.8, 0.0), 0);
        assert_eq!(a, b);
    }

    #[test]
    fn degree_one_terms_are_odd() {
        let mut c = [[0.0; 3]; SH_COEFFS];
        c[1] = [0.2, 0.1, -0.3];
        c[2] = [0.05, 0.4, 0.1];
        c[3] = [-0.1, 0.2, 0.3];
        let d = Vector3::new(0.3, -0.5, 0.81).normalize();
        let p = eval_sh_raw(&c, &d, 1);
        let n = eval_sh_raw(&c, &(-d), 1);
        for ch in 0..3 {
            assert!(((p[ch] - 0.5) + (n[ch] - 0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn basis_gradient_matches_finite_differences() {
        let d = Vector3::new(0.31, -0.47, 0.62);
        let (_, g) = basis_with_grad(&d);
        let h = 1e-6;
        for axis in 0..3 {
            let mut dp = d;
            let mut dm = d;
            dp[axis] += h;
            dm[axis] -= h;
            let (bp, _) = basis_with_grad(&dp);
            let (bm, _) = basis_with_grad(&dm);
            for k in 0..SH_COEFFS {
                let fd = (bp[k] - bm[k]) / (2.0 * h);
                assert!((fd - g[k][axis]).abs() < 1e-8, "k={k} axis={axis}");
            }
        }
    }

    #[test]
    fn output_is_clamped_nonnegative() {
        let mut c = [[0.0; 3]; SH_COEFFS];
        c[0] = [-10.0, 0.0, 0.0];
        assert_eq!(eval_sh(&c, &Vector3::z(), 3)[0], 0.0);
    }
}
