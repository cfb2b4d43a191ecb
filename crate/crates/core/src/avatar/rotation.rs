//! Axis-angle rotations, their derivatives, and quaternion conversions.

use nalgebra::{Matrix3, Vector3, Vector4};

#[inline]
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// `a(s) = sin θ / θ`, `b(s) = (1 - cos θ) / θ²` and their derivatives in `s = θ²`.
fn rodrigues_coeffs(s: f64) -> (f64, f64, f64, f64) {
    if s < 1e-2 {
        let a = 1.0 - s / 6.0 + s * s / 120.0 - s * s * s / 5040.0;
        let b = 0.5 - s / 24.0 + s * s / 720.0 - s * s * s / 40320.0;
        let da = -1.0 / 6.0 + s / 60.0 - s * s / 1680.0 + s * s * s / 90720.0;
        let db = -1.0 / 24.0 + s / 360.0 - s * s / 13440.0 + s * s * s / 907200.0;
        (a, b, da, db)
    } else {
        let th = s.sqrt();
        let (sn, cs) = th.sin_cos();
        let a = sn / th;
        let b = (1.0 - cs) / s;
        let da = (th * cs - sn) / (2.0 * th * s);
        let db = (th * sn - 2.0 * (1.0 - cs)) / (2.0 * s * s);
        (a, b, da, db)
    }
}

/// Rotation matrix of an axis-angle vector (Rodrigues' formula).
pub fn rodrigues(v: &Vector3<f64>) -> Matrix3<f64> {
    let (a, b, _, _) = rodrigues_coeffs(v.norm_squared());
    let k = skew(v);
    Matrix3::identity() + k * a + k * k * b
}

/// Rotation matrix and its partial derivatives with respect to each axis-angle component.
/// Smooth through the zero rotation.
pub fn rodrigues_with_grad(v: &Vector3<f64>) -> (Matrix3<f64>, [Matrix3<f64>; 3]) {
    let s = v.norm_squared();
    let (a, b, da, db) = rodrigues_coeffs(s);
    let k = skew(v);
    let kk = k * k;
    let r = Matrix3::identity() + k * a + kk * b;
    let grads = std::array::from_fn(|i| {
        let ei = skew(&Vector3::ith(i, 1.0));
        ei * a + (ei * k + k * ei) * b + (k * da + kk * db) * (2.0 * v[i])
    });
    (r, grads)
}

/// Axis-angle vector of a rotation matrix, angle in [0, π].
pub fn matrix_to_axis_angle(r: &Matrix3<f64>) -> Vector3<f64> {
    quat_to_axis_angle(&matrix_to_quat(r))
}

/// Unit quaternion `(w, x, y, z)` for an axis-angle vector.
pub fn axis_angle_to_quat(v: &Vector3<f64>) -> Vector4<f64> {
    let th = v.norm();
    if th < 1e-12 {
        return Vector4::new(1.0, 0.5 * v.x, 0.5 * v.y, 0.5 * v.z).normalize();
    }
    let (s, c) = (0.5 * th).sin_cos();
    let axis = v / th;
    Vector4::new(c, s * axis.x, s * axis.y, s * axis.z)
}

/// Axis-angle vector of a (not necessarily normalized) quaternion `(w, x, y, z)`.
/// `q` and `-q` map to the same rotation.
pub fn quat_to_axis_angle(q: &Vector4<f64>) -> Vector3<f64> {
    let q = q.normalize();
    let q = if q.x < 0.0 { -q } else { q };
    let vec = Vector3::new(q.y, q.z, q.w);
    let sn = vec.norm();
    if sn < 1e-12 {
        return vec * 2.0;
    }
    let angle = 2.0 * sn.atan2(q.x);
    vec * (angle / sn)
}

pub fn matrix_to_quat(r: &Matrix3<f64>) -> Vector4<f64> {
    let tr = r.trace();
    let q = if tr > 0.0 {
        let s = (tr + 1.0).sqrt() * 2.0;
        Vector4::new(0.25 * s, (r[(2, 1)] - r[(1, 2)]) / s, (r[(0, 2)] - r[(2, 0)]) / s, (r[(1, 0)] - r[(0, 1)]) / s)
    } else if r[(0, 0)] > r[(1, 1)] && r[(0, 0)] > r[(2, 2)] {
        let s = (1.0 + r[(0, 0)] - r[(1, 1)] - r[(2, 2)]).sqrt() * 2.0;
        Vector4::new((r[(2, 1)] - r[(1, 2)]) / s, 0.25 * s, (r[(0, 1)] + r[(1, 0)]) / s, (r[(0, 2)] + r[(2, 0)]) / s)
    } else if r[(1, 1)] > r[(2, 2)] {
        let s = (1.0 + r[(1, 1)] - r[(0, 0)] - r[(2, 2)]).sqrt() * 2.0;
        Vector4::new((r[(0, 2)] - r[(2, 0)]) / s, (r[(0, 1)] + r[(1, 0)]) / s, 0.25 * s, (r[(1, 2)] + r[(2, 1)]) / s)
    } else {
        let s = (1.0 + r[(2, 2)] - r[(0, 0)] - r[(1, 1)]).sqrt() * 2.0;
        Vector4::new((r[(1, 0)] - r[(0, 1)]) / s, (r[(0, 2)] + r[(2, 0)]) / s, (r[(1, 2)] + r[(2, 1)]) / s, 0.25 * s)
    };
    q.normalize()
}
