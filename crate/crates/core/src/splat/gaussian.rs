use std::io::{Read, Write};

use nalgebra::Vector3;

use super::sh::SH_COEFFS;
use crate::error::{Error, Result};

pub type ShCoeffs = [[f64; 3]; SH_COEFFS];

/// Isotropic Gaussian splats.
///
/// World-space standard deviation is `exp(log_scale)`; opacity is `sigmoid(opacity_logit)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GaussianSet {
    pub positions: Vec<Vector3<f64>>,
    pub log_scales: Vec<f64>,
    pub sh_coeffs: Vec<ShCoeffs>,
    pub opacity_logits: Vec<f64>,
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

impl GaussianSet {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn push(&mut self, position: Vector3<f64>, log_scale: f64, sh: ShCoeffs, opacity_logit: f64) {
        self.positions.push(position);
        self.log_scales.push(log_scale);
        self.sh_coeffs.push(sh);
        self.opacity_logits.push(opacity_logit);
    }

    #[inline]
    pub fn opacity(&self, i: usize) -> f64 {
        sigmoid(self.opacity_logits[i])
    }

    /// Checks field lengths and per-splat finiteness.
    pub fn validate(&self) -> Result<()> {
        let n = self.positions.len();
        if self.log_scales.len() != n || self.sh_coeffs.len() != n || self.opacity_logits.len() != n {
            return Err(Error::input("GaussianSet field lengths disagree"));
        }
        for i in 0..n {
            let s = self.log_scales[i].exp();
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::input(format!("splat {i}: scale exp({}) not finite/positive", self.log_scales[i])));
            }
            if !self.positions[i].iter().all(|v| v.is_finite()) || self.opacity_logits[i].is_nan() {
                return Err(Error::input(format!("splat {i}: non-finite parameters")));
            }
        }
        Ok(())
    }

    /// Keeps only the splats for which `keep` is true.
    pub fn retain_mask(&mut self, keep: &[bool]) {
        let mut it = keep.iter();
        self.positions.retain(|_| *it.next().unwrap());
        let mut it = keep.iter();
        self.log_scales.retain(|_| *it.next().unwrap());
        let mut it = keep.iter();
        self.sh_coeffs.retain(|_| *it.next().unwrap());
        let mut it = keep.iter();
        self.opacity_logits.retain(|_| *it.next().unwrap());
    }

    /// Binary block: magic `GSAV`, version `u32`, count `u64`, then little-endian
    /// `f32` arrays positions (N×3), log_scales (N), sh_coeffs (N×16×3), opacity_logits (N).
    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(GSAV_MAGIC)?;
        w.write_all(&GSAV_VERSION.to_le_bytes())?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.len() * (3 + 1 + 48 + 1) * 4);
        for p in &self.positions {
            for v in p.iter() {
                buf.extend_from_slice(&(*v as f32).to_le_bytes());
            }
        }
        for v in &self.log_scales {
            buf.extend_from_slice(&(*v as f32).to_le_bytes());
        }
        for sh in &self.sh_coeffs {
            for row in sh {
                for v in row {
                    buf.extend_from_slice(&(*v as f32).to_le_bytes());
                }
            }
        }
        for v in &self.opacity_logits {
            buf.extend_from_slice(&(*v as f32).to_le_bytes());
        }
        w.write_all(&buf)
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        read_exact(r, &mut magic)?;
        if &magic != GSAV_MAGIC {
            return Err(Error::input("not a GSAV block (bad magic)"));
        }
        let version = read_u32(r)?;
        if version != GSAV_VERSION {
            return Err(Error::input(format!("unsupported GSAV version {version}")));
        }
        let n = read_u64(r)? as usize;
        let mut out = GaussianSet::default();
        for _ in 0..n {
            out.positions.push(Vector3::new(read_f32(r)?, read_f32(r)?, read_f32(r)?));
        }
        for _ in 0..n {
            out.log_scales.push(read_f32(r)?);
        }
        for _ in 0..n {
            let mut sh = [[0.0; 3]; SH_COEFFS];
            for row in &mut sh {
                for v in row.iter_mut() {
                    *v = read_f32(r)?;
                }
            }
            out.sh_coeffs.push(sh);
        }
        for _ in 0..n {
            out.opacity_logits.push(read_f32(r)?);
        }
        Ok(out)
    }

    /// Rounds every parameter through `f32`, matching what a checkpoint stores.
    pub fn quantized_f32(&self) -> GaussianSet {
        let q = |v: f64| v as f32 as f64;
        GaussianSet {
            positions: self.positions.iter().map(|p| p.map(q)).collect(),
            log_scales: self.log_scales.iter().map(|&v| q(v)).collect(),
            sh_coeffs: self.sh_coeffs.iter().map(|sh| sh.map(|row| row.map(q))).collect(),
            opacity_logits: self.opacity_logits.iter().map(|&v| q(v)).collect(),
        }
    }
}

pub const GSAV_MAGIC: &[u8; 4] = b"GSAV";
pub const GSAV_VERSION: u32 = 1;

fn read_exact(r: &mut impl Read, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|e| Error::input(format!("truncated binary block: {e}")))
}

pub(crate) fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub(crate) fn read_f32(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(f32::from_le_bytes(b) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn gsav_roundtrip_preserves_f32_values(
            vals in prop::collection::vec((-5.0f64..5.0, -4.0f64..1.0, -3.0f64..3.0, -6.0f64..6.0), 0..8)
        ) {
            let mut g = GaussianSet::default();
            for (i, (p, s, c, o)) in vals.iter().enumerate() {
                let mut sh = [[0.0; 3]; SH_COEFFS];
                sh[i % SH_COEFFS][i % 3] = *c;
                g.push(Vector3::new(*p, -p, p * 0.5), *s, sh, *o);
            }
            let mut bytes = Vec::new();
            g.write_to(&mut bytes).unwrap();
            prop_assert_eq!(&bytes[0..4], b"GSAV");
            prop_assert_eq!(bytes.len(), 16 + g.len() * 53 * 4);
            let back = GaussianSet::read_from(&mut bytes.as_slice()).unwrap();
            prop_assert_eq!(back, g.quantized_f32());
        }
    }

    #[test]
    fn bad_magic_is_rejected() {
        let bytes = b"XXXX\x01\x00\x00\x00\x00\x00\x00\x00\x00\x00\x00\x00".to_vec();
        assert!(GaussianSet::read_from(&mut bytes.as_slice()).is_err());
    }

    #[test]
    fn validate_catches_length_mismatch() {
        let mut g = GaussianSet::default();
        g.push(Vector3::zeros(), 0.0, [[0.0; 3]; SH_COEFFS], 0.0);
        g.log_scales.push(1.0);
        assert!(g.validate().is_err());
    }

    #[test]
    fn sigmoid_is_stable_at_extremes() {
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
        assert!((sigmoid(logit(0.3)) - 0.3).abs() < 1e-15);
    }
}
