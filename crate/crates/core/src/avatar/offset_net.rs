//! Pose-conditioned per-vertex offset network: two tanh hidden layers and a
//! scaled linear output.

use nalgebra::{DMatrix, DVector, Vector3};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

pub const HIDDEN: usize = 64;
pub const OUTPUT_SCALE: f64 = 0.01;

#[derive(Clone, Debug, PartialEq)]
pub struct OffsetNet {
    pub input_dim: usize,
    pub hidden: usize,
    pub vertices: usize,
    /// `W1 (h×in), b1, W2 (h×h), b2, W3 (3N×h), b3`, matrices row-major.
    pub params: Vec<f64>,
}

/// Intermediate activations kept for the backward pass.
pub struct NetTape {
    input: DVector<f64>,
    h1: DVector<f64>,
    h2: DVector<f64>,
}

impl OffsetNet {
    /// Hidden layers get scaled normal weights; the output layer starts at zero so
    /// initial offsets vanish.
    pub fn new(input_dim: usize, vertices: usize, rng: &mut impl Rng) -> Self {
        let mut net = Self::zeros(input_dim, vertices);
        let (w1, w2) = (net.hidden * input_dim, net.hidden * net.hidden);
        let n1 = Normal::new(0.0, (1.0 / input_dim as f64).sqrt()).unwrap();
        let n2 = Normal::new(0.0, (1.0 / net.hidden as f64).sqrt()).unwrap();
        for x in &mut net.params[..w1] {
            *x = n1.sample(rng);
        }
        let o2 = w1 + net.hidden;
        for x in &mut net.params[o2..o2 + w2] {
            *x = n2.sample(rng);
        }
        net
    }

    pub fn zeros(input_dim: usize, vertices: usize) -> Self {
        let hidden = HIDDEN;
        let len = Self::param_count(input_dim, hidden, vertices);
        Self {
            input_dim,
            hidden,
            vertices,
            params: vec![0.0; len],
        }
    }

    pub fn param_count(input_dim: usize, hidden: usize, vertices: usize) -> usize {
        hidden * input_dim + hidden + hidden * hidden + hidden + 3 * vertices * hidden + 3 * vertices
    }

    pub fn validate(&self) -> Result<()> {
        if self.params.len() != Self::param_count(self.input_dim, self.hidden, self.vertices) {
            return Err(Error::input("offset network parameter count does not match its dimensions"));
        }
        if self.params.iter().any(|x| !x.is_finite()) {
            return Err(Error::input("offset network has non-finite weights"));
        }
        Ok(())
    }

    fn layers(&self) -> [(usize, usize, usize); 3] {
        // (offset, rows, cols) of each weight matrix; bias follows immediately
        let (i, h, o) = (self.input_dim, self.hidden, 3 * self.vertices);
        let l1 = 0;
        let l2 = l1 + h * i + h;
        let l3 = l2 + h * h + h;
        [(l1, h, i), (l2, h, h), (l3, o, h)]
    }

    fn affine(&self, layer: (usize, usize, usize), x: &DVector<f64>) -> DVector<f64> {
        let (off, rows, cols) = layer;
        let w = &self.params[off..off + rows * cols];
        let b = &self.params[off + rows * cols..off + rows * cols + rows];
        DVector::from_fn(rows, |r, _| {
            let row = &w[r * cols..(r + 1) * cols];
            b[r] + row.iter().zip(x.iter()).map(|(a, c)| a * c).sum::<f64>()
        })
    }

    pub fn forward_with_tape(&self, input: &[f64]) -> (Vec<Vector3<f64>>, NetTape) {
        assert_eq!(input.len(), self.input_dim, "offset network input size");
        let [l1, l2, l3] = self.layers();
        let x = DVector::from_column_slice(input);
        let h1 = self.affine(l1, &x).map(f64::tanh);
        let h2 = self.affine(l2, &h1).map(f64::tanh);
        let out = self.affine(l3, &h2);
        let offsets = (0..self.vertices)
            .map(|v| Vector3::new(out[3 * v], out[3 * v + 1], out[3 * v + 2]) * OUTPUT_SCALE)
            .collect();
        (offsets, NetTape { input: x, h1, h2 })
    }

    pub fn forward(&self, input: &[f64]) -> Vec<Vector3<f64>> {
        self.forward_with_tape(input).0
    }

    /// Accumulates parameter gradients for upstream offset gradients `grad_out`
    /// and returns the gradient with respect to the input.
    pub fn backward(&self, tape: &NetTape, grad_out: &[Vector3<f64>], grad_params: &mut [f64]) -> Vec<f64> {
        let [l1, l2, l3] = self.layers();
        let go = DVector::from_fn(3 * self.vertices, |i, _| grad_out[i / 3][i % 3] * OUTPUT_SCALE);
        let g2 = self.layer_backward(l3, &tape.h2, &go, grad_params);
        let g2 = g2.component_mul(&tape.h2.map(|h| 1.0 - h * h));
        let g1 = self.layer_backward(l2, &tape.h1, &g2, grad_params);
        let g1 = g1.component_mul(&tape.h1.map(|h| 1.0 - h * h));
        self.layer_backward(l1, &tape.input, &g1, grad_params).as_slice().to_vec()
    }

    fn layer_backward(
        &self,
        layer: (usize, usize, usize),
        x: &DVector<f64>,
        gy: &DVector<f64>,
        grad_params: &mut [f64],
    ) -> DVector<f64> {
        let (off, rows, cols) = layer;
        let w = DMatrix::from_row_slice(rows, cols, &self.params[off..off + rows * cols]);
        for r in 0..rows {
            if gy[r] == 0.0 {
                continue;
            }
            let gw = &mut grad_params[off + r * cols..off + (r + 1) * cols];
            for (g, xc) in gw.iter_mut().zip(x.iter()) {
                *g += gy[r] * xc;
            }
            grad_params[off + rows * cols + r] += gy[r];
        }
        w.tr_mul(gy)
    }
}
