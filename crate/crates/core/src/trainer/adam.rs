//! Adam with bias correction over a flat parameter group.

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPS: f64 = 1e-8;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    /// Steps taken by the group; bias correction uses this shared count.
    pub step: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            step: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    /// Keeps the moments of rows where `keep` is true; each row spans `width` entries.
    pub fn retain_rows(&mut self, keep: &[bool], width: usize) {
        assert_eq!(keep.len() * width, self.m.len());
        let filter = |x: &Vec<f64>| -> Vec<f64> {
            x.chunks(width)
                .zip(keep)
                .filter(|(_, k)| **k)
                .flat_map(|(c, _)| c.iter().copied())
                .collect()
        };
        self.m = filter(&self.m);
        self.v = filter(&self.v);
    }

    /// Appends fresh zero moments for `rows` new rows.
    pub fn push_zero_rows(&mut self, rows: usize, width: usize) {
        self.m.extend(std::iter::repeat_n(0.0, rows * width));
        self.v.extend(std::iter::repeat_n(0.0, rows * width));
    }
}

/// One Adam update of `params` in place.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState, lr: f64) {
    assert_eq!(params.len(), grads.len());
    assert_eq!(params.len(), state.m.len());
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - BETA1.powi(t);
    let bc2 = 1.0 - BETA2.powi(t);
    for i in 0..params.len() {
        let g = grads[i];
        let m = BETA1 * state.m[i] + (1.0 - BETA1) * g;
        let v = BETA2 * state.v[i] + (1.0 - BETA2) * g * g;
        state.m[i] = m;
        state.v[i] = v;
        params[i] -= lr * (m / bc1) / ((v / bc2).sqrt() + EPS);
    }
}
