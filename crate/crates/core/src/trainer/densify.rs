//! Gradient-triggered cloning and low-opacity pruning.

use nalgebra::Vector3;

use crate::splat::GaussianSet;

/// Positional-gradient statistics accumulated between densification steps.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GradStats {
    /// Sum over visible iterations of the screen-space mean gradient norm.
    pub norm_sum: Vec<f64>,
    pub count: Vec<u32>,
    /// Sum of canonical-space position gradients.
    pub dir_sum: Vec<Vector3<f64>>,
}

impl GradStats {
    pub fn new(n: usize) -> Self {
        Self {
            norm_sum: vec![0.0; n],
            count: vec![0; n],
            dir_sum: vec![Vector3::zeros(); n],
        }
    }

    pub fn record(&mut self, i: usize, screen_norm: f64, grad: &Vector3<f64>) {
        self.norm_sum[i] += screen_norm;
        self.count[i] += 1;
        self.dir_sum[i] += grad;
    }

    /// Mean screen-space gradient norm, zero for never-visible Gaussians.
    pub fn mean_norm(&self, i: usize) -> f64 {
        if self.count[i] == 0 {
            0.0
        } else {
            self.norm_sum[i] / self.count[i] as f64
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DensifyParams {
    pub grad_threshold: f64,
    pub prune_opacity: f64,
    pub max_count: usize,
}

/// What one densify/prune pass did, as index bookkeeping for parallel arrays.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DensifyPlan {
    /// Per original Gaussian: survives pruning.
    pub keep: Vec<bool>,
    /// Original indices of cloned Gaussians; clones are appended after the survivors in this order.
    pub cloned_from: Vec<usize>,
}

impl DensifyPlan {
    pub fn pruned(&self) -> usize {
        self.keep.iter().filter(|k| !**k).count()
    }

    /// Applies the plan to a per-Gaussian array, copying clone sources.
    pub fn apply<T: Clone>(&self, items: &[T]) -> Vec<T> {
        let mut out: Vec<T> = items
            .iter()
            .zip(&self.keep)
            .filter(|(_, k)| **k)
            .map(|(x, _)| x.clone())
            .collect();
        out.extend(self.cloned_from.iter().map(|&i| items[i].clone()));
        out
    }
}

/// Removes Gaussians with opacity below `prune_opacity`, then clones survivors
/// whose mean screen-space gradient norm exceeds `grad_threshold`. Each clone
/// copies its source and moves one standard deviation against the accumulated
/// position gradient. When the count cap would be exceeded, the largest
/// gradients win (ties by index).
pub fn densify_and_prune(g: &GaussianSet, stats: &GradStats, params: &DensifyParams) -> (GaussianSet, DensifyPlan) {
    let n = g.len();
    let keep: Vec<bool> = (0..n).map(|i| g.opacity(i) >= params.prune_opacity).collect();
    let survivors = keep.iter().filter(|k| **k).count();
    let mut candidates: Vec<usize> = (0..n)
        .filter(|&i| keep[i] && stats.mean_norm(i) > params.grad_threshold)
        .collect();
    candidates.sort_by(|&a, &b| stats.mean_norm(b).total_cmp(&stats.mean_norm(a)).then(a.cmp(&b)));
    candidates.truncate(params.max_count.saturating_sub(survivors));
    candidates.sort_unstable();

    let plan = DensifyPlan {
        keep,
        cloned_from: candidates,
    };
    let mut out = GaussianSet {
        positions: plan.apply(&g.positions),
        log_scales: plan.apply(&g.log_scales),
        sh_coeffs: plan.apply(&g.sh_coeffs),
        opacity_logits: plan.apply(&g.opacity_logits),
    };
    for (k, &src) in plan.cloned_from.iter().enumerate() {
        let dir = stats.dir_sum[src];
        let norm = dir.norm();
        if norm > 0.0 {
            out.positions[survivors + k] -= dir * (g.log_scales[src].exp() / norm);
        }
    }
    (out, plan)
}
