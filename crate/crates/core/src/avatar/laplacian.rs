//! Uniform graph Laplacian over mesh edges and the Laplacian-matching loss.

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Vertex adjacency lists built from an edge list (duplicate edges ignored).
#[derive(Clone, Debug)]
pub struct Adjacency {
    pub neighbors: Vec<Vec<usize>>,
}

impl Adjacency {
    pub fn new(n: usize, edges: &[[usize; 2]]) -> Result<Self> {
        let mut neighbors = vec![Vec::new(); n];
        for &[a, b] in edges {
            if a >= n || b >= n {
                return Err(Error::input(format!("edge ({a}, {b}) out of range for {n} vertices")));
            }
            if a == b {
                continue;
            }
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for (v, nb) in neighbors.iter_mut().enumerate() {
            nb.sort_unstable();
            nb.dedup();
            if nb.is_empty() {
                return Err(Error::input(format!("vertex {v} has no neighbors")));
            }
        }
        Ok(Self { neighbors })
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    /// `Δv = v − mean(neighbors of v)`.
    pub fn apply(&self, v: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
        assert_eq!(v.len(), self.len());
        self.neighbors
            .iter()
            .enumerate()
            .map(|(i, nb)| v[i] - nb.iter().map(|&j| v[j]).sum::<Vector3<f64>>() / nb.len() as f64)
            .collect()
    }

    /// `Lᵀ·g` for the Laplacian operator.
    pub fn apply_transpose(&self, g: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
        let mut out = g.to_vec();
        for (i, nb) in self.neighbors.iter().enumerate() {
            let share = g[i] / nb.len() as f64;
            for &j in nb {
                out[j] -= share;
            }
        }
        out
    }
}

pub fn laplacian(vertices: &[Vector3<f64>], edges: &[[usize; 2]]) -> Result<Vec<Vector3<f64>>> {
    Ok(Adjacency::new(vertices.len(), edges)?.apply(vertices))
}

/// `Σ ‖Δ(reference) − Δ(deformed)‖²` and its gradient with respect to `deformed`.
pub fn laplacian_loss_with_grad(
    adj: &Adjacency,
    reference: &[Vector3<f64>],
    deformed: &[Vector3<f64>],
) -> (f64, Vec<Vector3<f64>>) {
    let diff: Vec<Vector3<f64>> = adj
        .apply(deformed)
        .iter()
        .zip(adj.apply(reference))
        .map(|(d, r)| d - r)
        .collect();
    let loss = diff.iter().map(|d| d.norm_squared()).sum();
    let scaled: Vec<_> = diff.iter().map(|d| d * 2.0).collect();
    (loss, adj.apply_transpose(&scaled))
}

pub fn laplacian_loss(canonical: &[Vector3<f64>], deformed: &[Vector3<f64>], edges: &[[usize; 2]]) -> Result<f64> {
    if canonical.len() != deformed.len() {
        return Err(Error::input("laplacian loss needs vertex sets of equal size"));
    }
    let adj = Adjacency::new(canonical.len(), edges)?;
    Ok(laplacian_loss_with_grad(&adj, canonical, deformed).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_mesh(rng: &mut ChaCha8Rng, n: usize) -> (Vec<Vector3<f64>>, Vec<[usize; 2]>) {
        let v: Vec<_> = (0..n)
            .map(|_| Vector3::new(rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()))
            .collect();
        let mut e: Vec<[usize; 2]> = (0..n).map(|i| [i, (i + 1) % n]).collect();
        for _ in 0..2 * n {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a != b {
                e.push([a, b]);
            }
        }
        (v, e)
    }

    #[test]
    fn matches_dense_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (v, e) = random_mesh(&mut rng, 25);
        let n = v.len();
        let mut adj = DMatrix::<f64>::zeros(n, n);
        for &[a, b] in &e {
            adj[(a, b)] = 1.0;
            adj[(b, a)] = 1.0;
        }
        let mut l = DMatrix::<f64>::identity(n, n);
        for i in 0..n {
            let deg: f64 = adj.row(i).sum();
            for j in 0..n {
                l[(i, j)] -= adj[(i, j)] / deg;
            }
        }
        let vm = DMatrix::from_fn(n, 3, |i, k| v[i][k]);
        let want = &l * vm;
        let got = laplacian(&v, &e).unwrap();
        for i in 0..n {
            for k in 0..3 {
                assert!((want[(i, k)] - got[i][k]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ring_points_outward_equally() {
        let n = 12;
        let v: Vec<_> = (0..n)
            .map(|i| {
                let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                Vector3::new(a.cos(), a.sin(), 0.0)
            })
            .collect();
        let e: Vec<_> = (0..n).map(|i| [i, (i + 1) % n]).collect();
        let l = laplacian(&v, &e).unwrap();
        let m0 = l[0].norm();
        for (li, vi) in l.iter().zip(&v) {
            assert!((li.norm() - m0).abs() < 1e-12);
            assert!((li.normalize() - vi).norm() < 1e-12);
        }
    }

    #[test]
    fn loss_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (v, e) = random_mesh(&mut rng, 15);
        assert_eq!(laplacian_loss(&v, &v, &e).unwrap(), 0.0);
        let shifted: Vec<_> = v.iter().map(|x| x + Vector3::new(3.0, -2.0, 1.0)).collect();
        assert!(laplacian_loss(&v, &shifted, &e).unwrap() < 1e-20);
        let doubled: Vec<_> = v.iter().map(|x| x * 2.0).collect();
        let l = laplacian(&v, &e).unwrap();
        let want: f64 = l.iter().map(|x| x.norm_squared()).sum();
        assert!((laplacian_loss(&v, &doubled, &e).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn loss_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let (v, e) = random_mesh(&mut rng, 10);
        let d: Vec<_> = v.iter().map(|x| x + Vector3::new(rng.random::<f64>(), 0.1, -0.2) * 0.3).collect();
        let adj = Adjacency::new(v.len(), &e).unwrap();
        let (_, g) = laplacian_loss_with_grad(&adj, &v, &d);
        let h = 1e-6;
        for i in 0..d.len() {
            for k in 0..3 {
                let mut a = d.clone();
                let mut b = d.clone();
                a[i][k] += h;
                b[i][k] -= h;
                let num = (laplacian_loss_with_grad(&adj, &v, &a).0 - laplacian_loss_with_grad(&adj, &v, &b).0) / (2.0 * h);
                assert!((num - g[i][k]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn isolated_vertex_is_rejected() {
        let v = vec![Vector3::zeros(); 3];
        assert!(laplacian(&v, &[[0, 1]]).is_err());
    }
}
