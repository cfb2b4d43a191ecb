//! Procedurally textured capsule-human subjects.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::avatar::template::joint;
use crate::avatar::{capsule_human, BodyTemplate, CapsuleParams, NUM_SHAPE};

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSubject {
    pub template: BodyTemplate,
    /// Linear RGB albedo per template vertex.
    pub albedo: Vec<[f64; 3]>,
    pub shape: [f64; NUM_SHAPE],
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct SubjectParams {
    pub body: CapsuleParams,
    /// Standard deviation of the random shape coefficients.
    pub shape_std: f64,
}

impl Default for SubjectParams {
    fn default() -> Self {
        Self {
            body: CapsuleParams::default(),
            shape_std: 0.5,
        }
    }
}

fn random_color(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> [f64; 3] {
    std::array::from_fn(|_| rng.random_range(lo..hi))
}

/// Builds the body and paints it: skin on head, forearms and hands, a striped
/// shirt on torso and upper arms, trousers on the legs, dark shoes, plus a
/// smooth random shading field.
pub fn make_subject(seed: u64, params: &SubjectParams) -> SyntheticSubject {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let template = capsule_human(&params.body);
    let normal = Normal::new(0.0, params.shape_std.max(1e-12)).unwrap();
    let shape: [f64; NUM_SHAPE] = std::array::from_fn(|_| if params.shape_std > 0.0 { normal.sample(&mut rng) } else { 0.0 });

    let skin = [rng.random_range(0.55..0.9), rng.random_range(0.4..0.65), rng.random_range(0.3..0.5)];
    let shirt = random_color(&mut rng, 0.1, 0.9);
    let stripe = random_color(&mut rng, 0.1, 0.9);
    let trousers = random_color(&mut rng, 0.05, 0.6);
    let shoes = random_color(&mut rng, 0.02, 0.2);
    let stripe_period = rng.random_range(0.12..0.2);
    let waves: Vec<(Vector3<f64>, f64)> = (0..4)
        .map(|_| {
            let d = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            (d * rng.random_range(3.0..8.0), rng.random_range(0.0..std::f64::consts::TAU))
        })
        .collect();

    let albedo = template
        .canonical_vertices
        .iter()
        .zip(&template.skin_weights)
        .map(|(v, w)| {
            let driver = w
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
                .map(|(j, _)| j)
                .unwrap();
            let base = match driver {
                joint::NECK | joint::HEAD | joint::L_ELBOW | joint::R_ELBOW | joint::L_WRIST | joint::R_WRIST => skin,
                joint::PELVIS | joint::CHEST | joint::L_SHOULDER | joint::R_SHOULDER => {
                    if (v.y / stripe_period).rem_euclid(1.0) < 0.5 {
                        shirt
                    } else {
                        stripe
                    }
                }
                joint::L_ANKLE | joint::R_ANKLE => shoes,
                _ => trousers,
            };
            let shade = 1.0 + 0.08 * waves.iter().map(|(d, ph)| (d.dot(v) + ph).sin()).sum::<f64>() / waves.len() as f64;
            base.map(|c| (c * shade).clamp(0.0, 1.0))
        })
        .collect();
    SyntheticSubject {
        template,
        albedo,
        shape,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_subject() {
        let p = SubjectParams::default();
        assert_eq!(make_subject(3, &p), make_subject(3, &p));
        assert_ne!(make_subject(3, &p).albedo, make_subject(4, &p).albedo);
    }

    #[test]
    fn colors_in_range_and_counts_bounded() {
        let s = make_subject(1, &SubjectParams::default());
        assert!(s.albedo.iter().flatten().all(|c| (0.0..=1.0).contains(c)));
        assert!((1000..=2000).contains(&s.template.vertex_count()));
    }
}
