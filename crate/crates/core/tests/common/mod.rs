#![allow(dead_code)]

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vecdyn::model::{JointKind, ModelDescription, RobotModel};
use vecdyn::spatial::{rotation_about, SpatialInertia, SpatialTransform};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut impl Rng, n: usize, half_width: f64) -> Vec<f64> {
    (0..n)
        .map(|_| rng.random_range(-half_width..half_width))
        .collect()
}

/// `‖a − b‖∞ / max(‖b‖∞, 1e-300)`.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let scale = b.iter().map(|y| y.abs()).fold(0.0, f64::max);
    diff / scale.max(1e-300)
}

/// Random tree: `parents[i] < i`, mixed revolute/prismatic joints with
/// random axes and offsets, every body massive.
pub fn random_tree(rng: &mut impl Rng, n: usize) -> RobotModel {
    let mut desc = ModelDescription::new("random").link("base", None);
    for i in 0..n {
        let parent = if i == 0 { 0 } else { rng.random_range(0..=i) };
        let parent_name = if parent == 0 {
            "base".to_string()
        } else {
            format!("b{}", parent - 1)
        };
        let axis = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        )
        .normalize();
        let kind = if rng.random_bool(0.8) {
            JointKind::Revolute { axis }
        } else {
            JointKind::Prismatic { axis }
        };
        let rot_axis = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            1.0,
        )
        .normalize();
        let origin = SpatialTransform::from_parts(
            rotation_about(&rot_axis, rng.random_range(-3.0..3.0)),
            Vector3::from_iterator(uniform(rng, 3, 0.5)),
        );
        let a = Matrix3::from_iterator(uniform(rng, 9, 0.3));
        let inertia = SpatialInertia::from_params(
            rng.random_range(0.2..3.0),
            Vector3::from_iterator(uniform(rng, 3, 0.2)),
            a * a.transpose() + Matrix3::identity() * 0.01,
        )
        .unwrap();
        desc = desc.link(format!("b{i}"), Some(inertia)).joint(
            format!("j{i}"),
            kind,
            parent_name,
            format!("b{i}"),
            origin,
        );
    }
    desc.build().unwrap()
}
