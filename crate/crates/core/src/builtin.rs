//! Bundled robot models.

use nalgebra::{Matrix3, Vector3};

use crate::model::{floating_base, JointKind, ModelDescription, RobotModel};
use crate::spatial::{rotation_about, SpatialInertia, SpatialTransform};
use crate::urdf::load_urdf;

pub const ARM7_URDF: &str = include_str!("../assets/arm7.urdf");
pub const HUMANOID23_URDF: &str = include_str!("../assets/humanoid23.urdf");

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 3] = ["chain7", "humanoid23", "humanoid29"];

/// 7-DOF serial arm.
pub fn chain7() -> RobotModel {
    load_urdf(ARM7_URDF).expect("bundled arm URDF is valid")
}

/// Fixed-base humanoid: 2 legs × 6, waist 1, 2 arms × 5.
pub fn humanoid23() -> RobotModel {
    load_urdf(HUMANOID23_URDF).expect("bundled humanoid URDF is valid")
}

/// [`humanoid23`] on a 6-DOF floating base.
pub fn humanoid29() -> RobotModel {
    floating_base(&humanoid23()).expect("humanoid has a root body")
}

pub fn by_name(name: &str) -> Option<RobotModel> {
    match name {
        "chain7" => Some(chain7()),
        "humanoid23" => Some(humanoid23()),
        "humanoid29" => Some(humanoid29()),
        _ => None,
    }
}

/// Deterministic `n`-link revolute chain with cycling axes, offsets and
/// off-center masses. Every link carries a frame named `tip` at its end.
pub fn serial_chain(n: usize) -> RobotModel {
    let axes = [
        Vector3::z(),
        Vector3::y(),
        Vector3::x(),
        Vector3::new(0.0, 0.6, 0.8),
    ];
    let mut desc = ModelDescription::new(format!("chain{n}")).link("link0", None);
    for i in 0..n {
        let k = i as f64;
        let rotation = rotation_about(&Vector3::new(1.0, 0.5, -0.3).normalize(), 0.4 + 0.1 * k);
        let origin =
            SpatialTransform::from_parts(rotation, Vector3::new(0.05, 0.02 * k.sin(), 0.3));
        let inertia = SpatialInertia::from_params(
            1.0 + 0.1 * k,
            Vector3::new(0.02, -0.01, 0.12),
            Matrix3::new(0.02, 0.001, 0.0, 0.001, 0.03, -0.002, 0.0, -0.002, 0.015),
        )
        .expect("valid inertia");
        desc = desc.link(format!("link{}", i + 1), Some(inertia)).joint(
            format!("joint{}", i + 1),
            JointKind::Revolute {
                axis: axes[i % axes.len()],
            },
            format!("link{i}"),
            format!("link{}", i + 1),
            origin,
        );
    }
    desc.frame(
        "tip",
        format!("link{n}"),
        SpatialTransform::from_translation(Vector3::new(0.0, 0.0, 0.1)),
    )
    .build()
    .expect("generated chain is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_models() {
        let arm = chain7();
        assert_eq!(arm.n_dof(), 7);
        assert!(arm.is_serial_chain());
        assert!(arm.frame("arm7_hand_tcp").is_some());
        let h = humanoid23();
        assert_eq!(h.n_dof(), 23);
        assert!(!h.is_serial_chain());
        assert!(h.diagnostics().is_empty());
        let floating = humanoid29();
        assert_eq!(floating.n_dof(), 29);
        // Only the five massless base stages are flagged.
        assert_eq!(floating.diagnostics().len(), 5);
        for name in NAMES {
            assert!(by_name(name).is_some());
        }
        assert!(by_name("nope").is_none());
    }

    #[test]
    fn serial_chain_shapes() {
        for n in [1, 5, 16] {
            let m = serial_chain(n);
            assert_eq!(m.n_dof(), n);
            assert!(m.is_serial_chain());
        }
    }
}
