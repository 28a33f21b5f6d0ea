mod common;

use common::{random_tree, rel_err, rng, uniform};
use nalgebra::{DVector, Vector3};
use proptest::prelude::*;
use rand::Rng;
use vecdyn::builtin;
use vecdyn::dynamics::*;
use vecdyn::kinematics::forward_kinematics;
use vecdyn::model::{Motion, RobotModel};
use vecdyn::scalar::lift;

fn models() -> Vec<RobotModel> {
    vec![
        builtin::chain7(),
        builtin::humanoid23(),
        builtin::humanoid29(),
    ]
}

fn matrix_rel_err(a: &MassMatrix<f64>, b: &MassMatrix<f64>) -> f64 {
    rel_err(a.matrix.as_slice(), b.matrix.as_slice())
}

#[test]
fn vectorized_matches_loop_on_bundled_models() {
    let mut r = rng(1);
    for model in models() {
        let n = model.n_dof();
        for _ in 0..50 {
            let q = uniform(&mut r, n, std::f64::consts::PI);
            let qd = uniform(&mut r, n, 2.0);
            let qdd = uniform(&mut r, n, 2.0);
            let g = GravitySpec::default();
            let v = rnea(&model, &q, &qd, &qdd, &g, None).unwrap();
            let l = rnea_loop(&model, &q, &qd, &qdd, &g, None).unwrap();
            assert!(rel_err(&v, &l) <= 1e-9, "rnea {}", rel_err(&v, &l));
            let mv = crba(&model, &q).unwrap();
            let ml = crba_loop(&model, &q).unwrap();
            assert!(matrix_rel_err(&mv, &ml) <= 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn vectorized_matches_loop_on_random_trees(seed in any::<u64>(), n in 1usize..20) {
        let mut r = rng(seed);
        let model = random_tree(&mut r, n);
        let q = uniform(&mut r, n, 3.0);
        let qd = uniform(&mut r, n, 2.0);
        let qdd = uniform(&mut r, n, 2.0);
        let mut ext = ExternalForces::zeros(n);
        for i in 0..n {
            ext.add_point_force(i, Vector3::from_iterator(uniform(&mut r, 3, 1.0)), Vector3::from_iterator(uniform(&mut r, 3, 5.0)));
        }
        let g = GravitySpec::default();
        let v = rnea(&model, &q, &qd, &qdd, &g, Some(&ext)).unwrap();
        let l = rnea_loop(&model, &q, &qd, &qdd, &g, Some(&ext)).unwrap();
        prop_assert!(rel_err(&v, &l) <= 1e-9);
        prop_assert!(matrix_rel_err(&crba(&model, &q).unwrap(), &crba_loop(&model, &q).unwrap()) <= 1e-9);
    }

    /// Joints on different branches never couple in M.
    #[test]
    fn mass_matrix_sparsity_follows_mask(seed in any::<u64>(), n in 2usize..16) {
        let mut r = rng(seed);
        let model = random_tree(&mut r, n);
        let m = crba(&model, &uniform(&mut r, n, 3.0)).unwrap();
        let mask = model.ancestor_mask();
        for i in 0..n {
            for j in 0..n {
                if !mask.get(i, j) && !mask.get(j, i) {
                    prop_assert_eq!(m.matrix[(i, j)], 0.0);
                }
            }
        }
    }
}

#[test]
fn crba_columns_are_unit_acceleration_torques() {
    let mut r = rng(2);
    for model in models() {
        let n = model.n_dof();
        let q = uniform(&mut r, n, std::f64::consts::PI);
        let m = crba(&model, &q).unwrap();
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            let col = rnea(&model, &q, &vec![0.0; n], &e, &GravitySpec::zero(), None).unwrap();
            let mcol: Vec<f64> = m.matrix.column(i).iter().copied().collect();
            assert!(rel_err(&mcol, &col) <= 1e-9);
        }
    }
}

/// `Jᵀ f` for a point force assembled from world joint poses, one joint at a time.
fn point_force_torque(
    model: &RobotModel,
    q: &[f64],
    body: usize,
    point: Vector3<f64>,
    force: Vector3<f64>,
) -> Vec<f64> {
    let frames = forward_kinematics(model, q).unwrap();
    let mut tau = vec![0.0; model.n_dof()];
    for k in model.ancestor_mask().ancestors(body) {
        let pose = &frames.transforms[k];
        let axis = pose.rotation * model.joints()[k].axis;
        tau[k] = match model.joints()[k].motion {
            Motion::Revolute => axis.cross(&(point - pose.translation)).dot(&force),
            Motion::Prismatic => axis.dot(&force),
        };
    }
    tau
}

#[test]
fn inverse_dynamics_decomposition() {
    let mut r = rng(3);
    for model in models() {
        let n = model.n_dof();
        for _ in 0..20 {
            let q = uniform(&mut r, n, std::f64::consts::PI);
            let qd = uniform(&mut r, n, 2.0);
            let qdd = uniform(&mut r, n, 2.0);
            let g = GravitySpec::default();
            let m = crba(&model, &q).unwrap();
            let c = coriolis_vector(&model, &q, &qd).unwrap();
            let gv = gravity_vector(&model, &q, &g).unwrap();
            let body = r.random_range(0..n);
            let point = Vector3::from_iterator(uniform(&mut r, 3, 1.0));
            let force = Vector3::from_iterator(uniform(&mut r, 3, 10.0));
            let mut ext = ExternalForces::zeros(n);
            ext.add_point_force(body, point, force);
            let jt_f = point_force_torque(&model, &q, body, point, force);

            let tau = rnea(&model, &q, &qd, &qdd, &g, Some(&ext)).unwrap();
            let mqdd = m.mul_vec(&qdd);
            let sum: Vec<f64> = (0..n).map(|i| mqdd[i] + c[i] + gv[i] - jt_f[i]).collect();
            assert!(rel_err(&tau, &sum) <= 1e-9, "{}", rel_err(&tau, &sum));

            let back = forward_dynamics(&model, &q, &qd, &tau, &g, Some(&ext)).unwrap();
            assert!(rel_err(&back, &qdd) <= 1e-8);
        }
    }
}

#[test]
fn kinetic_energy_identity() {
    let mut r = rng(4);
    for model in models() {
        let n = model.n_dof();
        for _ in 0..50 {
            let q = uniform(&mut r, n, std::f64::consts::PI);
            let qd = uniform(&mut r, n, 2.0);
            let frames = forward_kinematics(&model, &q).unwrap();
            let (_, ws) = rnea_with_workspace(
                &model,
                &frames,
                &qd,
                &vec![0.0; n],
                &GravitySpec::zero(),
                None,
            );
            let m = crba_from(&model, &frames);
            let v = DVector::from_vec(qd.clone());
            let joint_space = 0.5 * v.dot(&(&m.matrix * &v));
            let bodies = kinetic_energy(&ws);
            assert!(((joint_space - bodies) / bodies).abs() <= 1e-10);
        }
    }
}

#[test]
fn single_precision_tracks_double() {
    let model = builtin::chain7();
    let mut r = rng(5);
    let q = uniform(&mut r, 7, 2.0);
    let qd = uniform(&mut r, 7, 1.0);
    let qdd = uniform(&mut r, 7, 1.0);
    let g = GravitySpec::default();
    let hi = rnea(&model, &q, &qd, &qdd, &g, None).unwrap();
    let lo = rnea::<f32>(&model, &lift(&q), &lift(&qd), &lift(&qdd), &g, None).unwrap();
    let lo: Vec<f64> = lo.iter().map(|&x| x as f64).collect();
    assert!(rel_err(&lo, &hi) <= 1e-4);
    let mhi = crba(&model, &q).unwrap();
    let mlo = crba::<f32>(&model, &lift(&q)).unwrap();
    let mlo: Vec<f64> = mlo.matrix.iter().map(|&x| x as f64).collect();
    assert!(rel_err(&mlo, mhi.matrix.as_slice()) <= 1e-4);
}

#[test]
fn mass_matrix_is_positive_definite() {
    let mut r = rng(6);
    for model in models() {
        for _ in 0..20 {
            let q = uniform(&mut r, model.n_dof(), std::f64::consts::PI);
            let m = crba(&model, &q).unwrap();
            assert_eq!(m.matrix, m.matrix.transpose());
            assert!(m.cholesky().is_ok());
        }
    }
}
