//! Inverse dynamics (RNEA) and the joint-space mass matrix (CRBA).
//!
//! The vectorized routines express every per-joint quantity in the root
//! frame and replace the tree recursions by products with the ancestor mask
//! `U`: velocities and accelerations are `U·(…)` (root-to-leaf sums), body
//! forces and composite inertias are `Uᵀ·(…)` (leaf-to-root sums). After
//! forward kinematics there is no sequential dependency between joints.
//!
//! `rnea_loop` and `crba_loop` are the classic recursive formulations in
//! local joint frames and serve as equivalence references.
//!
//! Gravity enters as a uniform base acceleration `a_g = −g_field`, so the
//! default [`GravitySpec`] is `(0, 0, 0, 0, 0, +9.81)` for gravity along −z.

use nalgebra::{DMatrix, Vector3};
use thiserror::Error;

use crate::kinematics::{
    forward_kinematics, joint_transform, local_axis, world_axis, FrameSet, KinematicsError,
};
use crate::linalg::{Cholesky, LinalgError};
use crate::model::RobotModel;
use crate::scalar::Real;
use crate::spatial::{SpatialForce, SpatialInertia, SpatialMotion, SpatialTransform};

pub const STANDARD_GRAVITY: f64 = 9.81;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("{what} has length {got}, model has {expected} DOFs")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("mass matrix is not positive definite: {0}")]
    SingularInertia(LinalgError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

/// Spatial acceleration standing in for gravity (`a_g = −g_field`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GravitySpec {
    pub accel: SpatialMotion<f64>,
}

impl Default for GravitySpec {
    fn default() -> Self {
        Self::from_field(Vector3::new(0.0, 0.0, -STANDARD_GRAVITY))
    }
}

impl GravitySpec {
    /// From the gravitational field vector, e.g. `(0, 0, −9.81)`.
    pub fn from_field(g: Vector3<f64>) -> Self {
        Self {
            accel: SpatialMotion::new(Vector3::zeros(), -g),
        }
    }

    pub fn zero() -> Self {
        Self {
            accel: SpatialMotion::zeros(),
        }
    }
}

/// Per-joint external forces `⁰F_ext,i`, in root coordinates about the root origin.
#[derive(Clone, Debug, PartialEq)]
pub struct ExternalForces<T: Real> {
    pub forces: Vec<SpatialForce<T>>,
}

impl<T: Real> ExternalForces<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            forces: vec![SpatialForce::zeros(); n],
        }
    }

    /// Adds a pure force acting on joint `joint`'s body through world point `point`.
    pub fn add_point_force(&mut self, joint: usize, point: Vector3<T>, force: Vector3<T>) {
        self.forces[joint] += SpatialForce::at_point(&point, force);
    }
}

/// Joint-space inertia matrix `M(q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MassMatrix<T: Real> {
    pub matrix: DMatrix<T>,
}

impl<T: Real> MassMatrix<T> {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.dim())
            .map(|r| (0..self.dim()).map(|c| self.matrix[(r, c)] * x[c]).sum())
            .collect()
    }

    pub fn cholesky(&self) -> Result<Cholesky<T>, DynamicsError> {
        Cholesky::factor(&self.matrix).map_err(DynamicsError::SingularInertia)
    }
}

/// Root-frame arrays of one dynamics evaluation, all of length `n`.
///
/// Inertias are kept in compact rigid-body form; each entry is the 6×6
/// matrix returned by [`SpatialInertia::to_matrix6`].
#[derive(Clone, Debug, PartialEq)]
pub struct DynamicsWorkspace<T: Real> {
    /// `⁰S`: spatial axes.
    pub axes: Vec<SpatialMotion<T>>,
    /// `⁰I`: body inertias.
    pub inertias: Vec<SpatialInertia<T>>,
    /// `⁰V`: body velocities.
    pub velocities: Vec<SpatialMotion<T>>,
    /// `⁰A`: body accelerations (including the gravity offset).
    pub accelerations: Vec<SpatialMotion<T>>,
    /// `⁰F`: joint forces transmitted from parent to child.
    pub forces: Vec<SpatialForce<T>>,
}

fn check(model: &RobotModel, what: &'static str, got: usize) -> Result<(), DynamicsError> {
    if got != model.n_dof() {
        return Err(DynamicsError::Dimension {
            what,
            expected: model.n_dof(),
            got,
        });
    }
    Ok(())
}

fn check_external<T: Real>(
    model: &RobotModel,
    f_ext: Option<&ExternalForces<T>>,
) -> Result<(), DynamicsError> {
    match f_ext {
        Some(f) => check(model, "external forces", f.forces.len()),
        None => Ok(()),
    }
}

/// `⁰S_i` and `⁰I_i` for every joint.
pub fn prepare_world_arrays<T: Real>(
    model: &RobotModel,
    frames: &FrameSet<T>,
) -> (Vec<SpatialMotion<T>>, Vec<SpatialInertia<T>>) {
    model
        .joints()
        .iter()
        .zip(model.inertias())
        .zip(&frames.transforms)
        .map(|((joint, inertia), pose)| {
            let world = if inertia.is_zero() {
                SpatialInertia::zeros()
            } else {
                pose.transform_inertia(&inertia.lift::<T>())
            };
            (world_axis(joint, pose), world)
        })
        .unzip()
}

/// Vectorized RNEA: `Γ = M q̈ + c + g − Σ Jᵢᵀ ⁰F_ext,i`.
pub fn rnea<T: Real>(
    model: &RobotModel,
    q: &[T],
    qd: &[T],
    qdd: &[T],
    gravity: &GravitySpec,
    f_ext: Option<&ExternalForces<T>>,
) -> Result<Vec<T>, DynamicsError> {
    check(model, "qd", qd.len())?;
    check(model, "qdd", qdd.len())?;
    check_external(model, f_ext)?;
    let frames = forward_kinematics(model, q)?;
    Ok(rnea_with_workspace(model, &frames, qd, qdd, gravity, f_ext).0)
}

/// Vectorized RNEA from precomputed kinematics; also returns the root-frame arrays.
///
/// Lengths are assumed checked by the caller.
pub fn rnea_with_workspace<T: Real>(
    model: &RobotModel,
    frames: &FrameSet<T>,
    qd: &[T],
    qdd: &[T],
    gravity: &GravitySpec,
    f_ext: Option<&ExternalForces<T>>,
) -> (Vec<T>, DynamicsWorkspace<T>) {
    let mask = model.ancestor_mask();
    let (axes, inertias) = prepare_world_arrays(model, frames);

    // ⁰V = U (⁰S_i q̇_i)
    let joint_vel: Vec<SpatialMotion<T>> = axes.iter().zip(qd).map(|(s, &v)| s.scale(v)).collect();
    let velocities = mask.mul(&joint_vel);

    // ⁰A = a_g + U (⁰S_i q̈_i + ⁰V_i × ⁰S_i q̇_i)
    let joint_acc: Vec<SpatialMotion<T>> = axes
        .iter()
        .zip(qdd)
        .zip(velocities.iter().zip(&joint_vel))
        .map(|((s, &a), (v, vj))| s.scale(a) + v.cross_motion(vj))
        .collect();
    let a_g = SpatialMotion::new(
        gravity.accel.angular.map(T::from_f64),
        gravity.accel.linear.map(T::from_f64),
    );
    let accelerations: Vec<SpatialMotion<T>> =
        mask.mul(&joint_acc).into_iter().map(|a| a + a_g).collect();

    // ⁰F = Uᵀ (⁰I_i ⁰A_i + ⁰V_i ×* ⁰I_i ⁰V_i − ⁰F_ext,i)
    let mut body_forces: Vec<SpatialForce<T>> = inertias
        .iter()
        .zip(&accelerations)
        .zip(&velocities)
        .map(|((inertia, a), v)| inertia.apply(a) + v.cross_force(&inertia.apply(v)))
        .collect();
    if let Some(ext) = f_ext {
        for (f, e) in body_forces.iter_mut().zip(&ext.forces) {
            *f -= *e;
        }
    }
    let forces = mask.mul_transpose(&body_forces);

    // Γ = (⁰S_i · ⁰F_i)
    let tau = axes.iter().zip(&forces).map(|(s, f)| s.dot(f)).collect();
    (
        tau,
        DynamicsWorkspace {
            axes,
            inertias,
            velocities,
            accelerations,
            forces,
        },
    )
}

/// Recursive Newton–Euler in local joint frames: O(n) forward/backward passes.
pub fn rnea_loop<T: Real>(
    model: &RobotModel,
    q: &[T],
    qd: &[T],
    qdd: &[T],
    gravity: &GravitySpec,
    f_ext: Option<&ExternalForces<T>>,
) -> Result<Vec<T>, DynamicsError> {
    let n = model.n_dof();
    check(model, "q", q.len())?;
    check(model, "qd", qd.len())?;
    check(model, "qdd", qdd.len())?;
    check_external(model, f_ext)?;
    let joints = model.joints();
    let a_g = SpatialMotion::new(
        gravity.accel.angular.map(T::from_f64),
        gravity.accel.linear.map(T::from_f64),
    );

    let mut xs: Vec<SpatialTransform<T>> = Vec::with_capacity(n);
    let mut world: Vec<SpatialTransform<T>> = Vec::new();
    let mut v: Vec<SpatialMotion<T>> = Vec::with_capacity(n);
    let mut a: Vec<SpatialMotion<T>> = Vec::with_capacity(n);
    let mut f: Vec<SpatialForce<T>> = Vec::with_capacity(n);
    for i in 0..n {
        let joint = &joints[i];
        let x = joint_transform(joint, q[i]);
        let s = local_axis::<T>(joint);
        let vj = s.scale(qd[i]);
        let (v_parent, a_parent) = match joint.parent {
            Some(p) => (v[p], a[p]),
            None => (SpatialMotion::zeros(), a_g),
        };
        let vi = x.inverse_transform_motion(&v_parent) + vj;
        let ai = x.inverse_transform_motion(&a_parent) + s.scale(qdd[i]) + vi.cross_motion(&vj);
        let inertia = model.inertias()[i].lift::<T>();
        let mut fi = inertia.apply(&ai) + vi.cross_force(&inertia.apply(&vi));
        if let Some(ext) = f_ext {
            let pose = match joint.parent {
                Some(p) => world[p].compose(&x),
                None => x,
            };
            fi -= pose.inverse_transform_force(&ext.forces[i]);
            world.push(pose);
        }
        xs.push(x);
        v.push(vi);
        a.push(ai);
        f.push(fi);
    }

    let mut tau = vec![T::zero(); n];
    for i in (0..n).rev() {
        tau[i] = local_axis::<T>(&joints[i]).dot(&f[i]);
        if let Some(p) = joints[i].parent {
            let up = xs[i].transform_force(&f[i]);
            f[p] += up;
        }
    }
    Ok(tau)
}

/// `M = L + Lᵀ − diag(L)` for a lower-triangular `L`.
pub fn symmetrize_lower<T: Real>(lower: &DMatrix<T>) -> DMatrix<T> {
    let n = lower.nrows();
    let mut m = lower.clone();
    for i in 0..n {
        for j in 0..i {
            m[(j, i)] = lower[(i, j)];
        }
    }
    m
}

/// Vectorized CRBA.
pub fn crba<T: Real>(model: &RobotModel, q: &[T]) -> Result<MassMatrix<T>, DynamicsError> {
    let frames = forward_kinematics(model, q)?;
    Ok(crba_from(model, &frames))
}

/// Vectorized CRBA from precomputed kinematics.
pub fn crba_from<T: Real>(model: &RobotModel, frames: &FrameSet<T>) -> MassMatrix<T> {
    crate::calls::hit("mass");
    let n = model.n_dof();
    let mask = model.ancestor_mask();
    let (axes, mut composites) = prepare_world_arrays(model, frames);

    // ⁰C = Uᵀ ⁰I
    mask.mul_transpose_in_place(&mut composites);

    // M = U ⊙ (⁰S_iᵀ ⁰C_i ⁰S_j), mirrored into the upper triangle.
    let mut m = vec![T::zero(); n * n];
    for i in 0..n {
        let momentum = composites[i].apply(&axes[i]);
        for &j in mask.row(i) {
            let mij = axes[j].dot(&momentum);
            m[j * n + i] = mij;
            m[i * n + j] = mij;
        }
    }
    MassMatrix {
        matrix: DMatrix::from_vec(n, n, m),
    }
}

/// Composite inertias `⁰C = Uᵀ ⁰I` in root coordinates.
pub fn composite_inertias<T: Real>(
    model: &RobotModel,
    frames: &FrameSet<T>,
) -> Vec<SpatialInertia<T>> {
    let (_, inertias) = prepare_world_arrays(model, frames);
    model.ancestor_mask().mul_transpose(&inertias)
}

/// Classic CRBA: child-to-parent composite accumulation in local frames,
/// then an O(d) walk to the root per joint for the off-diagonal entries.
pub fn crba_loop<T: Real>(model: &RobotModel, q: &[T]) -> Result<MassMatrix<T>, DynamicsError> {
    let n = model.n_dof();
    check(model, "q", q.len())?;
    let joints = model.joints();
    let xs: Vec<SpatialTransform<T>> = joints
        .iter()
        .zip(q)
        .map(|(j, &qi)| joint_transform(j, qi))
        .collect();
    let mut composite: Vec<SpatialInertia<T>> =
        model.inertias().iter().map(|i| i.lift::<T>()).collect();
    for i in (0..n).rev() {
        if let Some(p) = joints[i].parent {
            let up = xs[i].transform_inertia(&composite[i]);
            composite[p] += up;
        }
    }

    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut f = composite[i].apply(&local_axis::<T>(&joints[i]));
        m[(i, i)] = local_axis::<T>(&joints[i]).dot(&f);
        let mut j = i;
        while let Some(p) = joints[j].parent {
            f = xs[j].transform_force(&f);
            let mij = local_axis::<T>(&joints[p]).dot(&f);
            m[(i, p)] = mij;
            m[(p, i)] = mij;
            j = p;
        }
    }
    Ok(MassMatrix { matrix: m })
}

/// `g(q)`: torques that hold the robot still against gravity.
pub fn gravity_vector<T: Real>(
    model: &RobotModel,
    q: &[T],
    gravity: &GravitySpec,
) -> Result<Vec<T>, DynamicsError> {
    let frames = forward_kinematics(model, q)?;
    Ok(gravity_from(model, &frames, gravity))
}

pub fn gravity_from<T: Real>(
    model: &RobotModel,
    frames: &FrameSet<T>,
    gravity: &GravitySpec,
) -> Vec<T> {
    crate::calls::hit("gravity");
    let zero = vec![T::zero(); model.n_dof()];
    rnea_with_workspace(model, frames, &zero, &zero, gravity, None).0
}

/// `c(q, q̇)`: Coriolis and centrifugal torques.
pub fn coriolis_vector<T: Real>(
    model: &RobotModel,
    q: &[T],
    qd: &[T],
) -> Result<Vec<T>, DynamicsError> {
    check(model, "qd", qd.len())?;
    let frames = forward_kinematics(model, q)?;
    Ok(coriolis_from(model, &frames, qd))
}

pub fn coriolis_from<T: Real>(model: &RobotModel, frames: &FrameSet<T>, qd: &[T]) -> Vec<T> {
    crate::calls::hit("coriolis");
    let zero = vec![T::zero(); model.n_dof()];
    rnea_with_workspace(model, frames, qd, &zero, &GravitySpec::zero(), None).0
}

/// `q̈ = M⁻¹ (τ − c − g + Σ Jᵢᵀ ⁰F_ext,i)` via a Cholesky solve.
pub fn forward_dynamics<T: Real>(
    model: &RobotModel,
    q: &[T],
    qd: &[T],
    tau: &[T],
    gravity: &GravitySpec,
    f_ext: Option<&ExternalForces<T>>,
) -> Result<Vec<T>, DynamicsError> {
    check(model, "qd", qd.len())?;
    check(model, "tau", tau.len())?;
    check_external(model, f_ext)?;
    let frames = forward_kinematics(model, q)?;
    let zero = vec![T::zero(); model.n_dof()];
    let (bias, _) = rnea_with_workspace(model, &frames, qd, &zero, gravity, f_ext);
    let mass = crba_from(model, &frames);
    let rhs: Vec<T> = tau.iter().zip(&bias).map(|(&t, &b)| t - b).collect();
    Ok(mass
        .cholesky()?
        .solve(&rhs)
        .expect("right-hand side has n rows"))
}

/// Kinetic energy `Σ ½ ⁰Vᵢᵀ ⁰Iᵢ ⁰Vᵢ` of a workspace.
pub fn kinetic_energy<T: Real>(ws: &DynamicsWorkspace<T>) -> T {
    ws.inertias
        .iter()
        .zip(&ws.velocities)
        .map(|(i, v)| i.kinetic_energy(v))
        .sum()
}
