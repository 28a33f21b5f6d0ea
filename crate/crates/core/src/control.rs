//! Task-space controllers: damped least-squares differential IK and
//! operational space control, plus Lie derivatives by forward mode.
//!
//! Task vectors are 6-D and angular-first, matching the Jacobian rows. The
//! pose error of a frame with current pose `(R_c, p_c)` toward `(R_d, p_d)`
//! is `(log(R_d R_cᵀ), p_d − p_c)`.

use nalgebra::{DMatrix, Vector6};
use thiserror::Error;

use crate::autodiff::{jvp_scalar, AutodiffError, Dual};
use crate::dynamics::{coriolis_from, crba_from, gravity_from, DynamicsError, GravitySpec};
use crate::kinematics::{forward_kinematics, geometric_jacobian_from, KinematicsError};
use crate::linalg::{Cholesky, LinalgError};
use crate::model::RobotModel;
use crate::spatial::{rotation_log, SpatialMotion, SpatialTransform};

/// Regularizer added to `J M⁻¹ Jᵀ` before inverting it for the task inertia.
pub const TASK_INERTIA_REGULARIZER: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("damping must be positive and finite, got {0}")]
    InvalidDamping(f64),
    #[error("{0} gains must be nonnegative and finite")]
    InvalidGains(&'static str),
    #[error("{what} has length {got}, expected {expected}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("factorization failed: {0}")]
    Factorization(#[from] LinalgError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
}

/// Desired pose of a named frame with feedforward terms and per-axis gains.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskTarget {
    pub frame: String,
    pub pose: SpatialTransform<f64>,
    /// Desired frame twist (world-aligned, about the frame origin).
    pub twist_ff: SpatialMotion<f64>,
    /// Desired frame acceleration, used by OSC only.
    pub accel_ff: SpatialMotion<f64>,
    pub kp: [f64; 6],
    pub kd: [f64; 6],
}

impl TaskTarget {
    pub fn new(frame: impl Into<String>, pose: SpatialTransform<f64>) -> Self {
        Self {
            frame: frame.into(),
            pose,
            twist_ff: SpatialMotion::zeros(),
            accel_ff: SpatialMotion::zeros(),
            kp: [1.0; 6],
            kd: [0.0; 6],
        }
    }

    pub fn with_gains(mut self, kp: [f64; 6], kd: [f64; 6]) -> Result<Self, ControlError> {
        let ok = |g: &[f64; 6]| g.iter().all(|v| v.is_finite() && *v >= 0.0);
        if !ok(&kp) {
            return Err(ControlError::InvalidGains("kp"));
        }
        if !ok(&kd) {
            return Err(ControlError::InvalidGains("kd"));
        }
        self.kp = kp;
        self.kd = kd;
        Ok(self)
    }

    pub fn with_twist_ff(mut self, twist: SpatialMotion<f64>) -> Self {
        self.twist_ff = twist;
        self
    }

    pub fn with_accel_ff(mut self, accel: SpatialMotion<f64>) -> Self {
        self.accel_ff = accel;
        self
    }
}

/// Joint-space PD toward a posture, projected into the task null space by OSC.
#[derive(Clone, Debug, PartialEq)]
pub struct PostureGains {
    pub kp: Vec<f64>,
    pub kd: Vec<f64>,
}

impl PostureGains {
    pub fn uniform(n: usize, kp: f64, kd: f64) -> Self {
        Self {
            kp: vec![kp; n],
            kd: vec![kd; n],
        }
    }
}

/// `(log(R_d R_cᵀ), p_d − p_c)`.
pub fn pose_error(
    current: &SpatialTransform<f64>,
    desired: &SpatialTransform<f64>,
) -> Vector6<f64> {
    let w = rotation_log(&(desired.rotation * current.rotation.transpose()));
    let v = desired.translation - current.translation;
    Vector6::new(w.x, w.y, w.z, v.x, v.y, v.z)
}

fn check(what: &'static str, expected: usize, got: usize) -> Result<(), ControlError> {
    if expected != got {
        return Err(ControlError::Dimension {
            what,
            expected,
            got,
        });
    }
    Ok(())
}

/// Damped least squares: `q̇ = Jᵀ (J Jᵀ + λ² 1)⁻¹ (kp ⊙ e + twist_ff)`.
pub fn diff_ik_step(
    model: &RobotModel,
    q: &[f64],
    target: &TaskTarget,
    damping: f64,
) -> Result<Vec<f64>, ControlError> {
    if !(damping > 0.0 && damping.is_finite()) {
        return Err(ControlError::InvalidDamping(damping));
    }
    let frames = forward_kinematics(model, q)?;
    let jac = geometric_jacobian_from(model, &frames, &target.frame)?.matrix;
    let frame = model
        .frame(&target.frame)
        .expect("frame resolved by the Jacobian");
    let err = pose_error(&frames.frame(frame), &target.pose);
    let ff = target.twist_ff.to_vector6();
    let rhs: Vec<f64> = (0..6).map(|k| target.kp[k] * err[k] + ff[k]).collect();

    let mut gram = &jac * jac.transpose();
    for k in 0..6 {
        gram[(k, k)] += damping * damping;
    }
    let y = Cholesky::factor(&gram)?.solve(&rhs)?;
    Ok((0..model.n_dof())
        .map(|j| (0..6).map(|k| jac[(k, j)] * y[k]).sum())
        .collect())
}

fn transpose_times(a: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|k| a[(k, j)] * x[k]).sum())
        .collect()
}

/// Operational space control with a dynamically consistent null-space posture task.
///
/// ```text
/// Λ   = (J M⁻¹ Jᵀ + ε 1)⁻¹
/// F   = Λ (kp ⊙ e + kd ⊙ (twist_ff − J q̇) + accel_ff)
/// J̄   = M⁻¹ Jᵀ Λ₀,   Λ₀ = (J M⁻¹ Jᵀ)⁻¹
/// τ   = Jᵀ F + (1 − Jᵀ J̄ᵀ) τ_posture + c + g
/// ```
///
/// The projector uses the unregularized `Λ₀` so the posture torque produces
/// no task acceleration; if `J M⁻¹ Jᵀ` is singular it falls back to `Λ`.
#[allow(clippy::too_many_arguments)]
pub fn osc_step(
    model: &RobotModel,
    q: &[f64],
    qd: &[f64],
    target: &TaskTarget,
    posture: &[f64],
    posture_gains: &PostureGains,
    gravity: &GravitySpec,
) -> Result<Vec<f64>, ControlError> {
    let n = model.n_dof();
    check("qd", n, qd.len())?;
    check("posture", n, posture.len())?;
    check("posture kp", n, posture_gains.kp.len())?;
    check("posture kd", n, posture_gains.kd.len())?;

    let frames = forward_kinematics(model, q)?;
    let jac = geometric_jacobian_from(model, &frames, &target.frame)?.matrix;
    let mass = crba_from(model, &frames);
    let coriolis = coriolis_from(model, &frames, qd);
    let grav = gravity_from(model, &frames, gravity);
    let frame = model
        .frame(&target.frame)
        .expect("frame resolved by the Jacobian");

    // M⁻¹ Jᵀ, then J M⁻¹ Jᵀ.
    let chol = mass.cholesky()?;
    let minv_jt = chol.solve_matrix(&jac.transpose())?;
    let task_mobility = &jac * &minv_jt;
    let mut regularized = task_mobility.clone();
    for k in 0..6 {
        regularized[(k, k)] += TASK_INERTIA_REGULARIZER;
    }
    let regularized = Cholesky::factor(&regularized)?;

    let err = pose_error(&frames.frame(frame), &target.pose);
    let twist = &jac * nalgebra::DVector::from_column_slice(qd);
    let ff = target.twist_ff.to_vector6();
    let acc = target.accel_ff.to_vector6();
    let desired: Vec<f64> = (0..6)
        .map(|k| target.kp[k] * err[k] + target.kd[k] * (ff[k] - twist[k]) + acc[k])
        .collect();
    let force = regularized.solve(&desired)?;

    let tau_posture: Vec<f64> = (0..n)
        .map(|i| posture_gains.kp[i] * (posture[i] - q[i]) - posture_gains.kd[i] * qd[i])
        .collect();
    // J̄ᵀ τ = Λ₀ (M⁻¹ Jᵀ)ᵀ τ
    let projected = transpose_times(&minv_jt, &tau_posture);
    let task_part = match Cholesky::factor(&task_mobility) {
        Ok(exact) => exact.solve(&projected)?,
        Err(_) => regularized.solve(&projected)?,
    };

    let jt_force = transpose_times(&jac, &force);
    let jt_task = transpose_times(&jac, &task_part);
    Ok((0..n)
        .map(|i| jt_force[i] + tau_posture[i] - jt_task[i] + coriolis[i] + grav[i])
        .collect())
}

/// `L_f h(z) = ∇h(z) · f(z)`, as one forward-mode pass of `h` along `f(z)`.
pub fn lie_derivative<H, F>(h: H, f: F, z: &[f64]) -> Result<f64, ControlError>
where
    H: Fn(&[Dual]) -> Dual,
    F: Fn(&[f64]) -> Vec<f64>,
{
    let direction = f(z);
    check("vector field", z.len(), direction.len())?;
    Ok(jvp_scalar(h, z, &direction)?.1)
}
