//! Forward kinematics, frame queries, geometric Jacobians and manipulability.

use nalgebra::{DMatrix, Vector3};
use thiserror::Error;

use crate::linalg;
use crate::model::{Frame, Joint, Motion, RobotModel};
use crate::scalar::Real;
use crate::spatial::{rotation_about, SpatialMotion, SpatialTransform};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("expected {expected} joint positions, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("unknown frame `{0}`")]
    UnknownFrame(String),
    #[error("model `{0}` is not a serial chain")]
    NotSerialChain(String),
}

/// World transform `⁰T_i` of every moving joint frame.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameSet<T: Real> {
    pub transforms: Vec<SpatialTransform<T>>,
}

impl<T: Real> FrameSet<T> {
    pub fn len(&self) -> usize {
        self.transforms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transforms.is_empty()
    }

    /// World pose of a named frame.
    pub fn frame(&self, frame: &Frame) -> SpatialTransform<T> {
        let offset = frame.offset.lift();
        match frame.joint {
            Some(j) => self.transforms[j].compose(&offset),
            None => offset,
        }
    }
}

/// 6×n geometric Jacobian in root coordinates, rows `(angular, linear)`.
///
/// The linear rows give the velocity of the frame origin, so `J q̇` is the
/// frame twist `(ω, ṗ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jacobian<T: Real> {
    pub matrix: DMatrix<T>,
}

impl<T: Real> Jacobian<T> {
    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    /// `J q̇`.
    pub fn apply(&self, qd: &[T]) -> SpatialMotion<T> {
        let mut out = [T::zero(); 6];
        for (c, &v) in qd.iter().enumerate() {
            for (r, o) in out.iter_mut().enumerate() {
                *o += self.matrix[(r, c)] * v;
            }
        }
        SpatialMotion::from_slice(&out)
    }

    pub fn linear_rows(&self) -> DMatrix<T> {
        self.matrix.rows(3, 3).into_owned()
    }
}

fn check_len(model: &RobotModel, got: usize) -> Result<(), KinematicsError> {
    if got != model.n_dof() {
        return Err(KinematicsError::Dimension {
            expected: model.n_dof(),
            got,
        });
    }
    Ok(())
}

/// Local transform of a joint: fixed tree offset, then the joint motion.
#[inline]
pub fn joint_transform<T: Real>(joint: &Joint, q: T) -> SpatialTransform<T> {
    let offset = joint.tree_offset.lift::<T>();
    let axis = joint.axis.map(T::from_f64);
    match joint.motion {
        Motion::Revolute => SpatialTransform::from_parts(
            offset.rotation * rotation_about(&axis, q),
            offset.translation,
        ),
        Motion::Prismatic => SpatialTransform::from_parts(
            offset.rotation,
            offset.translation + offset.rotation * (axis * q),
        ),
    }
}

/// Motion subspace of a joint in its own frame.
#[inline]
pub fn local_axis<T: Real>(joint: &Joint) -> SpatialMotion<T> {
    let axis = joint.axis.map(T::from_f64);
    match joint.motion {
        Motion::Revolute => SpatialMotion::new(axis, Vector3::zeros()),
        Motion::Prismatic => SpatialMotion::new(Vector3::zeros(), axis),
    }
}

/// World-frame spatial axis `⁰S_i` from the joint's world pose.
#[inline]
pub fn world_axis<T: Real>(joint: &Joint, pose: &SpatialTransform<T>) -> SpatialMotion<T> {
    let axis = pose.rotation * joint.axis.map(T::from_f64);
    match joint.motion {
        Motion::Revolute => SpatialMotion::new(axis, pose.translation.cross(&axis)),
        Motion::Prismatic => SpatialMotion::new(Vector3::zeros(), axis),
    }
}

/// Forward kinematics in one topological pass.
pub fn forward_kinematics<T: Real>(
    model: &RobotModel,
    q: &[T],
) -> Result<FrameSet<T>, KinematicsError> {
    check_len(model, q.len())?;
    crate::calls::hit("fk");
    let mut transforms: Vec<SpatialTransform<T>> = Vec::with_capacity(q.len());
    for (joint, &qi) in model.joints().iter().zip(q) {
        let local = joint_transform(joint, qi);
        let world = match joint.parent {
            Some(p) => transforms[p].compose(&local),
            None => local,
        };
        transforms.push(world);
    }
    Ok(FrameSet { transforms })
}

/// Forward kinematics for serial chains as an inclusive associative scan
/// (Hillis–Steele) over transform composition: `⌈log₂ n⌉` rounds whose
/// compositions are independent of each other within a round.
pub fn forward_kinematics_scan<T: Real>(
    model: &RobotModel,
    q: &[T],
) -> Result<FrameSet<T>, KinematicsError> {
    check_len(model, q.len())?;
    if !model.is_serial_chain() {
        return Err(KinematicsError::NotSerialChain(model.name.clone()));
    }
    let mut prefix: Vec<SpatialTransform<T>> = model
        .joints()
        .iter()
        .zip(q)
        .map(|(joint, &qi)| joint_transform(joint, qi))
        .collect();
    let n = prefix.len();
    let mut stride = 1;
    while stride < n {
        // Descending so each read of `prefix[i − stride]` sees the previous round.
        for i in (stride..n).rev() {
            prefix[i] = prefix[i - stride].compose(&prefix[i]);
        }
        stride *= 2;
    }
    Ok(FrameSet { transforms: prefix })
}

fn lookup<'m>(model: &'m RobotModel, name: &str) -> Result<&'m Frame, KinematicsError> {
    model
        .frame(name)
        .ok_or_else(|| KinematicsError::UnknownFrame(name.to_string()))
}

/// World pose of a named frame.
pub fn frame_transform<T: Real>(
    model: &RobotModel,
    q: &[T],
    frame_name: &str,
) -> Result<SpatialTransform<T>, KinematicsError> {
    let frame = lookup(model, frame_name)?;
    Ok(forward_kinematics(model, q)?.frame(frame))
}

/// Geometric Jacobian of a named frame.
pub fn geometric_jacobian<T: Real>(
    model: &RobotModel,
    q: &[T],
    frame_name: &str,
) -> Result<Jacobian<T>, KinematicsError> {
    let frames = forward_kinematics(model, q)?;
    geometric_jacobian_from(model, &frames, frame_name)
}

/// Geometric Jacobian from precomputed forward kinematics.
pub fn geometric_jacobian_from<T: Real>(
    model: &RobotModel,
    frames: &FrameSet<T>,
    frame_name: &str,
) -> Result<Jacobian<T>, KinematicsError> {
    let frame = lookup(model, frame_name)?;
    crate::calls::hit("jacobian");
    let point = frames.frame(frame).translation;
    let mut matrix = DMatrix::zeros(6, model.n_dof());
    if let Some(target) = frame.joint {
        for j in model.ancestor_mask().ancestors(target) {
            let s = world_axis(&model.joints()[j], &frames.transforms[j]);
            // Shift the reference point from the world origin to the frame.
            let linear = s.linear + s.angular.cross(&point);
            for r in 0..3 {
                matrix[(r, j)] = s.angular[r];
                matrix[(r + 3, j)] = linear[r];
            }
        }
    }
    Ok(Jacobian { matrix })
}

/// Yoshikawa manipulability `sqrt(det(J Jᵀ))`; zero at singularities.
pub fn manipulability<T: Real>(j: &DMatrix<T>) -> T {
    let jjt = j * j.transpose();
    let det = linalg::determinant(&jjt).expect("J Jᵀ is square");
    if det.value() <= 0.0 {
        T::zero()
    } else {
        det.sqrt()
    }
}
