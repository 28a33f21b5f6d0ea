//! Spatial (6-D) algebra in Plücker coordinates.
//!
//! Components are ordered angular-first everywhere: a motion vector is
//! `(ω, v)` and a force vector is `(n, f)`. Transforms are stored as a
//! rotation/translation pair and applied with closed-form 3-D operations;
//! dense 6×6 operators are only materialized on request (tests, debugging).

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};
use thiserror::Error;

use crate::scalar::Real;

/// Tolerance for `RᵀR = 1` and `det R = 1` at construction time.
pub const ROTATION_TOLERANCE: f64 = 1e-9;

/// Relative asymmetry accepted in a rotational inertia before it is rejected.
pub const INERTIA_SYMMETRY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpatialError {
    #[error("rotation is not orthonormal (‖RᵀR − 1‖ = {deviation:e})")]
    NonOrthonormal { deviation: f64 },
    #[error("rotation has determinant {det}, expected +1")]
    Improper { det: f64 },
    #[error("negative mass {0}")]
    NegativeMass(f64),
    #[error("rotational inertia is not symmetric (relative asymmetry {0:e})")]
    AsymmetricInertia(f64),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
}

/// 3×3 skew-symmetric matrix with `skew(a) b = a × b`.
#[inline]
pub fn skew<T: Real>(a: &Vector3<T>) -> Matrix3<T> {
    let z = T::zero();
    Matrix3::new(z, -a.z, a.y, a.z, z, -a.x, -a.y, a.x, z)
}

/// Motion vector: velocity, acceleration or joint axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialMotion<T: Real> {
    pub angular: Vector3<T>,
    pub linear: Vector3<T>,
}

/// Force vector: moment first, then force.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialForce<T: Real> {
    pub moment: Vector3<T>,
    pub force: Vector3<T>,
}

impl<T: Real> SpatialMotion<T> {
    #[inline]
    pub fn new(angular: Vector3<T>, linear: Vector3<T>) -> Self {
        Self { angular, linear }
    }

    #[inline]
    pub fn zeros() -> Self {
        Self::new(Vector3::zeros(), Vector3::zeros())
    }

    pub fn from_slice(s: &[T]) -> Self {
        assert_eq!(s.len(), 6, "spatial vectors have 6 components");
        Self::new(
            Vector3::new(s[0], s[1], s[2]),
            Vector3::new(s[3], s[4], s[5]),
        )
    }

    #[inline]
    pub fn to_array(&self) -> [T; 6] {
        let (a, l) = (&self.angular, &self.linear);
        [a.x, a.y, a.z, l.x, l.y, l.z]
    }

    pub fn to_vector6(&self) -> Vector6<T> {
        Vector6::from_row_slice(&self.to_array())
    }

    /// Motion cross product `self ×m m`.
    #[inline]
    pub fn cross_motion(&self, m: &SpatialMotion<T>) -> SpatialMotion<T> {
        SpatialMotion::new(
            self.angular.cross(&m.angular),
            self.angular.cross(&m.linear) + self.linear.cross(&m.angular),
        )
    }

    /// Force cross product `self ×f f = −(self ×m)ᵀ f`.
    #[inline]
    pub fn cross_force(&self, f: &SpatialForce<T>) -> SpatialForce<T> {
        SpatialForce::new(
            self.angular.cross(&f.moment) + self.linear.cross(&f.force),
            self.angular.cross(&f.force),
        )
    }

    /// Power pairing `⟨f, m⟩`.
    #[inline]
    pub fn dot(&self, f: &SpatialForce<T>) -> T {
        self.angular.dot(&f.moment) + self.linear.dot(&f.force)
    }

    #[inline]
    pub fn scale(&self, s: T) -> Self {
        Self::new(self.angular * s, self.linear * s)
    }
}

impl<T: Real> SpatialForce<T> {
    #[inline]
    pub fn new(moment: Vector3<T>, force: Vector3<T>) -> Self {
        Self { moment, force }
    }

    #[inline]
    pub fn zeros() -> Self {
        Self::new(Vector3::zeros(), Vector3::zeros())
    }

    pub fn from_slice(s: &[T]) -> Self {
        assert_eq!(s.len(), 6, "spatial vectors have 6 components");
        Self::new(
            Vector3::new(s[0], s[1], s[2]),
            Vector3::new(s[3], s[4], s[5]),
        )
    }

    /// Pure force `f` acting through `point`, referred to the origin.
    pub fn at_point(point: &Vector3<T>, force: Vector3<T>) -> Self {
        Self::new(point.cross(&force), force)
    }

    #[inline]
    pub fn to_array(&self) -> [T; 6] {
        let (n, f) = (&self.moment, &self.force);
        [n.x, n.y, n.z, f.x, f.y, f.z]
    }

    pub fn to_vector6(&self) -> Vector6<T> {
        Vector6::from_row_slice(&self.to_array())
    }

    #[inline]
    pub fn dot(&self, m: &SpatialMotion<T>) -> T {
        m.dot(self)
    }
}

macro_rules! impl_vector_ops {
    ($ty:ident, $a:ident, $b:ident) => {
        impl<T: Real> Add for $ty<T> {
            type Output = Self;
            #[inline]
            fn add(self, rhs: Self) -> Self {
                Self::new(self.$a + rhs.$a, self.$b + rhs.$b)
            }
        }
        impl<T: Real> Sub for $ty<T> {
            type Output = Self;
            #[inline]
            fn sub(self, rhs: Self) -> Self {
                Self::new(self.$a - rhs.$a, self.$b - rhs.$b)
            }
        }
        impl<T: Real> Neg for $ty<T> {
            type Output = Self;
            #[inline]
            fn neg(self) -> Self {
                Self::new(-self.$a, -self.$b)
            }
        }
        impl<T: Real> AddAssign for $ty<T> {
            #[inline]
            fn add_assign(&mut self, rhs: Self) {
                self.$a += rhs.$a;
                self.$b += rhs.$b;
            }
        }
        impl<T: Real> SubAssign for $ty<T> {
            #[inline]
            fn sub_assign(&mut self, rhs: Self) {
                self.$a -= rhs.$a;
                self.$b -= rhs.$b;
            }
        }
    };
}

impl_vector_ops!(SpatialMotion, angular, linear);
impl_vector_ops!(SpatialForce, moment, force);

/// Rigid transform `(R, p)`: pose of a child frame expressed in its parent.
///
/// Applying it maps child coordinates to parent coordinates. Motion vectors
/// are referred to the frame origin, so a pure rotation about the child
/// origin picks up `p × ω` in the parent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialTransform<T: Real> {
    pub rotation: Matrix3<T>,
    pub translation: Vector3<T>,
}

impl<T: Real> SpatialTransform<T> {
    /// Unchecked constructor for the hot path.
    #[inline]
    pub fn from_parts(rotation: Matrix3<T>, translation: Vector3<T>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    #[inline]
    pub fn identity() -> Self {
        Self::from_parts(Matrix3::identity(), Vector3::zeros())
    }

    #[inline]
    pub fn from_translation(p: Vector3<T>) -> Self {
        Self::from_parts(Matrix3::identity(), p)
    }

    #[inline]
    pub fn from_rotation(r: Matrix3<T>) -> Self {
        Self::from_parts(r, Vector3::zeros())
    }

    /// Rotation by `angle` about the unit vector `axis` (Rodrigues).
    #[inline]
    pub fn from_axis_angle(axis: &Vector3<T>, angle: T) -> Self {
        Self::from_rotation(rotation_about(axis, angle))
    }

    /// `self ∘ rhs`: apply `rhs` first, then `self`.
    #[inline]
    pub fn compose(&self, rhs: &Self) -> Self {
        Self::from_parts(
            self.rotation * rhs.rotation,
            self.translation + self.rotation * rhs.translation,
        )
    }

    #[inline]
    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self::from_parts(rt, -(rt * self.translation))
    }

    #[inline]
    pub fn transform_point(&self, x: &Vector3<T>) -> Vector3<T> {
        self.rotation * x + self.translation
    }

    #[inline]
    pub fn transform_motion(&self, m: &SpatialMotion<T>) -> SpatialMotion<T> {
        let w = self.rotation * m.angular;
        SpatialMotion::new(w, self.rotation * m.linear + self.translation.cross(&w))
    }

    /// Inverse of [`transform_motion`](Self::transform_motion) without forming the inverse.
    #[inline]
    pub fn inverse_transform_motion(&self, m: &SpatialMotion<T>) -> SpatialMotion<T> {
        let rt = self.rotation.transpose();
        SpatialMotion::new(
            rt * m.angular,
            rt * (m.linear - self.translation.cross(&m.angular)),
        )
    }

    #[inline]
    pub fn transform_force(&self, f: &SpatialForce<T>) -> SpatialForce<T> {
        let force = self.rotation * f.force;
        SpatialForce::new(
            self.rotation * f.moment + self.translation.cross(&force),
            force,
        )
    }

    #[inline]
    pub fn inverse_transform_force(&self, f: &SpatialForce<T>) -> SpatialForce<T> {
        let rt = self.rotation.transpose();
        SpatialForce::new(
            rt * (f.moment - self.translation.cross(&f.force)),
            rt * f.force,
        )
    }

    /// Re-expresses an inertia so that `T(I)·T(m) = T(I·m)`.
    pub fn transform_inertia(&self, i: &SpatialInertia<T>) -> SpatialInertia<T> {
        let r = &self.rotation;
        let p = &self.translation;
        let h_rot = r * i.first_moment;
        let h = h_rot + p * i.mass;
        // R Ī Rᵀ + p̃ h̃_r + h̃ p̃, where p̃ h̃_r + h̃ p̃ = h_r pᵀ + p hᵀ − (p·h_r + h·p) 1.
        // Every term is symmetric, so only the upper triangle is formed.
        let ri = r * i.rotational;
        let diag = p.dot(&h_rot) + h.dot(p);
        let mut rot = Matrix3::zeros();
        for a in 0..3 {
            for b in a..3 {
                let mut v =
                    ri[(a, 0)] * r[(b, 0)] + ri[(a, 1)] * r[(b, 1)] + ri[(a, 2)] * r[(b, 2)]
                        - h_rot[a] * p[b]
                        - p[a] * h[b];
                if a == b {
                    v += diag;
                }
                rot[(a, b)] = v;
                rot[(b, a)] = v;
            }
        }
        SpatialInertia {
            mass: i.mass,
            first_moment: h,
            rotational: rot,
        }
    }

    /// Dense 6×6 motion operator `[R 0; p̃R R]`.
    pub fn motion_matrix(&self) -> Matrix6<T> {
        let mut x = Matrix6::zeros();
        let pr = skew(&self.translation) * self.rotation;
        x.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        x.fixed_view_mut::<3, 3>(3, 3).copy_from(&self.rotation);
        x.fixed_view_mut::<3, 3>(3, 0).copy_from(&pr);
        x
    }

    /// Dense 6×6 force operator `[R p̃R; 0 R]`.
    pub fn force_matrix(&self) -> Matrix6<T> {
        let mut x = Matrix6::zeros();
        let pr = skew(&self.translation) * self.rotation;
        x.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        x.fixed_view_mut::<3, 3>(3, 3).copy_from(&self.rotation);
        x.fixed_view_mut::<3, 3>(0, 3).copy_from(&pr);
        x
    }

    /// Rotation log map: the axis-angle vector `θ·k` with `R = exp(θ k̃)`.
    pub fn rotation_log(&self) -> Vector3<T> {
        rotation_log(&self.rotation)
    }
}

impl SpatialTransform<f64> {
    /// Checked constructor: the rotation must be proper orthonormal.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self, SpatialError> {
        if !rotation
            .iter()
            .chain(translation.iter())
            .all(|x| x.is_finite())
        {
            return Err(SpatialError::NonFinite("transform"));
        }
        let deviation = (rotation.transpose() * rotation - Matrix3::identity())
            .abs()
            .max();
        if deviation > ROTATION_TOLERANCE {
            return Err(SpatialError::NonOrthonormal { deviation });
        }
        let det = rotation.determinant();
        if (det - 1.0).abs() > ROTATION_TOLERANCE {
            return Err(SpatialError::Improper { det });
        }
        Ok(Self::from_parts(rotation, translation))
    }

    pub fn lift<T: Real>(&self) -> SpatialTransform<T> {
        SpatialTransform::from_parts(
            self.rotation.map(T::from_f64),
            self.translation.map(T::from_f64),
        )
    }
}

impl<T: Real> Mul for SpatialTransform<T> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        self.compose(&rhs)
    }
}

/// Rodrigues rotation `exp(θ k̃)` for a unit axis `k`.
#[inline]
pub fn rotation_about<T: Real>(axis: &Vector3<T>, angle: T) -> Matrix3<T> {
    let (s, c) = angle.sin_cos();
    let t = T::one() - c;
    let (x, y, z) = (axis.x, axis.y, axis.z);
    // c·1 + s·k̃ + (1 − c)·k kᵀ
    Matrix3::new(
        c + t * x * x,
        t * x * y - s * z,
        t * x * z + s * y,
        t * x * y + s * z,
        c + t * y * y,
        t * y * z - s * x,
        t * x * z - s * y,
        t * y * z + s * x,
        c + t * z * z,
    )
}

/// Log map of a rotation matrix, robust near `θ = 0` and `θ = π`.
pub fn rotation_log<T: Real>(r: &Matrix3<T>) -> Vector3<T> {
    let half = T::from_f64(0.5);
    let one = T::one();
    let cos_theta = (r[(0, 0)] + r[(1, 1)] + r[(2, 2)] - one) * half;
    let skew_part = Vector3::new(
        r[(2, 1)] - r[(1, 2)],
        r[(0, 2)] - r[(2, 0)],
        r[(1, 0)] - r[(0, 1)],
    );
    let sin_theta = skew_part.dot(&skew_part).sqrt() * half;
    let c = cos_theta.value();
    if c > 1.0 - 1e-10 {
        // θ ≈ 0: log ≈ vee(R − Rᵀ)/2, exact to second order.
        return skew_part * half;
    }
    if c < -1.0 + 1e-6 {
        // θ ≈ π: (R + Rᵀ)/2 = c·1 + (1 − c) k kᵀ; take its dominant column.
        let kkt =
            ((r + r.transpose()) * half - Matrix3::identity() * cos_theta) / (one - cos_theta);
        let diag = [kkt[(0, 0)], kkt[(1, 1)], kkt[(2, 2)]];
        let i = (0..3)
            .max_by(|&a, &b| diag[a].value().total_cmp(&diag[b].value()))
            .unwrap_or(0);
        let col = Vector3::new(kkt[(0, i)], kkt[(1, i)], kkt[(2, i)]);
        let mut k = col / col.dot(&col).sqrt();
        // Resolve the sign ambiguity with the residual antisymmetric part.
        if k.dot(&skew_part).value() < 0.0 {
            k = -k;
        }
        return k * sin_theta.atan2(cos_theta);
    }
    skew_part * (sin_theta.atan2(cos_theta) / (sin_theta + sin_theta))
}

/// Rigid-body spatial inertia about the frame origin.
///
/// Stored in the compact form `(m, h = m·c, Ī_o)`, which is closed under
/// addition and frame changes and equals the 6×6 matrix
/// `[Ī_o h̃; h̃ᵀ m·1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialInertia<T: Real> {
    pub mass: T,
    pub first_moment: Vector3<T>,
    pub rotational: Matrix3<T>,
}

impl<T: Real> SpatialInertia<T> {
    pub fn zeros() -> Self {
        Self {
            mass: T::zero(),
            first_moment: Vector3::zeros(),
            rotational: Matrix3::zeros(),
        }
    }

    /// `I·m`: momentum of a body moving with `m`.
    #[inline]
    pub fn apply(&self, m: &SpatialMotion<T>) -> SpatialForce<T> {
        let h = &self.first_moment;
        SpatialForce::new(
            self.rotational * m.angular + h.cross(&m.linear),
            m.linear * self.mass - h.cross(&m.angular),
        )
    }

    /// Kinetic energy `½ vᵀ I v`.
    pub fn kinetic_energy(&self, v: &SpatialMotion<T>) -> T {
        v.dot(&self.apply(v)) * T::from_f64(0.5)
    }

    pub fn to_matrix6(&self) -> Matrix6<T> {
        let mut out = Matrix6::zeros();
        let h = skew(&self.first_moment);
        out.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotational);
        out.fixed_view_mut::<3, 3>(0, 3).copy_from(&h);
        out.fixed_view_mut::<3, 3>(3, 0).copy_from(&h.transpose());
        out.fixed_view_mut::<3, 3>(3, 3)
            .copy_from(&(Matrix3::identity() * self.mass));
        out
    }
}

impl SpatialInertia<f64> {
    /// Builds an inertia from mass, centre of mass and the rotational
    /// inertia about the centre of mass (parallel-axis shifted to the origin).
    pub fn from_params(
        mass: f64,
        com: Vector3<f64>,
        inertia_com: Matrix3<f64>,
    ) -> Result<Self, SpatialError> {
        if !mass.is_finite() || !com.iter().chain(inertia_com.iter()).all(|x| x.is_finite()) {
            return Err(SpatialError::NonFinite("inertia parameters"));
        }
        if mass < 0.0 {
            return Err(SpatialError::NegativeMass(mass));
        }
        let asym = (inertia_com - inertia_com.transpose()).abs().max();
        let scale = inertia_com.abs().max();
        if asym > INERTIA_SYMMETRY_TOLERANCE * scale {
            return Err(SpatialError::AsymmetricInertia(asym / scale));
        }
        let sym = (inertia_com + inertia_com.transpose()) * 0.5;
        let cx = skew(&com);
        Ok(Self {
            mass,
            first_moment: com * mass,
            rotational: sym - cx * cx * mass,
        })
    }

    pub fn point_mass(mass: f64, at: Vector3<f64>) -> Result<Self, SpatialError> {
        Self::from_params(mass, at, Matrix3::zeros())
    }

    /// Centre of mass, if the body has mass.
    pub fn com(&self) -> Option<Vector3<f64>> {
        (self.mass > 0.0).then(|| self.first_moment / self.mass)
    }

    /// True for a massless body with no rotational inertia.
    #[inline]
    pub fn is_zero(&self) -> bool {
        self.mass == 0.0
            && self.first_moment.iter().all(|&x| x == 0.0)
            && self.rotational.iter().all(|&x| x == 0.0)
    }

    pub fn lift<T: Real>(&self) -> SpatialInertia<T> {
        SpatialInertia {
            mass: T::from_f64(self.mass),
            first_moment: self.first_moment.map(T::from_f64),
            rotational: self.rotational.map(T::from_f64),
        }
    }
}

impl<T: Real> Add for SpatialInertia<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            mass: self.mass + rhs.mass,
            first_moment: self.first_moment + rhs.first_moment,
            rotational: self.rotational + rhs.rotational,
        }
    }
}

impl<T: Real> AddAssign for SpatialInertia<T> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        self.mass += rhs.mass;
        self.first_moment += rhs.first_moment;
        self.rotational += rhs.rotational;
    }
}
