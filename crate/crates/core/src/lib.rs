pub mod autodiff;
pub mod batch;
pub mod builtin;
mod calls;
pub mod control;
pub mod dynamics;
pub mod kinematics;
pub mod linalg;
pub mod model;
pub mod scalar;
pub mod spatial;
pub mod urdf;
