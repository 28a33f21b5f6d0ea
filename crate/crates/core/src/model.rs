//! Immutable kinematic-tree description with the precomputed ancestor mask.
//!
//! Moving joints are indexed in topological (depth-first preorder) order, so
//! every parent index is smaller than its child's and the ancestor mask is
//! lower triangular. Fixed joints never reach the runtime arrays: their
//! offsets and inertias are fused into the nearest moving ancestor at build
//! time, which keeps every per-joint array exactly `n` rows tall.

use std::collections::{HashMap, HashSet};

use nalgebra::Vector3;
use thiserror::Error;

use crate::spatial::{SpatialError, SpatialInertia, SpatialTransform};

/// Axis norms must be within this of 1.
pub const AXIS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("duplicate link name `{0}`")]
    DuplicateLink(String),
    #[error("duplicate joint name `{0}`")]
    DuplicateJoint(String),
    #[error("duplicate frame name `{0}`")]
    DuplicateFrame(String),
    #[error("joint `{joint}` references unknown link `{link}`")]
    UnknownLink { joint: String, link: String },
    #[error("frame `{frame}` references unknown link `{link}`")]
    UnknownFrameLink { frame: String, link: String },
    #[error("link `{0}` is the child of more than one joint")]
    MultipleParents(String),
    #[error("links {0:?} are not reachable from a root (kinematic cycle)")]
    Cycle(Vec<String>),
    #[error("model has no links")]
    Empty,
    #[error("model is disconnected: multiple root links {0:?}")]
    Disconnected(Vec<String>),
    #[error("joint `{joint}` axis has norm {norm}, expected 1")]
    InvalidAxis { joint: String, norm: f64 },
    #[error("joint {index} has parent {parent}, parents must precede children")]
    ForwardReference { index: usize, parent: usize },
    #[error(transparent)]
    Spatial(#[from] SpatialError),
}

/// Joint type. Revolute and prismatic joints contribute exactly one DOF.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum JointKind {
    Revolute { axis: Vector3<f64> },
    Prismatic { axis: Vector3<f64> },
    Fixed,
}

impl JointKind {
    pub fn is_moving(&self) -> bool {
        !matches!(self, JointKind::Fixed)
    }

    pub fn axis(&self) -> Option<Vector3<f64>> {
        match self {
            JointKind::Revolute { axis } | JointKind::Prismatic { axis } => Some(*axis),
            JointKind::Fixed => None,
        }
    }
}

/// Joint limits, carried as metadata only.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct JointLimits {
    pub lower: f64,
    pub upper: f64,
    pub effort: f64,
    pub velocity: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinkSpec {
    pub name: String,
    /// Inertia about the link frame origin, in link coordinates.
    pub inertia: Option<SpatialInertia<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JointSpec {
    pub name: String,
    pub kind: JointKind,
    pub parent: String,
    pub child: String,
    /// Pose of the joint frame in the parent link frame at zero displacement.
    pub origin: SpatialTransform<f64>,
    pub limits: Option<JointLimits>,
}

/// An extra named frame rigidly attached to a link.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameSpec {
    pub name: String,
    pub link: String,
    pub offset: SpatialTransform<f64>,
}

/// Builder input: a link/joint graph in any listing order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ModelDescription {
    pub name: String,
    pub links: Vec<LinkSpec>,
    pub joints: Vec<JointSpec>,
    pub frames: Vec<FrameSpec>,
}

impl ModelDescription {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn link(mut self, name: impl Into<String>, inertia: Option<SpatialInertia<f64>>) -> Self {
        self.links.push(LinkSpec {
            name: name.into(),
            inertia,
        });
        self
    }

    pub fn joint(
        mut self,
        name: impl Into<String>,
        kind: JointKind,
        parent: impl Into<String>,
        child: impl Into<String>,
        origin: SpatialTransform<f64>,
    ) -> Self {
        self.joints.push(JointSpec {
            name: name.into(),
            kind,
            parent: parent.into(),
            child: child.into(),
            origin,
            limits: None,
        });
        self
    }

    pub fn frame(
        mut self,
        name: impl Into<String>,
        link: impl Into<String>,
        offset: SpatialTransform<f64>,
    ) -> Self {
        self.frames.push(FrameSpec {
            name: name.into(),
            link: link.into(),
            offset,
        });
        self
    }

    pub fn build(&self) -> Result<RobotModel, ModelError> {
        build_model(self)
    }
}

/// Single-DOF motion type of a moving joint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Motion {
    Revolute,
    Prismatic,
}

/// A moving joint in topological order.
#[derive(Clone, Debug, PartialEq)]
pub struct Joint {
    pub name: String,
    pub motion: Motion,
    /// Unit axis in the joint frame.
    pub axis: Vector3<f64>,
    pub parent: Option<usize>,
    /// Pose of the joint frame (at `q = 0`) in the parent joint's frame.
    pub tree_offset: SpatialTransform<f64>,
    pub limits: Option<JointLimits>,
}

/// Named attachment point: a moving joint (or the root) plus a fixed offset.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub name: String,
    pub joint: Option<usize>,
    pub offset: SpatialTransform<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    /// A body without mass carries moving descendants. Legal, but the mass
    /// matrix relies on those descendants to stay positive definite.
    MasslessBodyWithChildren { joint: String },
    /// A leaf body without mass; its joint column in M will be zero.
    MasslessLeaf { joint: String },
}

/// Binary `n×n` ancestor mask: `U[i][j] = 1` iff `j` is `i` or an ancestor of `i`.
///
/// Stored densely, with the nonzero column indices of each row alongside so
/// that the products visit only the nonzeros. Products with it are the tree
/// sums of the vectorized algorithms: `U·x` accumulates root-to-leaf, `Uᵀ·x`
/// leaf-to-root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AncestorMask {
    n: usize,
    bits: Vec<bool>,
    row_start: Vec<usize>,
    columns: Vec<usize>,
}

impl AncestorMask {
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.n + j]
    }

    /// Ancestors of `i` (including `i`) in increasing order.
    #[inline]
    pub fn ancestors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(i).iter().copied()
    }

    /// Nonzero columns of row `i`, increasing; the last entry is `i` itself.
    #[inline]
    pub fn row(&self, i: usize) -> &[usize] {
        &self.columns[self.row_start[i]..self.row_start[i + 1]]
    }

    /// Number of nonzeros, `Σ_i depth(i)`.
    pub fn nnz(&self) -> usize {
        self.columns.len()
    }

    /// `out_i = Σ_j U_ij x_j`.
    pub fn mul<X>(&self, x: &[X]) -> Vec<X>
    where
        X: Copy + std::ops::AddAssign,
    {
        let mut out = x.to_vec();
        self.mul_in_place(&mut out);
        out
    }

    /// `x ← U x`. Rows are visited leaf-first, so every ancestor term read
    /// is still the original value.
    pub fn mul_in_place<X>(&self, x: &mut [X])
    where
        X: Copy + std::ops::AddAssign,
    {
        assert_eq!(x.len(), self.n);
        for i in (0..self.n).rev() {
            let row = self.row(i);
            let mut acc = x[i];
            for &j in &row[..row.len() - 1] {
                acc += x[j];
            }
            x[i] = acc;
        }
    }

    /// `out_j = Σ_i U_ij x_i`.
    pub fn mul_transpose<X>(&self, x: &[X]) -> Vec<X>
    where
        X: Copy + std::ops::AddAssign,
    {
        let mut out = x.to_vec();
        self.mul_transpose_in_place(&mut out);
        out
    }

    /// `x ← Uᵀ x`. Rows are visited root-first: row `i` only receives from
    /// rows below it, so `x[i]` is still original when it is scattered.
    pub fn mul_transpose_in_place<X>(&self, x: &mut [X])
    where
        X: Copy + std::ops::AddAssign,
    {
        assert_eq!(x.len(), self.n);
        for i in 0..self.n {
            let row = self.row(i);
            let xi = x[i];
            for &j in &row[..row.len() - 1] {
                x[j] += xi;
            }
        }
    }

    /// Dense `0/1` rows, for inspection and tests.
    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) as u8).collect())
            .collect()
    }
}

/// Builds `U` from topologically sorted parent indices (`None` = root).
pub fn build_ancestor_mask(parents: &[Option<usize>]) -> Result<AncestorMask, ModelError> {
    let n = parents.len();
    let mut bits = vec![false; n * n];
    for (i, parent) in parents.iter().enumerate() {
        if let Some(p) = *parent {
            if p >= i {
                return Err(ModelError::ForwardReference {
                    index: i,
                    parent: p,
                });
            }
            let (done, row) = bits.split_at_mut(i * n);
            row[..n].copy_from_slice(&done[p * n..(p + 1) * n]);
        }
        bits[i * n + i] = true;
    }
    let mut row_start = Vec::with_capacity(n + 1);
    let mut columns = Vec::new();
    row_start.push(0);
    for i in 0..n {
        columns.extend((0..=i).filter(|&j| bits[i * n + j]));
        row_start.push(columns.len());
    }
    Ok(AncestorMask {
        n,
        bits,
        row_start,
        columns,
    })
}

/// Immutable robot model shared by every evaluator.
#[derive(Clone, Debug, PartialEq)]
pub struct RobotModel {
    pub name: String,
    joints: Vec<Joint>,
    /// Body inertia of each moving joint, in its joint frame.
    inertias: Vec<SpatialInertia<f64>>,
    /// Inertia welded to the root, in root coordinates.
    root_inertia: SpatialInertia<f64>,
    mask: AncestorMask,
    topo_order: Vec<usize>,
    frames: Vec<Frame>,
    frame_index: HashMap<String, usize>,
    max_depth: usize,
    diagnostics: Vec<Diagnostic>,
}

impl RobotModel {
    #[inline]
    pub fn n_dof(&self) -> usize {
        self.joints.len()
    }

    #[inline]
    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    #[inline]
    pub fn parent(&self, i: usize) -> Option<usize> {
        self.joints[i].parent
    }

    pub fn parents(&self) -> Vec<Option<usize>> {
        self.joints.iter().map(|j| j.parent).collect()
    }

    #[inline]
    pub fn inertias(&self) -> &[SpatialInertia<f64>] {
        &self.inertias
    }

    pub fn root_inertia(&self) -> &SpatialInertia<f64> {
        &self.root_inertia
    }

    #[inline]
    pub fn ancestor_mask(&self) -> &AncestorMask {
        &self.mask
    }

    /// `topo_order()[i]` is the position of moving joint `i` among the moving
    /// joints of the original description listing.
    pub fn topo_order(&self) -> &[usize] {
        &self.topo_order
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn frame(&self, name: &str) -> Option<&Frame> {
        self.frame_index.get(name).map(|&i| &self.frames[i])
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.joints.iter().position(|j| j.name == name)
    }

    /// Maximum number of moving joints on any root-to-leaf path.
    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diagnostics
    }

    pub fn total_mass(&self) -> f64 {
        self.root_inertia.mass + self.inertias.iter().map(|i| i.mass).sum::<f64>()
    }

    /// True when joint `i`'s parent is joint `i − 1` for all `i`.
    pub fn is_serial_chain(&self) -> bool {
        self.joints
            .iter()
            .enumerate()
            .all(|(i, j)| j.parent == i.checked_sub(1))
    }

    fn assemble(
        name: String,
        joints: Vec<Joint>,
        inertias: Vec<SpatialInertia<f64>>,
        root_inertia: SpatialInertia<f64>,
        topo_order: Vec<usize>,
        frames: Vec<Frame>,
    ) -> Result<Self, ModelError> {
        let parents: Vec<_> = joints.iter().map(|j| j.parent).collect();
        let mask = build_ancestor_mask(&parents)?;
        let max_depth = (0..joints.len())
            .map(|i| mask.ancestors(i).count())
            .max()
            .unwrap_or(0);
        let mut frame_index = HashMap::with_capacity(frames.len());
        for (k, f) in frames.iter().enumerate() {
            if frame_index.insert(f.name.clone(), k).is_some() {
                return Err(ModelError::DuplicateFrame(f.name.clone()));
            }
        }
        let mut has_children = vec![false; joints.len()];
        for p in parents.iter().flatten() {
            has_children[*p] = true;
        }
        let diagnostics = inertias
            .iter()
            .zip(&joints)
            .zip(&has_children)
            .filter(|((inertia, _), _)| inertia.mass <= 0.0)
            .map(|((_, joint), &children)| {
                let joint = joint.name.clone();
                if children {
                    Diagnostic::MasslessBodyWithChildren { joint }
                } else {
                    Diagnostic::MasslessLeaf { joint }
                }
            })
            .collect();
        Ok(Self {
            name,
            joints,
            inertias,
            root_inertia,
            mask,
            topo_order,
            frames,
            frame_index,
            max_depth,
            diagnostics,
        })
    }
}

/// Normalizes a link/joint graph into a [`RobotModel`].
pub fn build_model(desc: &ModelDescription) -> Result<RobotModel, ModelError> {
    let mut link_index = HashMap::with_capacity(desc.links.len());
    for (k, link) in desc.links.iter().enumerate() {
        if link_index.insert(link.name.as_str(), k).is_some() {
            return Err(ModelError::DuplicateLink(link.name.clone()));
        }
    }
    let mut joint_names = HashSet::with_capacity(desc.joints.len());
    let mut parent_joint: Vec<Option<usize>> = vec![None; desc.links.len()];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); desc.links.len()];
    for (k, joint) in desc.joints.iter().enumerate() {
        if !joint_names.insert(joint.name.as_str()) {
            return Err(ModelError::DuplicateJoint(joint.name.clone()));
        }
        let lookup = |link: &str| {
            link_index
                .get(link)
                .copied()
                .ok_or_else(|| ModelError::UnknownLink {
                    joint: joint.name.clone(),
                    link: link.to_string(),
                })
        };
        let parent = lookup(&joint.parent)?;
        let child = lookup(&joint.child)?;
        if parent_joint[child].replace(k).is_some() {
            return Err(ModelError::MultipleParents(joint.child.clone()));
        }
        children[parent].push(k);
        if let Some(axis) = joint.kind.axis() {
            let norm = axis.norm();
            if (norm - 1.0).abs() > AXIS_TOLERANCE {
                return Err(ModelError::InvalidAxis {
                    joint: joint.name.clone(),
                    norm,
                });
            }
        }
    }
    if desc.links.is_empty() {
        return Err(ModelError::Empty);
    }
    let roots: Vec<usize> = (0..desc.links.len())
        .filter(|&l| parent_joint[l].is_none())
        .collect();
    match roots.len() {
        0 => {
            return Err(ModelError::Cycle(
                desc.links.iter().map(|l| l.name.clone()).collect(),
            ))
        }
        1 => {}
        _ => {
            return Err(ModelError::Disconnected(
                roots.iter().map(|&l| desc.links[l].name.clone()).collect(),
            ))
        }
    }
    let root = roots[0];

    // Position of each moving joint among moving joints in listing order.
    let mut listing_rank = vec![usize::MAX; desc.joints.len()];
    let mut rank = 0;
    for (k, joint) in desc.joints.iter().enumerate() {
        if joint.kind.is_moving() {
            listing_rank[k] = rank;
            rank += 1;
        }
    }

    // Each link rides on a body: a moving joint (or the root) plus an offset.
    enum Entry {
        Welded {
            link: usize,
            body: Option<usize>,
            offset: SpatialTransform<f64>,
        },
        Moving {
            joint: usize,
            parent: Option<usize>,
            placement: SpatialTransform<f64>,
        },
    }

    let mut joints: Vec<Joint> = Vec::new();
    let mut inertias: Vec<SpatialInertia<f64>> = Vec::new();
    let mut root_inertia = SpatialInertia::zeros();
    let mut topo_order = Vec::new();
    let mut link_body: Vec<Option<(Option<usize>, SpatialTransform<f64>)>> =
        vec![None; desc.links.len()];

    // Depth-first preorder with siblings in listing order, so the result
    // does not depend on how parents and children are interleaved.
    let mut stack = vec![Entry::Welded {
        link: root,
        body: None,
        offset: SpatialTransform::identity(),
    }];
    while let Some(entry) = stack.pop() {
        let (link, body, offset) = match entry {
            Entry::Welded { link, body, offset } => (link, body, offset),
            Entry::Moving {
                joint: k,
                parent,
                placement,
            } => {
                let spec = &desc.joints[k];
                let (motion, axis) = match spec.kind {
                    JointKind::Revolute { axis } => (Motion::Revolute, axis),
                    JointKind::Prismatic { axis } => (Motion::Prismatic, axis),
                    JointKind::Fixed => unreachable!("fixed joints are welded"),
                };
                let index = joints.len();
                joints.push(Joint {
                    name: spec.name.clone(),
                    motion,
                    axis,
                    parent,
                    tree_offset: placement,
                    limits: spec.limits,
                });
                inertias.push(SpatialInertia::zeros());
                topo_order.push(listing_rank[k]);
                (
                    link_index[spec.child.as_str()],
                    Some(index),
                    SpatialTransform::identity(),
                )
            }
        };
        link_body[link] = Some((body, offset));
        if let Some(inertia) = &desc.links[link].inertia {
            let fused = offset.transform_inertia(inertia);
            match body {
                Some(j) => inertias[j] += fused,
                None => root_inertia += fused,
            }
        }
        for &k in children[link].iter().rev() {
            let spec = &desc.joints[k];
            let placement = offset.compose(&spec.origin);
            stack.push(if spec.kind.is_moving() {
                Entry::Moving {
                    joint: k,
                    parent: body,
                    placement,
                }
            } else {
                Entry::Welded {
                    link: link_index[spec.child.as_str()],
                    body,
                    offset: placement,
                }
            });
        }
    }

    let unreached: Vec<String> = link_body
        .iter()
        .zip(&desc.links)
        .filter(|(b, _)| b.is_none())
        .map(|(_, l)| l.name.clone())
        .collect();
    if !unreached.is_empty() {
        return Err(ModelError::Cycle(unreached));
    }

    let mut frames: Vec<Frame> = desc
        .links
        .iter()
        .zip(&link_body)
        .map(|(link, placed)| {
            let (joint, offset) = placed.expect("all links reached");
            Frame {
                name: link.name.clone(),
                joint,
                offset,
            }
        })
        .collect();
    for spec in &desc.frames {
        let link =
            link_index
                .get(spec.link.as_str())
                .ok_or_else(|| ModelError::UnknownFrameLink {
                    frame: spec.name.clone(),
                    link: spec.link.clone(),
                })?;
        let (joint, offset) = link_body[*link].expect("all links reached");
        frames.push(Frame {
            name: spec.name.clone(),
            joint,
            offset: offset.compose(&spec.offset),
        });
    }

    RobotModel::assemble(
        desc.name.clone(),
        joints,
        inertias,
        root_inertia,
        topo_order,
        frames,
    )
}

/// Names of the emulated free-base joints, outermost first.
pub const FLOATING_BASE_JOINTS: [&str; 6] = [
    "floating_base_x",
    "floating_base_y",
    "floating_base_z",
    "floating_base_yaw",
    "floating_base_pitch",
    "floating_base_roll",
];

/// Prepends a 6-joint stack (prismatic x, y, z then revolute z, y, x) so the
/// root link becomes free. The Euler stack is singular at pitch = ±π/2.
pub fn floating_base(model: &RobotModel) -> Result<RobotModel, ModelError> {
    let axes = [
        (Motion::Prismatic, Vector3::x()),
        (Motion::Prismatic, Vector3::y()),
        (Motion::Prismatic, Vector3::z()),
        (Motion::Revolute, Vector3::z()),
        (Motion::Revolute, Vector3::y()),
        (Motion::Revolute, Vector3::x()),
    ];
    let mut joints: Vec<Joint> = axes
        .iter()
        .zip(FLOATING_BASE_JOINTS)
        .enumerate()
        .map(|(i, (&(motion, axis), name))| Joint {
            name: name.to_string(),
            motion,
            axis,
            parent: i.checked_sub(1),
            tree_offset: SpatialTransform::identity(),
            limits: None,
        })
        .collect();
    for j in &joints {
        if model.joint_index(&j.name).is_some() {
            return Err(ModelError::DuplicateJoint(j.name.clone()));
        }
    }
    let base = joints.len() - 1;
    joints.extend(model.joints.iter().map(|j| Joint {
        parent: Some(j.parent.map_or(base, |p| p + 6)),
        ..j.clone()
    }));
    let mut inertias = vec![SpatialInertia::zeros(); 6];
    inertias[base] = model.root_inertia;
    inertias.extend_from_slice(&model.inertias);
    let topo_order = (0..6)
        .chain(model.topo_order.iter().map(|&k| k + 6))
        .collect();
    let frames = model
        .frames
        .iter()
        .map(|f| Frame {
            joint: Some(f.joint.map_or(base, |j| j + 6)),
            ..f.clone()
        })
        .collect();
    RobotModel::assemble(
        model.name.clone(),
        joints,
        inertias,
        SpatialInertia::zeros(),
        topo_order,
        frames,
    )
}

/// Joint positions and velocities, validated against a model.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState {
    pub q: Vec<f64>,
    pub qd: Vec<f64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("{field} has length {got}, model has {expected} DOFs")]
    Length {
        field: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("{0} contains a non-finite entry")]
    NonFinite(&'static str),
}

impl JointState {
    pub fn new(model: &RobotModel, q: Vec<f64>, qd: Vec<f64>) -> Result<Self, StateError> {
        for (field, v) in [("q", &q), ("qd", &qd)] {
            if v.len() != model.n_dof() {
                return Err(StateError::Length {
                    field,
                    got: v.len(),
                    expected: model.n_dof(),
                });
            }
            if !v.iter().all(|x| x.is_finite()) {
                return Err(StateError::NonFinite(field));
            }
        }
        Ok(Self { q, qd })
    }

    pub fn zeros(model: &RobotModel) -> Self {
        Self {
            q: vec![0.0; model.n_dof()],
            qd: vec![0.0; model.n_dof()],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix3;
    use proptest::prelude::*;

    fn body(mass: f64) -> Option<SpatialInertia<f64>> {
        Some(
            SpatialInertia::from_params(
                mass,
                Vector3::new(0.0, 0.0, 0.1),
                Matrix3::identity() * 0.01,
            )
            .unwrap(),
        )
    }

    fn rev_z() -> JointKind {
        JointKind::Revolute { axis: Vector3::z() }
    }

    fn up(z: f64) -> SpatialTransform<f64> {
        SpatialTransform::from_translation(Vector3::new(0.0, 0.0, z))
    }

    #[test]
    fn ancestor_mask_examples() {
        let chain = build_ancestor_mask(&[None, Some(0), Some(1)]).unwrap();
        assert_eq!(
            chain.to_rows(),
            vec![vec![1, 0, 0], vec![1, 1, 0], vec![1, 1, 1]]
        );
        let branch = build_ancestor_mask(&[None, Some(0), Some(0)]).unwrap();
        assert_eq!(
            branch.to_rows(),
            vec![vec![1, 0, 0], vec![1, 1, 0], vec![1, 0, 1]]
        );
        assert_eq!(
            build_ancestor_mask(&[None]).unwrap().to_rows(),
            vec![vec![1]]
        );
    }

    #[test]
    fn ancestor_mask_rejects_forward_reference() {
        assert_eq!(
            build_ancestor_mask(&[None, Some(2), Some(0)]),
            Err(ModelError::ForwardReference {
                index: 1,
                parent: 2
            })
        );
        assert_eq!(
            build_ancestor_mask(&[Some(0)]),
            Err(ModelError::ForwardReference {
                index: 0,
                parent: 0
            })
        );
    }

    #[test]
    fn mask_products_are_tree_sums() {
        let mask = build_ancestor_mask(&[None, Some(0), Some(0), Some(2)]).unwrap();
        let x = [1.0, 10.0, 100.0, 1000.0];
        assert_eq!(mask.mul(&x), vec![1.0, 11.0, 101.0, 1101.0]);
        assert_eq!(mask.mul_transpose(&x), vec![1111.0, 10.0, 1100.0, 1000.0]);
    }

    fn transitive_closure(parents: &[Option<usize>]) -> Vec<Vec<u8>> {
        // (A + 1)^k saturated, by repeated boolean squaring until fixpoint.
        let n = parents.len();
        let mut r = vec![vec![0u8; n]; n];
        for i in 0..n {
            r[i][i] = 1;
            if let Some(p) = parents[i] {
                r[i][p] = 1;
            }
        }
        loop {
            let mut next = r.clone();
            for i in 0..n {
                for k in 0..n {
                    if r[i][k] == 1 {
                        for j in 0..n {
                            if r[k][j] == 1 {
                                next[i][j] = 1;
                            }
                        }
                    }
                }
            }
            if next == r {
                return r;
            }
            r = next;
        }
    }

    proptest! {
        #[test]
        fn mask_equals_transitive_closure(raw in prop::collection::vec(0.0..1.0f64, 1..=32)) {
            let parents: Vec<Option<usize>> = raw
                .iter()
                .enumerate()
                .map(|(i, &u)| if i == 0 || u < 0.1 { None } else { Some(((u * i as f64) as usize).min(i - 1)) })
                .collect();
            let mask = build_ancestor_mask(&parents).unwrap();
            prop_assert_eq!(mask.to_rows(), transitive_closure(&parents));
            for i in 0..parents.len() {
                for j in i + 1..parents.len() {
                    prop_assert!(!mask.get(i, j));
                }
            }
        }
    }

    fn two_revolute_with_fixed_between() -> ModelDescription {
        ModelDescription::new("fused")
            .link("base", body(1.0))
            .link("a", body(2.0))
            .link("a_tip", body(0.5))
            .link("b", body(1.5))
            .joint("j0", rev_z(), "base", "a", up(0.3))
            .joint(
                "weld",
                JointKind::Fixed,
                "a",
                "a_tip",
                SpatialTransform::from_parts(
                    crate::spatial::rotation_about(&Vector3::x(), 0.4),
                    Vector3::new(0.1, 0.0, 0.2),
                ),
            )
            .joint(
                "j1",
                JointKind::Revolute { axis: Vector3::y() },
                "a_tip",
                "b",
                up(0.25),
            )
    }

    #[test]
    fn fixed_joint_is_fused() {
        let model = two_revolute_with_fixed_between().build().unwrap();
        assert_eq!(model.n_dof(), 2);
        assert_eq!(model.parent(1), Some(0));
        let weld = SpatialTransform::from_parts(
            crate::spatial::rotation_about(&Vector3::x(), 0.4),
            Vector3::new(0.1, 0.0, 0.2),
        );
        let expected = weld.compose(&up(0.25));
        let got = model.joints()[1].tree_offset;
        assert!((got.rotation - expected.rotation).amax() < 1e-15);
        assert!((got.translation - expected.translation).amax() < 1e-15);
        // a_tip mass rides on joint 0
        assert!((model.inertias()[0].mass - 2.5).abs() < 1e-15);
        assert!((model.root_inertia().mass - 1.0).abs() < 1e-15);
        assert_eq!(model.frame("a_tip").unwrap().joint, Some(0));
        assert_eq!(model.max_depth(), 2);
        assert!(model.is_serial_chain());
    }

    #[test]
    fn only_fixed_joints() {
        let model = ModelDescription::new("rigid")
            .link("base", body(1.0))
            .link("tool", body(1.0))
            .joint("weld", JointKind::Fixed, "base", "tool", up(1.0))
            .build()
            .unwrap();
        assert_eq!(model.n_dof(), 0);
        assert_eq!(model.frame("tool").unwrap().joint, None);
        assert_eq!(model.frame("tool").unwrap().offset, up(1.0));
    }

    #[test]
    fn listing_order_is_normalized() {
        let sorted = two_revolute_with_fixed_between();
        let mut shuffled = sorted.clone();
        shuffled.joints.reverse();
        shuffled.links.reverse();
        let a = sorted.build().unwrap();
        let b = shuffled.build().unwrap();
        assert_eq!(a.joints(), b.joints());
        assert_eq!(a.inertias(), b.inertias());
        assert_eq!(a.ancestor_mask(), b.ancestor_mask());
        assert_eq!(a.topo_order(), &[0, 1]);
        assert_eq!(b.topo_order(), &[1, 0]);
    }

    #[test]
    fn construction_errors() {
        let dup = ModelDescription::new("x").link("a", None).link("a", None);
        assert_eq!(dup.build(), Err(ModelError::DuplicateLink("a".into())));

        let disconnected = ModelDescription::new("x").link("a", None).link("b", None);
        assert!(matches!(
            disconnected.build(),
            Err(ModelError::Disconnected(_))
        ));

        let cycle = ModelDescription::new("x")
            .link("root", None)
            .link("a", body(1.0))
            .link("b", body(1.0))
            .joint("ab", rev_z(), "a", "b", up(1.0))
            .joint("ba", rev_z(), "b", "a", up(1.0));
        assert!(matches!(cycle.build(), Err(ModelError::Cycle(_))));

        let unknown =
            ModelDescription::new("x")
                .link("a", None)
                .joint("j", rev_z(), "a", "nope", up(1.0));
        assert!(matches!(
            unknown.build(),
            Err(ModelError::UnknownLink { .. })
        ));

        let bad_axis = ModelDescription::new("x")
            .link("a", None)
            .link("b", body(1.0))
            .joint(
                "j",
                JointKind::Revolute {
                    axis: Vector3::new(0.0, 0.0, 2.0),
                },
                "a",
                "b",
                up(1.0),
            );
        assert!(matches!(
            bad_axis.build(),
            Err(ModelError::InvalidAxis { .. })
        ));

        let dup_joint = ModelDescription::new("x")
            .link("a", None)
            .link("b", body(1.0))
            .link("c", body(1.0))
            .joint("j", rev_z(), "a", "b", up(1.0))
            .joint("j", rev_z(), "b", "c", up(1.0));
        assert_eq!(
            dup_joint.build(),
            Err(ModelError::DuplicateJoint("j".into()))
        );
    }

    #[test]
    fn massless_body_is_flagged_not_rejected() {
        let model = ModelDescription::new("x")
            .link("root", None)
            .link("ghost", None)
            .link("tip", body(1.0))
            .joint("j0", rev_z(), "root", "ghost", up(0.1))
            .joint("j1", rev_z(), "ghost", "tip", up(0.1))
            .build()
            .unwrap();
        assert_eq!(
            model.diagnostics(),
            &[Diagnostic::MasslessBodyWithChildren { joint: "j0".into() }]
        );
    }

    #[test]
    fn floating_base_prepends_six_joints() {
        let fixed = two_revolute_with_fixed_between().build().unwrap();
        let float = floating_base(&fixed).unwrap();
        assert_eq!(float.n_dof(), 8);
        assert_eq!(float.parent(6), Some(5));
        assert_eq!(float.parent(7), Some(6));
        assert!((float.total_mass() - fixed.total_mass()).abs() < 1e-15);
        assert_eq!(float.inertias()[5], *fixed.root_inertia());
        assert_eq!(float.frame("base").unwrap().joint, Some(5));
        assert_eq!(float.max_depth(), 8);
        assert!(float
            .diagnostics()
            .contains(&Diagnostic::MasslessBodyWithChildren {
                joint: "floating_base_x".into()
            }));
    }

    #[test]
    fn joint_state_validation() {
        let model = two_revolute_with_fixed_between().build().unwrap();
        assert!(JointState::new(&model, vec![0.0; 2], vec![0.0; 2]).is_ok());
        assert_eq!(
            JointState::new(&model, vec![0.0; 3], vec![0.0; 2]),
            Err(StateError::Length {
                field: "q",
                got: 3,
                expected: 2
            })
        );
        assert_eq!(
            JointState::new(&model, vec![0.0; 2], vec![f64::NAN, 0.0]),
            Err(StateError::NonFinite("qd"))
        );
    }
}
