//! Reader and writer for the subset of URDF this crate models.
//!
//! Recognized: `<link>` with `<inertial>`, `<joint>` of type revolute,
//! continuous, prismatic or fixed with `<origin>`, `<axis>`, `<limit>`.
//! Geometry, materials, transmissions and simulator extensions are skipped
//! and reported in [`UrdfDocument::warnings`].

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::{Matrix3, Vector3};
use roxmltree::{Document, Node};
use thiserror::Error;

use crate::model::{
    JointKind, JointLimits, JointSpec, LinkSpec, ModelDescription, ModelError, RobotModel,
};
use crate::spatial::{rotation_about, SpatialError, SpatialInertia, SpatialTransform};

/// Source position, 1-based.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Location {
    pub line: u32,
    pub column: u32,
}

impl std::fmt::Display for Location {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UrdfError {
    #[error("malformed XML at {at}: {message}")]
    Xml { message: String, at: Location },
    #[error("root element is <{0}>, expected <robot>")]
    NotRobot(String),
    #[error("<{element}> at {at} is missing attribute `{attribute}`")]
    MissingAttribute {
        element: String,
        attribute: &'static str,
        at: Location,
    },
    #[error("<{element}> at {at} is missing child <{child}>")]
    MissingElement {
        element: String,
        child: &'static str,
        at: Location,
    },
    #[error("invalid number `{value}` in `{attribute}` at {at}")]
    InvalidNumber {
        attribute: String,
        value: String,
        at: Location,
    },
    #[error("joint `{joint}` at {at}: unsupported joint type `{kind}`")]
    UnsupportedJoint {
        joint: String,
        kind: String,
        at: Location,
    },
    #[error("joint `{joint}` at {at} has a zero-length axis")]
    ZeroAxis { joint: String, at: Location },
    #[error("link `{link}` at {at} has no <inertial> but is moved by joint `{joint}`")]
    MissingInertial {
        link: String,
        joint: String,
        at: Location,
    },
    #[error("link `{link}` at {at}: {source}")]
    Inertia {
        link: String,
        at: Location,
        source: SpatialError,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `<origin xyz rpy>`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Origin {
    pub xyz: Vector3<f64>,
    pub rpy: Vector3<f64>,
}

impl Origin {
    pub fn to_transform(&self) -> SpatialTransform<f64> {
        SpatialTransform::from_parts(
            rpy_to_rotation(self.rpy.x, self.rpy.y, self.rpy.z),
            self.xyz,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Inertial {
    pub origin: Origin,
    pub mass: f64,
    /// Symmetric rotational inertia about the center of mass, in the `origin` frame.
    pub inertia: Matrix3<f64>,
}

impl Inertial {
    /// Spatial inertia about the link origin in link coordinates.
    pub fn to_spatial(&self) -> Result<SpatialInertia<f64>, SpatialError> {
        let r = rpy_to_rotation(self.origin.rpy.x, self.origin.rpy.y, self.origin.rpy.z);
        let rotated = r * self.inertia * r.transpose();
        SpatialInertia::from_params(
            self.mass,
            self.origin.xyz,
            (rotated + rotated.transpose()) * 0.5,
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UrdfLink {
    pub name: String,
    pub inertial: Option<Inertial>,
    pub location: Location,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UrdfJointType {
    Revolute,
    Continuous,
    Prismatic,
    Fixed,
}

impl UrdfJointType {
    fn as_str(self) -> &'static str {
        match self {
            Self::Revolute => "revolute",
            Self::Continuous => "continuous",
            Self::Prismatic => "prismatic",
            Self::Fixed => "fixed",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UrdfJoint {
    pub name: String,
    pub kind: UrdfJointType,
    pub parent: String,
    pub child: String,
    pub origin: Origin,
    /// Unit axis; URDF's default is `(1, 0, 0)`.
    pub axis: Vector3<f64>,
    pub limit: Option<JointLimits>,
    pub location: Location,
}

/// A skipped element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UrdfWarning {
    pub element: String,
    pub at: Location,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UrdfDocument {
    pub name: String,
    pub links: Vec<UrdfLink>,
    pub joints: Vec<UrdfJoint>,
    pub warnings: Vec<UrdfWarning>,
}

/// `R_z(yaw) · R_y(pitch) · R_x(roll)`.
pub fn rpy_to_rotation(roll: f64, pitch: f64, yaw: f64) -> Matrix3<f64> {
    rotation_about(&Vector3::z(), yaw)
        * rotation_about(&Vector3::y(), pitch)
        * rotation_about(&Vector3::x(), roll)
}

fn location(doc: &Document, node: Node) -> Location {
    let pos = doc.text_pos_at(node.range().start);
    Location {
        line: pos.row,
        column: pos.col,
    }
}

struct Reader<'a, 'input> {
    doc: &'a Document<'input>,
    warnings: Vec<UrdfWarning>,
}

impl<'a, 'input> Reader<'a, 'input> {
    fn at(&self, node: Node) -> Location {
        location(self.doc, node)
    }

    fn skip(&mut self, node: Node) {
        self.warnings.push(UrdfWarning {
            element: node.tag_name().name().to_string(),
            at: self.at(node),
        });
    }

    fn required<'n>(
        &self,
        node: Node<'n, 'input>,
        attribute: &'static str,
    ) -> Result<&'n str, UrdfError> {
        node.attribute(attribute)
            .ok_or_else(|| UrdfError::MissingAttribute {
                element: node.tag_name().name().to_string(),
                attribute,
                at: self.at(node),
            })
    }

    fn number(&self, node: Node, attribute: &str, text: &str) -> Result<f64, UrdfError> {
        text.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| UrdfError::InvalidNumber {
                attribute: attribute.to_string(),
                value: text.to_string(),
                at: self.at(node),
            })
    }

    fn optional_number(&self, node: Node, attribute: &str, default: f64) -> Result<f64, UrdfError> {
        match node.attribute(attribute) {
            Some(text) => self.number(node, attribute, text),
            None => Ok(default),
        }
    }

    fn triple(
        &self,
        node: Node,
        attribute: &str,
        default: Vector3<f64>,
    ) -> Result<Vector3<f64>, UrdfError> {
        let Some(text) = node.attribute(attribute) else {
            return Ok(default);
        };
        let parts: Vec<&str> = text.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(UrdfError::InvalidNumber {
                attribute: attribute.to_string(),
                value: text.to_string(),
                at: self.at(node),
            });
        }
        let mut out = Vector3::zeros();
        for (k, p) in parts.iter().enumerate() {
            out[k] = self.number(node, attribute, p)?;
        }
        Ok(out)
    }

    fn origin(&self, parent: Node) -> Result<Origin, UrdfError> {
        match child(parent, "origin") {
            Some(node) => Ok(Origin {
                xyz: self.triple(node, "xyz", Vector3::zeros())?,
                rpy: self.triple(node, "rpy", Vector3::zeros())?,
            }),
            None => Ok(Origin::default()),
        }
    }

    fn inertial(&mut self, node: Node) -> Result<Inertial, UrdfError> {
        let mut mass = None;
        let mut tensor = None;
        for c in node.children().filter(Node::is_element) {
            match c.tag_name().name() {
                "origin" => {}
                "mass" => mass = Some(self.number(c, "value", self.required(c, "value")?)?),
                "inertia" => {
                    let mut v = [0.0; 6];
                    for (k, key) in ["ixx", "ixy", "ixz", "iyy", "iyz", "izz"]
                        .iter()
                        .enumerate()
                    {
                        v[k] = self.optional_number(c, key, 0.0)?;
                    }
                    let [xx, xy, xz, yy, yz, zz] = v;
                    tensor = Some(Matrix3::new(xx, xy, xz, xy, yy, yz, xz, yz, zz));
                }
                _ => self.skip(c),
            }
        }
        let missing = |child| UrdfError::MissingElement {
            element: "inertial".into(),
            child,
            at: self.at(node),
        };
        Ok(Inertial {
            origin: self.origin(node)?,
            mass: mass.ok_or_else(|| missing("mass"))?,
            inertia: tensor.ok_or_else(|| missing("inertia"))?,
        })
    }

    fn link(&mut self, node: Node) -> Result<UrdfLink, UrdfError> {
        let name = self.required(node, "name")?.to_string();
        let mut inertial = None;
        for c in node.children().filter(Node::is_element) {
            match c.tag_name().name() {
                "inertial" => {
                    let parsed = self.inertial(c)?;
                    parsed.to_spatial().map_err(|source| UrdfError::Inertia {
                        link: name.clone(),
                        at: self.at(c),
                        source,
                    })?;
                    inertial = Some(parsed);
                }
                _ => self.skip(c),
            }
        }
        Ok(UrdfLink {
            name,
            inertial,
            location: self.at(node),
        })
    }

    fn joint(&mut self, node: Node) -> Result<UrdfJoint, UrdfError> {
        let name = self.required(node, "name")?.to_string();
        let kind_text = self.required(node, "type")?;
        let kind = match kind_text {
            "revolute" => UrdfJointType::Revolute,
            "continuous" => UrdfJointType::Continuous,
            "prismatic" => UrdfJointType::Prismatic,
            "fixed" => UrdfJointType::Fixed,
            other => {
                return Err(UrdfError::UnsupportedJoint {
                    joint: name,
                    kind: other.to_string(),
                    at: self.at(node),
                })
            }
        };
        let link_ref = |tag: &'static str| -> Result<String, UrdfError> {
            let c = child(node, tag).ok_or_else(|| UrdfError::MissingElement {
                element: "joint".into(),
                child: tag,
                at: self.at(node),
            })?;
            Ok(self.required(c, "link")?.to_string())
        };
        let parent = link_ref("parent")?;
        let child_link = link_ref("child")?;
        let origin = self.origin(node)?;

        let mut axis = Vector3::x();
        let mut limit = None;
        for c in node.children().filter(Node::is_element) {
            match c.tag_name().name() {
                "origin" | "parent" | "child" => {}
                "axis" => {
                    let raw = self.triple(c, "xyz", Vector3::x())?;
                    let norm = raw.norm();
                    if norm == 0.0 {
                        return Err(UrdfError::ZeroAxis {
                            joint: name,
                            at: self.at(c),
                        });
                    }
                    axis = raw / norm;
                }
                "limit" => {
                    limit = Some(JointLimits {
                        lower: self.optional_number(c, "lower", 0.0)?,
                        upper: self.optional_number(c, "upper", 0.0)?,
                        effort: self.optional_number(c, "effort", 0.0)?,
                        velocity: self.optional_number(c, "velocity", 0.0)?,
                    })
                }
                _ => self.skip(c),
            }
        }
        Ok(UrdfJoint {
            name,
            kind,
            parent,
            child: child_link,
            origin,
            axis,
            limit,
            location: self.at(node),
        })
    }
}

fn child<'a, 'input>(node: Node<'a, 'input>, tag: &str) -> Option<Node<'a, 'input>> {
    node.children()
        .find(|c| c.is_element() && c.tag_name().name() == tag)
}

/// Parses URDF text. Structural validation (names, roots, cycles) happens in
/// [`UrdfDocument::to_model`].
pub fn parse_urdf(text: &str) -> Result<UrdfDocument, UrdfError> {
    let doc = Document::parse(text).map_err(|e| {
        let pos = e.pos();
        UrdfError::Xml {
            message: e.to_string(),
            at: Location {
                line: pos.row,
                column: pos.col,
            },
        }
    })?;
    let root = doc.root_element();
    if root.tag_name().name() != "robot" {
        return Err(UrdfError::NotRobot(root.tag_name().name().to_string()));
    }
    let mut reader = Reader {
        doc: &doc,
        warnings: Vec::new(),
    };
    let name = root.attribute("name").unwrap_or_default().to_string();
    let mut links = Vec::new();
    let mut joints = Vec::new();
    for node in root.children().filter(Node::is_element) {
        match node.tag_name().name() {
            "link" => links.push(reader.link(node)?),
            "joint" => joints.push(reader.joint(node)?),
            _ => reader.skip(node),
        }
    }
    let out = UrdfDocument {
        name,
        links,
        joints,
        warnings: reader.warnings,
    };
    out.check_inertials()?;
    Ok(out)
}

impl UrdfDocument {
    /// A moving joint's body is its child link plus everything welded to it;
    /// at least one of those links must declare an inertial.
    fn check_inertials(&self) -> Result<(), UrdfError> {
        let by_name: HashMap<&str, &UrdfLink> =
            self.links.iter().map(|l| (l.name.as_str(), l)).collect();
        let mut welded: HashMap<&str, Vec<&str>> = HashMap::new();
        for j in self
            .joints
            .iter()
            .filter(|j| j.kind == UrdfJointType::Fixed)
        {
            welded
                .entry(j.parent.as_str())
                .or_default()
                .push(j.child.as_str());
        }
        for j in self
            .joints
            .iter()
            .filter(|j| j.kind != UrdfJointType::Fixed)
        {
            let Some(link) = by_name.get(j.child.as_str()) else {
                continue;
            };
            let mut stack = vec![link.name.as_str()];
            let mut seen = 0;
            let mut massive = false;
            while let Some(name) = stack.pop() {
                seen += 1;
                if seen > self.links.len() {
                    break;
                }
                if by_name.get(name).is_some_and(|l| l.inertial.is_some()) {
                    massive = true;
                    break;
                }
                stack.extend(welded.get(name).into_iter().flatten());
            }
            if !massive {
                return Err(UrdfError::MissingInertial {
                    link: link.name.clone(),
                    joint: j.name.clone(),
                    at: link.location,
                });
            }
        }
        Ok(())
    }

    pub fn moving_joint_count(&self) -> usize {
        self.joints
            .iter()
            .filter(|j| j.kind != UrdfJointType::Fixed)
            .count()
    }

    pub fn to_description(&self) -> Result<ModelDescription, UrdfError> {
        let mut desc = ModelDescription::new(self.name.clone());
        for link in &self.links {
            let inertia = match &link.inertial {
                Some(i) => Some(i.to_spatial().map_err(|source| UrdfError::Inertia {
                    link: link.name.clone(),
                    at: link.location,
                    source,
                })?),
                None => None,
            };
            desc.links.push(LinkSpec {
                name: link.name.clone(),
                inertia,
            });
        }
        for j in &self.joints {
            let kind = match j.kind {
                UrdfJointType::Revolute | UrdfJointType::Continuous => {
                    JointKind::Revolute { axis: j.axis }
                }
                UrdfJointType::Prismatic => JointKind::Prismatic { axis: j.axis },
                UrdfJointType::Fixed => JointKind::Fixed,
            };
            desc.joints.push(JointSpec {
                name: j.name.clone(),
                kind,
                parent: j.parent.clone(),
                child: j.child.clone(),
                origin: j.origin.to_transform(),
                limits: j.limit,
            });
        }
        Ok(desc)
    }

    pub fn to_model(&self) -> Result<RobotModel, UrdfError> {
        Ok(self.to_description()?.build()?)
    }
}

/// Parses and builds in one step.
pub fn load_urdf(text: &str) -> Result<RobotModel, UrdfError> {
    parse_urdf(text)?.to_model()
}

fn write_triple(out: &mut String, attribute: &str, v: &Vector3<f64>) {
    let _ = write!(out, " {attribute}=\"{} {} {}\"", v.x, v.y, v.z);
}

fn write_origin(out: &mut String, indent: &str, o: &Origin) {
    let _ = write!(out, "{indent}<origin");
    write_triple(out, "xyz", &o.xyz);
    write_triple(out, "rpy", &o.rpy);
    out.push_str("/>\n");
}

/// Serializes the recognized subset. Numbers use shortest round-trip
/// formatting, so `parse(to_urdf_string(d))` reproduces `d` apart from
/// warnings and source locations.
pub fn to_urdf_string(doc: &UrdfDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<?xml version=\"1.0\"?>\n<robot name=\"{}\">",
        escape(&doc.name)
    );
    for link in &doc.links {
        let _ = write!(out, "  <link name=\"{}\"", escape(&link.name));
        match &link.inertial {
            None => out.push_str("/>\n"),
            Some(i) => {
                out.push_str(">\n    <inertial>\n");
                write_origin(&mut out, "      ", &i.origin);
                let m = &i.inertia;
                let _ = writeln!(out, "      <mass value=\"{}\"/>", i.mass);
                let _ = writeln!(
                    out,
                    "      <inertia ixx=\"{}\" ixy=\"{}\" ixz=\"{}\" iyy=\"{}\" iyz=\"{}\" izz=\"{}\"/>",
                    m[(0, 0)], m[(0, 1)], m[(0, 2)], m[(1, 1)], m[(1, 2)], m[(2, 2)]
                );
                out.push_str("    </inertial>\n  </link>\n");
            }
        }
    }
    for j in &doc.joints {
        let _ = writeln!(
            out,
            "  <joint name=\"{}\" type=\"{}\">",
            escape(&j.name),
            j.kind.as_str()
        );
        let _ = writeln!(out, "    <parent link=\"{}\"/>", escape(&j.parent));
        let _ = writeln!(out, "    <child link=\"{}\"/>", escape(&j.child));
        write_origin(&mut out, "    ", &j.origin);
        out.push_str("    <axis");
        write_triple(&mut out, "xyz", &j.axis);
        out.push_str("/>\n");
        if let Some(l) = &j.limit {
            let _ = writeln!(
                out,
                "    <limit lower=\"{}\" upper=\"{}\" effort=\"{}\" velocity=\"{}\"/>",
                l.lower, l.upper, l.effort, l.velocity
            );
        }
        out.push_str("  </joint>\n");
    }
    out.push_str("</robot>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const MINIMAL: &str = r#"<robot name="one">
  <link name="base"/>
  <link name="arm">
    <inertial><mass value="1.0"/><inertia ixx="0.1" iyy="0.1" izz="0.1"/></inertial>
    <visual><geometry><box size="1 1 1"/></geometry></visual>
  </link>
  <joint name="j1" type="continuous">
    <parent link="base"/><child link="arm"/>
    <axis xyz="0 0 2"/>
  </joint>
  <transmission name="t"/>
</robot>"#;

    #[test]
    fn minimal_document() {
        let doc = parse_urdf(MINIMAL).unwrap();
        assert_eq!(doc.name, "one");
        assert_eq!(doc.joints[0].kind, UrdfJointType::Continuous);
        assert_eq!(doc.joints[0].axis, Vector3::z());
        let skipped: Vec<&str> = doc.warnings.iter().map(|w| w.element.as_str()).collect();
        assert_eq!(skipped, ["visual", "transmission"]);
        let model = doc.to_model().unwrap();
        assert_eq!(model.n_dof(), 1);
    }

    #[test]
    fn rpy_examples() {
        assert_eq!(rpy_to_rotation(0.0, 0.0, 0.0), Matrix3::identity());
        let r = rpy_to_rotation(0.0, 0.0, std::f64::consts::FRAC_PI_2);
        assert_relative_eq!(r * Vector3::x(), Vector3::y(), epsilon = 1e-15);
        // Elementary matrices written out by hand.
        let (roll, pitch, yaw) = (0.3_f64, -1.1_f64, 2.4_f64);
        let rx = Matrix3::new(
            1.0,
            0.0,
            0.0,
            0.0,
            roll.cos(),
            -roll.sin(),
            0.0,
            roll.sin(),
            roll.cos(),
        );
        let ry = Matrix3::new(
            pitch.cos(),
            0.0,
            pitch.sin(),
            0.0,
            1.0,
            0.0,
            -pitch.sin(),
            0.0,
            pitch.cos(),
        );
        let rz = Matrix3::new(
            yaw.cos(),
            -yaw.sin(),
            0.0,
            yaw.sin(),
            yaw.cos(),
            0.0,
            0.0,
            0.0,
            1.0,
        );
        assert_relative_eq!(
            rpy_to_rotation(roll, pitch, yaw),
            rz * ry * rx,
            epsilon = 1e-15
        );
    }

    #[test]
    fn malformed_xml_is_located() {
        let err = parse_urdf("<robot name=\"x\">\n  <link name=\"a\">\n</robot>").unwrap_err();
        match err {
            UrdfError::Xml { at, .. } => assert_eq!(at.line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unsupported_joint_types() {
        for kind in ["planar", "floating"] {
            let text = format!(
                r#"<robot name="r"><link name="a"/><link name="b"/>
                <joint name="j" type="{kind}"><parent link="a"/><child link="b"/></joint></robot>"#
            );
            assert!(matches!(
                parse_urdf(&text),
                Err(UrdfError::UnsupportedJoint { kind: k, at: Location { line: 2, .. }, .. }) if k == kind
            ));
        }
    }

    #[test]
    fn missing_inertial_names_the_link() {
        let text = r#"<robot name="r"><link name="a"/><link name="b"/>
            <joint name="j" type="revolute"><parent link="a"/><child link="b"/></joint></robot>"#;
        assert!(matches!(
            parse_urdf(text),
            Err(UrdfError::MissingInertial { link, .. }) if link == "b"
        ));
        // Mass welded onto the moving body is enough.
        let welded = r#"<robot name="r"><link name="a"/><link name="b"/>
            <link name="c"><inertial><mass value="1"/><inertia ixx="1" iyy="1" izz="1"/></inertial></link>
            <joint name="j" type="revolute"><parent link="a"/><child link="b"/></joint>
            <joint name="w" type="fixed"><parent link="b"/><child link="c"/></joint></robot>"#;
        assert_eq!(load_urdf(welded).unwrap().n_dof(), 1);
    }

    #[test]
    fn cycle_fails_to_build() {
        let text = r#"<robot name="r">
            <link name="base"/>
            <link name="a"><inertial><mass value="1"/><inertia ixx="1" iyy="1" izz="1"/></inertial></link>
            <link name="b"><inertial><mass value="1"/><inertia ixx="1" iyy="1" izz="1"/></inertial></link>
            <joint name="j0" type="revolute"><parent link="base"/><child link="a"/></joint>
            <joint name="j1" type="revolute"><parent link="a"/><child link="b"/></joint>
            <joint name="j2" type="revolute"><parent link="b"/><child link="a"/></joint></robot>"#;
        assert!(matches!(load_urdf(text), Err(UrdfError::Model(_))));
    }

    #[test]
    fn bad_numbers_and_attributes() {
        let text = r#"<robot name="r"><link name="a"><inertial><mass value="heavy"/><inertia/></inertial></link></robot>"#;
        assert!(matches!(
            parse_urdf(text),
            Err(UrdfError::InvalidNumber { .. })
        ));
        let text = r#"<robot name="r"><link/></robot>"#;
        assert!(matches!(
            parse_urdf(text),
            Err(UrdfError::MissingAttribute {
                attribute: "name",
                ..
            })
        ));
        let text = r#"<robot name="r"><link name="a"><inertial><mass value="-1"/><inertia ixx="1" iyy="1" izz="1"/></inertial></link></robot>"#;
        assert!(matches!(parse_urdf(text), Err(UrdfError::Inertia { .. })));
        assert!(matches!(
            parse_urdf("<model/>"),
            Err(UrdfError::NotRobot(_))
        ));
    }

    #[test]
    fn inertial_origin_rotates_tensor() {
        let text = r#"<robot name="r"><link name="a"><inertial>
            <origin xyz="0.1 0 0" rpy="0 0 1.5707963267948966"/>
            <mass value="2"/><inertia ixx="1" iyy="3" izz="5"/></inertial></link></robot>"#;
        let doc = parse_urdf(text).unwrap();
        let spatial = doc.links[0].inertial.unwrap().to_spatial().unwrap();
        let expected = SpatialInertia::from_params(
            2.0,
            Vector3::new(0.1, 0.0, 0.0),
            Matrix3::from_diagonal(&Vector3::new(3.0, 1.0, 5.0)),
        )
        .unwrap();
        assert_relative_eq!(spatial.to_matrix6(), expected.to_matrix6(), epsilon = 1e-12);
    }

    #[test]
    fn roundtrip_is_idempotent() {
        let doc = parse_urdf(MINIMAL).unwrap();
        let strip = |mut d: UrdfDocument| {
            d.warnings.clear();
            for l in &mut d.links {
                l.location = Location::default();
            }
            for j in &mut d.joints {
                j.location = Location::default();
            }
            d
        };
        let once = strip(parse_urdf(&to_urdf_string(&doc)).unwrap());
        assert_eq!(once, strip(doc));
        let twice = strip(parse_urdf(&to_urdf_string(&once)).unwrap());
        assert_eq!(twice, once);
        assert_eq!(to_urdf_string(&once), to_urdf_string(&twice));
    }
}
