//! URDF kinematic trees.
//!
//! Only the kinematic subset of URDF is interpreted: `<link name>`,
//! `<joint name type>` with `<origin>`, `<axis>`, `<parent>`, `<child>` and
//! `<limit>`. Visual, collision, inertial, mimic and any other elements are
//! skipped so that real robot descriptions load unchanged.

use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::transforms::{sixdof_to_transform, SixDofParams, Transform4};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UrdfError {
    #[error("malformed XML: {0}")]
    Xml(String),
    #[error("root element is <{0}>, expected <robot>")]
    NotARobot(String),
    #[error("<{element}> is missing required attribute `{attribute}`")]
    MissingAttribute { element: String, attribute: String },
    #[error("joint `{joint}` is missing its <{element}> element")]
    MissingElement { joint: String, element: String },
    #[error("<{element}> attribute `{attribute}` has invalid value `{value}`")]
    InvalidAttribute {
        element: String,
        attribute: String,
        value: String,
    },
    #[error("joint `{joint}` has unknown type `{kind}`")]
    UnknownJointType { joint: String, kind: String },
    #[error("duplicate link name `{0}`")]
    DuplicateLink(String),
    #[error("duplicate joint name `{0}`")]
    DuplicateJoint(String),
    #[error("joint `{joint}` references undeclared link `{link}`")]
    UndeclaredLink { joint: String, link: String },
    #[error("joint `{joint}` attaches to joint `{other}`; joints must connect links")]
    JointFollowsJoint { joint: String, other: String },
    #[error("joint `{0}` has a zero-length axis")]
    ZeroAxis(String),
    #[error("joint `{joint}` has lower limit {lower} above upper limit {upper}")]
    InvertedLimits { joint: String, lower: f64, upper: f64 },
    #[error("link `{link}` has more than one parent joint (`{first}`, `{second}`)")]
    MultipleParents {
        link: String,
        first: String,
        second: String,
    },
    #[error("joint `{0}` connects a link to itself")]
    SelfLoop(String),
    #[error("robot has no links")]
    Empty,
    #[error("kinematic graph has no root link (cycle through `{0}`)")]
    Cycle(String),
    #[error("link `{0}` is not connected to root link `{1}`")]
    Disconnected(String, String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("unknown link `{0}`")]
    UnknownLink(String),
    #[error("link `{end}` is not reachable downward from `{base}`")]
    NotReachable { base: String, end: String },
    #[error("link `{0}` is the root and has no parent joint")]
    RootLink(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum JointType {
    Revolute,
    Continuous,
    Prismatic,
    Fixed,
    Planar,
    Floating,
}

impl JointType {
    pub const ALL: [JointType; 6] = [
        JointType::Revolute,
        JointType::Continuous,
        JointType::Prismatic,
        JointType::Fixed,
        JointType::Planar,
        JointType::Floating,
    ];

    pub const fn dof(self) -> usize {
        match self {
            JointType::Fixed => 0,
            JointType::Revolute | JointType::Continuous | JointType::Prismatic => 1,
            JointType::Planar => 2,
            JointType::Floating => 6,
        }
    }

    /// Whether the joint's motion is defined by its `<axis>`.
    pub const fn uses_axis(self) -> bool {
        matches!(
            self,
            JointType::Revolute | JointType::Continuous | JointType::Prismatic | JointType::Planar
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            JointType::Revolute => "revolute",
            JointType::Continuous => "continuous",
            JointType::Prismatic => "prismatic",
            JointType::Fixed => "fixed",
            JointType::Planar => "planar",
            JointType::Floating => "floating",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        JointType::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

impl fmt::Display for JointType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointLimits {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Joint {
    pub name: String,
    pub joint_type: JointType,
    pub parent_link: String,
    pub child_link: String,
    pub origin_xyz: [f64; 3],
    pub origin_rpy: [f64; 3],
    /// Unit length.
    pub axis: [f64; 3],
    pub limits: Option<JointLimits>,
    /// Initial parameter estimate recorded by [`substitute_link_with_joint`].
    pub origin_hint: Option<SixDofParams>,
}

impl Joint {
    pub fn dof(&self) -> usize {
        self.joint_type.dof()
    }

    pub fn origin_params(&self) -> SixDofParams {
        SixDofParams::from_xyz_rpy(self.origin_xyz, self.origin_rpy)
    }

    /// Static transform from the parent link frame to the joint frame.
    pub fn origin_transform(&self) -> Transform4 {
        sixdof_to_transform(&self.origin_params())
    }

    /// In-plane translation directions `(u, v)` of a planar joint.
    pub fn planar_basis(&self) -> ([f64; 3], [f64; 3]) {
        planar_basis(self.axis)
    }
}

/// Orthonormal completion `(u, v)` of a unit `axis` with `u × v = axis`.
///
/// `u` is Gram–Schmidt of the coordinate axis on which `axis` has the smallest
/// magnitude (lowest index on ties); `v = axis × u`.
pub fn planar_basis(axis: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let k = (0..3).fold(0, |best, i| {
        if axis[i].abs() < axis[best].abs() {
            i
        } else {
            best
        }
    });
    let mut u = [0.0; 3];
    u[k] = 1.0;
    let d = axis[k];
    for i in 0..3 {
        u[i] -= d * axis[i];
    }
    let n = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    for c in &mut u {
        *c /= n;
    }
    let v = [
        axis[1] * u[2] - axis[2] * u[1],
        axis[2] * u[0] - axis[0] * u[2],
        axis[0] * u[1] - axis[1] * u[0],
    ];
    (u, v)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Link {
    pub name: String,
}

/// A validated kinematic tree. Immutable once built.
#[derive(Clone, Debug)]
pub struct RobotModel {
    name: String,
    links: Vec<Link>,
    joints: Vec<Joint>,
    root_link: String,
    link_index: HashMap<String, usize>,
    joint_index: HashMap<String, usize>,
    /// link name -> index of the joint whose child it is
    parent_joint: HashMap<String, usize>,
    /// link name -> indices of joints it is the parent of
    child_joints: HashMap<String, Vec<usize>>,
}

impl RobotModel {
    /// Validates links and joints into a tree.
    pub fn new(name: String, links: Vec<Link>, joints: Vec<Joint>) -> Result<Self, UrdfError> {
        if links.is_empty() {
            return Err(UrdfError::Empty);
        }
        let mut link_index = HashMap::new();
        for (i, l) in links.iter().enumerate() {
            if link_index.insert(l.name.clone(), i).is_some() {
                return Err(UrdfError::DuplicateLink(l.name.clone()));
            }
        }
        let mut joint_index = HashMap::new();
        for (i, j) in joints.iter().enumerate() {
            if joint_index.insert(j.name.clone(), i).is_some() {
                return Err(UrdfError::DuplicateJoint(j.name.clone()));
            }
        }

        let mut parent_joint: HashMap<String, usize> = HashMap::new();
        let mut child_joints: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, j) in joints.iter().enumerate() {
            for link in [&j.parent_link, &j.child_link] {
                if !link_index.contains_key(link) {
                    if joint_index.contains_key(link) {
                        return Err(UrdfError::JointFollowsJoint {
                            joint: j.name.clone(),
                            other: link.clone(),
                        });
                    }
                    return Err(UrdfError::UndeclaredLink {
                        joint: j.name.clone(),
                        link: link.clone(),
                    });
                }
            }
            if j.parent_link == j.child_link {
                return Err(UrdfError::SelfLoop(j.name.clone()));
            }
            if let Some(&prev) = parent_joint.get(&j.child_link) {
                return Err(UrdfError::MultipleParents {
                    link: j.child_link.clone(),
                    first: joints[prev].name.clone(),
                    second: j.name.clone(),
                });
            }
            parent_joint.insert(j.child_link.clone(), i);
            child_joints.entry(j.parent_link.clone()).or_default().push(i);
        }

        let roots: Vec<&Link> = links
            .iter()
            .filter(|l| !parent_joint.contains_key(&l.name))
            .collect();
        let root_link = match roots.as_slice() {
            [] => return Err(UrdfError::Cycle(links[0].name.clone())),
            [root] => root.name.clone(),
            [root, other, ..] => {
                return Err(UrdfError::Disconnected(
                    other.name.clone(),
                    root.name.clone(),
                ))
            }
        };

        // Single root and at most one parent each: any link unreachable from
        // the root sits on a cycle.
        let mut seen = HashSet::new();
        let mut stack = vec![root_link.as_str()];
        while let Some(l) = stack.pop() {
            seen.insert(l);
            for &ji in child_joints.get(l).into_iter().flatten() {
                stack.push(joints[ji].child_link.as_str());
            }
        }
        if let Some(l) = links.iter().find(|l| !seen.contains(l.name.as_str())) {
            return Err(UrdfError::Cycle(l.name.clone()));
        }

        Ok(Self {
            name,
            links,
            joints,
            root_link,
            link_index,
            joint_index,
            parent_joint,
            child_joints,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn root_link(&self) -> &str {
        &self.root_link
    }

    pub fn has_link(&self, name: &str) -> bool {
        self.link_index.contains_key(name)
    }

    pub fn joint(&self, name: &str) -> Option<&Joint> {
        self.joint_index.get(name).map(|&i| &self.joints[i])
    }

    /// The joint whose child is `link`, if any.
    pub fn parent_joint(&self, link: &str) -> Option<&Joint> {
        self.parent_joint.get(link).map(|&i| &self.joints[i])
    }

    pub fn child_joints(&self, link: &str) -> impl Iterator<Item = &Joint> {
        self.child_joints
            .get(link)
            .into_iter()
            .flatten()
            .map(move |&i| &self.joints[i])
    }

    pub fn total_dof(&self) -> usize {
        self.joints.iter().map(Joint::dof).sum()
    }

    /// Links without children, in declaration order.
    pub fn leaf_links(&self) -> Vec<&str> {
        self.links
            .iter()
            .filter(|l| !self.child_joints.contains_key(&l.name))
            .map(|l| l.name.as_str())
            .collect()
    }

    /// Root-to-leaf chains, one per leaf.
    pub fn leaf_chains(&self) -> Vec<KinematicChain> {
        self.leaf_links()
            .into_iter()
            .map(|leaf| {
                extract_chain(self, &self.root_link, leaf).expect("leaves are reachable from root")
            })
            .collect()
    }

    /// Same tree with a joint replaced; used by substitution.
    fn with_joint(&self, index: usize, joint: Joint) -> Self {
        let mut joints = self.joints.clone();
        joints[index] = joint;
        Self {
            joints,
            ..self.clone()
        }
    }

    /// Compares names, topology and numeric fields within `tol`.
    pub fn structurally_equal(&self, other: &RobotModel, tol: f64) -> bool {
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol);
        self.name == other.name
            && self.root_link == other.root_link
            && self.links == other.links
            && self.joints.len() == other.joints.len()
            && self.joints.iter().zip(&other.joints).all(|(a, b)| {
                a.name == b.name
                    && a.joint_type == b.joint_type
                    && a.parent_link == b.parent_link
                    && a.child_link == b.child_link
                    && close(&a.origin_xyz, &b.origin_xyz)
                    && close(&a.origin_rpy, &b.origin_rpy)
                    && close(&a.axis, &b.axis)
                    && match (a.limits, b.limits) {
                        (None, None) => true,
                        (Some(x), Some(y)) => close(&[x.lower, x.upper], &[y.lower, y.upper]),
                        _ => false,
                    }
            })
    }
}

/// One link–joint step of a chain: the static link offset (the joint origin)
/// followed by the joint motion.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainSegment {
    /// Link the segment starts from.
    pub link: String,
    pub joint: Joint,
}

/// Ordered downward path from `base_link` to `end_link`.
#[derive(Clone, Debug, PartialEq)]
pub struct KinematicChain {
    base_link: String,
    end_link: String,
    segments: Vec<ChainSegment>,
}

impl KinematicChain {
    pub fn base_link(&self) -> &str {
        &self.base_link
    }

    pub fn end_link(&self) -> &str {
        &self.end_link
    }

    pub fn segments(&self) -> &[ChainSegment] {
        &self.segments
    }

    pub fn joints(&self) -> impl Iterator<Item = &Joint> {
        self.segments.iter().map(|s| &s.joint)
    }

    /// Number of joints, `n`.
    pub fn n(&self) -> usize {
        self.segments.len()
    }

    /// Total degrees of freedom, `m`.
    pub fn m(&self) -> usize {
        self.joints().map(Joint::dof).sum()
    }

    /// Offset of each joint's first DoF within one configuration.
    pub fn dof_offsets(&self) -> Vec<usize> {
        self.joints()
            .scan(0, |acc, j| {
                let o = *acc;
                *acc += j.dof();
                Some(o)
            })
            .collect()
    }

    /// `(lower, upper)` per DoF, `None` where no limit applies.
    pub fn dof_limits(&self) -> Vec<Option<(f64, f64)>> {
        let mut out = Vec::with_capacity(self.m());
        for j in self.joints() {
            let lim = match (j.joint_type, j.limits) {
                (JointType::Revolute | JointType::Prismatic, Some(l)) => Some((l.lower, l.upper)),
                _ => None,
            };
            out.extend(std::iter::repeat(lim).take(j.dof()));
        }
        out
    }

    /// DoFs of `theta` (one configuration) lying outside their URDF limits.
    pub fn limit_violations(&self, theta: &[f64]) -> Vec<LimitViolation> {
        self.dof_limits()
            .into_iter()
            .zip(theta)
            .enumerate()
            .filter_map(|(dof, (lim, &value))| {
                let (lower, upper) = lim?;
                (value < lower || value > upper).then_some(LimitViolation {
                    dof,
                    value,
                    lower,
                    upper,
                })
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitViolation {
    pub dof: usize,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Downward path from `base_link` to `end_link`.
pub fn extract_chain(
    model: &RobotModel,
    base_link: &str,
    end_link: &str,
) -> Result<KinematicChain, ChainError> {
    for l in [base_link, end_link] {
        if !model.has_link(l) {
            return Err(ChainError::UnknownLink(l.to_string()));
        }
    }
    let mut segments = Vec::new();
    let mut cursor = end_link;
    while cursor != base_link {
        let Some(joint) = model.parent_joint(cursor) else {
            return Err(ChainError::NotReachable {
                base: base_link.to_string(),
                end: end_link.to_string(),
            });
        };
        segments.push(ChainSegment {
            link: joint.parent_link.clone(),
            joint: joint.clone(),
        });
        cursor = &joint.parent_link;
    }
    segments.reverse();
    Ok(KinematicChain {
        base_link: base_link.to_string(),
        end_link: end_link.to_string(),
        segments,
    })
}

/// Replaces the joint leading into `target_link` with a floating joint whose
/// six parameters take over the joint's static origin.
///
/// The new joint has a zero origin; the old origin is kept as
/// [`Joint::origin_hint`]. Any motion the replaced joint had is subsumed by
/// the six free parameters.
pub fn substitute_link_with_joint(
    model: &RobotModel,
    target_link: &str,
) -> Result<RobotModel, ChainError> {
    if !model.has_link(target_link) {
        return Err(ChainError::UnknownLink(target_link.to_string()));
    }
    let index = *model
        .parent_joint
        .get(target_link)
        .ok_or_else(|| ChainError::RootLink(target_link.to_string()))?;
    let old = &model.joints[index];
    let joint = Joint {
        joint_type: JointType::Floating,
        origin_xyz: [0.0; 3],
        origin_rpy: [0.0; 3],
        limits: None,
        origin_hint: Some(old.origin_params()),
        ..old.clone()
    };
    Ok(model.with_joint(index, joint))
}

fn attr<'a>(node: roxmltree::Node<'a, '_>, name: &str) -> Result<&'a str, UrdfError> {
    node.attribute(name)
        .ok_or_else(|| UrdfError::MissingAttribute {
            element: node.tag_name().name().to_string(),
            attribute: name.to_string(),
        })
}

fn parse_triple(node: roxmltree::Node, name: &str, default: [f64; 3]) -> Result<[f64; 3], UrdfError> {
    let Some(raw) = node.attribute(name) else {
        return Ok(default);
    };
    let invalid = || UrdfError::InvalidAttribute {
        element: node.tag_name().name().to_string(),
        attribute: name.to_string(),
        value: raw.to_string(),
    };
    let parts: Vec<f64> = raw
        .split_whitespace()
        .map(|p| p.parse::<f64>().map_err(|_| invalid()))
        .collect::<Result<_, _>>()?;
    match parts.as_slice() {
        [a, b, c] if parts.iter().all(|v| v.is_finite()) => Ok([*a, *b, *c]),
        _ => Err(invalid()),
    }
}

fn parse_scalar(node: roxmltree::Node, name: &str) -> Result<Option<f64>, UrdfError> {
    let Some(raw) = node.attribute(name) else {
        return Ok(None);
    };
    match raw.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(UrdfError::InvalidAttribute {
            element: node.tag_name().name().to_string(),
            attribute: name.to_string(),
            value: raw.to_string(),
        }),
    }
}

fn child_element<'a, 'i>(node: roxmltree::Node<'a, 'i>, tag: &str) -> Option<roxmltree::Node<'a, 'i>> {
    node.children()
        .find(|c| c.is_element() && c.tag_name().name() == tag)
}

fn parse_joint(node: roxmltree::Node) -> Result<Joint, UrdfError> {
    let name = attr(node, "name")?.to_string();
    let kind = attr(node, "type")?;
    let joint_type = JointType::parse(kind).ok_or_else(|| UrdfError::UnknownJointType {
        joint: name.clone(),
        kind: kind.to_string(),
    })?;

    let link_ref = |tag: &str| -> Result<String, UrdfError> {
        let el = child_element(node, tag).ok_or_else(|| UrdfError::MissingElement {
            joint: name.clone(),
            element: tag.to_string(),
        })?;
        Ok(attr(el, "link")?.to_string())
    };
    let parent_link = link_ref("parent")?;
    let child_link = link_ref("child")?;

    let (origin_xyz, origin_rpy) = match child_element(node, "origin") {
        Some(o) => (parse_triple(o, "xyz", [0.0; 3])?, parse_triple(o, "rpy", [0.0; 3])?),
        None => ([0.0; 3], [0.0; 3]),
    };

    let raw_axis = match child_element(node, "axis") {
        Some(a) => parse_triple(a, "xyz", [1.0, 0.0, 0.0])?,
        None => [1.0, 0.0, 0.0],
    };
    let norm = raw_axis.iter().map(|v| v * v).sum::<f64>().sqrt();
    let axis = if norm == 0.0 {
        if joint_type.uses_axis() {
            return Err(UrdfError::ZeroAxis(name));
        }
        [1.0, 0.0, 0.0]
    } else if norm == 1.0 {
        raw_axis
    } else {
        raw_axis.map(|v| v / norm)
    };

    let limits = match child_element(node, "limit") {
        Some(l) => {
            let lower = parse_scalar(l, "lower")?;
            let upper = parse_scalar(l, "upper")?;
            match (lower, upper) {
                (None, None) => None,
                (lower, upper) => {
                    let (lower, upper) = (lower.unwrap_or(0.0), upper.unwrap_or(0.0));
                    if lower > upper {
                        return Err(UrdfError::InvertedLimits {
                            joint: name,
                            lower,
                            upper,
                        });
                    }
                    Some(JointLimits { lower, upper })
                }
            }
        }
        None => None,
    };

    Ok(Joint {
        name,
        joint_type,
        parent_link,
        child_link,
        origin_xyz,
        origin_rpy,
        axis,
        limits,
        origin_hint: None,
    })
}

/// Parses URDF XML into a validated [`RobotModel`].
pub fn parse_urdf(xml_text: &str) -> Result<RobotModel, UrdfError> {
    let doc = roxmltree::Document::parse(xml_text).map_err(|e| UrdfError::Xml(e.to_string()))?;
    let robot = doc.root_element();
    if robot.tag_name().name() != "robot" {
        return Err(UrdfError::NotARobot(robot.tag_name().name().to_string()));
    }
    let name = robot.attribute("name").unwrap_or_default().to_string();

    let mut links = Vec::new();
    let mut joints = Vec::new();
    for node in robot.children().filter(|n| n.is_element()) {
        match node.tag_name().name() {
            "link" => links.push(Link {
                name: attr(node, "name")?.to_string(),
            }),
            "joint" => joints.push(parse_joint(node)?),
            _ => {}
        }
    }
    RobotModel::new(name, links, joints)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn triple(v: &[f64; 3]) -> String {
    format!("{} {} {}", v[0], v[1], v[2])
}

/// Writes the kinematic subset back out as URDF XML.
pub fn to_urdf(model: &RobotModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "<?xml version=\"1.0\"?>");
    let _ = writeln!(out, "<robot name=\"{}\">", escape(&model.name));
    for l in &model.links {
        let _ = writeln!(out, "  <link name=\"{}\"/>", escape(&l.name));
    }
    for j in &model.joints {
        let _ = writeln!(
            out,
            "  <joint name=\"{}\" type=\"{}\">",
            escape(&j.name),
            j.joint_type
        );
        let _ = writeln!(out, "    <parent link=\"{}\"/>", escape(&j.parent_link));
        let _ = writeln!(out, "    <child link=\"{}\"/>", escape(&j.child_link));
        let _ = writeln!(
            out,
            "    <origin xyz=\"{}\" rpy=\"{}\"/>",
            triple(&j.origin_xyz),
            triple(&j.origin_rpy)
        );
        let _ = writeln!(out, "    <axis xyz=\"{}\"/>", triple(&j.axis));
        if let Some(l) = j.limits {
            let _ = writeln!(
                out,
                "    <limit lower=\"{}\" upper=\"{}\" effort=\"0\" velocity=\"0\"/>",
                l.lower, l.upper
            );
        }
        let _ = writeln!(out, "  </joint>");
    }
    let _ = writeln!(out, "</robot>");
    out
}
