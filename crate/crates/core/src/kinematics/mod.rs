//! Serial manipulator models built from elementary homogeneous transforms.
//!
//! A model is a flat, ordered chain of translations and rotations about the
//! principal axes. Each element is driven by a constant, a joint variable
//! (optionally shifted by an offset parameter), or a geometric parameter.
//! Base transforms come first in the chain and tool transforms last; the
//! end-effector point is the origin of the final frame.
//!
//! Only the position of that point is modelled. Parameter vectors always
//! carry every parameter of the model, in table order; the identifiability
//! mask selects which of them become Jacobian columns.

pub(crate) mod jacobian;
mod model_file;

pub use jacobian::{finite_difference_jacobian, identification_jacobian, FD_EPS_ABS, FD_EPS_REL};
pub use model_file::{parse_model, write_model};

use nalgebra::{DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Joint values of one manipulator configuration (radians for revolute joints,
/// meters for prismatic ones).
pub type Configuration = Vec<f64>;

/// End-effector position in meters.
pub type Position = Vector3<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransformKind {
    Translation,
    Rotation,
}

/// Physical unit of a parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unit {
    Meter,
    Radian,
}

impl TransformKind {
    fn unit(self) -> Unit {
        match self {
            TransformKind::Translation => Unit::Meter,
            TransformKind::Rotation => Unit::Radian,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Driver {
    Constant(f64),
    Joint { index: usize, offset: Option<usize> },
    Parameter(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementaryTransform {
    pub kind: TransformKind,
    pub axis: Axis,
    pub driver: Driver,
}

impl ElementaryTransform {
    pub fn new(kind: TransformKind, axis: Axis, driver: Driver) -> Self {
        Self { kind, axis, driver }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parameter {
    pub name: String,
    pub nominal: f64,
    pub unit: Unit,
    pub identifiable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointLimit {
    pub min: f64,
    pub max: f64,
}

impl JointLimit {
    pub fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.min, self.max)
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

/// Validated serial chain. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct KinematicModel {
    chain: Vec<ElementaryTransform>,
    parameters: Vec<Parameter>,
    joint_limits: Vec<JointLimit>,
    identifiable: Vec<usize>,
    column_of: Vec<Option<usize>>,
}

impl KinematicModel {
    /// Builds a model, checking that every joint is driven exactly once,
    /// every parameter is used exactly once with a matching unit, constants
    /// are finite, and limits are well formed.
    pub fn new(
        chain: Vec<ElementaryTransform>,
        parameters: Vec<Parameter>,
        joint_limits: Vec<JointLimit>,
    ) -> Result<Self> {
        let n_joints = joint_limits.len();
        if n_joints == 0 {
            return Err(Error::input("model must declare at least one joint"));
        }
        let mut joint_seen = vec![false; n_joints];
        let mut param_seen = vec![false; parameters.len()];

        let claim_param = |idx: usize, expected: Unit, seen: &mut Vec<bool>| -> Result<()> {
            let p = parameters
                .get(idx)
                .ok_or_else(|| Error::input(format!("parameter index {idx} is out of range")))?;
            if seen[idx] {
                return Err(Error::input(format!(
                    "parameter `{}` is used by more than one transform",
                    p.name
                )));
            }
            if p.unit != expected {
                return Err(Error::input(format!(
                    "parameter `{}` has unit {:?} but drives a {:?} quantity",
                    p.name, p.unit, expected
                )));
            }
            seen[idx] = true;
            Ok(())
        };

        for t in &chain {
            match t.driver {
                Driver::Constant(v) => {
                    if !v.is_finite() {
                        return Err(Error::input("constant transform value is not finite"));
                    }
                }
                Driver::Joint { index, offset } => {
                    if index >= n_joints {
                        return Err(Error::input(format!(
                            "joint index {index} exceeds joint count {n_joints}"
                        )));
                    }
                    if joint_seen[index] {
                        return Err(Error::input(format!(
                            "joint {index} is driven by more than one transform"
                        )));
                    }
                    joint_seen[index] = true;
                    if let Some(p) = offset {
                        claim_param(p, t.kind.unit(), &mut param_seen)?;
                    }
                }
                Driver::Parameter(p) => claim_param(p, t.kind.unit(), &mut param_seen)?,
            }
        }
        if let Some(j) = joint_seen.iter().position(|s| !s) {
            return Err(Error::input(format!(
                "joint {j} is not driven by any transform"
            )));
        }
        if let Some(p) = param_seen.iter().position(|s| !s) {
            return Err(Error::input(format!(
                "parameter `{}` is not used by any transform",
                parameters[p].name
            )));
        }
        for (i, p) in parameters.iter().enumerate() {
            if !p.nominal.is_finite() {
                return Err(Error::input(format!(
                    "parameter `{}` nominal is not finite",
                    p.name
                )));
            }
            if parameters[..i].iter().any(|q| q.name == p.name) {
                return Err(Error::input(format!(
                    "duplicate parameter name `{}`",
                    p.name
                )));
            }
        }
        for (j, lim) in joint_limits.iter().enumerate() {
            if !(lim.min.is_finite() && lim.max.is_finite() && lim.min < lim.max) {
                return Err(Error::input(format!(
                    "joint {j} limits [{}, {}] are degenerate",
                    lim.min, lim.max
                )));
            }
        }

        let identifiable = parameters
            .iter()
            .enumerate()
            .filter(|(_, p)| p.identifiable)
            .map(|(i, _)| i)
            .collect::<Vec<_>>();
        let mut column_of = vec![None; parameters.len()];
        for (col, &i) in identifiable.iter().enumerate() {
            column_of[i] = Some(col);
        }
        Ok(Self {
            chain,
            parameters,
            joint_limits,
            identifiable,
            column_of,
        })
    }

    pub fn chain(&self) -> &[ElementaryTransform] {
        &self.chain
    }

    pub fn parameters(&self) -> &[Parameter] {
        &self.parameters
    }

    pub fn joint_limits(&self) -> &[JointLimit] {
        &self.joint_limits
    }

    pub fn n_joints(&self) -> usize {
        self.joint_limits.len()
    }

    pub fn n_parameters(&self) -> usize {
        self.parameters.len()
    }

    /// Indices (into the full parameter table) of the identifiable
    /// parameters, in table order. These are the Jacobian columns.
    pub fn identifiable_indices(&self) -> &[usize] {
        &self.identifiable
    }

    /// Jacobian column of parameter `i`, if it is identifiable.
    pub fn column_of(&self, i: usize) -> Option<usize> {
        self.column_of.get(i).copied().flatten()
    }

    pub fn n_identifiable(&self) -> usize {
        self.identifiable.len()
    }

    pub fn identifiable_names(&self) -> Vec<String> {
        self.identifiable
            .iter()
            .map(|&i| self.parameters[i].name.clone())
            .collect()
    }

    pub fn parameter_index(&self, name: &str) -> Option<usize> {
        self.parameters.iter().position(|p| p.name == name)
    }

    pub fn nominal_parameters(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.parameters.len(),
            self.parameters.iter().map(|p| p.nominal),
        )
    }

    /// Returns a copy with a new identifiability mask (one flag per parameter).
    pub fn with_identifiable_mask(&self, mask: &[bool]) -> Result<Self> {
        if mask.len() != self.parameters.len() {
            return Err(Error::Dimension {
                what: "identifiability mask",
                expected: self.parameters.len(),
                actual: mask.len(),
            });
        }
        let mut params = self.parameters.clone();
        for (p, &m) in params.iter_mut().zip(mask) {
            p.identifiable = m;
        }
        Self::new(self.chain.clone(), params, self.joint_limits.clone())
    }

    /// Returns a copy with replaced joint limits.
    pub fn with_joint_limits(&self, limits: Vec<JointLimit>) -> Result<Self> {
        if limits.len() != self.n_joints() {
            return Err(Error::Dimension {
                what: "joint limits",
                expected: self.n_joints(),
                actual: limits.len(),
            });
        }
        Self::new(self.chain.clone(), self.parameters.clone(), limits)
    }

    pub fn check_params(&self, params: &DVector<f64>) -> Result<()> {
        if params.len() != self.parameters.len() {
            return Err(Error::Dimension {
                what: "parameter vector",
                expected: self.parameters.len(),
                actual: params.len(),
            });
        }
        Ok(())
    }

    pub fn check_configuration(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.n_joints() {
            return Err(Error::Dimension {
                what: "configuration",
                expected: self.n_joints(),
                actual: q.len(),
            });
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::input(
                "configuration contains non-finite joint values",
            ));
        }
        Ok(())
    }

    pub fn within_limits(&self, q: &[f64]) -> bool {
        q.len() == self.n_joints()
            && q.iter()
                .zip(&self.joint_limits)
                .all(|(v, l)| l.contains(*v))
    }

    /// Value taken by transform `t` for the given parameters and joints.
    #[inline]
    pub(crate) fn transform_value(
        &self,
        t: &ElementaryTransform,
        params: &[f64],
        q: &[f64],
    ) -> f64 {
        match t.driver {
            Driver::Constant(v) => v,
            Driver::Joint { index, offset } => q[index] + offset.map_or(0.0, |p| params[p]),
            Driver::Parameter(p) => params[p],
        }
    }
}

/// Right-multiplies the rotation `r` by an elementary rotation about `axis`.
#[inline]
pub(crate) fn rotate_in_place(r: &mut Matrix3<f64>, axis: Axis, angle: f64) {
    let (s, c) = angle.sin_cos();
    let (a, b) = match axis {
        Axis::X => (1, 2),
        Axis::Y => (2, 0),
        Axis::Z => (0, 1),
    };
    let ca: Vector3<f64> = r.column(a).into();
    let cb: Vector3<f64> = r.column(b).into();
    r.set_column(a, &(ca * c + cb * s));
    r.set_column(b, &(cb * c - ca * s));
}

/// Position of the end-effector point for the given parameters and joints.
pub fn forward_position(
    model: &KinematicModel,
    params: &DVector<f64>,
    q: &[f64],
) -> Result<Position> {
    model.check_params(params)?;
    model.check_configuration(q)?;
    Ok(forward_position_unchecked(model, params.as_slice(), q))
}

pub(crate) fn forward_position_unchecked(
    model: &KinematicModel,
    params: &[f64],
    q: &[f64],
) -> Position {
    let mut r = Matrix3::identity();
    let mut p = Vector3::zeros();
    for t in &model.chain {
        let v = model.transform_value(t, params, q);
        match t.kind {
            TransformKind::Translation => p += r.column(t.axis.index()) * v,
            TransformKind::Rotation => rotate_in_place(&mut r, t.axis, v),
        }
    }
    p
}

/// Adds an identification step to the current parameter estimate.
///
/// `delta` has one entry per identifiable parameter. Joint-offset
/// parameters are corrected like any other parameter; measured joint
/// readings are never touched.
pub fn apply_parameter_update(
    model: &KinematicModel,
    params: &DVector<f64>,
    delta: &DVector<f64>,
) -> Result<DVector<f64>> {
    model.check_params(params)?;
    if delta.len() != model.n_identifiable() {
        return Err(Error::Dimension {
            what: "parameter update",
            expected: model.n_identifiable(),
            actual: delta.len(),
        });
    }
    let mut out = params.clone();
    for (k, &i) in model.identifiable.iter().enumerate() {
        out[i] += delta[k];
    }
    Ok(out)
}
