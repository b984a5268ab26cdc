//! Reference manipulator models shipped with the crate.

use crate::kinematics::{
    parse_model, Axis, Driver, ElementaryTransform, JointLimit, KinematicModel, Parameter,
    TransformKind, Unit,
};

pub const TWO_LINK: &str = include_str!("../models/two_link.model");
pub const TWO_LINK_OFFSETS: &str = include_str!("../models/two_link_offsets.model");
pub const TWO_LINK_FULL: &str = include_str!("../models/two_link_full.model");
pub const SIX_R: &str = include_str!("../models/six_r.model");

/// All shipped model files as `(file name, contents)`.
pub const SHIPPED: [(&str, &str); 4] = [
    ("two_link.model", TWO_LINK),
    ("two_link_offsets.model", TWO_LINK_OFFSETS),
    ("two_link_full.model", TWO_LINK_FULL),
    ("six_r.model", SIX_R),
];

/// Which geometric parameters of the planar two-link arm are identified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoLinkParameters {
    LinkLengths,
    JointOffsets,
    Both,
}

/// Planar two-link arm with parameter table `(l1, l2, dq1, dq2)`; joints are
/// limited to [-pi, pi].
pub fn two_link(l1: f64, l2: f64, set: TwoLinkParameters) -> KinematicModel {
    let (lengths, offsets) = match set {
        TwoLinkParameters::LinkLengths => (true, false),
        TwoLinkParameters::JointOffsets => (false, true),
        TwoLinkParameters::Both => (true, true),
    };
    let param = |name: &str, nominal, unit, identifiable| Parameter {
        name: name.to_string(),
        nominal,
        unit,
        identifiable,
    };
    let parameters = vec![
        param("l1", l1, Unit::Meter, lengths),
        param("l2", l2, Unit::Meter, lengths),
        param("dq1", 0.0, Unit::Radian, offsets),
        param("dq2", 0.0, Unit::Radian, offsets),
    ];
    let chain = vec![
        ElementaryTransform::new(
            TransformKind::Rotation,
            Axis::Z,
            Driver::Joint {
                index: 0,
                offset: Some(2),
            },
        ),
        ElementaryTransform::new(TransformKind::Translation, Axis::X, Driver::Parameter(0)),
        ElementaryTransform::new(
            TransformKind::Rotation,
            Axis::Z,
            Driver::Joint {
                index: 1,
                offset: Some(3),
            },
        ),
        ElementaryTransform::new(TransformKind::Translation, Axis::X, Driver::Parameter(1)),
    ];
    let pi = std::f64::consts::PI;
    KinematicModel::new(chain, parameters, vec![JointLimit::new(-pi, pi); 2])
        .expect("two-link model is well formed")
}

/// The shipped six-axis arm.
pub fn six_r() -> KinematicModel {
    parse_model(SIX_R, "six_r.model").expect("shipped model parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::forward_position;

    #[test]
    fn shipped_two_link_files_match_builder() {
        let cases = [
            (TWO_LINK, TwoLinkParameters::LinkLengths),
            (TWO_LINK_OFFSETS, TwoLinkParameters::JointOffsets),
            (TWO_LINK_FULL, TwoLinkParameters::Both),
        ];
        for (text, set) in cases {
            assert_eq!(
                parse_model(text, "shipped").unwrap(),
                two_link(1.0, 0.8, set)
            );
        }
    }

    #[test]
    fn six_r_zero_pose() {
        let m = six_r();
        assert_eq!(m.n_joints(), 6);
        assert_eq!(m.n_identifiable(), 11);
        let p = forward_position(&m, &m.nominal_parameters(), &[0.0; 6]).unwrap();
        // base height + upper arm + elbow offset, forward reach a1 + d4 + d6
        assert!((p.x - (0.35 + 1.2 + 0.215)).abs() < 1e-12);
        assert!(p.y.abs() < 1e-12);
        assert!((p.z - (0.675 + 1.15 - 0.041)).abs() < 1e-12);
    }
}
