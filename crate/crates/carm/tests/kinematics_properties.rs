//! Property checks over the section and arm kinematics.

use carm::kinematics::{
    arm_transform, curve_params, is_valid_actuation, section_transform, skeleton_points,
    ArcFraction, ArmJointConfig, EllipseCoefficients, JointPair, SectionGeometry,
};
use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;

fn joint() -> impl Strategy<Value = JointPair> {
    (-0.04f64..=0.04, -0.04f64..=0.04).prop_map(|(l1, l2)| JointPair::new(l1, l2))
}

fn bent_joint() -> impl Strategy<Value = JointPair> {
    joint().prop_filter("straight", |j| !(j.l1 == 0.0 && j.l2 == 0.0))
}

fn fraction() -> impl Strategy<Value = ArcFraction> {
    (0.0f64..=1.0).prop_map(|x| ArcFraction::new(x).unwrap())
}

fn config() -> impl Strategy<Value = ArmJointConfig> {
    [joint(), joint(), joint()].prop_map(ArmJointConfig::new)
}

fn geoms() -> [SectionGeometry; 3] {
    [
        SectionGeometry::default(),
        SectionGeometry::default(),
        SectionGeometry::default(),
    ]
}

proptest! {
    /// The arc radius times the arc angle always recovers the backbone
    /// length.
    #[test]
    fn radius_times_angle_is_the_backbone_length(j in bent_joint()) {
        let g = SectionGeometry::default();
        let cp = curve_params(j, &g);
        prop_assert!(cp.phi > 0.0);
        let rel = (cp.lambda * cp.phi - g.backbone_length).abs() / g.backbone_length;
        prop_assert!(rel < 1e-9, "relative error {rel}");
    }

    /// Azimuth stays in the half-open principal interval and the arc angle
    /// is never negative.
    #[test]
    fn curve_parameters_stay_in_their_domains(j in joint()) {
        let cp = curve_params(j, &SectionGeometry::default());
        prop_assert!(cp.theta > -std::f64::consts::PI);
        prop_assert!(cp.theta <= std::f64::consts::PI);
        prop_assert!(cp.phi >= 0.0);
        prop_assert!(cp.lambda > 0.0);
    }

    /// Every section frame is a proper rotation.
    #[test]
    fn section_rotations_are_orthonormal(j in joint(), xi in fraction()) {
        let t = section_transform(j, &SectionGeometry::default(), xi);
        let gram = t.rotation.transpose() * t.rotation;
        let drift = (gram - Matrix3::identity()).norm();
        prop_assert!(drift < 1e-9, "gram drift {drift}");
        let det = t.rotation.determinant();
        prop_assert!((det - 1.0).abs() < 1e-9, "determinant {det}");
    }

    /// A section arc never leaves the vertical plane at its azimuth.
    #[test]
    fn section_positions_stay_in_the_bending_plane(j in bent_joint(), xi in fraction()) {
        let g = SectionGeometry::default();
        let cp = curve_params(j, &g);
        let t = section_transform(j, &g, xi);
        let normal = Vector3::new(-cp.theta.sin(), cp.theta.cos(), 0.0);
        let off = normal.dot(&t.position).abs();
        prop_assert!(off < 1e-12, "out of plane by {off}");
    }

    /// The straight-line distance to the frame origin can never exceed the
    /// arc length walked to reach it.
    #[test]
    fn chord_never_exceeds_arc_length(j in joint(), xi in fraction()) {
        let g = SectionGeometry::default();
        let t = section_transform(j, &g, xi);
        let arc = xi.get() * g.backbone_length + if xi.is_full() { g.joint_shift } else { 0.0 };
        prop_assert!(t.position.norm() <= arc + 1e-12);
    }

    /// Tiny actuations land next to the straight tip; the small-angle branch
    /// introduces no jump at the origin.
    #[test]
    fn near_zero_actuation_stays_near_the_straight_tip(
        l1 in -1e-7f64..=1e-7,
        l2 in -1e-7f64..=1e-7,
    ) {
        let g = SectionGeometry::default();
        let t = section_transform(JointPair::new(l1, l2), &g, ArcFraction::FULL);
        let gap = (t.position - Vector3::new(0.0, 0.0, g.backbone_length)).norm();
        prop_assert!(gap < 1e-5, "gap {gap}");
    }

    /// The arm frame is exactly the chained product of its section frames.
    #[test]
    fn arm_frame_is_the_product_of_section_frames(c in config()) {
        let gs = geoms();
        let t1 = section_transform(c.sections[0], &gs[0], ArcFraction::FULL);
        let t2 = section_transform(c.sections[1], &gs[1], ArcFraction::FULL);
        let t3 = section_transform(c.sections[2], &gs[2], ArcFraction::FULL);
        let manual = t1.compose(&t2).compose(&t3);
        let arm = arm_transform(&c, &gs, ArcFraction::FULL);
        prop_assert_eq!(manual.position, arm.position);
        prop_assert_eq!(manual.rotation, arm.rotation);
    }

    /// Skeleton sampling is consistent with the arm frame: three points per
    /// section count and an exact tip tail.
    #[test]
    fn skeleton_tail_is_the_arm_tip(c in config(), m in 2usize..=6) {
        let gs = geoms();
        let pts = skeleton_points(&c, &gs, m);
        prop_assert_eq!(pts.len(), 3 * m);
        let tip = arm_transform(&c, &gs, ArcFraction::FULL).position;
        prop_assert_eq!(pts[3 * m - 1], tip);
    }

    /// The validity quadratic is symmetric under swapping the two actuators.
    #[test]
    fn default_validity_region_is_swap_symmetric(j in joint()) {
        let coeffs = EllipseCoefficients::default();
        let swapped = JointPair::new(j.l2, j.l1);
        prop_assert_eq!(
            is_valid_actuation(j, &coeffs),
            is_valid_actuation(swapped, &coeffs)
        );
    }
}
