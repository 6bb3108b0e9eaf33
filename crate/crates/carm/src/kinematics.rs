//! Constant-curvature kinematics for a three-section pneumatic continuum arm.
//!
//! Each section is driven by three pneumatic muscle actuators spaced evenly
//! at radius `r` around an inextensible backbone of length `L`. The length
//! changes of the three actuators sum to zero, so a section has two
//! independent inputs `(l1, l2)` and bends along a circular arc described by
//! three curve parameters:
//!
//! * `theta`: azimuth of the bending plane about the local Z axis,
//! * `phi`: arc angle subtended by the bent section,
//! * `lambda`: arc radius, infinite when the section is straight.
//!
//! Arc length is conserved: `lambda * phi == L` for every bent configuration.
//! A section frame is the product of a plane rotation, a circular-arc
//! displacement, a trailing plane rotation, and an optional rigid joint
//! offset (`joint_shift` along Z, then `joint_twist` about Z) that models the
//! coupling piece mounted at the section tip. Section frames chain base to
//! tip. All computation is in double precision.

use nalgebra::{Matrix3, Vector3};

/// Square root of three, the geometric constant of the 120-degree actuator
/// layout.
pub const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Bend angles below this threshold are evaluated with a series expansion of
/// the arc displacement; the direct product `lambda * (1 - cos phi)` is an
/// `inf * 0` form in the straight limit.
pub const SERIES_BEND_THRESHOLD: f64 = 1e-6;

/// Physical description of one continuum section.
///
/// `joint_shift`/`joint_twist` describe the rigid coupling mounted at the
/// section tip; for the last section of an arm they are normally zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionGeometry {
    /// Backbone length `L` in meters.
    pub backbone_length: f64,
    /// Actuator offset radius `r` from the backbone, meters.
    pub offset_radius: f64,
    /// Rigid joint translation along the tip Z axis, meters.
    pub joint_shift: f64,
    /// Rigid joint rotation about the tip Z axis, radians.
    pub joint_twist: f64,
    /// Largest admissible arc angle `phi`, radians.
    pub max_bend: f64,
    /// Lower actuator stroke bound, meters.
    pub actuation_min: f64,
    /// Upper actuator stroke bound, meters.
    pub actuation_max: f64,
}

impl Default for SectionGeometry {
    fn default() -> Self {
        SectionGeometry {
            backbone_length: 0.15,
            offset_radius: 0.0125,
            joint_shift: 0.0,
            joint_twist: 0.0,
            max_bend: std::f64::consts::PI,
            actuation_min: -0.04,
            actuation_max: 0.04,
        }
    }
}

impl SectionGeometry {
    /// Checks the structural invariants: positive lengths, a positive bend
    /// limit, and an ordered actuation interval.
    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.backbone_length > 0.0) {
            return Err(GeometryError("backbone_length must be positive"));
        }
        if !(self.offset_radius > 0.0) {
            return Err(GeometryError("offset_radius must be positive"));
        }
        if !(self.max_bend > 0.0) {
            return Err(GeometryError("max_bend must be positive"));
        }
        if !(self.actuation_min < self.actuation_max) {
            return Err(GeometryError("actuation_min must be below actuation_max"));
        }
        if !self.joint_shift.is_finite() || !self.joint_twist.is_finite() {
            return Err(GeometryError("joint offsets must be finite"));
        }
        Ok(())
    }
}

/// A structural defect in a [`SectionGeometry`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("invalid section geometry: {0}")]
pub struct GeometryError(pub &'static str);

/// Length changes of the two independent actuators of one section, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JointPair {
    pub l1: f64,
    pub l2: f64,
}

impl JointPair {
    pub fn new(l1: f64, l2: f64) -> Self {
        JointPair { l1, l2 }
    }

    /// Length change of the dependent third actuator, `-(l1 + l2)`.
    pub fn third_actuator(&self) -> f64 {
        -(self.l1 + self.l2)
    }
}

/// Actuator inputs for all three sections, base to tip.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ArmJointConfig {
    pub sections: [JointPair; 3],
}

impl ArmJointConfig {
    pub fn new(sections: [JointPair; 3]) -> Self {
        ArmJointConfig { sections }
    }
}

/// Curve parameters of a bent section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveParams {
    /// Bending-plane azimuth, radians, in `(-pi, pi]`; zero when straight.
    pub theta: f64,
    /// Arc angle, radians; zero when straight.
    pub phi: f64,
    /// Arc radius, meters; `f64::INFINITY` when straight.
    pub lambda: f64,
}

impl CurveParams {
    pub fn is_straight(&self) -> bool {
        self.phi == 0.0
    }
}

/// Coefficients of the empirical actuator-validity quadratic
/// `a*l1^2 + b*l1*l2 + c*l2^2 + d*l1 + e*l2 + f`; a pair is admissible where
/// the quadratic is nonnegative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl Default for EllipseCoefficients {
    /// Coefficients fitted to the physical prototype's admissible region.
    fn default() -> Self {
        EllipseCoefficients {
            a: -0.5766,
            b: 0.5789,
            c: -0.5766,
            d: 0.0,
            e: 0.0,
            f: 0.0007,
        }
    }
}

impl EllipseCoefficients {
    /// Evaluates the quadratic at a joint pair.
    pub fn eval(&self, j: JointPair) -> f64 {
        self.a * j.l1 * j.l1
            + self.b * j.l1 * j.l2
            + self.c * j.l2 * j.l2
            + self.d * j.l1
            + self.e * j.l2
            + self.f
    }

    /// True when the quadratic part is negative definite, which makes the
    /// admissible region a bounded ellipse.
    pub fn is_bounded_region(&self) -> bool {
        self.a < 0.0 && self.a * self.c - 0.25 * self.b * self.b > 0.0
    }
}

/// Fraction of a section arc, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ArcFraction(f64);

impl ArcFraction {
    /// The full section, `xi = 1`.
    pub const FULL: ArcFraction = ArcFraction(1.0);

    /// Returns `None` outside `[0, 1]` or for NaN.
    pub fn new(xi: f64) -> Option<Self> {
        (0.0..=1.0).contains(&xi).then_some(ArcFraction(xi))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_full(self) -> bool {
        self.0 == 1.0
    }
}

/// Sign of the trailing plane rotation that closes a section transform.
///
/// `Untwist` cancels the leading plane rotation so a bent section carries no
/// residual roll about its tip axis; `Repeat` applies the leading rotation a
/// second time. Tip position is identical under both conventions, only the
/// tip frame orientation differs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TrailingRotation {
    #[default]
    Untwist,
    Repeat,
}

/// A rotation plus translation, the frame of one link relative to another.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: Matrix3<f64>,
    pub position: Vector3<f64>,
}

impl RigidTransform {
    pub fn identity() -> Self {
        RigidTransform {
            rotation: Matrix3::identity(),
            position: Vector3::zeros(),
        }
    }

    /// Chains `self` (base side) with `other` (tip side):
    /// `R = R_self * R_other`, `p = p_self + R_self * p_other`.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            position: self.position + self.rotation * other.position,
        }
    }

    pub fn transform_point(&self, p: Vector3<f64>) -> Vector3<f64> {
        self.position + self.rotation * p
    }
}

fn rotation_z(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn rotation_y(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

/// Maps an exact `-pi` (possible from `atan2` with a negative-zero ordinate)
/// onto `pi`, keeping azimuths in `(-pi, pi]`.
fn fold_half_turn(angle: f64) -> f64 {
    if angle == -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        angle
    }
}

/// Curve parameters of a section under actuator inputs `j`.
///
/// The exact straight input `(0, 0)` yields `theta = 0`, `phi = 0`, and an
/// infinite radius.
pub fn curve_params(j: JointPair, g: &SectionGeometry) -> CurveParams {
    let m = j.l1 * j.l1 - j.l1 * j.l2 + j.l2 * j.l2;
    if m == 0.0 {
        return CurveParams {
            theta: 0.0,
            phi: 0.0,
            lambda: f64::INFINITY,
        };
    }
    let s = m.sqrt();
    CurveParams {
        theta: fold_half_turn(f64::atan2(j.l2 * SQRT_3, 2.0 * j.l1 - j.l2)),
        phi: 2.0 * s / (g.offset_radius * SQRT_3),
        lambda: SQRT_3 * g.backbone_length * g.offset_radius / (2.0 * s),
    }
}

/// True where the validity quadratic admits the pair.
pub fn is_valid_actuation(j: JointPair, coeffs: &EllipseCoefficients) -> bool {
    coeffs.eval(j) >= 0.0
}

/// Exact arc-angle check `phi <= max_bend`, the stricter alternative to the
/// fitted validity quadratic when enumerating samples.
pub fn exact_bend_valid(j: JointPair, g: &SectionGeometry) -> bool {
    curve_params(j, g).phi <= g.max_bend
}

/// In-plane reach and axial rise of the arc at fraction `xi`:
/// `lambda * (1 - cos(xi * phi))` and `lambda * sin(xi * phi)`.
///
/// Below [`SERIES_BEND_THRESHOLD`] both products are evaluated as fourth
/// order series in `phi` with `lambda = L / phi` substituted, which is exact
/// to well below machine precision there and continuous into the straight
/// limit `(0, xi * L)`.
fn arc_coords(length: f64, phi: f64, lambda: f64, xi: f64) -> (f64, f64) {
    if phi == 0.0 {
        return (0.0, xi * length);
    }
    let bend = xi * phi;
    if phi < SERIES_BEND_THRESHOLD {
        let reach = length * xi * (bend / 2.0 - bend * bend * bend / 24.0);
        let rise = length * xi * (1.0 - bend * bend / 6.0 + bend * bend * bend * bend / 120.0);
        return (reach, rise);
    }
    let half = 0.5 * bend;
    let s = half.sin();
    (lambda * 2.0 * s * s, lambda * bend.sin())
}

/// Section frame at arc fraction `xi` given precomputed curve parameters.
/// The rigid joint offset is applied only at the full section, `xi = 1`.
pub(crate) fn section_frame(
    cp: &CurveParams,
    g: &SectionGeometry,
    xi: ArcFraction,
    convention: TrailingRotation,
) -> RigidTransform {
    let bend = xi.get() * cp.phi;
    let (reach, rise) = arc_coords(g.backbone_length, cp.phi, cp.lambda, xi.get());
    let lead = rotation_z(cp.theta);
    let trail = match convention {
        TrailingRotation::Untwist => rotation_z(-cp.theta),
        TrailingRotation::Repeat => rotation_z(cp.theta),
    };
    let rotation = lead * rotation_y(bend) * trail;
    let position = lead * Vector3::new(reach, 0.0, rise);
    let mut t = RigidTransform { rotation, position };
    if xi.is_full() {
        if g.joint_shift != 0.0 {
            t.position += t.rotation * Vector3::new(0.0, 0.0, g.joint_shift);
        }
        if g.joint_twist != 0.0 {
            t.rotation *= rotation_z(g.joint_twist);
        }
    }
    t
}

/// Frame of a single section at arc fraction `xi`, under the given trailing
/// rotation convention.
pub fn section_transform_with(
    j: JointPair,
    g: &SectionGeometry,
    xi: ArcFraction,
    convention: TrailingRotation,
) -> RigidTransform {
    section_frame(&curve_params(j, g), g, xi, convention)
}

/// Frame of a single section at arc fraction `xi` under the default
/// [`TrailingRotation::Untwist`] convention.
pub fn section_transform(j: JointPair, g: &SectionGeometry, xi: ArcFraction) -> RigidTransform {
    section_transform_with(j, g, xi, TrailingRotation::default())
}

/// Frame at arc fraction `xi` along section `section` (zero based), with all
/// earlier sections at full extension including their joint offsets. Later
/// sections do not contribute.
pub fn arm_transform_at_with(
    c: &ArmJointConfig,
    geoms: &[SectionGeometry; 3],
    section: usize,
    xi: ArcFraction,
    convention: TrailingRotation,
) -> RigidTransform {
    assert!(section < 3, "section index out of range");
    let mut t = RigidTransform::identity();
    for k in 0..section {
        t = t.compose(&section_transform_with(
            c.sections[k],
            &geoms[k],
            ArcFraction::FULL,
            convention,
        ));
    }
    t.compose(&section_transform_with(
        c.sections[section],
        &geoms[section],
        xi,
        convention,
    ))
}

/// Frame at arc fraction `xi` along section `section` under the default
/// convention.
pub fn arm_transform_at(
    c: &ArmJointConfig,
    geoms: &[SectionGeometry; 3],
    section: usize,
    xi: ArcFraction,
) -> RigidTransform {
    arm_transform_at_with(c, geoms, section, xi, TrailingRotation::default())
}

/// Arm frame with the first two sections at full extension and the last
/// section evaluated at arc fraction `x`; `x = 1` gives the arm tip.
pub fn arm_transform_with(
    c: &ArmJointConfig,
    geoms: &[SectionGeometry; 3],
    x: ArcFraction,
    convention: TrailingRotation,
) -> RigidTransform {
    arm_transform_at_with(c, geoms, 2, x, convention)
}

/// Arm frame under the default convention; `x = 1` gives the arm tip.
pub fn arm_transform(
    c: &ArmJointConfig,
    geoms: &[SectionGeometry; 3],
    x: ArcFraction,
) -> RigidTransform {
    arm_transform_with(c, geoms, x, TrailingRotation::default())
}

/// Points along the arm backbone used for collision checks and rendering.
///
/// For each section, `samples_per_section` points are taken at arc fractions
/// `k / samples_per_section`, `k = 1..=samples_per_section`, ordered base to
/// tip; the final point equals the `arm_transform` tip. Requires
/// `samples_per_section >= 2`.
pub fn skeleton_points(
    c: &ArmJointConfig,
    geoms: &[SectionGeometry; 3],
    samples_per_section: usize,
) -> Vec<Vector3<f64>> {
    assert!(samples_per_section >= 2, "need at least two samples per section");
    let m = samples_per_section;
    let conv = TrailingRotation::default();
    let mut points = Vec::with_capacity(3 * m);
    let mut base = RigidTransform::identity();
    for sec in 0..3 {
        let cp = curve_params(c.sections[sec], &geoms[sec]);
        for k in 1..m {
            let xi = ArcFraction::new(k as f64 / m as f64).expect("fraction in range");
            let frame = section_frame(&cp, &geoms[sec], xi, conv);
            points.push(base.compose(&frame).position);
        }
        let full = section_frame(&cp, &geoms[sec], ArcFraction::FULL, conv);
        base = base.compose(&full);
        points.push(base.position);
    }
    points
}

/// The six-angle orientation descriptor `(theta_1, phi_1, ..., theta_3,
/// phi_3)` of a configuration; straight sections contribute zeros.
pub fn orientation_vector(c: &ArmJointConfig, geoms: &[SectionGeometry; 3]) -> [f64; 6] {
    let mut out = [0.0; 6];
    for (i, (j, g)) in c.sections.iter().zip(geoms.iter()).enumerate() {
        let cp = curve_params(*j, g);
        out[2 * i] = cp.theta;
        out[2 * i + 1] = cp.phi;
    }
    out
}
