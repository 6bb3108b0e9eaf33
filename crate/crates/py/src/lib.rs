//! Python bindings for the continuum-arm planner.
//!
//! Builds as the `carm_py` extension module. The surface mirrors the parts
//! of the library a notebook session actually wants: per-section arc
//! kinematics, actuation validity, whole-arm tip and skeleton evaluation,
//! and cache-backed planning.

use nalgebra::Vector3;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use std::path::PathBuf;

use carm::cache::{CacheError, PlannerCache};
use carm::cspace::{GridSpec, ValidityFilter};
use carm::kinematics::{
    self, ArcFraction, ArmJointConfig, EllipseCoefficients, JointPair, SectionGeometry,
};
use carm::planner::{
    self, AttemptFailure, PlanRequest, PlanResult, Target, DEFAULT_RETRY_BUDGET,
    DEFAULT_SKELETON_SAMPLES,
};
use carm::wgrid::{Connectivity, Sphere};

fn joint_config(sections: [[f64; 2]; 3]) -> ArmJointConfig {
    ArmJointConfig::new([
        JointPair::new(sections[0][0], sections[0][1]),
        JointPair::new(sections[1][0], sections[1][1]),
        JointPair::new(sections[2][0], sections[2][1]),
    ])
}

fn geometry_triple(geometries: Option<Vec<Geometry>>) -> PyResult<[SectionGeometry; 3]> {
    match geometries {
        None => Ok([SectionGeometry::default(); 3]),
        Some(v) => {
            let [a, b, c]: [Geometry; 3] = v
                .try_into()
                .map_err(|_| PyValueError::new_err("expected exactly three geometries"))?;
            Ok([a.inner, b.inner, c.inner])
        }
    }
}

fn coefficients(c: Option<[f64; 6]>) -> EllipseCoefficients {
    match c {
        Some([a, b, c, d, e, f]) => EllipseCoefficients { a, b, c, d, e, f },
        None => EllipseCoefficients::default(),
    }
}

fn parse_connectivity(s: &str) -> PyResult<Connectivity> {
    match s {
        "six" => Ok(Connectivity::Six),
        "twenty-six" => Ok(Connectivity::TwentySix),
        other => Err(PyValueError::new_err(format!(
            "unknown connectivity {other:?}; use \"six\" or \"twenty-six\""
        ))),
    }
}

/// Mechanical description of one section. Lengths in meters, angles in
/// radians; defaults match the reference arm.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct Geometry {
    inner: SectionGeometry,
}

#[pymethods]
impl Geometry {
    #[new]
    #[pyo3(signature = (
        backbone_length = 0.15,
        offset_radius = 0.0125,
        joint_shift = 0.0,
        joint_twist = 0.0,
        max_bend = std::f64::consts::PI,
        actuation_min = -0.04,
        actuation_max = 0.04,
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        backbone_length: f64,
        offset_radius: f64,
        joint_shift: f64,
        joint_twist: f64,
        max_bend: f64,
        actuation_min: f64,
        actuation_max: f64,
    ) -> PyResult<Self> {
        let inner = SectionGeometry {
            backbone_length,
            offset_radius,
            joint_shift,
            joint_twist,
            max_bend,
            actuation_min,
            actuation_max,
        };
        inner
            .validate()
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Geometry { inner })
    }

    #[getter]
    fn backbone_length(&self) -> f64 {
        self.inner.backbone_length
    }

    #[getter]
    fn offset_radius(&self) -> f64 {
        self.inner.offset_radius
    }

    #[getter]
    fn joint_shift(&self) -> f64 {
        self.inner.joint_shift
    }

    #[getter]
    fn joint_twist(&self) -> f64 {
        self.inner.joint_twist
    }

    #[getter]
    fn max_bend(&self) -> f64 {
        self.inner.max_bend
    }

    #[getter]
    fn actuation_min(&self) -> f64 {
        self.inner.actuation_min
    }

    #[getter]
    fn actuation_max(&self) -> f64 {
        self.inner.actuation_max
    }

    fn __repr__(&self) -> String {
        let g = &self.inner;
        format!(
            "Geometry(backbone_length={}, offset_radius={}, joint_shift={}, \
             joint_twist={}, max_bend={}, actuation_min={}, actuation_max={})",
            g.backbone_length,
            g.offset_radius,
            g.joint_shift,
            g.joint_twist,
            g.max_bend,
            g.actuation_min,
            g.actuation_max,
        )
    }
}

/// Arc parameters `(theta, phi, lambda)` of one section at actuator
/// offsets `(l1, l2)`. `lambda` is infinite for a straight section.
#[pyfunction]
#[pyo3(signature = (l1, l2, geometry=None))]
fn curve_params(l1: f64, l2: f64, geometry: Option<Geometry>) -> (f64, f64, f64) {
    let g = geometry.map(|g| g.inner).unwrap_or_default();
    let c = kinematics::curve_params(JointPair::new(l1, l2), &g);
    (c.theta, c.phi, c.lambda)
}

/// Whether the actuator pair `(l1, l2)` lies in the admissible region of
/// the validity quadratic. `coefficients` overrides the fitted defaults
/// as `(a, b, c, d, e, f)`.
#[pyfunction]
#[pyo3(signature = (l1, l2, coefficients=None))]
fn valid_actuation(l1: f64, l2: f64, coefficients: Option<[f64; 6]>) -> bool {
    kinematics::is_valid_actuation(JointPair::new(l1, l2), &self::coefficients(coefficients))
}

/// Tip position of the full arm for a configuration given as three
/// `(l1, l2)` pairs, base to tip.
#[pyfunction]
#[pyo3(signature = (config, geometries=None))]
fn arm_tip(
    config: [[f64; 2]; 3],
    geometries: Option<Vec<Geometry>>,
) -> PyResult<(f64, f64, f64)> {
    let geoms = geometry_triple(geometries)?;
    let t = kinematics::arm_transform(&joint_config(config), &geoms, ArcFraction::FULL);
    Ok((t.position.x, t.position.y, t.position.z))
}

/// Points along the arm backbone, base to tip, `samples_per_section` per
/// section; the last point is the arm tip.
#[pyfunction]
#[pyo3(signature = (config, geometries=None, samples_per_section=10))]
fn skeleton(
    config: [[f64; 2]; 3],
    geometries: Option<Vec<Geometry>>,
    samples_per_section: usize,
) -> PyResult<Vec<(f64, f64, f64)>> {
    if samples_per_section < 2 {
        return Err(PyValueError::new_err(
            "samples_per_section must be at least 2",
        ));
    }
    let geoms = geometry_triple(geometries)?;
    let points = kinematics::skeleton_points(&joint_config(config), &geoms, samples_per_section);
    Ok(points.into_iter().map(|p| (p.x, p.y, p.z)).collect())
}

fn cache_err(e: CacheError) -> PyErr {
    match e {
        CacheError::Io(_) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn describe_failure(f: &AttemptFailure) -> String {
    match f {
        AttemptFailure::NoCubePath => "no cube path".to_string(),
        AttemptFailure::EmptyLayer(i) => format!("empty layer {i}"),
        AttemptFailure::DisconnectedBoundary(i) => format!("disconnected boundary {i}"),
    }
}

/// An enumerated configuration space bucketed into workspace cubes, ready
/// to answer planning queries.
#[pyclass(frozen)]
struct Cache {
    inner: PlannerCache,
}

#[pymethods]
impl Cache {
    /// Enumerates the configuration space on a `steps` per-actuator grid
    /// over `[grid_min, grid_max]` and buckets tips into cubes of side
    /// `cube_dim`. `validity` is `"quadratic"` or `"exact-bend"`.
    #[staticmethod]
    #[pyo3(signature = (
        steps,
        cube_dim,
        grid_min = -0.04,
        grid_max = 0.04,
        geometries = None,
        coefficients = None,
        validity = "quadratic",
    ))]
    fn build(
        steps: u32,
        cube_dim: f64,
        grid_min: f64,
        grid_max: f64,
        geometries: Option<Vec<Geometry>>,
        coefficients: Option<[f64; 6]>,
        validity: &str,
    ) -> PyResult<Self> {
        let grid = GridSpec::new(grid_min, grid_max, steps)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        let geoms = geometry_triple(geometries)?;
        let coeffs = self::coefficients(coefficients);
        let filter = match validity {
            "quadratic" => ValidityFilter::Quadratic,
            "exact-bend" => ValidityFilter::ExactBend,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown validity filter {other:?}; use \"quadratic\" or \"exact-bend\""
                )))
            }
        };
        let inner = PlannerCache::build(grid, &geoms, &coeffs, filter, None, cube_dim)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Cache { inner })
    }

    /// Reads a cache file, verifying structure and checksum.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let inner = PlannerCache::load(&path).map_err(cache_err)?;
        Ok(Cache { inner })
    }

    /// Writes this cache; `load` restores it bit for bit.
    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner
            .save(&path)
            .map_err(|e| PyIOError::new_err(e.to_string()))
    }

    #[getter]
    fn config_count(&self) -> u64 {
        self.inner.tables.config_count()
    }

    #[getter]
    fn cube_count(&self) -> u64 {
        self.inner.buckets.cube_count()
    }

    #[getter]
    fn sample_counts(&self) -> (usize, usize, usize) {
        let [a, b, c] = self.inner.tables.counts();
        (a, b, c)
    }

    #[getter]
    fn cube_dim(&self) -> f64 {
        self.inner.bbox.cube_dim()
    }

    /// Plans from `start` (three `(l1, l2)` pairs) to either a workspace
    /// point or an exact grid configuration.
    ///
    /// Obstacles are spheres given as `(x, y, z, radius)`. Returns a dict:
    /// `status` is `"success"` or `"no-path"`; a success carries
    /// `total_cost`, `config_path`, `cube_path`, `cube_cost`,
    /// `tip_polyline`, and `attempts`; a no-path carries `attempts` and
    /// per-attempt `failures` strings. Unusable queries raise ValueError.
    #[pyo3(signature = (
        start,
        target_point = None,
        target_config = None,
        obstacles = None,
        retry_budget = DEFAULT_RETRY_BUDGET,
        skeleton_samples = DEFAULT_SKELETON_SAMPLES,
        connectivity = "twenty-six",
    ))]
    #[allow(clippy::too_many_arguments)]
    fn plan<'py>(
        &self,
        py: Python<'py>,
        start: [[f64; 2]; 3],
        target_point: Option<[f64; 3]>,
        target_config: Option<[[f64; 2]; 3]>,
        obstacles: Option<Vec<[f64; 4]>>,
        retry_budget: usize,
        skeleton_samples: usize,
        connectivity: &str,
    ) -> PyResult<Bound<'py, PyDict>> {
        let target = match (target_point, target_config) {
            (Some(p), None) => Target::Point(Vector3::new(p[0], p[1], p[2])),
            (None, Some(c)) => Target::Config(joint_config(c)),
            _ => {
                return Err(PyValueError::new_err(
                    "give exactly one of target_point and target_config",
                ))
            }
        };
        let spheres: Vec<Sphere> = obstacles
            .unwrap_or_default()
            .into_iter()
            .map(|[x, y, z, r]| {
                if r > 0.0 {
                    Ok(Sphere {
                        center: Vector3::new(x, y, z),
                        radius: r,
                    })
                } else {
                    Err(PyValueError::new_err("obstacle radius must be positive"))
                }
            })
            .collect::<PyResult<_>>()?;
        let req = PlanRequest {
            start: joint_config(start),
            target,
            obstacles: &spheres,
            connectivity: parse_connectivity(connectivity)?,
            retry_budget,
            skeleton_samples,
        };
        let result =
            planner::plan(&self.inner, &req).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let out = PyDict::new(py);
        match result {
            PlanResult::Success(s) => {
                out.set_item("status", "success")?;
                out.set_item("total_cost", s.total_cost)?;
                out.set_item("config_path", s.config_path)?;
                out.set_item("cube_path", s.cube_path.cubes)?;
                out.set_item("cube_cost", s.cube_path.cost)?;
                let polyline: Vec<(f64, f64, f64)> = s
                    .tip_polyline
                    .iter()
                    .map(|t| (t[0] as f64, t[1] as f64, t[2] as f64))
                    .collect();
                out.set_item("tip_polyline", polyline)?;
                out.set_item("attempts", s.attempts)?;
            }
            PlanResult::NoPath { attempts } => {
                out.set_item("status", "no-path")?;
                out.set_item("attempts", attempts.len())?;
                let failures: Vec<String> =
                    attempts.iter().map(|a| describe_failure(&a.failure)).collect();
                out.set_item("failures", failures)?;
            }
        }
        Ok(out)
    }

    fn __repr__(&self) -> String {
        let [a, b, c] = self.inner.tables.counts();
        format!(
            "Cache(samples=({a}, {b}, {c}), configs={}, cubes={}, cube_dim={})",
            self.inner.tables.config_count(),
            self.inner.buckets.cube_count(),
            self.inner.bbox.cube_dim(),
        )
    }
}

#[pymodule]
fn carm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Geometry>()?;
    m.add_class::<Cache>()?;
    m.add_function(wrap_pyfunction!(curve_params, m)?)?;
    m.add_function(wrap_pyfunction!(valid_actuation, m)?)?;
    m.add_function(wrap_pyfunction!(arm_tip, m)?)?;
    m.add_function(wrap_pyfunction!(skeleton, m)?)?;
    Ok(())
}
