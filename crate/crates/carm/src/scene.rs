//! Scene files and run output: the JSON schema describing one planning
//! problem, invariant validation on top of it, seeded random scenario
//! generation, and the table/machine/CSV emitters for results.

use nalgebra::Vector3;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cache::PlannerCache;
use crate::cspace::GridSpec;
use crate::kinematics::{ArmJointConfig, EllipseCoefficients, JointPair, SectionGeometry};
use crate::planner::{
    config_collides, plan_timed, PhaseTimings, PlanError, PlanRequest, PlanResult, PlanSuccess,
    Target, DEFAULT_RETRY_BUDGET, DEFAULT_SKELETON_SAMPLES,
};
use crate::wgrid::{BoundingBox, Connectivity, Sphere};

fn default_length() -> f64 {
    0.15
}

fn default_radius() -> f64 {
    0.0125
}

fn default_max_bend() -> f64 {
    std::f64::consts::PI
}

/// One section of the arm as written in a scene file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionConfig {
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default)]
    pub joint_shift: f64,
    #[serde(default)]
    pub joint_twist: f64,
    #[serde(default = "default_max_bend")]
    pub max_bend: f64,
}

impl Default for SectionConfig {
    fn default() -> Self {
        SectionConfig {
            length: default_length(),
            radius: default_radius(),
            joint_shift: 0.0,
            joint_twist: 0.0,
            max_bend: default_max_bend(),
        }
    }
}

fn default_grid_min() -> f64 {
    -0.04
}

fn default_grid_max() -> f64 {
    0.04
}

fn default_grid_steps() -> u32 {
    13
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_grid_min")]
    pub min: f64,
    #[serde(default = "default_grid_max")]
    pub max: f64,
    #[serde(default = "default_grid_steps")]
    pub steps: u32,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            min: default_grid_min(),
            max: default_grid_max(),
            steps: default_grid_steps(),
        }
    }
}

/// Validity quadratic coefficients; the defaults describe the measured
/// admissible region of the reference arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipseConfig {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl Default for EllipseConfig {
    fn default() -> Self {
        let c = EllipseCoefficients::default();
        EllipseConfig {
            a: c.a,
            b: c.b,
            c: c.c,
            d: c.d,
            e: c.e,
            f: c.f,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub origin: [f64; 3],
    pub extent: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereConfig {
    pub center: [f64; 3],
    pub radius: f64,
}

/// Target as written in a scene file: either a workspace point or an exact
/// grid configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetSpec {
    Point([f64; 3]),
    Config([[f64; 2]; 3]),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConnectivityChoice {
    Six,
    #[default]
    TwentySix,
}

impl From<ConnectivityChoice> for Connectivity {
    fn from(c: ConnectivityChoice) -> Connectivity {
        match c {
            ConnectivityChoice::Six => Connectivity::Six,
            ConnectivityChoice::TwentySix => Connectivity::TwentySix,
        }
    }
}

/// Which admissibility test gates enumeration when building a cache from
/// this scene.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValidityChoice {
    #[default]
    Quadratic,
    ExactBend,
}

impl From<ValidityChoice> for crate::cspace::ValidityFilter {
    fn from(v: ValidityChoice) -> crate::cspace::ValidityFilter {
        match v {
            ValidityChoice::Quadratic => crate::cspace::ValidityFilter::Quadratic,
            ValidityChoice::ExactBend => crate::cspace::ValidityFilter::ExactBend,
        }
    }
}

fn default_cube_dim() -> f64 {
    0.01
}

fn default_retry_budget() -> usize {
    DEFAULT_RETRY_BUDGET
}

fn default_skeleton_samples() -> usize {
    DEFAULT_SKELETON_SAMPLES
}

/// One planning problem: the arm, the discretization, the workspace, and
/// the query. Unknown fields are rejected rather than ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub sections: [SectionConfig; 3],
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub ellipse: EllipseConfig,
    #[serde(default)]
    pub validity: ValidityChoice,
    #[serde(default = "default_cube_dim")]
    pub cube_dim: f64,
    /// Explicit workspace box; derived from the reachable tips when absent.
    #[serde(default)]
    pub workspace_box: Option<BoxConfig>,
    #[serde(default)]
    pub obstacles: Vec<SphereConfig>,
    pub start: [[f64; 2]; 3],
    pub target: TargetSpec,
    #[serde(default)]
    pub connectivity: ConnectivityChoice,
    #[serde(default = "default_retry_budget")]
    pub retry_budget: usize,
    #[serde(default = "default_skeleton_samples")]
    pub skeleton_samples: usize,
}

/// The JSON could not be decoded into a [`Scene`].
#[derive(Debug, thiserror::Error)]
#[error("scene schema violation at {path}: {message}")]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

fn decode<'de, T: Deserialize<'de>>(json: &'de str) -> Result<T, SchemaError> {
    let mut de = serde_json::Deserializer::from_str(json);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| SchemaError {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    de.end().map_err(|e| SchemaError {
        path: ".".into(),
        message: e.to_string(),
    })?;
    Ok(value)
}

/// Parses one scene, reporting the JSON path of the first offending field.
pub fn parse_scene(json: &str) -> Result<Scene, SchemaError> {
    decode(json)
}

/// Parses a whole scenario suite (a JSON array of scenes).
pub fn parse_scenes(json: &str) -> Result<Vec<Scene>, SchemaError> {
    decode(json)
}

/// A structurally well-formed scene that still makes no sense.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("scene invariant violated: {rule}")]
pub struct InvariantError {
    pub rule: &'static str,
}

fn broken(rule: &'static str) -> InvariantError {
    InvariantError { rule }
}

impl Scene {
    /// Cross-field checks a schema cannot express.
    pub fn validate(&self) -> Result<(), InvariantError> {
        for g in self.geometries() {
            g.validate().map_err(|e| broken(e.0))?;
        }
        self.grid_spec().map_err(|e| broken(e.0))?;
        if !(self.cube_dim > 0.0) || !self.cube_dim.is_finite() {
            return Err(broken("cube_dim must be positive and finite"));
        }
        if let Some(b) = &self.workspace_box {
            BoundingBox::new(
                Vector3::from(b.origin),
                Vector3::from(b.extent),
                self.cube_dim,
            )
            .map_err(|e| broken(e.0))?;
        }
        for o in &self.obstacles {
            if o.center.iter().any(|v| !v.is_finite()) {
                return Err(broken("obstacle centers must be finite"));
            }
            if !(o.radius > 0.0) || !o.radius.is_finite() {
                return Err(broken("obstacle radii must be positive and finite"));
            }
        }
        if self.start.iter().flatten().any(|v| !v.is_finite()) {
            return Err(broken("start joints must be finite"));
        }
        let target_finite = match &self.target {
            TargetSpec::Point(p) => p.iter().all(|v| v.is_finite()),
            TargetSpec::Config(c) => c.iter().flatten().all(|v| v.is_finite()),
        };
        if !target_finite {
            return Err(broken("target values must be finite"));
        }
        let ellipse = [
            self.ellipse.a,
            self.ellipse.b,
            self.ellipse.c,
            self.ellipse.d,
            self.ellipse.e,
            self.ellipse.f,
        ];
        if ellipse.iter().any(|v| !v.is_finite()) {
            return Err(broken("ellipse coefficients must be finite"));
        }
        if self.retry_budget < 1 {
            return Err(broken("retry budget must be at least one"));
        }
        if self.skeleton_samples < 2 {
            return Err(broken(
                "skeleton sampling needs at least two points per section",
            ));
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> Result<GridSpec, crate::cspace::GridError> {
        GridSpec::new(self.grid.min, self.grid.max, self.grid.steps)
    }

    pub fn geometries(&self) -> [SectionGeometry; 3] {
        let mk = |s: &SectionConfig| SectionGeometry {
            backbone_length: s.length,
            offset_radius: s.radius,
            joint_shift: s.joint_shift,
            joint_twist: s.joint_twist,
            max_bend: s.max_bend,
            actuation_min: self.grid.min,
            actuation_max: self.grid.max,
        };
        [
            mk(&self.sections[0]),
            mk(&self.sections[1]),
            mk(&self.sections[2]),
        ]
    }

    pub fn coefficients(&self) -> EllipseCoefficients {
        EllipseCoefficients {
            a: self.ellipse.a,
            b: self.ellipse.b,
            c: self.ellipse.c,
            d: self.ellipse.d,
            e: self.ellipse.e,
            f: self.ellipse.f,
        }
    }

    pub fn obstacle_spheres(&self) -> Vec<Sphere> {
        self.obstacles
            .iter()
            .map(|o| Sphere {
                center: Vector3::from(o.center),
                radius: o.radius,
            })
            .collect()
    }

    pub fn start_config(&self) -> ArmJointConfig {
        ArmJointConfig::new([
            JointPair::new(self.start[0][0], self.start[0][1]),
            JointPair::new(self.start[1][0], self.start[1][1]),
            JointPair::new(self.start[2][0], self.start[2][1]),
        ])
    }

    pub fn plan_target(&self) -> Target {
        match &self.target {
            TargetSpec::Point(p) => Target::Point(Vector3::from(*p)),
            TargetSpec::Config(c) => Target::Config(ArmJointConfig::new([
                JointPair::new(c[0][0], c[0][1]),
                JointPair::new(c[1][0], c[1][1]),
                JointPair::new(c[2][0], c[2][1]),
            ])),
        }
    }

    /// Builds the planner cache this scene describes.
    pub fn build_cache(&self) -> Result<PlannerCache, crate::cache::BuildError> {
        let grid = self.grid_spec()?;
        let bbox = match &self.workspace_box {
            Some(b) => Some(BoundingBox::new(
                Vector3::from(b.origin),
                Vector3::from(b.extent),
                self.cube_dim,
            )?),
            None => None,
        };
        PlannerCache::build(
            grid,
            &self.geometries(),
            &self.coefficients(),
            self.validity.into(),
            bbox,
            self.cube_dim,
        )
    }

    /// Confirms a prebuilt cache matches this scene's arm, grid, and cube
    /// size, so results are meaningful.
    pub fn matches_cache(&self, cache: &PlannerCache) -> Result<(), InvariantError> {
        let grid = self
            .grid_spec()
            .map_err(|_| broken("scene grid does not match the cache"))?;
        if cache.tables.sections[0].grid != grid {
            return Err(broken("scene grid does not match the cache"));
        }
        let geoms = self.geometries();
        for (sec, g) in geoms.iter().enumerate() {
            if cache.tables.sections[sec].geometry != *g {
                return Err(broken("scene sections do not match the cache"));
            }
        }
        if cache.bbox.cube_dim() != self.cube_dim {
            return Err(broken("scene cube_dim does not match the cache"));
        }
        if let Some(b) = &self.workspace_box {
            if cache.bbox.origin() != Vector3::from(b.origin)
                || cache.bbox.extent() != Vector3::from(b.extent)
            {
                return Err(broken("scene workspace box does not match the cache"));
            }
        }
        Ok(())
    }
}

/// Hex SHA-256 of the scene's canonical JSON encoding.
pub fn scene_digest(scene: &Scene) -> String {
    let canonical = serde_json::to_string(scene).expect("scenes always serialize");
    let hash = Sha256::digest(canonical.as_bytes());
    let mut out = String::with_capacity(64);
    for b in hash {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Tuning knobs for random scenario generation.
#[derive(Debug, Clone)]
pub struct GenOptions {
    /// Inclusive range of obstacle sphere counts, drawn uniformly.
    pub obstacle_counts: (usize, usize),
    /// Inclusive range of obstacle radii in meters.
    pub radius_range: (f64, f64),
    /// Redraws allowed before giving up on a scenario.
    pub max_redraws: usize,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            obstacle_counts: (2, 3),
            radius_range: (0.03, 0.25),
            max_redraws: 1000,
        }
    }
}

fn scene_skeleton_from_cache(cache: &PlannerCache) -> Scene {
    let grid = cache.tables.sections[0].grid;
    let section = |g: &SectionGeometry| SectionConfig {
        length: g.backbone_length,
        radius: g.offset_radius,
        joint_shift: g.joint_shift,
        joint_twist: g.joint_twist,
        max_bend: g.max_bend,
    };
    Scene {
        sections: [
            section(&cache.tables.sections[0].geometry),
            section(&cache.tables.sections[1].geometry),
            section(&cache.tables.sections[2].geometry),
        ],
        grid: GridConfig {
            min: grid.min,
            max: grid.max,
            steps: grid.steps,
        },
        ellipse: EllipseConfig::default(),
        validity: ValidityChoice::default(),
        cube_dim: cache.bbox.cube_dim(),
        workspace_box: Some(BoxConfig {
            origin: cache.bbox.origin().into(),
            extent: cache.bbox.extent().into(),
        }),
        obstacles: Vec::new(),
        start: [[0.0; 2]; 3],
        target: TargetSpec::Point([0.0; 3]),
        connectivity: ConnectivityChoice::default(),
        retry_budget: DEFAULT_RETRY_BUDGET,
        skeleton_samples: DEFAULT_SKELETON_SAMPLES,
    }
}

/// Draws `n` random scenarios against a cache: uniform start and target
/// configurations, two or three obstacle spheres uniform in the box, radii
/// uniform in the configured range. A draw whose start or target
/// configuration touches an obstacle is discarded and redrawn whole. The
/// target is emitted as the target configuration's tip point.
///
/// Scenes record the default validity quadratic and filter choice; caches
/// built with custom coefficients or the exact-bend filter (neither of
/// which a cache file retains) should not be used here.
pub fn gen_random_scenarios_with(
    cache: &PlannerCache,
    n: usize,
    seed: u64,
    opts: &GenOptions,
) -> Vec<Scene> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let template = scene_skeleton_from_cache(cache);
    let geoms = [
        cache.tables.sections[0].geometry.clone(),
        cache.tables.sections[1].geometry.clone(),
        cache.tables.sections[2].geometry.clone(),
    ];
    let config_count = cache.tables.config_count();
    let origin = cache.bbox.origin();
    let extent = cache.bbox.extent();
    let mut scenes = Vec::with_capacity(n);
    for _ in 0..n {
        let mut redraws = 0;
        let scene = loop {
            let start_id = rng.random_range(0..config_count);
            let target_id = rng.random_range(0..config_count);
            let k = rng.random_range(opts.obstacle_counts.0..=opts.obstacle_counts.1);
            let obstacles: Vec<SphereConfig> = (0..k)
                .map(|_| SphereConfig {
                    center: [
                        origin.x + rng.random_range(0.0..=extent.x),
                        origin.y + rng.random_range(0.0..=extent.y),
                        origin.z + rng.random_range(0.0..=extent.z),
                    ],
                    radius: rng.random_range(opts.radius_range.0..=opts.radius_range.1),
                })
                .collect();
            let spheres: Vec<Sphere> = obstacles
                .iter()
                .map(|o| Sphere {
                    center: Vector3::from(o.center),
                    radius: o.radius,
                })
                .collect();
            let start = cache.tables.joint_config(start_id);
            let target = cache.tables.joint_config(target_id);
            let clear = !config_collides(&start, &geoms, &spheres, DEFAULT_SKELETON_SAMPLES)
                && !config_collides(&target, &geoms, &spheres, DEFAULT_SKELETON_SAMPLES);
            if clear {
                let mut scene = template.clone();
                scene.obstacles = obstacles;
                scene.start = [
                    [start.sections[0].l1, start.sections[0].l2],
                    [start.sections[1].l1, start.sections[1].l2],
                    [start.sections[2].l1, start.sections[2].l2],
                ];
                let tip = cache.tips[target_id as usize];
                scene.target =
                    TargetSpec::Point([tip[0] as f64, tip[1] as f64, tip[2] as f64]);
                break scene;
            }
            redraws += 1;
            assert!(
                redraws <= opts.max_redraws,
                "obstacles leave no clear start/target pair"
            );
        };
        scenes.push(scene);
    }
    scenes
}

pub fn gen_random_scenarios(cache: &PlannerCache, n: usize, seed: u64) -> Vec<Scene> {
    gen_random_scenarios_with(cache, n, seed, &GenOptions::default())
}

/// Phase durations in integer nanoseconds, for machine output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DurationsNs {
    pub cache: u64,
    pub cube_path: u64,
    pub layer_build: u64,
    pub relaxation: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Success,
    NoPath,
}

/// Everything one planning run reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scene_digest: String,
    pub outcome: Outcome,
    pub total_cost: Option<f64>,
    pub cube_path_len: Option<usize>,
    pub config_path_len: Option<usize>,
    pub attempts: usize,
    pub durations_ns: DurationsNs,
    pub tip_polyline: Option<Vec<[f32; 3]>>,
}

/// Result of planning one scene against a cache.
pub struct SceneRun {
    pub record: RunRecord,
    pub result: PlanResult,
    pub timings: PhaseTimings,
}

/// Plans the scene's query. `cache_ns` is how long loading or building the
/// cache took, recorded into the output untouched.
pub fn run_scene(
    cache: &PlannerCache,
    scene: &Scene,
    cache_ns: u64,
) -> Result<SceneRun, PlanError> {
    let obstacles = scene.obstacle_spheres();
    let req = PlanRequest {
        start: scene.start_config(),
        target: scene.plan_target(),
        obstacles: &obstacles,
        connectivity: scene.connectivity.into(),
        retry_budget: scene.retry_budget,
        skeleton_samples: scene.skeleton_samples,
    };
    let (result, timings) = plan_timed(cache, &req)?;
    let digest = scene_digest(scene);
    let durations = DurationsNs {
        cache: cache_ns,
        cube_path: timings.cube_path.as_nanos() as u64,
        layer_build: timings.layer_build.as_nanos() as u64,
        relaxation: timings.relaxation.as_nanos() as u64,
    };
    let record = match &result {
        PlanResult::Success(s) => RunRecord {
            scene_digest: digest,
            outcome: Outcome::Success,
            total_cost: Some(s.total_cost),
            cube_path_len: Some(s.cube_path.cubes.len()),
            config_path_len: Some(s.config_path.len()),
            attempts: s.attempts,
            durations_ns: durations,
            tip_polyline: Some(s.tip_polyline.clone()),
        },
        PlanResult::NoPath { attempts } => RunRecord {
            scene_digest: digest,
            outcome: Outcome::NoPath,
            total_cost: None,
            cube_path_len: None,
            config_path_len: None,
            attempts: attempts.len(),
            durations_ns: durations,
            tip_polyline: None,
        },
    };
    Ok(SceneRun {
        record,
        result,
        timings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Table,
    Machine,
}

/// Renders a run record: an aligned human table, or one JSON line that
/// parses back into the identical record.
pub fn emit_result(record: &RunRecord, format: OutputFormat) -> String {
    match format {
        OutputFormat::Machine => {
            let mut line =
                serde_json::to_string(record).expect("run records always serialize");
            line.push('\n');
            line
        }
        OutputFormat::Table => {
            let mut out = String::new();
            out.push_str(&format!("scene      {}\n", &record.scene_digest[..12]));
            out.push_str(&format!(
                "outcome    {}\n",
                match record.outcome {
                    Outcome::Success => "success",
                    Outcome::NoPath => "no-path",
                }
            ));
            if let Some(cost) = record.total_cost {
                out.push_str(&format!("cost       {cost}\n"));
            }
            if let (Some(cubes), Some(configs)) =
                (record.cube_path_len, record.config_path_len)
            {
                out.push_str(&format!("cubes      {cubes}\n"));
                out.push_str(&format!("configs    {configs}\n"));
            }
            out.push_str(&format!("attempts   {}\n", record.attempts));
            let d = &record.durations_ns;
            out.push_str(&format!(
                "phases     cache {:.3} ms, cube path {:.3} ms, layers {:.3} ms, relaxation {:.3} ms\n",
                d.cache as f64 / 1e6,
                d.cube_path as f64 / 1e6,
                d.layer_build as f64 / 1e6,
                d.relaxation as f64 / 1e6,
            ));
            out
        }
    }
}

/// CSV dump of a successful path: one `tip` row per waypoint with its
/// cumulative cost, followed by that waypoint's sampled `skeleton` rows.
pub fn emit_polyline(
    cache: &PlannerCache,
    success: &PlanSuccess,
    skeleton_samples: usize,
) -> String {
    let tables = &cache.tables;
    let geoms = [
        tables.sections[0].geometry.clone(),
        tables.sections[1].geometry.clone(),
        tables.sections[2].geometry.clone(),
    ];
    let mut out = String::from("waypoint,kind,index,x,y,z,cumulative_cost\n");
    let mut cumulative = 0.0f64;
    for (w, &id) in success.config_path.iter().enumerate() {
        if w > 0 {
            cumulative += crate::planner::edge_weight(
                tables,
                success.config_path[w - 1],
                id,
            );
        }
        let tip = success.tip_polyline[w];
        out.push_str(&format!(
            "{w},tip,0,{},{},{},{cumulative}\n",
            tip[0], tip[1], tip[2]
        ));
        let skeleton = crate::kinematics::skeleton_points(
            &tables.joint_config(id),
            &geoms,
            skeleton_samples,
        );
        for (i, p) in skeleton.iter().enumerate() {
            out.push_str(&format!(
                "{w},skeleton,{i},{},{},{},{cumulative}\n",
                p.x, p.y, p.z
            ));
        }
    }
    out
}
