//! The planner itself: routes the tip through the cube grid, induces one
//! configuration layer per visited cube, and relaxes costs across
//! consecutive layers only, so memory stays proportional to the widest
//! boundary instead of the whole configuration space.
//!
//! Costs move through actuation space: an edge between adjacent
//! configurations weighs the Euclidean norm of the six per-section curve
//! parameter differences, azimuths wrapped onto `(-pi, pi]`. Relaxation is
//! parallel per target configuration and resolves cost ties toward the
//! lowest predecessor id, which makes results identical for any worker
//! count.

use std::time::{Duration, Instant};

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::cache::PlannerCache;
use crate::cspace::{ConfigId, ConfigTables};
use crate::kinematics::{skeleton_points, ArmJointConfig, SectionGeometry, SQRT_3};
use crate::wgrid::{cube_blocked, Connectivity, CubePath, CubePathSupplier, Sphere};

/// Joint values this close to a grid point are treated as on the grid.
pub const GRID_SNAP_TOLERANCE: f64 = 1e-9;

/// Skeleton points sampled per section for collision tests.
pub const DEFAULT_SKELETON_SAMPLES: usize = 10;

/// Cube paths attempted before the planner reports failure.
pub const DEFAULT_RETRY_BUDGET: usize = 8;

/// Sentinel predecessor index for unreached configurations.
pub const NO_PRED: u32 = u32::MAX;

/// Where the tip should end up.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    /// Reach any configuration whose tip shares a cube with this point.
    Point(Vector3<f64>),
    /// Reach this exact grid configuration.
    Config(ArmJointConfig),
}

/// A single planning query against a prebuilt cache.
#[derive(Debug, Clone)]
pub struct PlanRequest<'a> {
    pub start: ArmJointConfig,
    pub target: Target,
    pub obstacles: &'a [Sphere],
    pub connectivity: Connectivity,
    pub retry_budget: usize,
    pub skeleton_samples: usize,
}

impl<'a> PlanRequest<'a> {
    pub fn new(start: ArmJointConfig, target: Target, obstacles: &'a [Sphere]) -> Self {
        PlanRequest {
            start,
            target,
            obstacles,
            connectivity: Connectivity::default(),
            retry_budget: DEFAULT_RETRY_BUDGET,
            skeleton_samples: DEFAULT_SKELETON_SAMPLES,
        }
    }
}

/// The query itself was unusable, as opposed to honestly unreachable.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("start configuration is unusable: {0}")]
    InvalidStart(String),
    #[error("target configuration is unusable: {0}")]
    InvalidTarget(String),
    #[error("target point lies outside the workspace box")]
    TargetOutOfBounds,
}

/// Why one attempted cube path produced no configuration path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttemptFailure {
    /// No route through the cube grid (or no further alternate route).
    NoCubePath,
    /// Layer at this cube path index held no collision-free configuration.
    EmptyLayer(usize),
    /// No configuration in the layer at this index could be reached from
    /// the previous layer.
    DisconnectedBoundary(usize),
}

/// One cube path the planner tried and gave up on.
#[derive(Debug, Clone, PartialEq)]
pub struct Attempt {
    pub cube_path: Option<CubePath>,
    pub failure: AttemptFailure,
}

/// A realized plan: one configuration per visited cube.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanSuccess {
    pub config_path: Vec<ConfigId>,
    pub cube_path: CubePath,
    pub total_cost: f64,
    /// Cached tip position of each configuration along the path.
    pub tip_polyline: Vec<[f32; 3]>,
    /// Cube paths attempted, counting the successful one.
    pub attempts: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlanResult {
    Success(PlanSuccess),
    NoPath { attempts: Vec<Attempt> },
}

/// Wall-clock time spent in each planning phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhaseTimings {
    pub cube_path: Duration,
    pub layer_build: Duration,
    pub relaxation: Duration,
}

/// One cost frontier: the collision-free configurations of a cube, their
/// best-known costs, and predecessor indices into the previous layer.
#[derive(Debug, Clone)]
pub struct Layer {
    pub cube: u64,
    /// Ascending configuration ids.
    pub ids: Vec<ConfigId>,
    pub costs: Vec<f64>,
    pub preds: Vec<u32>,
}

impl Layer {
    fn singleton(cube: u64, id: ConfigId) -> Self {
        Layer {
            cube,
            ids: vec![id],
            costs: vec![0.0],
            preds: vec![NO_PRED],
        }
    }

    fn retire(self) -> RetiredLayer {
        RetiredLayer {
            ids: self.ids,
            preds: self.preds,
        }
    }
}

/// What an already-relaxed layer keeps for path reconstruction.
struct RetiredLayer {
    ids: Vec<ConfigId>,
    preds: Vec<u32>,
}

/// Wraps an angle difference onto `(-pi, pi]` up to the sign of an exact
/// half turn, whose square is unaffected.
pub(crate) fn wrap_angle(d: f64) -> f64 {
    d - std::f64::consts::TAU * (d / std::f64::consts::TAU).round()
}

/// Actuation-space distance between two configurations: the Euclidean norm
/// of the six curve parameter differences, section by section, azimuth
/// difference wrapped. Symmetric down to the bit.
pub fn edge_weight(tables: &ConfigTables, a: ConfigId, b: ConfigId) -> f64 {
    let sa = tables.split(a);
    let sb = tables.split(b);
    let mut acc = 0.0;
    for sec in 0..3 {
        let ca = &tables.sample(sec, sa[sec]).curve;
        let cb = &tables.sample(sec, sb[sec]).curve;
        let dt = wrap_angle(cb.theta - ca.theta);
        let dp = cb.phi - ca.phi;
        acc += dt * dt;
        acc += dp * dp;
    }
    acc.sqrt()
}

fn section_geometries(tables: &ConfigTables) -> [SectionGeometry; 3] {
    [
        tables.sections[0].geometry.clone(),
        tables.sections[1].geometry.clone(),
        tables.sections[2].geometry.clone(),
    ]
}

/// True when any sampled skeleton point touches any obstacle sphere
/// (boundary contact counts as a collision).
pub fn config_collides(
    c: &ArmJointConfig,
    geoms: &[SectionGeometry; 3],
    obstacles: &[Sphere],
    skeleton_samples: usize,
) -> bool {
    if obstacles.is_empty() {
        return false;
    }
    skeleton_points(c, geoms, skeleton_samples).iter().any(|p| {
        obstacles
            .iter()
            .any(|s| (p - s.center).norm_squared() <= s.radius * s.radius)
    })
}

/// Builds the layer of a cube: its bucketed configurations minus any that
/// collide with an obstacle.
pub fn build_layer(
    cache: &PlannerCache,
    cube: u64,
    obstacles: &[Sphere],
    geoms: &[SectionGeometry; 3],
    skeleton_samples: usize,
) -> Layer {
    let bucket = cache.buckets.bucket(cube);
    let ids: Vec<ConfigId> = bucket
        .iter()
        .copied()
        .filter(|&id| {
            !config_collides(
                &cache.tables.joint_config(id),
                geoms,
                obstacles,
                skeleton_samples,
            )
        })
        .collect();
    let n = ids.len();
    Layer {
        cube,
        ids,
        costs: vec![f64::INFINITY; n],
        preds: vec![NO_PRED; n],
    }
}

/// Best cost and predecessor for one configuration of the next layer. Pure
/// in its inputs, so the enclosing parallel loop is order-free.
fn relax_one(tables: &ConfigTables, prev: &Layer, v: ConfigId) -> (f64, u32) {
    let mut best_cost = f64::INFINITY;
    let mut best_pred = NO_PRED;
    let mut best_u = u64::MAX;
    let mut buf = Vec::with_capacity(12);
    tables.neighbors_into(v, &mut buf);
    for &u in &buf {
        if let Ok(k) = prev.ids.binary_search(&u) {
            let base = prev.costs[k];
            if !base.is_finite() {
                continue;
            }
            let cand = base + edge_weight(tables, u, v);
            if cand < best_cost || (cand == best_cost && u < best_u) {
                best_cost = cand;
                best_pred = k as u32;
                best_u = u;
            }
        }
    }
    (best_cost, best_pred)
}

/// Relaxes every configuration of `next` against `prev`, in parallel. Cost
/// ties resolve toward the lowest predecessor id, so the outcome is
/// bit-identical for any rayon worker count.
pub fn relax_boundary(tables: &ConfigTables, prev: &Layer, next: &mut Layer) {
    let results: Vec<(f64, u32)> = next
        .ids
        .par_iter()
        .map(|&v| relax_one(tables, prev, v))
        .collect();
    for (slot, (cost, pred)) in results.into_iter().enumerate() {
        next.costs[slot] = cost;
        next.preds[slot] = pred;
    }
}

enum ResolvedTarget {
    Point,
    Config(ConfigId),
}

fn tip_point(t: [f32; 3]) -> Vector3<f64> {
    Vector3::new(t[0] as f64, t[1] as f64, t[2] as f64)
}

/// Plans a path and reports how long each phase took.
pub fn plan_timed(
    cache: &PlannerCache,
    req: &PlanRequest,
) -> Result<(PlanResult, PhaseTimings), PlanError> {
    let tables = &cache.tables;
    let geoms = section_geometries(tables);
    let start_id = tables
        .locate(&req.start, GRID_SNAP_TOLERANCE)
        .map_err(|e| PlanError::InvalidStart(e.to_string()))?;
    let start = tables.joint_config(start_id);
    if config_collides(&start, &geoms, req.obstacles, req.skeleton_samples) {
        return Err(PlanError::InvalidStart(
            "the configuration touches an obstacle".into(),
        ));
    }
    let s_cube = cache
        .bbox
        .cube_of(tip_point(cache.tips[start_id as usize]))
        .map_err(|_| {
            PlanError::InvalidStart("the tip lies outside the workspace box".into())
        })?;
    let (target, t_cube) = match &req.target {
        Target::Point(p) => {
            let c = cache
                .bbox
                .cube_of(*p)
                .map_err(|_| PlanError::TargetOutOfBounds)?;
            (ResolvedTarget::Point, c)
        }
        Target::Config(c) => {
            let id = tables
                .locate(c, GRID_SNAP_TOLERANCE)
                .map_err(|e| PlanError::InvalidTarget(e.to_string()))?;
            let cube = cache
                .bbox
                .cube_of(tip_point(cache.tips[id as usize]))
                .map_err(|_| PlanError::TargetOutOfBounds)?;
            (ResolvedTarget::Config(id), cube)
        }
    };

    let mut timings = PhaseTimings::default();
    let mut supplier = CubePathSupplier::new(
        s_cube,
        t_cube,
        &cache.bbox,
        req.obstacles,
        req.connectivity,
    );
    let mut attempts = Vec::new();
    let budget = req.retry_budget.max(1);
    while attempts.len() < budget {
        let t0 = Instant::now();
        let next = supplier.next_path();
        timings.cube_path += t0.elapsed();
        let Some(cube_path) = next else {
            attempts.push(Attempt {
                cube_path: None,
                failure: AttemptFailure::NoCubePath,
            });
            break;
        };
        match run_layers(cache, &geoms, req, start_id, &target, &cube_path, &mut timings) {
            Ok(mut success) => {
                success.attempts = attempts.len() + 1;
                return Ok((PlanResult::Success(success), timings));
            }
            Err(failure) => attempts.push(Attempt {
                cube_path: Some(cube_path),
                failure,
            }),
        }
    }
    Ok((PlanResult::NoPath { attempts }, timings))
}

/// Plans a path: resolve the endpoints, route the tip through the cube
/// grid, then thread one configuration per cube with minimal actuation
/// cost, falling back to alternate cube routes within the retry budget.
pub fn plan(cache: &PlannerCache, req: &PlanRequest) -> Result<PlanResult, PlanError> {
    plan_timed(cache, req).map(|(r, _)| r)
}

fn run_layers(
    cache: &PlannerCache,
    geoms: &[SectionGeometry; 3],
    req: &PlanRequest,
    start_id: ConfigId,
    target: &ResolvedTarget,
    cube_path: &CubePath,
    timings: &mut PhaseTimings,
) -> Result<PlanSuccess, AttemptFailure> {
    let tables = &cache.tables;
    let mut retired: Vec<RetiredLayer> = Vec::with_capacity(cube_path.cubes.len());
    let mut current = Layer::singleton(cube_path.cubes[0], start_id);
    for (i, &cube) in cube_path.cubes.iter().enumerate().skip(1) {
        let t0 = Instant::now();
        let mut next = build_layer(cache, cube, req.obstacles, geoms, req.skeleton_samples);
        timings.layer_build += t0.elapsed();
        if next.ids.is_empty() {
            return Err(AttemptFailure::EmptyLayer(i));
        }
        let t1 = Instant::now();
        relax_boundary(tables, &current, &mut next);
        timings.relaxation += t1.elapsed();
        if next.costs.iter().all(|c| !c.is_finite()) {
            return Err(AttemptFailure::DisconnectedBoundary(i));
        }
        retired.push(current.retire());
        current = next;
    }

    let last = cube_path.cubes.len() - 1;
    let chosen = match target {
        ResolvedTarget::Point => {
            let mut best: Option<(f64, usize)> = None;
            for (k, &cost) in current.costs.iter().enumerate() {
                if !cost.is_finite() {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bc, bk)) => {
                        cost < bc || (cost == bc && current.ids[k] < current.ids[bk])
                    }
                };
                if better {
                    best = Some((cost, k));
                }
            }
            best.ok_or(AttemptFailure::DisconnectedBoundary(last))?.1
        }
        ResolvedTarget::Config(id) => {
            let k = current
                .ids
                .binary_search(id)
                .map_err(|_| AttemptFailure::DisconnectedBoundary(last))?;
            if !current.costs[k].is_finite() {
                return Err(AttemptFailure::DisconnectedBoundary(last));
            }
            k
        }
    };

    let total_cost = current.costs[chosen];
    let mut config_path = vec![current.ids[chosen]];
    let mut idx = current.preds[chosen];
    for layer in retired.iter().rev() {
        config_path.push(layer.ids[idx as usize]);
        idx = layer.preds[idx as usize];
    }
    debug_assert_eq!(idx, NO_PRED);
    config_path.reverse();
    let tip_polyline = config_path
        .iter()
        .map(|&id| cache.tips[id as usize])
        .collect();
    Ok(PlanSuccess {
        config_path,
        cube_path: cube_path.clone(),
        total_cost,
        tip_polyline,
        attempts: 1,
    })
}

/// Outcome of one validation check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: Option<String>,
}

/// Independent re-examination of a reported plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &'static str, passed: bool, detail: Option<String>) -> ValidationCheck {
    ValidationCheck {
        name,
        passed,
        detail,
    }
}

/// Re-derives every claim a [`PlanSuccess`] makes: the cube path is sound,
/// configurations sit in their cubes, consecutive configurations are grid
/// adjacent, nothing collides, the cost re-sums, and the terminal condition
/// holds.
pub fn validate_path(
    cache: &PlannerCache,
    success: &PlanSuccess,
    req: &PlanRequest,
) -> ValidationReport {
    let tables = &cache.tables;
    let geoms = section_geometries(tables);
    let bbox = &cache.bbox;
    let cubes = &success.cube_path.cubes;
    let path = &success.config_path;
    let mut checks = Vec::new();

    let mut cube_ok = !cubes.is_empty();
    let mut cube_detail = None;
    for (i, &c) in cubes.iter().enumerate() {
        if c >= bbox.cube_count() {
            cube_ok = false;
            cube_detail = Some(format!("cube {i} is out of range"));
            break;
        }
        let id = bbox.unflat(c);
        if req.obstacles.iter().any(|s| cube_blocked(id, bbox, s)) {
            cube_ok = false;
            cube_detail = Some(format!("cube {i} overlaps an obstacle"));
            break;
        }
        if i > 0 {
            let p = bbox.unflat(cubes[i - 1]);
            let d = [
                p.ix.abs_diff(id.ix),
                p.iy.abs_diff(id.iy),
                p.iz.abs_diff(id.iz),
            ];
            let step_ok = match req.connectivity {
                Connectivity::Six => d.iter().sum::<u32>() == 1,
                Connectivity::TwentySix => {
                    d.iter().all(|&x| x <= 1) && d.iter().any(|&x| x == 1)
                }
            };
            if !step_ok {
                cube_ok = false;
                cube_detail = Some(format!("cubes {} and {i} are not adjacent", i - 1));
                break;
            }
        }
    }
    checks.push(check("cube-path", cube_ok, cube_detail));

    let mut member_ok = path.len() == cubes.len() && !path.is_empty();
    let mut member_detail =
        (!member_ok).then(|| "configuration and cube paths differ in length".to_string());
    if member_ok {
        for (i, &id) in path.iter().enumerate() {
            let tip = tip_point(cache.tips[id as usize]);
            match bbox.cube_of(tip) {
                Ok(c) if bbox.flat(c) == cubes[i] => {}
                _ => {
                    member_ok = false;
                    member_detail =
                        Some(format!("configuration {i} does not sit in its cube"));
                    break;
                }
            }
        }
    }
    checks.push(check("cube-membership", member_ok, member_detail));

    let mut adj_ok = true;
    let mut adj_detail = None;
    for (i, w) in path.windows(2).enumerate() {
        if !tables.adjacent(w[0], w[1]) {
            adj_ok = false;
            adj_detail = Some(format!("configurations {i} and {} are not adjacent", i + 1));
            break;
        }
    }
    checks.push(check("config-adjacency", adj_ok, adj_detail));

    let mut coll_ok = true;
    let mut coll_detail = None;
    for (i, &id) in path.iter().enumerate() {
        let c = tables.joint_config(id);
        if config_collides(&c, &geoms, req.obstacles, req.skeleton_samples) {
            coll_ok = false;
            coll_detail = Some(format!("configuration {i} touches an obstacle"));
            break;
        }
    }
    checks.push(check("collision-free", coll_ok, coll_detail));

    let mut resum = 0.0;
    for w in path.windows(2) {
        resum += edge_weight(tables, w[0], w[1]);
    }
    let cost_ok = (resum - success.total_cost).abs() <= 1e-9;
    checks.push(check(
        "cost-consistency",
        cost_ok,
        (!cost_ok).then(|| format!("re-summed {resum}, reported {}", success.total_cost)),
    ));

    let (term_ok, term_detail) = match (&req.target, path.last()) {
        (Target::Point(p), Some(&last)) => {
            let tip = tip_point(cache.tips[last as usize]);
            let dist = (tip - p).norm();
            let bound = SQRT_3 * bbox.cube_dim() + 1e-12;
            (
                dist <= bound,
                (dist > bound).then(|| format!("terminal tip is {dist} from the target")),
            )
        }
        (Target::Config(c), Some(&last)) => match tables.locate(c, GRID_SNAP_TOLERANCE) {
            Ok(id) => (
                id == last,
                (id != last).then(|| "path ends at a different configuration".to_string()),
            ),
            Err(e) => (false, Some(e.to_string())),
        },
        (_, None) => (false, Some("empty configuration path".to_string())),
    };
    checks.push(check("terminal", term_ok, term_detail));

    ValidationReport { checks }
}
