//! Discretized configuration space: per-section actuator grids, valid sample
//! tables with cached curve parameters and frames, flat config ids over the
//! three-section product space, tip enumeration, and the cube-bucket index
//! that groups configurations by the workspace cube their tip lands in.

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::kinematics::{
    curve_params, exact_bend_valid, is_valid_actuation, ArmJointConfig, CurveParams,
    EllipseCoefficients, JointPair, RigidTransform, SectionGeometry,
};
use crate::wgrid::BoundingBox;

/// Flat index of a three-section configuration, section 0 outermost.
pub type ConfigId = u64;

/// Marks an empty cell in a [`SectionSampleTable`] lookup.
pub const INVALID_SAMPLE: u32 = u32::MAX;

/// Uniform actuator grid: `steps` values from `min` to `max` inclusive,
/// applied to both actuators of a section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub steps: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid actuator grid: {0}")]
pub struct GridError(pub &'static str);

impl GridSpec {
    pub fn new(min: f64, max: f64, steps: u32) -> Result<Self, GridError> {
        if !min.is_finite() || !max.is_finite() {
            return Err(GridError("bounds must be finite"));
        }
        if !(min < max) {
            return Err(GridError("min must be below max"));
        }
        if steps < 2 {
            return Err(GridError("at least two steps are required"));
        }
        Ok(GridSpec { min, max, steps })
    }

    pub fn value(&self, k: u32) -> f64 {
        self.min + k as f64 * (self.max - self.min) / (self.steps - 1) as f64
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.steps - 1) as f64
    }

    /// Grid index whose value lies within `tol` of `v`, if any.
    pub fn index_of(&self, v: f64, tol: f64) -> Option<u32> {
        if !v.is_finite() {
            return None;
        }
        let k = ((v - self.min) / self.spacing()).round();
        if k < 0.0 || k > (self.steps - 1) as f64 {
            return None;
        }
        let k = k as u32;
        ((v - self.value(k)).abs() <= tol).then_some(k)
    }
}

/// One admissible actuator pair with everything derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionSample {
    /// Grid indices `(k1, k2)` of the actuator pair.
    pub grid: [u32; 2],
    pub joints: JointPair,
    pub curve: CurveParams,
    /// Full-section frame, joint offset included.
    pub frame: RigidTransform,
}

/// All admissible samples of one section, with a dense grid-to-sample lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionSampleTable {
    pub grid: GridSpec,
    pub geometry: SectionGeometry,
    pub samples: Vec<SectionSample>,
    lookup: Vec<u32>,
}

/// The validity region excludes every grid point of a section.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no grid point satisfies the actuation validity tests")]
pub struct EmptyTable;

impl SectionSampleTable {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sample index at grid cell `(k1, k2)`, if that cell is admissible.
    pub fn sample_at(&self, k1: u32, k2: u32) -> Option<u32> {
        if k1 >= self.grid.steps || k2 >= self.grid.steps {
            return None;
        }
        let v = self.lookup[(k1 * self.grid.steps + k2) as usize];
        (v != INVALID_SAMPLE).then_some(v)
    }

    /// Rebuilds a table from stored samples, reconstructing the lookup.
    /// Sample grid cells must be in bounds and free of duplicates.
    pub(crate) fn from_samples(
        grid: GridSpec,
        geometry: SectionGeometry,
        samples: Vec<SectionSample>,
    ) -> Result<Self, GridError> {
        let n = grid.steps as usize;
        let mut lookup = vec![INVALID_SAMPLE; n * n];
        for (i, s) in samples.iter().enumerate() {
            let [k1, k2] = s.grid;
            if k1 >= grid.steps || k2 >= grid.steps {
                return Err(GridError("sample grid cell out of bounds"));
            }
            let cell = &mut lookup[(k1 * grid.steps + k2) as usize];
            if *cell != INVALID_SAMPLE {
                return Err(GridError("duplicate sample grid cell"));
            }
            *cell = i as u32;
        }
        Ok(SectionSampleTable {
            grid,
            geometry,
            samples,
            lookup,
        })
    }
}

/// Which test gates a grid point during enumeration: the fitted validity
/// quadratic (the default) or the exact arc-angle bound. The quadratic is a
/// hair more permissive near the `l1 = l2` diagonal, where it admits arc
/// angles up to about 3% past the bend limit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ValidityFilter {
    #[default]
    Quadratic,
    ExactBend,
}

impl ValidityFilter {
    pub fn admits(
        self,
        j: JointPair,
        geometry: &SectionGeometry,
        coeffs: &EllipseCoefficients,
    ) -> bool {
        match self {
            ValidityFilter::Quadratic => is_valid_actuation(j, coeffs),
            ValidityFilter::ExactBend => exact_bend_valid(j, geometry),
        }
    }
}

/// Enumerates the admissible actuator pairs of one section in row-major grid
/// order, gated by the chosen validity filter.
pub fn enumerate_section_samples(
    grid: GridSpec,
    geometry: &SectionGeometry,
    coeffs: &EllipseCoefficients,
    filter: ValidityFilter,
) -> Result<SectionSampleTable, EmptyTable> {
    let n = grid.steps as usize;
    let mut samples = Vec::new();
    let mut lookup = vec![INVALID_SAMPLE; n * n];
    for k1 in 0..grid.steps {
        for k2 in 0..grid.steps {
            let j = JointPair::new(grid.value(k1), grid.value(k2));
            if !filter.admits(j, geometry, coeffs) {
                continue;
            }
            let curve = curve_params(j, geometry);
            let frame = crate::kinematics::section_transform(
                j,
                geometry,
                crate::kinematics::ArcFraction::FULL,
            );
            lookup[(k1 * grid.steps + k2) as usize] = samples.len() as u32;
            samples.push(SectionSample {
                grid: [k1, k2],
                joints: j,
                curve,
                frame,
            });
        }
    }
    if samples.is_empty() {
        return Err(EmptyTable);
    }
    Ok(SectionSampleTable {
        grid,
        geometry: geometry.clone(),
        samples,
        lookup,
    })
}

/// Why a joint configuration could not be mapped onto the sample tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum LocateError {
    #[error("section {section} actuator {axis} is not on the grid")]
    OffGrid { section: usize, axis: usize },
    #[error("section {section} grid point fails the validity tests")]
    Invalid { section: usize },
}

/// The three per-section tables and the flat id arithmetic over their
/// product.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigTables {
    pub sections: [SectionSampleTable; 3],
}

impl ConfigTables {
    pub fn new(sections: [SectionSampleTable; 3]) -> Self {
        ConfigTables { sections }
    }

    /// Per-section sample counts.
    pub fn counts(&self) -> [usize; 3] {
        [
            self.sections[0].len(),
            self.sections[1].len(),
            self.sections[2].len(),
        ]
    }

    pub fn config_count(&self) -> u64 {
        self.counts().iter().map(|&n| n as u64).product()
    }

    /// Per-section sample indices of a flat id.
    pub fn split(&self, id: ConfigId) -> [u32; 3] {
        let [_, n2, n3] = self.counts();
        let s3 = id % n3 as u64;
        let rest = id / n3 as u64;
        let s2 = rest % n2 as u64;
        let s1 = rest / n2 as u64;
        [s1 as u32, s2 as u32, s3 as u32]
    }

    pub fn fuse(&self, s: [u32; 3]) -> ConfigId {
        let [_, n2, n3] = self.counts();
        (s[0] as u64 * n2 as u64 + s[1] as u64) * n3 as u64 + s[2] as u64
    }

    pub fn sample(&self, section: usize, idx: u32) -> &SectionSample {
        &self.sections[section].samples[idx as usize]
    }

    pub fn joint_config(&self, id: ConfigId) -> ArmJointConfig {
        let s = self.split(id);
        ArmJointConfig::new([
            self.sample(0, s[0]).joints,
            self.sample(1, s[1]).joints,
            self.sample(2, s[2]).joints,
        ])
    }

    /// True when exactly one of the six grid indices differs by exactly one
    /// step between the two configurations.
    pub fn adjacent(&self, a: ConfigId, b: ConfigId) -> bool {
        let sa = self.split(a);
        let sb = self.split(b);
        let mut diffs = 0u32;
        for sec in 0..3 {
            let ga = self.sample(sec, sa[sec]).grid;
            let gb = self.sample(sec, sb[sec]).grid;
            for axis in 0..2 {
                let d = ga[axis].abs_diff(gb[axis]);
                if d > 1 {
                    return false;
                }
                diffs += d;
            }
        }
        diffs == 1
    }

    /// Appends the ids adjacent to `id` (at most twelve) in a fixed order:
    /// section, then axis, then the lower step before the higher.
    pub fn neighbors_into(&self, id: ConfigId, out: &mut Vec<ConfigId>) {
        let s = self.split(id);
        for sec in 0..3 {
            let table = &self.sections[sec];
            let g = table.samples[s[sec] as usize].grid;
            for axis in 0..2 {
                for delta in [-1i64, 1] {
                    let k = g[axis] as i64 + delta;
                    if k < 0 {
                        continue;
                    }
                    let mut cell = g;
                    cell[axis] = k as u32;
                    if let Some(idx) = table.sample_at(cell[0], cell[1]) {
                        let mut ns = s;
                        ns[sec] = idx;
                        out.push(self.fuse(ns));
                    }
                }
            }
        }
    }

    pub fn neighbors(&self, id: ConfigId) -> Vec<ConfigId> {
        let mut out = Vec::with_capacity(12);
        self.neighbors_into(id, &mut out);
        out
    }

    /// Maps explicit joint values onto a flat id, accepting values within
    /// `tol` of a grid point.
    pub fn locate(&self, c: &ArmJointConfig, tol: f64) -> Result<ConfigId, LocateError> {
        let mut s = [0u32; 3];
        for sec in 0..3 {
            let table = &self.sections[sec];
            let j = c.sections[sec];
            let k1 = table
                .grid
                .index_of(j.l1, tol)
                .ok_or(LocateError::OffGrid { section: sec, axis: 0 })?;
            let k2 = table
                .grid
                .index_of(j.l2, tol)
                .ok_or(LocateError::OffGrid { section: sec, axis: 1 })?;
            s[sec] = table
                .sample_at(k1, k2)
                .ok_or(LocateError::Invalid { section: sec })?;
        }
        Ok(self.fuse(s))
    }
}

/// Tip position of every configuration, in flat id order, stored single
/// precision. The tip is the composed full-section frame position.
pub fn enumerate_tips(tables: &ConfigTables) -> Vec<[f32; 3]> {
    let [n1, n2, n3] = tables.counts();
    let mut tips = vec![[0f32; 3]; n1 * n2 * n3];
    tips.par_chunks_mut(n2 * n3)
        .enumerate()
        .for_each(|(s1, chunk)| {
            let t1 = &tables.sections[0].samples[s1].frame;
            for s2 in 0..n2 {
                let t12 = t1.compose(&tables.sections[1].samples[s2].frame);
                for (s3, slot) in chunk[s2 * n3..(s2 + 1) * n3].iter_mut().enumerate() {
                    let p = t12.transform_point(tables.sections[2].samples[s3].frame.position);
                    *slot = [p.x as f32, p.y as f32, p.z as f32];
                }
            }
        });
    tips
}

/// Configurations grouped by the workspace cube containing their tip.
///
/// `offsets` is a prefix-sum array of length `cube_count + 1`; the ids of
/// cube `c` are `ids[offsets[c]..offsets[c + 1]]`, ascending. Tips outside
/// the box are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeBuckets {
    offsets: Vec<u64>,
    ids: Vec<u64>,
    dropped: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("inconsistent cube bucket arrays: {0}")]
pub struct BucketError(pub &'static str);

impl CubeBuckets {
    pub fn bucket(&self, flat_cube: u64) -> &[u64] {
        let lo = self.offsets[flat_cube as usize] as usize;
        let hi = self.offsets[flat_cube as usize + 1] as usize;
        &self.ids[lo..hi]
    }

    pub fn cube_count(&self) -> u64 {
        (self.offsets.len() - 1) as u64
    }

    /// Number of configurations whose tip fell outside the box.
    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    pub fn bucketed(&self) -> u64 {
        self.ids.len() as u64
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub(crate) fn from_raw(
        offsets: Vec<u64>,
        ids: Vec<u64>,
        config_count: u64,
    ) -> Result<Self, BucketError> {
        if offsets.is_empty() || offsets[0] != 0 {
            return Err(BucketError("offsets must start at zero"));
        }
        if offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(BucketError("offsets must be nondecreasing"));
        }
        if *offsets.last().unwrap() != ids.len() as u64 {
            return Err(BucketError("offsets must end at the id count"));
        }
        if ids.len() as u64 > config_count {
            return Err(BucketError("more bucketed ids than configurations"));
        }
        if ids.iter().any(|&id| id >= config_count) {
            return Err(BucketError("config id out of range"));
        }
        let dropped = config_count - ids.len() as u64;
        Ok(CubeBuckets {
            offsets,
            ids,
            dropped,
        })
    }
}

/// Buckets every tip into its workspace cube with a stable counting sort, so
/// ids within a bucket are ascending and rebuilds are bit-identical.
pub fn build_buckets(tips: &[[f32; 3]], bbox: &BoundingBox) -> CubeBuckets {
    let cube_count = bbox.cube_count() as usize;
    let cube_of_tip: Vec<u64> = tips
        .par_iter()
        .map(|t| {
            let p = Vector3::new(t[0] as f64, t[1] as f64, t[2] as f64);
            match bbox.cube_of(p) {
                Ok(c) => bbox.flat(c),
                Err(_) => u64::MAX,
            }
        })
        .collect();
    let mut offsets = vec![0u64; cube_count + 1];
    for &c in &cube_of_tip {
        if c != u64::MAX {
            offsets[c as usize + 1] += 1;
        }
    }
    for k in 1..=cube_count {
        offsets[k] += offsets[k - 1];
    }
    let mut fill = offsets.clone();
    let mut ids = vec![0u64; offsets[cube_count] as usize];
    for (i, &c) in cube_of_tip.iter().enumerate() {
        if c != u64::MAX {
            ids[fill[c as usize] as usize] = i as u64;
            fill[c as usize] += 1;
        }
    }
    let dropped = tips.len() as u64 - ids.len() as u64;
    CubeBuckets {
        offsets,
        ids,
        dropped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{arm_transform, ArcFraction};
    use approx::assert_abs_diff_eq;

    fn default_tables(steps: u32) -> ConfigTables {
        let grid = GridSpec::new(-0.04, 0.04, steps).unwrap();
        let g = SectionGeometry::default();
        let coeffs = EllipseCoefficients::default();
        let table =
            enumerate_section_samples(grid, &g, &coeffs, ValidityFilter::default()).unwrap();
        ConfigTables::new([table.clone(), table.clone(), table])
    }

    #[test]
    fn grid_hits_both_endpoints_exactly() {
        let grid = GridSpec::new(-0.04, 0.04, 13).unwrap();
        assert_eq!(grid.value(0), -0.04);
        assert_eq!(grid.value(12), 0.04);
        assert_abs_diff_eq!(grid.spacing(), 0.08 / 12.0, epsilon = 1e-18);
    }

    #[test]
    fn grid_index_lookup_respects_the_tolerance() {
        let grid = GridSpec::new(-0.04, 0.04, 13).unwrap();
        for k in 0..13 {
            assert_eq!(grid.index_of(grid.value(k), 1e-9), Some(k));
            assert_eq!(grid.index_of(grid.value(k) + 5e-10, 1e-9), Some(k));
        }
        assert_eq!(grid.index_of(grid.value(3) + 2e-9, 1e-9), None);
        assert_eq!(grid.index_of(0.05, 1e-9), None);
        assert_eq!(grid.index_of(f64::NAN, 1e-9), None);
    }

    #[test]
    fn grid_spec_rejects_degenerate_bounds() {
        assert!(GridSpec::new(0.04, -0.04, 13).is_err());
        assert!(GridSpec::new(-0.04, 0.04, 1).is_err());
        assert!(GridSpec::new(f64::NAN, 0.04, 13).is_err());
    }

    #[test]
    fn five_step_section_admits_exactly_the_hand_checked_cells() {
        let grid = GridSpec::new(-0.04, 0.04, 5).unwrap();
        let table = enumerate_section_samples(
            grid,
            &SectionGeometry::default(),
            &EllipseCoefficients::default(),
            ValidityFilter::Quadratic,
        )
        .unwrap();
        let mut cells: Vec<[i32; 2]> = table
            .samples
            .iter()
            .map(|s| [s.grid[0] as i32 - 2, s.grid[1] as i32 - 2])
            .collect();
        cells.sort();
        let mut expected = vec![
            [0, 0],
            [1, 0],
            [-1, 0],
            [0, 1],
            [0, -1],
            [1, 1],
            [-1, -1],
            [1, -1],
            [-1, 1],
            [2, 1],
            [1, 2],
            [-2, -1],
            [-1, -2],
        ];
        expected.sort();
        assert_eq!(cells, expected);
    }

    #[test]
    fn lookup_round_trips_every_sample() {
        let grid = GridSpec::new(-0.04, 0.04, 13).unwrap();
        let table = enumerate_section_samples(
            grid,
            &SectionGeometry::default(),
            &EllipseCoefficients::default(),
            ValidityFilter::Quadratic,
        )
        .unwrap();
        assert!(table.len() > 13);
        for (i, s) in table.samples.iter().enumerate() {
            assert_eq!(table.sample_at(s.grid[0], s.grid[1]), Some(i as u32));
        }
        // Extreme corners exceed the validity region.
        assert_eq!(table.sample_at(0, 0), None);
        assert_eq!(table.sample_at(0, 12), None);
        assert_eq!(table.sample_at(12, 0), None);
        assert_eq!(table.sample_at(12, 12), None);
    }

    #[test]
    fn an_unreachable_validity_region_yields_an_empty_table_error() {
        let grid = GridSpec::new(-0.04, 0.04, 5).unwrap();
        let never = EllipseCoefficients {
            a: -1.0,
            b: 0.0,
            c: -1.0,
            d: 0.0,
            e: 0.0,
            f: -0.1,
        };
        let res = enumerate_section_samples(
            grid,
            &SectionGeometry::default(),
            &never,
            ValidityFilter::Quadratic,
        );
        assert_eq!(res.unwrap_err(), EmptyTable);
    }

    #[test]
    fn flat_ids_round_trip_through_split_and_fuse() {
        let tables = default_tables(5);
        for id in 0..tables.config_count() {
            assert_eq!(tables.fuse(tables.split(id)), id);
        }
    }

    #[test]
    fn straight_center_has_the_full_twelve_neighbors() {
        let tables = default_tables(13);
        let center = tables
            .locate(
                &ArmJointConfig::new([JointPair::new(0.0, 0.0); 3]),
                1e-9,
            )
            .unwrap();
        let ns = tables.neighbors(center);
        assert_eq!(ns.len(), 12);
        for n in &ns {
            assert!(tables.adjacent(center, *n));
            assert!(tables.adjacent(*n, center));
            assert!(tables.neighbors(*n).contains(&center));
        }
        assert!(!tables.adjacent(center, center));
    }

    #[test]
    fn validity_boundary_samples_lose_neighbors() {
        let tables = default_tables(5);
        // (2, 1) offsets from center sit on the validity boundary.
        let table = &tables.sections[0];
        let idx = table.sample_at(4, 3).unwrap();
        let id = tables.fuse([idx, 0, 0]);
        assert!(tables.neighbors(id).len() < 12);
    }

    #[test]
    fn locate_distinguishes_off_grid_from_invalid() {
        let tables = default_tables(13);
        let spacing = tables.sections[0].grid.spacing();
        let off = ArmJointConfig::new([
            JointPair::new(0.5 * spacing, 0.0),
            JointPair::new(0.0, 0.0),
            JointPair::new(0.0, 0.0),
        ]);
        assert_eq!(
            tables.locate(&off, 1e-9),
            Err(LocateError::OffGrid { section: 0, axis: 0 })
        );
        let invalid = ArmJointConfig::new([
            JointPair::new(0.0, 0.0),
            JointPair::new(-0.04, -0.04),
            JointPair::new(0.0, 0.0),
        ]);
        assert_eq!(
            tables.locate(&invalid, 1e-9),
            Err(LocateError::Invalid { section: 1 })
        );
    }

    #[test]
    fn tip_enumeration_matches_the_arm_transform() {
        let tables = default_tables(5);
        let tips = enumerate_tips(&tables);
        assert_eq!(tips.len() as u64, tables.config_count());
        let geoms = [
            tables.sections[0].geometry.clone(),
            tables.sections[1].geometry.clone(),
            tables.sections[2].geometry.clone(),
        ];
        for id in [0u64, 7, 100, tables.config_count() - 1] {
            let c = tables.joint_config(id);
            let p = arm_transform(&c, &geoms, ArcFraction::FULL).position;
            let t = tips[id as usize];
            assert_abs_diff_eq!(t[0] as f64, p.x, epsilon = 1e-6);
            assert_abs_diff_eq!(t[1] as f64, p.y, epsilon = 1e-6);
            assert_abs_diff_eq!(t[2] as f64, p.z, epsilon = 1e-6);
        }
        let straight = tables
            .locate(&ArmJointConfig::new([JointPair::new(0.0, 0.0); 3]), 1e-9)
            .unwrap();
        let t = tips[straight as usize];
        assert_abs_diff_eq!(t[0], 0.0, epsilon = 1e-7);
        assert_abs_diff_eq!(t[1], 0.0, epsilon = 1e-7);
        assert_abs_diff_eq!(t[2], 0.45, epsilon = 1e-7);
    }

    #[test]
    fn buckets_partition_the_bucketed_tips() {
        let tables = default_tables(5);
        let tips = enumerate_tips(&tables);
        let bbox = BoundingBox::around_points(
            tips.iter()
                .map(|t| Vector3::new(t[0] as f64, t[1] as f64, t[2] as f64)),
            0.05,
        )
        .unwrap();
        let buckets = build_buckets(&tips, &bbox);
        assert_eq!(buckets.dropped(), 0);
        assert_eq!(
            buckets.bucketed() + buckets.dropped(),
            tables.config_count()
        );
        let mut seen = vec![false; tips.len()];
        for cube in 0..buckets.cube_count() {
            let b = buckets.bucket(cube);
            for w in b.windows(2) {
                assert!(w[0] < w[1], "bucket ids must ascend");
            }
            for &id in b {
                assert!(!seen[id as usize]);
                seen[id as usize] = true;
                let t = tips[id as usize];
                let p = Vector3::new(t[0] as f64, t[1] as f64, t[2] as f64);
                assert_eq!(bbox.flat(bbox.cube_of(p).unwrap()), cube);
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn tips_outside_the_box_are_counted_as_dropped() {
        let tables = default_tables(5);
        let tips = enumerate_tips(&tables);
        let bbox = BoundingBox::new(
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(0.2, 0.2, 0.5),
            0.05,
        )
        .unwrap();
        let buckets = build_buckets(&tips, &bbox);
        assert!(buckets.dropped() > 0);
        assert_eq!(
            buckets.bucketed() + buckets.dropped(),
            tables.config_count()
        );
    }

    #[test]
    fn bucket_construction_is_deterministic() {
        let tables = default_tables(5);
        let tips = enumerate_tips(&tables);
        let bbox = BoundingBox::around_points(
            tips.iter()
                .map(|t| Vector3::new(t[0] as f64, t[1] as f64, t[2] as f64)),
            0.01,
        )
        .unwrap();
        let a = build_buckets(&tips, &bbox);
        let b = build_buckets(&tips, &bbox);
        assert_eq!(a, b);
        let ta = enumerate_tips(&tables);
        assert_eq!(tips, ta);
    }

    #[test]
    fn raw_bucket_arrays_are_validated() {
        assert!(CubeBuckets::from_raw(vec![0, 1, 2], vec![5, 6], 10).is_ok());
        assert!(CubeBuckets::from_raw(vec![1, 2], vec![5], 10).is_err());
        assert!(CubeBuckets::from_raw(vec![0, 2, 1], vec![5, 6], 10).is_err());
        assert!(CubeBuckets::from_raw(vec![0, 1], vec![5], 3).is_err());
        assert!(CubeBuckets::from_raw(vec![0, 2], vec![5], 10).is_err());
    }
}
