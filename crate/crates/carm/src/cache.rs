//! Binary planner cache: the enumerated section tables, tip positions, and
//! cube buckets, persisted so repeated planning runs skip the enumeration.
//!
//! Layout (all little endian):
//!
//! | field                | type                                      |
//! |----------------------|-------------------------------------------|
//! | magic                | `b"CARM"`                                 |
//! | version              | u32                                       |
//! | grid steps           | u32                                       |
//! | grid min, max        | 2 x f64                                   |
//! | geometry, 3 blocks   | 5 x f64 (length, radius, shift, twist, max bend) |
//! | sample counts        | 3 x u32                                   |
//! | sample tables        | per sample: 2 x u32 grid cell, 2 x f64 joints, 3 x f64 curve, 12 x f64 frame (rotation row major, then position) |
//! | box origin           | 3 x f64                                   |
//! | box cube_dim         | f64                                       |
//! | box cube counts      | 3 x u64                                   |
//! | total cube count     | u64                                       |
//! | total config count   | u64                                       |
//! | bucket offsets       | (cube count + 1) x u64                    |
//! | bucket config ids    | u64 each                                  |
//! | tips                 | 3 x f32 per config, flat id order         |
//! | checksum             | u32, CRC-32 of all preceding bytes        |
//!
//! Straight samples store an infinite curve radius, which round-trips
//! losslessly. Loading validates structure before trusting any array
//! length, so corrupt files fail with a typed error instead of an oversized
//! allocation.

use std::io;
use std::path::Path;

use nalgebra::{Matrix3, Vector3};

use crate::cspace::{
    build_buckets, enumerate_tips, ConfigTables, CubeBuckets, GridSpec, SectionSample,
    SectionSampleTable, ValidityFilter,
};
use crate::kinematics::{
    CurveParams, EllipseCoefficients, JointPair, RigidTransform, SectionGeometry,
};
use crate::wgrid::BoundingBox;

const MAGIC: [u8; 4] = *b"CARM";

/// Current cache format version.
pub const CACHE_VERSION: u32 = 1;

/// Everything the planner needs, precomputed: sample tables, the workspace
/// box, tip positions per configuration, and the cube buckets over them.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannerCache {
    pub tables: ConfigTables,
    pub bbox: BoundingBox,
    pub buckets: CubeBuckets,
    pub tips: Vec<[f32; 3]>,
}

/// A cache could not be assembled from the requested inputs.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuildError {
    #[error(transparent)]
    Grid(#[from] crate::cspace::GridError),
    #[error("section {section} admits no grid point")]
    EmptySection { section: usize },
    #[error(transparent)]
    Box(#[from] crate::wgrid::BoxError),
    #[error("every configuration tip lies outside the workspace box")]
    NoTips,
}

/// A cache file could not be read back.
#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("cache file ends before the structure it declares")]
    TruncatedCache,
    #[error("not a planner cache file")]
    BadMagic,
    #[error("unsupported cache version {found}")]
    VersionMismatch { found: u32 },
    #[error("cache file is longer than the structure it declares")]
    SizeMismatch,
    #[error("cache checksum does not match the contents")]
    ChecksumMismatch,
    #[error("cache contents are inconsistent: {0}")]
    Corrupt(&'static str),
}

impl PlannerCache {
    /// Enumerates the configuration space and buckets every tip. With no
    /// explicit box, the smallest box covering all tips is used.
    pub fn build(
        grid: GridSpec,
        geoms: &[SectionGeometry; 3],
        coeffs: &EllipseCoefficients,
        filter: ValidityFilter,
        bbox: Option<BoundingBox>,
        cube_dim: f64,
    ) -> Result<Self, BuildError> {
        let mut tables = Vec::with_capacity(3);
        for (section, g) in geoms.iter().enumerate() {
            let table = crate::cspace::enumerate_section_samples(grid, g, coeffs, filter)
                .map_err(|_| BuildError::EmptySection { section })?;
            tables.push(table);
        }
        let tables = ConfigTables::new([
            tables.remove(0),
            tables.remove(0),
            tables.remove(0),
        ]);
        let tips = enumerate_tips(&tables);
        let bbox = match bbox {
            Some(b) => b,
            None => BoundingBox::around_points(
                tips.iter()
                    .map(|t| Vector3::new(t[0] as f64, t[1] as f64, t[2] as f64)),
                cube_dim,
            )
            .ok_or(BuildError::NoTips)?,
        };
        let buckets = build_buckets(&tips, &bbox);
        if buckets.bucketed() == 0 {
            return Err(BuildError::NoTips);
        }
        Ok(PlannerCache {
            tables,
            bbox,
            buckets,
            tips,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&MAGIC);
        put_u32(&mut out, CACHE_VERSION);
        let grid = self.tables.sections[0].grid;
        put_u32(&mut out, grid.steps);
        put_f64(&mut out, grid.min);
        put_f64(&mut out, grid.max);
        for table in &self.tables.sections {
            let g = &table.geometry;
            put_f64(&mut out, g.backbone_length);
            put_f64(&mut out, g.offset_radius);
            put_f64(&mut out, g.joint_shift);
            put_f64(&mut out, g.joint_twist);
            put_f64(&mut out, g.max_bend);
        }
        for table in &self.tables.sections {
            put_u32(&mut out, table.len() as u32);
        }
        for table in &self.tables.sections {
            for s in &table.samples {
                put_u32(&mut out, s.grid[0]);
                put_u32(&mut out, s.grid[1]);
                put_f64(&mut out, s.joints.l1);
                put_f64(&mut out, s.joints.l2);
                put_f64(&mut out, s.curve.theta);
                put_f64(&mut out, s.curve.phi);
                put_f64(&mut out, s.curve.lambda);
                for r in 0..3 {
                    for c in 0..3 {
                        put_f64(&mut out, s.frame.rotation[(r, c)]);
                    }
                }
                for a in 0..3 {
                    put_f64(&mut out, s.frame.position[a]);
                }
            }
        }
        let origin = self.bbox.origin();
        for a in 0..3 {
            put_f64(&mut out, origin[a]);
        }
        put_f64(&mut out, self.bbox.cube_dim());
        for n in self.bbox.counts() {
            put_u64(&mut out, n as u64);
        }
        put_u64(&mut out, self.bbox.cube_count());
        put_u64(&mut out, self.tables.config_count());
        for &o in self.buckets.offsets() {
            put_u64(&mut out, o);
        }
        for &id in self.buckets.ids() {
            put_u64(&mut out, id);
        }
        for t in &self.tips {
            for &v in t {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        let crc = crc32fast::hash(&out);
        put_u32(&mut out, crc);
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self, CacheError> {
        let mut r = Reader { buf, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(CacheError::BadMagic);
        }
        let version = r.u32()?;
        if version != CACHE_VERSION {
            return Err(CacheError::VersionMismatch { found: version });
        }
        let steps = r.u32()?;
        let min = r.f64()?;
        let max = r.f64()?;
        let mut geoms = Vec::with_capacity(3);
        for _ in 0..3 {
            geoms.push((r.f64()?, r.f64()?, r.f64()?, r.f64()?, r.f64()?));
        }
        let mut counts = [0u32; 3];
        for n in &mut counts {
            *n = r.u32()?;
        }
        let mut raw_tables = Vec::with_capacity(3);
        for &n in &counts {
            r.expect_array(n as u64, 144)?;
            let mut samples = Vec::with_capacity(n as usize);
            for _ in 0..n {
                let grid = [r.u32()?, r.u32()?];
                let joints = JointPair::new(r.f64()?, r.f64()?);
                let curve = CurveParams {
                    theta: r.f64()?,
                    phi: r.f64()?,
                    lambda: r.f64()?,
                };
                let mut rotation = Matrix3::zeros();
                for row in 0..3 {
                    for col in 0..3 {
                        rotation[(row, col)] = r.f64()?;
                    }
                }
                let position = Vector3::new(r.f64()?, r.f64()?, r.f64()?);
                samples.push(SectionSample {
                    grid,
                    joints,
                    curve,
                    frame: RigidTransform { rotation, position },
                });
            }
            raw_tables.push(samples);
        }
        let mut origin = Vector3::zeros();
        for a in 0..3 {
            origin[a] = r.f64()?;
        }
        let cube_dim = r.f64()?;
        let mut box_counts = [0u64; 3];
        for n in &mut box_counts {
            *n = r.u64()?;
        }
        let cube_count = r.u64()?;
        let config_count = r.u64()?;
        let offsets_len = cube_count
            .checked_add(1)
            .ok_or(CacheError::Corrupt("cube count overflows"))?;
        r.expect_array(offsets_len, 8)?;
        let mut offsets = Vec::with_capacity(offsets_len as usize);
        for _ in 0..offsets_len {
            offsets.push(r.u64()?);
        }
        let ids_len = *offsets.last().unwrap();
        r.expect_array(ids_len, 8)?;
        let mut ids = Vec::with_capacity(ids_len as usize);
        for _ in 0..ids_len {
            ids.push(r.u64()?);
        }
        r.expect_array(config_count, 12)?;
        let mut tips = Vec::with_capacity(config_count as usize);
        for _ in 0..config_count {
            tips.push([r.f32()?, r.f32()?, r.f32()?]);
        }
        if r.remaining() != 4 {
            return Err(CacheError::SizeMismatch);
        }
        let stored = u32::from_le_bytes(buf[buf.len() - 4..].try_into().unwrap());
        if crc32fast::hash(&buf[..buf.len() - 4]) != stored {
            return Err(CacheError::ChecksumMismatch);
        }

        let grid = GridSpec::new(min, max, steps).map_err(|e| CacheError::Corrupt(e.0))?;
        let mut sections = Vec::with_capacity(3);
        for (i, samples) in raw_tables.into_iter().enumerate() {
            if samples.is_empty() {
                return Err(CacheError::Corrupt("empty section table"));
            }
            let (length, radius, shift, twist, bend) = geoms[i];
            let geometry = SectionGeometry {
                backbone_length: length,
                offset_radius: radius,
                joint_shift: shift,
                joint_twist: twist,
                max_bend: bend,
                actuation_min: min,
                actuation_max: max,
            };
            geometry.validate().map_err(|e| CacheError::Corrupt(e.0))?;
            let table = SectionSampleTable::from_samples(grid, geometry, samples)
                .map_err(|e| CacheError::Corrupt(e.0))?;
            sections.push(table);
        }
        let tables = ConfigTables::new([
            sections.remove(0),
            sections.remove(0),
            sections.remove(0),
        ]);
        if tables.config_count() != config_count {
            return Err(CacheError::Corrupt(
                "config count disagrees with the section tables",
            ));
        }
        if box_counts.iter().any(|&n| n == 0 || n > u32::MAX as u64) {
            return Err(CacheError::Corrupt("box cube counts out of range"));
        }
        let bbox = BoundingBox::from_counts(
            origin,
            [
                box_counts[0] as u32,
                box_counts[1] as u32,
                box_counts[2] as u32,
            ],
            cube_dim,
        )
        .map_err(|e| CacheError::Corrupt(e.0))?;
        if bbox.cube_count() != cube_count {
            return Err(CacheError::Corrupt(
                "cube count disagrees with the box dimensions",
            ));
        }
        let buckets = CubeBuckets::from_raw(offsets, ids, config_count)
            .map_err(|e| CacheError::Corrupt(e.0))?;
        Ok(PlannerCache {
            tables,
            bbox,
            buckets,
            tips,
        })
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.to_bytes())
    }

    pub fn load(path: &Path) -> Result<Self, CacheError> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

/// Writes `cache` to `path` in the binary format above.
pub fn save_cache(cache: &PlannerCache, path: &Path) -> io::Result<()> {
    cache.save(path)
}

/// Reads a cache written by [`save_cache`], validating structure and
/// checksum.
pub fn load_cache(path: &Path) -> Result<PlannerCache, CacheError> {
    PlannerCache::load(path)
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], CacheError> {
        if self.remaining() < n {
            return Err(CacheError::TruncatedCache);
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    /// Rejects a declared array that cannot fit in the remaining bytes,
    /// before anything is allocated for it.
    fn expect_array(&self, count: u64, elem_size: u64) -> Result<(), CacheError> {
        let bytes = count as u128 * elem_size as u128;
        if bytes > self.remaining() as u128 {
            return Err(CacheError::TruncatedCache);
        }
        Ok(())
    }

    fn u32(&mut self) -> Result<u32, CacheError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CacheError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, CacheError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32, CacheError> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}
