//! Voxelized workspace: an axis-aligned box partitioned into cubes, sphere
//! obstacles, and shortest/alternate routing over the cube adjacency graph.
//!
//! Cubes are half open: a point on a lower face belongs to the cube above
//! it. Routing uses Dijkstra's algorithm with center-to-center Euclidean
//! weights and a deterministic tie break (lowest flat cube id), and a Yen
//! style generator for loopless alternate paths in nondecreasing cost order.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use nalgebra::Vector3;
use rayon::prelude::*;

/// Axis-aligned workspace box partitioned into cubes of edge `cube_dim`.
///
/// Per-axis cube counts are `ceil(extent / cube_dim)`; the last slab may
/// extend past `extent`, but points beyond `extent` are out of bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundingBox {
    origin: Vector3<f64>,
    extent: Vector3<f64>,
    cube_dim: f64,
    counts: [u32; 3],
}

/// A structural defect in a [`BoundingBox`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid bounding box: {0}")]
pub struct BoxError(pub &'static str);

/// Returned by [`BoundingBox::cube_of`] for points outside the box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("point lies outside the workspace box")]
pub struct OutOfBounds;

impl BoundingBox {
    pub fn new(
        origin: Vector3<f64>,
        extent: Vector3<f64>,
        cube_dim: f64,
    ) -> Result<Self, BoxError> {
        if !(cube_dim > 0.0) || !cube_dim.is_finite() {
            return Err(BoxError("cube_dim must be positive and finite"));
        }
        if origin.iter().any(|v| !v.is_finite()) {
            return Err(BoxError("origin must be finite"));
        }
        let mut counts = [0u32; 3];
        for a in 0..3 {
            let e = extent[a];
            if !(e > 0.0) || !e.is_finite() {
                return Err(BoxError("extent must be positive and finite"));
            }
            let n = (e / cube_dim).ceil();
            if !(n >= 1.0) || n > u32::MAX as f64 {
                return Err(BoxError("cube count per axis out of range"));
            }
            counts[a] = n as u32;
        }
        let total = counts.iter().map(|&n| n as u128).product::<u128>();
        if total > (1u128 << 40) {
            return Err(BoxError("cube count exceeds the supported total"));
        }
        Ok(BoundingBox {
            origin,
            extent,
            cube_dim,
            counts,
        })
    }

    /// Box with explicit per-axis cube counts; `extent` is `counts * cube_dim`.
    pub fn from_counts(
        origin: Vector3<f64>,
        counts: [u32; 3],
        cube_dim: f64,
    ) -> Result<Self, BoxError> {
        if !(cube_dim > 0.0) || !cube_dim.is_finite() {
            return Err(BoxError("cube_dim must be positive and finite"));
        }
        if origin.iter().any(|v| !v.is_finite()) {
            return Err(BoxError("origin must be finite"));
        }
        if counts.iter().any(|&n| n == 0) {
            return Err(BoxError("cube count per axis out of range"));
        }
        let total = counts.iter().map(|&n| n as u128).product::<u128>();
        if total > (1u128 << 40) {
            return Err(BoxError("cube count exceeds the supported total"));
        }
        let extent = Vector3::new(
            counts[0] as f64 * cube_dim,
            counts[1] as f64 * cube_dim,
            counts[2] as f64 * cube_dim,
        );
        Ok(BoundingBox {
            origin,
            extent,
            cube_dim,
            counts,
        })
    }

    /// Smallest box (aligned to the point cloud minimum) whose cubes cover
    /// every point. Returns `None` for an empty or non-finite cloud.
    pub fn around_points<I>(points: I, cube_dim: f64) -> Option<Self>
    where
        I: IntoIterator<Item = Vector3<f64>>,
    {
        let mut lo = Vector3::repeat(f64::INFINITY);
        let mut hi = Vector3::repeat(f64::NEG_INFINITY);
        let mut any = false;
        for p in points {
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
            any = true;
        }
        if !any || lo.iter().chain(hi.iter()).any(|v| !v.is_finite()) {
            return None;
        }
        let mut counts = [0u32; 3];
        for a in 0..3 {
            let n = ((hi[a] - lo[a]) / cube_dim).floor() + 1.0;
            if !(n >= 1.0) || n > u32::MAX as f64 {
                return None;
            }
            counts[a] = n as u32;
        }
        Self::from_counts(lo, counts, cube_dim).ok()
    }

    pub fn origin(&self) -> Vector3<f64> {
        self.origin
    }

    pub fn extent(&self) -> Vector3<f64> {
        self.extent
    }

    pub fn cube_dim(&self) -> f64 {
        self.cube_dim
    }

    /// Per-axis cube counts `(nx, ny, nz)`.
    pub fn counts(&self) -> [u32; 3] {
        self.counts
    }

    pub fn cube_count(&self) -> u64 {
        self.counts.iter().map(|&n| n as u64).product()
    }

    /// Cube containing `p` under the half-open cell rule.
    pub fn cube_of(&self, p: Vector3<f64>) -> Result<CubeId, OutOfBounds> {
        let mut idx = [0u32; 3];
        for a in 0..3 {
            let q = (p[a] - self.origin[a]) / self.cube_dim;
            if !(q >= 0.0) {
                return Err(OutOfBounds);
            }
            let i = q.floor();
            if i >= self.counts[a] as f64 || p[a] >= self.origin[a] + self.extent[a] {
                return Err(OutOfBounds);
            }
            idx[a] = i as u32;
        }
        Ok(CubeId {
            ix: idx[0],
            iy: idx[1],
            iz: idx[2],
        })
    }

    /// Row-major flat id, x outermost.
    pub fn flat(&self, c: CubeId) -> u64 {
        ((c.ix as u64 * self.counts[1] as u64) + c.iy as u64) * self.counts[2] as u64 + c.iz as u64
    }

    pub fn unflat(&self, id: u64) -> CubeId {
        let nz = self.counts[2] as u64;
        let ny = self.counts[1] as u64;
        let iz = id % nz;
        let rest = id / nz;
        let iy = rest % ny;
        let ix = rest / ny;
        CubeId {
            ix: ix as u32,
            iy: iy as u32,
            iz: iz as u32,
        }
    }

    pub fn cube_min(&self, c: CubeId) -> Vector3<f64> {
        Vector3::new(
            self.origin.x + c.ix as f64 * self.cube_dim,
            self.origin.y + c.iy as f64 * self.cube_dim,
            self.origin.z + c.iz as f64 * self.cube_dim,
        )
    }

    pub fn cube_max(&self, c: CubeId) -> Vector3<f64> {
        Vector3::new(
            self.origin.x + (c.ix as f64 + 1.0) * self.cube_dim,
            self.origin.y + (c.iy as f64 + 1.0) * self.cube_dim,
            self.origin.z + (c.iz as f64 + 1.0) * self.cube_dim,
        )
    }

    pub fn cube_center(&self, c: CubeId) -> Vector3<f64> {
        Vector3::new(
            self.origin.x + (c.ix as f64 + 0.5) * self.cube_dim,
            self.origin.y + (c.iy as f64 + 0.5) * self.cube_dim,
            self.origin.z + (c.iz as f64 + 0.5) * self.cube_dim,
        )
    }
}

/// Per-axis cube indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CubeId {
    pub ix: u32,
    pub iy: u32,
    pub iz: u32,
}

/// A spherical obstacle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    pub center: Vector3<f64>,
    pub radius: f64,
}

/// Cube adjacency scheme. `TwentySix` includes edge and corner neighbors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Connectivity {
    Six,
    #[default]
    TwentySix,
}

impl Connectivity {
    fn offsets(self) -> &'static [[i64; 3]] {
        const SIX: [[i64; 3]; 6] = [
            [-1, 0, 0],
            [1, 0, 0],
            [0, -1, 0],
            [0, 1, 0],
            [0, 0, -1],
            [0, 0, 1],
        ];
        const TWENTY_SIX: [[i64; 3]; 26] = {
            let mut out = [[0i64; 3]; 26];
            let mut n = 0;
            let mut dx = -1i64;
            while dx <= 1 {
                let mut dy = -1i64;
                while dy <= 1 {
                    let mut dz = -1i64;
                    while dz <= 1 {
                        if dx != 0 || dy != 0 || dz != 0 {
                            out[n] = [dx, dy, dz];
                            n += 1;
                        }
                        dz += 1;
                    }
                    dy += 1;
                }
                dx += 1;
            }
            out
        };
        match self {
            Connectivity::Six => &SIX,
            Connectivity::TwentySix => &TWENTY_SIX,
        }
    }
}

/// Center-to-center step weight for a move differing in `axes` axes.
fn step_weight(cube_dim: f64, axes: u32) -> f64 {
    cube_dim * (axes as f64).sqrt()
}

/// Exact axis-aligned-box versus sphere test, closed on both sides: a
/// tangent sphere blocks the cube.
pub fn cube_blocked(c: CubeId, bbox: &BoundingBox, s: &Sphere) -> bool {
    let lo = bbox.cube_min(c);
    let hi = bbox.cube_max(c);
    let mut d2 = 0.0;
    for a in 0..3 {
        let v = s.center[a].clamp(lo[a], hi[a]) - s.center[a];
        d2 += v * v;
    }
    d2 <= s.radius * s.radius
}

fn cube_blocked_any(c: CubeId, bbox: &BoundingBox, obstacles: &[Sphere]) -> bool {
    obstacles.iter().any(|s| cube_blocked(c, bbox, s))
}

/// In-bounds, unblocked neighbors of `c` with their step weights, in a fixed
/// deterministic order.
pub fn neighbors(
    c: CubeId,
    bbox: &BoundingBox,
    obstacles: &[Sphere],
    conn: Connectivity,
) -> Vec<(CubeId, f64)> {
    let counts = bbox.counts();
    let mut out = Vec::with_capacity(conn.offsets().len());
    for off in conn.offsets() {
        let nx = c.ix as i64 + off[0];
        let ny = c.iy as i64 + off[1];
        let nz = c.iz as i64 + off[2];
        if nx < 0
            || ny < 0
            || nz < 0
            || nx >= counts[0] as i64
            || ny >= counts[1] as i64
            || nz >= counts[2] as i64
        {
            continue;
        }
        let n = CubeId {
            ix: nx as u32,
            iy: ny as u32,
            iz: nz as u32,
        };
        if cube_blocked_any(n, bbox, obstacles) {
            continue;
        }
        let axes = off.iter().filter(|&&d| d != 0).count() as u32;
        out.push((n, step_weight(bbox.cube_dim(), axes)));
    }
    out
}

/// Obstacle occupancy precomputed for every cube of a box.
#[derive(Debug, Clone)]
pub struct BlockedMask {
    words: Vec<u64>,
}

impl BlockedMask {
    /// Evaluates [`cube_blocked`] for every cube, in parallel.
    pub fn build(bbox: &BoundingBox, obstacles: &[Sphere]) -> Self {
        let total = bbox.cube_count();
        let n_words = total.div_ceil(64) as usize;
        let mut words = vec![0u64; n_words];
        if !obstacles.is_empty() {
            words.par_iter_mut().enumerate().for_each(|(w, word)| {
                let base = w as u64 * 64;
                let mut bits = 0u64;
                for b in 0..64 {
                    let id = base + b;
                    if id >= total {
                        break;
                    }
                    if cube_blocked_any(bbox.unflat(id), bbox, obstacles) {
                        bits |= 1 << b;
                    }
                }
                *word = bits;
            });
        }
        BlockedMask { words }
    }

    pub fn blocked(&self, flat: u64) -> bool {
        (self.words[(flat / 64) as usize] >> (flat % 64)) & 1 == 1
    }
}

/// A route through the cube grid: consecutive flat cube ids and the summed
/// step cost.
#[derive(Debug, Clone, PartialEq)]
pub struct CubePath {
    pub cubes: Vec<u64>,
    pub cost: f64,
}

impl CubePath {
    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }
}

/// No route exists between the requested cubes (including the case of a
/// blocked endpoint cube).
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("no route through the cube grid")]
pub struct NoCubePath;

#[derive(Debug, Clone, Copy)]
struct HeapEntry {
    cost: f64,
    id: u64,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    // Inverted so the std max-heap pops the lowest cost, ties by lowest id.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const NO_PRED: u64 = u64::MAX;

/// Dijkstra over the masked cube grid with optional banned nodes and banned
/// directed edges (used by the alternate-path generator). Returns the path
/// and its left-to-right summed cost.
fn dijkstra_masked(
    bbox: &BoundingBox,
    blocked: &BlockedMask,
    banned_nodes: Option<&HashSet<u64>>,
    banned_edges: Option<&HashSet<(u64, u64)>>,
    source: u64,
    goal: u64,
    conn: Connectivity,
) -> Option<CubePath> {
    let is_banned = |id: u64| banned_nodes.is_some_and(|b| b.contains(&id));
    if blocked.blocked(source) || blocked.blocked(goal) || is_banned(source) || is_banned(goal) {
        return None;
    }
    let total = bbox.cube_count() as usize;
    let counts = bbox.counts();
    let mut dist = vec![f64::INFINITY; total];
    let mut pred = vec![NO_PRED; total];
    let mut settled = vec![false; total];
    let mut heap = BinaryHeap::new();
    dist[source as usize] = 0.0;
    heap.push(HeapEntry {
        cost: 0.0,
        id: source,
    });
    while let Some(HeapEntry { cost, id }) = heap.pop() {
        if settled[id as usize] {
            continue;
        }
        settled[id as usize] = true;
        if id == goal {
            break;
        }
        let c = bbox.unflat(id);
        for off in conn.offsets() {
            let nx = c.ix as i64 + off[0];
            let ny = c.iy as i64 + off[1];
            let nz = c.iz as i64 + off[2];
            if nx < 0
                || ny < 0
                || nz < 0
                || nx >= counts[0] as i64
                || ny >= counts[1] as i64
                || nz >= counts[2] as i64
            {
                continue;
            }
            let nid = bbox.flat(CubeId {
                ix: nx as u32,
                iy: ny as u32,
                iz: nz as u32,
            });
            if settled[nid as usize] || blocked.blocked(nid) || is_banned(nid) {
                continue;
            }
            if banned_edges.is_some_and(|b| b.contains(&(id, nid))) {
                continue;
            }
            let axes = off.iter().filter(|&&d| d != 0).count() as u32;
            let cand = cost + step_weight(bbox.cube_dim(), axes);
            if cand < dist[nid as usize] {
                dist[nid as usize] = cand;
                pred[nid as usize] = id;
                heap.push(HeapEntry {
                    cost: cand,
                    id: nid,
                });
            } else if cand == dist[nid as usize] && id < pred[nid as usize] {
                pred[nid as usize] = id;
            }
        }
    }
    if !dist[goal as usize].is_finite() {
        return None;
    }
    let mut cubes = vec![goal];
    let mut cur = goal;
    while cur != source {
        cur = pred[cur as usize];
        cubes.push(cur);
    }
    cubes.reverse();
    Some(CubePath {
        cost: path_cost(&cubes, bbox),
        cubes,
    })
}

/// Left-to-right summed step cost of a cube id sequence.
fn path_cost(cubes: &[u64], bbox: &BoundingBox) -> f64 {
    let mut cost = 0.0;
    for w in cubes.windows(2) {
        let a = bbox.unflat(w[0]);
        let b = bbox.unflat(w[1]);
        let axes = (a.ix != b.ix) as u32 + (a.iy != b.iy) as u32 + (a.iz != b.iz) as u32;
        cost += step_weight(bbox.cube_dim(), axes);
    }
    cost
}

/// Cheapest route between two cubes, or [`NoCubePath`] when the grid is
/// disconnected or an endpoint cube is blocked.
pub fn shortest_cube_path(
    s: CubeId,
    t: CubeId,
    bbox: &BoundingBox,
    obstacles: &[Sphere],
    conn: Connectivity,
) -> Result<CubePath, NoCubePath> {
    let blocked = BlockedMask::build(bbox, obstacles);
    dijkstra_masked(bbox, &blocked, None, None, bbox.flat(s), bbox.flat(t), conn).ok_or(NoCubePath)
}

#[derive(Debug, Clone)]
struct Candidate {
    cost: f64,
    cubes: Vec<u64>,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}

impl Ord for Candidate {
    // Inverted ordering: lowest cost first, ties by lexicographic cube ids.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.cubes.cmp(&self.cubes))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lazy Yen-style generator of loopless cube paths in nondecreasing cost
/// order. The first call yields the Dijkstra shortest path; each further
/// call spurs off the previously accepted path.
pub struct CubePathSupplier<'a> {
    bbox: &'a BoundingBox,
    blocked: BlockedMask,
    conn: Connectivity,
    source: u64,
    goal: u64,
    accepted: Vec<CubePath>,
    candidates: BinaryHeap<Candidate>,
    seen: HashSet<Vec<u64>>,
    exhausted: bool,
}

impl<'a> CubePathSupplier<'a> {
    pub fn new(
        s: CubeId,
        t: CubeId,
        bbox: &'a BoundingBox,
        obstacles: &[Sphere],
        conn: Connectivity,
    ) -> Self {
        CubePathSupplier {
            bbox,
            blocked: BlockedMask::build(bbox, obstacles),
            conn,
            source: bbox.flat(s),
            goal: bbox.flat(t),
            accepted: Vec::new(),
            candidates: BinaryHeap::new(),
            seen: HashSet::new(),
            exhausted: false,
        }
    }

    pub fn next_path(&mut self) -> Option<CubePath> {
        if self.exhausted {
            return None;
        }
        if self.accepted.is_empty() {
            match dijkstra_masked(
                self.bbox,
                &self.blocked,
                None,
                None,
                self.source,
                self.goal,
                self.conn,
            ) {
                Some(p) => {
                    self.seen.insert(p.cubes.clone());
                    self.accepted.push(p.clone());
                    return Some(p);
                }
                None => {
                    self.exhausted = true;
                    return None;
                }
            }
        }
        self.spur_previous();
        match self.candidates.pop() {
            Some(c) => {
                let p = CubePath {
                    cubes: c.cubes,
                    cost: c.cost,
                };
                self.accepted.push(p.clone());
                Some(p)
            }
            None => {
                self.exhausted = true;
                None
            }
        }
    }

    /// Generates spur candidates off the most recently accepted path.
    fn spur_previous(&mut self) {
        let prev = self.accepted.last().expect("a path was accepted").cubes.clone();
        for i in 0..prev.len().saturating_sub(1) {
            let root = &prev[..=i];
            let spur = prev[i];
            let mut banned_edges = HashSet::new();
            for p in &self.accepted {
                if p.cubes.len() > i + 1 && p.cubes[..=i] == *root {
                    banned_edges.insert((p.cubes[i], p.cubes[i + 1]));
                }
            }
            let banned_nodes: HashSet<u64> = root[..i].iter().copied().collect();
            if let Some(tail) = dijkstra_masked(
                self.bbox,
                &self.blocked,
                Some(&banned_nodes),
                Some(&banned_edges),
                spur,
                self.goal,
                self.conn,
            ) {
                let mut cubes = root[..i].to_vec();
                cubes.extend_from_slice(&tail.cubes);
                if self.seen.insert(cubes.clone()) {
                    self.candidates.push(Candidate {
                        cost: path_cost(&cubes, self.bbox),
                        cubes,
                    });
                }
            }
        }
    }
}

/// Up to `k` loopless cube paths in nondecreasing cost order, the Dijkstra
/// shortest path first. Fewer are returned when the grid admits fewer.
pub fn alternate_cube_paths(
    s: CubeId,
    t: CubeId,
    k: usize,
    bbox: &BoundingBox,
    obstacles: &[Sphere],
    conn: Connectivity,
) -> Vec<CubePath> {
    let mut supplier = CubePathSupplier::new(s, t, bbox, obstacles, conn);
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        match supplier.next_path() {
            Some(p) => out.push(p),
            None => break,
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_box(n: u32, d: f64) -> BoundingBox {
        BoundingBox::from_counts(Vector3::zeros(), [n, n, n], d).unwrap()
    }

    #[test]
    fn counts_round_up_to_cover_the_extent() {
        let b = BoundingBox::new(
            Vector3::zeros(),
            Vector3::new(0.82, 0.82, 0.74),
            0.01,
        )
        .unwrap();
        assert_eq!(b.counts(), [82, 82, 74]);
        assert_eq!(b.cube_count(), 82 * 82 * 74);
        let b = BoundingBox::new(Vector3::zeros(), Vector3::new(0.825, 0.01, 0.01), 0.01).unwrap();
        assert_eq!(b.counts()[0], 83);
    }

    #[test]
    fn cube_of_applies_the_half_open_rule() {
        let b = BoundingBox::new(Vector3::zeros(), Vector3::new(0.82, 0.82, 0.74), 0.01).unwrap();
        let c = b.cube_of(Vector3::new(0.0, 0.0, 0.0)).unwrap();
        assert_eq!((c.ix, c.iy, c.iz), (0, 0, 0));
        let c = b.cube_of(Vector3::new(0.01, 0.005, 0.0)).unwrap();
        assert_eq!((c.ix, c.iy, c.iz), (1, 0, 0));
        assert_eq!(b.cube_of(Vector3::new(0.825, 0.0, 0.0)), Err(OutOfBounds));
        assert_eq!(b.cube_of(Vector3::new(-1e-9, 0.0, 0.0)), Err(OutOfBounds));
        assert_eq!(b.cube_of(Vector3::new(0.82, 0.0, 0.0)), Err(OutOfBounds));
    }

    #[test]
    fn flat_ids_round_trip() {
        let b = BoundingBox::from_counts(Vector3::zeros(), [4, 5, 6], 0.01).unwrap();
        for id in 0..b.cube_count() {
            assert_eq!(b.flat(b.unflat(id)), id);
        }
    }

    #[test]
    fn neighbor_counts_match_the_connectivity_scheme() {
        let b = unit_box(4, 0.01);
        let interior = CubeId { ix: 1, iy: 1, iz: 1 };
        assert_eq!(neighbors(interior, &b, &[], Connectivity::TwentySix).len(), 26);
        assert_eq!(neighbors(interior, &b, &[], Connectivity::Six).len(), 6);
        let corner = CubeId { ix: 0, iy: 0, iz: 0 };
        assert_eq!(neighbors(corner, &b, &[], Connectivity::TwentySix).len(), 7);
        assert_eq!(neighbors(corner, &b, &[], Connectivity::Six).len(), 3);
    }

    #[test]
    fn step_weights_scale_with_the_number_of_axes() {
        let b = unit_box(3, 0.01);
        let c = CubeId { ix: 1, iy: 1, iz: 1 };
        for (n, w) in neighbors(c, &b, &[], Connectivity::TwentySix) {
            let axes = (n.ix != 1) as u32 + (n.iy != 1) as u32 + (n.iz != 1) as u32;
            assert_eq!(w, 0.01 * (axes as f64).sqrt());
        }
    }

    #[test]
    fn tangent_sphere_blocks_the_cube() {
        let b = unit_box(2, 0.01);
        let c = CubeId { ix: 0, iy: 0, iz: 0 };
        let tangent = Sphere {
            center: Vector3::new(0.05, 0.005, 0.005),
            radius: 0.04,
        };
        assert!(cube_blocked(c, &b, &tangent));
        let clear = Sphere {
            center: Vector3::new(0.05, 0.005, 0.005),
            radius: 0.0399,
        };
        assert!(!cube_blocked(c, &b, &clear));
        let inside = Sphere {
            center: Vector3::new(0.005, 0.005, 0.005),
            radius: 0.001,
        };
        assert!(cube_blocked(c, &b, &inside));
    }

    #[test]
    fn axis_run_costs_one_step_per_cube() {
        let b = BoundingBox::from_counts(Vector3::zeros(), [10, 1, 1], 0.01).unwrap();
        let p = shortest_cube_path(
            CubeId { ix: 0, iy: 0, iz: 0 },
            CubeId { ix: 9, iy: 0, iz: 0 },
            &b,
            &[],
            Connectivity::TwentySix,
        )
        .unwrap();
        assert_eq!(p.len(), 10);
        assert_relative_eq!(p.cost, 0.09, max_relative = 1e-12);
    }

    #[test]
    fn same_cube_request_yields_a_single_cube_path() {
        let b = unit_box(3, 0.01);
        let c = CubeId { ix: 1, iy: 2, iz: 0 };
        let p = shortest_cube_path(c, c, &b, &[], Connectivity::TwentySix).unwrap();
        assert_eq!(p.cubes, vec![b.flat(c)]);
        assert_eq!(p.cost, 0.0);
    }

    #[test]
    fn a_blocking_wall_disconnects_the_grid() {
        // A sphere large enough to swallow the middle slab of a 5x5x5 box.
        let b = unit_box(5, 0.01);
        let wall = Sphere {
            center: Vector3::new(0.025, 0.025, 0.025),
            radius: 0.04,
        };
        let res = shortest_cube_path(
            CubeId { ix: 0, iy: 0, iz: 0 },
            CubeId { ix: 4, iy: 4, iz: 4 },
            &b,
            &[wall],
            Connectivity::TwentySix,
        );
        assert_eq!(res, Err(NoCubePath));
    }

    #[test]
    fn blocked_endpoint_is_reported_as_no_path() {
        let b = unit_box(3, 0.01);
        let s = Sphere {
            center: Vector3::new(0.005, 0.005, 0.005),
            radius: 0.002,
        };
        let res = shortest_cube_path(
            CubeId { ix: 0, iy: 0, iz: 0 },
            CubeId { ix: 2, iy: 2, iz: 2 },
            &b,
            &[s],
            Connectivity::TwentySix,
        );
        assert_eq!(res, Err(NoCubePath));
    }

    #[test]
    fn slab_corner_to_corner_offers_two_equal_cost_staircases() {
        let b = BoundingBox::from_counts(Vector3::zeros(), [3, 3, 1], 0.01).unwrap();
        let paths = alternate_cube_paths(
            CubeId { ix: 0, iy: 0, iz: 0 },
            CubeId { ix: 2, iy: 2, iz: 0 },
            2,
            &b,
            &[],
            Connectivity::Six,
        );
        assert_eq!(paths.len(), 2);
        assert_relative_eq!(paths[0].cost, 0.04, max_relative = 1e-12);
        assert_relative_eq!(paths[1].cost, 0.04, max_relative = 1e-12);
        assert_ne!(paths[0].cubes, paths[1].cubes);
        for p in &paths {
            let mut seen = HashSet::new();
            assert!(p.cubes.iter().all(|c| seen.insert(*c)), "path loops");
            assert_eq!(p.cubes.len(), 5);
        }
    }

    #[test]
    fn alternate_paths_come_out_in_nondecreasing_cost_order() {
        let b = unit_box(3, 0.01);
        let paths = alternate_cube_paths(
            CubeId { ix: 0, iy: 0, iz: 0 },
            CubeId { ix: 2, iy: 2, iz: 2 },
            6,
            &b,
            &[],
            Connectivity::TwentySix,
        );
        assert!(!paths.is_empty());
        for w in paths.windows(2) {
            assert!(w[0].cost <= w[1].cost);
        }
        let unique: HashSet<_> = paths.iter().map(|p| p.cubes.clone()).collect();
        assert_eq!(unique.len(), paths.len());
    }

    #[test]
    fn routing_is_deterministic() {
        let b = unit_box(6, 0.01);
        let obstacle = Sphere {
            center: Vector3::new(0.03, 0.03, 0.03),
            radius: 0.015,
        };
        let run = || {
            shortest_cube_path(
                CubeId { ix: 0, iy: 0, iz: 0 },
                CubeId { ix: 5, iy: 5, iz: 5 },
                &b,
                &[obstacle],
                Connectivity::TwentySix,
            )
            .unwrap()
        };
        let a = run();
        let c = run();
        assert_eq!(a.cubes, c.cubes);
        assert_eq!(a.cost.to_bits(), c.cost.to_bits());
    }
}
