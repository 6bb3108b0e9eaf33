//! Reference implementations the test suite checks the planner against.
//!
//! Everything here favors the obvious textbook construction over speed:
//! explicit adjacency lists built by brute-force double loops, a plain
//! binary-heap Dijkstra, and a Bellman-Ford cross-check. The only pieces
//! shared with the planner are the weight expressions themselves, so costs
//! stay bitwise comparable.

use carm::cspace::{ConfigId, ConfigTables};
use carm::planner::edge_weight;
use carm::wgrid::{BlockedMask, BoundingBox, Connectivity, CubeId, Sphere};

/// A graph with nonnegative weights, stored as adjacency lists. Edges are
/// inserted undirected ([`add_edge`](Self::add_edge)) or as one-way arcs
/// ([`add_arc`](Self::add_arc)); the search routines read whatever the
/// adjacency lists hold.
#[derive(Debug, Clone)]
pub struct ExplicitGraph {
    adj: Vec<Vec<(u32, f64)>>,
    edge_count: usize,
}

impl ExplicitGraph {
    pub fn new(vertex_count: usize) -> Self {
        ExplicitGraph {
            adj: vec![Vec::new(); vertex_count],
            edge_count: 0,
        }
    }

    /// Adds an undirected edge. Self-loops and negative or non-finite
    /// weights are programming errors here, so they panic.
    pub fn add_edge(&mut self, a: u32, b: u32, weight: f64) {
        assert_ne!(a, b, "self-loop");
        assert!(weight >= 0.0, "negative or NaN weight");
        self.adj[a as usize].push((b, weight));
        self.adj[b as usize].push((a, weight));
        self.edge_count += 1;
    }

    /// Adds a one-way arc from `a` to `b`, for graphs whose structure
    /// forbids travel in the other direction (layered instances).
    pub fn add_arc(&mut self, a: u32, b: u32, weight: f64) {
        assert_ne!(a, b, "self-loop");
        assert!(weight >= 0.0, "negative or NaN weight");
        self.adj[a as usize].push((b, weight));
        self.edge_count += 1;
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: u32) -> &[(u32, f64)] {
        &self.adj[v as usize]
    }
}

#[derive(Debug, Clone, Copy)]
struct QueueEntry {
    dist: f64,
    vertex: u32,
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}
impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    // Inverted so the std max-heap pops the smallest distance first.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Textbook Dijkstra. Returns one distance per vertex, `INFINITY` where the
/// source cannot reach.
pub fn dijkstra_reference(g: &ExplicitGraph, source: u32) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.vertex_count()];
    let mut settled = vec![false; g.vertex_count()];
    let mut heap = std::collections::BinaryHeap::new();
    dist[source as usize] = 0.0;
    heap.push(QueueEntry {
        dist: 0.0,
        vertex: source,
    });
    while let Some(QueueEntry { dist: d, vertex }) = heap.pop() {
        if settled[vertex as usize] {
            continue;
        }
        settled[vertex as usize] = true;
        for &(n, w) in g.neighbors(vertex) {
            let cand = d + w;
            if cand < dist[n as usize] {
                dist[n as usize] = cand;
                heap.push(QueueEntry {
                    dist: cand,
                    vertex: n,
                });
            }
        }
    }
    dist
}

/// Bellman-Ford, used to cross-check the Dijkstra reference itself. Runs
/// full relaxation rounds until a fixed point.
pub fn bellman_ford_reference(g: &ExplicitGraph, source: u32) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.vertex_count()];
    dist[source as usize] = 0.0;
    for _ in 0..g.vertex_count() {
        let mut changed = false;
        for v in 0..g.vertex_count() as u32 {
            if !dist[v as usize].is_finite() {
                continue;
            }
            for &(n, w) in g.neighbors(v) {
                let cand = dist[v as usize] + w;
                if cand < dist[n as usize] {
                    dist[n as usize] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

/// The layered expansion is larger than the oracle is willing to hold in
/// explicit form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("layered graph too large for the oracle: {vertices} vertices")]
pub struct TooLarge {
    pub vertices: u64,
}

/// A configuration sequence graph in explicit form: one vertex per
/// (layer, configuration) pair, edges only between consecutive layers.
#[derive(Debug, Clone)]
pub struct LayeredGraph {
    pub graph: ExplicitGraph,
    layer_offsets: Vec<u32>,
}

impl LayeredGraph {
    pub fn layer_count(&self) -> usize {
        self.layer_offsets.len() - 1
    }

    /// Explicit vertex index of slot `slot` inside layer `layer`.
    pub fn vertex(&self, layer: usize, slot: usize) -> u32 {
        let v = self.layer_offsets[layer] as usize + slot;
        assert!((v as u32) < self.layer_offsets[layer + 1], "slot out of layer");
        v as u32
    }

    /// Explicit vertex indices spanned by one layer.
    pub fn layer_range(&self, layer: usize) -> std::ops::Range<usize> {
        self.layer_offsets[layer] as usize..self.layer_offsets[layer + 1] as usize
    }
}

const ORACLE_VERTEX_LIMIT: u64 = 1_000_000;

/// Expands a sequence of per-layer configuration lists into an explicit
/// graph, testing every cross-layer pair for adjacency by brute force.
///
/// Arcs run forward only: a layered instance is a DAG whose paths advance
/// one layer per step, so an undirected expansion would let the search
/// double back through a later layer and reach vertices the layered
/// recurrence correctly leaves at infinity.
pub fn materialize_layered(
    layers: &[Vec<ConfigId>],
    tables: &ConfigTables,
) -> Result<LayeredGraph, TooLarge> {
    let vertices: u64 = layers.iter().map(|l| l.len() as u64).sum();
    if vertices > ORACLE_VERTEX_LIMIT {
        return Err(TooLarge { vertices });
    }
    let mut layer_offsets = Vec::with_capacity(layers.len() + 1);
    let mut acc = 0u32;
    layer_offsets.push(0);
    for layer in layers {
        acc += layer.len() as u32;
        layer_offsets.push(acc);
    }
    let mut graph = ExplicitGraph::new(vertices as usize);
    for (k, pair) in layers.windows(2).enumerate() {
        let (prev, next) = (&pair[0], &pair[1]);
        for (i, &u) in prev.iter().enumerate() {
            for (j, &v) in next.iter().enumerate() {
                if tables.adjacent(u, v) {
                    graph.add_arc(
                        layer_offsets[k] + i as u32,
                        layer_offsets[k + 1] + j as u32,
                        edge_weight(tables, u, v),
                    );
                }
            }
        }
    }
    Ok(LayeredGraph {
        graph,
        layer_offsets,
    })
}

/// Expands a masked cube grid into an explicit graph by testing every cube
/// pair, with its own adjacency predicate and the same weight expression
/// the grid router uses.
pub fn materialize_cube_graph(
    bbox: &BoundingBox,
    obstacles: &[Sphere],
    conn: Connectivity,
) -> ExplicitGraph {
    let blocked = BlockedMask::build(bbox, obstacles);
    let total = bbox.cube_count();
    assert!(total <= ORACLE_VERTEX_LIMIT, "cube grid too large for the oracle");
    let mut graph = ExplicitGraph::new(total as usize);
    for a in 0..total {
        if blocked.blocked(a) {
            continue;
        }
        let ca = bbox.unflat(a);
        for b in (a + 1)..total {
            if blocked.blocked(b) {
                continue;
            }
            let cb = bbox.unflat(b);
            let dx = ca.ix.abs_diff(cb.ix);
            let dy = ca.iy.abs_diff(cb.iy);
            let dz = ca.iz.abs_diff(cb.iz);
            if dx > 1 || dy > 1 || dz > 1 {
                continue;
            }
            let axes = (dx + dy + dz) as u32;
            let admitted = match conn {
                Connectivity::Six => axes == 1,
                Connectivity::TwentySix => axes >= 1,
            };
            if admitted {
                graph.add_edge(a as u32, b as u32, bbox.cube_dim() * f64::from(axes).sqrt());
            }
        }
    }
    graph
}

/// Convenience for cube-grid comparisons: reference distance between two
/// cubes, `INFINITY` when unreachable or an endpoint is blocked.
pub fn reference_cube_distance(
    bbox: &BoundingBox,
    obstacles: &[Sphere],
    conn: Connectivity,
    s: CubeId,
    t: CubeId,
) -> f64 {
    let blocked = BlockedMask::build(bbox, obstacles);
    let (sf, tf) = (bbox.flat(s), bbox.flat(t));
    if blocked.blocked(sf) || blocked.blocked(tf) {
        return f64::INFINITY;
    }
    let graph = materialize_cube_graph(bbox, obstacles, conn);
    dijkstra_reference(&graph, sf as u32)[tf as usize]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diamond() -> ExplicitGraph {
        // 0 -> {1, 2} -> 3, with the upper branch cheaper.
        let mut g = ExplicitGraph::new(4);
        g.add_edge(0, 1, 1.0);
        g.add_edge(0, 2, 2.0);
        g.add_edge(1, 3, 1.0);
        g.add_edge(2, 3, 0.5);
        g
    }

    #[test]
    fn dijkstra_picks_the_cheap_branch() {
        let d = dijkstra_reference(&diamond(), 0);
        assert_eq!(d, vec![0.0, 1.0, 2.0, 2.0]);
    }

    #[test]
    fn bellman_ford_agrees_with_dijkstra() {
        let g = diamond();
        assert_eq!(dijkstra_reference(&g, 0), bellman_ford_reference(&g, 0));
    }

    #[test]
    fn unreachable_vertices_stay_infinite() {
        let mut g = ExplicitGraph::new(3);
        g.add_edge(0, 1, 1.0);
        let d = dijkstra_reference(&g, 0);
        assert!(d[2].is_infinite());
    }

    #[test]
    #[should_panic(expected = "self-loop")]
    fn self_loops_are_rejected() {
        ExplicitGraph::new(2).add_edge(1, 1, 0.0);
    }

    /// Layered instances are directed: a vertex whose only incoming arcs
    /// start at unreached vertices must stay infinite, even when an
    /// undirected reading would find a path that doubles back through a
    /// later layer.
    #[test]
    fn arcs_forbid_doubling_back() {
        // Layers {s} -> {a, y} -> {x, z}: s->a, a->x, y->x, y->z.
        let (s, a, y, x, z) = (0u32, 1, 2, 3, 4);
        let mut g = ExplicitGraph::new(5);
        g.add_arc(s, a, 1.0);
        g.add_arc(a, x, 1.0);
        g.add_arc(y, x, 1.0);
        g.add_arc(y, z, 1.0);
        let d = dijkstra_reference(&g, s);
        assert_eq!(d[x as usize], 2.0);
        assert!(d[y as usize].is_infinite(), "reached y against its arcs");
        assert!(d[z as usize].is_infinite(), "reached z against its arcs");
    }
}
