//! Property checks of the cube grid router against the explicit-graph
//! reference implementations.

use carm::wgrid::{
    alternate_cube_paths, shortest_cube_path, BoundingBox, Connectivity, CubeId, Sphere,
};
use carm_oracle::{
    bellman_ford_reference, dijkstra_reference, materialize_cube_graph, reference_cube_distance,
};
use nalgebra::Vector3;
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct GridCase {
    bbox: BoundingBox,
    obstacles: Vec<Sphere>,
    s: CubeId,
    t: CubeId,
    conn: Connectivity,
}

fn grid_case() -> impl Strategy<Value = GridCase> {
    let counts = [1u32..=5, 1u32..=5, 1u32..=5];
    let dim = 0.05f64..=0.2;
    let spheres = proptest::collection::vec(
        ((-0.1f64..=0.4), (-0.1f64..=0.4), (-0.1f64..=0.4), (0.01f64..=0.15)),
        0..=3,
    );
    let conn = prop_oneof![Just(Connectivity::Six), Just(Connectivity::TwentySix)];
    (counts, dim, spheres, conn, any::<u64>(), any::<u64>()).prop_map(
        |(counts, dim, spheres, conn, ks, kt)| {
            let bbox = BoundingBox::from_counts(Vector3::zeros(), counts, dim).unwrap();
            let obstacles = spheres
                .into_iter()
                .map(|(x, y, z, r)| Sphere {
                    center: Vector3::new(x, y, z),
                    radius: r,
                })
                .collect();
            let total = bbox.cube_count();
            let s = bbox.unflat(ks % total);
            let t = bbox.unflat(kt % total);
            GridCase {
                bbox,
                obstacles,
                s,
                t,
                conn,
            }
        },
    )
}

proptest! {
    /// The router's distances match the explicit-graph Dijkstra bit for bit,
    /// including unreachable pairs.
    #[test]
    fn router_matches_the_reference_graph(case in grid_case()) {
        let oracle = reference_cube_distance(&case.bbox, &case.obstacles, case.conn, case.s, case.t);
        match shortest_cube_path(case.s, case.t, &case.bbox, &case.obstacles, case.conn) {
            Ok(path) => {
                prop_assert_eq!(path.cost.to_bits(), oracle.to_bits());
                prop_assert_eq!(*path.cubes.first().unwrap(), case.bbox.flat(case.s));
                prop_assert_eq!(*path.cubes.last().unwrap(), case.bbox.flat(case.t));
            }
            Err(_) => prop_assert!(oracle.is_infinite()),
        }
    }

    /// Both reference algorithms agree with each other.
    #[test]
    fn reference_dijkstra_agrees_with_bellman_ford(case in grid_case()) {
        let g = materialize_cube_graph(&case.bbox, &case.obstacles, case.conn);
        let source = case.bbox.flat(case.s) as u32;
        let d = dijkstra_reference(&g, source);
        let bf = bellman_ford_reference(&g, source);
        for (a, b) in d.iter().zip(&bf) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    /// Distance is symmetric on an undirected grid. Costs are summed along
    /// the path, so the two directions may differ by rounding but never
    /// more.
    #[test]
    fn routing_is_symmetric(case in grid_case()) {
        let fwd = shortest_cube_path(case.s, case.t, &case.bbox, &case.obstacles, case.conn);
        let rev = shortest_cube_path(case.t, case.s, &case.bbox, &case.obstacles, case.conn);
        match (fwd, rev) {
            (Ok(a), Ok(b)) => {
                let scale = a.cost.max(b.cost).max(1e-30);
                prop_assert!((a.cost - b.cost).abs() / scale < 1e-12);
            }
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "asymmetric reachability: {a:?} vs {b:?}"),
        }
    }

    /// Paths are well formed: start and goal at the ends, every hop between
    /// grid neighbors under the connectivity in force, no blocked cubes.
    #[test]
    fn paths_are_well_formed(case in grid_case()) {
        if let Ok(path) = shortest_cube_path(case.s, case.t, &case.bbox, &case.obstacles, case.conn)
        {
            for w in path.cubes.windows(2) {
                let a = case.bbox.unflat(w[0]);
                let b = case.bbox.unflat(w[1]);
                let d = [
                    a.ix.abs_diff(b.ix),
                    a.iy.abs_diff(b.iy),
                    a.iz.abs_diff(b.iz),
                ];
                prop_assert!(d.iter().all(|&x| x <= 1));
                let axes: u32 = d.iter().sum();
                match case.conn {
                    Connectivity::Six => prop_assert_eq!(axes, 1),
                    Connectivity::TwentySix => prop_assert!(axes >= 1),
                }
            }
        }
    }

    /// The alternate-path stream yields distinct loopless paths with
    /// nondecreasing costs, starting at the optimum.
    #[test]
    fn alternate_paths_are_ordered_and_loopless(case in grid_case()) {
        let paths = alternate_cube_paths(
            case.s,
            case.t,
            5,
            &case.bbox,
            &case.obstacles,
            case.conn,
        );
        if let Some(first) = paths.first() {
            let best = shortest_cube_path(case.s, case.t, &case.bbox, &case.obstacles, case.conn)
                .unwrap();
            prop_assert_eq!(first.cost.to_bits(), best.cost.to_bits());
        }
        for w in paths.windows(2) {
            prop_assert!(w[0].cost <= w[1].cost);
            prop_assert!(w[0].cubes != w[1].cubes);
        }
        for p in &paths {
            let mut seen = p.cubes.clone();
            seen.sort_unstable();
            seen.dedup();
            prop_assert_eq!(seen.len(), p.cubes.len(), "loop in {:?}", &p.cubes);
        }
    }

    /// Two identical calls give identical answers.
    #[test]
    fn routing_is_deterministic(case in grid_case()) {
        let a = shortest_cube_path(case.s, case.t, &case.bbox, &case.obstacles, case.conn);
        let b = shortest_cube_path(case.s, case.t, &case.bbox, &case.obstacles, case.conn);
        match (a, b) {
            (Ok(x), Ok(y)) => {
                prop_assert_eq!(x.cubes, y.cubes);
                prop_assert_eq!(x.cost.to_bits(), y.cost.to_bits());
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "nondeterministic outcome"),
        }
    }
}
