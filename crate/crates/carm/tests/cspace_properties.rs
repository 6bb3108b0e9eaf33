//! Property checks over configuration enumeration, adjacency, and tip
//! bucketing.

use std::sync::OnceLock;

use carm::cache::PlannerCache;
use carm::cspace::{
    enumerate_section_samples, enumerate_tips, ConfigTables, GridSpec, ValidityFilter,
};
use carm::kinematics::{EllipseCoefficients, SectionGeometry};
use proptest::prelude::*;

fn tables() -> &'static ConfigTables {
    static TABLES: OnceLock<ConfigTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let grid = GridSpec::new(-0.04, 0.04, 5).unwrap();
        let table = enumerate_section_samples(
            grid,
            &SectionGeometry::default(),
            &EllipseCoefficients::default(),
            ValidityFilter::default(),
        )
        .unwrap();
        ConfigTables::new([table.clone(), table.clone(), table])
    })
}

fn cache() -> &'static PlannerCache {
    static CACHE: OnceLock<PlannerCache> = OnceLock::new();
    CACHE.get_or_init(|| {
        let grid = GridSpec::new(-0.04, 0.04, 5).unwrap();
        let geoms = [
            SectionGeometry::default(),
            SectionGeometry::default(),
            SectionGeometry::default(),
        ];
        PlannerCache::build(
            grid,
            &geoms,
            &EllipseCoefficients::default(),
            ValidityFilter::default(),
            None,
            0.03,
        )
        .unwrap()
    })
}

fn config_id() -> impl Strategy<Value = u64> {
    let n = tables().config_count();
    0..n
}

proptest! {
    /// Grid adjacency is irreflexive and symmetric.
    #[test]
    fn adjacency_is_symmetric_and_irreflexive(a in config_id(), b in config_id()) {
        let t = tables();
        prop_assert!(!t.adjacent(a, a));
        prop_assert_eq!(t.adjacent(a, b), t.adjacent(b, a));
    }

    /// Neighbor enumeration returns exactly the adjacent configurations:
    /// unique, at most twelve, and matching a brute-force scan as a set.
    /// (The list itself comes out in per-section generation order.)
    #[test]
    fn neighbors_match_a_brute_force_scan(a in config_id()) {
        let t = tables();
        let mut ns = t.neighbors(a);
        prop_assert!(ns.len() <= 12);
        ns.sort_unstable();
        prop_assert!(ns.windows(2).all(|w| w[0] < w[1]), "duplicate neighbor");
        let brute: Vec<u64> = (0..t.config_count()).filter(|&b| t.adjacent(a, b)).collect();
        prop_assert_eq!(ns, brute);
    }

    /// Flat ids round trip through per-section indices.
    #[test]
    fn flat_ids_round_trip(a in config_id()) {
        let t = tables();
        prop_assert_eq!(t.fuse(t.split(a)), a);
    }

    /// Every enumerated configuration is found again by joint-value lookup.
    #[test]
    fn locate_inverts_joint_config(a in config_id()) {
        let t = tables();
        let c = t.joint_config(a);
        prop_assert_eq!(t.locate(&c, 1e-9), Ok(a));
    }

    /// An edge moves exactly one section, and that section by exactly one
    /// grid index.
    #[test]
    fn edges_move_one_index_of_one_section(a in config_id(), b in config_id()) {
        let t = tables();
        if t.adjacent(a, b) {
            let (sa, sb) = (t.split(a), t.split(b));
            let mut moved = 0;
            for sec in 0..3 {
                let ga = t.sample(sec, sa[sec]).grid;
                let gb = t.sample(sec, sb[sec]).grid;
                let d = ga[0].abs_diff(gb[0]) + ga[1].abs_diff(gb[1]);
                if d != 0 {
                    moved += 1;
                    prop_assert_eq!(d, 1);
                }
            }
            prop_assert_eq!(moved, 1);
        }
    }
}

#[test]
fn tip_count_is_the_product_of_section_counts() {
    let t = tables();
    let [n1, n2, n3] = t.counts();
    let tips = enumerate_tips(t);
    assert_eq!(tips.len(), n1 * n2 * n3);
    assert_eq!(tips.len() as u64, t.config_count());
}

#[test]
fn buckets_partition_every_configuration() {
    let c = cache();
    let sizes: u64 = (0..c.bbox.cube_count())
        .map(|q| c.buckets.bucket(q).len() as u64)
        .sum();
    assert_eq!(sizes + c.buckets.dropped(), c.tables.config_count());
    assert_eq!(c.buckets.bucketed() + c.buckets.dropped(), c.tables.config_count());
}

#[test]
fn bucket_members_are_sorted_and_live_in_their_cube() {
    let c = cache();
    for q in 0..c.bbox.cube_count() {
        let members = c.buckets.bucket(q);
        assert!(members.windows(2).all(|w| w[0] < w[1]));
        for &id in members {
            let t = c.tips[id as usize];
            let p = nalgebra::Vector3::new(t[0] as f64, t[1] as f64, t[2] as f64);
            let cube = c.bbox.cube_of(p).unwrap();
            assert_eq!(c.bbox.flat(cube), q);
        }
    }
}

#[test]
fn enumeration_is_bitwise_deterministic() {
    let grid = GridSpec::new(-0.04, 0.04, 5).unwrap();
    let g = SectionGeometry::default();
    let coeffs = EllipseCoefficients::default();
    let a = enumerate_section_samples(grid, &g, &coeffs, ValidityFilter::default()).unwrap();
    let b = enumerate_section_samples(grid, &g, &coeffs, ValidityFilter::default()).unwrap();
    assert_eq!(a, b);
    let ta = ConfigTables::new([a.clone(), a.clone(), a]);
    let tb = ConfigTables::new([b.clone(), b.clone(), b]);
    let (ta, tb) = (enumerate_tips(&ta), enumerate_tips(&tb));
    assert_eq!(ta.len(), tb.len());
    for (x, y) in ta.iter().zip(&tb) {
        assert_eq!(x[0].to_bits(), y[0].to_bits());
        assert_eq!(x[1].to_bits(), y[1].to_bits());
        assert_eq!(x[2].to_bits(), y[2].to_bits());
    }
}
