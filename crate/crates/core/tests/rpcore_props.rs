mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seprat_core::rpcore::{find_cycle, garp_check, revealed_relation, topological_order, GarpResult, Grid, GridMode, TieMode};

fn graph() -> impl Strategy<Value = Vec<Vec<usize>>> {
    (1usize..12).prop_flat_map(|n| {
        prop::collection::vec(prop::collection::btree_set(0..n, 0..4), n)
            .prop_map(|rows| rows.into_iter().enumerate().map(|(v, s)| s.into_iter().filter(|&u| u != v).collect()).collect())
    })
}

proptest! {
    #[test]
    fn cycle_iff_no_topological_order(adj in graph()) {
        let cycle = find_cycle(&adj);
        let topo = topological_order(&adj);
        prop_assert_eq!(cycle.is_some(), topo.is_none());
        if let Some(c) = cycle {
            for i in 0..c.len() {
                prop_assert!(adj[c[i]].contains(&c[(i + 1) % c.len()]));
            }
        }
        if let Some(order) = topo {
            let mut pos = vec![0; adj.len()];
            for (i, &v) in order.iter().enumerate() {
                pos[v] = i;
            }
            for (v, succ) in adj.iter().enumerate() {
                for &u in succ {
                    prop_assert!(pos[v] < pos[u]);
                }
            }
        }
    }

    #[test]
    fn foreign_datasets_strict_in_weak(seed in any::<u64>()) {
        let ds = common::random_foreign_dataset(&mut ChaCha8Rng::seed_from_u64(seed), 6);
        for mode in [GridMode::FullProduct, GridMode::PerLevelUnion] {
            let Ok(grid) = Grid::build(&ds, mode) else { continue };
            let weak = revealed_relation(&ds, &grid, TieMode::Weak);
            for e in revealed_relation(&ds, &grid, TieMode::Strict).edges {
                prop_assert!(weak.has_edge(e.from, e.to));
            }
            for (k, &p) in grid.observation_points.iter().enumerate() {
                prop_assert_eq!(grid.bundle(p), ds.observations[k].x.clone());
            }
        }
    }

    #[test]
    fn garp_violation_is_a_real_cycle(seed in any::<u64>()) {
        let ds = common::random_foreign_dataset(&mut ChaCha8Rng::seed_from_u64(seed), 4);
        if let GarpResult::Violation(c) = garp_check(&ds) {
            let mut strict = false;
            for i in 0..c.len() {
                let (k, t) = (c[i], c[(i + 1) % c.len()]);
                let o = &ds.observations[k];
                let budget = o.p.dot(&o.x).unwrap();
                let cost = o.p.dot(&ds.observations[t].x).unwrap();
                prop_assert!(cost <= budget);
                strict |= cost < budget;
            }
            prop_assert!(strict);
        }
    }
}

#[test]
fn two_cycle_example() {
    assert_eq!(find_cycle(&[vec![1], vec![0]]), Some(vec![0, 1]));
    assert_eq!(topological_order(&[vec![1], vec![]]), Some(vec![0, 1]));
}
