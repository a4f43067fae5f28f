use std::collections::BTreeSet;

use proptest::prelude::*;
use semmap_core::lhs::{sample, search_ranges, ParamRange};
use semmap_core::metrics::ContingencyTable;
use semmap_core::olarfdssom::{OlarfdssomConfig, SomMap};
use semmap_core::semmap::{NodeId, ObjectEvidence, Position, SemmapConfig, TopoMap};

fn step_strategy(n: usize) -> impl Strategy<Value = ((f64, f64), Vec<f64>)> {
    ((-5.0..5.0f64, -5.0..5.0f64), prop::collection::vec(0.0..=1.0f64, n))
}

fn small_config() -> SemmapConfig {
    SemmapConfig {
        n_objects: 4,
        ..SemmapConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn topo_map_state_stays_closed(steps in prop::collection::vec(step_strategy(4), 1..120)) {
        let cfg = small_config();
        let mut map = TopoMap::new(cfg.clone()).unwrap();
        let mut prev_len = 0;
        let mut prev_phi: Vec<(NodeId, Vec<f64>)> = Vec::new();
        let mut prev_winner = None;
        for ((x, y), r) in steps {
            let p = Position::new(x, y).unwrap();
            let before = map.find_winner(&p);
            let out = map.process_sample(p, &ObjectEvidence::new(r).unwrap()).unwrap();

            prop_assert!(map.len() >= prev_len);
            prop_assert!(map.len() <= prev_len + 1);
            prop_assert_eq!(out.created, map.len() == prev_len + 1);
            prev_len = map.len();

            let changed = prev_winner.is_some() && prev_winner != Some(out.winner);
            prop_assert_eq!(out.emission.is_some(), changed);
            if let Some(em) = &out.emission {
                prop_assert_eq!(Some(em.source_node), prev_winner);
            }
            if !out.created {
                if let Some((w, _)) = before {
                    prop_assert_eq!(w, out.winner);
                }
            }
            prev_winner = Some(out.winner);

            for n in map.nodes() {
                for (phi, o) in n.phi().iter().zip(n.objects()) {
                    prop_assert!((0.0..=cfg.summation_limit).contains(phi));
                    prop_assert!((0.0..=1.0).contains(o));
                    let expect = phi.ln_1p() / cfg.summation_limit.ln_1p();
                    prop_assert!((o - expect).abs() <= 1e-12);
                }
            }
            for (id, old) in &prev_phi {
                let now = map.node(*id).unwrap().phi();
                for (a, b) in old.iter().zip(now) {
                    prop_assert!(b >= a);
                }
            }
            prev_phi = map.nodes().iter().map(|n| (n.id(), n.phi().to_vec())).collect();

            for (a, b) in map.edges() {
                prop_assert!(a < b);
                prop_assert!(map.node(*a).is_some() && map.node(*b).is_some());
            }
        }
    }

    #[test]
    fn winner_center_moves_toward_input(
        start in (-3.0..3.0f64, -3.0..3.0f64),
        offset in (-0.5..0.5f64, -0.5..0.5f64),
    ) {
        let mut map = TopoMap::new(small_config()).unwrap();
        let r = ObjectEvidence::zeros(4);
        let c0 = Position::new(start.0, start.1).unwrap();
        map.process_sample(c0, &r).unwrap();
        let p = Position::new(start.0 + offset.0, start.1 + offset.1).unwrap();
        let out = map.process_sample(p, &r).unwrap();
        if !out.created {
            let c1 = map.node(out.winner).unwrap().center();
            prop_assert!(c1.distance(&p) <= c0.distance(&p) + 1e-12);
        }
    }

    #[test]
    fn som_respects_bounds(
        patterns in prop::collection::vec(prop::collection::vec(0.0..=1.0f64, 6), 1..200),
        max_nodes in 1usize..12,
    ) {
        let cfg = OlarfdssomConfig { max_nodes, ..OlarfdssomConfig::preset_a() };
        let mut som = SomMap::new(cfg, 6).unwrap();
        for x in &patterns {
            let wins_before: Vec<_> = som.nodes().iter().map(|n| (n.id, n.wins)).collect();
            let out = som.train(x).unwrap();
            prop_assert!(som.len() <= max_nodes);
            for n in som.nodes() {
                prop_assert!(n.relevance.iter().all(|w| (0.0..=1.0).contains(w)));
                prop_assert!(n.delta.iter().all(|d| *d >= 0.0));
                if let Some((_, w0)) = wins_before.iter().find(|(id, _)| *id == n.id) {
                    prop_assert!(n.wins >= *w0);
                }
            }
            prop_assert!(out.removed.iter().all(|id| som.node(*id).is_none()));
            for (a, b) in som.connections() {
                prop_assert!(a < b && som.node(*a).is_some() && som.node(*b).is_some());
            }
        }
    }

    #[test]
    fn som_replay_is_deterministic(
        patterns in prop::collection::vec(prop::collection::vec(0.0..=1.0f64, 3), 1..80),
    ) {
        let run = || {
            let mut som = SomMap::new(OlarfdssomConfig::preset_b(), 3).unwrap();
            for x in &patterns {
                som.train(x).unwrap();
            }
            som
        };
        let (a, b) = (run(), run());
        prop_assert_eq!(&a, &b);
        let probe = &patterns[0];
        prop_assert_eq!(a.cluster(probe).unwrap(), b.cluster(probe).unwrap());
        prop_assert_eq!(&a, &run());
    }

    #[test]
    fn accuracy_ignores_row_and_column_order(
        counts in prop::collection::vec(prop::collection::vec(0u64..20, 4), 1..6),
        seed in any::<u64>(),
    ) {
        prop_assume!(counts.iter().flatten().any(|&c| c > 0));
        let t = ContingencyTable::from_counts(counts.clone()).unwrap();
        let mut rows = counts.clone();
        let n_rows = rows.len();
        rows.rotate_left((seed as usize) % n_rows);
        let cols: Vec<Vec<u64>> = rows
            .iter()
            .map(|r| {
                let mut r = r.clone();
                let width = r.len();
                r.rotate_right((seed as usize / 7) % width);
                r
            })
            .collect();
        let u = ContingencyTable::from_counts(cols).unwrap();
        prop_assert_eq!(t.accuracy().unwrap(), u.accuracy().unwrap());
        prop_assert_eq!(t.clustering_error().unwrap(), u.clustering_error().unwrap());
        prop_assert!(t.clustering_error().unwrap() >= 1.0 - t.accuracy().unwrap() - 1e-12);
    }

    #[test]
    fn lhs_one_draw_per_stratum(k in 1usize..60, seed in any::<u64>()) {
        let ranges = search_ranges();
        let plan = sample(&ranges, k, seed).unwrap();
        for (j, r) in ranges.iter().enumerate() {
            let strata: BTreeSet<usize> = plan.draws.iter().map(|row| r.stratum(row[j], k)).collect();
            prop_assert_eq!(strata.len(), k);
            prop_assert!(plan.draws.iter().all(|row| row[j] >= r.min && row[j] <= r.max));
        }
    }

    #[test]
    fn lhs_rows_materialize(seed in any::<u64>()) {
        let plan = sample(&search_ranges(), 8, seed).unwrap();
        for i in 0..plan.len() {
            let cfg = plan.config(i, &Default::default()).unwrap();
            prop_assert!(cfg.som.neighbor_rate <= cfg.som.winner_rate);
            prop_assert!((5..=150).contains(&cfg.som.max_competitions));
        }
    }
}

#[test]
fn single_dimension_strata_cover_unit_interval() {
    let r = ParamRange::new("u", 0.0, 1.0);
    let plan = sample(std::slice::from_ref(&r), 10, 3).unwrap();
    let mut bins: Vec<usize> = plan.draws.iter().map(|row| r.stratum(row[0], 10)).collect();
    bins.sort();
    assert_eq!(bins, (0..10).collect::<Vec<_>>());
}
