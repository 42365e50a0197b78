use std::collections::BTreeMap;

use hon_anomaly::corpus::{Corpus, CorpusBuilder};
use hon_anomaly::hon_graph::{build_graph, HonGraph};
use hon_anomaly::rule_miner::{mine_rules_plus, MinerConfig};
use hon_anomaly::synthgen::planted::{cyclic_corpus, CyclicSpec};
use proptest::prelude::*;

fn corpus_from(trajs: &[Vec<u8>]) -> Corpus {
    let mut b = CorpusBuilder::new();
    for (i, t) in trajs.iter().enumerate() {
        b.push(1, &format!("t{i}"), t.iter().map(|e| format!("s{e}")))
            .unwrap();
    }
    b.build().unwrap()
}

fn bigrams(c: &Corpus) -> BTreeMap<(String, String), f64> {
    let mut out = BTreeMap::new();
    for t in c.windows()[0].trajectories() {
        for p in t.steps.windows(2) {
            let key = (c.vocab().label(p[0]).to_owned(), c.vocab().label(p[1]).to_owned());
            *out.entry(key).or_insert(0.0) += 1.0;
        }
    }
    out
}

fn projection(g: &HonGraph) -> BTreeMap<(String, String), f64> {
    g.fon_projection()
        .into_iter()
        .map(|((u, v), w)| ((u.as_str().to_owned(), v.as_str().to_owned()), w))
        .collect()
}

fn trajectories() -> impl Strategy<Value = Vec<Vec<u8>>> {
    // Repeated copies give the miner enough support to accept higher orders.
    (
        prop::collection::vec(prop::collection::vec(0u8..5, 2..30), 1..8),
        1usize..6,
    )
        .prop_map(|(t, reps)| t.iter().cycle().take(t.len() * reps).cloned().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weight_is_conserved_and_projects_to_bigrams(trajs in trajectories()) {
        let c = corpus_from(&trajs);
        let (rules, _) = mine_rules_plus(&c.windows()[0], &MinerConfig::default()).unwrap();
        let g = build_graph(&rules).unwrap();
        let total = c.windows()[0].transition_count() as f64;
        prop_assert_eq!(g.total_weight(), total);
        prop_assert_eq!(projection(&g), bigrams(&c));
        for w in g.edges().values() {
            prop_assert!(*w > 0.0);
        }
        for (u, v) in g.edges().keys() {
            prop_assert!(g.nodes().contains(u) && g.nodes().contains(v));
        }
    }

    #[test]
    fn build_is_deterministic_and_round_trips(trajs in trajectories()) {
        let c = corpus_from(&trajs);
        let (rules, _) = mine_rules_plus(&c.windows()[0], &MinerConfig::default()).unwrap();
        let g = build_graph(&rules).unwrap();
        prop_assert_eq!(&g, &build_graph(&rules).unwrap());
        let mut buf = Vec::new();
        g.write(&mut buf).unwrap();
        prop_assert_eq!(HonGraph::parse(buf.as_slice()).unwrap(), g);
    }

    #[test]
    fn fon_graph_has_entity_nodes_only(trajs in trajectories()) {
        let c = corpus_from(&trajs);
        let (rules, _) = mine_rules_plus(&c.windows()[0], &MinerConfig::with_max_order(1)).unwrap();
        let g = build_graph(&rules).unwrap();
        prop_assert!(g.nodes().iter().all(|n| n.context().is_empty()));
        prop_assert_eq!(projection(&g), bigrams(&c));
    }
}

#[test]
fn min_support_gating_keeps_all_flow() {
    let c = corpus_from(&[vec![0, 2, 3], vec![1, 2, 4]].iter().cycle().take(12).cloned().collect::<Vec<_>>());
    for min_support in [1, 7] {
        let cfg = MinerConfig { min_support, ..Default::default() };
        let (rules, _) = mine_rules_plus(&c.windows()[0], &cfg).unwrap();
        assert_eq!(rules.max_order_found(), if min_support == 1 { 2 } else { 1 });
        let g = build_graph(&rules).unwrap();
        assert_eq!(g.total_weight(), c.windows()[0].transition_count() as f64);
    }
}

#[test]
fn cyclic_corpus_splits_the_shared_segment() {
    let c = cyclic_corpus(&CyclicSpec { order: 3, ..Default::default() }).unwrap();
    let (rules, _) = mine_rules_plus(&c.windows()[0], &MinerConfig::default()).unwrap();
    let g = build_graph(&rules).unwrap();
    let names: Vec<&str> = g.nodes().iter().map(|n| n.canonical_name()).collect();
    for i in 0..4 {
        assert!(names.contains(&format!("x2|x1.p{i}").as_str()), "{names:?}");
    }
    assert!(!names.contains(&"x2"));
}
