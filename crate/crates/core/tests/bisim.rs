mod common;

use std::sync::Arc;

use common::{arb_bound, arb_builtin_subset, arb_graph_pair};
use itertools::Itertools;
use proptest::prelude::*;
use tgnn::bisim::bisim_bijection;
use tgnn::template::{builtin_registry, T1};
use tgnn::{bisim_classes, bisim_oracle, bisimilar_via_twl, Bound, Error, LabelledGraph, PointedGraph};

/// Oracle verdict, or `None` when its resource guard trips.
fn oracle(
    g: &LabelledGraph,
    v: usize,
    h: &LabelledGraph,
    w: usize,
    ts: &[Arc<tgnn::Template>],
    level: usize,
    bound: Bound,
) -> Option<bool> {
    match bisim_oracle(g, v, h, w, ts, level, bound) {
        Ok(b) => Some(b),
        Err(Error::ResourceGuard(_)) => None,
        Err(e) => panic!("{e}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn oracle_agrees_with_refinement(
        (g, h) in arb_graph_pair(6, 1),
        ts in arb_builtin_subset(),
        level in 0usize..=3,
        bound in arb_bound(),
    ) {
        for (v, w) in (0..g.node_count()).cartesian_product(0..h.node_count()) {
            if let Some(expected) = oracle(&g, v, &h, w, &ts, level, bound) {
                prop_assert_eq!(bisimilar_via_twl(&g, v, &h, w, &ts, level, bound).unwrap(), expected);
            }
        }
    }

    #[test]
    fn lower_levels_are_implied((g, h) in arb_graph_pair(6, 1), ts in arb_builtin_subset(), bound in arb_bound()) {
        for (v, w) in (0..g.node_count()).cartesian_product(0..h.node_count()) {
            let verdicts: Vec<bool> = (0..=3)
                .map(|l| bisimilar_via_twl(&g, v, &h, w, &ts, l, bound).unwrap())
                .collect();
            for l in 1..verdicts.len() {
                prop_assert!(!verdicts[l] || verdicts[l - 1]);
            }
        }
    }

    #[test]
    fn smaller_bounds_are_implied((g, h) in arb_graph_pair(6, 1), ts in arb_builtin_subset(), level in 0usize..=3) {
        let bounds = [Bound::AtMost(1), Bound::AtMost(2), Bound::AtMost(3), Bound::Unbounded];
        for (v, w) in (0..g.node_count()).cartesian_product(0..h.node_count()) {
            let verdicts: Vec<bool> = bounds
                .iter()
                .map(|&b| bisimilar_via_twl(&g, v, &h, w, &ts, level, b).unwrap())
                .collect();
            for i in 1..verdicts.len() {
                prop_assert!(!verdicts[i] || verdicts[i - 1]);
            }
        }
    }

    #[test]
    fn bijection_formulation_agrees(
        (g, h) in arb_graph_pair(5, 1),
        ts in arb_builtin_subset(),
        level in 0usize..=3,
    ) {
        for (v, w) in (0..g.node_count()).cartesian_product(0..h.node_count()) {
            let matched = bisim_bijection(&g, v, &h, w, &ts, level).unwrap();
            if let Some(expected) = oracle(&g, v, &h, w, &ts, level, Bound::Unbounded) {
                prop_assert_eq!(matched, expected);
            }
            prop_assert_eq!(matched, bisimilar_via_twl(&g, v, &h, w, &ts, level, Bound::Unbounded).unwrap());
        }
    }
}

/// Every loop-free directed graph on 1..=3 unlabelled nodes.
fn small_graphs() -> Vec<Arc<LabelledGraph>> {
    (1..=3usize)
        .flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n).cartesian_product(0..n).filter(|(u, v)| u != v).collect();
            (0u32..(1 << pairs.len())).map(move |mask| {
                let edges: Vec<(usize, usize)> = pairs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, &e)| e)
                    .collect();
                Arc::new(LabelledGraph::unlabelled(n, edges).unwrap())
            })
        })
        .collect()
}

#[test]
fn corpus_classes_match_pairwise_oracle() {
    let ts = builtin_registry().select(&[T1]).unwrap();
    let corpus: Vec<PointedGraph> = small_graphs().into_iter().flat_map(PointedGraph::all_points).collect();
    let (level, bound) = (2, Bound::AtMost(1));
    let classes = bisim_classes(&corpus, &ts, level, bound).unwrap();
    let mut class_of = vec![usize::MAX; corpus.len()];
    for (k, class) in classes.iter().enumerate() {
        for &i in class {
            class_of[i] = k;
        }
    }
    assert!(class_of.iter().all(|&k| k != usize::MAX));

    // Partition from the oracle alone: attach each point to the first earlier
    // point it is bisimilar to.
    let mut reps: Vec<usize> = Vec::new();
    let mut oracle_class = vec![0; corpus.len()];
    for (i, p) in corpus.iter().enumerate() {
        let found = reps.iter().position(|&r| {
            let q = &corpus[r];
            bisim_oracle(&p.graph, p.point, &q.graph, q.point, &ts, level, bound).unwrap()
        });
        oracle_class[i] = found.unwrap_or_else(|| {
            reps.push(i);
            reps.len() - 1
        });
    }
    assert_eq!(classes.len(), reps.len());
    assert_eq!(common::canonical(&class_of), common::canonical(&oracle_class));
}
