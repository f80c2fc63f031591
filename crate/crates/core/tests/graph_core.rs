mod common;

use common::{arb_graph, arb_template};
use itertools::Itertools;
use proptest::prelude::*;
use tgnn::multiset::restrict_multiset;
use tgnn::template::{generate_radius_k_templates, template_automorphisms, template_isomorphic};
use tgnn::{LabelledGraph, LabelledTemplate, Multiset, Template};

fn relabel(t: &Template, perm: &[usize]) -> Template {
    let map = |&(u, v): &(usize, usize)| (perm[u], perm[v]);
    Template::new(t.name(), t.size(), t.pos_edges().iter().map(map), t.neg_edges().iter().map(map)).unwrap()
}

proptest! {
    #[test]
    fn restriction_is_idempotent(items in proptest::collection::vec(0u8..5, 0..30), c in 1usize..=3) {
        let a: Multiset<u8> = items.into_iter().collect();
        let once = restrict_multiset(a, c);
        prop_assert_eq!(restrict_multiset(once.clone(), c), once);
    }

    #[test]
    fn restriction_is_monotone(items in proptest::collection::vec(0u8..5, 0..30), c in 1usize..=3, extra in 0usize..3) {
        let a: Multiset<u8> = items.into_iter().collect();
        let wide = restrict_multiset(a.clone(), c + extra);
        prop_assert_eq!(restrict_multiset(wide, c), restrict_multiset(a, c));
    }

    #[test]
    fn multiset_equality_ignores_insertion_order(mut items in proptest::collection::vec(0u8..5, 0..20)) {
        let a: Multiset<u8> = items.iter().copied().collect();
        items.reverse();
        prop_assert_eq!(a, items.into_iter().collect::<Multiset<u8>>());
    }

    #[test]
    fn automorphisms_preserve_edge_sets(t in arb_template(4)) {
        let autos = template_automorphisms(&LabelledTemplate::unlabelled(t.clone()));
        prop_assert_eq!(&autos[0], &(0..t.size()).collect::<Vec<_>>());
        for perm in autos {
            prop_assert_eq!(perm[0], 0);
            let image = relabel(&t, &perm);
            prop_assert_eq!(image.pos_edges(), t.pos_edges());
            prop_assert_eq!(image.neg_edges(), t.neg_edges());
        }
    }

    #[test]
    fn graph_files_round_trip(g in arb_graph(6, 2, true)) {
        let back = LabelledGraph::from_json_str(&g.to_json_string()).unwrap();
        prop_assert_eq!(back, g);
    }
}

#[test]
fn generated_templates_are_pairwise_non_isomorphic() {
    for k in 1..=3 {
        let ts: Vec<LabelledTemplate> = generate_radius_k_templates(k, 4)
            .unwrap()
            .into_iter()
            .map(LabelledTemplate::unlabelled)
            .collect();
        assert!(!ts.is_empty());
        for t in &ts {
            assert_eq!(t.template.radius(), Some(k));
        }
        for (a, b) in ts.iter().tuple_combinations() {
            assert!(!template_isomorphic(a, b), "{:?} ~ {:?}", a.template, b.template);
        }
    }
}

#[test]
fn isomorphism_is_an_equivalence_on_generated_templates() {
    // Every generated template together with all its root-fixing relabellings.
    let mut pool = Vec::new();
    for k in 1..=2 {
        for t in generate_radius_k_templates(k, 3).unwrap() {
            for rest in (1..t.size()).permutations(t.size() - 1) {
                let perm: Vec<usize> = std::iter::once(0).chain(rest).collect();
                pool.push((pool.len(), LabelledTemplate::unlabelled(relabel(&t, &perm))));
            }
        }
    }
    let iso = |a: &LabelledTemplate, b: &LabelledTemplate| template_isomorphic(a, b);
    for (_, a) in &pool {
        assert!(iso(a, a));
    }
    for ((_, a), (_, b)) in pool.iter().tuple_combinations() {
        assert_eq!(iso(a, b), iso(b, a));
    }
    for ((_, a), (_, b), (_, c)) in pool.iter().tuple_combinations() {
        if iso(a, b) && iso(b, c) {
            assert!(iso(a, c));
        }
    }
}

#[test]
fn four_vertex_templates_form_an_equivalence() {
    let ts: Vec<LabelledTemplate> = (1..=3)
        .flat_map(|k| generate_radius_k_templates(k, 4).unwrap())
        .filter(|t| t.size() == 4)
        .take(40)
        .map(LabelledTemplate::unlabelled)
        .collect();
    let copies: Vec<LabelledTemplate> = ts
        .iter()
        .map(|t| LabelledTemplate::unlabelled(relabel(&t.template, &[0, 3, 1, 2])))
        .collect();
    for (i, a) in ts.iter().enumerate() {
        for (j, b) in copies.iter().enumerate() {
            assert_eq!(template_isomorphic(a, b), i == j);
            assert_eq!(template_isomorphic(b, a), i == j);
        }
    }
}

#[test]
fn duplicate_edges_are_rejected() {
    let text = r#"{"nodes":[{"id":"a","label":[0]},{"id":"b","label":[1]}],"edges":[["a","b"],["a","b"]]}"#;
    assert!(LabelledGraph::from_json_str(text).is_err());
    let unknown = r#"{"nodes":[{"id":"a","label":[0]}],"edges":[["a","z"]]}"#;
    assert!(LabelledGraph::from_json_str(unknown).is_err());
}
