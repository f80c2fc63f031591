#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jsonschema::{Retrieve, Uri, Validator};
use serde_json::Value;

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn data(name: &str) -> PathBuf {
    manifest_dir().join("tests/data").join(name)
}

/// Resolves `https://tgnn.invalid/schemas/<file>` to the checked-in file.
struct LocalSchemas;

impl Retrieve for LocalSchemas {
    fn retrieve(&self, uri: &Uri<String>) -> Result<Value, Box<dyn std::error::Error + Send + Sync>> {
        let file = uri.path().as_str().rsplit('/').next().unwrap_or_default().to_string();
        let text = std::fs::read_to_string(manifest_dir().join("schemas").join(file))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn validator(schema: &str) -> Validator {
    let text = std::fs::read_to_string(manifest_dir().join("schemas").join(schema)).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    jsonschema::options().with_retriever(LocalSchemas).build(&schema).unwrap()
}

pub fn assert_valid(schema: &str, instance: &Value) {
    let v = validator(schema);
    let errors: Vec<String> = v.iter_errors(instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema}: {errors:?}\n{instance:#}");
}

pub fn tgnn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tgnn"))
        .args(args)
        .env_remove("TGNN_REGISTRY")
        .output()
        .unwrap()
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

pub fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

// ---------------------------------------------------------------------------
// Independent oracles. None of these call into the algorithms they check.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use itertools::Itertools;
use proptest::prelude::*;
use tgnn::logic::Formula;
use tgnn::{builtin_registry, LabelledGraph, Template};

/// Every injective map `0..size → V` with root at `v` that respects the
/// template's edges and non-edges, in lexicographic order.
pub fn naive_embeddings(t: &Template, g: &LabelledGraph, v: usize) -> Vec<Vec<usize>> {
    let n = g.node_count();
    let mut out: Vec<Vec<usize>> = (0..n)
        .permutations(t.size())
        .filter(|f| f[0] == v)
        .filter(|f| t.pos_edges().iter().all(|&(a, b)| g.has_edge(f[a], f[b])))
        .filter(|f| t.neg_edges().iter().all(|&(a, b)| !g.has_edge(f[a], f[b])))
        .collect();
    out.sort();
    out
}

/// Canonical form of a colouring: class ids renumbered by first occurrence.
pub fn canonical<T: std::hash::Hash + Eq + Clone>(colors: &[T]) -> Vec<usize> {
    let mut ids = HashMap::new();
    colors
        .iter()
        .map(|c| {
            let next = ids.len();
            *ids.entry(c.clone()).or_insert(next)
        })
        .collect()
}

/// Standard colour refinement over out-neighbours on the disjoint union of
/// `graphs`, returning for every round `0..=rounds` the colour of each node
/// in graph-major order.
pub fn textbook_wl(graphs: &[&LabelledGraph], rounds: usize) -> Vec<Vec<usize>> {
    let nodes: Vec<(usize, usize)> = graphs
        .iter()
        .enumerate()
        .flat_map(|(i, g)| (0..g.node_count()).map(move |v| (i, v)))
        .collect();
    let bits = |x: &[f64]| x.iter().map(|f| f.to_bits()).collect::<Vec<u64>>();
    let mut color: Vec<usize> = {
        let labels: Vec<Vec<u64>> = nodes.iter().map(|&(i, v)| bits(graphs[i].label(v))).collect();
        relabel(&labels)
    };
    let offset: Vec<usize> = graphs
        .iter()
        .scan(0, |acc, g| {
            let o = *acc;
            *acc += g.node_count();
            Some(o)
        })
        .collect();
    let mut history = vec![color.clone()];
    for _ in 0..rounds {
        let sigs: Vec<(usize, Vec<usize>)> = nodes
            .iter()
            .map(|&(i, v)| {
                let mut ns: Vec<usize> = graphs[i]
                    .out_neighbors(v)
                    .iter()
                    .map(|&u| color[offset[i] + u])
                    .collect();
                ns.sort_unstable();
                (color[offset[i] + v], ns)
            })
            .collect();
        color = relabel(&sigs);
        history.push(color.clone());
    }
    history
}

fn relabel<T: Ord + Clone>(sigs: &[T]) -> Vec<usize> {
    let mut table = BTreeMap::new();
    for s in sigs {
        let next = table.len();
        table.entry(s.clone()).or_insert(next);
    }
    sigs.iter().map(|s| table[s]).collect()
}

/// Satisfaction by direct recursion over the semantics, no memoisation.
pub fn brute_eval(f: &Formula, g: &LabelledGraph, v: usize) -> bool {
    match f {
        Formula::Prop(p) => g.label(v)[*p] == 1.0,
        Formula::Not(a) => !brute_eval(a, g, v),
        Formula::And(a, b) => brute_eval(a, g, v) && brute_eval(b, g, v),
        Formula::Diamond {
            template,
            threshold,
            args,
        } => {
            let hits = naive_embeddings(template, g, v)
                .into_iter()
                .filter(|e| args.iter().enumerate().all(|(i, a)| brute_eval(a, g, e[i + 1])))
                .count();
            hits >= *threshold
        }
    }
}

pub fn builtins() -> Vec<Arc<Template>> {
    builtin_registry().templates().to_vec()
}

/// Random graph given as (node count, adjacency bits, Boolean label bits).
pub fn arb_graph(max_nodes: usize, dim: usize, loops: bool) -> impl Strategy<Value = LabelledGraph> {
    (1..=max_nodes).prop_flat_map(move |n| {
        (
            proptest::collection::vec(proptest::bool::weighted(0.3), n * n),
            proptest::collection::vec(any::<bool>(), n * dim),
        )
            .prop_map(move |(adj, labels)| {
                let edges = (0..n)
                    .flat_map(|u| (0..n).map(move |v| (u, v)))
                    .filter(|&(u, v)| adj[u * n + v] && (loops || u != v));
                let labels = (0..n)
                    .map(|v| (0..dim).map(|k| f64::from(u8::from(labels[v * dim + k]))).collect())
                    .collect();
                LabelledGraph::new(labels, edges.collect::<Vec<_>>()).unwrap()
            })
    })
}

/// Random template with 1..=max_size vertices; every ordered pair (self-loops
/// included) is independently required, forbidden or unconstrained.
pub fn arb_template(max_size: usize) -> impl Strategy<Value = Template> {
    (1..=max_size).prop_flat_map(|size| {
        proptest::collection::vec(0u8..3, size * size).prop_map(move |kinds| {
            let pairs = (0..size).flat_map(|u| (0..size).map(move |v| (u, v)));
            let (mut pos, mut neg) = (Vec::new(), Vec::new());
            for ((u, v), k) in pairs.zip(&kinds) {
                match k {
                    1 => pos.push((u, v)),
                    2 => neg.push((u, v)),
                    _ => {}
                }
            }
            Template::new("R", size, pos, neg).unwrap()
        })
    })
}

/// A random node relabelling `perm[old] = new`.
pub fn arb_permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

/// Two graphs that are often, but not always, bisimilar: a relabelled copy,
/// a relabelled copy with one edge toggled, or an independent graph.
pub fn arb_graph_pair(max_nodes: usize, dim: usize) -> impl Strategy<Value = (LabelledGraph, LabelledGraph)> {
    arb_graph(max_nodes, dim, false).prop_flat_map(move |g| {
        let n = g.node_count();
        let copy = arb_permutation(n).prop_map({
            let g = g.clone();
            move |p| (g.clone(), g.permuted(&p).unwrap())
        });
        let toggled = (arb_permutation(n), 0..n, 0..n).prop_map({
            let g = g.clone();
            move |(p, a, b)| (g.clone(), toggle_edge(&g, a, b).permuted(&p).unwrap())
        });
        let other = arb_graph(max_nodes, dim, false).prop_map({
            let g = g.clone();
            move |h| (g.clone(), h)
        });
        prop_oneof![copy, toggled, other]
    })
}

/// `g` with edge `a → b` added or removed; unchanged when `a == b`.
pub fn toggle_edge(g: &LabelledGraph, a: usize, b: usize) -> LabelledGraph {
    let mut edges: Vec<(usize, usize)> = g.edges().collect();
    if a != b {
        match edges.iter().position(|&e| e == (a, b)) {
            Some(i) => {
                edges.remove(i);
            }
            None => edges.push((a, b)),
        }
    }
    LabelledGraph::new(g.labels().to_vec(), edges).unwrap()
}

/// A non-empty subset of the builtin templates chosen by a bit mask.
pub fn arb_builtin_subset() -> impl Strategy<Value = Vec<Arc<Template>>> {
    let all = builtins();
    (1u32..(1 << all.len())).prop_map(move |mask| {
        all.iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, t)| Arc::clone(t))
            .collect()
    })
}

pub fn arb_bound() -> impl Strategy<Value = tgnn::Bound> {
    prop_oneof![Just(tgnn::Bound::AtMost(1)), Just(tgnn::Bound::AtMost(2)), Just(tgnn::Bound::Unbounded)]
}

// ---------------------------------------------------------------------------
// Random models with dyadic weights, so every sum is exact in f64.

use rand::Rng;
use tgnn::gnn::{Activation, Classifier, GnnModel, Layer, OuterAggregator, Slot, TemplateAggregator};

/// Multiples of 1/4 in [-2, 2].
pub fn dyadic<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    f64::from(rng.gen_range(-8i32..=8)) / 4.0
}

pub fn dyadic_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows).map(|_| (0..cols).map(|_| dyadic(rng)).collect()).collect()
}

fn random_activation<R: Rng + ?Sized>(rng: &mut R) -> Activation {
    [Activation::Identity, Activation::Relu, Activation::TruncatedRelu][rng.gen_range(0..3)]
}

fn random_template_agg<R: Rng + ?Sized>(rng: &mut R, t: &Template, d: usize) -> TemplateAggregator {
    match rng.gen_range(0..3) {
        0 if t.size() > 1 => TemplateAggregator::Project {
            vertex: rng.gen_range(1..t.size()),
            feature: None,
        },
        1 if t.size() > 1 => TemplateAggregator::AndGate {
            features: (1..t.size()).map(|_| rng.gen_range(0..d)).collect(),
        },
        _ => {
            let out = rng.gen_range(1..=d);
            TemplateAggregator::Affine {
                weights: dyadic_matrix(rng, t.size() * d, out),
                bias: (0..out).map(|_| dyadic(rng)).collect(),
                activation: random_activation(rng),
            }
        }
    }
}

/// A random model over `templates` whose outer aggregators are drawn by
/// `outer`. Input features are the labels (dimension `d`).
pub fn random_model<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    layers: usize,
    templates: &[Arc<Template>],
    outer: impl Fn(&mut R) -> OuterAggregator,
) -> GnnModel {
    let layers = (0..layers)
        .map(|_| {
            let slots: Vec<Slot> = (0..rng.gen_range(1..=2))
                .map(|_| {
                    let t = Arc::clone(&templates[rng.gen_range(0..templates.len())]);
                    let template_agg = random_template_agg(rng, &t, d);
                    Slot {
                        template: t,
                        template_agg,
                        outer_agg: outer(rng),
                    }
                })
                .collect();
            let z: usize = slots.iter().map(|s| s.template_agg.output_dim(d)).sum();
            Layer {
                slots,
                combine: dyadic_matrix(rng, d, d),
                aggregate: dyadic_matrix(rng, z, d),
                bias: (0..d).map(|_| dyadic(rng)).collect(),
                activation: random_activation(rng),
            }
        })
        .collect();
    let model = GnnModel {
        dimension: d,
        input_map: (0..d).map(Some).collect(),
        layers,
        cls: Classifier {
            component: 0,
            threshold: 0.5,
        },
    };
    model.validate().unwrap();
    model
}

pub fn bits(x: &[f64]) -> Vec<u64> {
    x.iter().map(|f| f.to_bits()).collect()
}
