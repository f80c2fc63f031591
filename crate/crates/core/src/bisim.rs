//! Graded (l, c) template bisimulation.
//!
//! Two deciders are provided. [`bisimilar_via_twl`] compares T-WL colours at
//! round `l` (shared interning session, capped multiplicities when bounded).
//! [`bisim_oracle`] builds the relations `Z_0 ⊇ Z_1 ⊇ … ⊇ Z_l` between the
//! two node sets straight from the back-and-forth definition: a pair survives
//! a level when, for every template and every `k` up to the bound, every
//! `k`-subset of embeddings on one side has `k` pairwise-distinct partners on
//! the other side that are related pointwise. Subset matchability is checked
//! by exhaustive partner search, not by counting, so the oracle shares no
//! logic with the colour-refinement route.

use std::collections::HashMap;
use std::sync::Arc;

use itertools::Itertools;

use crate::embedding::{embeddings_per_node, Embedding};
use crate::error::{Error, Result};
use crate::graph::{LabelledGraph, PointedGraph};
use crate::template::Template;
use crate::twl::{run_twl, Bound, TwlConfig};

/// Resource guard for the exhaustive oracle.
#[derive(Debug, Clone, Copy)]
pub struct OracleLimits {
    pub max_nodes: usize,
    pub max_embeddings: usize,
    pub max_bound: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_nodes: 8,
            max_embeddings: 12,
            max_bound: 3,
        }
    }
}

/// `(G, v) ∼^{l,c} (G', v')` decided by T-WL colours.
pub fn bisimilar_via_twl(
    g: &LabelledGraph,
    v: usize,
    g2: &LabelledGraph,
    v2: usize,
    templates: &[Arc<Template>],
    level: usize,
    bound: Bound,
) -> Result<bool> {
    g.check_node(v)?;
    g2.check_node(v2)?;
    let cfg = TwlConfig::new(templates.to_vec(), level, bound)?;
    let col = run_twl(&[g, g2], &cfg)?;
    Ok(col.color(level, 0, v) == col.color(level, 1, v2))
}

/// `(G, v) ∼^{l,c} (G', v')` decided from the definition, with the default
/// [`OracleLimits`].
pub fn bisim_oracle(
    g: &LabelledGraph,
    v: usize,
    g2: &LabelledGraph,
    v2: usize,
    templates: &[Arc<Template>],
    level: usize,
    bound: Bound,
) -> Result<bool> {
    let relation = oracle_relation(g, g2, templates, level, bound, OracleLimits::default())?;
    g.check_node(v)?;
    g2.check_node(v2)?;
    Ok(relation[level][v][v2])
}

/// All levels `Z_0..=Z_l` of the maximal graded bisimulation between the node
/// sets of `g` and `g2`, as `z[level][x][y]`.
pub fn oracle_relation(
    g: &LabelledGraph,
    g2: &LabelledGraph,
    templates: &[Arc<Template>],
    level: usize,
    bound: Bound,
    limits: OracleLimits,
) -> Result<Vec<Vec<Vec<bool>>>> {
    for graph in [g, g2] {
        if graph.node_count() > limits.max_nodes {
            return Err(Error::ResourceGuard(format!(
                "oracle accepts graphs with at most {} nodes, got {}",
                limits.max_nodes,
                graph.node_count()
            )));
        }
    }
    if let Bound::AtMost(c) = bound {
        if c > limits.max_bound {
            return Err(Error::ResourceGuard(format!(
                "oracle accepts bounds up to {}, got {c}",
                limits.max_bound
            )));
        }
    }
    let emb_g = embeddings_checked(g, templates, limits)?;
    let emb_h = embeddings_checked(g2, templates, limits)?;

    let mut z = vec![(0..g.node_count())
        .map(|x| {
            (0..g2.node_count())
                .map(|y| labels_equal(g.label(x), g2.label(y)))
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()];
    for _ in 0..level {
        let prev = z.last().expect("level 0 exists");
        let next = (0..g.node_count())
            .map(|x| {
                (0..g2.node_count())
                    .map(|y| {
                        prev[x][y]
                            && (0..templates.len()).all(|t| {
                                back_and_forth(&emb_g[t][x], &emb_h[t][y], prev, bound)
                            })
                    })
                    .collect()
            })
            .collect();
        z.push(next);
    }
    Ok(z)
}

fn labels_equal(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

fn embeddings_checked(
    g: &LabelledGraph,
    templates: &[Arc<Template>],
    limits: OracleLimits,
) -> Result<Vec<Vec<Vec<Embedding>>>> {
    let all: Vec<Vec<Vec<Embedding>>> = templates.iter().map(|t| embeddings_per_node(t, g)).collect();
    for (t, per_node) in templates.iter().zip(&all) {
        if let Some(big) = per_node.iter().map(Vec::len).max() {
            if big > limits.max_embeddings {
                return Err(Error::ResourceGuard(format!(
                    "template `{}` has {big} embeddings at one node; the oracle allows {}",
                    t.name(),
                    limits.max_embeddings
                )));
            }
        }
    }
    Ok(all)
}

/// Both clauses for one template at one pair of nodes.
fn back_and_forth(
    left: &[Embedding],
    right: &[Embedding],
    z: &[Vec<bool>],
    bound: Bound,
) -> bool {
    // related[i][j]: left[i] and right[j] agree pointwise under z
    let related: Vec<Vec<bool>> = left
        .iter()
        .map(|f| {
            right
                .iter()
                .map(|h| f.0.iter().zip(&h.0).all(|(&a, &b)| z[a][b]))
                .collect()
        })
        .collect();
    let transposed: Vec<Vec<bool>> = (0..right.len())
        .map(|j| (0..left.len()).map(|i| related[i][j]).collect())
        .collect();
    let k_max = match bound {
        Bound::AtMost(c) => c,
        Bound::Unbounded => left.len().max(right.len()),
    };
    (1..=k_max).all(|k| {
        every_subset_matchable(&related, right.len(), k)
            && every_subset_matchable(&transposed, left.len(), k)
    })
}

/// Every `k`-subset of the rows has pairwise-distinct related columns.
fn every_subset_matchable(related: &[Vec<bool>], columns: usize, k: usize) -> bool {
    if k > related.len() {
        return true;
    }
    (0..related.len()).combinations(k).all(|rows| {
        let mut taken = vec![false; columns];
        assign_partners(related, &rows, &mut taken)
    })
}

fn assign_partners(related: &[Vec<bool>], rows: &[usize], taken: &mut [bool]) -> bool {
    let Some((&row, rest)) = rows.split_first() else {
        return true;
    };
    for col in 0..taken.len() {
        if related[row][col] && !taken[col] {
            taken[col] = true;
            let ok = assign_partners(related, rest, taken);
            taken[col] = false;
            if ok {
                return true;
            }
        }
    }
    false
}

/// Unbounded graded bisimilarity using the bijection formulation: at each
/// level and for every template, the embedding sets must admit a perfect
/// matching between pointwise-related embeddings.
pub fn bisim_bijection(
    g: &LabelledGraph,
    v: usize,
    g2: &LabelledGraph,
    v2: usize,
    templates: &[Arc<Template>],
    level: usize,
) -> Result<bool> {
    g.check_node(v)?;
    g2.check_node(v2)?;
    let emb_g: Vec<_> = templates.iter().map(|t| embeddings_per_node(t, g)).collect();
    let emb_h: Vec<_> = templates.iter().map(|t| embeddings_per_node(t, g2)).collect();
    let mut z: Vec<Vec<bool>> = (0..g.node_count())
        .map(|x| {
            (0..g2.node_count())
                .map(|y| labels_equal(g.label(x), g2.label(y)))
                .collect()
        })
        .collect();
    for _ in 0..level {
        z = (0..g.node_count())
            .map(|x| {
                (0..g2.node_count())
                    .map(|y| {
                        z[x][y]
                            && (0..templates.len())
                                .all(|t| has_perfect_matching(&emb_g[t][x], &emb_h[t][y], &z))
                    })
                    .collect()
            })
            .collect();
    }
    Ok(z[v][v2])
}

fn has_perfect_matching(left: &[Embedding], right: &[Embedding], z: &[Vec<bool>]) -> bool {
    if left.len() != right.len() {
        return false;
    }
    let adj: Vec<Vec<usize>> = left
        .iter()
        .map(|f| {
            (0..right.len())
                .filter(|&j| f.0.iter().zip(&right[j].0).all(|(&a, &b)| z[a][b]))
                .collect()
        })
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; right.len()];
    fn augment(i: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
        for &j in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                if owner[j].map_or(true, |o| augment(o, adj, owner, seen)) {
                    owner[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    (0..left.len()).all(|i| augment(i, &adj, &mut owner, &mut vec![false; right.len()]))
}

/// Partitions a corpus of pointed graphs by their round-`l` colour in one
/// shared T-WL session. Classes appear in order of their first member; each
/// class lists corpus indices in input order, so the first index is the
/// class representative.
pub fn bisim_classes(
    corpus: &[PointedGraph],
    templates: &[Arc<Template>],
    level: usize,
    bound: Bound,
) -> Result<Vec<Vec<usize>>> {
    if corpus.is_empty() {
        return Err(Error::InvalidConfig("corpus is empty".into()));
    }
    let mut graphs: Vec<&LabelledGraph> = Vec::new();
    let mut graph_of = Vec::with_capacity(corpus.len());
    for pg in corpus {
        let idx = match graphs
            .iter()
            .position(|g| std::ptr::eq(*g, Arc::as_ptr(&pg.graph)))
        {
            Some(i) => i,
            None => {
                graphs.push(&pg.graph);
                graphs.len() - 1
            }
        };
        graph_of.push(idx);
    }
    let cfg = TwlConfig::new(templates.to_vec(), level, bound)?;
    let col = run_twl(&graphs, &cfg)?;
    let mut class_of: HashMap<u32, usize> = HashMap::new();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (i, pg) in corpus.iter().enumerate() {
        let c = col.color(level, graph_of[i], pg.point);
        let next = classes.len();
        let k = *class_of.entry(c).or_insert(next);
        if k == classes.len() {
            classes.push(Vec::new());
        }
        classes[k].push(i);
    }
    Ok(classes)
}
