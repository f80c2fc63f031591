//! Template colour refinement (T-WL).
//!
//! Round 0 colours nodes by their exact label bits. In round `l` a node's
//! signature is its previous colour together with, per template, the multiset
//! of colour tuples `(col(f(1)), …, col(f(n)))` over all embeddings `f` at the
//! node. With a finite bound `c`, multiplicities above `c` are capped before
//! comparison. Signatures are interned into dense colour ids; graphs passed
//! to one call share the interning table, so ids are comparable across them.

use std::borrow::Borrow;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::embedding::{embeddings_per_node, Embedding};
use crate::error::{Error, Result};
use crate::graph::LabelledGraph;
use crate::multiset::Multiset;
use crate::template::Template;

/// Counting bound for refinement, bisimulation and aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bound {
    Unbounded,
    AtMost(usize),
}

impl Bound {
    pub fn finite(c: usize) -> Result<Self> {
        if c == 0 {
            Err(Error::InvalidConfig("counting bound must be at least 1".into()))
        } else {
            Ok(Bound::AtMost(c))
        }
    }

    pub fn cap(self, m: usize) -> usize {
        match self {
            Bound::Unbounded => m,
            Bound::AtMost(c) => m.min(c),
        }
    }

    pub fn as_finite(self) -> Option<usize> {
        match self {
            Bound::Unbounded => None,
            Bound::AtMost(c) => Some(c),
        }
    }

    /// Parses `"inf"`/`"unbounded"` or a positive integer.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "unbounded" | "∞" => Ok(Bound::Unbounded),
            other => other
                .parse::<usize>()
                .map_err(|_| Error::InvalidConfig(format!("bad bound `{s}`")))
                .and_then(Bound::finite),
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Unbounded => f.write_str("inf"),
            Bound::AtMost(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TwlConfig {
    pub templates: Vec<Arc<Template>>,
    pub rounds: usize,
    pub bound: Bound,
}

impl TwlConfig {
    pub fn new(templates: Vec<Arc<Template>>, rounds: usize, bound: Bound) -> Result<Self> {
        let cfg = Self {
            templates,
            rounds,
            bound,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.templates.is_empty() {
            return Err(Error::InvalidConfig("template list is empty".into()));
        }
        for (i, t) in self.templates.iter().enumerate() {
            if self.templates[..i]
                .iter()
                .any(|s| s.name() == t.name() || **s == **t)
            {
                return Err(Error::InvalidConfig(format!(
                    "template `{}` listed twice",
                    t.name()
                )));
            }
            if let Err(violations) = t.validate() {
                return Err(Error::InvalidTemplate {
                    name: t.name().to_string(),
                    violations,
                });
            }
        }
        if self.bound == Bound::AtMost(0) {
            return Err(Error::InvalidConfig("counting bound must be at least 1".into()));
        }
        Ok(())
    }
}

/// Colours per round, graph and node. Ids are dense per round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    rounds: Vec<Vec<Vec<u32>>>,
}

impl Coloring {
    pub fn color(&self, round: usize, graph: usize, node: usize) -> u32 {
        self.rounds[round][graph][node]
    }

    /// Colours of every graph at `round`.
    pub fn round(&self, round: usize) -> &[Vec<u32>] {
        &self.rounds[round]
    }

    /// Index of the last computed round.
    pub fn last_round(&self) -> usize {
        self.rounds.len() - 1
    }

    pub fn num_colors(&self, round: usize) -> usize {
        distinct_colors(&self.rounds[round])
    }

    /// Flat `(round, graph, node, colour)` records.
    pub fn records(&self) -> impl Iterator<Item = (usize, usize, usize, u32)> + '_ {
        self.rounds.iter().enumerate().flat_map(|(r, gs)| {
            gs.iter().enumerate().flat_map(move |(g, cs)| {
                cs.iter().enumerate().map(move |(v, &c)| (r, g, v, c))
            })
        })
    }
}

fn distinct_colors(colors: &[Vec<u32>]) -> usize {
    colors
        .iter()
        .flatten()
        .max()
        .map_or(0, |&m| m as usize + 1)
}

#[derive(PartialEq, Eq, Hash)]
struct Signature {
    previous: u32,
    per_template: Vec<Vec<(Vec<u32>, usize)>>,
}

/// Precomputed embeddings for a fixed list of graphs and templates.
pub(crate) struct Refiner<'g> {
    graphs: Vec<&'g LabelledGraph>,
    // [graph][template][node]
    embeddings: Vec<Vec<Vec<Vec<Embedding>>>>,
    bound: Bound,
}

impl<'g> Refiner<'g> {
    pub(crate) fn new<G: Borrow<LabelledGraph>>(
        graphs: &'g [G],
        templates: &[Arc<Template>],
        bound: Bound,
    ) -> Result<Self> {
        let graphs: Vec<&LabelledGraph> = graphs.iter().map(Borrow::borrow).collect();
        if let Some(first) = graphs.first() {
            if let Some(bad) = graphs.iter().find(|g| g.dim() != first.dim()) {
                return Err(Error::DimensionMismatch {
                    expected: first.dim(),
                    found: bad.dim(),
                });
            }
        }
        let embeddings = graphs
            .iter()
            .map(|g| templates.iter().map(|t| embeddings_per_node(t, g)).collect())
            .collect();
        Ok(Self {
            graphs,
            embeddings,
            bound,
        })
    }

    pub(crate) fn initial(&self) -> Vec<Vec<u32>> {
        let mut table: HashMap<Vec<u64>, u32> = HashMap::new();
        self.graphs
            .iter()
            .map(|g| {
                g.labels()
                    .iter()
                    .map(|label| {
                        let key = label.iter().map(|x| x.to_bits()).collect();
                        let next = table.len() as u32;
                        *table.entry(key).or_insert(next)
                    })
                    .collect()
            })
            .collect()
    }

    pub(crate) fn step(&self, previous: &[Vec<u32>]) -> Vec<Vec<u32>> {
        let mut table: HashMap<Signature, u32> = HashMap::new();
        self.embeddings
            .iter()
            .zip(previous)
            .map(|(per_template, colors)| {
                (0..colors.len())
                    .map(|v| {
                        let sig = Signature {
                            previous: colors[v],
                            per_template: per_template
                                .iter()
                                .map(|per_node| {
                                    let ms: Multiset<Vec<u32>> = per_node[v]
                                        .iter()
                                        .map(|f| f.0[1..].iter().map(|&u| colors[u]).collect())
                                        .collect();
                                    ms.into_vec()
                                        .into_iter()
                                        .map(|(k, m)| (k, self.bound.cap(m)))
                                        .collect()
                                })
                                .collect(),
                        };
                        let next = table.len() as u32;
                        *table.entry(sig).or_insert(next)
                    })
                    .collect()
            })
            .collect()
    }
}

/// Runs `cfg.rounds` rounds of T-WL on all graphs in one interning session.
pub fn run_twl<G: Borrow<LabelledGraph>>(graphs: &[G], cfg: &TwlConfig) -> Result<Coloring> {
    cfg.validate()?;
    let refiner = Refiner::new(graphs, &cfg.templates, cfg.bound)?;
    let mut rounds = vec![refiner.initial()];
    for _ in 0..cfg.rounds {
        let next = refiner.step(rounds.last().expect("round 0 exists"));
        rounds.push(next);
    }
    Ok(Coloring { rounds })
}

/// Smallest `l ≥ 1` whose partition equals the partition of round `l - 1`.
pub fn stabilization_round<G: Borrow<LabelledGraph>>(
    graphs: &[G],
    templates: &[Arc<Template>],
    bound: Bound,
) -> Result<usize> {
    TwlConfig {
        templates: templates.to_vec(),
        rounds: 0,
        bound,
    }
    .validate()?;
    let refiner = Refiner::new(graphs, templates, bound)?;
    let mut colors = refiner.initial();
    let total: usize = colors.iter().map(Vec::len).sum();
    for l in 1..=total.max(1) {
        let next = refiner.step(&colors);
        // Refinement only splits classes, so equal class counts mean equal partitions.
        if distinct_colors(&next) == distinct_colors(&colors) {
            return Ok(l);
        }
        colors = next;
    }
    unreachable!("a partition of {total} nodes cannot be refined {total} times")
}

/// Whether round `cfg.rounds` separates `(g1, v1)` from `(g2, v2)`.
pub fn distinguishes(
    g1: &LabelledGraph,
    v1: usize,
    g2: &LabelledGraph,
    v2: usize,
    cfg: &TwlConfig,
) -> Result<bool> {
    g1.check_node(v1)?;
    g2.check_node(v2)?;
    let coloring = run_twl(&[g1, g2], cfg)?;
    Ok(coloring.color(cfg.rounds, 0, v1) != coloring.color(cfg.rounds, 1, v2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{cycle, star};
    use crate::template::{builtin_registry, PATH, T1, TRIANGLE};

    fn templates(names: &[&str]) -> Vec<Arc<Template>> {
        builtin_registry().select(names).unwrap()
    }

    #[test]
    fn triangle_and_path_separate_cycles_in_one_round() {
        let cfg = TwlConfig::new(templates(&[TRIANGLE, PATH]), 1, Bound::Unbounded).unwrap();
        let (c3, c6) = (cycle(3, 1), cycle(6, 1));
        let col = run_twl(&[&c3, &c6], &cfg).unwrap();
        for a in 0..3 {
            for b in 0..6 {
                assert_ne!(col.color(1, 0, a), col.color(1, 1, b));
            }
        }
        assert!(distinguishes(&c3, 0, &c6, 0, &cfg).unwrap());
    }

    #[test]
    fn edge_template_never_separates_cycles() {
        let (c3, c6) = (cycle(3, 1), cycle(6, 1));
        let cfg = TwlConfig::new(templates(&[T1]), 5, Bound::Unbounded).unwrap();
        let col = run_twl(&[&c3, &c6], &cfg).unwrap();
        for l in 0..=5 {
            assert_eq!(col.num_colors(l), 1);
        }
        assert!(!distinguishes(&c3, 0, &c6, 0, &cfg).unwrap());
    }

    #[test]
    fn zero_rounds_is_label_interning() {
        let g = LabelledGraph::new(vec![vec![1.0], vec![0.0], vec![1.0]], [(0, 1)]).unwrap();
        let cfg = TwlConfig::new(templates(&[T1]), 0, Bound::Unbounded).unwrap();
        let col = run_twl(&[&g], &cfg).unwrap();
        assert_eq!(col.round(0), &[vec![0, 1, 0]]);
    }

    #[test]
    fn stabilization_examples() {
        let t1 = templates(&[T1]);
        let distinct = LabelledGraph::new(vec![vec![0.0], vec![1.0]], [(0, 1)]).unwrap();
        assert_eq!(stabilization_round(&[distinct], &t1, Bound::Unbounded).unwrap(), 1);
        assert_eq!(stabilization_round(&[cycle(6, 1)], &t1, Bound::Unbounded).unwrap(), 1);
        assert_eq!(stabilization_round(&[star(3, 1)], &t1, Bound::Unbounded).unwrap(), 2);
    }

    #[test]
    fn bounded_refinement_caps_multiplicities() {
        // Centres with 2 and 3 leaves differ unbounded but agree at c = 2.
        let (s2, s3) = (star(2, 1), star(3, 1));
        let t1 = templates(&[T1]);
        let unbounded = TwlConfig::new(t1.clone(), 1, Bound::Unbounded).unwrap();
        let bounded = TwlConfig::new(t1, 1, Bound::AtMost(2)).unwrap();
        assert!(distinguishes(&s2, 0, &s3, 0, &unbounded).unwrap());
        assert!(!distinguishes(&s2, 0, &s3, 0, &bounded).unwrap());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(TwlConfig::new(vec![], 1, Bound::Unbounded).is_err());
        let t = templates(&[T1]);
        assert!(TwlConfig::new(vec![t[0].clone(), t[0].clone()], 1, Bound::Unbounded).is_err());
        assert!(Bound::finite(0).is_err());
        let a = LabelledGraph::new(vec![vec![0.0]], []).unwrap();
        let b = LabelledGraph::new(vec![vec![0.0, 1.0]], []).unwrap();
        let cfg = TwlConfig::new(t, 1, Bound::Unbounded).unwrap();
        assert!(matches!(
            run_twl(&[a, b], &cfg),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn bound_parsing() {
        assert_eq!(Bound::parse("inf").unwrap(), Bound::Unbounded);
        assert_eq!(Bound::parse("3").unwrap(), Bound::AtMost(3));
        assert!(Bound::parse("0").is_err());
        assert_eq!(Bound::AtMost(2).to_string(), "2");
    }
}
