//! Model checking GML(T) over Boolean-labelled graphs.
//!
//! Proposition `i` holds at a node when label component `i` is 1. A modal
//! formula `<T>=j>(φ₁, …, φₙ)` holds at `v` when at least `j` embeddings of
//! `T` rooted at `v` send every vertex `i ≥ 1` to a node satisfying `φᵢ`.
//!
//! [`Evaluator`] computes whole satisfaction vectors (one bit per node) and
//! memoizes them per subformula, keyed by the address of the shared child.
//! Formulae built with shared `Arc` children are therefore checked in time
//! linear in their DAG size.

use std::collections::HashMap;
use std::sync::Arc;

use crate::embedding::{embeddings_per_node, Embedding};
use crate::error::{Error, Result};
use crate::graph::LabelledGraph;
use crate::logic::Formula;
use crate::template::Template;

/// Satisfaction vector of a formula: entry `v` is `(G, v) ⊨ φ`.
pub type SatVector = Arc<[bool]>;

pub struct Evaluator<'g> {
    graph: &'g LabelledGraph,
    embeddings: HashMap<Arc<Template>, Arc<Vec<Vec<Embedding>>>>,
    // The stored Arc keeps the key address alive for the evaluator's lifetime.
    memo: HashMap<usize, (Arc<Formula>, SatVector)>,
}

impl<'g> Evaluator<'g> {
    /// Fails when some label component is not 0 or 1.
    pub fn new(graph: &'g LabelledGraph) -> Result<Self> {
        if let Some(node) = graph.first_non_boolean() {
            return Err(Error::NonBooleanLabel { node });
        }
        Ok(Self {
            graph,
            embeddings: HashMap::new(),
            memo: HashMap::new(),
        })
    }

    pub fn graph(&self) -> &'g LabelledGraph {
        self.graph
    }

    /// Embeddings of `t` at every node, cached per template.
    pub fn embeddings(&mut self, t: &Arc<Template>) -> Arc<Vec<Vec<Embedding>>> {
        let graph = self.graph;
        Arc::clone(
            self.embeddings
                .entry(Arc::clone(t))
                .or_insert_with(|| Arc::new(embeddings_per_node(t, graph))),
        )
    }

    /// Satisfaction vector of a shared subformula, memoized.
    pub fn sat(&mut self, f: &Arc<Formula>) -> Result<SatVector> {
        let key = Arc::as_ptr(f) as usize;
        if let Some((_, v)) = self.memo.get(&key) {
            return Ok(Arc::clone(v));
        }
        let v = self.compute(f)?;
        self.memo.insert(key, (Arc::clone(f), Arc::clone(&v)));
        Ok(v)
    }

    /// Satisfaction vector of a formula that is not behind an `Arc`. Its
    /// children are still memoized.
    pub fn sat_formula(&mut self, f: &Formula) -> Result<SatVector> {
        self.compute(f)
    }

    /// `|S|`: embeddings of `t` at `v` whose image of vertex `i` lies in
    /// `args[i - 1]`.
    pub fn count_matching(&mut self, t: &Arc<Template>, v: usize, args: &[SatVector]) -> usize {
        self.embeddings(t)[v]
            .iter()
            .filter(|f| args.iter().enumerate().all(|(i, a)| a[f.image(i + 1)]))
            .count()
    }

    fn compute(&mut self, f: &Formula) -> Result<SatVector> {
        let g = self.graph;
        let out: SatVector = match f {
            Formula::Prop(i) => {
                if *i >= g.dim() {
                    return Err(Error::PropositionOutOfRange {
                        index: *i,
                        count: g.dim(),
                    });
                }
                (0..g.node_count()).map(|v| g.label(v)[*i] == 1.0).collect()
            }
            Formula::Not(a) => self.sat(a)?.iter().map(|b| !b).collect(),
            Formula::And(a, b) => {
                let a = self.sat(a)?;
                let b = self.sat(b)?;
                a.iter().zip(b.iter()).map(|(x, y)| *x && *y).collect()
            }
            Formula::Diamond {
                template,
                threshold,
                args,
            } => {
                let args = args
                    .iter()
                    .map(|a| self.sat(a))
                    .collect::<Result<Vec<_>>>()?;
                let emb = self.embeddings(template);
                (0..g.node_count())
                    .map(|v| {
                        emb[v]
                            .iter()
                            .filter(|f| args.iter().enumerate().all(|(i, a)| a[f.image(i + 1)]))
                            .take(*threshold)
                            .count()
                            >= *threshold
                    })
                    .collect()
            }
        };
        Ok(out)
    }
}

/// `(G, v) ⊨ φ`.
pub fn eval(f: &Formula, g: &LabelledGraph, v: usize) -> Result<bool> {
    g.check_node(v)?;
    Ok(eval_all(f, g)?[v])
}

/// `(G, v) ⊨ φ` for every node `v`.
pub fn eval_all(f: &Formula, g: &LabelledGraph) -> Result<Vec<bool>> {
    Ok(Evaluator::new(g)?.sat_formula(f)?.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{cycle, star};
    use crate::logic::parse_formula;
    use crate::template::builtin_registry;

    fn check(text: &str, ap: &[&str], g: &LabelledGraph) -> Vec<bool> {
        let ap: Vec<String> = ap.iter().map(|s| s.to_string()).collect();
        let f = parse_formula(text, &builtin_registry(), &ap).unwrap();
        eval_all(&f, g).unwrap()
    }

    fn star_two_p_leaves() -> LabelledGraph {
        LabelledGraph::new(
            vec![vec![0.0], vec![1.0], vec![1.0], vec![0.0]],
            [(0, 1), (0, 2), (0, 3)],
        )
        .unwrap()
    }

    #[test]
    fn graded_edge_modality_on_star() {
        let g = star_two_p_leaves();
        assert_eq!(check("<T1>=2>(p)", &["p"], &g), vec![true, false, false, false]);
        assert_eq!(check("<T1>=3>(p)", &["p"], &g), vec![false; 4]);
    }

    #[test]
    fn triangle_modality_separates_cycles() {
        let t = "!(p & !p)";
        let text = format!("<T△>=1>({t}, {t})");
        assert!(check(&text, &["p"], &cycle(3, 1))[0]);
        assert!(!check(&text, &["p"], &cycle(6, 1))[0]);
    }

    #[test]
    fn isolated_node_has_no_embeddings() {
        let g = LabelledGraph::new(vec![vec![1.0]], []).unwrap();
        assert_eq!(check("<T1>=1>(p | !p)", &["p"], &g), vec![false]);
        assert_eq!(check("<T△>=1>(p, p)", &["p"], &g), vec![false]);
    }

    #[test]
    fn contradiction_is_false_everywhere() {
        assert_eq!(check("p & !p", &["p"], &star(3, 1)), vec![false; 4]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = LabelledGraph::new(vec![vec![0.5]], []).unwrap();
        assert!(matches!(
            eval(&Formula::prop(0), &g, 0),
            Err(Error::NonBooleanLabel { node: 0 })
        ));
        assert!(matches!(
            eval(&Formula::prop(1), &cycle(3, 1), 0),
            Err(Error::PropositionOutOfRange { index: 1, count: 1 })
        ));
    }

    #[test]
    fn shared_children_are_memoized() {
        let g = star_two_p_leaves();
        let shared = Arc::new(Formula::prop(0));
        let f = Arc::new(Formula::And(Arc::clone(&shared), Arc::new(Formula::Not(Arc::clone(&shared)))));
        let mut ev = Evaluator::new(&g).unwrap();
        assert_eq!(&*ev.sat(&f).unwrap(), &[false; 4]);
        assert_eq!(ev.memo.len(), 3);
    }
}
