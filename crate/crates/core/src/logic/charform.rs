//! Characteristic formulae.
//!
//! `χ^l` of a pointed graph conjoins its level-`l-1` formula with, per
//! template, one graded modality per embedding (arguments are the level-`l-1`
//! formulae of the image nodes, threshold the number of embeddings matching
//! them) and an upper bound on the total embedding count.
//!
//! The bounded variant `χ^{l,c}` caps positive thresholds at `c` and replaces
//! the total-count bound by negative modalities over tuples of class
//! representatives. Representatives are taken relative to a corpus: the pool
//! is every node of every corpus graph, partitioned by level-`l-1` bounded
//! colour refinement, and the first pool member of each class represents it.
//! Within that pool, `(G', v') ⊨ χ^{l,c}_{(G,v)}` holds exactly when the two
//! pointed graphs are `(l, c)`-bisimilar.
//!
//! All formulae are built through a hash-consing factory, so equal
//! subformulae are the same allocation. Duplicate conjuncts collapse and the
//! evaluator's pointer memo shares work across every formula of a run.

use std::collections::HashMap;
use std::sync::Arc;

use itertools::Itertools;

use crate::bisim::bisim_classes;
use crate::error::{Error, Result};
use crate::graph::{LabelledGraph, PointedGraph};
use crate::logic::eval::{Evaluator, SatVector};
use crate::logic::Formula;
use crate::template::Template;
use crate::twl::Bound;

/// Upper limit on representative tuples examined per template and node.
pub const MAX_REPRESENTATIVE_TUPLES: usize = 250_000;

#[derive(Hash, PartialEq, Eq)]
enum Key {
    Prop(usize),
    Not(usize),
    And(usize, usize),
    Diamond(usize, usize, Vec<usize>),
}

fn addr<T>(a: &Arc<T>) -> usize {
    Arc::as_ptr(a) as *const () as usize
}

/// Hash-consing constructor: structurally equal formulae built through one
/// factory are pointer-equal.
#[derive(Default)]
pub(crate) struct FormulaFactory {
    table: HashMap<Key, Arc<Formula>>,
    // Keeps template addresses used as keys alive.
    templates: Vec<Arc<Template>>,
}

impl FormulaFactory {
    fn intern(&mut self, key: Key, build: impl FnOnce() -> Formula) -> Arc<Formula> {
        Arc::clone(self.table.entry(key).or_insert_with(|| Arc::new(build())))
    }

    pub(crate) fn prop(&mut self, p: usize) -> Arc<Formula> {
        self.intern(Key::Prop(p), || Formula::Prop(p))
    }

    pub(crate) fn not(&mut self, a: &Arc<Formula>) -> Arc<Formula> {
        self.intern(Key::Not(addr(a)), || Formula::Not(Arc::clone(a)))
    }

    pub(crate) fn and(&mut self, a: &Arc<Formula>, b: &Arc<Formula>) -> Arc<Formula> {
        self.intern(Key::And(addr(a), addr(b)), || {
            Formula::And(Arc::clone(a), Arc::clone(b))
        })
    }

    pub(crate) fn diamond(
        &mut self,
        t: &Arc<Template>,
        threshold: usize,
        args: &[Arc<Formula>],
    ) -> Arc<Formula> {
        debug_assert!(threshold >= 1 && args.len() == t.arity());
        if !self.templates.iter().any(|k| Arc::ptr_eq(k, t)) {
            self.templates.push(Arc::clone(t));
        }
        let key = Key::Diamond(addr(t), threshold, args.iter().map(addr).collect());
        self.intern(key, || Formula::Diamond {
            template: Arc::clone(t),
            threshold,
            args: args.to_vec(),
        })
    }

    /// `p ∧ ¬p`.
    pub(crate) fn falsity(&mut self, p: usize) -> Arc<Formula> {
        let a = self.prop(p);
        let na = self.not(&a);
        self.and(&a, &na)
    }

    /// `¬(p ∧ ¬p)`.
    pub(crate) fn truth(&mut self, p: usize) -> Arc<Formula> {
        let f = self.falsity(p);
        self.not(&f)
    }

    /// Balanced conjunction with duplicates removed; `⊤` when empty.
    pub(crate) fn conjunction(&mut self, parts: Vec<Arc<Formula>>) -> Arc<Formula> {
        let mut parts: Vec<_> = parts.into_iter().unique_by(addr).collect();
        if parts.is_empty() {
            return self.truth(0);
        }
        while parts.len() > 1 {
            parts = parts
                .chunks(2)
                .map(|pair| match pair {
                    [a, b] => self.and(a, b),
                    [a] => Arc::clone(a),
                    _ => unreachable!(),
                })
                .collect();
        }
        parts.pop().expect("non-empty")
    }

    /// `¬(¬φ₁ ∧ … ∧ ¬φₙ)`; `p₀ ∧ ¬p₀` when empty.
    pub(crate) fn disjunction(&mut self, parts: Vec<Arc<Formula>>) -> Arc<Formula> {
        if parts.is_empty() {
            return self.falsity(0);
        }
        let negated = parts.iter().map(|p| self.not(p)).collect();
        let c = self.conjunction(negated);
        self.not(&c)
    }

    /// `⋀{p | λ(v)ᵢ = 1} ∧ ⋀{¬p | λ(v)ᵢ = 0}`.
    fn literals(&mut self, label: &[f64]) -> Arc<Formula> {
        let parts = label
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let p = self.prop(i);
                if x == 1.0 {
                    p
                } else {
                    self.not(&p)
                }
            })
            .collect();
        self.conjunction(parts)
    }
}

fn check_graph(g: &LabelledGraph) -> Result<()> {
    if g.dim() == 0 {
        return Err(Error::InvalidConfig(
            "characteristic formulae need at least one proposition".into(),
        ));
    }
    if let Some(node) = g.first_non_boolean() {
        return Err(Error::NonBooleanLabel { node });
    }
    Ok(())
}

fn check_templates(templates: &[Arc<Template>]) -> Result<()> {
    if templates.is_empty() {
        return Err(Error::InvalidConfig("template set is empty".into()));
    }
    Ok(())
}

fn unwrap_arc(f: Arc<Formula>) -> Formula {
    Arc::try_unwrap(f).unwrap_or_else(|shared| (*shared).clone())
}

/// Unbounded characteristic formulae of the nodes of one graph.
pub struct UnboundedCharacteristic<'a> {
    templates: &'a [Arc<Template>],
    factory: FormulaFactory,
    evaluator: Evaluator<'a>,
    // [level][node]
    levels: Vec<Vec<Arc<Formula>>>,
}

impl<'a> UnboundedCharacteristic<'a> {
    pub fn new(g: &'a LabelledGraph, templates: &'a [Arc<Template>]) -> Result<Self> {
        check_graph(g)?;
        check_templates(templates)?;
        let mut factory = FormulaFactory::default();
        let base = g.labels().iter().map(|l| factory.literals(l)).collect();
        Ok(Self {
            templates,
            factory,
            evaluator: Evaluator::new(g)?,
            levels: vec![base],
        })
    }

    pub fn formula(&mut self, v: usize, level: usize) -> Result<Formula> {
        self.evaluator.graph().check_node(v)?;
        while self.levels.len() <= level {
            self.extend()?;
        }
        Ok(unwrap_arc(Arc::clone(&self.levels[level][v])))
    }

    fn extend(&mut self) -> Result<()> {
        let prev = self.levels.last().expect("level 0 exists").clone();
        let sats = prev
            .iter()
            .map(|f| self.evaluator.sat(f))
            .collect::<Result<Vec<SatVector>>>()?;
        let top = self.factory.truth(0);
        let n_nodes = prev.len();
        let mut next = Vec::with_capacity(n_nodes);
        for v in 0..n_nodes {
            let mut parts = vec![Arc::clone(&prev[v])];
            for t in self.templates {
                let emb = self.evaluator.embeddings(t);
                for f in &emb[v] {
                    let images = &f.assignment()[1..];
                    let args: Vec<_> = images.iter().map(|&w| Arc::clone(&prev[w])).collect();
                    let arg_sats: Vec<_> = images.iter().map(|&w| Arc::clone(&sats[w])).collect();
                    let k = self.evaluator.count_matching(t, v, &arg_sats);
                    parts.push(self.factory.diamond(t, k.max(1), &args));
                }
                let tops = vec![Arc::clone(&top); t.arity()];
                let d = self.factory.diamond(t, emb[v].len() + 1, &tops);
                parts.push(self.factory.not(&d));
            }
            next.push(self.factory.conjunction(parts));
        }
        self.levels.push(next);
        Ok(())
    }
}

/// `χ^l_{(G,v)}`.
pub fn char_formula_unbounded(
    g: &LabelledGraph,
    v: usize,
    level: usize,
    templates: &[Arc<Template>],
) -> Result<Formula> {
    UnboundedCharacteristic::new(g, templates)?.formula(v, level)
}

/// Bounded characteristic formulae relative to a corpus.
pub struct BoundedCharacteristic<'a> {
    templates: &'a [Arc<Template>],
    bound: usize,
    graphs: Vec<Arc<LabelledGraph>>,
    evaluators: Vec<Evaluator<'a>>,
    // Pool members as (graph index, node), graphs in first-appearance order.
    pool: Vec<(usize, usize)>,
    pool_index: HashMap<(usize, usize), usize>,
    factory: FormulaFactory,
    // [level][pool member]
    levels: Vec<Vec<Arc<Formula>>>,
    // Representatives of the classes of the level-l relation, per level.
    representatives: Vec<Vec<usize>>,
}

impl<'a> BoundedCharacteristic<'a> {
    pub fn new(
        corpus: &'a [PointedGraph],
        templates: &'a [Arc<Template>],
        bound: usize,
    ) -> Result<Self> {
        if bound == 0 {
            return Err(Error::InvalidConfig("counting bound must be at least 1".into()));
        }
        check_templates(templates)?;
        if corpus.is_empty() {
            return Err(Error::InvalidConfig("corpus is empty".into()));
        }
        let mut graphs: Vec<Arc<LabelledGraph>> = Vec::new();
        let mut evaluators = Vec::new();
        for pg in corpus {
            if !graphs.iter().any(|g| Arc::ptr_eq(g, &pg.graph)) {
                check_graph(&pg.graph)?;
                graphs.push(Arc::clone(&pg.graph));
                evaluators.push(Evaluator::new(&pg.graph)?);
            }
        }
        if let Some(bad) = graphs.iter().find(|g| g.dim() != graphs[0].dim()) {
            return Err(Error::DimensionMismatch {
                expected: graphs[0].dim(),
                found: bad.dim(),
            });
        }
        let pool: Vec<(usize, usize)> = graphs
            .iter()
            .enumerate()
            .flat_map(|(i, g)| (0..g.node_count()).map(move |v| (i, v)))
            .collect();
        let pool_index = pool.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let mut factory = FormulaFactory::default();
        let base = pool
            .iter()
            .map(|&(gi, v)| factory.literals(graphs[gi].label(v)))
            .collect();
        Ok(Self {
            templates,
            bound,
            graphs,
            evaluators,
            pool,
            pool_index,
            factory,
            levels: vec![base],
            representatives: Vec::new(),
        })
    }

    fn member_of(&self, pg: &PointedGraph) -> Result<usize> {
        self.graphs
            .iter()
            .position(|g| Arc::ptr_eq(g, &pg.graph))
            .and_then(|gi| self.pool_index.get(&(gi, pg.point)).copied())
            .ok_or(Error::SubjectNotInCorpus)
    }

    /// `χ^{l,c}` of a corpus member (or any node of a corpus graph).
    pub fn formula(&mut self, subject: &PointedGraph, level: usize) -> Result<Formula> {
        let m = self.member_of(subject)?;
        Ok(unwrap_arc(self.shared_formula(m, level)?))
    }

    fn shared_formula(&mut self, member: usize, level: usize) -> Result<Arc<Formula>> {
        while self.levels.len() <= level {
            self.extend()?;
        }
        Ok(Arc::clone(&self.levels[level][member]))
    }

    fn pool_points(&self) -> Vec<PointedGraph> {
        self.pool
            .iter()
            .map(|&(gi, v)| PointedGraph {
                graph: Arc::clone(&self.graphs[gi]),
                point: v,
            })
            .collect()
    }

    fn representatives(&mut self, level: usize) -> Result<Vec<usize>> {
        while self.representatives.len() <= level {
            let l = self.representatives.len();
            let classes = bisim_classes(
                &self.pool_points(),
                self.templates,
                l,
                Bound::AtMost(self.bound),
            )?;
            self.representatives
                .push(classes.iter().map(|class| class[0]).collect());
        }
        Ok(self.representatives[level].clone())
    }

    fn extend(&mut self) -> Result<()> {
        let level = self.levels.len();
        let prev = self.levels[level - 1].clone();
        let reps = self.representatives(level - 1)?;
        let c = self.bound;
        // sats[g][member]: satisfaction of the member's level-(l-1) formula in graph g.
        let mut sats: Vec<Vec<SatVector>> = Vec::with_capacity(self.graphs.len());
        for ev in &mut self.evaluators {
            sats.push(prev.iter().map(|f| ev.sat(f)).collect::<Result<_>>()?);
        }
        let mut next = Vec::with_capacity(self.pool.len());
        for &(gi, v) in &self.pool {
            let mut parts = vec![Arc::clone(&prev[self.pool_index[&(gi, v)]])];
            for t in self.templates {
                let n = t.arity();
                let ev = &mut self.evaluators[gi];
                let emb = ev.embeddings(t);
                for f in &emb[v] {
                    let members: Vec<usize> = f.assignment()[1..]
                        .iter()
                        .map(|&w| self.pool_index[&(gi, w)])
                        .collect();
                    let args: Vec<_> = members.iter().map(|&m| Arc::clone(&prev[m])).collect();
                    let arg_sats: Vec<_> = members.iter().map(|&m| Arc::clone(&sats[gi][m])).collect();
                    let k = ev.count_matching(t, v, &arg_sats).min(c);
                    parts.push(self.factory.diamond(t, k.max(1), &args));
                }
                let tuples = reps.len().checked_pow(n as u32).unwrap_or(usize::MAX);
                if tuples > MAX_REPRESENTATIVE_TUPLES {
                    return Err(Error::ResourceGuard(format!(
                        "{tuples} representative tuples for template `{}` exceed the limit of {MAX_REPRESENTATIVE_TUPLES}",
                        t.name()
                    )));
                }
                for tuple in representative_tuples(&reps, n) {
                    let arg_sats: Vec<_> = tuple.iter().map(|&m| Arc::clone(&sats[gi][m])).collect();
                    let s = ev.count_matching(t, v, &arg_sats);
                    if s + 1 <= c {
                        let args: Vec<_> = tuple.iter().map(|&m| Arc::clone(&prev[m])).collect();
                        let d = self.factory.diamond(t, s + 1, &args);
                        parts.push(self.factory.not(&d));
                    }
                }
            }
            next.push(self.factory.conjunction(parts));
        }
        self.levels.push(next);
        Ok(())
    }

    /// Disjunction of the characteristic formulae of the classes that make up
    /// `target`; `p₀ ∧ ¬p₀` when `target` is empty.
    pub fn class_formula(&mut self, corpus: &[PointedGraph], target: &[PointedGraph], level: usize) -> Result<Formula> {
        let classes = bisim_classes(corpus, self.templates, level, Bound::AtMost(self.bound))?;
        let in_target: Vec<bool> = corpus
            .iter()
            .map(|pg| target.iter().any(|t| t.same_as(pg)))
            .collect();
        if target
            .iter()
            .any(|t| !corpus.iter().any(|pg| pg.same_as(t)))
        {
            return Err(Error::TargetNotClassClosed);
        }
        let mut disjuncts = Vec::new();
        for class in &classes {
            let inside = class.iter().filter(|&&i| in_target[i]).count();
            if inside != 0 && inside != class.len() {
                return Err(Error::TargetNotClassClosed);
            }
            if inside != 0 {
                let m = self.member_of(&corpus[class[0]])?;
                disjuncts.push(self.shared_formula(m, level)?);
            }
        }
        Ok(unwrap_arc(self.factory.disjunction(disjuncts)))
    }
}

fn representative_tuples(reps: &[usize], n: usize) -> Box<dyn Iterator<Item = Vec<usize>> + '_> {
    if n == 0 {
        Box::new(std::iter::once(Vec::new()))
    } else {
        Box::new(
            (0..n)
                .map(|_| reps.iter().copied())
                .multi_cartesian_product(),
        )
    }
}

/// `χ^{l,c}_{(G,v)}` with class representatives drawn from the corpus.
pub fn char_formula_bounded(
    subject: &PointedGraph,
    level: usize,
    bound: usize,
    templates: &[Arc<Template>],
    corpus: &[PointedGraph],
) -> Result<Formula> {
    let mut builder = BoundedCharacteristic::new(corpus, templates, bound)?;
    let idx = corpus
        .iter()
        .position(|pg| pg.same_as(subject))
        .ok_or(Error::SubjectNotInCorpus)?;
    builder.formula(&corpus[idx], level)
}

/// A formula true exactly on the corpus members of `target`, which must be a
/// union of `(l, c)` bisimulation classes of the corpus.
pub fn class_defining_formula(
    target: &[PointedGraph],
    corpus: &[PointedGraph],
    level: usize,
    bound: usize,
    templates: &[Arc<Template>],
) -> Result<Formula> {
    BoundedCharacteristic::new(corpus, templates, bound)?.class_formula(corpus, target, level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bisim::bisimilar_via_twl;
    use crate::generate::cycle;
    use crate::logic::eval::eval;
    use crate::template::{builtin_registry, PATH, T1, TRIANGLE};

    fn templates(names: &[&str]) -> Vec<Arc<Template>> {
        builtin_registry().select(names).unwrap()
    }

    fn cycles() -> Vec<PointedGraph> {
        vec![
            PointedGraph::new(Arc::new(cycle(3, 1)), 0).unwrap(),
            PointedGraph::new(Arc::new(cycle(6, 1)), 0).unwrap(),
        ]
    }

    #[test]
    fn level_zero_is_the_literal_conjunction() {
        let g = LabelledGraph::new(vec![vec![1.0, 0.0]], []).unwrap();
        let f = char_formula_unbounded(&g, 0, 0, &templates(&[T1])).unwrap();
        assert_eq!(f, Formula::and(Formula::prop(0), Formula::not(Formula::prop(1))));
        let props = vec!["p".to_string(), "q".to_string()];
        assert_eq!(f.display(&props).to_string(), "p & !q");
    }

    #[test]
    fn unbounded_level_one_on_three_cycle() {
        let ts = templates(&[T1]);
        let g = cycle(3, 1);
        let f = char_formula_unbounded(&g, 0, 1, &ts).unwrap();
        let props = vec!["p".to_string()];
        let text = f.display(&props).to_string();
        assert!(text.contains("<T1>=1>(!p)"), "{text}");
        assert!(text.contains("!<T1>=2>(!(p & !p))"), "{text}");
        assert!(eval(&f, &g, 0).unwrap());
    }

    #[test]
    fn unbounded_formulae_satisfy_themselves() {
        let ts = templates(&[TRIANGLE, PATH]);
        let g = cycle(6, 1);
        let mut chars = UnboundedCharacteristic::new(&g, &ts).unwrap();
        for l in 0..=3 {
            let f = chars.formula(2, l).unwrap();
            assert!(eval(&f, &g, 2).unwrap());
            assert_eq!(f.modal_depth(), l);
        }
    }

    #[test]
    fn bounded_formula_separates_cycles() {
        let corpus = cycles();
        let ts = templates(&[TRIANGLE, PATH]);
        let f = char_formula_bounded(&corpus[0], 1, 1, &ts, &corpus).unwrap();
        assert!(eval(&f, &corpus[0].graph, 0).unwrap());
        assert!(!eval(&f, &corpus[1].graph, 0).unwrap());
        assert_eq!(f.modal_depth(), 1);
        assert!(f.counting_bound() <= 1);
    }

    #[test]
    fn bounded_matches_twl_within_the_pool() {
        let corpus = cycles();
        let ts = templates(&[TRIANGLE, PATH, T1]);
        for c in 1..=2 {
            let mut b = BoundedCharacteristic::new(&corpus, &ts, c).unwrap();
            for l in 0..=2 {
                for s in &corpus {
                    let f = b.formula(s, l).unwrap();
                    assert_eq!(f.modal_depth(), l);
                    for o in &corpus {
                        let expected =
                            bisimilar_via_twl(&s.graph, s.point, &o.graph, o.point, &ts, l, Bound::AtMost(c)).unwrap();
                        assert_eq!(eval(&f, &o.graph, o.point).unwrap(), expected);
                    }
                }
            }
        }
    }

    #[test]
    fn subject_must_be_in_corpus() {
        let corpus = cycles();
        let outsider = PointedGraph::new(Arc::new(cycle(4, 1)), 0).unwrap();
        assert!(matches!(
            char_formula_bounded(&outsider, 1, 1, &templates(&[T1]), &corpus),
            Err(Error::SubjectNotInCorpus)
        ));
    }

    #[test]
    fn class_formulae() {
        let corpus = cycles();
        let ts = templates(&[TRIANGLE, PATH]);
        let all = class_defining_formula(&corpus, &corpus, 1, 1, &ts).unwrap();
        assert!(eval(&all, &corpus[0].graph, 0).unwrap());
        assert!(eval(&all, &corpus[1].graph, 0).unwrap());

        let only_c3 = class_defining_formula(&corpus[..1], &corpus, 1, 1, &ts).unwrap();
        assert!(eval(&only_c3, &corpus[0].graph, 0).unwrap());
        assert!(!eval(&only_c3, &corpus[1].graph, 0).unwrap());

        let none = class_defining_formula(&[], &corpus, 1, 1, &ts).unwrap();
        assert_eq!(none, Formula::falsity(0));

        // At level 0 both cycles share a class, so one alone is not closed.
        assert!(matches!(
            class_defining_formula(&corpus[..1], &corpus, 0, 1, &ts),
            Err(Error::TargetNotClassClosed)
        ));
    }
}
