//! Injective template embeddings into pointed graphs.
//!
//! Template vertices are assigned in ascending order with the root pinned to
//! the point. A candidate for vertex `i` is checked against every `E⁺`/`E⁻`
//! constraint that involves `i` and an already-assigned vertex (or `i`
//! itself, for self-loops). Candidates are tried in ascending node order, so
//! the output is lexicographic in the assignment.

use crate::graph::LabelledGraph;
use crate::template::Template;

/// An injective map from template vertices to graph nodes; `assignment[0]`
/// is the point.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Embedding(pub Vec<usize>);

impl Embedding {
    pub fn assignment(&self) -> &[usize] {
        &self.0
    }

    pub fn image(&self, u: usize) -> usize {
        self.0[u]
    }
}

/// Constraint between template vertex `i` and an earlier vertex `u`.
#[derive(Debug, Clone, Copy)]
struct Constraint {
    other: usize,
    // (other, i) in E⁺ / E⁻
    into_pos: bool,
    into_neg: bool,
    // (i, other) in E⁺ / E⁻
    from_pos: bool,
    from_neg: bool,
}

/// Per-template constraint table shared by enumeration and counting.
struct Plan<'t> {
    template: &'t Template,
    earlier: Vec<Vec<Constraint>>,
}

impl<'t> Plan<'t> {
    fn new(template: &'t Template) -> Self {
        let n = template.size();
        let earlier = (0..n)
            .map(|i| {
                (0..i)
                    .filter_map(|u| {
                        let c = Constraint {
                            other: u,
                            into_pos: template.is_pos(u, i),
                            into_neg: template.is_neg(u, i),
                            from_pos: template.is_pos(i, u),
                            from_neg: template.is_neg(i, u),
                        };
                        (c.into_pos || c.into_neg || c.from_pos || c.from_neg).then_some(c)
                    })
                    .collect()
            })
            .collect();
        Self { template, earlier }
    }

    fn self_loop_ok(&self, g: &LabelledGraph, i: usize, x: usize) -> bool {
        let t = self.template;
        !(t.is_pos(i, i) && !g.has_edge(x, x) || t.is_neg(i, i) && g.has_edge(x, x))
    }

    fn fits(&self, g: &LabelledGraph, assignment: &[usize], i: usize, x: usize) -> bool {
        self.self_loop_ok(g, i, x)
            && self.earlier[i].iter().all(|c| {
                let y = assignment[c.other];
                let yx = g.has_edge(y, x);
                let xy = g.has_edge(x, y);
                !(c.into_pos && !yx || c.into_neg && yx || c.from_pos && !xy || c.from_neg && xy)
            })
    }

    /// Smallest candidate pool for vertex `i`: a neighbour list when an
    /// earlier vertex is tied to `i` by an `E⁺` edge, otherwise every node.
    fn candidates<'g>(&self, g: &'g LabelledGraph, assignment: &[usize], i: usize) -> Candidates<'g> {
        let mut best: Option<&'g [usize]> = None;
        for c in &self.earlier[i] {
            let y = assignment[c.other];
            for list in [
                c.into_pos.then(|| g.out_neighbors(y)),
                c.from_pos.then(|| g.in_neighbors(y)),
            ]
            .into_iter()
            .flatten()
            {
                if best.map_or(true, |b| list.len() < b.len()) {
                    best = Some(list);
                }
            }
        }
        match best {
            Some(list) => Candidates::List(list.iter()),
            None => Candidates::All(0..g.node_count()),
        }
    }

    fn search<F: FnMut(&[usize])>(
        &self,
        g: &LabelledGraph,
        assignment: &mut Vec<usize>,
        used: &mut [bool],
        visit: &mut F,
    ) {
        let i = assignment.len();
        if i == self.template.size() {
            visit(assignment);
            return;
        }
        for x in self.candidates(g, assignment, i) {
            if used[x] || !self.fits(g, assignment, i, x) {
                continue;
            }
            used[x] = true;
            assignment.push(x);
            self.search(g, assignment, used, visit);
            assignment.pop();
            used[x] = false;
        }
    }

    fn run<F: FnMut(&[usize])>(&self, g: &LabelledGraph, v: usize, mut visit: F) {
        let n = self.template.size();
        if n == 0 || n > g.node_count() || !self.self_loop_ok(g, 0, v) {
            return;
        }
        let mut used = vec![false; g.node_count()];
        used[v] = true;
        let mut assignment = Vec::with_capacity(n);
        assignment.push(v);
        self.search(g, &mut assignment, &mut used, &mut visit);
    }
}

enum Candidates<'g> {
    List(std::slice::Iter<'g, usize>),
    All(std::ops::Range<usize>),
}

impl Iterator for Candidates<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        match self {
            Candidates::List(it) => it.next().copied(),
            Candidates::All(r) => r.next(),
        }
    }
}

/// `emb(T, (G, v))` in lexicographic order of assignments.
///
/// # Panics
/// If `v` is not a node of `g`.
pub fn enumerate_embeddings(t: &Template, g: &LabelledGraph, v: usize) -> Vec<Embedding> {
    assert!(v < g.node_count(), "point {v} out of range");
    let mut out = Vec::new();
    Plan::new(t).run(g, v, |a| out.push(Embedding(a.to_vec())));
    out
}

/// `|emb(T, (G, v))|` without materializing assignments.
///
/// # Panics
/// If `v` is not a node of `g`.
pub fn count_embeddings(t: &Template, g: &LabelledGraph, v: usize) -> usize {
    assert!(v < g.node_count(), "point {v} out of range");
    let mut count = 0;
    Plan::new(t).run(g, v, |_| count += 1);
    count
}

/// Embeddings of `t` at every node of `g`, indexed by node.
pub fn embeddings_per_node(t: &Template, g: &LabelledGraph) -> Vec<Vec<Embedding>> {
    let plan = Plan::new(t);
    (0..g.node_count())
        .map(|v| {
            let mut out = Vec::new();
            plan.run(g, v, |a| out.push(Embedding(a.to_vec())));
            out
        })
        .collect()
}
