use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::template::Template;

/// A GML(T) formula. Children sit behind `Arc`, so large formulae built from
/// shared parts (characteristic formulae) stay DAG-sized in memory.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    /// Index into the proposition list.
    Prop(usize),
    Not(Arc<Formula>),
    And(Arc<Formula>, Arc<Formula>),
    /// `⟨T⟩^{≥threshold}(args…)` with one argument per non-root vertex.
    Diamond {
        template: Arc<Template>,
        threshold: usize,
        args: Vec<Arc<Formula>>,
    },
}

impl Formula {
    pub fn prop(index: usize) -> Self {
        Formula::Prop(index)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(inner: Formula) -> Self {
        Formula::Not(Arc::new(inner))
    }

    pub fn and(left: Formula, right: Formula) -> Self {
        Formula::And(Arc::new(left), Arc::new(right))
    }

    /// `¬(¬a ∧ ¬b)`.
    pub fn or(left: Formula, right: Formula) -> Self {
        Formula::not(Formula::and(Formula::not(left), Formula::not(right)))
    }

    /// `¬(a ∧ ¬b)`.
    pub fn implies(left: Formula, right: Formula) -> Self {
        Formula::not(Formula::and(left, Formula::not(right)))
    }

    pub fn diamond(template: Arc<Template>, threshold: usize, args: Vec<Formula>) -> Result<Self> {
        if threshold == 0 {
            return Err(Error::InvalidConfig("modal threshold must be at least 1".into()));
        }
        if args.len() != template.arity() {
            return Err(Error::InvalidConfig(format!(
                "template `{}` takes {} arguments, got {}",
                template.name(),
                template.arity(),
                args.len()
            )));
        }
        Ok(Formula::Diamond {
            template,
            threshold,
            args: args.into_iter().map(Arc::new).collect(),
        })
    }

    /// `¬(p ∧ ¬p)` for proposition `p`; the grammar has no constant.
    pub fn truth(p: usize) -> Self {
        Formula::not(Formula::falsity(p))
    }

    /// `p ∧ ¬p`.
    pub fn falsity(p: usize) -> Self {
        Formula::and(Formula::prop(p), Formula::not(Formula::prop(p)))
    }

    /// Balanced conjunction; `None` for an empty list.
    pub fn conjunction(parts: Vec<Formula>) -> Option<Self> {
        balanced_and(parts.into_iter().map(Arc::new).collect()).map(unwrap_arc)
    }

    /// Desugared disjunction `¬(¬φ₁ ∧ … ∧ ¬φₙ)`; `None` for an empty list.
    pub fn disjunction(parts: Vec<Formula>) -> Option<Self> {
        Formula::conjunction(parts.into_iter().map(Formula::not).collect()).map(Formula::not)
    }

    /// Modal depth.
    pub fn modal_depth(&self) -> usize {
        root_value(SubformulaTable::build(self).modal_depths())
    }

    /// Depth of the syntax tree where every connective and modality adds one.
    pub fn syntactic_depth(&self) -> usize {
        root_value(SubformulaTable::build(self).syntactic_depths())
    }

    /// Largest threshold occurring in the formula; 0 when modal-free.
    pub fn counting_bound(&self) -> usize {
        SubformulaTable::build(self)
            .nodes()
            .iter()
            .filter_map(|n| match n {
                Node::Diamond { threshold, .. } => Some(*threshold),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Largest proposition index used, if any.
    pub fn max_prop(&self) -> Option<usize> {
        SubformulaTable::build(self)
            .nodes()
            .iter()
            .filter_map(|n| match n {
                Node::Prop(p) => Some(*p),
                _ => None,
            })
            .max()
    }

    /// Printer using the concrete grammar; propositions are looked up in `props`.
    pub fn display<'a>(&'a self, props: &'a [String]) -> FormulaDisplay<'a> {
        FormulaDisplay {
            formula: self,
            props,
        }
    }
}

fn root_value(per_node: Vec<usize>) -> usize {
    *per_node.last().expect("a subformula table is never empty")
}

fn unwrap_arc(f: Arc<Formula>) -> Formula {
    Arc::try_unwrap(f).unwrap_or_else(|shared| (*shared).clone())
}

pub(crate) fn balanced_and(mut parts: Vec<Arc<Formula>>) -> Option<Arc<Formula>> {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(Arc::new(Formula::And(a, b))),
                None => next.push(a),
            }
        }
        parts = next;
    }
    parts.pop()
}

pub struct FormulaDisplay<'a> {
    formula: &'a Formula,
    props: &'a [String],
}

impl FormulaDisplay<'_> {
    fn write(&self, f: &mut fmt::Formatter<'_>, node: &Formula) -> fmt::Result {
        match node {
            Formula::Prop(i) => match self.props.get(*i) {
                Some(name) => f.write_str(name),
                None => write!(f, "p{i}"),
            },
            Formula::Not(inner) => {
                f.write_str("!")?;
                self.write_atom(f, inner)
            }
            Formula::And(a, b) => {
                self.write(f, a)?;
                f.write_str(" & ")?;
                if matches!(**b, Formula::And(..)) {
                    f.write_str("(")?;
                    self.write(f, b)?;
                    f.write_str(")")
                } else {
                    self.write(f, b)
                }
            }
            Formula::Diamond {
                template,
                threshold,
                args,
            } => {
                write!(f, "<{}>={}>(", template.name(), threshold)?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    self.write(f, a)?;
                }
                f.write_str(")")
            }
        }
    }

    fn write_atom(&self, f: &mut fmt::Formatter<'_>, node: &Formula) -> fmt::Result {
        if matches!(node, Formula::And(..)) {
            f.write_str("(")?;
            self.write(f, node)?;
            f.write_str(")")
        } else {
            self.write(f, node)
        }
    }
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, self.formula)
    }
}

/// One distinct subformula, children given as table indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Prop(usize),
    Not(usize),
    And(usize, usize),
    Diamond {
        template: usize,
        threshold: usize,
        args: Vec<usize>,
    },
}

/// The distinct subformulae of a formula, hash-consed, with every child
/// listed before its parents and the formula itself last.
#[derive(Debug, Clone)]
pub struct SubformulaTable {
    nodes: Vec<Node>,
    templates: Vec<Arc<Template>>,
}

impl SubformulaTable {
    pub fn build(root: &Formula) -> Self {
        let mut b = TableBuilder {
            nodes: Vec::new(),
            templates: Vec::new(),
            by_ptr: HashMap::new(),
            by_node: HashMap::new(),
        };
        let root_id = b.visit(root);
        debug_assert_eq!(root_id, b.nodes.len() - 1);
        Self {
            nodes: b.nodes,
            templates: b.templates,
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn templates(&self) -> &[Arc<Template>] {
        &self.templates
    }

    pub fn modal_depths(&self) -> Vec<usize> {
        self.depths(false)
    }

    pub fn syntactic_depths(&self) -> Vec<usize> {
        self.depths(true)
    }

    fn depths(&self, count_connectives: bool) -> Vec<usize> {
        let step = usize::from(count_connectives);
        let mut d: Vec<usize> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match node {
                Node::Prop(_) => 0,
                Node::Not(a) => d[*a] + step,
                Node::And(a, b) => d[*a].max(d[*b]) + step,
                Node::Diamond { args, .. } => 1 + args.iter().map(|&a| d[a]).max().unwrap_or(0),
            };
            d.push(v);
        }
        d
    }
}

struct TableBuilder {
    nodes: Vec<Node>,
    templates: Vec<Arc<Template>>,
    by_ptr: HashMap<*const Formula, usize>,
    by_node: HashMap<Node, usize>,
}

impl TableBuilder {
    fn visit(&mut self, f: &Formula) -> usize {
        let ptr = f as *const Formula;
        if let Some(&id) = self.by_ptr.get(&ptr) {
            return id;
        }
        let node = match f {
            Formula::Prop(p) => Node::Prop(*p),
            Formula::Not(a) => Node::Not(self.visit(a)),
            Formula::And(a, b) => {
                let a = self.visit(a);
                let b = self.visit(b);
                Node::And(a, b)
            }
            Formula::Diamond {
                template,
                threshold,
                args,
            } => {
                let args = args.iter().map(|a| self.visit(a)).collect();
                let template = match self
                    .templates
                    .iter()
                    .position(|t| Arc::ptr_eq(t, template) || **t == **template)
                {
                    Some(i) => i,
                    None => {
                        self.templates.push(Arc::clone(template));
                        self.templates.len() - 1
                    }
                };
                Node::Diamond {
                    template,
                    threshold: *threshold,
                    args,
                }
            }
        };
        let id = match self.by_node.get(&node) {
            Some(&id) => id,
            None => {
                self.nodes.push(node.clone());
                self.by_node.insert(node, self.nodes.len() - 1);
                self.nodes.len() - 1
            }
        };
        self.by_ptr.insert(ptr, id);
        id
    }
}
