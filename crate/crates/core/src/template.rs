//! Templates: rooted patterns with mandatory edges (`E⁺`) and mandatory
//! non-edges (`E⁻`) on the vertex set `0..size`, root `0`.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Edge = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Template {
    name: String,
    size: usize,
    pos: BTreeSet<Edge>,
    neg: BTreeSet<Edge>,
}

/// A broken template invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Empty,
    OverlappingEdge(Edge),
    VertexOutOfRange { edge: Edge, size: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "template has no root vertex"),
            Violation::OverlappingEdge((u, v)) => write!(f, "overlapping edge ({u},{v})"),
            Violation::VertexOutOfRange { edge: (u, v), size } => {
                write!(f, "vertex out of range in edge ({u},{v}) for size {size}")
            }
        }
    }
}

impl Template {
    /// Builds a template and checks its invariants.
    pub fn new<P, N>(name: impl Into<String>, size: usize, pos: P, neg: N) -> Result<Self>
    where
        P: IntoIterator<Item = Edge>,
        N: IntoIterator<Item = Edge>,
    {
        let t = Self::from_parts(name, size, pos, neg);
        match t.validate() {
            Ok(()) => Ok(t),
            Err(violations) => Err(Error::InvalidTemplate {
                name: t.name,
                violations,
            }),
        }
    }

    /// Builds a template without checking invariants; see [`Template::validate`].
    pub fn from_parts<P, N>(name: impl Into<String>, size: usize, pos: P, neg: N) -> Self
    where
        P: IntoIterator<Item = Edge>,
        N: IntoIterator<Item = Edge>,
    {
        Self {
            name: name.into(),
            size,
            pos: pos.into_iter().collect(),
            neg: neg.into_iter().collect(),
        }
    }

    /// Every invariant breach, or `Ok` for a well-formed template.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut violations = Vec::new();
        if self.size == 0 {
            violations.push(Violation::Empty);
        }
        for &(u, v) in self.pos.iter().chain(&self.neg) {
            if u >= self.size || v >= self.size {
                violations.push(Violation::VertexOutOfRange {
                    edge: (u, v),
                    size: self.size,
                });
            }
        }
        for &e in self.pos.intersection(&self.neg) {
            violations.push(Violation::OverlappingEdge(e));
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Number of vertices, `n + 1`.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of non-root vertices, which is also the modal arity.
    pub fn arity(&self) -> usize {
        self.size.saturating_sub(1)
    }

    pub fn pos_edges(&self) -> &BTreeSet<Edge> {
        &self.pos
    }

    pub fn neg_edges(&self) -> &BTreeSet<Edge> {
        &self.neg
    }

    pub fn is_pos(&self, u: usize, v: usize) -> bool {
        self.pos.contains(&(u, v))
    }

    pub fn is_neg(&self, u: usize, v: usize) -> bool {
        self.neg.contains(&(u, v))
    }

    /// Maximum shortest `E⁺`-path distance from the root; `None` when some
    /// vertex is unreachable (infinite radius).
    pub fn radius(&self) -> Option<usize> {
        let mut dist = vec![usize::MAX; self.size];
        let mut queue = VecDeque::new();
        if self.size == 0 {
            return Some(0);
        }
        dist[0] = 0;
        queue.push_back(0);
        while let Some(u) = queue.pop_front() {
            for &(a, b) in &self.pos {
                if a == u && dist[b] == usize::MAX {
                    dist[b] = dist[u] + 1;
                    queue.push_back(b);
                }
            }
        }
        if dist.contains(&usize::MAX) {
            None
        } else {
            dist.into_iter().max()
        }
    }

    /// Whether `perm` (a root-fixing vertex bijection) maps `E⁺` onto `E⁺`
    /// and `E⁻` onto `E⁻` of `other`.
    fn edges_preserved(&self, other: &Template, perm: &[usize]) -> bool {
        self.pos.len() == other.pos.len()
            && self.neg.len() == other.neg.len()
            && self.pos.iter().all(|&(u, v)| other.is_pos(perm[u], perm[v]))
            && self.neg.iter().all(|&(u, v)| other.is_neg(perm[u], perm[v]))
    }

    pub fn to_file(&self) -> TemplateFile {
        TemplateFile {
            name: self.name.clone(),
            size: self.size,
            pos_edges: self.pos.iter().map(|&(u, v)| [u, v]).collect(),
            neg_edges: self.neg.iter().map(|&(u, v)| [u, v]).collect(),
        }
    }
}

/// `radius` as a free function.
pub fn template_radius(t: &Template) -> Option<usize> {
    t.radius()
}

/// A template together with a label per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelledTemplate {
    pub template: Template,
    pub labels: Vec<Vec<f64>>,
}

impl LabelledTemplate {
    pub fn new(template: Template, labels: Vec<Vec<f64>>) -> Result<Self> {
        if labels.len() != template.size() {
            return Err(Error::InvalidConfig(format!(
                "template `{}` has {} vertices but {} labels were given",
                template.name(),
                template.size(),
                labels.len()
            )));
        }
        Ok(Self { template, labels })
    }

    /// All vertices carry the empty label.
    pub fn unlabelled(template: Template) -> Self {
        let labels = vec![Vec::new(); template.size()];
        Self { template, labels }
    }
}

fn label_eq(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

/// Root-preserving bijections `0..n` onto itself, identity first.
fn root_fixing_bijections(size: usize) -> impl Iterator<Item = Vec<usize>> {
    let rest = size.saturating_sub(1);
    (1..size).permutations(rest).map(move |p| {
        let mut perm = Vec::with_capacity(size);
        if size > 0 {
            perm.push(0);
        }
        perm.extend(p);
        perm
    })
}

fn is_isomorphism(a: &LabelledTemplate, b: &LabelledTemplate, perm: &[usize]) -> bool {
    a.template.edges_preserved(&b.template, perm)
        && (1..a.template.size()).all(|u| label_eq(&a.labels[u], &b.labels[perm[u]]))
}

/// Template isomorphism by exhaustive search over root-fixing bijections.
/// Root labels are not compared.
pub fn template_isomorphic(a: &LabelledTemplate, b: &LabelledTemplate) -> bool {
    a.template.size() == b.template.size()
        && root_fixing_bijections(a.template.size()).any(|perm| is_isomorphism(a, b, &perm))
}

/// All root-fixing automorphisms as vertex maps `perm[u]`; the identity is
/// always first.
pub fn template_automorphisms(t: &LabelledTemplate) -> Vec<Vec<usize>> {
    root_fixing_bijections(t.template.size())
        .filter(|perm| is_isomorphism(t, t, perm))
        .collect()
}

/// A named collection of templates plus an optional proposition list.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    templates: Vec<Arc<Template>>,
    propositions: Vec<String>,
    aliases: HashMap<String, usize>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, template: Template) -> Result<()> {
        if let Err(violations) = template.validate() {
            return Err(Error::InvalidTemplate {
                name: template.name.clone(),
                violations,
            });
        }
        if self.lookup(template.name()).is_some() {
            return Err(Error::DuplicateTemplate(template.name.clone()));
        }
        self.templates.push(Arc::new(template));
        Ok(())
    }

    /// Extra lookup name for an existing template.
    pub fn add_alias(&mut self, alias: impl Into<String>, target: &str) -> Result<()> {
        let idx = self
            .templates
            .iter()
            .position(|t| t.name() == target)
            .ok_or_else(|| Error::UnknownTemplate(target.to_string()))?;
        self.aliases.insert(alias.into(), idx);
        Ok(())
    }

    pub fn lookup(&self, name: &str) -> Option<&Arc<Template>> {
        self.templates
            .iter()
            .find(|t| t.name() == name)
            .or_else(|| self.aliases.get(name).map(|&i| &self.templates[i]))
    }

    pub fn get(&self, name: &str) -> Result<Arc<Template>> {
        self.lookup(name)
            .cloned()
            .ok_or_else(|| Error::UnknownTemplate(name.to_string()))
    }

    /// Resolves a list of names, rejecting duplicates.
    pub fn select<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<Arc<Template>>> {
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(names.len());
        for name in names {
            let t = self.get(name.as_ref())?;
            if !seen.insert(t.name().to_string()) {
                return Err(Error::InvalidConfig(format!(
                    "template `{}` listed twice",
                    t.name()
                )));
            }
            out.push(t);
        }
        Ok(out)
    }

    pub fn templates(&self) -> &[Arc<Template>] {
        &self.templates
    }

    pub fn propositions(&self) -> &[String] {
        &self.propositions
    }

    pub fn set_propositions(&mut self, props: Vec<String>) {
        self.propositions = props;
    }

    /// Registry file: either an array of templates, or an object
    /// `{"propositions": [...], "templates": [...]}`.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: RegistryFile = serde_json::from_str(text)?;
        let (props, templates) = match file {
            RegistryFile::List(ts) => (Vec::new(), ts),
            RegistryFile::Object {
                propositions,
                templates,
            } => (propositions, templates),
        };
        let mut reg = Self::new();
        for t in templates {
            reg.insert(t.into_template()?)?;
        }
        reg.propositions = props;
        Ok(reg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        let templates = self.templates.iter().map(|t| t.to_file()).collect();
        let file = if self.propositions.is_empty() {
            RegistryFile::List(templates)
        } else {
            RegistryFile::Object {
                propositions: self.propositions.clone(),
                templates,
            }
        };
        serde_json::to_string_pretty(&file).expect("registry serialization cannot fail")
    }
}

/// On-disk template: root is vertex 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateFile {
    pub name: String,
    pub size: usize,
    #[serde(default)]
    pub pos_edges: Vec<[usize; 2]>,
    #[serde(default)]
    pub neg_edges: Vec<[usize; 2]>,
}

impl TemplateFile {
    pub fn into_template(self) -> Result<Template> {
        for (kind, edges) in [("pos_edges", &self.pos_edges), ("neg_edges", &self.neg_edges)] {
            let unique: BTreeSet<_> = edges.iter().collect();
            if unique.len() != edges.len() {
                return Err(Error::InvalidConfig(format!(
                    "template `{}` lists a duplicate edge in {kind}",
                    self.name
                )));
            }
        }
        Template::new(
            self.name,
            self.size,
            self.pos_edges.into_iter().map(|[u, v]| (u, v)),
            self.neg_edges.into_iter().map(|[u, v]| (u, v)),
        )
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RegistryFile {
    List(Vec<TemplateFile>),
    Object {
        #[serde(default)]
        propositions: Vec<String>,
        templates: Vec<TemplateFile>,
    },
}

pub const T1: &str = "T1";
pub const T2: &str = "T2";
pub const TRIANGLE: &str = "T△";
pub const PATH: &str = "Tp";

/// The edge template `T1`, the non-edge template `T2`, the directed triangle
/// `T△` (also reachable as `Ttri`) and the open path `Tp` whose closing edge
/// is forbidden.
pub fn builtin_registry() -> Registry {
    let mut reg = Registry::new();
    let builtins = [
        Template::new(T1, 2, [(0, 1)], []),
        Template::new(T2, 2, [], [(0, 1)]),
        Template::new(TRIANGLE, 3, [(0, 1), (1, 2), (2, 0)], []),
        Template::new(PATH, 3, [(0, 1), (1, 2)], [(2, 0)]),
    ];
    for t in builtins {
        reg.insert(t.expect("builtin templates are valid"))
            .expect("builtin names are unique");
    }
    reg.add_alias("Ttri", TRIANGLE).expect("alias target exists");
    reg
}

/// Largest vertex count accepted by [`generate_radius_k_templates`].
pub const MAX_GENERATED_NODES: usize = 5;

/// All pairwise non-isomorphic complete templates (every ordered pair of
/// distinct vertices is in exactly one of `E⁺`, `E⁻`; no self-loops) with at
/// most `max_nodes` vertices and radius exactly `k`.
pub fn generate_radius_k_templates(k: usize, max_nodes: usize) -> Result<Vec<Template>> {
    if k == 0 || max_nodes == 0 {
        return Err(Error::InvalidConfig(
            "radius and node bound must both be at least 1".into(),
        ));
    }
    if max_nodes > MAX_GENERATED_NODES {
        return Err(Error::ResourceGuard(format!(
            "template generation is limited to {MAX_GENERATED_NODES} vertices, got {max_nodes}"
        )));
    }
    let mut out = Vec::new();
    for size in 2..=max_nodes {
        let pairs: Vec<Edge> = (0..size)
            .flat_map(|u| (0..size).filter(move |&v| v != u).map(move |v| (u, v)))
            .collect();
        let pair_index: HashMap<Edge, usize> =
            pairs.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        // For each root-fixing bijection, where pair `i` lands.
        let moves: Vec<Vec<usize>> = root_fixing_bijections(size)
            .map(|perm| {
                pairs
                    .iter()
                    .map(|&(u, v)| pair_index[&(perm[u], perm[v])])
                    .collect()
            })
            .collect();
        let mut seen = HashSet::new();
        for mask in 0u64..(1u64 << pairs.len()) {
            let canonical = moves
                .iter()
                .map(|to| {
                    (0..pairs.len())
                        .filter(|i| mask >> i & 1 == 1)
                        .fold(0u64, |acc, i| acc | 1 << to[i])
                })
                .min()
                .expect("identity is always present");
            if canonical != mask || !seen.insert(canonical) {
                continue;
            }
            let (pos, neg): (Vec<_>, Vec<_>) = pairs
                .iter()
                .enumerate()
                .partition(|(i, _)| mask >> i & 1 == 1);
            let t = Template::from_parts(
                format!("R{k}_{size}_{mask}"),
                size,
                pos.into_iter().map(|(_, &e)| e),
                neg.into_iter().map(|(_, &e)| e),
            );
            if t.radius() == Some(k) {
                out.push(t);
            }
        }
    }
    Ok(out)
}
