//! Labelled directed graphs and their JSON file format.
//!
//! Nodes are dense `0..n` indices. Files may use arbitrary string ids; they
//! are mapped to indices in file order on load and kept as node names.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite labelled directed graph `G = (V, E, λ)` with real labels of a
/// uniform dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelledGraph {
    names: Vec<String>,
    labels: Vec<Vec<f64>>,
    dim: usize,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
}

impl LabelledGraph {
    /// Builds a graph with node names `"0"`, `"1"`, ...
    pub fn new<I>(labels: Vec<Vec<f64>>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let names = (0..labels.len()).map(|i| i.to_string()).collect();
        Self::with_names(names, labels, edges)
    }

    /// Unlabelled convenience constructor: every node gets the label `[0.0]`.
    pub fn unlabelled<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::new(vec![vec![0.0]; n], edges)
    }

    /// The graph with no nodes and label dimension `dim`.
    pub fn empty(dim: usize) -> Self {
        Self {
            names: Vec::new(),
            labels: Vec::new(),
            dim,
            out: Vec::new(),
            inc: Vec::new(),
        }
    }

    pub fn with_names<I>(names: Vec<String>, mut labels: Vec<Vec<f64>>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let n = labels.len();
        if names.len() != n {
            return Err(Error::InvalidGraph(format!(
                "{} names for {} nodes",
                names.len(),
                n
            )));
        }
        let dim = labels.first().map_or(0, Vec::len);
        for (v, label) in labels.iter_mut().enumerate() {
            if label.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: label.len(),
                });
            }
            for x in label.iter_mut() {
                if !x.is_finite() {
                    return Err(Error::InvalidGraph(format!("non-finite label at node {v}")));
                }
                // -0.0 and 0.0 must intern to the same colour.
                if *x == 0.0 {
                    *x = 0.0;
                }
            }
        }
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        let mut seen = BTreeSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u},{v}) references a node outside 0..{n}"
                )));
            }
            if !seen.insert((u, v)) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({u},{v})")));
            }
            out[u].push(v);
            inc[v].push(u);
        }
        out.iter_mut().for_each(|a| a.sort_unstable());
        inc.iter_mut().for_each(|a| a.sort_unstable());
        Ok(Self {
            names,
            labels,
            dim,
            out,
            inc,
        })
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self, v: usize) -> &[f64] {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[Vec<f64>] {
        &self.labels
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn node_by_name(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Sorted out-neighbours.
    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    /// Sorted in-neighbours.
    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.inc[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.out[u].binary_search(&v).is_ok()
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v)))
    }

    pub fn check_node(&self, v: usize) -> Result<()> {
        if v < self.node_count() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                node: v,
                count: self.node_count(),
            })
        }
    }

    /// True when every label component is exactly 0 or 1.
    pub fn is_boolean(&self) -> bool {
        self.first_non_boolean().is_none()
    }

    pub(crate) fn first_non_boolean(&self) -> Option<usize> {
        self.labels
            .iter()
            .position(|l| l.iter().any(|&x| x != 0.0 && x != 1.0))
    }

    /// Isomorphic copy where old node `v` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.node_count();
        let mut check = perm.to_vec();
        check.sort_unstable();
        if check != (0..n).collect::<Vec<_>>() {
            return Err(Error::InvalidGraph("not a permutation of the node set".into()));
        }
        let mut names = vec![String::new(); n];
        let mut labels = vec![Vec::new(); n];
        for v in 0..n {
            names[perm[v]] = self.names[v].clone();
            labels[perm[v]] = self.labels[v].clone();
        }
        Self::with_names(names, labels, self.edges().map(|(u, v)| (perm[u], perm[v])))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text)?;
        file.into_graph()
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            nodes: (0..self.node_count())
                .map(|v| NodeEntry {
                    id: self.names[v].clone(),
                    label: self.labels[v].clone(),
                })
                .collect(),
            edges: self
                .edges()
                .map(|(u, v)| [self.names[u].clone(), self.names[v].clone()])
                .collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("graph serialization cannot fail")
    }
}

/// On-disk graph: `{"nodes": [{"id", "label"}], "edges": [[src, dst]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub nodes: Vec<NodeEntry>,
    pub edges: Vec<[String; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    pub id: String,
    pub label: Vec<f64>,
}

impl GraphFile {
    pub fn into_graph(self) -> Result<LabelledGraph> {
        let mut index = HashMap::with_capacity(self.nodes.len());
        for (i, node) in self.nodes.iter().enumerate() {
            if index.insert(node.id.clone(), i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate node id `{}`", node.id)));
            }
        }
        let lookup = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| Error::InvalidGraph(format!("edge references unknown node `{id}`")))
        };
        let edges = self
            .edges
            .iter()
            .map(|[s, t]| Ok((lookup(s)?, lookup(t)?)))
            .collect::<Result<Vec<_>>>()?;
        let (names, labels) = self.nodes.into_iter().map(|n| (n.id, n.label)).unzip();
        LabelledGraph::with_names(names, labels, edges)
    }
}

/// A graph with a distinguished node.
#[derive(Debug, Clone)]
pub struct PointedGraph {
    pub graph: Arc<LabelledGraph>,
    pub point: usize,
}

impl PointedGraph {
    pub fn new(graph: Arc<LabelledGraph>, point: usize) -> Result<Self> {
        graph.check_node(point)?;
        Ok(Self { graph, point })
    }

    /// Every node of `graph` as a pointed graph, sharing the graph.
    pub fn all_points(graph: Arc<LabelledGraph>) -> Vec<Self> {
        (0..graph.node_count())
            .map(|point| Self {
                graph: Arc::clone(&graph),
                point,
            })
            .collect()
    }

    /// Same point in a structurally equal graph.
    pub fn same_as(&self, other: &Self) -> bool {
        self.point == other.point
            && (Arc::ptr_eq(&self.graph, &other.graph) || *self.graph == *other.graph)
    }
}
