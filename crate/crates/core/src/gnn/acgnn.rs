//! Aggregate-combine GNNs and their template-GNN interpretation.
//!
//! An AC-GNN layer computes `act(x C + agg{x_u : u ∈ N(v)} A + b)` over
//! out-neighbours. AC+ adds a second aggregate over non-neighbours
//! (`u ≠ v`, no edge `v → u`). The adapters turn these into template GNNs
//! with one `T1` slot (plus a `T2` slot for AC+) projecting vertex 1. The
//! `forward` methods are written directly over adjacency lists and serve as
//! the reference the adapters are checked against.

use crate::error::Result;
use crate::gnn::model::{Activation, Classifier, GnnModel, Layer, OuterAggregator, Slot, TemplateAggregator};
use crate::graph::LabelledGraph;
use crate::template::{builtin_registry, T1, T2};

#[derive(Debug, Clone)]
pub struct AcLayer {
    pub combine: Vec<Vec<f64>>,
    pub aggregate: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    /// `sum`, `mean`, `max` or `bounded_sum:<c>`.
    pub aggregator: String,
    pub activation: Activation,
}

#[derive(Debug, Clone)]
pub struct AcGnn {
    pub dimension: usize,
    pub layers: Vec<AcLayer>,
    pub cls: Classifier,
}

#[derive(Debug, Clone)]
pub struct AcPlusLayer {
    pub combine: Vec<Vec<f64>>,
    pub neighbours: Vec<Vec<f64>>,
    pub non_neighbours: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub neighbour_aggregator: String,
    pub non_neighbour_aggregator: String,
    pub activation: Activation,
}

#[derive(Debug, Clone)]
pub struct AcPlusGnn {
    pub dimension: usize,
    pub layers: Vec<AcPlusLayer>,
    pub cls: Classifier,
}

fn project_slot(template: &str, aggregator: &str) -> Result<Slot> {
    Ok(Slot {
        template: builtin_registry().get(template)?,
        template_agg: TemplateAggregator::Project {
            vertex: 1,
            feature: None,
        },
        outer_agg: OuterAggregator::from_name(aggregator)?,
    })
}

/// The AC-GNN as a unary template GNN over `T1`.
pub fn ac_gnn_adapter(ac: &AcGnn) -> Result<GnnModel> {
    let layers = ac
        .layers
        .iter()
        .map(|l| {
            Ok(Layer {
                slots: vec![project_slot(T1, &l.aggregator)?],
                combine: l.combine.clone(),
                aggregate: l.aggregate.clone(),
                bias: l.bias.clone(),
                activation: l.activation,
            })
        })
        .collect::<Result<_>>()?;
    let model = GnnModel {
        dimension: ac.dimension,
        input_map: (0..ac.dimension).map(Some).collect(),
        layers,
        cls: ac.cls,
    };
    model.validate()?;
    Ok(model)
}

/// The AC+-GNN as a template GNN with a `T1` and a `T2` slot.
pub fn ac_plus_adapter(ac: &AcPlusGnn) -> Result<GnnModel> {
    let layers = ac
        .layers
        .iter()
        .map(|l| {
            Ok(Layer {
                slots: vec![
                    project_slot(T1, &l.neighbour_aggregator)?,
                    project_slot(T2, &l.non_neighbour_aggregator)?,
                ],
                combine: l.combine.clone(),
                aggregate: l.neighbours.iter().chain(&l.non_neighbours).cloned().collect(),
                bias: l.bias.clone(),
                activation: l.activation,
            })
        })
        .collect::<Result<_>>()?;
    let model = GnnModel {
        dimension: ac.dimension,
        input_map: (0..ac.dimension).map(Some).collect(),
        layers,
        cls: ac.cls,
    };
    model.validate()?;
    Ok(model)
}

/// Aggregates `xs[u]` over `nodes` in the given order.
fn direct_aggregate(kind: &str, xs: &[Vec<f64>], nodes: &[usize], dim: usize) -> Result<Vec<f64>> {
    let kind = OuterAggregator::from_name(kind)?;
    let mut out = vec![0.0; dim];
    if nodes.is_empty() {
        return Ok(out);
    }
    match kind {
        OuterAggregator::Sum | OuterAggregator::Mean => {
            for &u in nodes {
                for (o, x) in out.iter_mut().zip(&xs[u]) {
                    *o += x;
                }
            }
            if kind == OuterAggregator::Mean {
                out.iter_mut().for_each(|o| *o /= nodes.len() as f64);
            }
        }
        OuterAggregator::Max => {
            out = xs[nodes[0]].clone();
            for &u in &nodes[1..] {
                for (o, x) in out.iter_mut().zip(&xs[u]) {
                    *o = o.max(*x);
                }
            }
        }
        OuterAggregator::BoundedSum { c } => {
            for (i, &u) in nodes.iter().enumerate() {
                let seen = nodes[..i].iter().filter(|&&w| xs[w] == xs[u]).count();
                if seen < c {
                    for (o, x) in out.iter_mut().zip(&xs[u]) {
                        *o += x;
                    }
                }
            }
        }
    }
    Ok(out)
}

fn combine(
    x: &[f64],
    parts: &[(&[f64], &[Vec<f64>])],
    c: &[Vec<f64>],
    b: &[f64],
    act: Activation,
) -> Vec<f64> {
    (0..b.len())
        .map(|k| {
            let mut y = b[k];
            for (i, xi) in x.iter().enumerate() {
                y += xi * c[i][k];
            }
            for (z, m) in parts {
                for (i, zi) in z.iter().enumerate() {
                    y += zi * m[i][k];
                }
            }
            act.apply(y)
        })
        .collect()
}

impl AcGnn {
    /// Features after every layer, computed over adjacency lists.
    pub fn forward(&self, g: &LabelledGraph) -> Result<Vec<Vec<Vec<f64>>>> {
        let mut out = vec![g.labels().to_vec()];
        for l in &self.layers {
            let prev = out.last().expect("initial features");
            let next = (0..g.node_count())
                .map(|v| {
                    let z = direct_aggregate(&l.aggregator, prev, g.out_neighbors(v), self.dimension)?;
                    Ok(combine(&prev[v], &[(&z, &l.aggregate)], &l.combine, &l.bias, l.activation))
                })
                .collect::<Result<_>>()?;
            out.push(next);
        }
        Ok(out)
    }
}

impl AcPlusGnn {
    pub fn forward(&self, g: &LabelledGraph) -> Result<Vec<Vec<Vec<f64>>>> {
        let mut out = vec![g.labels().to_vec()];
        for l in &self.layers {
            let prev = out.last().expect("initial features");
            let next = (0..g.node_count())
                .map(|v| {
                    let others: Vec<usize> = (0..g.node_count())
                        .filter(|&u| u != v && !g.has_edge(v, u))
                        .collect();
                    let z1 = direct_aggregate(&l.neighbour_aggregator, prev, g.out_neighbors(v), self.dimension)?;
                    let z2 = direct_aggregate(&l.non_neighbour_aggregator, prev, &others, self.dimension)?;
                    Ok(combine(
                        &prev[v],
                        &[(&z1, &l.neighbours), (&z2, &l.non_neighbours)],
                        &l.combine,
                        &l.bias,
                        l.activation,
                    ))
                })
                .collect::<Result<_>>()?;
            out.push(next);
        }
        Ok(out)
    }
}
