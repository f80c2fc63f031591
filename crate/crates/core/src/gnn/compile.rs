//! GML(T) formula to bounded template GNN.
//!
//! Feature component `k` tracks the truth of subformula `k` of the
//! subformula table (children before parents, the formula last). Every layer
//! is the same map `σ(x C + z A + b)` with `σ` the truncated ReLU:
//!
//! | subformula at `k`        | entries                         |
//! |--------------------------|---------------------------------|
//! | proposition              | `C[k][k] = 1`                   |
//! | `¬φ_p`                   | `C[p][k] = -1`, `b[k] = 1`      |
//! | `φ_p ∧ φ_q`              | `C[p][k] += 1`, `C[q][k] += 1`, `b[k] = -1` |
//! | `<T>=j>(…)`, slot `s`    | `A[s][k] = 1`, `b[k] = 1 - j`   |
//!
//! Slot `s` aggregates the modal subformula's template with an AND gate over
//! the argument components and a bounded sum capped at the formula's
//! counting bound, so its value is `min(cb, #satisfying embeddings)`.
//! After `sd(φ)` layers the last component is exactly the truth of `φ`.

use crate::error::{Error, Result};
use crate::gnn::model::{Activation, Classifier, GnnModel, Layer, OuterAggregator, Slot, TemplateAggregator};
use crate::logic::{Formula, Node, SubformulaTable};

/// Compiles `f` for graphs labelled with `propositions` Boolean components.
pub fn compile_formula(f: &Formula, propositions: usize) -> Result<GnnModel> {
    let table = SubformulaTable::build(f);
    if let Some(p) = f.max_prop().filter(|&p| p >= propositions) {
        return Err(Error::PropositionOutOfRange {
            index: p,
            count: propositions,
        });
    }
    let d = table.len();
    let rounds = table.syntactic_depths()[table.root()];
    let cap = f.counting_bound().max(1);

    let mut combine = vec![vec![0.0; d]; d];
    let mut bias = vec![0.0; d];
    let mut slots = Vec::new();
    let mut modal_rows = Vec::new();
    let mut input_map = vec![None; propositions];
    for (k, node) in table.nodes().iter().enumerate() {
        match node {
            Node::Prop(p) => {
                combine[k][k] = 1.0;
                input_map[*p] = Some(k);
            }
            Node::Not(p) => {
                combine[*p][k] = -1.0;
                bias[k] = 1.0;
            }
            Node::And(p, q) => {
                combine[*p][k] += 1.0;
                combine[*q][k] += 1.0;
                bias[k] = -1.0;
            }
            Node::Diamond {
                template,
                threshold,
                args,
            } => {
                slots.push(Slot {
                    template: table.templates()[*template].clone(),
                    template_agg: TemplateAggregator::AndGate {
                        features: args.clone(),
                    },
                    outer_agg: OuterAggregator::BoundedSum { c: cap },
                });
                modal_rows.push(k);
                bias[k] = 1.0 - *threshold as f64;
            }
        }
    }
    let mut aggregate = vec![vec![0.0; d]; slots.len()];
    for (s, &k) in modal_rows.iter().enumerate() {
        aggregate[s][k] = 1.0;
    }
    let layer = Layer {
        slots,
        combine,
        aggregate,
        bias,
        activation: Activation::TruncatedRelu,
    };
    let model = GnnModel {
        dimension: d,
        input_map,
        layers: vec![layer; rounds],
        cls: Classifier {
            component: d - 1,
            threshold: 0.5,
        },
    };
    model.validate()?;
    Ok(model)
}
