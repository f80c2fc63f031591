use std::collections::HashMap;
use std::sync::Arc;

use crate::embedding::{embeddings_per_node, Embedding};
use crate::error::{Error, Result};
use crate::gnn::model::GnnModel;
use crate::graph::LabelledGraph;
use crate::template::Template;

/// Features after every layer and the final node classification.
#[derive(Debug, Clone, PartialEq)]
pub struct GnnOutput {
    /// `features[l][v]` is the feature vector of `v` after layer `l`; entry 0
    /// holds the initial features.
    pub features: Vec<Vec<Vec<f64>>>,
    pub classes: Vec<bool>,
}

impl GnnOutput {
    pub fn last(&self) -> &[Vec<f64>] {
        self.features.last().expect("initial features are always present")
    }
}

/// Initial feature vectors of `g` under the model's input map.
pub fn initial_features(model: &GnnModel, g: &LabelledGraph) -> Result<Vec<Vec<f64>>> {
    if g.dim() != model.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim(),
            found: g.dim(),
        });
    }
    Ok((0..g.node_count())
        .map(|v| {
            let mut x = vec![0.0; model.dimension];
            for (i, target) in model.input_map.iter().enumerate() {
                if let Some(k) = target {
                    x[*k] = g.label(v)[i];
                }
            }
            x
        })
        .collect())
}

/// Runs every layer of `model` on `g`.
pub fn run_gnn(model: &GnnModel, g: &LabelledGraph) -> Result<GnnOutput> {
    model.validate()?;
    let mut features = vec![initial_features(model, g)?];
    let mut cache: HashMap<Arc<Template>, Vec<Vec<Embedding>>> = HashMap::new();
    let d = model.dimension;
    for layer in &model.layers {
        let prev = features.last().expect("initial features exist");
        for slot in &layer.slots {
            cache
                .entry(Arc::clone(&slot.template))
                .or_insert_with(|| embeddings_per_node(&slot.template, g));
        }
        let next = (0..g.node_count())
            .map(|v| {
                let mut z = Vec::new();
                for slot in &layer.slots {
                    let values = cache[&slot.template][v]
                        .iter()
                        .map(|f| slot.template_agg.apply(prev, f.assignment()))
                        .collect();
                    z.extend(slot.outer_agg.reduce(values, slot.template_agg.output_dim(d)));
                }
                let mut out = layer.bias.clone();
                for (x, row) in prev[v].iter().zip(&layer.combine) {
                    for (o, w) in out.iter_mut().zip(row) {
                        *o += x * w;
                    }
                }
                for (x, row) in z.iter().zip(&layer.aggregate) {
                    for (o, w) in out.iter_mut().zip(row) {
                        *o += x * w;
                    }
                }
                out.into_iter().map(|y| layer.activation.apply(y)).collect()
            })
            .collect();
        features.push(next);
    }
    let last = features.last().expect("initial features exist");
    let classes = last
        .iter()
        .map(|x| x[model.cls.component] >= model.cls.threshold)
        .collect();
    Ok(GnnOutput { features, classes })
}
