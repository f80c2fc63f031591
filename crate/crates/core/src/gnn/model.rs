use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::template::{template_automorphisms, LabelledTemplate, Registry, Template, TemplateFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Identity,
    Relu,
    /// `min(max(0, x), 1)`.
    TruncatedRelu,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Relu => x.max(0.0),
            Activation::TruncatedRelu => x.clamp(0.0, 1.0),
        }
    }
}

/// Maps one labelled template (the features at the images of an embedding)
/// to a vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TemplateAggregator {
    /// Features of one template vertex: the whole vector, or one component.
    Project {
        vertex: usize,
        #[serde(default)]
        feature: Option<usize>,
    },
    /// `σ(Σᵢ x_{f(i), features[i-1]} − n + 1)` over vertices `1..=n`; 1 exactly
    /// when every selected feature is 1 on 0/1 inputs.
    AndGate { features: Vec<usize> },
    /// `act(x W + b)` where `x` concatenates the features of vertices
    /// `0..size` in order.
    Affine {
        weights: Vec<Vec<f64>>,
        bias: Vec<f64>,
        activation: Activation,
    },
}

impl TemplateAggregator {
    pub fn output_dim(&self, dimension: usize) -> usize {
        match self {
            TemplateAggregator::Project { feature: None, .. } => dimension,
            TemplateAggregator::Project { feature: Some(_), .. } => 1,
            TemplateAggregator::AndGate { .. } => 1,
            TemplateAggregator::Affine { bias, .. } => bias.len(),
        }
    }

    /// Applies the aggregator to the embedding `assignment` under `features`.
    pub fn apply(&self, features: &[Vec<f64>], assignment: &[usize]) -> Vec<f64> {
        match self {
            TemplateAggregator::Project { vertex, feature } => {
                let x = &features[assignment[*vertex]];
                match feature {
                    None => x.clone(),
                    Some(k) => vec![x[*k]],
                }
            }
            TemplateAggregator::AndGate { features: picks } => {
                let n = picks.len() as f64;
                let sum: f64 = picks
                    .iter()
                    .enumerate()
                    .map(|(i, &k)| features[assignment[i + 1]][k])
                    .sum();
                vec![Activation::TruncatedRelu.apply(sum - n + 1.0)]
            }
            TemplateAggregator::Affine {
                weights,
                bias,
                activation,
            } => {
                let mut out = bias.clone();
                let input = assignment.iter().flat_map(|&u| features[u].iter());
                for (row, x) in weights.iter().zip(input) {
                    for (o, w) in out.iter_mut().zip(row) {
                        *o += x * w;
                    }
                }
                out.into_iter().map(|y| activation.apply(y)).collect()
            }
        }
    }

    fn validate(&self, t: &Template, dimension: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        match self {
            TemplateAggregator::Project { vertex, feature } => {
                if *vertex >= t.size() {
                    return bad(format!("project vertex {vertex} outside template `{}`", t.name()));
                }
                if feature.is_some_and(|k| k >= dimension) {
                    return bad(format!("project feature {feature:?} outside dimension {dimension}"));
                }
            }
            TemplateAggregator::AndGate { features } => {
                if features.len() != t.arity() {
                    return bad(format!(
                        "and_gate on `{}` needs {} feature indices, got {}",
                        t.name(),
                        t.arity(),
                        features.len()
                    ));
                }
                if let Some(k) = features.iter().find(|&&k| k >= dimension) {
                    return bad(format!("and_gate feature {k} outside dimension {dimension}"));
                }
            }
            TemplateAggregator::Affine { weights, bias, .. } => {
                if weights.len() != t.size() * dimension {
                    return bad(format!(
                        "affine weights on `{}` need {} rows, got {}",
                        t.name(),
                        t.size() * dimension,
                        weights.len()
                    ));
                }
                if weights.iter().any(|r| r.len() != bias.len()) {
                    return bad("affine weight rows must match the bias length".into());
                }
            }
        }
        Ok(())
    }
}

/// Reduces the multiset of template-aggregate vectors at a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OuterAggregator {
    Sum,
    Mean,
    Max,
    /// Sum after capping every multiplicity at `c`.
    BoundedSum { c: usize },
}

impl OuterAggregator {
    /// Parses `sum`, `mean`, `max` or `bounded_sum:<c>`.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "sum" => Ok(OuterAggregator::Sum),
            "mean" => Ok(OuterAggregator::Mean),
            "max" => Ok(OuterAggregator::Max),
            _ => match name.strip_prefix("bounded_sum:").map(str::parse::<usize>) {
                Some(Ok(c)) if c >= 1 => Ok(OuterAggregator::BoundedSum { c }),
                _ => Err(Error::UnsupportedAggregator(name.to_string())),
            },
        }
    }

    /// Reduces `values`, all of length `dim`; the empty multiset gives the
    /// zero vector. Values are reduced in a canonical order (sorted by bit
    /// pattern), so equal multisets give bit-identical results.
    pub fn reduce(self, mut values: Vec<Vec<f64>>, dim: usize) -> Vec<f64> {
        if values.is_empty() {
            return vec![0.0; dim];
        }
        values.sort_by_cached_key(|v| v.iter().map(|x| x.to_bits()).collect::<Vec<u64>>());
        match self {
            OuterAggregator::Sum => sum(values.iter(), dim),
            OuterAggregator::Mean => {
                let n = values.len() as f64;
                sum(values.iter(), dim).into_iter().map(|x| x / n).collect()
            }
            OuterAggregator::Max => {
                let mut out = values[0].clone();
                for v in &values[1..] {
                    for (o, x) in out.iter_mut().zip(v) {
                        *o = o.max(*x);
                    }
                }
                out
            }
            OuterAggregator::BoundedSum { c } => {
                let mut kept = Vec::with_capacity(values.len());
                let mut run = 0;
                for (i, v) in values.iter().enumerate() {
                    run = if i > 0 && same_bits(v, &values[i - 1]) { run + 1 } else { 1 };
                    if run <= c {
                        kept.push(v);
                    }
                }
                sum(kept.into_iter(), dim)
            }
        }
    }
}

fn same_bits(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

fn sum<'a>(values: impl Iterator<Item = &'a Vec<f64>>, dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for v in values {
        for (o, x) in out.iter_mut().zip(v) {
            *o += x;
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Slot {
    pub template: Arc<Template>,
    pub template_agg: TemplateAggregator,
    pub outer_agg: OuterAggregator,
}

/// `λ ↦ act(λ C + z A + b)` with `z` the concatenated slot outputs.
#[derive(Debug, Clone)]
pub struct Layer {
    pub slots: Vec<Slot>,
    /// `d × d`.
    pub combine: Vec<Vec<f64>>,
    /// `(Σ slot output dims) × d`.
    pub aggregate: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Classifier {
    /// 0-based feature index.
    pub component: usize,
    /// Class 1 when the component is at least the threshold.
    pub threshold: f64,
}

#[derive(Debug, Clone)]
pub struct GnnModel {
    pub dimension: usize,
    /// Input label component `i` initializes feature `input_map[i]`; `None`
    /// drops it. Features not targeted start at 0.
    pub input_map: Vec<Option<usize>>,
    pub layers: Vec<Layer>,
    pub cls: Classifier,
}

impl GnnModel {
    pub fn input_dim(&self) -> usize {
        self.input_map.len()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dimension;
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        if let Some(k) = self.input_map.iter().flatten().find(|&&k| k >= d) {
            return bad(format!("input map targets feature {k} outside dimension {d}"));
        }
        if self.cls.component >= d {
            return bad(format!("classifier component {} outside dimension {d}", self.cls.component));
        }
        for (l, layer) in self.layers.iter().enumerate() {
            let l = l + 1;
            if layer.combine.len() != d || layer.combine.iter().any(|r| r.len() != d) {
                return bad(format!("layer {l}: C must be {d}x{d}"));
            }
            if layer.bias.len() != d {
                return bad(format!("layer {l}: b must have length {d}"));
            }
            let mut rows = 0;
            for slot in &layer.slots {
                slot.template
                    .validate()
                    .map_err(|_| Error::InvalidModel(format!("layer {l}: template `{}` is invalid", slot.template.name())))?;
                slot.template_agg.validate(&slot.template, d)?;
                if let OuterAggregator::BoundedSum { c: 0 } = slot.outer_agg {
                    return bad(format!("layer {l}: bounded_sum needs c >= 1"));
                }
                rows += slot.template_agg.output_dim(d);
            }
            if layer.aggregate.len() != rows || layer.aggregate.iter().any(|r| r.len() != d) {
                return bad(format!("layer {l}: A must be {rows}x{d}"));
            }
        }
        Ok(())
    }

    /// `Some(c)` when every outer aggregator is `bounded_sum`, with `c` the
    /// largest cap (1 when there are no slots); `None` otherwise.
    pub fn bound(&self) -> Option<usize> {
        let mut c = 1;
        for slot in self.layers.iter().flat_map(|l| &l.slots) {
            match slot.outer_agg {
                OuterAggregator::BoundedSum { c: k } => c = c.max(k),
                _ => return None,
            }
        }
        Some(c)
    }

    /// Informational notices: template aggregators that may not be invariant
    /// under the template's root-fixing automorphisms.
    pub fn notices(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (l, layer) in self.layers.iter().enumerate() {
            for slot in &layer.slots {
                let symmetric = matches!(slot.template_agg, TemplateAggregator::Project { vertex: 0, .. });
                if !symmetric
                    && template_automorphisms(&LabelledTemplate::unlabelled((*slot.template).clone())).len() > 1
                {
                    let msg = format!(
                        "layer {}: template `{}` has nontrivial automorphisms; its template aggregator is applied per embedding as given",
                        l + 1,
                        slot.template.name()
                    );
                    if !out.contains(&msg) {
                        out.push(msg);
                    }
                }
            }
        }
        out
    }

    pub fn to_file(&self) -> ModelFile {
        let mut templates: Vec<TemplateFile> = Vec::new();
        for slot in self.layers.iter().flat_map(|l| &l.slots) {
            if !templates.iter().any(|t| t.name == slot.template.name()) {
                templates.push(slot.template.to_file());
            }
        }
        let identity = self.input_map.len() == self.dimension
            && self.input_map.iter().enumerate().all(|(i, k)| *k == Some(i));
        ModelFile {
            dimension: self.dimension,
            input_map: (!identity).then(|| self.input_map.clone()),
            templates,
            layers: self
                .layers
                .iter()
                .map(|l| LayerFile {
                    slots: l
                        .slots
                        .iter()
                        .map(|s| SlotFile {
                            template: s.template.name().to_string(),
                            template_agg: s.template_agg.clone(),
                            outer_agg: s.outer_agg,
                        })
                        .collect(),
                    combine: l.combine.clone(),
                    aggregate: l.aggregate.clone(),
                    bias: l.bias.clone(),
                    activation: l.activation,
                })
                .collect(),
            cls: self.cls,
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("model serializes")
    }

    /// Parses a model; template names resolve first against the file's own
    /// `templates` section, then against `registry`.
    pub fn from_json_str(text: &str, registry: &Registry) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        file.into_model(registry)
    }

    pub fn from_path(path: impl AsRef<Path>, registry: &Registry) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?, registry)
    }
}

/// On-disk model format.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_map: Option<Vec<Option<usize>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub templates: Vec<TemplateFile>,
    pub layers: Vec<LayerFile>,
    pub cls: Classifier,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerFile {
    pub slots: Vec<SlotFile>,
    #[serde(rename = "C")]
    pub combine: Vec<Vec<f64>>,
    #[serde(rename = "A")]
    pub aggregate: Vec<Vec<f64>>,
    #[serde(rename = "b")]
    pub bias: Vec<f64>,
    pub activation: Activation,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlotFile {
    pub template: String,
    pub template_agg: TemplateAggregator,
    pub outer_agg: OuterAggregator,
}

impl ModelFile {
    pub fn into_model(self, registry: &Registry) -> Result<GnnModel> {
        let mut local = Registry::new();
        for t in self.templates {
            local.insert(t.into_template()?)?;
        }
        let resolve = |name: &str| -> Result<Arc<Template>> {
            local
                .lookup(name)
                .or_else(|| registry.lookup(name))
                .cloned()
                .ok_or_else(|| Error::UnknownTemplate(name.to_string()))
        };
        let layers = self
            .layers
            .into_iter()
            .map(|l| {
                Ok(Layer {
                    slots: l
                        .slots
                        .into_iter()
                        .map(|s| {
                            Ok(Slot {
                                template: resolve(&s.template)?,
                                template_agg: s.template_agg,
                                outer_agg: s.outer_agg,
                            })
                        })
                        .collect::<Result<_>>()?,
                    combine: l.combine,
                    aggregate: l.aggregate,
                    bias: l.bias,
                    activation: l.activation,
                })
            })
            .collect::<Result<_>>()?;
        let model = GnnModel {
            dimension: self.dimension,
            input_map: self
                .input_map
                .unwrap_or_else(|| (0..self.dimension).map(Some).collect()),
            layers,
            cls: self.cls,
        };
        model.validate()?;
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::template::{builtin_registry, T1};

    #[test]
    fn bounded_sum_ignores_excess_multiplicity() {
        let agg = OuterAggregator::BoundedSum { c: 2 };
        let a = vec![vec![1.0], vec![1.0], vec![1.0], vec![0.5]];
        let b = vec![vec![0.5], vec![1.0], vec![1.0]];
        assert_eq!(agg.reduce(a, 1), vec![2.5]);
        assert_eq!(agg.reduce(b, 1), vec![2.5]);
    }

    #[test]
    fn empty_multisets_reduce_to_zero() {
        for agg in [
            OuterAggregator::Sum,
            OuterAggregator::Mean,
            OuterAggregator::Max,
            OuterAggregator::BoundedSum { c: 1 },
        ] {
            assert_eq!(agg.reduce(vec![], 3), vec![0.0; 3]);
        }
    }

    #[test]
    fn mean_and_max() {
        let v = vec![vec![1.0, -2.0], vec![3.0, 0.0]];
        assert_eq!(OuterAggregator::Mean.reduce(v.clone(), 2), vec![2.0, -1.0]);
        assert_eq!(OuterAggregator::Max.reduce(v, 2), vec![3.0, 0.0]);
    }

    #[test]
    fn aggregator_names() {
        assert_eq!(OuterAggregator::from_name("bounded_sum:3").unwrap(), OuterAggregator::BoundedSum { c: 3 });
        assert!(matches!(OuterAggregator::from_name("median"), Err(Error::UnsupportedAggregator(_))));
        assert!(OuterAggregator::from_name("bounded_sum:0").is_err());
    }

    #[test]
    fn and_gate_semantics() {
        let agg = TemplateAggregator::AndGate { features: vec![0, 1] };
        let feats = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(agg.apply(&feats, &[0, 1, 2]), vec![1.0]);
        assert_eq!(agg.apply(&feats, &[0, 2, 1]), vec![0.0]);
    }

    fn one_layer(slot_agg: TemplateAggregator) -> GnnModel {
        GnnModel {
            dimension: 1,
            input_map: vec![Some(0)],
            layers: vec![Layer {
                slots: vec![Slot {
                    template: builtin_registry().get(T1).unwrap(),
                    template_agg: slot_agg,
                    outer_agg: OuterAggregator::Sum,
                }],
                combine: vec![vec![1.0]],
                aggregate: vec![vec![1.0]],
                bias: vec![0.0],
                activation: Activation::Relu,
            }],
            cls: Classifier {
                component: 0,
                threshold: 0.5,
            },
        }
    }

    #[test]
    fn json_round_trip() {
        let m = one_layer(TemplateAggregator::Project { vertex: 1, feature: None });
        m.validate().unwrap();
        let text = m.to_json_string();
        assert!(text.contains("\"C\""));
        let back = GnnModel::from_json_str(&text, &Registry::new()).unwrap();
        assert_eq!(back.to_json_string(), text);
        assert_eq!(back.bound(), None);
    }

    #[test]
    fn shape_errors() {
        let m = one_layer(TemplateAggregator::AndGate { features: vec![0, 0] });
        assert!(matches!(m.validate(), Err(Error::InvalidModel(_))));
        let mut m = one_layer(TemplateAggregator::Project { vertex: 1, feature: None });
        m.layers[0].aggregate.push(vec![0.0]);
        assert!(matches!(m.validate(), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn unresolved_template() {
        let text = r#"{"dimension":1,"layers":[{"slots":[{"template":"X","template_agg":{"kind":"and_gate","features":[]},"outer_agg":{"kind":"sum"}}],"C":[[1]],"A":[[1]],"b":[0],"activation":"relu"}],"cls":{"component":0,"threshold":0.5}}"#;
        assert!(matches!(GnnModel::from_json_str(text, &builtin_registry()), Err(Error::UnknownTemplate(_))));
    }

    #[test]
    fn notice_for_symmetric_template() {
        let fork = Arc::new(Template::new("fork", 3, [(0, 1), (0, 2)], []).unwrap());
        let mut m = one_layer(TemplateAggregator::AndGate { features: vec![0, 0] });
        m.layers[0].slots[0].template = fork;
        assert_eq!(m.notices().len(), 1);
        assert!(one_layer(TemplateAggregator::Project { vertex: 1, feature: None }).notices().is_empty());
    }
}
