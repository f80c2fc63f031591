//! Template GNNs: model description, forward pass, formula compiler and
//! AC-GNN adapters.

pub mod acgnn;
pub mod compile;
pub mod model;
pub mod run;

pub use acgnn::{ac_gnn_adapter, ac_plus_adapter, AcGnn, AcLayer, AcPlusGnn, AcPlusLayer};
pub use compile::compile_formula;
pub use model::{
    Activation, Classifier, GnnModel, Layer, ModelFile, OuterAggregator, Slot, TemplateAggregator,
};
pub use run::{initial_features, run_gnn, GnnOutput};
