//! Verification toolkit for template graph neural networks.
//!
//! A *template* is a small rooted pattern with mandatory edges and mandatory
//! non-edges. Message passing, colour refinement, bisimulation and the modal
//! logic in this crate all range over injective template embeddings instead
//! of plain neighbourhoods:
//!
//! - [`graph`] and [`template`]: labelled directed graphs, templates, registries
//!   and the JSON file formats.
//! - [`embedding`]: enumeration and counting of template embeddings.
//! - [`twl`]: template colour refinement (T-WL), unbounded and c-bounded.
//! - [`bisim`]: graded (l,c) template bisimulation, decided through T-WL and
//!   through an independent exhaustive game oracle.
//! - [`logic`]: GML(T) formulae, parser, model checker and characteristic
//!   formulae.
//! - [`gnn`]: forward execution of n-ary template GNNs and the compiler from
//!   GML(T) formulae to bounded template GNNs.
//! - [`cli`]: the `tgnn` command-line surface.

pub mod bisim;
pub mod cli;
pub mod embedding;
pub mod error;
pub mod generate;
pub mod gnn;
pub mod graph;
pub mod logic;
pub mod multiset;
pub mod template;
pub mod twl;

pub use bisim::{bisim_classes, bisim_oracle, bisimilar_via_twl};
pub use embedding::{count_embeddings, enumerate_embeddings, Embedding};
pub use error::{Error, Result};
pub use graph::{LabelledGraph, PointedGraph};
pub use logic::{parse_formula, Formula};
pub use multiset::Multiset;
pub use template::{builtin_registry, LabelledTemplate, Registry, Template};
pub use twl::{distinguishes, run_twl, stabilization_round, Bound, Coloring, TwlConfig};
