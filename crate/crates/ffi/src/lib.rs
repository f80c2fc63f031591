//! C ABI for the tgnn toolkit.
//!
//! Graphs, registries and models cross the boundary as opaque handles that
//! the caller releases with the matching `*_free` function. Every fallible
//! function returns a [`TgnnStatus`] and writes its result through an out
//! pointer; on failure [`tgnn_last_error`] describes the problem. Strings
//! returned to the caller are released with [`tgnn_string_free`].
//!
//! Node arguments are dense 0-based indices; [`tgnn_graph_node_index`] maps a
//! node id from the graph file to its index.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use tgnn::cli::default_propositions;
use tgnn::gnn::{compile_formula, run_gnn, GnnModel};
use tgnn::logic::{eval, parse_formula};
use tgnn::{bisim_oracle, bisimilar_via_twl, builtin_registry, count_embeddings, distinguishes, Bound, Error};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TgnnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed graph, template, model or configuration.
    InvalidInput = 3,
    /// Unknown template name or node id.
    NotFound = 4,
    /// Formula syntax or proposition error.
    ParseError = 5,
    /// The exhaustive oracle's resource guard tripped.
    ResourceLimit = 6,
    /// Caller-provided buffer has the wrong length.
    BufferSize = 7,
    Io = 8,
    /// A Rust panic was caught at the boundary.
    Panic = 99,
}

/// Bisimilarity decision procedure for [`tgnn_bisimilar`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TgnnMethod {
    Twl = 0,
    Oracle = 1,
}

/// Pass as a `bound` argument for unbounded counting.
pub const TGNN_UNBOUNDED: usize = 0;

/// Opaque labelled directed graph.
pub struct TgnnGraph(tgnn::LabelledGraph);

/// Opaque template registry.
pub struct TgnnRegistry(tgnn::Registry);

/// Opaque template GNN.
pub struct TgnnModel(GnnModel);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let text = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

struct Failure(TgnnStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::UnknownTemplate(_) | Error::NodeOutOfRange { .. } | Error::SubjectNotInCorpus => {
                TgnnStatus::NotFound
            }
            Error::Parse(_) | Error::PropositionOutOfRange { .. } => TgnnStatus::ParseError,
            Error::ResourceGuard(_) => TgnnStatus::ResourceLimit,
            Error::Io(_) => TgnnStatus::Io,
            _ => TgnnStatus::InvalidInput,
        };
        Failure(status, e.to_string())
    }
}

impl From<tgnn::logic::ParseError> for Failure {
    fn from(e: tgnn::logic::ParseError) -> Self {
        Error::from(e).into()
    }
}

type Outcome = Result<(), Failure>;

/// Runs `body`, converting errors and panics into a status plus last error.
fn guard(body: impl FnOnce() -> Outcome) -> TgnnStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            TgnnStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("panic: {msg}"));
            TgnnStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(TgnnStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(TgnnStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Outcome {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn bound(c: usize) -> Bound {
    if c == TGNN_UNBOUNDED {
        Bound::Unbounded
    } else {
        Bound::AtMost(c)
    }
}

fn templates(reg: &tgnn::Registry, names: &str) -> Result<Vec<Arc<tgnn::Template>>, Failure> {
    let names: Vec<&str> = names.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    Ok(reg.select(&names)?)
}

fn propositions(reg: &tgnn::Registry, dim: usize) -> Vec<String> {
    if reg.propositions().is_empty() {
        default_propositions(dim)
    } else {
        reg.propositions().to_vec()
    }
}

/// Message describing the last failure on this thread, or an empty string.
/// The pointer stays valid until the next tgnn call on the same thread.
#[no_mangle]
pub extern "C" fn tgnn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tgnn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tgnn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a graph file (JSON text).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tgnn_graph_from_json(json: *const c_char, out: *mut *mut TgnnGraph) -> TgnnStatus {
    guard(|| {
        let g = tgnn::LabelledGraph::from_json_str(text(json, "json")?)?;
        write(out, Box::into_raw(Box::new(TgnnGraph(g))), "out")
    })
}

/// Releases a graph. Null is ignored.
///
/// # Safety
/// `g` must come from [`tgnn_graph_from_json`] and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tgnn_graph_free(g: *mut TgnnGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be a live graph handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tgnn_graph_node_count(g: *const TgnnGraph, out: *mut usize) -> TgnnStatus {
    guard(|| write(out, borrow(g, "graph")?.0.node_count(), "out"))
}

/// Index of the node whose file id is `id`.
///
/// # Safety
/// `g` must be a live graph handle, `id` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tgnn_graph_node_index(g: *const TgnnGraph, id: *const c_char, out: *mut usize) -> TgnnStatus {
    guard(|| {
        let id = text(id, "id")?;
        let v = borrow(g, "graph")?
            .0
            .node_by_name(id)
            .ok_or_else(|| Failure(TgnnStatus::NotFound, format!("no node with id `{id}`")))?;
        write(out, v, "out")
    })
}

/// Registry holding the builtin templates `T1`, `T2`, `T△` (alias `Ttri`)
/// and `Tp`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tgnn_registry_builtin(out: *mut *mut TgnnRegistry) -> TgnnStatus {
    guard(|| write(out, Box::into_raw(Box::new(TgnnRegistry(builtin_registry()))), "out"))
}

/// Parses a registry file (JSON text). Builtin templates whose names are not
/// taken by the file are added.
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tgnn_registry_from_json(json: *const c_char, out: *mut *mut TgnnRegistry) -> TgnnStatus {
    guard(|| {
        let mut reg = tgnn::Registry::from_json_str(text(json, "json")?)?;
        for t in builtin_registry().templates() {
            if reg.lookup(t.name()).is_none() {
                reg.insert(tgnn::Template::clone(t))?;
            }
        }
        if reg.lookup("Ttri").is_none() {
            reg.add_alias("Ttri", tgnn::template::TRIANGLE)?;
        }
        write(out, Box::into_raw(Box::new(TgnnRegistry(reg))), "out")
    })
}

/// Releases a registry. Null is ignored.
///
/// # Safety
/// `reg` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tgnn_registry_free(reg: *mut TgnnRegistry) {
    if !reg.is_null() {
        drop(Box::from_raw(reg));
    }
}

/// Number of embeddings of the named template rooted at `node`.
///
/// # Safety
/// Handles must be live, `template` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tgnn_count_embeddings(
    reg: *const TgnnRegistry,
    template: *const c_char,
    g: *const TgnnGraph,
    node: usize,
    out: *mut usize,
) -> TgnnStatus {
    guard(|| {
        let t = borrow(reg, "registry")?.0.get(text(template, "template")?)?;
        let g = &borrow(g, "graph")?.0;
        g.check_node(node)?;
        write(out, count_embeddings(&t, g, node), "out")
    })
}

/// Whether `rounds` rounds of T-WL over the comma-separated `templates`
/// give `(g1, v1)` and `(g2, v2)` different colours. `bound` is the
/// multiplicity cap, or [`TGNN_UNBOUNDED`].
///
/// # Safety
/// Handles must be live, `templates` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tgnn_distinguishes(
    reg: *const TgnnRegistry,
    templates_csv: *const c_char,
    g1: *const TgnnGraph,
    v1: usize,
    g2: *const TgnnGraph,
    v2: usize,
    rounds: usize,
    bound_c: usize,
    out: *mut bool,
) -> TgnnStatus {
    guard(|| {
        let ts = templates(&borrow(reg, "registry")?.0, text(templates_csv, "templates")?)?;
        let cfg = tgnn::TwlConfig::new(ts, rounds, bound(bound_c))?;
        let verdict = distinguishes(&borrow(g1, "g1")?.0, v1, &borrow(g2, "g2")?.0, v2, &cfg)?;
        write(out, verdict, "out")
    })
}

/// Whether `(g1, v1)` and `(g2, v2)` are `(level, bound)`-bisimilar.
///
/// # Safety
/// Handles must be live, `templates` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tgnn_bisimilar(
    reg: *const TgnnRegistry,
    templates_csv: *const c_char,
    g1: *const TgnnGraph,
    v1: usize,
    g2: *const TgnnGraph,
    v2: usize,
    level: usize,
    bound_c: usize,
    method: TgnnMethod,
    out: *mut bool,
) -> TgnnStatus {
    guard(|| {
        let ts = templates(&borrow(reg, "registry")?.0, text(templates_csv, "templates")?)?;
        let (g1, g2) = (&borrow(g1, "g1")?.0, &borrow(g2, "g2")?.0);
        let verdict = match method {
            TgnnMethod::Twl => bisimilar_via_twl(g1, v1, g2, v2, &ts, level, bound(bound_c))?,
            TgnnMethod::Oracle => bisim_oracle(g1, v1, g2, v2, &ts, level, bound(bound_c))?,
        };
        write(out, verdict, "out")
    })
}

/// Evaluates a formula at `node`. Propositions are the registry's list, or
/// `p, q, r, s` (then `p1 … pd`) by label dimension.
///
/// # Safety
/// Handles must be live, `formula` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tgnn_modelcheck(
    reg: *const TgnnRegistry,
    g: *const TgnnGraph,
    formula: *const c_char,
    node: usize,
    out: *mut bool,
) -> TgnnStatus {
    guard(|| {
        let reg = &borrow(reg, "registry")?.0;
        let g = &borrow(g, "graph")?.0;
        let f = parse_formula(text(formula, "formula")?, reg, &propositions(reg, g.dim()))?;
        write(out, eval(&f, g, node)?, "out")
    })
}

/// Compiles a formula over `propositions` input components into a model.
///
/// # Safety
/// `reg` must be live, `formula` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tgnn_compile_formula(
    reg: *const TgnnRegistry,
    formula: *const c_char,
    propositions_count: usize,
    out: *mut *mut TgnnModel,
) -> TgnnStatus {
    guard(|| {
        let reg = &borrow(reg, "registry")?.0;
        let f = parse_formula(text(formula, "formula")?, reg, &propositions(reg, propositions_count))?;
        let model = compile_formula(&f, propositions_count)?;
        write(out, Box::into_raw(Box::new(TgnnModel(model))), "out")
    })
}

/// Parses a model file; template names resolve against the model's own
/// template list first, then `reg`.
///
/// # Safety
/// `json` must be NUL-terminated, `reg` live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tgnn_model_from_json(
    json: *const c_char,
    reg: *const TgnnRegistry,
    out: *mut *mut TgnnModel,
) -> TgnnStatus {
    guard(|| {
        let model = GnnModel::from_json_str(text(json, "json")?, &borrow(reg, "registry")?.0)?;
        write(out, Box::into_raw(Box::new(TgnnModel(model))), "out")
    })
}

/// Serialises a model; release the string with [`tgnn_string_free`].
///
/// # Safety
/// `model` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tgnn_model_to_json(model: *const TgnnModel, out: *mut *mut c_char) -> TgnnStatus {
    guard(|| {
        let json = borrow(model, "model")?.0.to_json_string();
        let s = CString::new(json).map_err(|e| Failure(TgnnStatus::InvalidInput, e.to_string()))?;
        write(out, s.into_raw(), "out")
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tgnn_model_free(model: *mut TgnnModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Runs a model and writes one class (0 or 1) per node into `classes`,
/// which must hold exactly the graph's node count.
///
/// # Safety
/// Handles must be live; `classes` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn tgnn_run_gnn(
    model: *const TgnnModel,
    g: *const TgnnGraph,
    classes: *mut u8,
    len: usize,
) -> TgnnStatus {
    guard(|| {
        let g = &borrow(g, "graph")?.0;
        if classes.is_null() {
            return Err(null("classes"));
        }
        if len != g.node_count() {
            return Err(Failure(
                TgnnStatus::BufferSize,
                format!("buffer holds {len} entries, graph has {} nodes", g.node_count()),
            ));
        }
        let result = run_gnn(&borrow(model, "model")?.0, g)?;
        let slots = std::slice::from_raw_parts_mut(classes, len);
        for (slot, class) in slots.iter_mut().zip(result.classes) {
            *slot = u8::from(class);
        }
        Ok(())
    })
}
