//! The `tgnn` command line.
//!
//! Every command prints JSON (or formula text for `charform`) on stdout and
//! diagnostics on stderr. Exit codes: 0 success / indistinguishable /
//! bisimilar / all agree, 10 distinguished or not bisimilar, 11 a crosscheck
//! disagreement, 2 any error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::bisim::{bisim_classes, bisim_oracle, bisimilar_via_twl};
use crate::embedding::count_embeddings;
use crate::error::{Error, Result};
use crate::generate::{cycle, erdos_renyi, star};
use crate::gnn::{compile_formula, run_gnn, GnnModel};
use crate::graph::{LabelledGraph, PointedGraph};
use crate::logic::random::{random_formula, FormulaShape};
use crate::logic::{char_formula_bounded, char_formula_unbounded, eval_all, parse_formula, Formula};
use crate::template::{builtin_registry, Registry, Template};
use crate::twl::{run_twl, Bound, TwlConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_DISTINGUISHED: i32 = 10;
pub const EXIT_DISAGREEMENT: i32 = 11;

/// Corpora with fewer pointed graphs than this trigger a warning.
const SMALL_CORPUS: usize = 8;
/// Disagreements listed in a crosscheck report.
const MAX_REPORTED: usize = 20;

#[derive(Debug, Parser)]
#[command(name = "tgnn", version, about = "Template GNN verification toolkit")]
pub struct Cli {
    /// Template registry file (JSON); builtin templates are always available.
    #[arg(long, global = true, env = "TGNN_REGISTRY")]
    pub registry: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Twl,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphKind {
    Cycle,
    Star,
    Random,
}

#[derive(Debug, clap::Args)]
pub struct TemplateArgs {
    /// Comma-separated template names.
    #[arg(long, value_delimiter = ',', default_value = "T1")]
    pub templates: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run T-WL on two pointed graphs; exit 10 when their colours differ.
    Distinguish {
        graph_a: PathBuf,
        graph_b: PathBuf,
        node_a: String,
        node_b: String,
        #[command(flatten)]
        templates: TemplateArgs,
        #[arg(long, default_value_t = 1)]
        rounds: usize,
        /// Multiplicity cap, or `inf`.
        #[arg(long, default_value = "inf")]
        bound: String,
    },
    /// Decide (l, c) bisimilarity; exit 10 when not bisimilar.
    Bisim {
        graph_a: PathBuf,
        graph_b: PathBuf,
        node_a: String,
        node_b: String,
        #[command(flatten)]
        templates: TemplateArgs,
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long, default_value = "inf")]
        bound: String,
        #[arg(long, value_enum, default_value = "twl")]
        method: Method,
    },
    /// Count template embeddings at every node (or one node).
    Count {
        graph: PathBuf,
        #[arg(long)]
        template: String,
        #[arg(long)]
        node: Option<String>,
    },
    /// Evaluate a formula on a graph.
    Modelcheck {
        graph: PathBuf,
        /// Formula text; omit when using --formula-file.
        formula: Option<String>,
        #[arg(long)]
        formula_file: Option<PathBuf>,
        #[arg(long, conflicts_with = "all_nodes")]
        node: Option<String>,
        /// Report every node (the default when --node is absent).
        #[arg(long)]
        all_nodes: bool,
    },
    /// Compile a formula into a bounded template GNN.
    Compile {
        formula: Option<String>,
        #[arg(long)]
        formula_file: Option<PathBuf>,
        /// Number of input propositions when the registry lists none.
        #[arg(long)]
        propositions: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a model file on a graph.
    Rungnn { model: PathBuf, graph: PathBuf },
    /// Compare compiled-GNN classification with the model checker; exit 11
    /// on any disagreement.
    Crosscheck {
        formula: Option<String>,
        #[arg(long)]
        formula_file: Option<PathBuf>,
        /// Use this model instead of compiling (for fault injection).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Directory of graph files.
        #[arg(long, conflicts_with = "random")]
        graphs: Option<PathBuf>,
        /// Number of random graphs.
        #[arg(long)]
        random: Option<usize>,
        /// Maximum node count of random graphs.
        #[arg(long, default_value_t = 8)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.3)]
        p: f64,
        /// Label dimension of random graphs.
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Number of random formulae when no formula is given.
        #[arg(long, default_value_t = 10)]
        random_formulas: usize,
    },
    /// Print a characteristic formula.
    Charform {
        graph: PathBuf,
        node: String,
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long, default_value = "1")]
        bound: String,
        /// Directory of graph files; every node of every graph joins the corpus.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[command(flatten)]
        templates: TemplateArgs,
    },
    /// Partition a corpus into bisimulation classes.
    Classes {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long, default_value = "inf")]
        bound: String,
        #[command(flatten)]
        templates: TemplateArgs,
    },
    /// Write a generated graph file.
    Gen {
        #[arg(long, value_enum)]
        kind: GraphKind,
        /// Node count.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.3)]
        p: f64,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let registry = load_registry(cli.registry.as_deref())?;
    match cli.command {
        Command::Distinguish {
            graph_a,
            graph_b,
            node_a,
            node_b,
            templates,
            rounds,
            bound,
        } => {
            let (ga, gb) = (LabelledGraph::from_path(&graph_a)?, LabelledGraph::from_path(&graph_b)?);
            let (va, vb) = (node(&ga, &node_a)?, node(&gb, &node_b)?);
            let bound = Bound::parse(&bound)?;
            let cfg = TwlConfig::new(registry.select(&templates.templates)?, rounds, bound)?;
            let col = run_twl(&[&ga, &gb], &cfg)?;
            let names = [&ga, &gb];
            let records: Vec<Value> = col
                .records()
                .map(|(round, graph, v, color)| {
                    json!({"round": round, "graph": graph, "node": names[graph].name(v), "color": color})
                })
                .collect();
            let same = col.color(rounds, 0, va) == col.color(rounds, 1, vb);
            emit(
                out,
                &json!({
                    "rounds": records,
                    "distinguished": !same,
                    "verdict": verdict(same, rounds, bound, Method::Twl),
                }),
            )?;
            Ok(if same { EXIT_OK } else { EXIT_DISTINGUISHED })
        }
        Command::Bisim {
            graph_a,
            graph_b,
            node_a,
            node_b,
            templates,
            level,
            bound,
            method,
        } => {
            let (ga, gb) = (LabelledGraph::from_path(&graph_a)?, LabelledGraph::from_path(&graph_b)?);
            let (va, vb) = (node(&ga, &node_a)?, node(&gb, &node_b)?);
            let bound = Bound::parse(&bound)?;
            let ts = registry.select(&templates.templates)?;
            let same = match method {
                Method::Twl => bisimilar_via_twl(&ga, va, &gb, vb, &ts, level, bound)?,
                Method::Oracle => bisim_oracle(&ga, va, &gb, vb, &ts, level, bound)?,
            };
            emit(out, &verdict(same, level, bound, method))?;
            Ok(if same { EXIT_OK } else { EXIT_DISTINGUISHED })
        }
        Command::Count { graph, template, node: which } => {
            let g = LabelledGraph::from_path(&graph)?;
            let t = registry.get(&template)?;
            let nodes = match which {
                Some(id) => vec![node(&g, &id)?],
                None => (0..g.node_count()).collect(),
            };
            let counts: Vec<Value> = nodes
                .into_iter()
                .map(|v| json!({"node": g.name(v), "count": count_embeddings(&t, &g, v)}))
                .collect();
            emit(out, &json!({"template": t.name(), "counts": counts}))?;
            Ok(EXIT_OK)
        }
        Command::Modelcheck {
            graph,
            formula,
            formula_file,
            node: which,
            all_nodes: _,
        } => {
            let g = LabelledGraph::from_path(&graph)?;
            let props = propositions(&registry, g.dim())?;
            let text = formula_text(formula, formula_file)?;
            let f = parse_formula(&text, &registry, &props)?;
            let sat = eval_all(&f, &g)?;
            let nodes = match which {
                Some(id) => vec![node(&g, &id)?],
                None => (0..g.node_count()).collect(),
            };
            let results: Vec<Value> = nodes
                .into_iter()
                .map(|v| json!({"node": g.name(v), "holds": sat[v]}))
                .collect();
            emit(out, &json!({"formula": f.display(&props).to_string(), "results": results}))?;
            Ok(EXIT_OK)
        }
        Command::Compile {
            formula,
            formula_file,
            propositions: count,
            out: path,
        } => {
            let props = match count {
                Some(n) if registry.propositions().is_empty() => default_propositions(n),
                _ if !registry.propositions().is_empty() => registry.propositions().to_vec(),
                _ => {
                    return Err(Error::InvalidConfig(
                        "pass --propositions or a registry that lists propositions".into(),
                    ))
                }
            };
            let f = parse_formula(&formula_text(formula, formula_file)?, &registry, &props)?;
            let model = compile_formula(&f, props.len())?;
            for notice in model.notices() {
                writeln!(err, "notice: {notice}")?;
            }
            write_output(out, path.as_deref(), &model.to_json_string())?;
            Ok(EXIT_OK)
        }
        Command::Rungnn { model, graph } => {
            let m = GnnModel::from_path(&model, &registry)?;
            for notice in m.notices() {
                writeln!(err, "notice: {notice}")?;
            }
            let g = LabelledGraph::from_path(&graph)?;
            let result = run_gnn(&m, &g)?;
            let nodes: Vec<Value> = (0..g.node_count())
                .map(|v| {
                    json!({
                        "node": g.name(v),
                        "features": result.last()[v],
                        "class": u8::from(result.classes[v]),
                    })
                })
                .collect();
            emit(out, &json!({"layers": m.layers.len(), "nodes": nodes}))?;
            Ok(EXIT_OK)
        }
        Command::Crosscheck {
            formula,
            formula_file,
            model,
            graphs,
            random,
            size,
            seed,
            p,
            dim,
            random_formulas,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let corpus: Vec<(String, LabelledGraph)> = match (graphs, random) {
                (Some(dir), _) => load_dir(&dir)?
                    .into_iter()
                    .map(|(name, g)| (name, Arc::unwrap_or_clone(g)))
                    .collect(),
                (None, Some(n)) => {
                    if size == 0 {
                        return Err(Error::InvalidConfig("--size must be at least 1".into()));
                    }
                    (0..n)
                        .map(|i| {
                            let nodes = rng.gen_range(1..=size);
                            (format!("random-{i}"), erdos_renyi(nodes, p, dim, &mut rng))
                        })
                        .collect()
                }
                (None, None) => return Err(Error::InvalidConfig("pass --graphs DIR or --random N".into())),
            };
            let d = corpus.first().map_or(dim, |(_, g)| g.dim());
            let props = propositions(&registry, d)?;
            let formulas: Vec<Formula> = if formula.is_some() || formula_file.is_some() {
                vec![parse_formula(&formula_text(formula, formula_file)?, &registry, &props)?]
            } else {
                if props.is_empty() {
                    return Err(Error::InvalidConfig("random formulae need at least one proposition".into()));
                }
                let shape = FormulaShape {
                    propositions: props.len(),
                    ..FormulaShape::default()
                };
                (0..random_formulas)
                    .map(|_| random_formula(&mut rng, registry.templates(), &shape))
                    .collect()
            };
            let fixed = match &model {
                Some(path) if formulas.len() == 1 => Some(GnnModel::from_path(path, &registry)?),
                Some(_) => return Err(Error::InvalidConfig("--model needs exactly one formula".into())),
                None => None,
            };
            let mut checked = 0usize;
            let mut disagreements = Vec::new();
            let mut total = 0usize;
            for f in &formulas {
                let m = match &fixed {
                    Some(m) => m.clone(),
                    None => compile_formula(f, props.len())?,
                };
                for (name, g) in &corpus {
                    let expected = eval_all(f, g)?;
                    let got = run_gnn(&m, g)?.classes;
                    for v in 0..g.node_count() {
                        checked += 1;
                        if expected[v] != got[v] {
                            total += 1;
                            if disagreements.len() < MAX_REPORTED {
                                disagreements.push(json!({
                                    "formula": f.display(&props).to_string(),
                                    "graph": name,
                                    "node": g.name(v),
                                    "model_checker": expected[v],
                                    "gnn": got[v],
                                }));
                            }
                        }
                    }
                }
            }
            emit(
                out,
                &json!({
                    "formulas": formulas.len(),
                    "graphs": corpus.len(),
                    "nodes_checked": checked,
                    "disagreement_count": total,
                    "disagreements": disagreements,
                }),
            )?;
            Ok(if total == 0 { EXIT_OK } else { EXIT_DISAGREEMENT })
        }
        Command::Charform {
            graph,
            node: id,
            level,
            bound,
            corpus,
            templates,
        } => {
            let g = Arc::new(LabelledGraph::from_path(&graph)?);
            let v = node(&g, &id)?;
            let props = propositions(&registry, g.dim())?;
            let ts = registry.select(&templates.templates)?;
            let f = match Bound::parse(&bound)? {
                Bound::Unbounded => char_formula_unbounded(&g, v, level, &ts)?,
                Bound::AtMost(c) => {
                    let pool = match corpus {
                        Some(dir) => corpus_points(&load_dir(&dir)?),
                        None => PointedGraph::all_points(Arc::clone(&g)),
                    };
                    if pool.len() < SMALL_CORPUS {
                        writeln!(
                            err,
                            "warning: corpus has {} pointed graphs; the formula characterises bisimilarity only relative to it",
                            pool.len()
                        )?;
                    }
                    char_formula_bounded(&PointedGraph::new(g, v)?, level, c, &ts, &pool)?
                }
            };
            writeln!(out, "{}", f.display(&props))?;
            Ok(EXIT_OK)
        }
        Command::Classes {
            corpus,
            level,
            bound,
            templates,
        } => {
            let files = load_dir(&corpus)?;
            let points = corpus_points(&files);
            if points.len() < SMALL_CORPUS {
                writeln!(err, "warning: corpus has only {} pointed graphs", points.len())?;
            }
            let bound = Bound::parse(&bound)?;
            let ts = registry.select(&templates.templates)?;
            let classes = bisim_classes(&points, &ts, level, bound)?;
            let owner = |pg: &PointedGraph| -> Value {
                let file = files
                    .iter()
                    .find(|(_, g)| Arc::ptr_eq(g, &pg.graph))
                    .map(|(name, _)| name.as_str())
                    .unwrap_or_default();
                json!({"graph": file, "node": pg.graph.name(pg.point)})
            };
            let out_classes: Vec<Value> = classes
                .iter()
                .map(|class| {
                    json!({
                        "representative": owner(&points[class[0]]),
                        "members": class.iter().map(|&i| owner(&points[i])).collect::<Vec<_>>(),
                    })
                })
                .collect();
            emit(
                out,
                &json!({"level": level, "bound": bound_json(bound), "classes": out_classes}),
            )?;
            Ok(EXIT_OK)
        }
        Command::Gen {
            kind,
            n,
            seed,
            p,
            dim,
            out: path,
        } => {
            let g = match kind {
                GraphKind::Cycle => cycle(n, dim),
                GraphKind::Star => {
                    if n == 0 {
                        return Err(Error::InvalidConfig("a star needs at least one node".into()));
                    }
                    star(n - 1, dim)
                }
                GraphKind::Random => {
                    if !(0.0..=1.0).contains(&p) {
                        return Err(Error::InvalidConfig(format!("edge probability {p} outside [0, 1]")));
                    }
                    erdos_renyi(n, p, dim, &mut ChaCha8Rng::seed_from_u64(seed))
                }
            };
            write_output(out, path.as_deref(), &g.to_json_string())?;
            Ok(EXIT_OK)
        }
    }
}

fn load_registry(path: Option<&Path>) -> Result<Registry> {
    let Some(path) = path else {
        return Ok(builtin_registry());
    };
    let mut reg = Registry::from_path(path)?;
    let builtins = builtin_registry();
    for t in builtins.templates() {
        if reg.lookup(t.name()).is_none() {
            reg.insert(Template::clone(t))?;
        }
    }
    if reg.lookup("Ttri").is_none() {
        reg.add_alias("Ttri", crate::template::TRIANGLE)?;
    }
    Ok(reg)
}

/// `p, q, r, s` for up to four components, `p1 … pd` beyond.
pub fn default_propositions(dim: usize) -> Vec<String> {
    if dim <= 4 {
        ["p", "q", "r", "s"][..dim].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=dim).map(|i| format!("p{i}")).collect()
    }
}

fn propositions(registry: &Registry, dim: usize) -> Result<Vec<String>> {
    let listed = registry.propositions();
    if listed.is_empty() {
        Ok(default_propositions(dim))
    } else if listed.len() == dim {
        Ok(listed.to_vec())
    } else {
        Err(Error::DimensionMismatch {
            expected: listed.len(),
            found: dim,
        })
    }
}

fn formula_text(inline: Option<String>, file: Option<PathBuf>) -> Result<String> {
    match (inline, file) {
        (Some(t), None) => Ok(t),
        (None, Some(path)) => Ok(std::fs::read_to_string(path)?.trim().to_string()),
        (Some(_), Some(_)) => Err(Error::InvalidConfig("give a formula inline or by file, not both".into())),
        (None, None) => Err(Error::InvalidConfig("no formula given".into())),
    }
}

fn node(g: &LabelledGraph, id: &str) -> Result<usize> {
    g.node_by_name(id)
        .ok_or_else(|| Error::InvalidGraph(format!("no node with id `{id}`")))
}

/// Graph files (`*.json`) of a directory, sorted by file name.
fn load_dir(dir: &Path) -> Result<Vec<(String, Arc<LabelledGraph>)>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "json"));
    paths.sort();
    if paths.is_empty() {
        return Err(Error::InvalidConfig(format!("no graph files in {}", dir.display())));
    }
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((name, Arc::new(LabelledGraph::from_path(&p)?)))
        })
        .collect()
}

fn corpus_points(files: &[(String, Arc<LabelledGraph>)]) -> Vec<PointedGraph> {
    files
        .iter()
        .flat_map(|(_, g)| PointedGraph::all_points(Arc::clone(g)))
        .collect()
}

fn bound_json(bound: Bound) -> Value {
    match bound {
        Bound::Unbounded => json!("inf"),
        Bound::AtMost(c) => json!(c),
    }
}

fn verdict(bisimilar: bool, level: usize, bound: Bound, method: Method) -> Value {
    json!({
        "bisimilar": bisimilar,
        "level": level,
        "bound": bound_json(bound),
        "method": match method { Method::Twl => "twl", Method::Oracle => "oracle" },
    })
}

fn emit(out: &mut dyn Write, value: &Value) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn write_output(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, format!("{text}\n"))?,
        None => writeln!(out, "{text}")?,
    }
    Ok(())
}
