use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use infinitewalk::embed::DEFAULT_DIM;
use infinitewalk::io::{self as iwio, GraphStats};
use infinitewalk::spectral::write_spectrum_csv;
use infinitewalk::{
    approx_error_report, default_epsilon, embed_with_cache, empirical_pmi, evaluate_sweep, fiedler_value,
    largest_connected_component, load_edge_list, load_labels, pmi_approx, pmi_exact, pmi_limit, spectral_cache,
    validate_walkable, EmbedConfig, EmbedMethod, EvalConfig, Graph, PmiConfig, Ramp, WalkConfig,
};

use crate::output::{with_suffix, Stage};

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Load an edge list, keep the largest connected component, check it is
    /// walkable and write the canonical graph directory.
    Preprocess(PreprocessArgs),
    /// Eigenvalues of the symmetrized transition matrix, descending.
    Spectrum(SpectrumArgs),
    /// Exact window-T PMI against the limit-based approximation.
    PmiCompare(PmiCompareArgs),
    /// PMI estimated from seeded random walks, with its deviation from exact.
    PmiEmpirical(PmiEmpiricalArgs),
    /// Compute node embeddings.
    Embed(EmbedArgs),
    /// Multi-label classification sweep over training ratios.
    Evaluate(EvaluateArgs),
    /// Re-run a command from its manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PreprocessArgs {
    #[arg(long)]
    pub edges: PathBuf,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Skip the Fiedler eigenvalue in stats.json (needs a full eigensolve).
    #[arg(long)]
    pub skip_fiedler: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RampArg {
    R1,
    Reps,
}

impl RampArg {
    fn resolve(self, epsilon: f64) -> Ramp {
        match self {
            RampArg::R1 => Ramp::One,
            RampArg::Reps => Ramp::Epsilon(epsilon),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PmiCompareArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long = "T")]
    pub window: usize,
    #[arg(long, value_enum, default_value = "r1")]
    pub ramp: RampArg,
    /// Floor for the `reps` ramp.
    #[arg(long, default_value_t = default_epsilon())]
    pub epsilon: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixFormat {
    /// Little-endian f64, row-major, plus a `.sidecar` text file.
    Bin,
    /// Comma-separated, n <= 100 only.
    Csv,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PmiEmpiricalArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long = "T")]
    pub window: usize,
    /// Walks started from every node.
    #[arg(long)]
    pub gamma: usize,
    /// Nodes per walk.
    #[arg(long)]
    pub len: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "bin")]
    pub format: MatrixFormat,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Infinitewalk,
    Binlap,
    Adjacency,
    Limitraw,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingFormat {
    /// `name v1 ... vd` per line.
    Text,
    /// Little-endian f64 rows plus a `.sidecar` and a `.names` file.
    Bin,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EmbedArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Window size for infinitewalk.
    #[arg(long = "T", default_value_t = 10)]
    pub window: usize,
    #[arg(long, value_enum, default_value = "reps")]
    pub ramp: RampArg,
    #[arg(long, default_value_t = default_epsilon())]
    pub epsilon: f64,
    /// Quantile for binlap.
    #[arg(long, default_value_t = 0.95)]
    pub q: f64,
    #[arg(long, default_value_t = DEFAULT_DIM)]
    pub d: usize,
    #[arg(long, value_enum, default_value = "text")]
    pub format: EmbeddingFormat,
    #[arg(long)]
    pub out: PathBuf,
}

impl EmbedArgs {
    pub fn method(&self) -> EmbedMethod {
        match self.method {
            MethodArg::Infinitewalk => {
                EmbedMethod::InfiniteWalk { window: self.window, ramp: self.ramp.resolve(self.epsilon) }
            }
            MethodArg::Binlap => EmbedMethod::BinarizedLaplacian { quantile: self.q },
            MethodArg::Adjacency => EmbedMethod::Adjacency,
            MethodArg::Limitraw => EmbedMethod::LimitRaw,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EvaluateArgs {
    /// Embedding in text format.
    #[arg(long)]
    pub embedding: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])]
    pub ratios: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    #[arg(long = "C", default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Method name written into the report; defaults to the embedding file stem.
    #[arg(long)]
    pub method: Option<String>,
    /// `.json` writes JSON, anything else CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write to this path instead of the recorded output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn absolute(p: &Path) -> Result<PathBuf> {
    std::path::absolute(p).with_context(|| format!("resolving {}", p.display()))
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Preprocess(_) => "preprocess",
            Command::Spectrum(_) => "spectrum",
            Command::PmiCompare(_) => "pmi-compare",
            Command::PmiEmpirical(_) => "pmi-empirical",
            Command::Embed(_) => "embed",
            Command::Evaluate(_) => "evaluate",
            Command::Replay(_) => "replay",
        }
    }

    /// Rewrites every path argument as an absolute path.
    pub fn absolutize(&mut self) -> Result<()> {
        match self {
            Command::Preprocess(a) => {
                a.edges = absolute(&a.edges)?;
                a.labels = a.labels.as_deref().map(absolute).transpose()?;
                a.out = absolute(&a.out)?;
            }
            Command::Spectrum(a) => {
                a.graph = absolute(&a.graph)?;
                a.out = absolute(&a.out)?;
            }
            Command::PmiCompare(a) => {
                a.graph = absolute(&a.graph)?;
                a.out = absolute(&a.out)?;
            }
            Command::PmiEmpirical(a) => {
                a.graph = absolute(&a.graph)?;
                a.out = absolute(&a.out)?;
            }
            Command::Embed(a) => {
                a.graph = absolute(&a.graph)?;
                a.out = absolute(&a.out)?;
            }
            Command::Evaluate(a) => {
                a.embedding = absolute(&a.embedding)?;
                a.labels = absolute(&a.labels)?;
                a.out = absolute(&a.out)?;
            }
            Command::Replay(a) => {
                a.manifest = absolute(&a.manifest)?;
                a.out = a.out.as_deref().map(absolute).transpose()?;
            }
        }
        Ok(())
    }

    pub fn out(&self) -> Option<&Path> {
        match self {
            Command::Preprocess(a) => Some(&a.out),
            Command::Spectrum(a) => Some(&a.out),
            Command::PmiCompare(a) => Some(&a.out),
            Command::PmiEmpirical(a) => Some(&a.out),
            Command::Embed(a) => Some(&a.out),
            Command::Evaluate(a) => Some(&a.out),
            Command::Replay(a) => a.out.as_deref(),
        }
    }

    pub fn set_out(&mut self, out: PathBuf) {
        match self {
            Command::Preprocess(a) => a.out = out,
            Command::Spectrum(a) => a.out = out,
            Command::PmiCompare(a) => a.out = out,
            Command::PmiEmpirical(a) => a.out = out,
            Command::Embed(a) => a.out = out,
            Command::Evaluate(a) => a.out = out,
            Command::Replay(a) => a.out = Some(out),
        }
    }

    pub fn writes_directory(&self) -> bool {
        matches!(self, Command::Preprocess(_))
    }

    /// Runs the command, staging every output into `stage`.
    pub fn execute(&self, stage: &mut Stage) -> Result<()> {
        match self {
            Command::Preprocess(a) => preprocess(a, stage),
            Command::Spectrum(a) => spectrum(a, stage),
            Command::PmiCompare(a) => pmi_compare(a, stage),
            Command::PmiEmpirical(a) => pmi_empirical(a, stage),
            Command::Embed(a) => embed_cmd(a, stage),
            Command::Evaluate(a) => evaluate(a, stage),
            Command::Replay(_) => unreachable!("replay is resolved before execution"),
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
}

fn load_graph_dir(dir: &Path) -> Result<Graph> {
    let (g, _) = iwio::read_graph_dir(dir).with_context(|| format!("reading graph directory {}", dir.display()))?;
    validate_walkable(&g)?;
    Ok(g)
}

fn write_json<T: Serialize>(stage: &mut Stage, path: &Path, value: &T) -> Result<()> {
    stage.write(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

fn preprocess(a: &PreprocessArgs, stage: &mut Stage) -> Result<()> {
    let raw = load_edge_list(open(&a.edges)?).with_context(|| format!("parsing {}", a.edges.display()))?;
    let g = largest_connected_component(&raw)?;
    validate_walkable(&g)?;
    let labels = a
        .labels
        .as_deref()
        .map(|p| load_labels(open(p)?, g.names()).with_context(|| format!("parsing {}", p.display())))
        .transpose()?;
    let fiedler = if a.skip_fiedler { None } else { Some(fiedler_value(&spectral_cache(&g)?)?) };
    let stats = GraphStats::of(&g, labels.as_ref());

    stage.ensure_dir(&a.out)?;
    stage.write(&a.out.join(iwio::NAMES_FILE), |w| Ok(iwio::write_names(&g, w)?))?;
    stage.write(&a.out.join(iwio::EDGES_FILE), |w| Ok(iwio::write_dense_edges(&g, w)?))?;
    if let Some(labels) = &labels {
        stage.write(&a.out.join(iwio::LABELS_FILE), |w| Ok(iwio::write_labels(&g, labels, w)?))?;
    }
    let mut stats_json = serde_json::to_value(&stats)?;
    stats_json["fiedler"] = json!(fiedler);
    stats_json["input_nodes"] = json!(raw.n());
    stats_json["input_edges"] = json!(raw.edges().len());
    write_json(stage, &a.out.join(iwio::STATS_FILE), &stats_json)
}

fn spectrum(a: &SpectrumArgs, stage: &mut Stage) -> Result<()> {
    let g = load_graph_dir(&a.graph)?;
    let s = spectral_cache(&g)?;
    stage.write(&a.out, |w| Ok(write_spectrum_csv(&s, w)?))
}

fn pmi_compare(a: &PmiCompareArgs, stage: &mut Stage) -> Result<()> {
    let g = load_graph_dir(&a.graph)?;
    let cfg = PmiConfig::new(a.window).with_ramp(a.ramp.resolve(a.epsilon));
    cfg.validate()?;
    let exact = pmi_exact(&g, &cfg)?;
    let limit = pmi_limit(&spectral_cache(&g)?)?;
    let approx = pmi_approx(&limit, &cfg)?;
    let report = approx_error_report(&exact, &approx)?;
    let mut out = serde_json::to_value(&report)?;
    out["n"] = json!(g.n());
    out["epsilon"] = json!(cfg.ramp.floor());
    out["ramped_exact"] = json!(exact.ramped_count());
    out["ramped_approx"] = json!(approx.ramped_count());
    write_json(stage, &a.out, &out)
}

fn pmi_empirical(a: &PmiEmpiricalArgs, stage: &mut Stage) -> Result<()> {
    let g = load_graph_dir(&a.graph)?;
    let wcfg = WalkConfig { walks_per_node: a.gamma, walk_length: a.len, window: a.window, seed: a.seed };
    let est = empirical_pmi(&g, &wcfg)?;
    let exact = pmi_exact(&g, &PmiConfig::new(a.window))?;
    let deviation = est.max_abs_deviation_unramped(&exact)?;
    let report = approx_error_report(&exact, &est)?;
    match a.format {
        MatrixFormat::Bin => {
            stage.write(&a.out, |w| Ok(iwio::write_matrix_binary(est.values.as_array(), w)?))?;
            stage.write_bytes(&with_suffix(&a.out, ".sidecar"), iwio::pmi_sidecar(&est).as_bytes())?;
        }
        MatrixFormat::Csv => {
            stage.write(&a.out, |w| Ok(iwio::write_matrix_csv(est.values.as_array(), w)?))?;
        }
    }
    let out = json!({
        "n": g.n(),
        "T": a.window,
        "gamma": a.gamma,
        "len": a.len,
        "seed": a.seed,
        "max_abs_deviation_unramped": deviation,
        "relative_frobenius_error": report.relative_frobenius_error,
        "ramped_disagreement_fraction": report.ramped_disagreement_fraction,
    });
    write_json(stage, &with_suffix(&a.out, ".report.json"), &out)
}

fn embed_cmd(a: &EmbedArgs, stage: &mut Stage) -> Result<()> {
    let g = load_graph_dir(&a.graph)?;
    let cfg = EmbedConfig::new(a.d, a.method());
    cfg.validate(g.n())?;
    let emb = match cfg.method {
        EmbedMethod::InfiniteWalk { .. } | EmbedMethod::LimitRaw => embed_with_cache(&spectral_cache(&g)?, &cfg)?,
        _ => infinitewalk::embed(&g, &cfg)?,
    };
    match a.format {
        EmbeddingFormat::Text => stage.write(&a.out, |w| Ok(iwio::write_embedding_text(g.names(), &emb, w)?)),
        EmbeddingFormat::Bin => {
            stage.write(&a.out, |w| Ok(iwio::write_matrix_binary(&emb.vectors, w)?))?;
            stage.write_bytes(&with_suffix(&a.out, ".sidecar"), iwio::embedding_sidecar(&emb).as_bytes())?;
            stage.write(&with_suffix(&a.out, ".names"), |w| Ok(iwio::write_names(&g, w)?))
        }
    }
}

fn evaluate(a: &EvaluateArgs, stage: &mut Stage) -> Result<()> {
    let (names, vectors) = iwio::read_embedding_text(open(&a.embedding)?)
        .with_context(|| format!("parsing {}", a.embedding.display()))?;
    let labels = load_labels(open(&a.labels)?, &names).with_context(|| format!("parsing {}", a.labels.display()))?;
    let cfg = EvalConfig { train_ratios: a.ratios.clone(), repeats: a.repeats, c: a.c, seed: a.seed, ..EvalConfig::default() };
    let method = a.method.clone().unwrap_or_else(|| {
        a.embedding.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "embedding".into())
    });
    let report = evaluate_sweep(vectors.view(), &labels, &cfg, &method)?;
    if a.out.extension().is_some_and(|e| e == "json") {
        write_json(stage, &a.out, &report)
    } else {
        stage.write(&a.out, |w| Ok(report.write_csv(w)?))
    }
}
