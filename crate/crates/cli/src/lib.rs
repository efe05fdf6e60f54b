// SPDX-License-Identifier: Apache-2.0

//! Command implementations behind the `mplex` binary.
//!
//! Exit codes: 2 for unreadable or malformed input (including unknown node
//! labels), 3 for invalid parameters, 4 when an exact run exceeds the
//! oracle's size cap.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mplex::approx::{self, approx_densest_with, bound_report};
use mplex::density;
use mplex::firmcore::decompose_with;
use mplex::graph::{read_graph_files, write_container};
use mplex::oracle::exact_densest;
use mplex::synth::{self, GenSpec, LayerWeights, PlantMode};
use mplex::{Error, MultiplexGraph, PValue, Params};
use serde_json::json;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_PARAM: i32 = 3;
pub const EXIT_CAP: i32 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. }
            | Error::SelfLoop { .. }
            | Error::NegativeWeight { .. }
            | Error::UnknownLayer { .. }
            | Error::UnknownNode(_)
            | Error::Io(_) => EXIT_INPUT,
            Error::OverCap { .. } => EXIT_CAP,
            _ => EXIT_PARAM,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::from(e).into()
    }
}

fn param_error(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_PARAM, message: msg.into() }
}

type CmdResult<T = ()> = std::result::Result<T, Failure>;

#[derive(Parser, Debug)]
#[command(name = "mplex", version, about = "p-mean densest subgraphs of weighted multiplex graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Core decomposition for one threshold.
    Decompose(DecomposeArgs),
    /// Approximate (or exact) densest subgraph.
    Densest(DensestArgs),
    /// Synthetic graph with a planted dense subgraph.
    Gen(GenArgs),
    /// Objective value of a given node set.
    Eval(EvalArgs),
    /// CSV of size, densities and runtime over several p.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
pub struct GraphArgs {
    /// Edge list ("u v layer" per line) or "#mplex v1" container.
    #[arg(long)]
    pub graph: PathBuf,
    /// Layer weights ("layer weight" per line); missing layers weigh 1.
    #[arg(long)]
    pub weights: Option<PathBuf>,
}

impl GraphArgs {
    fn load(&self) -> CmdResult<MultiplexGraph> {
        let loaded = read_graph_files(&self.graph, self.weights.as_deref())?;
        if loaded.duplicates_merged > 0 {
            eprintln!("note: merged {} duplicate edges", loaded.duplicates_merged);
        }
        Ok(loaded.graph)
    }
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub input: GraphArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: f64,
    /// neg_inf, inf, or a real number.
    #[arg(long, default_value = "1", allow_negative_numbers = true)]
    pub p: PValue,
    /// Core index destination; printed after the summary when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the compact binary index instead of text.
    #[arg(long, requires = "out")]
    pub binary: bool,
}

#[derive(Args, Debug)]
pub struct DensestArgs {
    #[command(flatten)]
    pub input: GraphArgs,
    #[arg(long, default_value = "1", allow_negative_numbers = true)]
    pub p: PValue,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, default_value_t = 10)]
    pub alpha: usize,
    /// 0 picks the number of cores; 1 runs sequentially.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Result document destination (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exhaustive search instead of the approximation (small graphs only).
    #[arg(long)]
    pub exact: bool,
    /// Attach the guarantee certificate to the document.
    #[arg(long)]
    pub bound_report: bool,
    /// Also write the node labels, one per line.
    #[arg(long)]
    pub nodes_out: Option<PathBuf>,
    /// Leave wall time out of the document so reruns are byte-identical.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    S1,
    S2,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlantArg {
    Clique,
    AvgDegree,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Start from a protocol preset; other flags override it.
    #[arg(long)]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Background edges over all layers.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub plant: Option<PlantArg>,
    #[arg(long)]
    pub plant_size: Option<usize>,
    /// Multiplier over the background edge probability for avg-degree plants.
    #[arg(long)]
    pub factor: Option<f64>,
    /// Comma-separated per-layer weights.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    /// Zero-based layer that gets background edges only.
    #[arg(long)]
    pub noisy_layer: Option<usize>,
    /// Container destination.
    #[arg(long)]
    pub out: PathBuf,
    /// Planted-set sidecar; defaults to `<out>.planted`.
    #[arg(long)]
    pub planted: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: GraphArgs,
    /// Whitespace-separated node labels.
    #[arg(long)]
    pub nodes: PathBuf,
    #[arg(long, default_value = "1", allow_negative_numbers = true)]
    pub p: PValue,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub beta: f64,
    /// Print a JSON document instead of the table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: GraphArgs,
    /// Comma-separated exponents.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "neg_inf,-1,0,1,2,inf",
        allow_negative_numbers = true
    )]
    pub p: Vec<PValue>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, default_value_t = 10)]
    pub alpha: usize,
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parameters with the `MPLEX_EPS` override applied.
pub fn make_params(p: PValue, beta: f64, alpha: usize) -> CmdResult<Params> {
    let mut params = Params::new(p, beta).with_alpha(alpha);
    if let Ok(raw) = std::env::var("MPLEX_EPS") {
        let eps: f64 =
            raw.trim().parse().map_err(|_| param_error(format!("MPLEX_EPS is not a number: {raw:?}")))?;
        params = params.with_eps(eps);
    }
    params.validate()?;
    Ok(params)
}

fn output(path: Option<&Path>) -> CmdResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Decompose(a) => cmd_decompose(&a),
        Command::Densest(a) => cmd_densest(&a),
        Command::Gen(a) => cmd_gen(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Sweep(a) => cmd_sweep(&a),
    }
}

pub fn cmd_decompose(a: &DecomposeArgs) -> CmdResult {
    if a.lambda.is_nan() || a.lambda <= 0.0 || a.lambda.is_infinite() {
        return Err(param_error(format!("lambda must be finite and > 0, got {}", a.lambda)));
    }
    let params = make_params(a.p, 0.0, 1)?;
    let g = a.input.load()?;
    let ci = decompose_with(&g, a.lambda, &params)?;

    let mut out = io::stdout().lock();
    writeln!(out, "max_k\t{}", ci.max_k)?;
    writeln!(out, "level\tnodes\tcore_size")?;
    let hist = ci.histogram();
    let mut size: usize = hist.iter().map(|&(_, c)| c).sum();
    for (k, count) in hist {
        writeln!(out, "{k}\t{count}\t{size}")?;
        size -= count;
    }
    if ci.non_monotone_updates > 0 {
        eprintln!("note: {} score increases during peeling", ci.non_monotone_updates);
    }
    match &a.out {
        Some(path) if a.binary => fs::write(path, ci.to_bytes())?,
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            ci.write_text(&g, &mut w)?;
            w.flush()?;
        }
        None => {
            writeln!(out)?;
            ci.write_text(&g, &mut out)?;
        }
    }
    Ok(())
}

pub fn cmd_densest(a: &DensestArgs) -> CmdResult {
    let params = make_params(a.p, a.beta, a.alpha)?;
    let g = a.input.load()?;
    let (doc, nodes) = if a.exact {
        let res = exact_densest(&g, &params)?;
        let doc = approx::result_document(&g, &res, &params, json!({}))?;
        (doc, res.nodes)
    } else {
        let res = approx_densest_with(&g, &params, a.workers)?;
        let mut doc = approx::approx_document(&g, &res, &params, !a.no_timing)?;
        if a.bound_report {
            doc["bound_report"] = serde_json::to_value(bound_report(&g, &res, &params)?)
                .map_err(|e| param_error(e.to_string()))?;
        }
        (doc, res.best.nodes)
    };
    let mut out = output(a.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| Failure::from(io::Error::from(e)))?;
    writeln!(out)?;
    out.flush()?;
    if let Some(path) = &a.nodes_out {
        let mut w = BufWriter::new(File::create(path)?);
        for u in nodes.iter() {
            writeln!(w, "{}", g.label(u))?;
        }
        w.flush()?;
    }
    if a.out.is_some() {
        println!("rho\t{}", doc["rho"]);
        println!("size\t{}", doc["size"]);
    }
    Ok(())
}

fn gen_spec(a: &GenArgs) -> CmdResult<GenSpec> {
    let mut spec = match a.preset {
        Some(Preset::S1) => GenSpec::s1(a.seed),
        Some(Preset::S2) => GenSpec::s2(a.seed),
        None => GenSpec {
            n: 100,
            m: 1000,
            layers: 2,
            seed: a.seed,
            plant_mode: PlantMode::Clique,
            plant_size: 0,
            weights: LayerWeights::Uniform,
            noisy_layer: None,
        },
    };
    if let Some(n) = a.n {
        spec.n = n;
    }
    if let Some(m) = a.m {
        spec.m = m;
    }
    if let Some(l) = a.layers {
        spec.layers = l;
    }
    if let Some(s) = a.plant_size {
        spec.plant_size = s;
    }
    let factor = match (spec.plant_mode, a.factor) {
        (_, Some(f)) => f,
        (PlantMode::AvgDegree { factor }, None) => factor,
        (PlantMode::Clique, None) => 3.0,
    };
    match a.plant {
        Some(PlantArg::Clique) => spec.plant_mode = PlantMode::Clique,
        Some(PlantArg::AvgDegree) => spec.plant_mode = PlantMode::AvgDegree { factor },
        None => {
            if let PlantMode::AvgDegree { .. } = spec.plant_mode {
                spec.plant_mode = PlantMode::AvgDegree { factor };
            }
        }
    }
    if let Some(w) = &a.weights {
        spec.weights = LayerWeights::Explicit(w.clone());
    }
    spec.noisy_layer = a.noisy_layer;
    Ok(spec)
}

pub fn cmd_gen(a: &GenArgs) -> CmdResult {
    let spec = gen_spec(a)?;
    let (g, planted) = synth::generate(&spec)?;
    let mut w = BufWriter::new(File::create(&a.out)?);
    write_container(&g, &mut w)?;
    w.flush()?;
    let sidecar = a.planted.clone().unwrap_or_else(|| {
        let mut s = a.out.clone().into_os_string();
        s.push(".planted");
        PathBuf::from(s)
    });
    let mut w = BufWriter::new(File::create(&sidecar)?);
    synth::write_planted(&g, &planted, &mut w)?;
    w.flush()?;
    println!("nodes\t{}", g.num_nodes());
    println!("edges\t{}", g.total_edges());
    println!("planted\t{}", planted.len());
    Ok(())
}

pub fn cmd_eval(a: &EvalArgs) -> CmdResult {
    let params = make_params(a.p, a.beta, 1)?;
    let g = a.input.load()?;
    let text = fs::read_to_string(&a.nodes)?;
    let s = g.node_set_from_labels(text.split_whitespace())?;
    let r = density::rho(&g, &s, &params)?;
    let ds = density::layer_densities(&g, &s, params.p)?;
    let ed = density::edge_density(&g, &s);
    let mut out = io::stdout().lock();
    if a.json {
        let res = approx::DenseResult {
            nodes: s,
            rho_value: r.value,
            chosen_layers: r.chosen_layers,
            provenance: "eval".into(),
        };
        let doc = approx::result_document(&g, &res, &params, json!({}))?;
        serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| Failure::from(io::Error::from(e)))?;
        writeln!(out)?;
        return Ok(());
    }
    writeln!(out, "rho\t{}", r.value)?;
    let chosen: Vec<&str> = r.chosen_layers.iter().map(|&l| g.layer_name(l)).collect();
    writeln!(out, "chosen_layers\t{}", chosen.join(","))?;
    writeln!(out, "edge_density\t{ed}")?;
    writeln!(out, "layer\tweight\tomega\txi")?;
    for d in ds {
        writeln!(out, "{}\t{}\t{}\t{}", g.layer_name(d.layer), g.weight(d.layer), d.omega, d.xi)?;
    }
    Ok(())
}

pub fn cmd_sweep(a: &SweepArgs) -> CmdResult {
    let g = a.input.load()?;
    let mut out = output(a.out.as_deref())?;
    writeln!(out, "p,size,edge_density,multiplex_density,lambda,k,runtime_ms")?;
    for &p in &a.p {
        let params = make_params(p, a.beta, a.alpha)?;
        let start = Instant::now();
        let res = approx_densest_with(&g, &params, a.workers)?;
        let ms = start.elapsed().as_secs_f64() * 1e3;
        writeln!(
            out,
            "{p},{},{},{},{},{},{ms:.3}",
            res.best.nodes.len(),
            density::edge_density(&g, &res.best.nodes),
            res.best.rho_value,
            res.lambda_used,
            res.k_used
        )?;
    }
    out.flush()?;
    Ok(())
}
