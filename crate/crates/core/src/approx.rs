// SPDX-License-Identifier: Apache-2.0

//! Approximation driver: decompose for every candidate threshold, score
//! every core with the exact objective, keep the best.
//!
//! Also hosts the single-layer greedy peeling baseline and the closed-form
//! guarantee calculators used to certify results.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use serde::Serialize;
use serde_json::{json, Value};

use crate::density::{self, best_layer_prefix, drop_term, pow_term, LayerDensity};
use crate::error::{invalid, Error, Result};
use crate::firmcore::{certificate_layers, decompose_with, CoreIndex};
use crate::graph::{LayerId, MultiplexGraph, NodeId, NodeSet};
use crate::params::{PValue, Params};

/// A node set together with its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseResult {
    pub nodes: NodeSet,
    pub rho_value: f64,
    pub chosen_layers: Vec<LayerId>,
    pub provenance: String,
}

impl DenseResult {
    pub fn evaluate(g: &MultiplexGraph, nodes: NodeSet, params: &Params, provenance: String) -> Result<Self> {
        let r = density::rho(g, &nodes, params)?;
        Ok(DenseResult { nodes, rho_value: r.value, chosen_layers: r.chosen_layers, provenance })
    }
}

#[derive(Debug, Clone)]
pub struct ApproxResult {
    pub best: DenseResult,
    pub lambda_used: f64,
    pub k_used: u64,
    /// Exponent of the peeling that produced the core. For `p < 1` the
    /// cores of the 1-mean peeling are scored too.
    pub peel_p: PValue,
    /// Number of `(lambda, k)` cores scored.
    pub candidates_evaluated: usize,
    pub wall_time: Duration,
}

/// All subset sums of at most `alpha` layer weights, ascending, with
/// near-equal sums merged and nonpositive sums dropped.
pub fn candidate_lambdas(weights: &[f64], alpha: usize, eps: f64) -> Result<Vec<f64>> {
    if alpha < 1 || alpha > weights.len() {
        return Err(invalid(format!("alpha must be in 1..={}, got {alpha}", weights.len())));
    }
    let mut sums = Vec::new();
    fn walk(w: &[f64], start: usize, left: usize, acc: f64, out: &mut Vec<f64>) {
        for i in start..w.len() {
            let s = acc + w[i];
            out.push(s);
            if left > 1 {
                walk(w, i + 1, left - 1, s, out);
            }
        }
    }
    walk(weights, 0, alpha, 0.0, &mut sums);
    sums.retain(|&s| s > 0.0);
    sums.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(sums.len());
    for s in sums {
        match out.last() {
            Some(&last) if s - last <= eps * last.abs().max(1.0) => {}
            _ => out.push(s),
        }
    }
    Ok(out)
}

/// Running per-layer density of a growing node set.
struct ShellAccumulator<'g> {
    g: &'g MultiplexGraph,
    p: PValue,
    inside: Vec<bool>,
    deg: Vec<u32>,
    members: Vec<NodeId>,
    zeros: Vec<usize>,
    sums: Vec<f64>,
    maxdeg: Vec<u32>,
}

impl<'g> ShellAccumulator<'g> {
    fn new(g: &'g MultiplexGraph, p: PValue) -> Self {
        let nl = g.num_layers();
        ShellAccumulator {
            g,
            p,
            inside: vec![false; g.num_nodes()],
            deg: vec![0; g.num_nodes() * nl],
            members: Vec::new(),
            zeros: vec![0; nl],
            sums: vec![0.0; nl],
            maxdeg: vec![0; nl],
        }
    }

    fn contribution(&self, d: u32) -> (usize, f64) {
        match self.p {
            PValue::Finite(_) if d == 0 => (1, 0.0),
            PValue::Finite(0.0) => (0, (d as f64).ln()),
            PValue::Finite(1.0) => (0, d as f64),
            PValue::Finite(p) => (0, (d as f64).powf(p)),
            _ => (0, 0.0),
        }
    }

    fn set_degree(&mut self, u: NodeId, l: LayerId, d: u32) {
        let nl = self.g.num_layers();
        let i = u as usize * nl + l;
        let (z0, s0) = self.contribution(self.deg[i]);
        let (z1, s1) = self.contribution(d);
        self.zeros[l] = self.zeros[l] + z1 - z0;
        self.sums[l] += s1 - s0;
        self.deg[i] = d;
        self.maxdeg[l] = self.maxdeg[l].max(d);
    }

    fn add(&mut self, u: NodeId) {
        let nl = self.g.num_layers();
        self.inside[u as usize] = true;
        self.members.push(u);
        for l in 0..nl {
            let (z, s) = self.contribution(0);
            self.zeros[l] += z;
            self.sums[l] += s;
            let mut du = 0;
            for &v in self.g.neighbors(u, l) {
                if self.inside[v as usize] && v != u {
                    du += 1;
                    let dv = self.deg[v as usize * nl + l];
                    self.set_degree(v, l, dv + 1);
                }
            }
            self.set_degree(u, l, du);
        }
    }

    fn omega(&self, l: LayerId) -> f64 {
        let n = self.members.len() as f64;
        let nl = self.g.num_layers();
        match self.p {
            PValue::PosInf => self.maxdeg[l] as f64,
            PValue::NegInf => {
                self.members.iter().map(|&u| self.deg[u as usize * nl + l]).min().unwrap_or(0) as f64
            }
            PValue::Finite(p) => {
                if p <= 0.0 && self.zeros[l] > 0 {
                    0.0
                } else if p == 0.0 {
                    (self.sums[l] / n).exp()
                } else if p == 1.0 {
                    self.sums[l] / n
                } else {
                    (self.sums[l] / n).max(0.0).powf(1.0 / p)
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
struct LambdaBest {
    lambda: f64,
    k: u64,
    peel_p: PValue,
    value: f64,
    nodes: NodeSet,
    evaluated: usize,
}

/// Densest core of one decomposition, scanning every nonempty level `k >= 1`.
fn densest_core(g: &MultiplexGraph, ci: &CoreIndex, params: &Params) -> Option<LambdaBest> {
    let weights = g.weights();
    let mut by_core: Vec<NodeId> = g.nodes().collect();
    by_core.sort_by(|&a, &b| ci.core_of[b as usize].cmp(&ci.core_of[a as usize]).then(a.cmp(&b)));
    let mut acc = ShellAccumulator::new(g, params.p);
    let mut best: Option<(f64, u64, usize)> = None;
    let mut evaluated = 0;
    let mut i = 0;
    let mut xi = vec![0.0; g.num_layers()];
    while i < by_core.len() {
        let k = ci.core_of[by_core[i] as usize];
        if k == 0 {
            break;
        }
        while i < by_core.len() && ci.core_of[by_core[i] as usize] == k {
            acc.add(by_core[i]);
            i += 1;
        }
        for (l, x) in xi.iter_mut().enumerate() {
            *x = acc.omega(l) * weights[l];
        }
        let v = best_layer_prefix(&xi, &weights, params.beta).value;
        evaluated += 1;
        if best.is_none_or(|(b, _, _)| v > b) {
            best = Some((v, k, i));
        }
    }
    best.map(|(value, k, len)| LambdaBest {
        lambda: ci.lambda,
        k,
        peel_p: ci.p,
        value,
        nodes: NodeSet::new(by_core[..len].iter().copied(), g.num_nodes()).unwrap(),
        evaluated,
    })
}

/// Below p = 1 the peeling scores degrade (every nonisolated node floors to
/// level 0 once p < 0), so the 1-mean cores are scored as well.
fn needs_linear_peel(p: PValue) -> bool {
    match p {
        PValue::NegInf => true,
        PValue::Finite(x) => x < 1.0,
        PValue::PosInf => false,
    }
}

fn run_lambda(g: &MultiplexGraph, lambda: f64, params: &Params) -> Result<(Option<LambdaBest>, usize)> {
    let ci = decompose_with(g, lambda, params)?;
    let mut best = densest_core(g, &ci, params);
    let mut n = best.as_ref().map_or(0, |b| b.evaluated);
    if needs_linear_peel(params.p) {
        let linear = Params { p: PValue::Finite(1.0), ..*params };
        let ci = decompose_with(g, lambda, &linear)?;
        if let Some(r) = densest_core(g, &ci, params) {
            n += r.evaluated;
            match &best {
                Some(b) if r.value <= b.value + params.tol(b.value) => {}
                _ => best = Some(r),
            }
        }
    }
    Ok((best, n))
}

#[cfg(feature = "parallel")]
fn map_lambdas(
    g: &MultiplexGraph,
    lambdas: &[f64],
    params: &Params,
    workers: usize,
) -> Result<Vec<(Option<LambdaBest>, usize)>> {
    use rayon::prelude::*;
    if workers == 1 {
        return lambdas.iter().map(|&l| run_lambda(g, l, params)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| invalid(format!("thread pool: {e}")))?;
    pool.install(|| lambdas.par_iter().map(|&l| run_lambda(g, l, params)).collect())
}

#[cfg(not(feature = "parallel"))]
fn map_lambdas(
    g: &MultiplexGraph,
    lambdas: &[f64],
    params: &Params,
    _workers: usize,
) -> Result<Vec<(Option<LambdaBest>, usize)>> {
    lambdas.iter().map(|&l| run_lambda(g, l, params)).collect()
}

// wasm32-unknown-unknown has no clock; wall time is then reported as zero
#[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
fn clock() -> Option<Instant> {
    Some(Instant::now())
}

#[cfg(all(target_arch = "wasm32", target_os = "unknown"))]
fn clock() -> Option<Instant> {
    None
}

/// Approximate densest subgraph with default worker count.
pub fn approx_densest(g: &MultiplexGraph, params: &Params) -> Result<ApproxResult> {
    approx_densest_with(g, params, 0)
}

/// `workers = 0` lets the thread pool pick; `1` runs sequentially.
pub fn approx_densest_with(g: &MultiplexGraph, params: &Params, workers: usize) -> Result<ApproxResult> {
    let start = clock();
    params.validate()?;
    if g.num_nodes() == 0 {
        return Err(Error::EmptySet);
    }
    if g.num_layers() == 0 {
        return Err(invalid("graph has no layers"));
    }
    if !(g.total_weight() > 0.0) {
        return Err(invalid("all layer weights are zero"));
    }
    let alpha = params.alpha.min(g.num_layers());
    let lambdas = candidate_lambdas(&g.weights(), alpha, params.eps)?;
    let results = map_lambdas(g, &lambdas, params, workers)?;

    let mut evaluated = 0;
    let mut best: Option<LambdaBest> = None;
    // ascending lambda; a later candidate must win by more than the tolerance
    for (r, n) in results {
        evaluated += n;
        if let Some(r) = r {
            match &mut best {
                None => best = Some(r),
                Some(b) if r.value > b.value + params.tol(b.value) => *b = r,
                // same core at a larger threshold: report the maximal lambda
                Some(b) if r.nodes == b.nodes && r.peel_p == b.peel_p => {
                    b.lambda = r.lambda;
                    b.k = r.k;
                }
                Some(_) => {}
            }
        }
    }
    let (nodes, lambda, k, peel_p) = match best {
        Some(b) => (b.nodes, b.lambda, b.k, b.peel_p),
        // every core is empty above level 0
        None => (g.all_nodes(), lambdas[0], 0, params.p),
    };
    let provenance = if peel_p == params.p {
        format!("gfirmcore lambda={lambda} k={k}")
    } else {
        format!("gfirmcore lambda={lambda} k={k} peel_p={peel_p}")
    };
    let best = DenseResult::evaluate(g, nodes, params, provenance)?;
    Ok(ApproxResult {
        best,
        lambda_used: lambda,
        k_used: k,
        peel_p,
        candidates_evaluated: evaluated,
        wall_time: start.map_or(Duration::ZERO, |t| t.elapsed()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64, NodeId);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Greedy peeling inside one layer: repeatedly drop the node of smallest
/// delta and keep the intermediate set of largest p-mean density. For
/// `p >= 1` this is within `(p + 1)^(1/p)` of the layer's optimum.
pub fn peel_single_layer(g: &MultiplexGraph, layer: LayerId, params: &Params) -> Result<DenseResult> {
    let p = match params.p {
        PValue::Finite(p) if p >= 1.0 => p,
        other => return Err(invalid(format!("single-layer peeling needs finite p >= 1, got {other}"))),
    };
    if layer >= g.num_layers() {
        return Err(invalid(format!("layer id {layer} out of range")));
    }
    let n = g.num_nodes();
    if n == 0 {
        return Err(Error::EmptySet);
    }
    let mut alive = vec![true; n];
    let mut deg: Vec<u32> = g.nodes().map(|u| g.neighbors(u, layer).len() as u32).collect();
    let mut psi: Vec<f64> = g
        .nodes()
        .map(|u| {
            let mut d = pow_term(deg[u as usize], p).fin;
            for &v in g.neighbors(u, layer) {
                d += drop_term(deg[v as usize], p).fin;
            }
            d
        })
        .collect();
    let mut numer: f64 = deg.iter().map(|&d| pow_term(d, p).fin).sum();
    let mut queue: BTreeSet<Key> = g.nodes().map(|u| Key(psi[u as usize], u)).collect();
    let mut removed: Vec<NodeId> = Vec::with_capacity(n);
    let mut best = ((numer / n as f64).powf(1.0 / p), 0usize);
    let mut size = n;

    while size > 1 {
        let Key(_, v) = queue.pop_first().unwrap();
        alive[v as usize] = false;
        removed.push(v);
        size -= 1;
        let dv = deg[v as usize];
        numer -= pow_term(dv, p).fin;
        for &u in g.neighbors(v, layer) {
            if !alive[u as usize] {
                continue;
            }
            let old = deg[u as usize];
            let new = old - 1;
            numer += pow_term(new, p).fin - pow_term(old, p).fin;
            let change = -drop_term(dv, p).fin + pow_term(new, p).fin - pow_term(old, p).fin;
            if new >= 1 {
                let c = drop_term(new, p).fin - drop_term(old, p).fin;
                for &x in g.neighbors(u, layer) {
                    if alive[x as usize] && x != u {
                        queue.remove(&Key(psi[x as usize], x));
                        psi[x as usize] += c;
                        queue.insert(Key(psi[x as usize], x));
                    }
                }
            }
            queue.remove(&Key(psi[u as usize], u));
            psi[u as usize] += change;
            queue.insert(Key(psi[u as usize], u));
            deg[u as usize] = new;
        }
        let omega = (numer.max(0.0) / size as f64).powf(1.0 / p);
        if omega > best.0 {
            best = (omega, removed.len());
        }
    }
    let mut gone = vec![false; n];
    for &v in &removed[..best.1] {
        gone[v as usize] = true;
    }
    let nodes = NodeSet::new(g.nodes().filter(|&u| !gone[u as usize]), n)?;
    DenseResult::evaluate(g, nodes, params, format!("single-layer peel layer={}", g.layer_name(layer)))
}

/// Which closed-form guarantee to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Guarantee {
    /// Valid for `p >= 1`.
    PAtLeastOne,
    /// Valid for `-inf <= p <= 1`; half of the former at the same point.
    PAtMostOne,
}

impl Guarantee {
    pub fn applies(self, p: PValue) -> bool {
        match (self, p) {
            (Guarantee::PAtLeastOne, PValue::PosInf) => true,
            (Guarantee::PAtLeastOne, PValue::Finite(x)) => x >= 1.0,
            (Guarantee::PAtMostOne, PValue::NegInf) => true,
            (Guarantee::PAtMostOne, PValue::Finite(x)) => x <= 1.0,
            _ => false,
        }
    }
}

/// Reciprocal exponent `1/p` used by the closed forms. For `p <= 0` the
/// guarantee is routed through the `p = 1` solution, so the `p = 1`
/// exponent is used.
fn guarantee_inv_p(p: PValue) -> f64 {
    match p {
        PValue::PosInf => 0.0,
        PValue::Finite(x) if x > 0.0 => 1.0 / x,
        _ => 1.0,
    }
}

/// Guaranteed lower bound on `rho(found) / rho(optimal)`.
pub fn theoretical_ratio(
    params: &Params,
    guarantee: Guarantee,
    lambda_plus: f64,
    w_min: f64,
    w_max: f64,
    w_star: f64,
) -> Result<f64> {
    for (name, x) in [("lambda", lambda_plus), ("w_min", w_min), ("w_max", w_max), ("w_star", w_star)] {
        if !(x > 0.0) || !x.is_finite() {
            return Err(invalid(format!("{name} must be finite and > 0, got {x}")));
        }
    }
    if !guarantee.applies(params.p) {
        return Err(invalid(format!("{guarantee:?} does not cover p = {}", params.p)));
    }
    let e = guarantee_inv_p(params.p);
    let beta = params.beta;
    // (p+1)^(1/p), with the p -> inf limit 1
    let peel = match params.p {
        PValue::PosInf => 1.0,
        PValue::Finite(x) if x > 0.0 => (x + 1.0).powf(e),
        _ => 2.0,
    };
    let top = w_min * lambda_plus.powf(e).max(lambda_plus.powf(beta * e));
    let bottom = w_max * w_star.powf(beta + e);
    let r = top / (peel * bottom);
    Ok(match guarantee {
        Guarantee::PAtLeastOne => r,
        Guarantee::PAtMostOne => r / 2.0,
    })
}

fn core_bound_inputs(k: u64, lambda: f64, params: &Params, w_min: f64, w_star: f64) -> Result<f64> {
    let p = match params.p {
        PValue::Finite(p) if p >= 1.0 => p,
        other => return Err(invalid(format!("core density bound needs finite p >= 1, got {other}"))),
    };
    if k < 1 || !(lambda > 0.0) || !(w_min > 0.0) || !(w_star > 0.0) {
        return Err(invalid("core density bound needs k >= 1 and positive lambda and weights"));
    }
    Ok(p)
}

/// Closed-form lower bound on `rho` of a `(k, lambda, p)`-core, with `k`
/// read as a bound on the numerator contribution of each node:
/// `k^(1/p) * w_min / w*^(1/p) * max(lambda^(1/p), lambda^(beta/p))`.
pub fn core_bound_literal(k: u64, lambda: f64, params: &Params, w_min: f64, w_star: f64) -> Result<f64> {
    let p = core_bound_inputs(k, lambda, params, w_min, w_star)?;
    let e = 1.0 / p;
    Ok((k as f64).powf(e) * w_min / w_star.powf(e) * lambda.powf(e).max(lambda.powf(params.beta * e)))
}

/// The same bound for core levels measured in unnormalized deltas. The
/// deltas of a set sum to at most `(p + 1)` times its numerator, so the
/// level is scaled by `1 / (p + 1)` first.
pub fn core_bound(k: u64, lambda: f64, params: &Params, w_min: f64, w_star: f64) -> Result<f64> {
    let p = core_bound_inputs(k, lambda, params, w_min, w_star)?;
    let e = 1.0 / p;
    let level = k as f64 / (p + 1.0);
    Ok(level.powf(e) * w_min / w_star.powf(e) * lambda.powf(e).max(lambda.powf(params.beta * e)))
}

/// Certificate attached to a result.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub lambda_plus: f64,
    pub k_plus: u64,
    /// Smallest weight among the layers the returned core uses to reach lambda.
    pub w_min: f64,
    pub w_max: f64,
    pub w_star: f64,
    pub certificate_layers: Vec<String>,
    pub ratio_p_at_least_one: Option<f64>,
    pub ratio_p_at_most_one: Option<f64>,
    pub core_lower_bound: Option<f64>,
    pub note: &'static str,
}

pub fn bound_report(g: &MultiplexGraph, res: &ApproxResult, params: &Params) -> Result<BoundReport> {
    let weights = g.weights();
    let w_max = weights.iter().copied().fold(0.0, f64::max);
    let w_star = g.total_weight();
    let global_min = weights.iter().copied().filter(|&w| w > 0.0).fold(f64::INFINITY, f64::min);
    let cert = if res.k_used >= 1 {
        let peel = Params { p: res.peel_p, ..*params };
        certificate_layers(g, &res.best.nodes, res.k_used, res.lambda_used, &peel)
    } else {
        Vec::new()
    };
    let w_min = cert.iter().map(|&l| weights[l]).fold(f64::INFINITY, f64::min);
    let w_min = if w_min.is_finite() { w_min } else { global_min };
    let ratio = |gu| theoretical_ratio(params, gu, res.lambda_used, w_min, w_max, w_star).ok();
    Ok(BoundReport {
        lambda_plus: res.lambda_used,
        k_plus: res.k_used,
        w_min,
        w_max,
        w_star,
        certificate_layers: cert.iter().map(|&l| g.layer_name(l).to_string()).collect(),
        ratio_p_at_least_one: ratio(Guarantee::PAtLeastOne),
        ratio_p_at_most_one: ratio(Guarantee::PAtMostOne),
        core_lower_bound: core_bound(res.k_used, res.lambda_used, params, w_min, w_star).ok(),
        note: "lambda_plus/k_plus are those of the returned core; w_max is the global maximum weight",
    })
}

fn layer_table(g: &MultiplexGraph, ds: &[LayerDensity]) -> Vec<Value> {
    ds.iter().map(|d| json!({"layer": g.layer_name(d.layer), "omega": d.omega, "xi": d.xi})).collect()
}

/// Result document. Timing is left out when `timing` is false so that
/// repeated runs are byte-identical.
pub fn result_document(
    g: &MultiplexGraph,
    res: &DenseResult,
    params: &Params,
    extra: Value,
) -> Result<Value> {
    let ds = density::layer_densities(g, &res.nodes, params.p)?;
    let mut doc = json!({
        "nodes": res.nodes.iter().map(|u| g.label(u)).collect::<Vec<_>>(),
        "size": res.nodes.len(),
        "rho": res.rho_value,
        "chosen_layers": res.chosen_layers.iter().map(|&l| g.layer_name(l)).collect::<Vec<_>>(),
        "layer_densities": layer_table(g, &ds),
        "edge_density": density::edge_density(g, &res.nodes),
        "params": {"p": params.p.to_string(), "beta": params.beta, "alpha": params.alpha},
        "provenance": res.provenance,
    });
    if let (Value::Object(d), Value::Object(e)) = (&mut doc, extra) {
        d.extend(e);
    }
    Ok(doc)
}

pub fn approx_document(
    g: &MultiplexGraph,
    res: &ApproxResult,
    params: &Params,
    timing: bool,
) -> Result<Value> {
    let mut extra = json!({
        "lambda": res.lambda_used,
        "k": res.k_used,
        "peel_p": res.peel_p.to_string(),
        "candidates_evaluated": res.candidates_evaluated,
    });
    if timing {
        extra["timing_ms"] = json!(res.wall_time.as_secs_f64() * 1e3);
    }
    result_document(g, &res.best, params, extra)
}
