// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Run with `cargo test -p mplex-cli --test acceptance`.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use mplex::approx::{
    approx_densest, approx_densest_with, approx_document, bound_report, candidate_lambdas, core_bound,
    result_document, ApproxResult,
};
use mplex::density::rho;
use mplex::firmcore::{certificate_layers, decompose, decompose_with, CoreIndex};
use mplex::oracle::{exact_core, exact_densest, exact_rho_subsets, firmcore_unweighted};
use mplex::synth::{generate, GenSpec};
use mplex::{GraphBuilder, MultiplexGraph, NodeSet, PValue, Params};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

const P_NEG_INF: PValue = PValue::NegInf;
const P_INF: PValue = PValue::PosInf;

fn fin(x: f64) -> PValue {
    PValue::Finite(x)
}

enum Weights {
    Unit,
    /// Uniform in (0, 2].
    Random,
}

/// Random multiplex graph; per-layer edge probability from [0.15, 0.85].
fn random_graph(seed: u64, max_n: usize, max_layers: usize, weights: Weights) -> MultiplexGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=max_n);
    let layers = rng.gen_range(1..=max_layers);
    let mut b = GraphBuilder::new();
    for u in 0..n {
        b.node(&format!("v{u}"));
    }
    for l in 0..layers {
        let id = b.layer(&format!("L{l}"));
        let w = match weights {
            Weights::Unit => 1.0,
            Weights::Random => 2.0 - 2.0 * rng.gen::<f64>(),
        };
        b.set_weight(id, w).unwrap();
        let q: f64 = rng.gen_range(0.15..0.85);
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                if rng.gen_bool(q) {
                    b.edge(u, v, id).unwrap();
                }
            }
        }
    }
    b.build().0
}

fn random_subset(rng: &mut ChaCha8Rng, n: usize) -> NodeSet {
    loop {
        let s = NodeSet::new((0..n as u32).filter(|_| rng.gen_bool(0.5)), n).unwrap();
        if !s.is_empty() {
            return s;
        }
    }
}

fn rel_eq(a: f64, b: f64, eps: f64) -> bool {
    (a - b).abs() <= eps * a.abs().max(b.abs()).max(1.0)
}

fn core_at(ci: &CoreIndex, k: u64) -> NodeSet {
    let n = ci.core_of.len();
    NodeSet::new((0..n as u32).filter(|&u| ci.core_of[u as usize] >= k), n).unwrap()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(elapsed: Duration, limit: Duration) -> (bool, String) {
    (elapsed < limit, format!("{:.2}s (limit {}s)", elapsed.as_secs_f64(), limit.as_secs()))
}

fn c1_rho_oracle() -> Outcome {
    let start = Instant::now();
    let ps = [P_NEG_INF, fin(-1.0), fin(0.0), fin(1.0), fin(2.0), P_INF];
    let betas = [0.0, 0.5, 1.0, 2.0];
    let (mut checks, mut bad) = (0, 0);
    for seed in 0..200u64 {
        let g = random_graph(seed, 10, 4, Weights::Random);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa11ce);
        let mut sets = vec![g.all_nodes()];
        sets.extend((0..4).map(|_| random_subset(&mut rng, g.num_nodes())));
        for s in &sets {
            for &p in &ps {
                for &beta in &betas {
                    let params = Params::new(p, beta);
                    let a = rho(&g, s, &params).unwrap().value;
                    let b = exact_rho_subsets(&g, s, &params).unwrap().value;
                    checks += 1;
                    if !rel_eq(a, b, 1e-9) {
                        bad += 1;
                    }
                }
            }
        }
    }
    let (fast, t) = within(start.elapsed(), Duration::from_secs(30));
    outcome(bad == 0 && fast, format!("{bad} mismatches in {checks} comparisons; {t}"))
}

fn c2_cores_oracle() -> Outcome {
    let start = Instant::now();
    let (mut checks, mut bad) = (0, 0);
    for seed in 0..100u64 {
        let g = random_graph(1000 + seed, 10, 4, Weights::Random);
        let lambdas = candidate_lambdas(&g.weights(), g.num_layers(), 1e-9).unwrap();
        for &p in &[P_NEG_INF, fin(0.0), fin(1.0)] {
            for &lam in &lambdas {
                let ci = decompose(&g, lam, p).unwrap();
                for k in 0..=ci.max_k + 1 {
                    let want = exact_core(&g, k, lam, p).unwrap();
                    checks += 1;
                    if core_at(&ci, k) != want {
                        bad += 1;
                    }
                }
            }
        }
    }
    let (fast, t) = within(start.elapsed(), Duration::from_secs(60));
    outcome(bad == 0 && fast, format!("{bad} mismatches in {checks} (k, lambda, p) cores; {t}"))
}

/// One approximation run of criterion 3, kept for criteria 6 and 10.
struct RatioRun {
    g: MultiplexGraph,
    params: Params,
    res: ApproxResult,
    exact: f64,
}

/// Weight transform applied to each instance before the runs.
enum Scale {
    Keep,
    /// Multiply all weights so the smallest positive one is 1. Objective
    /// ratios are unchanged by a common factor.
    MinToOne,
}

fn rescale(g: MultiplexGraph, scale: &Scale) -> MultiplexGraph {
    match scale {
        Scale::Keep => g,
        Scale::MinToOne => {
            let w = g.weights();
            let min = w.iter().copied().filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min);
            g.with_weights(&w.iter().map(|x| x / min).collect::<Vec<_>>()).unwrap()
        }
    }
}

fn ratio_runs(weights: fn() -> Weights, scale: Scale) -> Vec<RatioRun> {
    let ps = [fin(1.0), fin(2.0), P_NEG_INF, fin(-1.0), fin(0.0)];
    let mut runs = Vec::new();
    for seed in 0..100u64 {
        let g = rescale(random_graph(seed, 12, 4, weights()), &scale);
        for &p in &ps {
            for &beta in &[0.0, 0.5, 1.0, 2.0] {
                let params = Params::new(p, beta);
                let res = approx_densest(&g, &params).unwrap();
                let exact = exact_densest(&g, &params).unwrap().rho_value;
                runs.push(RatioRun { g: g.clone(), params, res, exact });
            }
        }
    }
    runs
}

#[derive(Default)]
struct RatioTally {
    checks: usize,
    below_bound: usize,
    /// Violations where the bound itself exceeds 1.
    bound_above_one: usize,
    above_one: usize,
    worst: BTreeMap<String, f64>,
}

fn tally_ratios(runs: &[RatioRun]) -> RatioTally {
    let mut t = RatioTally::default();
    for r in runs {
        let ratio = if r.exact > 0.0 { r.res.best.rho_value / r.exact } else { 1.0 };
        let w = t.worst.entry(r.params.p.to_string()).or_insert(f64::INFINITY);
        *w = w.min(ratio);
        if ratio > 1.0 + 1e-9 {
            t.above_one += 1;
        }
        let rep = bound_report(&r.g, &r.res, &r.params).unwrap();
        let p = r.params.p;
        let p_at_least_one = matches!(p, PValue::Finite(x) if x == 1.0 || x == 2.0);
        let p_at_most_one = matches!(p, PValue::NegInf)
            || matches!(p, PValue::Finite(x) if x == -1.0 || x == 0.0 || x == 1.0);
        for (applies, bound) in
            [(p_at_least_one, rep.ratio_p_at_least_one), (p_at_most_one, rep.ratio_p_at_most_one)]
        {
            if !applies {
                continue;
            }
            let bound = bound.expect("guarantee defined for this p");
            t.checks += 1;
            if ratio < bound - 1e-9 {
                t.below_bound += 1;
                if bound > 1.0 {
                    t.bound_above_one += 1;
                }
            }
        }
    }
    t
}

fn describe_ratios(t: &RatioTally) -> String {
    let worst: Vec<String> = t.worst.iter().map(|(p, w)| format!("p={p}:{w:.3}")).collect();
    format!(
        "{} of {} below bound ({} of those with bound > 1), {} above 1; worst ratio {}",
        t.below_bound,
        t.checks,
        t.bound_above_one,
        t.above_one,
        worst.join(" ")
    )
}

#[derive(Default)]
struct CoreBoundTally {
    checks: usize,
    bad: usize,
    /// Violations where the bound exceeds the exact optimum of the instance.
    above_optimum: usize,
}

/// Checks the core bound on every `(lambda, k)` core the approximation
/// scores for `p >= 1`.
fn tally_core_bound(runs: &[RatioRun]) -> CoreBoundTally {
    let mut t = CoreBoundTally::default();
    for r in runs.iter().filter(|r| matches!(r.params.p, PValue::Finite(x) if x >= 1.0)) {
        let g = &r.g;
        let weights = g.weights();
        let w_star = g.total_weight();
        let global_min = weights.iter().copied().filter(|&w| w > 0.0).fold(f64::INFINITY, f64::min);
        for &lam in &candidate_lambdas(&weights, g.num_layers(), r.params.eps).unwrap() {
            let ci = decompose_with(g, lam, &r.params).unwrap();
            for k in ci.levels().into_iter().filter(|&k| k > 0) {
                let core = core_at(&ci, k);
                let cert = certificate_layers(g, &core, k, lam, &r.params);
                let w_min = cert.iter().map(|&l| weights[l]).fold(f64::INFINITY, f64::min);
                let w_min = if w_min.is_finite() { w_min } else { global_min };
                let bound = core_bound(k, lam, &r.params, w_min, w_star).unwrap();
                let value = rho(g, &core, &r.params).unwrap().value;
                t.checks += 1;
                if bound > value + 1e-9 {
                    t.bad += 1;
                    if bound > r.exact + 1e-9 {
                        t.above_optimum += 1;
                    }
                }
            }
        }
    }
    t
}

fn c4_firmcore_reduction() -> Outcome {
    let (mut checks, mut bad) = (0, 0);
    for seed in 0..50u64 {
        let g = random_graph(4000 + seed, 50, 4, Weights::Unit);
        for lam in 1..=g.num_layers() {
            let ci = decompose(&g, lam as f64, fin(1.0)).unwrap();
            for k in 0..=ci.max_k / 2 + 1 {
                checks += 1;
                if core_at(&ci, 2 * k) != firmcore_unweighted(&g, k as usize, lam) {
                    bad += 1;
                }
            }
        }
    }
    outcome(bad == 0, format!("{bad} mismatches in {checks} (k, lambda) pairs"))
}

fn c5_nesting() -> (Outcome, String) {
    let ladder = [P_NEG_INF, fin(-1.0), fin(0.0), fin(0.5), fin(1.0), fin(2.0), P_INF];
    let (mut k_checks, mut k_bad, mut l_checks, mut l_bad) = (0, 0, 0, 0);
    let mut non_monotone: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for seed in 0..50u64 {
        let g = random_graph(5000 + seed, 10, 4, Weights::Random);
        let lambdas = candidate_lambdas(&g.weights(), g.num_layers(), 1e-9).unwrap();
        for &p in &ladder {
            let cis: Vec<CoreIndex> = lambdas.iter().map(|&l| decompose(&g, l, p).unwrap()).collect();
            let mut levels: Vec<u64> = cis.iter().flat_map(|c| c.levels()).chain([0]).collect();
            levels.sort_unstable();
            levels.dedup();
            for ci in &cis {
                for w in levels.windows(2) {
                    k_checks += 1;
                    if !core_at(ci, w[1]).is_subset(&core_at(ci, w[0])) {
                        k_bad += 1;
                    }
                }
            }
            let monotone = !matches!(p, PValue::Finite(x) if x < 1.0);
            for pair in cis.windows(2) {
                for &k in &levels {
                    let nested = core_at(&pair[1], k).is_subset(&core_at(&pair[0], k));
                    if monotone {
                        l_checks += 1;
                        l_bad += usize::from(!nested);
                    } else {
                        let e = non_monotone.entry(p.to_string()).or_default();
                        e.0 += usize::from(!nested);
                        e.1 += 1;
                    }
                }
            }
        }
    }
    let info: Vec<String> = non_monotone.iter().map(|(p, (b, n))| format!("p={p}: {b}/{n}")).collect();
    (
        outcome(
            k_bad == 0 && l_bad == 0,
            format!("k: {k_bad} of {k_checks} violated (all p); lambda: {l_bad} of {l_checks} violated (p in -inf,1,2,inf)"),
        ),
        format!("lambda-nesting violations below p = 1 (no monotonicity): {}", info.join(", ")),
    )
}

fn synthetic_document(spec: &GenSpec) -> (bool, f64, f64, Duration, String) {
    let start = Instant::now();
    let (g, planted) = generate(spec).unwrap();
    let params = Params::new(fin(1.0), 0.0).with_alpha(4);
    let res = approx_densest(&g, &params).unwrap();
    let elapsed = start.elapsed();
    let found = res.best.rho_value;
    let planted_rho = rho(&g, &planted, &params).unwrap().value;
    let doc = approx_document(&g, &res, &params, false).unwrap().to_string();
    (found >= planted_rho - params.tol(planted_rho), found, planted_rho, elapsed, doc)
}

fn c7_synthetic(seeds: &[u64]) -> (Outcome, Vec<String>) {
    let mut docs = Vec::new();
    let mut ok = true;
    let mut slowest = Duration::ZERO;
    let mut lines = Vec::new();
    for (name, make) in [("S1", GenSpec::s1 as fn(u64) -> GenSpec), ("S2", GenSpec::s2)] {
        let mut worst_gap = f64::INFINITY;
        for &seed in seeds {
            let (pass, found, planted, t, doc) = synthetic_document(&make(seed));
            ok &= pass && t < Duration::from_secs(60);
            slowest = slowest.max(t);
            worst_gap = worst_gap.min(found - planted);
            docs.push(doc);
        }
        lines.push(format!("{name}: min rho(found) - rho(planted) = {worst_gap:.3}"));
    }
    lines.push(format!("slowest {:.2}s (limit 60s)", slowest.as_secs_f64()));
    (outcome(ok, lines.join("; ")), docs)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn c8_noisy_layer() -> Outcome {
    let params = Params::new(fin(1.0), 0.0).with_alpha(4);
    let (mut weighted, mut unweighted) = (Vec::new(), Vec::new());
    for seed in 0..20u64 {
        let (g, planted) = generate(&GenSpec::s1(8000 + seed).with_noisy_layer(3)).unwrap();
        let flat = g.with_weights(&vec![1.0; g.num_layers()]).unwrap();
        weighted.push(approx_densest(&g, &params).unwrap().best.nodes.jaccard(&planted));
        unweighted.push(approx_densest(&flat, &params).unwrap().best.nodes.jaccard(&planted));
    }
    let (mw, mu) = (median(weighted), median(unweighted));
    outcome(mw >= mu, format!("median Jaccard weighted {mw:.3} vs unweighted {mu:.3} over 20 seeds"))
}

fn children_max_rss_kib() -> i64 {
    let mut u: libc::rusage = unsafe { std::mem::zeroed() };
    // SAFETY: getrusage only writes into the provided struct.
    unsafe { libc::getrusage(libc::RUSAGE_CHILDREN, &mut u) };
    u.ru_maxrss
}

fn c9_scale(dir: &Path) -> Outcome {
    let bin = env!("CARGO_BIN_EXE_mplex");
    let graph = dir.join("scale.mplex");
    let status = Command::new(bin)
        .args(["gen", "--n", "100000", "--m", "1000000", "--layers", "4", "--seed", "9"])
        .args(["--plant", "clique", "--plant-size", "30", "--out"])
        .arg(&graph)
        .output()
        .expect("spawn generator");
    if !status.status.success() {
        return outcome(false, format!("gen failed: {}", String::from_utf8_lossy(&status.stderr)));
    }
    let start = Instant::now();
    let run = Command::new(bin)
        .args(["densest", "--alpha", "4", "--p", "1", "--no-timing", "--out"])
        .arg(dir.join("scale.json"))
        .arg("--graph")
        .arg(&graph)
        .output()
        .expect("spawn densest");
    let elapsed = start.elapsed();
    let rss_gib = children_max_rss_kib() as f64 / (1024.0 * 1024.0);
    let ok = run.status.success() && elapsed < Duration::from_secs(600) && rss_gib < 4.0;
    outcome(
        ok,
        format!(
            "1e6 edges, 4 layers: {:.2}s (limit 600s), peak child RSS {:.3} GiB (limit 4); {}",
            elapsed.as_secs_f64(),
            rss_gib,
            String::from_utf8_lossy(&run.stdout).replace('\n', " ").trim()
        ),
    )
}

/// Core index bytes of criterion 2 and result documents of criterion 3, for
/// a prefix of the instances; run twice and compared.
fn determinism_docs(workers: usize) -> Vec<Vec<u8>> {
    let mut docs = Vec::new();
    for seed in 0..20u64 {
        let g = random_graph(1000 + seed, 10, 4, Weights::Random);
        for &lam in &candidate_lambdas(&g.weights(), g.num_layers(), 1e-9).unwrap() {
            for &p in &[P_NEG_INF, fin(0.0), fin(1.0)] {
                docs.push(decompose(&g, lam, p).unwrap().to_bytes());
            }
        }
        let g = random_graph(seed, 12, 4, Weights::Random);
        for &p in &[fin(1.0), fin(2.0), P_NEG_INF, fin(-1.0), fin(0.0)] {
            let params = Params::new(p, 1.0);
            let res = approx_densest_with(&g, &params, workers).unwrap();
            docs.push(approx_document(&g, &res, &params, false).unwrap().to_string().into_bytes());
            let exact = exact_densest(&g, &params).unwrap();
            docs.push(result_document(&g, &exact, &params, json!({})).unwrap().to_string().into_bytes());
        }
    }
    docs
}

fn report(results: &mut Vec<(String, bool)>, id: &str, name: &str, o: Outcome) {
    let tag = if o.pass { "PASS" } else { "FAIL" };
    println!("{tag} [{id}] {name}: {}", o.detail);
    results.push((id.to_string(), o.pass));
}

fn main() {
    // the libtest harness flags are accepted and ignored
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut results = Vec::new();
    let dir = tempfile::tempdir().expect("temp dir");

    report(&mut results, "1", "rho matches exhaustive layer subsets", c1_rho_oracle());
    report(&mut results, "2", "decomposition matches iterated deletion", c2_cores_oracle());

    let start = Instant::now();
    let runs = ratio_runs(|| Weights::Random, Scale::Keep);
    let elapsed = start.elapsed();
    let t = tally_ratios(&runs);
    let (fast, time) = within(elapsed, Duration::from_secs(120));
    report(
        &mut results,
        "3",
        "approximation ratio within guarantee (weights in (0,2])",
        outcome(t.below_bound == 0 && t.above_one == 0 && fast, format!("{}; {time}", describe_ratios(&t))),
    );
    let unit_runs = ratio_runs(|| Weights::Unit, Scale::Keep);
    println!("info [3] unit weights: {}", describe_ratios(&tally_ratios(&unit_runs)));
    let scaled_runs = ratio_runs(|| Weights::Random, Scale::MinToOne);
    println!(
        "info [3] same instances, weights scaled to min 1: {}",
        describe_ratios(&tally_ratios(&scaled_runs))
    );

    let lt = tally_core_bound(&runs);
    report(&mut results, "4", "GFirmCore(2k, lambda, 1) equals FirmCore(k, lambda)", c4_firmcore_reduction());
    let (nest, nest_info) = c5_nesting();
    report(&mut results, "5", "nesting in k and lambda", nest);
    println!("info [5] {nest_info}");
    report(
        &mut results,
        "6",
        "core bound below core density (weights in (0,2])",
        outcome(
            lt.bad == 0,
            format!(
                "{} of {} cores violate ({} with bound above the instance optimum)",
                lt.bad, lt.checks, lt.above_optimum
            ),
        ),
    );
    let ul = tally_core_bound(&unit_runs);
    println!("info [6] unit weights: {} of {} cores violate", ul.bad, ul.checks);
    let sl = tally_core_bound(&scaled_runs);
    println!("info [6] same instances, weights scaled to min 1: {} of {} cores violate", sl.bad, sl.checks);

    let seeds = [1, 2, 3, 4, 5];
    let (syn, syn_docs) = c7_synthetic(&seeds);
    report(&mut results, "7", "S1/S2 found set at least as dense as the plant", syn);
    report(&mut results, "8", "noisy layer: weighted run recovers the plant better", c8_noisy_layer());
    report(&mut results, "9", "scale: densest on 1e6 edges via the binary", c9_scale(dir.path()));

    let first = determinism_docs(0);
    let again = determinism_docs(0);
    let sequential = determinism_docs(1);
    let (_, syn_again) = c7_synthetic(&seeds);
    let same = first == again && first == sequential && syn_docs == syn_again;
    report(
        &mut results,
        "10",
        "reruns give byte-identical documents",
        outcome(
            same,
            format!("{} documents, repeated and single-worker runs compared", first.len() + syn_docs.len()),
        ),
    );

    let failed: Vec<&str> = results.iter().filter(|(_, p)| !p).map(|(id, _)| id.as_str()).collect();
    println!(
        "acceptance: {} passed, {} failed{}",
        results.len() - failed.len(),
        failed.len(),
        if failed.is_empty() { String::new() } else { format!(" ({})", failed.join(", ")) }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
