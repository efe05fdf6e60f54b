// SPDX-License-Identifier: Apache-2.0

//! Exhaustive ground truth for small instances.
//!
//! Everything here is recomputed from the definitions with no incremental
//! bookkeeping, so it can serve as a reference for the fast paths. Size
//! caps are hard errors.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::approx::DenseResult;
use crate::density::RhoResult;
use crate::error::{invalid, Error, Result};
use crate::firmcore::{reaches, tolerant_floor};
use crate::graph::{LayerId, MultiplexGraph, NodeId, NodeSet};
use crate::params::{PValue, Params};

pub const DEFAULT_NODE_CAP: usize = 16;
pub const LAYER_CAP: usize = 20;

/// Induced degree of every node of `members` (bitmask over node ids).
fn masked_degrees(g: &MultiplexGraph, layer: LayerId, members: &[bool]) -> Vec<u32> {
    g.nodes()
        .filter(|&u| members[u as usize])
        .map(|u| g.neighbors(u, layer).iter().filter(|&&v| members[v as usize]).count() as u32)
        .collect()
}

fn mean_of(degrees: &[u32], p: PValue) -> f64 {
    let n = degrees.len() as f64;
    match p {
        PValue::NegInf => degrees.iter().fold(u32::MAX, |a, &d| a.min(d)) as f64,
        PValue::PosInf => degrees.iter().fold(0, |a, &d| a.max(d)) as f64,
        PValue::Finite(p) if p <= 0.0 && degrees.contains(&0) => 0.0,
        PValue::Finite(0.0) => degrees.iter().map(|&d| (d as f64).ln() / n).sum::<f64>().exp(),
        PValue::Finite(p) => (degrees.iter().map(|&d| (d as f64).powf(p)).sum::<f64>() / n).powf(1.0 / p),
    }
}

/// Literal max over all nonempty layer subsets of `min xi * (sum w)^beta`.
fn rho_over_subsets(xi: &[f64], w: &[f64], beta: f64) -> RhoResult {
    let nl = xi.len();
    let mut best: Option<(f64, u32)> = None;
    for mask in 1u32..(1 << nl) {
        let layers = (0..nl).filter(|l| mask >> l & 1 == 1);
        let min = layers.clone().map(|l| xi[l]).fold(f64::INFINITY, f64::min);
        let wsum: f64 = layers.map(|l| w[l]).sum();
        let scale = if beta == 0.0 { 1.0 } else { wsum.powf(beta) };
        let v = min * scale;
        if best.is_none_or(|(b, _)| v > b) {
            best = Some((v, mask));
        }
    }
    let (value, mask) = best.expect("at least one layer");
    let mut chosen: Vec<LayerId> = (0..nl).filter(|l| mask >> l & 1 == 1).collect();
    chosen.sort_by(|&a, &b| xi[b].total_cmp(&xi[a]).then(a.cmp(&b)));
    RhoResult { value, min_layer: *chosen.last().unwrap(), chosen_layers: chosen }
}

/// `rho(S)` by enumerating every layer subset.
pub fn exact_rho_subsets(g: &MultiplexGraph, s: &NodeSet, params: &Params) -> Result<RhoResult> {
    if s.is_empty() {
        return Err(Error::EmptySet);
    }
    let nl = g.num_layers();
    if nl == 0 {
        return Err(invalid("graph has no layers"));
    }
    if nl > LAYER_CAP {
        return Err(Error::OverCap { size: nl, cap: LAYER_CAP });
    }
    let members = s.mask(g.num_nodes());
    let xi: Vec<f64> =
        (0..nl).map(|l| mean_of(&masked_degrees(g, l, &members), params.p) * g.weight(l)).collect();
    Ok(rho_over_subsets(&xi, &g.weights(), params.beta))
}

/// Optimum of the multiplex objective over all nonempty node subsets.
pub fn exact_densest(g: &MultiplexGraph, params: &Params) -> Result<DenseResult> {
    exact_densest_capped(g, params, DEFAULT_NODE_CAP)
}

pub fn exact_densest_capped(g: &MultiplexGraph, params: &Params, cap: usize) -> Result<DenseResult> {
    params.validate()?;
    let n = g.num_nodes();
    if n > cap || n > 30 {
        return Err(Error::OverCap { size: n, cap: cap.min(30) });
    }
    if n == 0 {
        return Err(Error::EmptySet);
    }
    let nl = g.num_layers();
    if nl == 0 || nl > LAYER_CAP {
        return Err(Error::OverCap { size: nl, cap: LAYER_CAP });
    }
    let adj: Vec<Vec<u32>> = (0..nl)
        .map(|l| g.nodes().map(|u| g.neighbors(u, l).iter().fold(0u32, |m, &v| m | 1 << v)).collect())
        .collect();
    let w = g.weights();
    let tol = |x: f64| params.tol(x);

    let mut values = Vec::with_capacity((1usize << n) - 1);
    let mut degs = Vec::with_capacity(n);
    let mut xi = vec![0.0; nl];
    for set in 1u32..(1u32 << n) {
        for l in 0..nl {
            degs.clear();
            for (u, &row) in adj[l].iter().enumerate() {
                if set >> u & 1 == 1 {
                    degs.push((row & set).count_ones());
                }
            }
            xi[l] = mean_of(&degs, params.p) * w[l];
        }
        values.push(rho_over_subsets(&xi, &w, params.beta).value);
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // smallest, then lexicographically first, among near-optimal sets
    let winner = values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= max - tol(max))
        .map(|(i, _)| (i + 1) as u32)
        .min_by_key(|&set| {
            let ids: Vec<NodeId> = (0..n as NodeId).filter(|&u| set >> u & 1 == 1).collect();
            (ids.len(), ids)
        })
        .unwrap();
    let nodes = NodeSet::new((0..n as NodeId).filter(|&u| winner >> u & 1 == 1), n)?;
    let r = exact_rho_subsets(g, &nodes, params)?;
    Ok(DenseResult {
        nodes,
        rho_value: r.value,
        chosen_layers: r.chosen_layers,
        provenance: "exhaustive".to_string(),
    })
}

fn term(d: u32, p: f64) -> (i64, f64) {
    match (d, p) {
        (0, p) if p < 0.0 => (1, 0.0),
        (0, _) => (0, 0.0),
        (_, 0.0) => (0, 1.0),
        (d, p) => (0, (d as f64).powf(p)),
    }
}

/// Removal delta recomputed as the literal difference of the two numerator
/// sums `sum_S deg^p - sum_{S-u} deg^p`.
fn literal_delta(
    g: &MultiplexGraph,
    layer: LayerId,
    members: &[bool],
    u: NodeId,
    p: PValue,
    sat: f64,
) -> f64 {
    let deg_in =
        |v: NodeId, m: &[bool]| g.neighbors(v, layer).iter().filter(|&&x| m[x as usize]).count() as u32;
    match p {
        PValue::NegInf | PValue::PosInf => deg_in(u, members) as f64,
        PValue::Finite(p) => {
            let mut without = members.to_vec();
            without[u as usize] = false;
            let (mut inf, mut fin) = (0i64, 0.0);
            for v in g.nodes() {
                if members[v as usize] {
                    let (i, f) = term(deg_in(v, members), p);
                    inf += i;
                    fin += f;
                }
                if without[v as usize] {
                    let (i, f) = term(deg_in(v, &without), p);
                    inf -= i;
                    fin -= f;
                }
            }
            match inf.signum() {
                1 => sat,
                -1 => -sat,
                _ => fin,
            }
        }
    }
}

/// Top-lambda by enumerating layer subsets: the best `floor(min psi)` over
/// subsets of weight at least `lambda`. `None` when no subset qualifies.
pub fn exhaustive_top_lambda(psi: &[f64], weights: &[f64], lambda: f64, eps: f64) -> Option<u64> {
    let nl = psi.len();
    assert!(nl <= LAYER_CAP);
    let mut best = None;
    for mask in 1u32..(1 << nl) {
        let ls = (0..nl).filter(|l| mask >> l & 1 == 1);
        let w: f64 = ls.clone().map(|l| weights[l]).sum();
        if !reaches(w, lambda, eps) {
            continue;
        }
        let k = ls.map(|l| tolerant_floor(psi[l], eps)).min().unwrap();
        best = best.max(Some(k));
    }
    best
}

fn scores(g: &MultiplexGraph, members: &[bool], lambda: f64, params: &Params) -> Vec<Option<u64>> {
    let w = g.weights();
    g.nodes()
        .map(|u| {
            if !members[u as usize] {
                return None;
            }
            let psi: Vec<f64> = (0..g.num_layers())
                .map(|l| literal_delta(g, l, members, u, params.p, params.saturation))
                .collect();
            exhaustive_top_lambda(&psi, &w, lambda, params.eps)
        })
        .collect()
}

/// How `exact_core_with` picks the next node to delete among those failing.
#[derive(Debug, Clone, Copy)]
pub enum DeletionOrder {
    /// Lowest Top-lambda first, then lowest id.
    MinScore,
    /// Uniformly random failing node.
    Random(u64),
}

/// The `(k, lambda, p)`-core by iterated deletion from the whole node set.
pub fn exact_core(g: &MultiplexGraph, k: u64, lambda: f64, p: PValue) -> Result<NodeSet> {
    exact_core_with(g, k, lambda, &Params::new(p, 0.0), DeletionOrder::MinScore)
}

pub fn exact_core_with(
    g: &MultiplexGraph,
    k: u64,
    lambda: f64,
    params: &Params,
    order: DeletionOrder,
) -> Result<NodeSet> {
    let n = g.num_nodes();
    if n > 64 {
        return Err(Error::OverCap { size: n, cap: 64 });
    }
    if g.num_layers() > LAYER_CAP {
        return Err(Error::OverCap { size: g.num_layers(), cap: LAYER_CAP });
    }
    if k == 0 {
        return Ok(g.all_nodes());
    }
    let mut rng = match order {
        DeletionOrder::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        DeletionOrder::MinScore => None,
    };
    let mut members = vec![true; n];
    loop {
        let sc = scores(g, &members, lambda, params);
        let mut failing: Vec<(Option<u64>, NodeId)> = g
            .nodes()
            .filter(|&u| members[u as usize] && sc[u as usize].is_none_or(|s| s < k))
            .map(|u| (sc[u as usize], u))
            .collect();
        if failing.is_empty() {
            break;
        }
        let victim = match rng.as_mut() {
            None => failing.iter().min().unwrap().1,
            Some(r) => {
                failing.shuffle(r);
                failing[r.gen_range(0..failing.len())].1
            }
        };
        members[victim as usize] = false;
    }
    NodeSet::new(g.nodes().filter(|&u| members[u as usize]), n)
}

/// Unweighted `(k, lambda)`-FirmCore: every node has degree at least `k`
/// in at least `lambda` layers, by plain degree counting.
pub fn firmcore_unweighted(g: &MultiplexGraph, k: usize, lambda: usize) -> NodeSet {
    let n = g.num_nodes();
    let mut members = vec![true; n];
    let mut changed = true;
    while changed {
        changed = false;
        for u in g.nodes() {
            if !members[u as usize] {
                continue;
            }
            let good_layers = (0..g.num_layers())
                .filter(|&l| g.neighbors(u, l).iter().filter(|&&v| members[v as usize]).count() >= k)
                .count();
            if good_layers < lambda {
                members[u as usize] = false;
                changed = true;
            }
        }
    }
    NodeSet::from_sorted(g.nodes().filter(|&u| members[u as usize]).collect())
}
