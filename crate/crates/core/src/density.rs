// SPDX-License-Identifier: Apache-2.0

//! Per-layer p-mean density, its weighted form, the multiplex objective
//! `rho`, and the node-removal delta used as the peeling score.
//!
//! Conventions at the edges of the p range:
//!
//! * `p = +inf` / `p = -inf`: max / min induced degree.
//! * `p = 0`: geometric mean, zero as soon as one degree is zero.
//! * `p < 0`: `0^p` is `+inf`, so any zero degree forces the mean to zero.
//!
//! The delta is the change of the *unnormalized* numerator
//! `sum_v deg(v)^p` when a node is removed. With `p = 1` this is exactly
//! `2 * deg(u)`. At `p = +-inf` the delta is the node's induced degree.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::graph::{LayerId, MultiplexGraph, NodeId, NodeSet};
use crate::params::{PValue, Params, DEFAULT_SATURATION};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LayerDensity {
    pub layer: LayerId,
    pub omega: f64,
    pub xi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhoResult {
    pub value: f64,
    /// Maximizing layer subset, in descending order of weighted density.
    pub chosen_layers: Vec<LayerId>,
    /// Layer of smallest weighted density inside `chosen_layers`.
    pub min_layer: LayerId,
}

/// Which form of the removal delta to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeltaConvention {
    /// `sum_S deg^p - sum_{S-u} deg^p`.
    #[default]
    Unnormalized,
    /// `Omega(S)^p - Omega(S - u)^p`, for finite nonzero p only.
    Normalized,
}

/// Extended real with an explicit count of infinite terms, so that sums of
/// `0^p` (p < 0) terms stay exact under additive updates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct ExtSum {
    pub inf: i64,
    pub fin: f64,
}

impl ExtSum {
    pub fn finite(x: f64) -> Self {
        ExtSum { inf: 0, fin: x }
    }

    pub fn add(&mut self, o: ExtSum) {
        self.inf += o.inf;
        self.fin += o.fin;
    }

    pub fn sub(&mut self, o: ExtSum) {
        self.inf -= o.inf;
        self.fin -= o.fin;
    }

    pub fn minus(mut self, o: ExtSum) -> Self {
        self.sub(o);
        self
    }

    /// Collapses to a real, saturating infinite parts to `+-sat`.
    pub fn resolve(self, sat: f64) -> f64 {
        match self.inf.signum() {
            1 => sat,
            -1 => -sat,
            _ => self.fin,
        }
    }
}

/// `deg^p` under the module conventions, for finite p.
pub(crate) fn pow_term(d: u32, p: f64) -> ExtSum {
    if p == 0.0 {
        ExtSum::finite(if d > 0 { 1.0 } else { 0.0 })
    } else if d == 0 {
        if p < 0.0 {
            ExtSum { inf: 1, fin: 0.0 }
        } else {
            ExtSum::finite(0.0)
        }
    } else if p == 1.0 {
        ExtSum::finite(d as f64)
    } else {
        ExtSum::finite((d as f64).powf(p))
    }
}

/// Contribution lost by a neighbor whose degree drops from `d` to `d - 1`.
pub(crate) fn drop_term(d: u32, p: f64) -> ExtSum {
    debug_assert!(d >= 1);
    pow_term(d, p).minus(pow_term(d - 1, p))
}

/// Induced degrees of the members of `s` in `layer`, in the order of `s`.
pub fn induced_degrees(g: &MultiplexGraph, layer: LayerId, s: &NodeSet) -> Vec<u32> {
    let mask = s.mask(g.num_nodes());
    s.iter().map(|u| g.neighbors(u, layer).iter().filter(|&&v| mask[v as usize]).count() as u32).collect()
}

/// Power mean of a degree sequence.
pub fn power_mean(degrees: &[u32], p: PValue) -> f64 {
    if degrees.is_empty() {
        return 0.0;
    }
    let n = degrees.len() as f64;
    match p {
        PValue::NegInf => degrees.iter().copied().min().unwrap() as f64,
        PValue::PosInf => degrees.iter().copied().max().unwrap() as f64,
        PValue::Finite(p) => {
            if p <= 0.0 && degrees.contains(&0) {
                return 0.0;
            }
            if p == 0.0 {
                let s: f64 = degrees.iter().map(|&d| (d as f64).ln()).sum();
                (s / n).exp()
            } else if p == 1.0 {
                degrees.iter().map(|&d| d as f64).sum::<f64>() / n
            } else {
                let s: f64 = degrees.iter().map(|&d| (d as f64).powf(p)).sum();
                (s / n).powf(1.0 / p)
            }
        }
    }
}

/// `Omega_layer(S)`: p-mean of the induced degrees of `s`.
pub fn omega(g: &MultiplexGraph, layer: LayerId, s: &NodeSet, p: PValue) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::EmptySet);
    }
    if layer >= g.num_layers() {
        return Err(invalid(format!("layer id {layer} out of range")));
    }
    Ok(power_mean(&induced_degrees(g, layer, s), p))
}

/// `Omega` and `Xi = Omega * w` for every layer.
pub fn layer_densities(g: &MultiplexGraph, s: &NodeSet, p: PValue) -> Result<Vec<LayerDensity>> {
    (0..g.num_layers())
        .map(|l| {
            let omega = omega(g, l, s, p)?;
            Ok(LayerDensity { layer: l, omega, xi: omega * g.weight(l) })
        })
        .collect()
}

pub(crate) fn pow_beta(weight_sum: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        1.0
    } else {
        weight_sum.powf(beta)
    }
}

/// Best layer subset for fixed per-layer weighted densities.
///
/// Any optimal subset can be taken to be a prefix of the layers sorted by
/// `xi` descending: adding a layer whose `xi` is at least the current
/// minimum keeps the minimum and does not shrink the weight sum.
pub(crate) fn best_layer_prefix(xi: &[f64], weights: &[f64], beta: f64) -> RhoResult {
    assert!(!xi.is_empty(), "graph has no layers");
    let mut order: Vec<LayerId> = (0..xi.len()).collect();
    order.sort_by(|&a, &b| xi[b].total_cmp(&xi[a]).then(a.cmp(&b)));
    let mut wsum = 0.0;
    let mut best = (f64::NEG_INFINITY, 0);
    for (t, &l) in order.iter().enumerate() {
        wsum += weights[l];
        let v = xi[l] * pow_beta(wsum, beta);
        if v > best.0 {
            best = (v, t);
        }
    }
    let chosen = order[..=best.1].to_vec();
    RhoResult { value: best.0, min_layer: *chosen.last().unwrap(), chosen_layers: chosen }
}

/// The multiplex objective `rho(S)` with its maximizing layer subset.
pub fn rho(g: &MultiplexGraph, s: &NodeSet, params: &Params) -> Result<RhoResult> {
    if s.is_empty() {
        return Err(Error::EmptySet);
    }
    if g.num_layers() == 0 {
        return Err(invalid("graph has no layers"));
    }
    let xi: Vec<f64> = layer_densities(g, s, params.p)?.iter().map(|d| d.xi).collect();
    Ok(best_layer_prefix(&xi, &g.weights(), params.beta))
}

/// Removal delta of `node` from `s` in `layer`, unnormalized convention.
pub fn delta(g: &MultiplexGraph, layer: LayerId, s: &NodeSet, node: NodeId, p: PValue) -> Result<f64> {
    delta_with(g, layer, s, node, p, DeltaConvention::Unnormalized, DEFAULT_SATURATION)
}

pub fn delta_with(
    g: &MultiplexGraph,
    layer: LayerId,
    s: &NodeSet,
    node: NodeId,
    p: PValue,
    convention: DeltaConvention,
    saturation: f64,
) -> Result<f64> {
    if !s.contains(node) {
        return Err(Error::NodeNotInSet(node));
    }
    if s.len() < 2 {
        return Err(invalid("delta needs a node set with at least two nodes"));
    }
    if layer >= g.num_layers() {
        return Err(invalid(format!("layer id {layer} out of range")));
    }
    let mask = s.mask(g.num_nodes());
    let ind_deg = |v: NodeId| g.neighbors(v, layer).iter().filter(|&&x| mask[x as usize]).count() as u32;
    let own = ind_deg(node);
    let p = match p {
        PValue::NegInf | PValue::PosInf => return Ok(own as f64),
        PValue::Finite(p) => p,
    };
    match convention {
        DeltaConvention::Unnormalized => {
            let mut d = pow_term(own, p);
            for &v in g.neighbors(node, layer) {
                if mask[v as usize] {
                    d.add(drop_term(ind_deg(v), p));
                }
            }
            Ok(d.resolve(saturation))
        }
        DeltaConvention::Normalized => {
            if p == 0.0 {
                return Err(invalid("normalized delta is undefined at p = 0"));
            }
            let full = induced_degrees(g, layer, s);
            let rest = induced_degrees(g, layer, &s.without(node));
            let mean = |ds: &[u32]| {
                let mut acc = ExtSum::default();
                for &d in ds {
                    acc.add(pow_term(d, p));
                }
                (acc.inf > 0, acc.fin / ds.len() as f64)
            };
            let (inf_a, a) = mean(&full);
            let (inf_b, b) = mean(&rest);
            Ok(match (inf_a, inf_b) {
                (false, false) => a - b,
                (true, false) => saturation,
                (false, true) => -saturation,
                (true, true) => 0.0,
            })
        }
    }
}

/// Weighted edge density `sum_l w_l |E_l[S]| / (w* * C(|S|, 2))`.
pub fn edge_density(g: &MultiplexGraph, s: &NodeSet) -> f64 {
    let n = s.len() as f64;
    let pairs = n * (n - 1.0) / 2.0;
    let wstar = g.total_weight();
    if pairs == 0.0 || wstar == 0.0 {
        return 0.0;
    }
    let num: f64 = (0..g.num_layers()).map(|l| g.weight(l) * g.induced_edge_count(l, s) as f64).sum();
    num / (wstar * pairs)
}
