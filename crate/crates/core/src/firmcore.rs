// SPDX-License-Identifier: Apache-2.0

//! Generalized FirmCore decomposition for a fixed threshold `lambda`.
//!
//! A node belongs to the `(k, lambda, p)`-core when, inside the core, the
//! layers where its removal delta is at least `k` carry a cumulative weight
//! of at least `lambda`. The decomposition peels nodes in nondecreasing
//! order of their Top-lambda score and records, for every node, the largest
//! `k` whose core still contains it.

use std::collections::BTreeSet;
use std::io::Write;

use crate::density::{drop_term, pow_term, ExtSum};
use crate::error::{invalid, Error, Result};
use crate::graph::{LayerId, MultiplexGraph, NodeId, NodeSet};
use crate::params::{PValue, Params, DEFAULT_EPS};

/// Largest integer `k >= 0` such that the layers with `psi >= k` weigh at
/// least `lambda`. `None` when even all layers together weigh less.
pub fn top_lambda(psi: &[f64], weights: &[f64], lambda: f64) -> Result<Option<u64>> {
    if !(lambda >= 0.0) {
        return Err(invalid(format!("lambda must be >= 0, got {lambda}")));
    }
    if psi.len() != weights.len() {
        return Err(invalid("psi and weights differ in length"));
    }
    let mut order: Vec<usize> = (0..psi.len()).collect();
    Ok(top_lambda_into(psi, weights, lambda, DEFAULT_EPS, &mut order))
}

/// Whether an accumulated weight reaches `lambda` up to tolerance.
#[inline]
pub(crate) fn reaches(sum: f64, lambda: f64, eps: f64) -> bool {
    sum >= lambda - eps * lambda.abs().max(1.0)
}

/// Floor that forgives representation error just below an integer.
#[inline]
pub(crate) fn tolerant_floor(x: f64, eps: f64) -> u64 {
    let f = (x + eps * x.abs().max(1.0)).floor();
    if f <= 0.0 {
        0
    } else {
        f as u64
    }
}

fn top_lambda_into(psi: &[f64], weights: &[f64], lambda: f64, eps: f64, order: &mut [usize]) -> Option<u64> {
    order.sort_by(|&a, &b| psi[b].total_cmp(&psi[a]).then(a.cmp(&b)));
    let mut acc = 0.0;
    for &l in order.iter() {
        acc += weights[l];
        if reaches(acc, lambda, eps) {
            return Some(tolerant_floor(psi[l], eps));
        }
    }
    None
}

/// Per-node core numbers for one `(lambda, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreIndex {
    pub lambda: f64,
    pub p: PValue,
    pub core_of: Vec<u64>,
    pub max_k: u64,
    /// Times a neighbor's score went up during peeling (possible for p < 1).
    pub non_monotone_updates: u64,
}

impl CoreIndex {
    /// Nodes whose core number is at least `k`.
    pub fn extract(&self, k: u64) -> Result<NodeSet> {
        if k > self.max_k {
            return Err(Error::KOutOfRange { k, max_k: self.max_k });
        }
        Ok(NodeSet::from_sorted(
            self.core_of.iter().enumerate().filter(|(_, &c)| c >= k).map(|(u, _)| u as NodeId).collect(),
        ))
    }

    /// Distinct core numbers, descending.
    pub fn levels(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.core_of.clone();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v.dedup();
        v
    }

    /// `(k, nodes with core number exactly k)`, ascending in `k`.
    pub fn histogram(&self) -> Vec<(u64, usize)> {
        let mut v = self.levels();
        v.reverse();
        v.into_iter().map(|k| (k, self.core_of.iter().filter(|&&c| c == k).count())).collect()
    }

    pub fn write_text<W: Write>(&self, g: &MultiplexGraph, mut out: W) -> Result<()> {
        for (u, k) in self.core_of.iter().enumerate() {
            writeln!(out, "{}\t{}", g.label(u as NodeId), k)?;
        }
        Ok(())
    }

    /// Binary form: `GFC1`, lambda (f64), p (f64, infinities allowed),
    /// n (u64), then n core numbers (u64). Little endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut b = Vec::with_capacity(28 + 8 * self.core_of.len());
        b.extend_from_slice(b"GFC1");
        b.extend_from_slice(&self.lambda.to_le_bytes());
        b.extend_from_slice(&self.p.as_f64().to_le_bytes());
        b.extend_from_slice(&(self.core_of.len() as u64).to_le_bytes());
        for k in &self.core_of {
            b.extend_from_slice(&k.to_le_bytes());
        }
        b
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        let bad = |msg: &str| Error::Parse { line: 0, msg: format!("core index: {msg}") };
        if b.len() < 28 || &b[..4] != b"GFC1" {
            return Err(bad("missing GFC1 header"));
        }
        let word = |i: usize| -> [u8; 8] { b[i..i + 8].try_into().unwrap() };
        let lambda = f64::from_le_bytes(word(4));
        let p = PValue::from_f64(f64::from_le_bytes(word(12)));
        let n = u64::from_le_bytes(word(20)) as usize;
        if b.len() != 28 + 8 * n {
            return Err(bad("length does not match node count"));
        }
        let core_of: Vec<u64> = (0..n).map(|i| u64::from_le_bytes(word(28 + 8 * i))).collect();
        let max_k = core_of.iter().copied().max().unwrap_or(0);
        Ok(CoreIndex { lambda, p, core_of, max_k, non_monotone_updates: 0 })
    }
}

#[derive(Debug, Clone, Copy)]
enum Kernel {
    /// psi = deg (p = +-inf).
    Degree,
    /// psi = 2 deg (p = 1).
    Linear,
    /// General finite p; updates reach two hops.
    Power(f64),
}

impl Kernel {
    fn for_p(p: PValue) -> Self {
        match p {
            PValue::NegInf | PValue::PosInf => Kernel::Degree,
            PValue::Finite(1.0) => Kernel::Linear,
            PValue::Finite(x) => Kernel::Power(x),
        }
    }
}

/// Mutable peeling state for one decomposition run.
struct PeelState<'g> {
    g: &'g MultiplexGraph,
    /// Graph layers with positive weight.
    layers: Vec<LayerId>,
    weights: Vec<f64>,
    kernel: Kernel,
    lambda: f64,
    eps: f64,
    saturation: f64,
    alive: Vec<bool>,
    deg: Vec<u32>,
    psi: Vec<ExtSum>,
    score: Vec<u64>,
    queue: BTreeSet<(u64, NodeId)>,
    stamp: Vec<u32>,
    epoch: u32,
    touched: Vec<NodeId>,
    order_buf: Vec<usize>,
    psi_buf: Vec<f64>,
    non_monotone: u64,
}

impl<'g> PeelState<'g> {
    fn new(g: &'g MultiplexGraph, lambda: f64, p: PValue, params: &Params) -> Self {
        let layers: Vec<LayerId> = (0..g.num_layers()).filter(|&l| g.weight(l) > 0.0).collect();
        let weights: Vec<f64> = layers.iter().map(|&l| g.weight(l)).collect();
        let nl = layers.len();
        let n = g.num_nodes();
        let kernel = Kernel::for_p(p);
        let mut deg = vec![0u32; n * nl];
        for u in 0..n {
            for (li, &l) in layers.iter().enumerate() {
                deg[u * nl + li] = g.neighbors(u as NodeId, l).len() as u32;
            }
        }
        let mut st = PeelState {
            g,
            layers,
            weights,
            kernel,
            lambda,
            eps: params.eps,
            saturation: params.saturation,
            alive: vec![true; n],
            deg,
            psi: vec![ExtSum::default(); n * nl],
            score: vec![0; n],
            queue: BTreeSet::new(),
            stamp: vec![0; n],
            epoch: 0,
            touched: Vec::new(),
            order_buf: (0..nl).collect(),
            psi_buf: vec![0.0; nl],
            non_monotone: 0,
        };
        for u in 0..n as NodeId {
            for li in 0..nl {
                let v = st.psi_from_scratch(u, li);
                st.psi[u as usize * nl + li] = v;
            }
            let s = st.compute_score(u);
            st.score[u as usize] = s;
            st.queue.insert((s, u));
        }
        st
    }

    fn nl(&self) -> usize {
        self.layers.len()
    }

    fn psi_from_scratch(&self, u: NodeId, li: usize) -> ExtSum {
        let nl = self.nl();
        let d = self.deg[u as usize * nl + li];
        match self.kernel {
            Kernel::Degree => ExtSum::finite(d as f64),
            Kernel::Linear => ExtSum::finite(2.0 * d as f64),
            Kernel::Power(p) => {
                let mut acc = pow_term(d, p);
                for &v in self.g.neighbors(u, self.layers[li]) {
                    if self.alive[v as usize] {
                        acc.add(drop_term(self.deg[v as usize * nl + li], p));
                    }
                }
                acc
            }
        }
    }

    fn compute_score(&mut self, u: NodeId) -> u64 {
        let nl = self.nl();
        for li in 0..nl {
            self.psi_buf[li] = self.psi[u as usize * nl + li].resolve(self.saturation);
        }
        top_lambda_into(&self.psi_buf, &self.weights, self.lambda, self.eps, &mut self.order_buf)
            .expect("total weight reaches lambda")
    }

    fn touch(&mut self, u: NodeId) {
        if self.stamp[u as usize] != self.epoch {
            self.stamp[u as usize] = self.epoch;
            self.touched.push(u);
        }
    }

    fn pop_min(&mut self) -> Option<(u64, NodeId)> {
        self.queue.pop_first()
    }

    fn remove(&mut self, v: NodeId) {
        let nl = self.nl();
        self.alive[v as usize] = false;
        self.epoch += 1;
        self.touched.clear();
        for li in 0..nl {
            let l = self.layers[li];
            let dv = self.deg[v as usize * nl + li];
            for &u in self.g.neighbors(v, l) {
                if !self.alive[u as usize] {
                    continue;
                }
                let ui = u as usize * nl + li;
                let old = self.deg[ui];
                let new = old - 1;
                match self.kernel {
                    Kernel::Degree => self.psi[ui] = ExtSum::finite(new as f64),
                    Kernel::Linear => self.psi[ui] = ExtSum::finite(2.0 * new as f64),
                    Kernel::Power(p) => {
                        self.psi[ui].sub(drop_term(dv, p));
                        self.psi[ui].add(pow_term(new, p).minus(pow_term(old, p)));
                        if new >= 1 {
                            let change = drop_term(new, p).minus(drop_term(old, p));
                            for &x in self.g.neighbors(u, l) {
                                if self.alive[x as usize] {
                                    self.psi[x as usize * nl + li].add(change);
                                    self.touch(x);
                                }
                            }
                        }
                    }
                }
                self.deg[ui] = new;
                self.touch(u);
            }
        }
        let touched = std::mem::take(&mut self.touched);
        for &u in &touched {
            let old = self.score[u as usize];
            let new = self.compute_score(u);
            if new != old {
                if new > old {
                    self.non_monotone += 1;
                }
                self.queue.remove(&(old, u));
                self.queue.insert((new, u));
                self.score[u as usize] = new;
            }
        }
        self.touched = touched;
        #[cfg(debug_assertions)]
        self.check_invariants();
    }

    #[cfg(debug_assertions)]
    fn check_invariants(&self) {
        let n = self.g.num_nodes();
        if n > 64 {
            return;
        }
        let nl = self.nl();
        for u in 0..n as NodeId {
            if !self.alive[u as usize] {
                continue;
            }
            for li in 0..nl {
                let a = self.psi[u as usize * nl + li];
                let b = self.psi_from_scratch(u, li);
                assert_eq!(a.inf, b.inf, "psi infinity count drifted for node {u}");
                assert!(
                    (a.fin - b.fin).abs() <= 1e-6 * b.fin.abs().max(1.0),
                    "psi drifted for node {u}: {} vs {}",
                    a.fin,
                    b.fin
                );
            }
        }
    }
}

/// Decomposition with default tolerances.
pub fn decompose(g: &MultiplexGraph, lambda: f64, p: PValue) -> Result<CoreIndex> {
    decompose_with(g, lambda, &Params::new(p, 0.0))
}

/// Decomposition for `lambda` and `params.p`; `eps` and `saturation` are
/// taken from `params`.
pub fn decompose_with(g: &MultiplexGraph, lambda: f64, params: &Params) -> Result<CoreIndex> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid(format!("lambda must be finite and > 0, got {lambda}")));
    }
    let n = g.num_nodes();
    let mut core_of = vec![0u64; n];
    // No node can reach lambda; every node sits in the 0-core only.
    if !reaches(g.total_weight(), lambda, params.eps) {
        return Ok(CoreIndex { lambda, p: params.p, core_of, max_k: 0, non_monotone_updates: 0 });
    }
    let mut st = PeelState::new(g, lambda, params.p, params);
    let mut k = 0u64;
    while let Some((s, v)) = st.pop_min() {
        k = k.max(s);
        core_of[v as usize] = k;
        st.remove(v);
    }
    Ok(CoreIndex { lambda, p: params.p, max_k: k, core_of, non_monotone_updates: st.non_monotone })
}

/// Layers a node of `core` uses to reach `lambda` with delta at least `k`,
/// unioned over the core. Deltas are evaluated on the core itself.
pub fn certificate_layers(
    g: &MultiplexGraph,
    core: &NodeSet,
    k: u64,
    lambda: f64,
    params: &Params,
) -> Vec<LayerId> {
    let layers: Vec<LayerId> = (0..g.num_layers()).filter(|&l| g.weight(l) > 0.0).collect();
    let mut used = vec![false; g.num_layers()];
    if core.len() < 2 {
        return Vec::new();
    }
    for u in core.iter() {
        let mut psi: Vec<(f64, LayerId)> = layers
            .iter()
            .map(|&l| {
                let d = crate::density::delta_with(
                    g,
                    l,
                    core,
                    u,
                    params.p,
                    crate::density::DeltaConvention::Unnormalized,
                    params.saturation,
                )
                .unwrap_or(0.0);
                (d, l)
            })
            .collect();
        psi.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut acc = 0.0;
        for (d, l) in psi {
            if tolerant_floor(d, params.eps) < k {
                break;
            }
            used[l] = true;
            acc += g.weight(l);
            if reaches(acc, lambda, params.eps) {
                break;
            }
        }
    }
    (0..g.num_layers()).filter(|&l| used[l]).collect()
}
