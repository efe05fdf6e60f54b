// SPDX-License-Identifier: Apache-2.0

//! Synthetic multiplex graphs with a planted dense subgraph.
//!
//! Background edges are uniform over node pairs, independently per layer.
//! The plant is either a clique on the chosen nodes in every layer, or a
//! random subgraph whose edge probability is `factor` times the background
//! probability (capped at a clique).

use std::collections::HashSet;
use std::io::Write;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::graph::{GraphBuilder, MultiplexGraph, NodeId, NodeSet};

/// Weight assigned to the noisy layer under uniform weights.
pub const NOISY_WEIGHT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlantMode {
    Clique,
    /// Plant edge probability is `factor` times the background's.
    AvgDegree {
        factor: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayerWeights {
    Uniform,
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub n: usize,
    /// Background edges over all layers together.
    pub m: usize,
    pub layers: usize,
    pub seed: u64,
    pub plant_mode: PlantMode,
    pub plant_size: usize,
    pub weights: LayerWeights,
    /// A layer that gets background edges only; weighted `NOISY_WEIGHT`
    /// when weights are uniform.
    pub noisy_layer: Option<usize>,
}

impl GenSpec {
    /// 100 nodes, 10000 edges, 4 layers, planted 10-clique.
    pub fn s1(seed: u64) -> Self {
        GenSpec {
            n: 100,
            m: 10_000,
            layers: 4,
            seed,
            plant_mode: PlantMode::Clique,
            plant_size: 10,
            weights: LayerWeights::Uniform,
            noisy_layer: None,
        }
    }

    /// Same size as `s1`, with a planted 15-node average-degree subgraph.
    pub fn s2(seed: u64) -> Self {
        GenSpec { plant_mode: PlantMode::AvgDegree { factor: 3.0 }, plant_size: 15, ..Self::s1(seed) }
    }

    pub fn with_noisy_layer(mut self, layer: usize) -> Self {
        self.noisy_layer = Some(layer);
        self
    }

    fn layer_edges(&self, layer: usize) -> usize {
        self.m / self.layers + usize::from(layer < self.m % self.layers)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 {
            return Err(invalid("need at least one layer"));
        }
        if self.n == 0 || self.n > u32::MAX as usize {
            return Err(invalid(format!("node count {} out of range", self.n)));
        }
        if self.plant_size > self.n {
            return Err(invalid(format!("plant size {} exceeds node count {}", self.plant_size, self.n)));
        }
        let pairs = self.n * (self.n - 1) / 2;
        if self.layer_edges(0) > pairs {
            return Err(invalid(format!(
                "{} edges over {} layers is infeasible with {} nodes",
                self.m, self.layers, self.n
            )));
        }
        if let PlantMode::AvgDegree { factor } = self.plant_mode {
            if !(factor > 0.0) || !factor.is_finite() {
                return Err(invalid("plant factor must be finite and > 0"));
            }
        }
        if let LayerWeights::Explicit(w) = &self.weights {
            if w.len() != self.layers || w.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                return Err(invalid("explicit weights must be one finite value >= 0 per layer"));
            }
        }
        if let Some(l) = self.noisy_layer {
            if l >= self.layers {
                return Err(invalid(format!("noisy layer {l} out of range")));
            }
        }
        Ok(())
    }
}

fn pair_from_index(i: usize, s: usize) -> (usize, usize) {
    // row-major over the strict upper triangle of an s x s matrix
    let mut row = 0;
    let mut rest = i;
    while rest >= s - 1 - row {
        rest -= s - 1 - row;
        row += 1;
    }
    (row, row + 1 + rest)
}

fn background(rng: &mut ChaCha8Rng, n: usize, m: usize) -> HashSet<(u32, u32)> {
    let pairs = n * (n - 1) / 2;
    let complement = m > pairs / 2;
    let target = if complement { pairs - m } else { m };
    let mut chosen = HashSet::with_capacity(target);
    while chosen.len() < target {
        let u = rng.gen_range(0..n as u32);
        let v = rng.gen_range(0..n as u32);
        if u != v {
            chosen.insert((u.min(v), u.max(v)));
        }
    }
    if !complement {
        return chosen;
    }
    let mut out = HashSet::with_capacity(m);
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if !chosen.contains(&(u, v)) {
                out.insert((u, v));
            }
        }
    }
    out
}

/// Builds the graph and returns it with the planted node set.
pub fn generate(spec: &GenSpec) -> Result<(MultiplexGraph, NodeSet)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n;
    let mut planted: Vec<u32> =
        index::sample(&mut rng, n, spec.plant_size).into_iter().map(|i| i as u32).collect();
    planted.sort_unstable();

    let mut b = GraphBuilder::new();
    for u in 0..n {
        b.node(&u.to_string());
    }
    let s = planted.len();
    let plant_pairs = s * s.saturating_sub(1) / 2;
    let all_pairs = (n * (n - 1) / 2).max(1);
    for layer in 0..spec.layers {
        let l = b.layer(&(layer + 1).to_string());
        let w = match &spec.weights {
            LayerWeights::Explicit(w) => w[layer],
            LayerWeights::Uniform if spec.noisy_layer == Some(layer) => NOISY_WEIGHT,
            LayerWeights::Uniform => 1.0,
        };
        b.set_weight(l, w)?;

        let m_l = spec.layer_edges(layer);
        let mut edges: Vec<(u32, u32)> = background(&mut rng, n, m_l).into_iter().collect();
        edges.sort_unstable();

        if spec.noisy_layer != Some(layer) && plant_pairs > 0 {
            let count = match spec.plant_mode {
                PlantMode::Clique => plant_pairs,
                PlantMode::AvgDegree { factor } => {
                    let q = (factor * m_l as f64 / all_pairs as f64).min(1.0);
                    ((q * plant_pairs as f64).ceil() as usize).min(plant_pairs)
                }
            };
            let mut picks: Vec<usize> = index::sample(&mut rng, plant_pairs, count).into_vec();
            picks.sort_unstable();
            for i in picks {
                let (a, c) = pair_from_index(i, s);
                edges.push((planted[a], planted[c]));
            }
        }
        for (u, v) in edges {
            b.edge(u as NodeId, v as NodeId, l)?;
        }
    }
    let (g, _) = b.build();
    let set = NodeSet::new(planted, n)?;
    Ok((g, set))
}

/// Sidecar listing the planted labels, one per line.
pub fn write_planted<W: Write>(g: &MultiplexGraph, planted: &NodeSet, mut out: W) -> Result<()> {
    for u in planted.iter() {
        writeln!(out, "{}", g.label(u))?;
    }
    Ok(())
}
