// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use mplex::{GraphBuilder, MultiplexGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random multiplex graph: `n` nodes, `layers` layers, per-layer edge
/// probability drawn from [0.15, 0.85], weights from (0, 2] or all 1.
pub fn random_graph(seed: u64, n: usize, layers: usize, unit_weights: bool) -> MultiplexGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = GraphBuilder::new();
    for u in 0..n {
        b.node(&format!("v{u}"));
    }
    for l in 0..layers {
        let id = b.layer(&format!("L{l}"));
        let w = if unit_weights { 1.0 } else { 2.0 - rng.gen::<f64>() * 2.0 };
        b.set_weight(id, w.max(1e-3)).unwrap();
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

pub fn random_small(seed: u64, max_n: usize, max_layers: usize, unit_weights: bool) -> MultiplexGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let n = rng.gen_range(3..=max_n);
    let layers = rng.gen_range(1..=max_layers);
    random_graph(seed, n, layers, unit_weights)
}
