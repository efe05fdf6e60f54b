// SPDX-License-Identifier: Apache-2.0

//! Fast paths against exhaustive ground truth on small random graphs.

mod common;

use common::random_small;
use mplex::approx::{approx_densest_with, candidate_lambdas};
use mplex::density::rho;
use mplex::firmcore::{decompose, top_lambda, CoreIndex};
use mplex::oracle::{
    exact_core, exact_densest, exact_rho_subsets, exhaustive_top_lambda, firmcore_unweighted,
};
use mplex::params::DEFAULT_EPS;
use mplex::{NodeSet, PValue, Params};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LADDER: [PValue; 7] = [
    PValue::NegInf,
    PValue::Finite(-1.0),
    PValue::Finite(0.0),
    PValue::Finite(0.5),
    PValue::Finite(1.0),
    PValue::Finite(2.0),
    PValue::PosInf,
];

fn core_at(ci: &CoreIndex, k: u64) -> NodeSet {
    ci.extract(k).unwrap_or_else(|_| NodeSet::new([], ci.core_of.len()).unwrap())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn rho_matches_all_layer_subsets() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for seed in 0..60 {
        let g = random_small(seed, 9, 5, seed % 3 == 0);
        for &p in &LADDER {
            for beta in [0.0, 0.5, 1.0, 2.0] {
                let params = Params::new(p, beta);
                let members: Vec<u32> = g.nodes().filter(|_| rng.gen_bool(0.6)).collect();
                if members.is_empty() {
                    continue;
                }
                let s = NodeSet::new(members, g.num_nodes()).unwrap();
                let fast = rho(&g, &s, &params).unwrap().value;
                let slow = exact_rho_subsets(&g, &s, &params).unwrap().value;
                assert!(close(fast, slow), "seed {seed} p {p} beta {beta}: {fast} vs {slow}");
            }
        }
    }
}

#[test]
fn top_lambda_matches_subset_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..4000 {
        let nl = rng.gen_range(1..=6);
        let psi: Vec<f64> = (0..nl).map(|_| rng.gen_range(-2.0..10.0f64).round() / 2.0).collect();
        let w: Vec<f64> = (0..nl).map(|_| rng.gen_range(1..=8) as f64 / 4.0).collect();
        let lambda = rng.gen_range(1..=24) as f64 / 4.0;
        let fast = top_lambda(&psi, &w, lambda).unwrap();
        let slow = exhaustive_top_lambda(&psi, &w, lambda, DEFAULT_EPS);
        assert_eq!(fast, slow, "psi {psi:?} w {w:?} lambda {lambda}");
    }
}

#[test]
fn cores_match_iterated_deletion() {
    for seed in 0..40 {
        let g = random_small(100 + seed, 9, 4, false);
        let lambdas = candidate_lambdas(&g.weights(), g.num_layers(), 1e-9).unwrap();
        for &p in &LADDER {
            for &lam in &lambdas {
                let ci = decompose(&g, lam, p).unwrap();
                let mut ks: Vec<u64> = ci.levels().iter().flat_map(|&k| [k, k.saturating_add(1)]).collect();
                ks.push(0);
                for k in ks {
                    let want = exact_core(&g, k, lam, p).unwrap();
                    assert_eq!(core_at(&ci, k), want, "seed {seed} p {p} lambda {lam} k {k}");
                }
            }
        }
    }
}

#[test]
fn unit_weight_cores_reduce_to_firmcore() {
    for seed in 0..30 {
        let g = random_small(200 + seed, 12, 4, true);
        for lam in 1..=g.num_layers() {
            let ci = decompose(&g, lam as f64, PValue::Finite(1.0)).unwrap();
            for k in 0..=ci.max_k / 2 + 1 {
                assert_eq!(core_at(&ci, 2 * k), firmcore_unweighted(&g, k as usize, lam), "seed {seed}");
            }
        }
    }
}

#[test]
fn approximation_never_beats_the_optimum() {
    for seed in 0..40 {
        let g = random_small(300 + seed, 8, 3, seed % 2 == 0);
        for &p in &LADDER {
            let params = Params::new(p, 1.0).with_alpha(3);
            let exact = exact_densest(&g, &params).unwrap().rho_value;
            let res = approx_densest_with(&g, &params, 1).unwrap();
            let found = res.best.rho_value;
            assert!(found <= exact + 1e-9 * exact.max(1.0), "seed {seed} p {p}: {found} > {exact}");
            assert!(close(found, rho(&g, &res.best.nodes, &params).unwrap().value));
        }
    }
}
