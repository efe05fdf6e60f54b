// SPDX-License-Identifier: Apache-2.0

//! Browser bindings for the demo page in `www/`.
//!
//! Graphs cross the boundary as container text (`#mplex v1`), results as
//! JSON strings. The plain functions are usable natively; the
//! `#[wasm_bindgen]` wrappers only translate errors.

use mplex::approx::{approx_densest_with, approx_document};
use mplex::density::omega;
use mplex::firmcore::decompose_with;
use mplex::graph::{load_graph, write_container};
use mplex::synth::{generate, GenSpec, LayerWeights, PlantMode};
use mplex::{MultiplexGraph, PValue, Params};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

type Res<T> = Result<T, String>;

fn parse_graph(text: &str) -> Res<MultiplexGraph> {
    load_graph(text.as_bytes(), None::<&[u8]>).map(|l| l.graph).map_err(|e| e.to_string())
}

fn parse_p(p: &str) -> Res<PValue> {
    p.trim().parse().map_err(|e| format!("{e}"))
}

/// A graph with a planted clique (or avg-degree plant) as container text,
/// with the planted labels on the last line as a `# planted` comment.
pub fn generate_text(
    n: usize,
    m: usize,
    layers: usize,
    plant_size: usize,
    avg_degree: bool,
    noisy_layer: bool,
    seed: u64,
) -> Res<String> {
    let spec = GenSpec {
        n,
        m,
        layers,
        seed,
        plant_mode: if avg_degree { PlantMode::AvgDegree { factor: 3.0 } } else { PlantMode::Clique },
        plant_size,
        weights: LayerWeights::Uniform,
        noisy_layer: noisy_layer.then(|| layers.saturating_sub(1)),
    };
    let (g, planted) = generate(&spec).map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    write_container(&g, &mut buf).map_err(|e| e.to_string())?;
    let mut text = String::from_utf8(buf).map_err(|e| e.to_string())?;
    let labels: Vec<&str> = planted.iter().map(|u| g.label(u)).collect();
    text.push_str(&format!("# planted {}\n", labels.join(" ")));
    Ok(text)
}

fn planted_labels(text: &str) -> Vec<String> {
    text.lines()
        .filter_map(|l| l.strip_prefix("# planted"))
        .flat_map(|rest| rest.split_whitespace().map(str::to_string))
        .collect()
}

/// Approximate densest subgraph: the result document plus the graph's
/// adjacency summed over layers (for drawing) and the Jaccard overlap with
/// a planted set when one is recorded.
pub fn densest_json(text: &str, p: &str, beta: f64, alpha: usize) -> Res<String> {
    let g = parse_graph(text)?;
    let params = Params::new(parse_p(p)?, beta).with_alpha(alpha);
    let res = approx_densest_with(&g, &params, 1).map_err(|e| e.to_string())?;
    let mut doc = approx_document(&g, &res, &params, false).map_err(|e| e.to_string())?;
    let planted = planted_labels(text);
    if !planted.is_empty() {
        let set = g.node_set_from_labels(planted.iter().map(String::as_str)).map_err(|e| e.to_string())?;
        doc["planted"] = json!(planted);
        doc["jaccard"] = json!(res.best.nodes.jaccard(&set));
    }
    doc["labels"] = json!(g.nodes().map(|u| g.label(u)).collect::<Vec<_>>());
    let mut edges = Vec::new();
    for l in 0..g.num_layers() {
        for (u, v) in g.edges(l) {
            edges.push(json!([u, v, l]));
        }
    }
    doc["edges"] = Value::Array(edges);
    doc["layer_names"] = json!((0..g.num_layers()).map(|l| g.layer_name(l)).collect::<Vec<_>>());
    Ok(doc.to_string())
}

/// Core numbers for one threshold and the size of each core level.
pub fn decompose_json(text: &str, lambda: f64, p: &str) -> Res<String> {
    let g = parse_graph(text)?;
    let params = Params::new(parse_p(p)?, 0.0);
    let ci = decompose_with(&g, lambda, &params).map_err(|e| e.to_string())?;
    let mut remaining = g.num_nodes();
    let levels: Vec<Value> = ci
        .histogram()
        .into_iter()
        .map(|(k, count)| {
            let v = json!({"k": k, "nodes": count, "core_size": remaining});
            remaining -= count;
            v
        })
        .collect();
    Ok(json!({
        "lambda": lambda,
        "p": params.p.to_string(),
        "max_k": ci.max_k,
        "levels": levels,
        "core_of": g.nodes().map(|u| json!([g.label(u), ci.core_of[u as usize]])).collect::<Vec<_>>(),
    })
    .to_string())
}

/// Per-layer p-mean density of a node set over a grid of finite p, plus
/// the min/max degree limits.
pub fn omega_curve_json(text: &str, nodes: &str, p_min: f64, p_max: f64, steps: usize) -> Res<String> {
    let g = parse_graph(text)?;
    let s = g
        .node_set_from_labels(nodes.split(|c: char| c.is_whitespace() || c == ','))
        .map_err(|e| e.to_string())?;
    let steps = steps.max(2);
    let ps: Vec<f64> = (0..steps).map(|i| p_min + (p_max - p_min) * i as f64 / (steps - 1) as f64).collect();
    let mut layers = Vec::new();
    for l in 0..g.num_layers() {
        let curve: Res<Vec<f64>> =
            ps.iter().map(|&p| omega(&g, l, &s, PValue::Finite(p)).map_err(|e| e.to_string())).collect();
        let lo = omega(&g, l, &s, PValue::NegInf).map_err(|e| e.to_string())?;
        let hi = omega(&g, l, &s, PValue::PosInf).map_err(|e| e.to_string())?;
        layers.push(json!({"layer": g.layer_name(l), "omega": curve?, "min_degree": lo, "max_degree": hi}));
    }
    Ok(json!({"p": ps, "layers": layers}).to_string())
}

#[wasm_bindgen]
pub fn generate_graph(
    n: usize,
    m: usize,
    layers: usize,
    plant_size: usize,
    avg_degree: bool,
    noisy_layer: bool,
    seed: u32,
) -> Result<String, JsValue> {
    generate_text(n, m, layers, plant_size, avg_degree, noisy_layer, seed as u64)
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn densest(text: &str, p: &str, beta: f64, alpha: usize) -> Result<String, JsValue> {
    densest_json(text, p, beta, alpha).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn decompose(text: &str, lambda: f64, p: &str) -> Result<String, JsValue> {
    decompose_json(text, lambda, p).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn omega_curve(text: &str, nodes: &str, p_min: f64, p_max: f64, steps: usize) -> Result<String, JsValue> {
    omega_curve_json(text, nodes, p_min, p_max, steps).map_err(|e| JsValue::from_str(&e))
}
