// SPDX-License-Identifier: Apache-2.0

//! Layer-weighted multiplex graph: a shared node set, one undirected simple
//! graph per layer, and a nonnegative weight per layer.

mod io;

pub use io::{load_graph, read_graph_files, write_container, write_edge_list, write_weights, Loaded};

use std::collections::HashMap;

use crate::error::{invalid, Error, Result};

pub type NodeId = u32;
pub type LayerId = usize;

#[derive(Debug, Clone, PartialEq)]
struct Layer {
    name: String,
    weight: f64,
    // CSR adjacency, neighbor lists sorted ascending.
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
}

impl Layer {
    fn neighbors(&self, u: NodeId) -> &[NodeId] {
        let u = u as usize;
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }
}

/// Immutable multiplex graph. Node ids are dense `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplexGraph {
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
    layers: Vec<Layer>,
}

impl MultiplexGraph {
    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        0..self.labels.len() as NodeId
    }

    pub fn label(&self, u: NodeId) -> &str {
        &self.labels[u as usize]
    }

    pub fn node_id(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    pub fn layer_name(&self, layer: LayerId) -> &str {
        &self.layers[layer].name
    }

    pub fn layer_id(&self, name: &str) -> Option<LayerId> {
        self.layers.iter().position(|l| l.name == name)
    }

    pub fn weight(&self, layer: LayerId) -> f64 {
        self.layers[layer].weight
    }

    pub fn weights(&self) -> Vec<f64> {
        self.layers.iter().map(|l| l.weight).collect()
    }

    /// `w*`, the sum of all layer weights.
    pub fn total_weight(&self) -> f64 {
        self.layers.iter().map(|l| l.weight).sum()
    }

    /// Sorted neighbors of `u` in `layer`.
    pub fn neighbors(&self, u: NodeId, layer: LayerId) -> &[NodeId] {
        self.layers[layer].neighbors(u)
    }

    pub fn edge_count(&self, layer: LayerId) -> usize {
        self.layers[layer].targets.len() / 2
    }

    pub fn total_edges(&self) -> usize {
        (0..self.num_layers()).map(|l| self.edge_count(l)).sum()
    }

    /// Edges of `layer` as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self, layer: LayerId) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes().flat_map(move |u| {
            self.neighbors(u, layer).iter().copied().filter(move |&v| v > u).map(move |v| (u, v))
        })
    }

    /// Degree of `node` in `layer`, counted inside `restrict` when given.
    pub fn degree(&self, node: NodeId, layer: LayerId, restrict: Option<&NodeSet>) -> Result<usize> {
        self.check_node(node)?;
        self.check_layer(layer)?;
        let nbrs = self.neighbors(node, layer);
        match restrict {
            None => Ok(nbrs.len()),
            Some(s) => {
                if !s.contains(node) {
                    return Err(Error::NodeNotInSet(node));
                }
                Ok(sorted_intersection_len(nbrs, s.as_slice()))
            }
        }
    }

    /// Number of edges of `layer` with both endpoints in `s`.
    pub fn induced_edge_count(&self, layer: LayerId, s: &NodeSet) -> usize {
        s.iter().map(|u| sorted_intersection_len(self.neighbors(u, layer), s.as_slice())).sum::<usize>() / 2
    }

    /// Same graph with the layer weights replaced.
    pub fn with_weights(&self, weights: &[f64]) -> Result<Self> {
        if weights.len() != self.layers.len() {
            return Err(invalid(format!(
                "expected {} layer weights, got {}",
                self.layers.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(invalid(format!("layer weight must be finite and >= 0, got {w}")));
        }
        let mut g = self.clone();
        for (layer, &w) in g.layers.iter_mut().zip(weights) {
            layer.weight = w;
        }
        Ok(g)
    }

    /// Resolves labels to a node set.
    pub fn node_set_from_labels<'a>(&self, labels: impl IntoIterator<Item = &'a str>) -> Result<NodeSet> {
        let ids = labels
            .into_iter()
            .map(|l| self.node_id(l).ok_or_else(|| Error::UnknownNode(l.to_string())))
            .collect::<Result<Vec<_>>>()?;
        NodeSet::new(ids, self.num_nodes())
    }

    pub fn all_nodes(&self) -> NodeSet {
        NodeSet::from_sorted(self.nodes().collect())
    }

    fn check_node(&self, u: NodeId) -> Result<()> {
        if (u as usize) < self.num_nodes() {
            Ok(())
        } else {
            Err(invalid(format!("node id {u} out of range")))
        }
    }

    fn check_layer(&self, layer: LayerId) -> Result<()> {
        if layer < self.num_layers() {
            Ok(())
        } else {
            Err(invalid(format!("layer id {layer} out of range")))
        }
    }
}

fn sorted_intersection_len(a: &[NodeId], b: &[NodeId]) -> usize {
    // Galloping is not worth it at the sizes involved; a merge suffices.
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Sorted, duplicate-free set of node ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct NodeSet(Vec<NodeId>);

impl NodeSet {
    /// Builds a set from arbitrary ids; duplicates are collapsed.
    pub fn new(ids: impl IntoIterator<Item = NodeId>, n: usize) -> Result<Self> {
        let mut v: Vec<NodeId> = ids.into_iter().collect();
        if let Some(&bad) = v.iter().find(|&&u| u as usize >= n) {
            return Err(invalid(format!("node id {bad} out of range for {n} nodes")));
        }
        v.sort_unstable();
        v.dedup();
        Ok(NodeSet(v))
    }

    pub(crate) fn from_sorted(v: Vec<NodeId>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        NodeSet(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, u: NodeId) -> bool {
        self.0.binary_search(&u).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[NodeId] {
        &self.0
    }

    /// The set minus one node.
    pub fn without(&self, u: NodeId) -> NodeSet {
        NodeSet(self.0.iter().copied().filter(|&v| v != u).collect())
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.0.iter().all(|&u| other.contains(u))
    }

    pub fn jaccard(&self, other: &NodeSet) -> f64 {
        let inter = sorted_intersection_len(&self.0, &other.0);
        let union = self.len() + other.len() - inter;
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }

    /// Boolean membership vector of length `n`.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &u in &self.0 {
            m[u as usize] = true;
        }
        m
    }
}

/// Incremental constructor used by the loaders and generators.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
    layer_names: Vec<String>,
    layer_weights: Vec<f64>,
    layer_index: HashMap<String, LayerId>,
    adj: Vec<Vec<NodeId>>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Interns a node label, returning its id.
    pub fn node(&mut self, label: &str) -> NodeId {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = self.labels.len() as NodeId;
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        id
    }

    /// Interns a layer name with default weight 1.0.
    pub fn layer(&mut self, name: &str) -> LayerId {
        if let Some(&id) = self.layer_index.get(name) {
            return id;
        }
        let id = self.layer_names.len();
        self.layer_names.push(name.to_string());
        self.layer_weights.push(1.0);
        self.layer_index.insert(name.to_string(), id);
        self.adj.push(Vec::new());
        id
    }

    pub fn find_layer(&self, name: &str) -> Option<LayerId> {
        self.layer_index.get(name).copied()
    }

    pub fn set_weight(&mut self, layer: LayerId, weight: f64) -> Result<()> {
        if !(weight >= 0.0) || !weight.is_finite() {
            return Err(invalid(format!("layer weight must be finite and >= 0, got {weight}")));
        }
        self.layer_weights[layer] = weight;
        Ok(())
    }

    /// Adds an undirected edge. Self-loops are rejected; duplicates are
    /// collapsed at `build` time.
    pub fn edge(&mut self, u: NodeId, v: NodeId, layer: LayerId) -> Result<()> {
        if u == v {
            return Err(invalid(format!("self-loop on node {u}")));
        }
        self.adj[layer].push(u.min(v));
        self.adj[layer].push(u.max(v));
        Ok(())
    }

    /// Finalizes the graph; returns it with the number of merged duplicate edges.
    pub fn build(self) -> (MultiplexGraph, usize) {
        let n = self.labels.len();
        let mut merged = 0;
        let mut layers = Vec::with_capacity(self.layer_names.len());
        for ((name, weight), flat) in self.layer_names.into_iter().zip(self.layer_weights).zip(self.adj) {
            let mut pairs: Vec<(NodeId, NodeId)> = flat.chunks_exact(2).map(|c| (c[0], c[1])).collect();
            let before = pairs.len();
            pairs.sort_unstable();
            pairs.dedup();
            merged += before - pairs.len();

            let mut deg = vec![0usize; n + 1];
            for &(u, v) in &pairs {
                deg[u as usize] += 1;
                deg[v as usize] += 1;
            }
            let mut offsets = vec![0usize; n + 1];
            for u in 0..n {
                offsets[u + 1] = offsets[u] + deg[u];
            }
            let mut fill = offsets.clone();
            let mut targets = vec![0 as NodeId; offsets[n]];
            for &(u, v) in &pairs {
                targets[fill[u as usize]] = v;
                fill[u as usize] += 1;
                targets[fill[v as usize]] = u;
                fill[v as usize] += 1;
            }
            for u in 0..n {
                targets[offsets[u]..offsets[u + 1]].sort_unstable();
            }
            layers.push(Layer { name, weight, offsets, targets });
        }
        (MultiplexGraph { labels: self.labels, index: self.index, layers }, merged)
    }
}
