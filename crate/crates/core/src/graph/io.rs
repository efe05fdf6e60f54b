// SPDX-License-Identifier: Apache-2.0

//! Text formats.
//!
//! Edge list: one `<u> <v> <layer>` per line, whitespace or tab separated,
//! `#` starts a comment line. Weight file: `<layer> <weight>` per line.
//!
//! Container (`#mplex v1` on the first line) bundles everything:
//!
//! ```text
//! #mplex v1
//! #layer <name> <weight>
//! #node <label>
//! <u> <v> <layer>
//! ```
//!
//! `#node` lines pin node ids (and keep isolated nodes); `#layer` lines pin
//! layer order and weights. Any other `#` line is a comment.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{GraphBuilder, MultiplexGraph};
use crate::error::{Error, Result};

pub const CONTAINER_HEADER: &str = "#mplex v1";

#[derive(Debug)]
pub struct Loaded {
    pub graph: MultiplexGraph,
    /// Number of edge lines that repeated an edge already present in the layer.
    pub duplicates_merged: usize,
}

/// Parses an edge list (or container) plus an optional weight file.
pub fn load_graph<E: BufRead, W: BufRead>(edges: E, weights: Option<W>) -> Result<Loaded> {
    let mut b = GraphBuilder::new();
    let mut container = false;
    for (i, line) in edges.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if i == 0 && t == CONTAINER_HEADER {
            container = true;
            continue;
        }
        if let Some(rest) = t.strip_prefix('#') {
            if container {
                parse_directive(&mut b, rest, lineno)?;
            }
            continue;
        }
        let f: Vec<&str> = t.split_whitespace().collect();
        if f.len() != 3 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected '<u> <v> <layer>', got {} fields", f.len()),
            });
        }
        if f[0] == f[1] {
            return Err(Error::SelfLoop { line: lineno, node: f[0].to_string() });
        }
        let u = b.node(f[0]);
        let v = b.node(f[1]);
        let l = b.layer(f[2]);
        b.edge(u, v, l)?;
    }

    if let Some(w) = weights {
        for (i, line) in w.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = t.split_whitespace().collect();
            if f.len() != 2 {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected '<layer> <weight>', got {} fields", f.len()),
                });
            }
            let layer = b
                .find_layer(f[0])
                .ok_or_else(|| Error::UnknownLayer { line: lineno, layer: f[0].to_string() })?;
            let weight = parse_weight(f[0], f[1], lineno)?;
            b.set_weight(layer, weight)?;
        }
    }

    let (graph, duplicates_merged) = b.build();
    Ok(Loaded { graph, duplicates_merged })
}

fn parse_weight(layer: &str, s: &str, line: usize) -> Result<f64> {
    let w: f64 = s.parse().map_err(|_| Error::Parse { line, msg: format!("bad weight '{s}'") })?;
    if !w.is_finite() {
        return Err(Error::Parse { line, msg: format!("non-finite weight '{s}'") });
    }
    if w < 0.0 {
        return Err(Error::NegativeWeight { line, layer: layer.to_string(), weight: w });
    }
    Ok(w)
}

fn parse_directive(b: &mut GraphBuilder, rest: &str, line: usize) -> Result<()> {
    let f: Vec<&str> = rest.split_whitespace().collect();
    match f.as_slice() {
        ["layer", name, weight] => {
            let w = parse_weight(name, weight, line)?;
            let l = b.layer(name);
            b.set_weight(l, w)
        }
        ["node", label] => {
            b.node(label);
            Ok(())
        }
        ["layer", ..] | ["node", ..] => {
            Err(Error::Parse { line, msg: format!("malformed directive '#{rest}'") })
        }
        _ => Ok(()),
    }
}

/// Opens an edge/container file and an optional weight file from disk.
pub fn read_graph_files(edges: &Path, weights: Option<&Path>) -> Result<Loaded> {
    let e = BufReader::new(File::open(edges)?);
    match weights {
        Some(w) => load_graph(e, Some(BufReader::new(File::open(w)?))),
        None => load_graph(e, None::<BufReader<File>>),
    }
}

/// Writes the self-describing container.
pub fn write_container<W: Write>(g: &MultiplexGraph, mut out: W) -> Result<()> {
    writeln!(out, "{CONTAINER_HEADER}")?;
    for l in 0..g.num_layers() {
        writeln!(out, "#layer {} {}", g.layer_name(l), g.weight(l))?;
    }
    for u in g.nodes() {
        writeln!(out, "#node {}", g.label(u))?;
    }
    write_edge_list(g, &mut out)
}

/// Writes the plain edge list, layer by layer.
pub fn write_edge_list<W: Write>(g: &MultiplexGraph, mut out: W) -> Result<()> {
    for l in 0..g.num_layers() {
        for (u, v) in g.edges(l) {
            writeln!(out, "{}\t{}\t{}", g.label(u), g.label(v), g.layer_name(l))?;
        }
    }
    Ok(())
}

pub fn write_weights<W: Write>(g: &MultiplexGraph, mut out: W) -> Result<()> {
    for l in 0..g.num_layers() {
        writeln!(out, "{}\t{}", g.layer_name(l), g.weight(l))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::t1;

    fn load(edges: &str) -> Result<Loaded> {
        load_graph(edges.as_bytes(), None::<&[u8]>)
    }

    #[test]
    fn symmetric_duplicates_merge() {
        let l = load("a b 1\nb a 1\n").unwrap();
        assert_eq!(l.graph.num_nodes(), 2);
        assert_eq!(l.graph.edge_count(0), 1);
        assert_eq!(l.duplicates_merged, 1);
    }

    #[test]
    fn t1_counts() {
        let g = t1();
        assert_eq!(g.num_nodes(), 4);
        assert_eq!(g.edge_count(0), 4);
        assert_eq!(g.edge_count(1), 1);
        assert_eq!(g.weights(), vec![1.0, 0.5]);
    }

    #[test]
    fn self_loop_reports_line() {
        match load("a b 1\na a 1\n") {
            Err(Error::SelfLoop { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_line_reports_line() {
        match load("# comment\na b\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn weight_errors() {
        let e = "a b 1\n";
        let unknown = load_graph(e.as_bytes(), Some("7 1.0\n".as_bytes()));
        assert!(matches!(unknown, Err(Error::UnknownLayer { line: 1, .. })));
        let neg = load_graph(e.as_bytes(), Some("1 -2\n".as_bytes()));
        assert!(matches!(neg, Err(Error::NegativeWeight { .. })));
        let missing = load_graph("a b 1\nb c 2\n".as_bytes(), Some("1 0.5\n".as_bytes())).unwrap();
        assert_eq!(missing.graph.weights(), vec![0.5, 1.0]);
    }

    #[test]
    fn tabs_and_comments() {
        let l = load("# header\n\na\tb\t1\n  b\tc  1\n").unwrap();
        assert_eq!(l.graph.edge_count(0), 2);
    }

    #[test]
    fn container_round_trip_exact() {
        let g =
            load_graph("x y L1\ny z L1\nx z L2\n".as_bytes(), Some("L2 0.25\n".as_bytes())).unwrap().graph;
        let mut buf = Vec::new();
        write_container(&g, &mut buf).unwrap();
        let h = load(std::str::from_utf8(&buf).unwrap()).unwrap().graph;
        assert_eq!(g, h);
    }

    #[test]
    fn container_keeps_isolated_nodes() {
        let text = "#mplex v1\n#layer a 2\n#node q\n#node r\nr s a\n";
        let g = load(text).unwrap().graph;
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.node_id("q"), Some(0));
        assert_eq!(g.weight(0), 2.0);
    }
}
