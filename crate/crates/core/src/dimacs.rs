//! DIMACS edge-format reader and writer.
//!
//! Header `p edge n m`, edge lines `e u v` with 1-based vertex indices;
//! comment lines starting with `c` and blank lines are ignored.

use crate::error::GraphError;
use crate::graph::Graph;
use std::io::{BufRead, Write};

/// Parses a graph from DIMACS edge format.
pub fn read_dimacs<R: BufRead>(reader: R) -> Result<Graph, GraphError> {
    let mut n: Option<usize> = None;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| GraphError::BadDimacs(format!("io error: {e}")))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("p") => {
                if n.is_some() {
                    return Err(GraphError::BadDimacs("duplicate problem line".into()));
                }
                let fmt = parts.next().unwrap_or("");
                if fmt != "edge" && fmt != "col" {
                    return Err(GraphError::BadDimacs(format!(
                        "unsupported format '{fmt}' (expected 'edge')"
                    )));
                }
                let nv: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| GraphError::BadDimacs("bad vertex count".into()))?;
                let _m: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| GraphError::BadDimacs("bad edge count".into()))?;
                n = Some(nv);
            }
            Some("e") => {
                let u: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| GraphError::BadDimacs("bad edge endpoint".into()))?;
                let v: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| GraphError::BadDimacs("bad edge endpoint".into()))?;
                if u == 0 || v == 0 {
                    return Err(GraphError::BadDimacs(
                        "DIMACS vertices are 1-based; found index 0".into(),
                    ));
                }
                edges.push((u - 1, v - 1));
            }
            Some(tok) => {
                return Err(GraphError::BadDimacs(format!("unexpected token '{tok}'")));
            }
            None => {}
        }
    }
    let n = n.ok_or_else(|| GraphError::BadDimacs("missing problem line".into()))?;
    Graph::build(n, &edges)
}

/// Writes a graph in DIMACS edge format (edges ascending, 1-based).
pub fn write_dimacs<W: Write>(g: &Graph, mut w: W) -> std::io::Result<()> {
    writeln!(w, "p edge {} {}", g.n(), g.edge_count())?;
    for u in g.vertices() {
        for v in g.neighbours(u).iter() {
            if u < v {
                writeln!(w, "e {} {}", u + 1, v + 1)?;
            }
        }
    }
    Ok(())
}

/// Renders a graph to a DIMACS string.
pub fn to_dimacs_string(g: &Graph) -> String {
    let mut buf = Vec::new();
    write_dimacs(g, &mut buf).expect("writing to Vec cannot fail");
    String::from_utf8(buf).expect("DIMACS output is ASCII")
}
