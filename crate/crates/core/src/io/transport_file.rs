use std::fmt::Write;

use super::{expect_fields, parse_num, LoadError, Reader};
use crate::transport::{Edge, TransportError, TransportNetwork};

const KIND: &str = "fleetgrid-transport";
const VERSION: u32 = 1;

/// Parses a transport file: `nodes N`, then one directed edge per line as
/// `from to weight`, optionally followed by the word `restricted`.
/// Duplicate directed edges are rejected.
pub fn parse_transport(text: &str, source_name: &str) -> Result<TransportNetwork, LoadError> {
    let mut r = Reader::new(text, source_name, KIND, VERSION)?;
    let Some(first) = r.next() else {
        return Err(r.error(1, "missing `nodes N`"));
    };
    let (line, fields) = (first.line, first.fields);
    let node_count: usize = match fields.as_slice() {
        ["nodes", n] => parse_num(&r, line, n, "node count")?,
        _ => return Err(r.error(line, "expected `nodes N`")),
    };

    let mut edges = Vec::new();
    let mut closed = Vec::new();
    let mut seen = std::collections::BTreeMap::new();
    while let Some(rec) = r.next() {
        let (line, f) = (rec.line, &rec.fields);
        expect_fields(&r, &rec, 3..=4, "from to weight [restricted]")?;
        let edge = Edge {
            from: parse_num(&r, line, f[0], "from node")?,
            to: parse_num(&r, line, f[1], "to node")?,
            weight: parse_num(&r, line, f[2], "weight")?,
        };
        if let Some(prev) = seen.insert((edge.from, edge.to), line) {
            return Err(r.error(line, format!("duplicate directed edge {}->{} (first on line {prev})", edge.from, edge.to)));
        }
        match f.get(3) {
            None => {}
            Some(&"restricted") => closed.push(edges.len()),
            Some(other) => return Err(r.error(line, format!("unknown edge flag `{other}`"))),
        }
        for node in [edge.from, edge.to] {
            if node == 0 || node > node_count {
                return Err(r.error(line, format!("node {node} is outside 1..={node_count}")));
            }
        }
        edges.push(edge);
    }
    let wrap = |source: TransportError| LoadError::Transport {
        source_name: source_name.to_string(),
        source,
    };
    let mut net = TransportNetwork::new(node_count, edges).map_err(wrap)?;
    for id in closed {
        net.restrict_edge(id);
    }
    Ok(net)
}

pub fn write_transport(net: &TransportNetwork) -> String {
    let mut out = format!("{KIND} {VERSION}\nnodes {}\n# from to weight [restricted]\n", net.node_count());
    for (id, e) in net.edges().iter().enumerate() {
        let _ = write!(out, "{} {} {}", e.from, e.to, e.weight);
        if net.is_restricted(id) {
            out.push_str(" restricted");
        }
        out.push('\n');
    }
    out
}
