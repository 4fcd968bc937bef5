use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{Graph, Vertex};

/// Largest vertex count accepted from text input.
pub const MAX_PARSE_VERTICES: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {offset}: {reason}")]
pub struct ParseError {
    pub offset: usize,
    pub reason: String,
}

impl ParseError {
    pub fn new(offset: usize, reason: impl Into<String>) -> Self {
        ParseError {
            offset,
            reason: reason.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphFormat {
    Graph6,
    EdgeList,
}

pub fn parse_graph(text: &str, format: GraphFormat) -> Result<Graph, ParseError> {
    match format {
        GraphFormat::Graph6 => parse_graph6(text),
        GraphFormat::EdgeList => parse_edge_list(text),
    }
}

pub fn emit_graph(g: &Graph, format: GraphFormat) -> String {
    match format {
        GraphFormat::Graph6 => emit_graph6(g),
        GraphFormat::EdgeList => emit_edge_list(g),
    }
}

const GRAPH6_HEADER: &str = ">>graph6<<";

/// Decodes one graph6 record. A `>>graph6<<` header and trailing whitespace are accepted.
pub fn parse_graph6(text: &str) -> Result<Graph, ParseError> {
    let mut start = 0;
    if text.starts_with(GRAPH6_HEADER) {
        start = GRAPH6_HEADER.len();
    }
    let body = text[start..].trim_end();
    let bytes = body.as_bytes();
    if bytes.is_empty() {
        return Err(ParseError::new(start, "empty graph6 record"));
    }
    for (i, &b) in bytes.iter().enumerate() {
        if !(63..=126).contains(&b) {
            return Err(ParseError::new(
                start + i,
                format!("byte {b} outside graph6 range 63..=126"),
            ));
        }
    }
    let (n, mut pos) = decode_size(bytes, start)?;
    if n > MAX_PARSE_VERTICES {
        return Err(ParseError::new(
            start,
            format!("{n} vertices exceeds the limit {MAX_PARSE_VERTICES}"),
        ));
    }
    let bits = n * n.saturating_sub(1) / 2;
    let need = bits.div_ceil(6);
    let have = bytes.len() - pos;
    if have != need {
        return Err(ParseError::new(
            start + pos.min(bytes.len()),
            format!("expected {need} adjacency bytes for n = {n}, found {have}"),
        ));
    }
    let mut edges = Vec::new();
    let mut k = 0;
    'outer: for j in 1..n {
        for i in 0..j {
            let byte = bytes[pos + k / 6] - 63;
            if byte >> (5 - k % 6) & 1 == 1 {
                edges.push((i, j));
            }
            k += 1;
            if k == bits {
                break 'outer;
            }
        }
    }
    pos += need;
    if bits % 6 != 0 {
        let last = bytes[pos - 1] - 63;
        let pad = 6 - bits % 6;
        if last & ((1 << pad) - 1) != 0 {
            return Err(ParseError::new(start + pos - 1, "nonzero padding bits"));
        }
    }
    Graph::from_edges(n, &edges).map_err(|e| ParseError::new(start, e.to_string()))
}

fn decode_size(bytes: &[u8], start: usize) -> Result<(usize, usize), ParseError> {
    let field = |from: usize, len: usize| -> Result<usize, ParseError> {
        if bytes.len() < from + len {
            return Err(ParseError::new(start + bytes.len(), "truncated size field"));
        }
        Ok(bytes[from..from + len]
            .iter()
            .fold(0usize, |acc, &b| (acc << 6) | (b - 63) as usize))
    };
    if bytes[0] != 126 {
        return Ok(((bytes[0] - 63) as usize, 1));
    }
    if bytes.len() > 1 && bytes[1] == 126 {
        return Ok((field(2, 6)?, 8));
    }
    Ok((field(1, 3)?, 4))
}

pub fn emit_graph6(g: &Graph) -> String {
    let n = g.n();
    let mut out: Vec<u8> = Vec::new();
    if n < 63 {
        out.push(n as u8 + 63);
    } else if n < 258_048 {
        out.push(126);
        for shift in [12, 6, 0] {
            out.push(((n >> shift) & 63) as u8 + 63);
        }
    } else {
        out.extend([126, 126]);
        for shift in [30, 24, 18, 12, 6, 0] {
            out.push(((n >> shift) & 63) as u8 + 63);
        }
    }
    let mut acc = 0u8;
    let mut k = 0;
    for j in 1..n {
        for i in 0..j {
            acc = (acc << 1) | g.has_edge(i, j) as u8;
            k += 1;
            if k % 6 == 0 {
                out.push(acc + 63);
                acc = 0;
            }
        }
    }
    if k % 6 != 0 {
        out.push((acc << (6 - k % 6)) + 63);
    }
    String::from_utf8(out).expect("graph6 bytes are ASCII")
}

/// Edge list: `u v` per line, `#` comments; a line with a single id declares a vertex.
pub fn parse_edge_list(text: &str) -> Result<Graph, ParseError> {
    let mut edges = Vec::new();
    let mut n = 0usize;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let content = line.split('#').next().unwrap_or("");
        let mut ids = Vec::new();
        let mut col = 0;
        for tok in content.split_whitespace() {
            let at = offset + content[col..].find(tok).map_or(col, |p| p + col);
            col = at - offset + tok.len();
            let id: Vertex = tok
                .parse()
                .map_err(|_| ParseError::new(at, format!("expected a vertex id, found {tok:?}")))?;
            if id >= MAX_PARSE_VERTICES {
                return Err(ParseError::new(
                    at,
                    format!("vertex id {id} exceeds the limit"),
                ));
            }
            ids.push((id, at));
        }
        match ids.as_slice() {
            [] => {}
            [(v, _)] => n = n.max(v + 1),
            [(u, _), (v, at)] => {
                if u == v {
                    return Err(ParseError::new(*at, format!("loop at vertex {u}")));
                }
                n = n.max(u + 1).max(v + 1);
                edges.push((*u, *v));
            }
            [_, _, (_, at), ..] => return Err(ParseError::new(*at, "more than two ids on a line")),
        }
        offset += line.len();
    }
    Graph::from_edges(n, &edges).map_err(|e| ParseError::new(0, e.to_string()))
}

pub fn emit_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    for v in g.vertices() {
        if g.degree(v) == 0 {
            let _ = writeln!(out, "{v}");
        }
    }
    out
}
