//! Text and JSON encodings of graphs and colorings.
//!
//! Graph text format, one directive per line, `#` starts a comment:
//!
//! ```text
//! n 3
//! e 0 1
//! e 1 2
//! vcolor 0 5
//! acolor 0 1 2
//! pcolor 0 2 7
//! ```
//!
//! `n` must come before everything else. `acolor` requires the edge.

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{GraphError, ParseError};
use crate::graph::ColoredGraph;
use crate::refine::TupleColoring;

/// Largest vertex count either format accepts.
pub const MAX_VERTICES: usize = 1 << 20;

pub fn parse_graph(bytes: &[u8]) -> Result<ColoredGraph, ParseError> {
    let text = std::str::from_utf8(bytes).map_err(|e| ParseError::syntax(0, format!("invalid UTF-8: {e}")))?;
    parse_graph_str(text)
}

fn number<T: std::str::FromStr>(line: usize, tok: Option<&str>, what: &str) -> Result<T, ParseError> {
    let tok = tok.ok_or_else(|| ParseError::syntax(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| ParseError::syntax(line, format!("bad {what} {tok:?}")))
}

pub fn parse_graph_str(text: &str) -> Result<ColoredGraph, ParseError> {
    let mut builder = None;
    let mut n = 0usize;
    let mut vcolored = HashSet::new();
    let mut acolored = HashSet::new();
    let mut pcolored = HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let head = toks.next().unwrap_or("");
        if head == "n" {
            if builder.is_some() {
                return Err(ParseError::syntax(line, "repeated header"));
            }
            n = number(line, toks.next(), "vertex count")?;
            if n > MAX_VERTICES {
                return Err(ParseError::syntax(line, format!("vertex count {n} exceeds {MAX_VERTICES}")));
            }
            if toks.next().is_some() {
                return Err(ParseError::syntax(line, "trailing tokens"));
            }
            builder = Some(ColoredGraph::builder(n));
            continue;
        }
        let Some(b) = builder.as_mut() else {
            return Err(ParseError::syntax(line, "expected header `n <count>` first"));
        };
        let vertex = |toks: &mut std::str::SplitWhitespace<'_>| -> Result<usize, ParseError> {
            let v: usize = number(line, toks.next(), "vertex")?;
            if v >= n {
                return Err(ParseError::OutOfRange { line, vertex: v, n });
            }
            Ok(v)
        };
        match head {
            "e" => {
                let u = vertex(&mut toks)?;
                let v = vertex(&mut toks)?;
                if toks.next().is_some() {
                    return Err(ParseError::syntax(line, "trailing tokens"));
                }
                b.add_edge(u, v).map_err(|e| match e {
                    GraphError::Loop(v) => ParseError::Loop { line, v },
                    _ => ParseError::DuplicateEdge { line, u, v },
                })?;
            }
            "vcolor" => {
                let v = vertex(&mut toks)?;
                let c: u64 = number(line, toks.next(), "color")?;
                if toks.next().is_some() {
                    return Err(ParseError::syntax(line, "trailing tokens"));
                }
                if !vcolored.insert(v) {
                    return Err(ParseError::DuplicateColor { line, what: format!("vertex {v}") });
                }
                b.vertex_color(v, c).expect("vertex checked");
            }
            "acolor" | "pcolor" => {
                let u = vertex(&mut toks)?;
                let v = vertex(&mut toks)?;
                let c: u64 = number(line, toks.next(), "color")?;
                if toks.next().is_some() {
                    return Err(ParseError::syntax(line, "trailing tokens"));
                }
                if head == "acolor" {
                    if !acolored.insert((u, v)) {
                        return Err(ParseError::DuplicateColor { line, what: format!("arc ({u}, {v})") });
                    }
                    b.arc_color(u, v, c).map_err(|_| ParseError::ArcOnNonEdge { line, u, v })?;
                } else {
                    if !pcolored.insert((u, v)) {
                        return Err(ParseError::DuplicateColor { line, what: format!("pair ({u}, {v})") });
                    }
                    b.pair_color(u, v, c).expect("vertices checked");
                }
            }
            other => return Err(ParseError::syntax(line, format!("unknown directive {other:?}"))),
        }
    }
    builder.map(|b| b.build()).ok_or_else(|| ParseError::syntax(0, "missing header `n <count>`"))
}

/// Canonical text: header, edges ascending, then non-zero colors ascending.
pub fn serialize_graph(g: &ColoredGraph) -> String {
    let mut out = format!("n {}\n", g.n());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "e {u} {v}");
    }
    for v in 0..g.n() {
        let c = g.vertex_color(v);
        if c != 0 {
            let _ = writeln!(out, "vcolor {v} {c}");
        }
    }
    for ((u, v), c) in g.arc_color_entries() {
        let _ = writeln!(out, "acolor {u} {v} {c}");
    }
    for (&(u, v), &c) in g.pair_colors() {
        let _ = writeln!(out, "pcolor {u} {v} {c}");
    }
    out
}

/// JSON mirror of the text format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vertex_colors: Vec<[u64; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub arc_colors: Vec<[u64; 3]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pair_colors: Vec<[u64; 3]>,
}

impl From<&ColoredGraph> for GraphJson {
    fn from(g: &ColoredGraph) -> Self {
        GraphJson {
            n: g.n(),
            edges: g.edges().map(|(u, v)| [u, v]).collect(),
            vertex_colors: (0..g.n())
                .filter(|&v| g.vertex_color(v) != 0)
                .map(|v| [v as u64, g.vertex_color(v)])
                .collect(),
            arc_colors: g.arc_color_entries().map(|((u, v), c)| [u as u64, v as u64, c]).collect(),
            pair_colors: g.pair_colors().iter().map(|(&(u, v), &c)| [u as u64, v as u64, c]).collect(),
        }
    }
}

impl GraphJson {
    /// Validates and builds the graph; errors carry the 1-based entry index as "line".
    pub fn to_graph(&self) -> Result<ColoredGraph, ParseError> {
        let n = self.n;
        if n > MAX_VERTICES {
            return Err(ParseError::syntax(1, format!("vertex count {n} exceeds {MAX_VERTICES}")));
        }
        let idx = |x: u64, line: usize| -> Result<usize, ParseError> {
            usize::try_from(x)
                .ok()
                .filter(|&v| v < n)
                .ok_or(ParseError::OutOfRange { line, vertex: x.min(usize::MAX as u64) as usize, n })
        };
        let mut b = ColoredGraph::builder(n);
        for (i, &[u, v]) in self.edges.iter().enumerate() {
            let line = i + 1;
            let (u, v) = (idx(u as u64, line)?, idx(v as u64, line)?);
            b.add_edge(u, v).map_err(|e| match e {
                GraphError::Loop(v) => ParseError::Loop { line, v },
                _ => ParseError::DuplicateEdge { line, u, v },
            })?;
        }
        let mut seen = HashSet::new();
        for (i, &[v, c]) in self.vertex_colors.iter().enumerate() {
            let v = idx(v, i + 1)?;
            if !seen.insert(v) {
                return Err(ParseError::DuplicateColor { line: i + 1, what: format!("vertex {v}") });
            }
            b.vertex_color(v, c).expect("checked");
        }
        let mut seen = HashSet::new();
        for (i, &[u, v, c]) in self.arc_colors.iter().enumerate() {
            let (u, v) = (idx(u, i + 1)?, idx(v, i + 1)?);
            if !seen.insert((u, v)) {
                return Err(ParseError::DuplicateColor { line: i + 1, what: format!("arc ({u}, {v})") });
            }
            b.arc_color(u, v, c).map_err(|_| ParseError::ArcOnNonEdge { line: i + 1, u, v })?;
        }
        let mut seen = HashSet::new();
        for (i, &[u, v, c]) in self.pair_colors.iter().enumerate() {
            let (u, v) = (idx(u, i + 1)?, idx(v, i + 1)?);
            if !seen.insert((u, v)) {
                return Err(ParseError::DuplicateColor { line: i + 1, what: format!("pair ({u}, {v})") });
            }
            b.pair_color(u, v, c).expect("checked");
        }
        Ok(b.build())
    }
}

pub fn graph_to_json(g: &ColoredGraph) -> String {
    serde_json::to_string(&GraphJson::from(g)).expect("plain data serializes")
}

pub fn graph_from_json(bytes: &[u8]) -> Result<ColoredGraph, ParseError> {
    let doc: GraphJson =
        serde_json::from_slice(bytes).map_err(|e| ParseError::syntax(e.line(), e.to_string()))?;
    doc.to_graph()
}

/// `tuple <v1> [<v2> [<v3>]] <color>` per tuple, tuples in lexicographic order.
pub fn serialize_coloring(c: &TupleColoring) -> String {
    let mut out = String::new();
    let mut tuple = vec![0usize; c.k()];
    for idx in 0..c.len() {
        c.decode_into(idx, &mut tuple);
        out.push_str("tuple");
        for v in &tuple {
            let _ = write!(out, " {v}");
        }
        let _ = writeln!(out, " {}", c.color_at(idx));
    }
    out
}

/// Parses the coloring export for a graph on `n` vertices. Every tuple must
/// appear exactly once and all tuples must have the same arity.
pub fn parse_coloring(text: &str, n: usize) -> Result<TupleColoring, ParseError> {
    let mut k = None;
    let mut entries: Vec<Option<u64>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks[0] != "tuple" {
            return Err(ParseError::syntax(line, format!("unknown directive {:?}", toks[0])));
        }
        let arity = toks.len().saturating_sub(2);
        if !(1..=3).contains(&arity) {
            return Err(ParseError::syntax(line, "tuple arity must be 1, 2 or 3"));
        }
        let k = *k.get_or_insert_with(|| {
            entries = vec![None; n.pow(arity as u32)];
            arity
        });
        if arity != k {
            return Err(ParseError::syntax(line, "mixed tuple arities"));
        }
        let mut index = 0usize;
        for tok in &toks[1..=k] {
            let v: usize = number(line, Some(tok), "vertex")?;
            if v >= n {
                return Err(ParseError::OutOfRange { line, vertex: v, n });
            }
            index = index * n + v;
        }
        let color: u64 = number(line, Some(toks[k + 1]), "color")?;
        if entries[index].replace(color).is_some() {
            return Err(ParseError::DuplicateColor { line, what: "tuple".into() });
        }
    }
    let k = k.ok_or_else(|| ParseError::syntax(0, "no tuples"))?;
    let colors: Option<Vec<u64>> = entries.into_iter().collect();
    let colors = colors.ok_or_else(|| ParseError::syntax(0, "coloring is not total"))?;
    Ok(TupleColoring::from_values(k, n, &colors))
}
