//! Seeded graph families for tests and benchmarks.
//!
//! Descriptors look like `random_regular(10,3)`, `grid(3,4)` or
//! `disjoint_union(cycle(3),cycle(3))`.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GraphError, ParseError};
use crate::graph::ColoredGraph;
use crate::perm::Permutation;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    RandomRegular { n: usize, d: usize },
    /// Connected, maximum degree at most `d`.
    RandomMaxDegree { n: usize, d: usize },
    Grid { rows: usize, cols: usize },
    /// Uniform random labelled tree.
    Tree { n: usize },
    Cycle { n: usize },
    Clique { n: usize },
    Path { n: usize },
    Star { leaves: usize },
    DisjointUnion(Vec<Family>),
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::RandomRegular { n, d } => write!(f, "random_regular({n},{d})"),
            Family::RandomMaxDegree { n, d } => write!(f, "random_max_degree({n},{d})"),
            Family::Grid { rows, cols } => write!(f, "grid({rows},{cols})"),
            Family::Tree { n } => write!(f, "tree({n})"),
            Family::Cycle { n } => write!(f, "cycle({n})"),
            Family::Clique { n } => write!(f, "clique({n})"),
            Family::Path { n } => write!(f, "path({n})"),
            Family::Star { leaves } => write!(f, "star({leaves})"),
            Family::DisjointUnion(parts) => {
                write!(f, "disjoint_union(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Largest vertex count a descriptor may request.
pub const MAX_GENERATED_VERTICES: usize = 1 << 16;

struct Cursor<'a> {
    text: &'a [u8],
    pos: usize,
    depth: usize,
}

impl Cursor<'_> {
    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::syntax(1, format!("column {}: {}", self.pos + 1, msg.into()))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, b: u8) -> Result<(), ParseError> {
        self.skip_ws();
        if self.text.get(self.pos) == Some(&b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected '{}'", b as char)))
        }
    }

    fn ident(&mut self) -> Result<&str, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len() && (self.text[self.pos].is_ascii_alphanumeric() || self.text[self.pos] == b'_') {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a family name"));
        }
        Ok(std::str::from_utf8(&self.text[start..self.pos]).expect("ascii"))
    }

    fn number(&mut self) -> Result<usize, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let digits = std::str::from_utf8(&self.text[start..self.pos]).expect("ascii");
        let value: usize = digits.parse().map_err(|_| self.err("expected a number"))?;
        if value > MAX_GENERATED_VERTICES {
            return Err(self.err(format!("{value} exceeds {MAX_GENERATED_VERTICES}")));
        }
        Ok(value)
    }

    fn numbers(&mut self, count: usize) -> Result<Vec<usize>, ParseError> {
        self.eat(b'(')?;
        let mut out = Vec::with_capacity(count);
        for i in 0..count {
            if i > 0 {
                self.eat(b',')?;
            }
            out.push(self.number()?);
        }
        self.eat(b')')?;
        Ok(out)
    }

    fn family(&mut self) -> Result<Family, ParseError> {
        if self.depth > 32 {
            return Err(self.err("nesting too deep"));
        }
        let name = self.ident()?.to_string();
        Ok(match name.as_str() {
            "random_regular" => {
                let a = self.numbers(2)?;
                Family::RandomRegular { n: a[0], d: a[1] }
            }
            "random_max_degree" => {
                let a = self.numbers(2)?;
                Family::RandomMaxDegree { n: a[0], d: a[1] }
            }
            "grid" => {
                let a = self.numbers(2)?;
                Family::Grid { rows: a[0], cols: a[1] }
            }
            "tree" => Family::Tree { n: self.numbers(1)?[0] },
            "cycle" => Family::Cycle { n: self.numbers(1)?[0] },
            "clique" => Family::Clique { n: self.numbers(1)?[0] },
            "path" => Family::Path { n: self.numbers(1)?[0] },
            "star" => Family::Star { leaves: self.numbers(1)?[0] },
            "disjoint_union" => {
                self.eat(b'(')?;
                self.depth += 1;
                let mut parts = vec![self.family()?];
                loop {
                    self.skip_ws();
                    if self.text.get(self.pos) == Some(&b',') {
                        self.pos += 1;
                        parts.push(self.family()?);
                    } else {
                        break;
                    }
                }
                self.depth -= 1;
                self.eat(b')')?;
                Family::DisjointUnion(parts)
            }
            other => return Err(self.err(format!("unknown family {other:?}"))),
        })
    }
}

impl Family {
    pub fn parse(text: &str) -> Result<Family, ParseError> {
        let mut cur = Cursor { text: text.as_bytes(), pos: 0, depth: 0 };
        let fam = cur.family()?;
        cur.skip_ws();
        if cur.pos != cur.text.len() {
            return Err(cur.err("trailing input"));
        }
        if fam.vertex_count() > MAX_GENERATED_VERTICES {
            return Err(ParseError::syntax(1, "descriptor requests too many vertices"));
        }
        Ok(fam)
    }

    pub fn vertex_count(&self) -> usize {
        match self {
            Family::RandomRegular { n, .. }
            | Family::RandomMaxDegree { n, .. }
            | Family::Tree { n }
            | Family::Cycle { n }
            | Family::Clique { n }
            | Family::Path { n } => *n,
            Family::Grid { rows, cols } => rows.saturating_mul(*cols),
            Family::Star { leaves } => leaves + 1,
            Family::DisjointUnion(parts) => parts.iter().fold(0usize, |a, p| a.saturating_add(p.vertex_count())),
        }
    }

    /// A bound `d` on the maximum degree, when the family guarantees one.
    pub fn max_degree_bound(&self) -> Option<usize> {
        match self {
            Family::RandomRegular { d, .. } | Family::RandomMaxDegree { d, .. } => Some(*d),
            Family::Grid { .. } => Some(4),
            Family::Cycle { .. } | Family::Path { .. } => Some(2),
            Family::Clique { n } => Some(n.saturating_sub(1)),
            Family::Star { leaves } => Some(*leaves),
            Family::Tree { .. } => None,
            Family::DisjointUnion(parts) => parts.iter().map(Family::max_degree_bound).try_fold(0, |a, b| b.map(|b| a.max(b))),
        }
    }
}

pub fn generate(family: &Family, seed: u64) -> Result<ColoredGraph, GraphError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    build(family, &mut rng)
}

fn build(family: &Family, rng: &mut ChaCha8Rng) -> Result<ColoredGraph, GraphError> {
    match *family {
        Family::RandomRegular { n, d } => random_regular(n, d, rng),
        Family::RandomMaxDegree { n, d } => random_max_degree(n, d, rng),
        Family::Grid { rows, cols } => {
            let mut edges = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    let v = r * cols + c;
                    if c + 1 < cols {
                        edges.push((v, v + 1));
                    }
                    if r + 1 < rows {
                        edges.push((v, v + cols));
                    }
                }
            }
            ColoredGraph::from_edges(rows * cols, &edges)
        }
        Family::Tree { n } => random_tree(n, rng),
        Family::Cycle { n } => {
            if n < 3 {
                return Err(GraphError::Infeasible(format!("cycle needs at least 3 vertices, got {n}")));
            }
            let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
            ColoredGraph::from_edges(n, &edges)
        }
        Family::Clique { n } => {
            let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
            ColoredGraph::from_edges(n, &edges)
        }
        Family::Path { n } => {
            let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
            ColoredGraph::from_edges(n, &edges)
        }
        Family::Star { leaves } => {
            let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
            ColoredGraph::from_edges(leaves + 1, &edges)
        }
        Family::DisjointUnion(ref parts) => {
            let mut acc = ColoredGraph::empty(0);
            for p in parts {
                let mut child = ChaCha8Rng::seed_from_u64(rng.gen());
                acc = acc.disjoint_union(&build(p, &mut child)?);
            }
            Ok(acc)
        }
    }
}

fn random_regular(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<ColoredGraph, GraphError> {
    if (n * d) % 2 == 1 || (n > 0 && d >= n) {
        return Err(GraphError::Infeasible(format!("no {d}-regular graph on {n} vertices")));
    }
    'attempt: for _ in 0..2000 {
        let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
        let mut adj = vec![Vec::<usize>::new(); n];
        let mut edges = Vec::with_capacity(n * d / 2);
        while !points.is_empty() {
            let mut found = None;
            for _ in 0..64 {
                let i = rng.gen_range(0..points.len());
                let j = rng.gen_range(0..points.len());
                let (u, v) = (points[i], points[j]);
                if u != v && !adj[u].contains(&v) {
                    found = Some((i.max(j), i.min(j)));
                    break;
                }
            }
            let Some((hi, lo)) = found else { continue 'attempt };
            let v = points.swap_remove(hi);
            let u = points.swap_remove(lo);
            adj[u].push(v);
            adj[v].push(u);
            edges.push((u, v));
        }
        return ColoredGraph::from_edges(n, &edges);
    }
    Err(GraphError::Infeasible(format!("pairing model failed for random_regular({n},{d})")))
}

fn random_max_degree(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<ColoredGraph, GraphError> {
    if (d == 0 && n > 1) || (d == 1 && n > 2) {
        return Err(GraphError::Infeasible(format!("no connected graph on {n} vertices with maximum degree {d}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut deg = vec![0usize; n];
    let mut adj = vec![Vec::<usize>::new(); n];
    let mut edges = Vec::new();
    for i in 1..n {
        let open: Vec<usize> = order[..i].iter().copied().filter(|&u| deg[u] < d).collect();
        let u = open[rng.gen_range(0..open.len())];
        let v = order[i];
        deg[u] += 1;
        deg[v] += 1;
        adj[u].push(v);
        adj[v].push(u);
        edges.push((u, v));
    }
    if n >= 2 {
        let target = rng.gen_range(n - 1..=(n * d / 2).max(n - 1));
        let mut attempts = 0;
        while edges.len() < target && attempts < 20 * n {
            attempts += 1;
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u != v && deg[u] < d && deg[v] < d && !adj[u].contains(&v) {
                deg[u] += 1;
                deg[v] += 1;
                adj[u].push(v);
                adj[v].push(u);
                edges.push((u, v));
            }
        }
    }
    ColoredGraph::from_edges(n, &edges)
}

/// Decodes a uniformly random Prüfer sequence.
fn random_tree(n: usize, rng: &mut ChaCha8Rng) -> Result<ColoredGraph, GraphError> {
    if n <= 2 {
        let edges: Vec<_> = (1..n).map(|i| (0, i)).collect();
        return ColoredGraph::from_edges(n, &edges);
    }
    let code: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &x in &code {
        degree[x] += 1;
    }
    let mut leaves: std::collections::BTreeSet<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &x in &code {
        let leaf = *leaves.iter().next().expect("a tree always has a leaf");
        leaves.remove(&leaf);
        edges.push((leaf, x));
        degree[x] -= 1;
        if degree[x] == 1 {
            leaves.insert(x);
        }
    }
    let rest: Vec<usize> = leaves.into_iter().collect();
    edges.push((rest[0], rest[1]));
    ColoredGraph::from_edges(n, &edges)
}

/// A uniformly random permutation of degree `n`.
pub fn random_permutation(n: usize, seed: u64) -> Permutation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut images: Vec<usize> = (0..n).collect();
    images.shuffle(&mut rng);
    Permutation::from_images(images).expect("shuffle is a bijection")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptors_round_trip() {
        for text in ["random_regular(10,3)", "grid(3,4)", "disjoint_union(cycle(3),cycle(3),star(2))", "tree(7)"] {
            let fam = Family::parse(text).unwrap();
            assert_eq!(fam.to_string(), text);
        }
        assert_eq!(Family::parse(" cycle ( 6 ) ").unwrap(), Family::Cycle { n: 6 });
        assert!(Family::parse("cycle(6").is_err());
        assert!(Family::parse("hypercube(3)").is_err());
        assert!(Family::parse("cycle(6) x").is_err());
        assert!(Family::parse("clique(99999999999999999999)").is_err());
    }

    #[test]
    fn fixed_families() {
        let c6 = generate(&Family::Cycle { n: 6 }, 0).unwrap();
        assert_eq!((c6.n(), c6.edge_count(), c6.max_degree()), (6, 6, 2));
        let g = generate(&Family::Grid { rows: 3, cols: 4 }, 0).unwrap();
        assert_eq!(g.edge_count(), 17);
        assert!(generate(&Family::Cycle { n: 2 }, 0).is_err());
    }

    #[test]
    fn random_families_are_deterministic() {
        let fam = Family::RandomRegular { n: 10, d: 3 };
        let a = generate(&fam, 7).unwrap();
        assert_eq!(a, generate(&fam, 7).unwrap());
        assert!(a.degree_sequence().iter().all(|&d| d == 3));
        let k3 = generate(&Family::RandomRegular { n: 3, d: 2 }, 1).unwrap();
        assert_eq!(k3.edge_count(), 3);
        assert!(generate(&Family::RandomRegular { n: 5, d: 3 }, 0).is_err());
    }

    #[test]
    fn max_degree_graphs_are_connected_and_bounded() {
        for seed in 0..20 {
            let g = generate(&Family::RandomMaxDegree { n: 30, d: 3 }, seed).unwrap();
            assert!(g.max_degree() <= 3);
            assert!(g.is_connected());
        }
        for seed in 0..20 {
            let t = generate(&Family::Tree { n: 12 }, seed).unwrap();
            assert_eq!(t.edge_count(), 11);
            assert!(t.is_connected());
        }
    }
}
