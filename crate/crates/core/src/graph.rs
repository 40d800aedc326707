//! Undirected simple graphs with optional vertex, arc and pair colorings.
//!
//! Vertices are `0..n`. Colors are `u64` under the numeric order; an absent
//! arc or pair color reads as `0` and vertex colors default to `0`, so a
//! coloring that is identically zero is the same as no coloring at all.

use std::collections::{BTreeMap, VecDeque};

use crate::error::GraphError;
use crate::perm::Permutation;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredGraph {
    n: usize,
    /// Sorted neighbour lists.
    adj: Vec<Vec<usize>>,
    vertex_colors: Vec<u64>,
    /// Parallel to `adj`: `arc_colors[v][i]` colors the arc `(v, adj[v][i])`.
    arc_colors: Vec<Vec<u64>>,
    /// Only non-zero entries are stored.
    pair_colors: BTreeMap<(usize, usize), u64>,
}

/// Incremental construction with validation; see [`ColoredGraph::builder`].
#[derive(Clone, Debug)]
pub struct GraphBuilder {
    n: usize,
    adj: Vec<Vec<usize>>,
    vertex_colors: Vec<u64>,
    arcs: BTreeMap<(usize, usize), u64>,
    pair_colors: BTreeMap<(usize, usize), u64>,
}

impl GraphBuilder {
    fn check(&self, v: usize) -> Result<(), GraphError> {
        if v >= self.n {
            Err(GraphError::VertexOutOfRange { vertex: v, n: self.n })
        } else {
            Ok(())
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.adj[u].contains(&v)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<&mut Self, GraphError> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(GraphError::Loop(u));
        }
        if self.has_edge(u, v) {
            return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
        }
        self.adj[u].push(v);
        self.adj[v].push(u);
        Ok(self)
    }

    pub fn vertex_color(&mut self, v: usize, c: u64) -> Result<&mut Self, GraphError> {
        self.check(v)?;
        self.vertex_colors[v] = c;
        Ok(self)
    }

    /// Colors the directed arc `(u, v)`; the edge must already exist.
    pub fn arc_color(&mut self, u: usize, v: usize, c: u64) -> Result<&mut Self, GraphError> {
        self.check(u)?;
        self.check(v)?;
        if !self.has_edge(u, v) {
            return Err(GraphError::NotAnEdge(u, v));
        }
        if c == 0 {
            self.arcs.remove(&(u, v));
        } else {
            self.arcs.insert((u, v), c);
        }
        Ok(self)
    }

    pub fn pair_color(&mut self, u: usize, v: usize, c: u64) -> Result<&mut Self, GraphError> {
        self.check(u)?;
        self.check(v)?;
        if c == 0 {
            self.pair_colors.remove(&(u, v));
        } else {
            self.pair_colors.insert((u, v), c);
        }
        Ok(self)
    }

    pub fn build(self) -> ColoredGraph {
        let mut adj = self.adj;
        for list in &mut adj {
            list.sort_unstable();
        }
        let arc_colors = adj
            .iter()
            .enumerate()
            .map(|(v, list)| list.iter().map(|&w| self.arcs.get(&(v, w)).copied().unwrap_or(0)).collect())
            .collect();
        ColoredGraph {
            n: self.n,
            adj,
            vertex_colors: self.vertex_colors,
            arc_colors,
            pair_colors: self.pair_colors,
        }
    }
}

impl ColoredGraph {
    pub fn builder(n: usize) -> GraphBuilder {
        GraphBuilder {
            n,
            adj: vec![Vec::new(); n],
            vertex_colors: vec![0; n],
            arcs: BTreeMap::new(),
            pair_colors: BTreeMap::new(),
        }
    }

    pub fn empty(n: usize) -> Self {
        Self::builder(n).build()
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut b = Self::builder(n);
        for &(u, v) in edges {
            b.add_edge(u, v)?;
        }
        Ok(b.build())
    }

    /// Same graph with the vertex coloring replaced.
    pub fn with_vertex_colors(mut self, colors: Vec<u64>) -> Result<Self, GraphError> {
        if colors.len() != self.n {
            return Err(GraphError::DegreeMismatch { expected: self.n, found: colors.len() });
        }
        self.vertex_colors = colors;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn vertex_color(&self, v: usize) -> u64 {
        self.vertex_colors[v]
    }

    pub fn vertex_colors(&self) -> &[u64] {
        &self.vertex_colors
    }

    /// Color of the arc `(u, v)`, or `None` if `uv` is not an edge.
    pub fn arc_color(&self, u: usize, v: usize) -> Option<u64> {
        self.adj[u].binary_search(&v).ok().map(|i| self.arc_colors[u][i])
    }

    /// Arc colors parallel to `neighbors(v)`.
    pub fn arc_colors_from(&self, v: usize) -> &[u64] {
        &self.arc_colors[v]
    }

    pub fn pair_color(&self, u: usize, v: usize) -> u64 {
        self.pair_colors.get(&(u, v)).copied().unwrap_or(0)
    }

    pub fn pair_colors(&self) -> &BTreeMap<(usize, usize), u64> {
        &self.pair_colors
    }

    pub fn has_arc_colors(&self) -> bool {
        self.arc_colors.iter().flatten().any(|&c| c != 0)
    }

    pub fn has_pair_colors(&self) -> bool {
        !self.pair_colors.is_empty()
    }

    /// Non-zero arc colors keyed by arc, ascending.
    pub fn arc_color_entries(&self) -> impl Iterator<Item = ((usize, usize), u64)> + '_ {
        self.adj.iter().enumerate().flat_map(move |(u, list)| {
            list.iter()
                .zip(&self.arc_colors[u])
                .filter(|(_, &c)| c != 0)
                .map(move |(&v, &c)| ((u, v), c))
        })
    }

    pub fn degree_sequence(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.adj.iter().map(Vec::len).collect();
        d.sort_unstable();
        d
    }

    /// `g^p`: vertex `v` becomes `p(v)`, all colorings transported.
    pub fn apply_permutation(&self, p: &Permutation) -> Result<ColoredGraph, GraphError> {
        if p.degree() != self.n {
            return Err(GraphError::DegreeMismatch { expected: self.n, found: p.degree() });
        }
        let mut b = Self::builder(self.n);
        for (u, v) in self.edges() {
            b.add_edge(p.apply(u), p.apply(v))?;
        }
        for v in 0..self.n {
            b.vertex_colors[p.apply(v)] = self.vertex_colors[v];
        }
        for ((u, v), c) in self.arc_color_entries() {
            b.arcs.insert((p.apply(u), p.apply(v)), c);
        }
        for (&(u, v), &c) in &self.pair_colors {
            b.pair_colors.insert((p.apply(u), p.apply(v)), c);
        }
        Ok(b.build())
    }

    /// Subgraph induced on `vertices` (in the given order), with all colorings.
    /// Vertex `vertices[i]` becomes `i`.
    pub fn induced(&self, vertices: &[usize]) -> ColoredGraph {
        let mut local = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let mut b = Self::builder(vertices.len());
        for (i, &v) in vertices.iter().enumerate() {
            b.vertex_colors[i] = self.vertex_colors[v];
            for (k, &w) in self.adj[v].iter().enumerate() {
                let j = local[w];
                if j == usize::MAX {
                    continue;
                }
                if i < j {
                    b.adj[i].push(j);
                    b.adj[j].push(i);
                }
                let c = self.arc_colors[v][k];
                if c != 0 {
                    b.arcs.insert((i, j), c);
                }
            }
        }
        for (&(u, v), &c) in &self.pair_colors {
            if local[u] != usize::MAX && local[v] != usize::MAX {
                b.pair_colors.insert((local[u], local[v]), c);
            }
        }
        b.build()
    }

    /// Connected components of the subgraph induced on `V \ removed`, each sorted,
    /// in discovery order of their minimum vertex.
    pub fn components_avoiding(&self, removed: &[bool]) -> Vec<Vec<usize>> {
        let mut seen = removed.to_vec();
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            queue.push_back(s);
            let mut comp = Vec::new();
            while let Some(v) = queue.pop_front() {
                comp.push(v);
                for &w in &self.adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Connected components in canonical order: by (sorted vertex colors, size,
    /// minimum vertex). Only the last key depends on the labelling.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let mut comps = self.components_avoiding(&vec![false; self.n]);
        comps.sort_by_cached_key(|c| {
            let mut colors: Vec<u64> = c.iter().map(|&v| self.vertex_colors[v]).collect();
            colors.sort_unstable();
            (colors, c.len(), c[0])
        });
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components_avoiding(&vec![false; self.n]).len() == 1
    }

    /// `(N(S), N[S])`, both sorted.
    pub fn neighborhood(&self, set: &[usize]) -> Result<(Vec<usize>, Vec<usize>), GraphError> {
        let mut inside = vec![false; self.n];
        for &v in set {
            if v >= self.n {
                return Err(GraphError::VertexOutOfRange { vertex: v, n: self.n });
            }
            inside[v] = true;
        }
        let mut closed = inside.clone();
        for &v in set {
            for &w in &self.adj[v] {
                closed[w] = true;
            }
        }
        let closed_list: Vec<usize> = (0..self.n).filter(|&v| closed[v]).collect();
        let open_list: Vec<usize> = closed_list.iter().copied().filter(|&v| !inside[v]).collect();
        Ok((open_list, closed_list))
    }

    /// Disjoint union; vertices of `other` are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &ColoredGraph) -> ColoredGraph {
        let off = self.n;
        let mut b = Self::builder(self.n + other.n);
        for (u, v) in self.edges() {
            b.adj[u].push(v);
            b.adj[v].push(u);
        }
        for (u, v) in other.edges() {
            b.adj[u + off].push(v + off);
            b.adj[v + off].push(u + off);
        }
        b.vertex_colors[..off].copy_from_slice(&self.vertex_colors);
        b.vertex_colors[off..].copy_from_slice(&other.vertex_colors);
        for ((u, v), c) in self.arc_color_entries() {
            b.arcs.insert((u, v), c);
        }
        for ((u, v), c) in other.arc_color_entries() {
            b.arcs.insert((u + off, v + off), c);
        }
        for (&(u, v), &c) in &self.pair_colors {
            b.pair_colors.insert((u, v), c);
        }
        for (&(u, v), &c) in &other.pair_colors {
            b.pair_colors.insert((u + off, v + off), c);
        }
        b.build()
    }

    /// True if `p` maps `self` onto `other` preserving edges and every coloring.
    pub fn is_isomorphism(&self, other: &ColoredGraph, p: &Permutation) -> bool {
        if self.n != other.n || p.degree() != self.n || self.edge_count() != other.edge_count() {
            return false;
        }
        (0..self.n).all(|v| self.vertex_colors[v] == other.vertex_colors[p.apply(v)])
            && self.adj.iter().enumerate().all(|(u, list)| {
                list.iter().zip(&self.arc_colors[u]).all(|(&v, &c)| {
                    other.arc_color(p.apply(u), p.apply(v)) == Some(c)
                })
            })
            && self.pair_colors.len() == other.pair_colors.len()
            && self
                .pair_colors
                .iter()
                .all(|(&(u, v), &c)| other.pair_color(p.apply(u), p.apply(v)) == c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> ColoredGraph {
        ColoredGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn builder_rejects_bad_edges() {
        let mut b = ColoredGraph::builder(3);
        assert_eq!(b.add_edge(0, 0).unwrap_err(), GraphError::Loop(0));
        b.add_edge(0, 1).unwrap();
        assert_eq!(b.add_edge(1, 0).unwrap_err(), GraphError::DuplicateEdge(0, 1));
        assert!(matches!(b.add_edge(0, 3), Err(GraphError::VertexOutOfRange { .. })));
        assert_eq!(b.arc_color(1, 2, 4).unwrap_err(), GraphError::NotAnEdge(1, 2));
    }

    #[test]
    fn permutation_identity_and_automorphism() {
        let g = p3();
        assert_eq!(g.apply_permutation(&Permutation::identity(3)).unwrap(), g);
        let swap = Permutation::from_cycles(3, &[&[0, 2]]).unwrap();
        assert_eq!(g.apply_permutation(&swap).unwrap(), g);
        assert!(g.apply_permutation(&Permutation::identity(4)).is_err());
    }

    #[test]
    fn arc_colors_travel_with_the_permutation() {
        let mut b = ColoredGraph::builder(3);
        b.add_edge(0, 1).unwrap().add_edge(1, 2).unwrap();
        b.arc_color(0, 1, 7).unwrap();
        let g = b.build();
        let p = Permutation::from_cycles(3, &[&[0, 2]]).unwrap();
        let h = g.apply_permutation(&p).unwrap();
        assert_eq!(h.arc_color(2, 1), Some(7));
        assert_eq!(h.arc_color(1, 2), Some(0));
        assert!(g.is_isomorphism(&h, &p));
        assert!(!g.is_isomorphism(&h, &Permutation::identity(3)));
    }

    #[test]
    fn components_and_neighborhoods() {
        let two_triangles =
            ColoredGraph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        let comps = two_triangles.connected_components();
        assert_eq!(comps, vec![vec![0, 1, 2], vec![3, 4, 5]]);
        let c6 = ColoredGraph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)]).unwrap();
        assert_eq!(c6.connected_components().len(), 1);
        assert!(ColoredGraph::empty(0).connected_components().is_empty());

        let (open, closed) = p3().neighborhood(&[1]).unwrap();
        assert_eq!(open, vec![0, 2]);
        assert_eq!(closed, vec![0, 1, 2]);
        assert!(p3().neighborhood(&[0, 1, 2]).unwrap().0.is_empty());
        assert_eq!(c6.neighborhood(&[0]).unwrap().0, vec![1, 5]);
        assert!(p3().neighborhood(&[7]).is_err());
    }

    #[test]
    fn canonical_component_order_uses_colors_first() {
        let g = ColoredGraph::from_edges(5, &[(0, 1), (2, 3), (3, 4)])
            .unwrap()
            .with_vertex_colors(vec![5, 5, 1, 1, 1])
            .unwrap();
        assert_eq!(g.connected_components(), vec![vec![2, 3, 4], vec![0, 1]]);
    }
}
