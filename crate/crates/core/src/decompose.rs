//! Tree decompositions read off the recursion: one node per level, whose
//! bag is the closure `D` of that level.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{GraphError, IsoError};
use crate::graph::ColoredGraph;
use crate::iso::{Engine, Halt, IsoParams, Piece, Side};
use crate::perm::Permutation;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionNode {
    pub bag: Vec<usize>,
    /// `bag ∩ parent bag`; empty at the root.
    pub boundary: Vec<usize>,
    /// A bag vertex outside the boundary, if any.
    pub anchor: Option<usize>,
    pub children: Vec<DecompositionNode>,
}

#[derive(Clone, Debug)]
pub enum DecompositionOutcome {
    Tree(DecompositionNode),
    /// The graph contains a subdivision of `K_h`.
    Detected,
}

impl DecompositionNode {
    /// Pre-order list of all nodes.
    pub fn nodes(&self) -> Vec<&DecompositionNode> {
        let mut out = vec![self];
        let mut i = 0;
        while i < out.len() {
            let node = out[i];
            out.extend(node.children.iter());
            i += 1;
        }
        out
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(DecompositionNode::depth).max().unwrap_or(0)
    }

    pub fn adhesion_width(&self) -> usize {
        self.nodes().iter().flat_map(|n| n.children.iter().map(|c| c.boundary.len())).max().unwrap_or(0)
    }

    /// `(bag, parent bag)` for every node; the root's parent bag is empty.
    pub fn bag_pairs(&self) -> BTreeSet<(Vec<usize>, Vec<usize>)> {
        let mut out = BTreeSet::new();
        fn walk(node: &DecompositionNode, parent: &[usize], out: &mut BTreeSet<(Vec<usize>, Vec<usize>)>) {
            out.insert((node.bag.clone(), parent.to_vec()));
            for c in &node.children {
                walk(c, &node.bag, out);
            }
        }
        walk(self, &[], &mut out);
        out
    }

    /// The same tree with every vertex `v` renamed to `p(v)`.
    pub fn permuted(&self, p: &Permutation) -> DecompositionNode {
        let map = |s: &[usize]| {
            let mut v: Vec<usize> = s.iter().map(|&x| p.apply(x)).collect();
            v.sort_unstable();
            v
        };
        DecompositionNode {
            bag: map(&self.bag),
            boundary: map(&self.boundary),
            anchor: self.anchor.map(|a| p.apply(a)),
            children: self.children.iter().map(|c| c.permuted(p)).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph decomposition {\n  node [shape=box];\n");
        let mut counter = 0usize;
        fn walk(node: &DecompositionNode, id: usize, counter: &mut usize, out: &mut String) {
            let bag: Vec<String> = node.bag.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "  n{id} [label=\"{}\"];", bag.join(" "));
            for c in &node.children {
                *counter += 1;
                let cid = *counter;
                let sep: Vec<String> = c.boundary.iter().map(usize::to_string).collect();
                let _ = writeln!(out, "  n{id} -- n{cid} [label=\"{}\"];", sep.join(" "));
                walk(c, cid, counter, out);
            }
        }
        walk(self, 0, &mut counter, &mut out);
        out.push_str("}\n");
        out
    }
}

fn build(engine: &mut Engine<'_>, piece: &Piece, verts: &[usize]) -> Result<DecompositionNode, Halt> {
    let split = engine.split(piece)?;
    let mut parts = Vec::new();
    engine.parts(&split, 0, piece.side, &mut parts)?;
    let global = |s: &[usize]| {
        let mut v: Vec<usize> = s.iter().map(|&x| verts[x]).collect();
        v.sort_unstable();
        v
    };
    let outside = |v: &usize| piece.boundary.binary_search(v).is_err();
    let anchor = split
        .x
        .iter()
        .copied()
        .filter(outside)
        .min()
        .or_else(|| split.d.iter().copied().filter(outside).min())
        .map(|v| verts[v]);
    let mut children = Vec::with_capacity(parts.len());
    for part in &parts {
        let sub: Vec<usize> = part.verts.iter().map(|&v| verts[v]).collect();
        children.push(build(engine, &part.piece, &sub)?);
    }
    Ok(DecompositionNode { bag: global(&split.d), boundary: global(&piece.boundary), anchor, children })
}

/// Runs the level splitting of the isomorphism test on `g` alone and
/// records the bags.
pub fn tree_decomposition(g: &ColoredGraph, params: &IsoParams) -> Result<DecompositionOutcome, IsoError> {
    if g.has_pair_colors() {
        return Err(IsoError::Unsupported("pair colors".into()));
    }
    if !g.is_connected() {
        return Err(GraphError::Disconnected.into());
    }
    let mut engine = Engine::new(params);
    let piece = Piece { g: g.clone(), boundary: Vec::new(), side: Side::First };
    let verts: Vec<usize> = (0..g.n()).collect();
    match build(&mut engine, &piece, &verts) {
        Ok(root) => Ok(DecompositionOutcome::Tree(root)),
        Err(Halt::Detected(_)) => Ok(DecompositionOutcome::Detected),
        Err(Halt::Fail(e)) => Err(e),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub vertices_covered: bool,
    /// Every edge lies inside some bag.
    pub edges_covered: bool,
    /// The nodes containing any fixed vertex form a subtree.
    pub connected_occupancy: bool,
    /// Every boundary equals the intersection with the parent bag.
    pub boundaries_match: bool,
    pub max_adhesion: usize,
    pub adhesion_ok: bool,
}

impl DecompositionReport {
    pub fn ok(&self) -> bool {
        self.vertices_covered && self.edges_covered && self.connected_occupancy && self.boundaries_match && self.adhesion_ok
    }
}

/// Checks the tree-decomposition axioms and adhesion below `h`.
pub fn check_decomposition(g: &ColoredGraph, root: &DecompositionNode, h: usize) -> DecompositionReport {
    let n = g.n();
    let nodes = root.nodes();
    let mut parent: Vec<Option<usize>> = vec![None; nodes.len()];
    {
        let index = |x: &DecompositionNode| nodes.iter().position(|y| std::ptr::eq(*y, x)).expect("own node");
        for (i, node) in nodes.iter().enumerate() {
            for c in &node.children {
                parent[index(c)] = Some(i);
            }
        }
    }
    let bags: Vec<Vec<bool>> = nodes
        .iter()
        .map(|node| {
            let mut f = vec![false; n];
            for &v in &node.bag {
                if v < n {
                    f[v] = true;
                }
            }
            f
        })
        .collect();
    let vertices_covered = (0..n).all(|v| bags.iter().any(|b| b[v]));
    let edges_covered = g.edges().all(|(u, v)| bags.iter().any(|b| b[u] && b[v]));
    // A vertex set of tree nodes is connected iff exactly one of its nodes
    // has its parent outside the set.
    let connected_occupancy = (0..n).all(|v| {
        (0..nodes.len()).filter(|&i| bags[i][v] && !parent[i].is_some_and(|p| bags[p][v])).count() == 1
    });
    let boundaries_match = (0..nodes.len()).all(|i| match parent[i] {
        None => nodes[i].boundary.is_empty(),
        Some(p) => {
            let meet: Vec<usize> = nodes[i].bag.iter().copied().filter(|&v| v < n && bags[p][v]).collect();
            meet == nodes[i].boundary
        }
    });
    let max_adhesion = root.adhesion_width();
    DecompositionReport {
        vertices_covered,
        edges_covered,
        connected_occupancy,
        boundaries_match,
        max_adhesion,
        adhesion_ok: max_adhesion < h,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, Family};

    fn tree(g: &ColoredGraph, params: &IsoParams) -> DecompositionNode {
        match tree_decomposition(g, params).unwrap() {
            DecompositionOutcome::Tree(t) => t,
            DecompositionOutcome::Detected => panic!("unexpected detection"),
        }
    }

    #[test]
    fn trees_decompose() {
        for seed in 0..8 {
            let g = generate(&Family::Tree { n: 15 }, seed).unwrap();
            for params in [IsoParams::new(3), IsoParams::new(3).with_t(1)] {
                let t = tree(&g, &params);
                let report = check_decomposition(&g, &t, 3);
                assert!(report.ok(), "seed {seed}: {report:?}");
                assert!(report.max_adhesion <= 2);
            }
        }
    }

    #[test]
    fn clique_is_one_bag() {
        let g = generate(&Family::Clique { n: 4 }, 0).unwrap();
        let t = tree(&g, &IsoParams::new(6));
        assert_eq!(t.bag, vec![0, 1, 2, 3]);
        assert!(t.children.is_empty());
    }

    #[test]
    fn checker_catches_missing_edges() {
        let g = ColoredGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let bad = DecompositionNode {
            bag: vec![0, 1],
            boundary: vec![],
            anchor: Some(0),
            children: vec![DecompositionNode { bag: vec![1, 2], boundary: vec![1], anchor: Some(2), children: vec![] }],
        };
        let r = check_decomposition(&g, &bad, 3);
        assert!(!r.edges_covered);
        assert!(r.connected_occupancy && r.boundaries_match);
        assert!(bad.to_dot().contains("n0 -- n1"));
    }

    #[test]
    fn disconnected_is_rejected() {
        let g = ColoredGraph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(tree_decomposition(&g, &IsoParams::new(3)).is_err());
    }
}
