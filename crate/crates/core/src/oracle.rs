//! Slow reference implementations used to check the fast paths.

use std::collections::{BTreeMap, VecDeque};

use crate::error::OracleError;
use crate::graph::ColoredGraph;
use crate::group::{Coset, PermGroup};
use crate::perm::Permutation;
use crate::refine::TupleColoring;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_nodes: u64,
    pub max_n: usize,
}

impl OracleBudget {
    pub fn iso() -> Self {
        OracleBudget { max_nodes: 50_000_000, max_n: 12 }
    }

    pub fn topo() -> Self {
        OracleBudget { max_nodes: 50_000_000, max_n: 16 }
    }

    pub fn with_max_n(mut self, max_n: usize) -> Self {
        self.max_n = max_n;
        self
    }
}

const FAR: usize = usize::MAX;

fn distances(g: &ColoredGraph) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut out = vec![vec![FAR; n]; n];
    for (s, row) in out.iter_mut().enumerate() {
        row[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v) {
                if row[w] == FAR {
                    row[w] = row[v] + 1;
                    queue.push_back(w);
                }
            }
        }
    }
    out
}

/// Per vertex: color, degree and sorted distance profile.
fn vertex_invariants(g: &ColoredGraph, dist: &[Vec<usize>]) -> Vec<(u64, usize, Vec<usize>)> {
    (0..g.n())
        .map(|v| {
            let mut profile = dist[v].clone();
            profile.sort_unstable();
            (g.vertex_color(v), g.degree(v), profile)
        })
        .collect()
}

struct Brute<'a> {
    g1: &'a ColoredGraph,
    g2: &'a ColoredGraph,
    d1: Vec<Vec<usize>>,
    d2: Vec<Vec<usize>>,
    inv1: Vec<(u64, usize, Vec<usize>)>,
    inv2: Vec<(u64, usize, Vec<usize>)>,
    order: Vec<usize>,
    nodes: u64,
    max_nodes: u64,
}

impl Brute<'_> {
    fn consistent(&self, map: &[usize], v: usize, w: usize) -> bool {
        if self.inv1[v] != self.inv2[w] {
            return false;
        }
        self.order.iter().take_while(|&&u| map[u] != FAR).all(|&u| {
            let x = map[u];
            self.d1[u][v] == self.d2[x][w]
                && self.g1.arc_color(u, v) == self.g2.arc_color(x, w)
                && self.g1.arc_color(v, u) == self.g2.arc_color(w, x)
        })
    }

    /// Extends `map` (defined on `order[..depth]`) to an isomorphism.
    fn extend(&mut self, map: &mut Vec<usize>, taken: &mut Vec<bool>, depth: usize) -> Result<bool, OracleError> {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Err(OracleError::Budget(self.max_nodes));
        }
        if depth == self.order.len() {
            return Ok(true);
        }
        let v = self.order[depth];
        for w in 0..self.g2.n() {
            if taken[w] || !self.consistent(map, v, w) {
                continue;
            }
            map[v] = w;
            taken[w] = true;
            if self.extend(map, taken, depth + 1)? {
                return Ok(true);
            }
            map[v] = FAR;
            taken[w] = false;
        }
        Ok(false)
    }

    fn with_prefix(&mut self, prefix: &[usize]) -> Result<Option<Permutation>, OracleError> {
        let n = self.g1.n();
        let mut map = vec![FAR; n];
        let mut taken = vec![false; n];
        for (i, &w) in prefix.iter().enumerate() {
            let v = self.order[i];
            if taken[w] || !self.consistent(&map, v, w) {
                return Ok(None);
            }
            map[v] = w;
            taken[w] = true;
        }
        if self.extend(&mut map, &mut taken, prefix.len())? {
            Ok(Permutation::from_images(map))
        } else {
            Ok(None)
        }
    }
}

/// Vertex order in which each vertex has as many earlier neighbours as possible.
fn connected_order(g: &ColoredGraph) -> Vec<usize> {
    let n = g.n();
    let mut placed = vec![false; n];
    let mut seen = vec![0usize; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !placed[v])
            .max_by_key(|&v| (seen[v], g.degree(v), std::cmp::Reverse(v)))
            .expect("unplaced vertex");
        placed[v] = true;
        order.push(v);
        for &w in g.neighbors(v) {
            seen[w] += 1;
        }
    }
    order
}

/// All isomorphisms `g1 → g2` by plain backtracking with distance pruning.
pub fn brute_iso(g1: &ColoredGraph, g2: &ColoredGraph, budget: &OracleBudget) -> Result<Coset, OracleError> {
    let n = g1.n();
    for m in [n, g2.n()] {
        if m > budget.max_n {
            return Err(OracleError::TooLarge { n: m, cap: budget.max_n });
        }
    }
    if g1.has_pair_colors() || g2.has_pair_colors() {
        return Err(OracleError::Unsupported("pair colors".into()));
    }
    if n != g2.n() || g1.edge_count() != g2.edge_count() {
        return Ok(Coset::empty(n));
    }
    let (d1, d2) = (distances(g1), distances(g2));
    let (inv1, inv2) = (vertex_invariants(g1, &d1), vertex_invariants(g2, &d2));
    let order = connected_order(g1);
    let mut iso = Brute { g1, g2, d1, d2, inv1, inv2, order: order.clone(), nodes: 0, max_nodes: budget.max_nodes };
    let Some(phi0) = iso.with_prefix(&[])? else { return Ok(Coset::empty(n)) };
    if !g1.is_isomorphism(g2, &phi0) {
        return Err(OracleError::Unsupported("backtracking produced a non-isomorphism".into()));
    }

    // Automorphisms of g1, found level by level from the bottom of the order.
    let mut aut = Brute {
        g1,
        g2: g1,
        d1: iso.d1.clone(),
        d2: iso.d1.clone(),
        inv1: iso.inv1.clone(),
        inv2: iso.inv1.clone(),
        order: order.clone(),
        nodes: iso.nodes,
        max_nodes: budget.max_nodes,
    };
    let mut gens: Vec<Permutation> = Vec::new();
    let mut found = PermGroup::with_base_prefix(n, &gens, &order).expect("valid base");
    for l in (0..n).rev() {
        let prefix: Vec<usize> = order[..l].to_vec();
        let v = order[l];
        for t in 0..n {
            if t == v || prefix.contains(&t) || found.transversal(l, t).is_some() {
                continue;
            }
            let mut with_t = prefix.clone();
            with_t.push(t);
            if let Some(a) = aut.with_prefix(&with_t)? {
                gens.push(a);
                found = PermGroup::with_base_prefix(n, &gens, &order).expect("valid base");
            }
        }
    }
    let group = PermGroup::from_generators(n, &gens).expect("degrees agree");
    Ok(Coset::new(group, phi0).expect("degrees agree"))
}

pub fn brute_automorphisms(g: &ColoredGraph, budget: &OracleBudget) -> Result<PermGroup, OracleError> {
    Ok(brute_iso(g, g, budget)?.group().clone())
}

struct Topo<'a> {
    g: &'a ColoredGraph,
    nodes: u64,
    max_nodes: u64,
}

impl Topo<'_> {
    fn tick(&mut self) -> Result<(), OracleError> {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Err(OracleError::Budget(self.max_nodes));
        }
        Ok(())
    }

    /// Routes the remaining branch pairs along internally disjoint paths
    /// through vertices not in `used`.
    fn route(&mut self, pairs: &[(usize, usize)], used: u32) -> Result<bool, OracleError> {
        self.tick()?;
        let Some(&(a, b)) = pairs.first() else { return Ok(true) };
        self.walk(a, b, &pairs[1..], used)
    }

    fn walk(&mut self, at: usize, b: usize, rest: &[(usize, usize)], used: u32) -> Result<bool, OracleError> {
        self.tick()?;
        for &w in self.g.neighbors(at) {
            if w == b {
                if self.route(rest, used)? {
                    return Ok(true);
                }
            } else if used & (1 << w) == 0 && self.walk(w, b, rest, used | (1 << w))? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Whether some subdivision of `K_h` is a subgraph of `g`.
pub fn has_topological_kh(g: &ColoredGraph, h: usize, budget: &OracleBudget) -> Result<bool, OracleError> {
    let n = g.n();
    if h > 5 {
        return Err(OracleError::UnsupportedH(h));
    }
    let cap = budget.max_n.min(32);
    if n > cap {
        return Err(OracleError::TooLarge { n, cap });
    }
    match h {
        0 => return Ok(true),
        1 => return Ok(n >= 1),
        2 => return Ok(g.edge_count() > 0),
        _ => {}
    }
    let candidates: Vec<usize> = (0..n).filter(|&v| g.degree(v) >= h - 1).collect();
    let mut topo = Topo { g, nodes: 0, max_nodes: budget.max_nodes };
    let mut branch = Vec::with_capacity(h);
    fn choose(
        topo: &mut Topo<'_>,
        candidates: &[usize],
        start: usize,
        h: usize,
        branch: &mut Vec<usize>,
    ) -> Result<bool, OracleError> {
        if branch.len() == h {
            let mut pairs = Vec::new();
            for i in 0..h {
                for j in i + 1..h {
                    pairs.push((branch[i], branch[j]));
                }
            }
            let used = branch.iter().fold(0u32, |m, &v| m | (1 << v));
            return topo.route(&pairs, used);
        }
        for i in start..candidates.len() {
            branch.push(candidates[i]);
            let hit = choose(topo, candidates, i + 1, h, branch)?;
            branch.pop();
            if hit {
                return Ok(true);
            }
        }
        Ok(false)
    }
    choose(&mut topo, &candidates, 0, h, &mut branch)
}

/// Naive refinement: `k = 1` is Color Refinement, `k ≥ 2` is k-WL on
/// all `n^k` tuples. Colors are numbered by first occurrence.
pub fn reference_refine(g: &ColoredGraph, k: usize) -> Result<TupleColoring, OracleError> {
    let n = g.n();
    let cap = match k {
        1 | 2 => 64,
        3 => 24,
        _ => return Err(OracleError::Unsupported(format!("dimension {k}"))),
    };
    if n > cap {
        return Err(OracleError::TooLarge { n, cap });
    }
    if k == 1 {
        let mut colors: Vec<u64> = renumber(&(0..n).map(|v| vec![g.vertex_color(v)]).collect::<Vec<_>>());
        loop {
            let sigs: Vec<Vec<u64>> = (0..n)
                .map(|v| {
                    let mut nb: Vec<(u64, u64, u64)> = g
                        .neighbors(v)
                        .iter()
                        .map(|&w| (colors[w], g.arc_color(v, w).unwrap_or(0), g.arc_color(w, v).unwrap_or(0)))
                        .collect();
                    nb.sort_unstable();
                    let mut s = vec![colors[v]];
                    for (a, b, c) in nb {
                        s.extend([a, b, c]);
                    }
                    s
                })
                .collect();
            let next = renumber(&sigs);
            if count(&next) == count(&colors) {
                return Ok(TupleColoring::from_values(1, n, &colors));
            }
            colors = next;
        }
    }
    let total = n.pow(k as u32);
    let decode = |mut idx: usize| {
        let mut t = vec![0; k];
        for slot in t.iter_mut().rev() {
            *slot = idx % n;
            idx /= n;
        }
        t
    };
    let encode = |t: &[usize]| t.iter().fold(0, |acc, &x| acc * n + x);
    let atoms: Vec<Vec<u64>> = (0..total)
        .map(|idx| {
            let t = decode(idx);
            let mut key: Vec<u64> = t.iter().map(|&v| g.vertex_color(v)).collect();
            for &a in &t {
                for &b in &t {
                    let arc = g.arc_color(a, b);
                    key.extend([u64::from(a == b), u64::from(arc.is_some()), arc.unwrap_or(0), g.pair_color(a, b)]);
                }
            }
            key
        })
        .collect();
    let mut colors = renumber(&atoms);
    loop {
        let sigs: Vec<Vec<u64>> = (0..total)
            .map(|idx| {
                let t = decode(idx);
                let mut multiset: Vec<Vec<u64>> = (0..n)
                    .map(|w| {
                        (0..k)
                            .map(|i| {
                                let mut s = t.clone();
                                s[i] = w;
                                colors[encode(&s)]
                            })
                            .collect()
                    })
                    .collect();
                multiset.sort();
                let mut s = vec![colors[idx]];
                for m in multiset {
                    s.extend(m);
                }
                s
            })
            .collect();
        let next = renumber(&sigs);
        if count(&next) == count(&colors) {
            return Ok(TupleColoring::from_values(k, n, &colors));
        }
        colors = next;
    }
}

fn renumber(keys: &[Vec<u64>]) -> Vec<u64> {
    let mut ids: BTreeMap<&Vec<u64>, u64> = BTreeMap::new();
    keys.iter()
        .map(|key| {
            let next = ids.len() as u64;
            *ids.entry(key).or_insert(next)
        })
        .collect()
}

fn count(colors: &[u64]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    fn cycle(n: usize) -> ColoredGraph {
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        ColoredGraph::from_edges(n, &edges).unwrap()
    }

    fn complete(n: usize) -> ColoredGraph {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j));
            }
        }
        ColoredGraph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn brute_examples() {
        let b = OracleBudget::iso();
        assert_eq!(brute_iso(&cycle(4), &cycle(4), &b).unwrap().size(), BigUint::from(8u32));
        let p3 = ColoredGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(brute_iso(&p3, &complete(3), &b).unwrap().is_empty());
        let colored = p3.clone().with_vertex_colors(vec![1, 0, 2]).unwrap();
        assert!(brute_iso(&colored, &p3, &b).unwrap().is_empty());
        assert!(matches!(brute_iso(&cycle(13), &cycle(13), &b), Err(OracleError::TooLarge { .. })));
        assert_eq!(brute_automorphisms(&complete(5), &b).unwrap().order(), BigUint::from(120u32));
    }

    #[test]
    fn topological_cliques() {
        let b = OracleBudget::topo();
        assert!(has_topological_kh(&complete(4), 4, &b).unwrap());
        assert!(!has_topological_kh(&complete(4), 5, &b).unwrap());
        assert!(has_topological_kh(&cycle(6), 3, &b).unwrap());
        let tree = ColoredGraph::from_edges(5, &[(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        assert!(!has_topological_kh(&tree, 3, &b).unwrap());
        // K4 with every edge subdivided once
        let mut edges = Vec::new();
        let mut next = 4;
        for i in 0..4 {
            for j in i + 1..4 {
                edges.push((i, next));
                edges.push((next, j));
                next += 1;
            }
        }
        let sub = ColoredGraph::from_edges(10, &edges).unwrap();
        assert!(has_topological_kh(&sub, 4, &b).unwrap());
        assert!(!has_topological_kh(&cycle(8), 4, &b).unwrap());
    }

    #[test]
    fn reference_examples() {
        assert_eq!(reference_refine(&complete(5), 1).unwrap().num_colors(), 1);
        let p3 = ColoredGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(reference_refine(&p3, 1).unwrap().num_colors(), 2);
        assert!(reference_refine(&cycle(25), 3).is_err());
    }
}
