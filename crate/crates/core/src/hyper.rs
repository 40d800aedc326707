//! Isomorphisms of hypergraphs whose hyperedges carry labeling cosets and
//! colors, restricted to a given set of candidate bijections.
//!
//! The search individualizes one vertex at a time in a fixed order and
//! refines the joint vertex/hyperedge incidence structure of both inputs.
//! Automorphisms found along the way are collected into a stabilizer chain
//! that prunes whole orbits, so the answer comes out as a coset.

use std::collections::BTreeMap;

use crate::error::{GroupError, IsoError};
use crate::group::{Coset, LabelingCoset, PermGroup};
use crate::perm::Permutation;
use crate::refine::{cr_refine_in_place, dense_ranks, ArcView};

/// Caps the number of refinement nodes a search may visit.
#[derive(Clone, Debug)]
pub struct Budget {
    limit: u64,
    used: u64,
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Budget { limit, used: 0 }
    }

    pub fn unlimited() -> Self {
        Budget::new(u64::MAX)
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn tick(&mut self) -> Result<(), IsoError> {
        self.used += 1;
        if self.used > self.limit {
            return Err(IsoError::Budget(self.limit));
        }
        Ok(())
    }
}

/// One constraint on a hyperedge: a color and, unless plain, a labeling coset.
#[derive(Clone, Debug)]
pub struct HyperEdge {
    pub color: Vec<u64>,
    pub label: Option<LabelingCoset>,
}

/// A hypergraph on `0..n`. Several constraints may sit on one vertex set;
/// an isomorphism must match them up bijectively.
#[derive(Clone, Debug, Default)]
pub struct CosetLabeledHypergraph {
    n: usize,
    edges: BTreeMap<Vec<usize>, Vec<HyperEdge>>,
}

fn normalize(n: usize, set: &[usize]) -> Result<Vec<usize>, GroupError> {
    let mut s = set.to_vec();
    s.sort_unstable();
    if let Some(&x) = s.iter().find(|&&x| x >= n) {
        return Err(GroupError::PointOutOfRange(x));
    }
    if let Some(w) = s.windows(2).find(|w| w[0] == w[1]) {
        return Err(GroupError::DuplicatePoint(w[0]));
    }
    Ok(s)
}

impl CosetLabeledHypergraph {
    pub fn new(n: usize) -> Self {
        CosetLabeledHypergraph { n, edges: BTreeMap::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Adds a hyperedge whose vertices may be mapped in any order.
    pub fn add_plain(&mut self, set: &[usize], color: Vec<u64>) -> Result<(), GroupError> {
        let s = normalize(self.n, set)?;
        self.edges.entry(s).or_default().push(HyperEdge { color, label: None });
        Ok(())
    }

    /// Adds the hyperedge `label.domain()` constrained by `label`.
    pub fn add_labeled(&mut self, label: LabelingCoset, color: Vec<u64>) -> Result<(), GroupError> {
        let s = normalize(self.n, label.domain())?;
        self.edges.entry(s).or_default().push(HyperEdge { color, label: Some(label) });
        Ok(())
    }

    /// Distinct vertex sets carrying at least one constraint.
    pub fn edge_sets(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.edges.keys()
    }

    pub fn constraints(&self, set: &[usize]) -> &[HyperEdge] {
        self.edges.get(set).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn constraint_count(&self) -> usize {
        self.edges.values().map(Vec::len).sum()
    }

    pub fn max_edge_size(&self) -> usize {
        self.edges.keys().map(Vec::len).max().unwrap_or(0)
    }

    /// The definitional test: `phi` maps every constrained set onto a
    /// constrained set, and the constraints correspond with equal colors and
    /// `phi⁻¹ρ₁Θ₁ = ρ₂Θ₂`.
    pub fn is_isomorphism(&self, other: &CosetLabeledHypergraph, phi: &Permutation) -> bool {
        if self.n != other.n || phi.degree() != self.n || self.edges.len() != other.edges.len() {
            return false;
        }
        self.edges.iter().all(|(set, entries)| {
            let mut img: Vec<usize> = set.iter().map(|&v| phi.apply(v)).collect();
            img.sort_unstable();
            let Some(targets) = other.edges.get(&img) else { return false };
            if targets.len() != entries.len() {
                return false;
            }
            let mut used = vec![false; targets.len()];
            entries.iter().all(|e| {
                let moved = e.label.as_ref().map(|l| l.transport(|v| phi.apply(v)));
                let hit = targets.iter().enumerate().position(|(j, t)| {
                    !used[j]
                        && t.color == e.color
                        && match (&moved, &t.label) {
                            (None, None) => true,
                            (Some(a), Some(b)) => a.same_set(b),
                            _ => false,
                        }
                });
                match hit {
                    Some(j) => {
                        used[j] = true;
                        true
                    }
                    None => false,
                }
            })
        })
    }
}

/// A set of colored labeling cosets, all with domain `0..n`.
#[derive(Clone, Debug)]
pub struct MultipleLabelingCoset {
    n: usize,
    cosets: Vec<(LabelingCoset, Vec<u64>)>,
}

impl MultipleLabelingCoset {
    /// Colors that are multisets should be passed sorted.
    pub fn new(n: usize, cosets: Vec<(LabelingCoset, Vec<u64>)>) -> Result<Self, GroupError> {
        let full: Vec<usize> = (0..n).collect();
        for (i, (l, _)) in cosets.iter().enumerate() {
            if l.domain() != full.as_slice() {
                return Err(GroupError::DomainMismatch);
            }
            if cosets[..i].iter().any(|(m, _)| m.same_set(l)) {
                return Err(GroupError::DuplicateCoset);
            }
        }
        Ok(MultipleLabelingCoset { n, cosets })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cosets(&self) -> &[(LabelingCoset, Vec<u64>)] {
        &self.cosets
    }

    /// All cosets as constraints on the single hyperedge `0..n`.
    pub fn to_hypergraph(&self) -> CosetLabeledHypergraph {
        let mut h = CosetLabeledHypergraph::new(self.n);
        for (l, c) in &self.cosets {
            h.add_labeled(l.clone(), c.clone()).expect("domain checked");
        }
        h
    }

    /// `phi⁻¹ρΘ` lands in the other set with the same color, for every coset.
    pub fn is_isomorphism(&self, other: &MultipleLabelingCoset, phi: &Permutation) -> bool {
        self.cosets.len() == other.cosets.len() && self.to_hypergraph().is_isomorphism(&other.to_hypergraph(), phi)
    }
}

/// The bijections a search may return.
#[derive(Clone, Copy, Debug)]
pub enum Within<'a> {
    All,
    /// Maps sending every vertex of color `c` on the left to color `c` on the right.
    Colors(&'a [u64], &'a [u64]),
    Coset(&'a Coset),
}

struct ChainFilter {
    chain: PermGroup,
    rep_inv: Permutation,
}

struct Search<'a> {
    n: usize,
    h1: &'a CosetLabeledHypergraph,
    h2: &'a CosetLabeledHypergraph,
    view: ArcView,
    base: Vec<u32>,
    off2: usize,
    order: Vec<usize>,
    filter: Option<ChainFilter>,
    within: Within<'a>,
}

fn rank_keys(keys: &[Vec<u64>]) -> Vec<u32> {
    let mut sorted: Vec<&Vec<u64>> = keys.iter().collect();
    sorted.sort_unstable();
    sorted.dedup();
    keys.iter().map(|k| sorted.binary_search(&k).expect("present") as u32).collect()
}

impl<'a> Search<'a> {
    fn build(
        h1: &'a CosetLabeledHypergraph,
        h2: &'a CosetLabeledHypergraph,
        within: Within<'a>,
    ) -> Result<Option<Self>, IsoError> {
        let n = h1.n;
        match within {
            Within::Colors(c1, c2) if c1.len() != n || c2.len() != n => {
                return Err(GroupError::DegreeMismatch { expected: n, found: c1.len().min(c2.len()) }.into())
            }
            Within::Coset(c) if c.degree() != n => {
                return Err(GroupError::DegreeMismatch { expected: n, found: c.degree() }.into())
            }
            _ => {}
        }
        if h2.n != n || h1.edges.len() != h2.edges.len() {
            return Ok(None);
        }
        if let Within::Coset(c) = within {
            if c.is_empty() {
                return Ok(None);
            }
        }
        let m = h1.edges.len();
        let off2 = n + m;
        let total = 2 * off2;

        let mut thetas: Vec<&PermGroup> = Vec::new();
        let mut kind = |l: &'a Option<LabelingCoset>| -> u64 {
            match l {
                None => 0,
                Some(l) => {
                    let g = l.theta();
                    let i = thetas.iter().position(|t| t.same_group(g)).unwrap_or_else(|| {
                        thetas.push(g);
                        thetas.len() - 1
                    });
                    i as u64 + 1
                }
            }
        };

        let mut keys: Vec<Vec<u64>> = vec![Vec::new(); total];
        let mut incidences: Vec<(usize, usize, Vec<u64>)> = Vec::new();
        for (side, h) in [h1, h2].into_iter().enumerate() {
            let voff = side * off2;
            for v in 0..n {
                let c = match within {
                    Within::Colors(c1, c2) => [c1, c2][side][v],
                    _ => 0,
                };
                keys[voff + v] = vec![0, c];
            }
            for (e, (set, entries)) in h.edges.iter().enumerate() {
                let node = voff + n + e;
                let mut tagged: Vec<(Vec<u64>, u64)> =
                    entries.iter().map(|x| (x.color.clone(), kind(&x.label))).collect();
                tagged.sort();
                let mut key = vec![1, set.len() as u64];
                for (color, k) in &tagged {
                    key.push(color.len() as u64);
                    key.extend_from_slice(color);
                    key.push(*k);
                }
                keys[node] = key;
                for &v in set {
                    let mut inc: Vec<(Vec<u64>, u64, u64)> = Vec::with_capacity(entries.len());
                    for x in entries {
                        let k = kind(&x.label);
                        let orbit = match &x.label {
                            None => 0,
                            Some(l) => {
                                let idx = l.theta().orbit_index();
                                idx[l.label_of(v).expect("v in domain")] as u64
                            }
                        };
                        inc.push((x.color.clone(), k, orbit));
                    }
                    inc.sort();
                    let mut flat = Vec::new();
                    for (color, k, orbit) in inc {
                        flat.push(color.len() as u64);
                        flat.extend(color);
                        flat.push(k);
                        flat.push(orbit);
                    }
                    incidences.push((voff + v, node, flat));
                }
            }
        }
        let base = rank_keys(&keys);
        let inc_keys: Vec<Vec<u64>> = incidences.iter().map(|x| x.2.clone()).collect();
        let inc_ranks = rank_keys(&inc_keys);
        let mut nbrs: Vec<Vec<(u32, u32, u32)>> = vec![Vec::new(); total];
        for ((v, e, _), &r) in incidences.iter().zip(&inc_ranks) {
            nbrs[*v].push((*e as u32, r, r));
            nbrs[*e].push((*v as u32, r, r));
        }
        let view = ArcView::from_lists(nbrs);

        let mut search = Search { n, h1, h2, view, base, off2, order: Vec::new(), filter: None, within };
        // Fixed vertex order: small refined classes first.
        let Some(root) = search.refine(&[]) else { return Ok(None) };
        let mut size = vec![0usize; total];
        for &c in &root {
            size[c as usize] += 1;
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&v| (size[root[v] as usize], root[v], v));
        search.order = order;
        if let Within::Coset(c) = within {
            let chain = PermGroup::with_base_prefix(n, c.group().generators(), &search.order)?;
            let rep_inv = c.representative().expect("non-empty").inverse();
            search.filter = Some(ChainFilter { chain, rep_inv });
        }
        Ok(Some(search))
    }

    /// Refines the joint structure with the assigned pairs individualized.
    /// `None` if the two sides become unbalanced.
    fn refine(&self, pairs: &[(usize, usize)]) -> Option<Vec<u32>> {
        let mut keys: Vec<u64> = self.base.iter().map(|&c| c as u64).collect();
        for (k, &(a, b)) in pairs.iter().enumerate() {
            keys[a] = (1u64 << 40) | k as u64;
            keys[self.off2 + b] = (1u64 << 40) | k as u64;
        }
        let (mut colors, _) = dense_ranks(&keys);
        let (num, _) = cr_refine_in_place(&self.view, &mut colors);
        let mut balance = vec![0i64; num];
        for (i, &c) in colors.iter().enumerate() {
            balance[c as usize] += if i < self.off2 { 1 } else { -1 };
        }
        balance.iter().all(|&b| b == 0).then_some(colors)
    }

    /// The bijection fixed by a coloring that is discrete on the vertices.
    fn forced(&self, colors: &[u32]) -> Option<Permutation> {
        let mut by_color: BTreeMap<u32, usize> = BTreeMap::new();
        for w in 0..self.n {
            by_color.insert(colors[self.off2 + w], w);
        }
        if by_color.len() < self.n {
            return None;
        }
        let images: Option<Vec<usize>> = (0..self.n).map(|v| by_color.get(&colors[v]).copied()).collect();
        images.and_then(Permutation::from_images)
    }

    fn acc_inverse(&self, pairs: &[(usize, usize)]) -> Option<Permutation> {
        let f = self.filter.as_ref()?;
        let mut acc = Permutation::identity(self.n);
        for (l, &(_, t)) in pairs.iter().enumerate() {
            let y = acc.inverse().apply(f.rep_inv.apply(t));
            acc = f.chain.transversal(l, y)?.then(&acc);
        }
        Some(acc.inverse())
    }

    fn candidates(&self, b: usize, colors: &[u32], pairs: &[(usize, usize)]) -> Vec<usize> {
        let target = colors[b];
        let mut out: Vec<usize> = (0..self.n).filter(|&w| colors[self.off2 + w] == target).collect();
        if let Some(f) = &self.filter {
            let l = pairs.len();
            match self.acc_inverse(pairs) {
                Some(inv) => out.retain(|&t| f.chain.transversal(l, inv.apply(f.rep_inv.apply(t))).is_some()),
                None => out.clear(),
            }
        }
        out
    }

    fn accepts(&self, phi: &Permutation) -> bool {
        if let Within::Coset(c) = self.within {
            if !c.contains(phi).unwrap_or(false) {
                return false;
            }
        }
        self.h1.is_isomorphism(self.h2, phi)
    }

    fn dfs(&self, pairs: &mut Vec<(usize, usize)>, budget: &mut Budget) -> Result<Option<Permutation>, IsoError> {
        budget.tick()?;
        let Some(colors) = self.refine(pairs) else { return Ok(None) };
        if let Some(phi) = self.forced(&colors) {
            return Ok(self.accepts(&phi).then_some(phi));
        }
        let l = pairs.len();
        if l >= self.n {
            return Ok(None);
        }
        let b = self.order[l];
        for t in self.candidates(b, &colors, pairs) {
            pairs.push((b, t));
            let found = self.dfs(pairs, budget)?;
            pairs.pop();
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }

    fn solve(&self, budget: &mut Budget) -> Result<Coset, IsoError> {
        let n = self.n;
        let Some(phi0) = self.dfs(&mut Vec::new(), budget)? else { return Ok(Coset::empty(n)) };
        let inv0 = phi0.inverse();
        let mut gens: Vec<Permutation> = Vec::new();
        let mut found = PermGroup::with_base_prefix(n, &gens, &self.order)?;
        for l in (0..n).rev() {
            let mut prefix: Vec<(usize, usize)> = self.order[..l].iter().map(|&b| (b, phi0.apply(b))).collect();
            budget.tick()?;
            let colors = self
                .refine(&prefix)
                .ok_or_else(|| IsoError::Internal("prefix of a found isomorphism refuted".into()))?;
            if self.forced(&colors).is_some() {
                continue;
            }
            let b = self.order[l];
            for t in self.candidates(b, &colors, &prefix) {
                if t == phi0.apply(b) || found.transversal(l, inv0.apply(t)).is_some() {
                    continue;
                }
                prefix.push((b, t));
                if let Some(psi) = self.dfs(&mut prefix, budget)? {
                    gens.push(psi.then(&inv0));
                    found = PermGroup::with_base_prefix(n, &gens, &self.order)?;
                }
                prefix.pop();
            }
        }
        Ok(Coset::new(PermGroup::from_generators(n, &gens)?, phi0)?)
    }
}

/// `Iso_within(h1, h2)` for coset-labeled hypergraphs, as a coset of
/// bijections of `0..n`.
pub fn iso_coset_labeled(
    h1: &CosetLabeledHypergraph,
    h2: &CosetLabeledHypergraph,
    within: Within<'_>,
    budget: &mut Budget,
) -> Result<Coset, IsoError> {
    match Search::build(h1, h2, within)? {
        Some(s) => s.solve(budget),
        None => Ok(Coset::empty(h1.n)),
    }
}

/// Isomorphisms of plain hypergraphs: sets map to sets, colors preserved.
pub fn iso_hypergraph(
    h1: &CosetLabeledHypergraph,
    h2: &CosetLabeledHypergraph,
    within: Within<'_>,
    budget: &mut Budget,
) -> Result<Coset, IsoError> {
    iso_coset_labeled(h1, h2, within, budget)
}

/// Bijections `phi` with `phi⁻¹ρΘ ∈ L2` of matching color for every `ρΘ ∈ L1`.
pub fn iso_multi_coset(
    x1: &MultipleLabelingCoset,
    x2: &MultipleLabelingCoset,
    budget: &mut Budget,
) -> Result<Coset, IsoError> {
    if x1.n != x2.n || x1.cosets.len() != x2.cosets.len() {
        return Ok(Coset::empty(x1.n));
    }
    iso_coset_labeled(&x1.to_hypergraph(), &x2.to_hypergraph(), Within::All, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    fn plain(n: usize, sets: &[&[usize]]) -> CosetLabeledHypergraph {
        let mut h = CosetLabeledHypergraph::new(n);
        for s in sets {
            h.add_plain(s, vec![]).unwrap();
        }
        h
    }

    #[test]
    fn plain_automorphisms() {
        let h = plain(3, &[&[0, 1]]);
        let c = iso_hypergraph(&h, &h, Within::All, &mut Budget::unlimited()).unwrap();
        assert_eq!(c.size(), BigUint::from(2u32));
        let other = plain(3, &[&[0, 1, 2]]);
        assert!(iso_hypergraph(&h, &other, Within::All, &mut Budget::unlimited()).unwrap().is_empty());
        let id = Coset::single(Permutation::identity(3));
        let c = iso_hypergraph(&h, &h, Within::Coset(&id), &mut Budget::unlimited()).unwrap();
        assert_eq!(c.size(), BigUint::from(1u32));
    }

    #[test]
    fn cycle_hypergraph() {
        let h = plain(5, &[&[0, 1], &[1, 2], &[2, 3], &[3, 4], &[4, 0]]);
        let c = iso_hypergraph(&h, &h, Within::All, &mut Budget::unlimited()).unwrap();
        assert_eq!(c.size(), BigUint::from(10u32));
        for g in c.group().elements() {
            assert!(h.is_isomorphism(&h, &g));
        }
    }

    #[test]
    fn colors_must_match() {
        let mut a = CosetLabeledHypergraph::new(2);
        a.add_plain(&[0, 1], vec![1]).unwrap();
        let mut b = CosetLabeledHypergraph::new(2);
        b.add_plain(&[0, 1], vec![2]).unwrap();
        assert!(iso_coset_labeled(&a, &b, Within::All, &mut Budget::unlimited()).unwrap().is_empty());
    }

    #[test]
    fn fixed_labels_force_the_map() {
        let mut a = CosetLabeledHypergraph::new(3);
        a.add_labeled(LabelingCoset::fixed(&[0, 1, 2], &[0, 1, 2]).unwrap(), vec![]).unwrap();
        let mut b = CosetLabeledHypergraph::new(3);
        b.add_labeled(LabelingCoset::fixed(&[0, 1, 2], &[2, 0, 1]).unwrap(), vec![]).unwrap();
        let c = iso_coset_labeled(&a, &b, Within::All, &mut Budget::unlimited()).unwrap();
        assert_eq!(c.size(), BigUint::from(1u32));
        let phi = c.representative().unwrap();
        // label of v in a equals label of phi(v) in b
        assert_eq!(phi.images(), &[1, 2, 0]);
    }

    #[test]
    fn multi_coset_cases() {
        let fixed = |labels: &[usize]| LabelingCoset::fixed(&[0, 1], labels).unwrap();
        let x1 = MultipleLabelingCoset::new(2, vec![(fixed(&[0, 1]), vec![1])]).unwrap();
        let x2 = MultipleLabelingCoset::new(2, vec![(fixed(&[0, 1]), vec![1]), (fixed(&[1, 0]), vec![2])]).unwrap();
        assert!(iso_multi_coset(&x1, &x2, &mut Budget::unlimited()).unwrap().is_empty());
        let c = iso_multi_coset(&x2, &x2, &mut Budget::unlimited()).unwrap();
        assert_eq!(c.size(), BigUint::from(1u32));
        let x3 = MultipleLabelingCoset::new(2, vec![(fixed(&[0, 1]), vec![2]), (fixed(&[1, 0]), vec![1])]).unwrap();
        let c = iso_multi_coset(&x2, &x3, &mut Budget::unlimited()).unwrap();
        assert_eq!(c.representative().unwrap().images(), &[1, 0]);
        assert!(MultipleLabelingCoset::new(2, vec![(fixed(&[0, 1]), vec![]), (fixed(&[0, 1]), vec![1])]).is_err());
    }

    #[test]
    fn budget_is_reported() {
        let h = plain(4, &[&[0, 1], &[2, 3]]);
        let r = iso_hypergraph(&h, &h, Within::All, &mut Budget::new(1));
        assert!(matches!(r, Err(IsoError::Budget(1))));
    }
}
