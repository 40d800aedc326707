//! The recursive isomorphism test.
//!
//! Each level picks an initial set `X`, closes `X ∪ S` to a bag `D`, solves
//! the pieces `G[Z ∪ N(Z)]` hanging off `D` recursively, and then searches
//! isomorphisms of a coset-labeled hypergraph on `D` that encodes the edges
//! of `G[D]`, the vertex colors and how the pieces attach. The result on `D`
//! is lifted back to all of `V`.

use std::collections::{BTreeMap, HashMap};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::closure::{closure_of, find_initial_set, t_of_h, ClosureParams, InitialSetResult};
use crate::error::{GraphError, GroupError, IsoError};
use crate::format::serialize_graph;
use crate::graph::ColoredGraph;
use crate::group::{Coset, CosetUnion, LabelingCoset, PermGroup, SubsetCoset};
use crate::hyper::{iso_coset_labeled, iso_multi_coset, Budget, CosetLabeledHypergraph, MultipleLabelingCoset, Within};
use crate::perm::Permutation;
use crate::refine::{color_refine_from, dense_ranks};

#[derive(Clone, Debug)]
pub struct IsoParams {
    pub closure: ClosureParams,
    /// Search-node cap across the whole run.
    pub budget: u64,
    /// Reuse results of repeated identical subproblems.
    pub memoize: bool,
}

impl IsoParams {
    pub fn new(h: usize) -> Self {
        IsoParams { closure: ClosureParams::new(h), budget: 5_000_000, memoize: false }
    }

    pub fn with_t(mut self, t: u64) -> Self {
        self.closure = self.closure.with_t(t);
        self
    }

    pub fn with_budget(mut self, nodes: u64) -> Self {
        self.budget = nodes;
        self
    }

    /// Whether `t` is large enough for a failed initial-set search or an
    /// oversized separator to certify a topological `K_h`.
    pub fn detection_is_sound(&self) -> bool {
        self.closure.t() >= t_of_h(self.closure.h, self.closure.a_deg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    First,
    Second,
}

#[derive(Clone, Debug)]
pub enum IsoOutcome {
    NonIsomorphic,
    /// All isomorphisms, as `Aut(g1)·φ`.
    Isomorphic(Coset),
    /// The given input contains a subdivision of `K_h`.
    Detected(Side),
}

impl IsoOutcome {
    pub fn is_isomorphic(&self) -> bool {
        matches!(self, IsoOutcome::Isomorphic(_))
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct IsoStats {
    pub nodes: u64,
    pub recursive_calls: u64,
    pub max_depth: usize,
    pub peak_classes: usize,
    pub refinement: Duration,
    pub closure: Duration,
    pub group_ops: Duration,
    pub search: Duration,
}

pub(crate) enum Halt {
    Detected(Side),
    Fail(IsoError),
}

impl<E: Into<IsoError>> From<E> for Halt {
    fn from(e: E) -> Self {
        Halt::Fail(e.into())
    }
}

type R<T> = Result<T, Halt>;

/// Owner side, separator, its multiple-labeling coset and the member colors.
type SeparatorCoset = (usize, Vec<usize>, MultipleLabelingCoset, Vec<Vec<u64>>);

/// A connected graph with a marked boundary, colored so that the boundary
/// is a union of color classes.
#[derive(Clone, Debug)]
pub(crate) struct Piece {
    pub g: ColoredGraph,
    pub boundary: Vec<usize>,
    pub side: Side,
}

/// The per-side outcome of one level: the bag `D` and the components of `G - D`.
pub(crate) struct Split {
    /// Everything the two sides must agree on for an isomorphism to exist.
    pub trace: Vec<Vec<u64>>,
    /// The graph with colors refined by bag membership.
    pub g: ColoredGraph,
    pub x: Vec<usize>,
    pub d: Vec<usize>,
    pub comps: Vec<Vec<usize>>,
}

/// A piece together with where it sits in its parent.
pub(crate) struct Part {
    pub piece: Piece,
    pub owner: usize,
    /// Parent vertices of the piece, ascending; local `i` is `verts[i]`.
    pub verts: Vec<usize>,
    /// `N(Z)` in parent vertices.
    pub sep: Vec<usize>,
}

pub(crate) struct Engine<'p> {
    params: &'p IsoParams,
    budget: Budget,
    pub stats: IsoStats,
    memo: HashMap<(String, String), Coset>,
    depth: usize,
}

fn timed<T>(acc: &mut Duration, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    *acc += start.elapsed();
    out
}

fn flags(n: usize, set: &[usize]) -> Vec<bool> {
    let mut f = vec![false; n];
    for &v in set {
        f[v] = true;
    }
    f
}

fn sorted_union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = a.iter().chain(b).copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Cheap isomorphism invariant of a piece.
fn invariant(p: &Piece) -> (usize, usize, usize, Vec<u64>, Vec<usize>) {
    let mut colors = p.g.vertex_colors().to_vec();
    colors.sort_unstable();
    let mut degrees = p.g.degree_sequence();
    degrees.sort_unstable();
    (p.g.n(), p.g.edge_count(), p.boundary.len(), colors, degrees)
}

/// Extends a permutation of the vertices of a piece to all of `V`.
fn extend_local(verts: &[usize], to: &[usize], map: &Permutation, skip: &[bool]) -> Vec<(usize, usize)> {
    (0..verts.len()).filter(|&x| !skip[x]).map(|x| (verts[x], to[map.apply(x)])).collect()
}

impl<'p> Engine<'p> {
    pub(crate) fn new(params: &'p IsoParams) -> Self {
        Engine { params, budget: Budget::new(params.budget), stats: IsoStats::default(), memo: HashMap::new(), depth: 0 }
    }

    fn initial_set(&mut self, g: &ColoredGraph, side: Side) -> R<(Vec<usize>, u64)> {
        let params = self.params;
        let found = timed(&mut self.stats.refinement, || find_initial_set(g, &params.closure))?;
        match found {
            InitialSetResult::Found { x, c0, .. } => Ok((x, c0 as u64)),
            InitialSetResult::Detected if params.detection_is_sound() => Err(Halt::Detected(side)),
            InitialSetResult::Detected => {
                // Below the threshold a failed search proves nothing; use the
                // first color class of Color Refinement instead.
                let c = color_refine_from(g, g.vertex_colors());
                let x: Vec<usize> = (0..g.n()).filter(|&v| c.colors()[v] == 0).collect();
                Ok((x, u64::MAX))
            }
        }
    }

    fn closure(&mut self, g: &ColoredGraph, seeds: &[usize]) -> R<Vec<usize>> {
        let t = self.params.closure.t();
        Ok(timed(&mut self.stats.closure, || closure_of(g, t, seeds))?)
    }

    pub(crate) fn split(&mut self, p: &Piece) -> R<Split> {
        let h = self.params.closure.h;
        let n = p.g.n();
        let mut g = p.g.clone();
        if n < h {
            let min = g.vertex_colors().iter().copied().min().unwrap_or(0);
            let x = (0..n).filter(|&v| g.vertex_color(v) == min).collect();
            return Ok(Split { trace: vec![vec![0, n as u64]], g, x, d: (0..n).collect(), comps: Vec::new() });
        }
        let (x, c0) = self.initial_set(&g, p.side)?;
        let mut trace = vec![vec![1, c0, x.len() as u64]];
        let mut d = self.closure(&g, &sorted_union(&x, &p.boundary))?;
        loop {
            let comps = g.components_avoiding(&flags(n, &d));
            trace.push(vec![2, d.len() as u64, comps.len() as u64]);
            if comps.len() != 1 {
                return Ok(Split { trace, g, x, d, comps });
            }
            let (sep, _) = g.neighborhood(&comps[0])?;
            if d.len() >= h && sep != d {
                return Ok(Split { trace, g, x, d, comps });
            }
            // One component and too little progress: mark D and grow it from
            // an initial set of G - D.
            let inside = flags(n, &d);
            let keys: Vec<u64> = (0..n).map(|v| 2 * g.vertex_color(v) + u64::from(inside[v])).collect();
            let mut sorted = keys.clone();
            sorted.sort_unstable();
            trace.push(sorted);
            let (ranks, _) = dense_ranks(&keys);
            g = g.with_vertex_colors(ranks.into_iter().map(u64::from).collect())?;
            let rest = &comps[0];
            let sub = g.induced(rest);
            let (x1, c1) = self.initial_set(&sub, p.side)?;
            trace.push(vec![3, c1, x1.len() as u64]);
            let seeds: Vec<usize> = x1.iter().map(|&i| rest[i]).collect();
            d = self.closure(&g, &sorted_union(&seeds, &d))?;
        }
    }

    /// The pieces `G[Z ∪ N(Z)]` of one split.
    pub(crate) fn parts(&self, s: &Split, owner: usize, side: Side, out: &mut Vec<Part>) -> R<()> {
        for z in &s.comps {
            let (sep, _) = s.g.neighborhood(z)?;
            if sep.len() >= self.params.closure.h && self.params.detection_is_sound() {
                return Err(Halt::Detected(side));
            }
            let verts = sorted_union(z, &sep);
            let in_sep = flags(s.g.n(), &sep);
            let colors: Vec<u64> = verts.iter().map(|&v| 2 * s.g.vertex_color(v) + u64::from(in_sep[v])).collect();
            let boundary: Vec<usize> = (0..verts.len()).filter(|&i| in_sep[verts[i]]).collect();
            let g = s.g.induced(&verts).with_vertex_colors(colors)?;
            out.push(Part { piece: Piece { g, boundary, side }, owner, verts, sep });
        }
        Ok(())
    }

    fn memo_key(a: &Piece, b: &Piece) -> (String, String) {
        let key = |p: &Piece| format!("{}|{:?}", serialize_graph(&p.g), p.boundary);
        (key(a), key(b))
    }

    /// `Iso(a, b)` as a coset of bijections `V(a) → V(b)`.
    pub(crate) fn rec(&mut self, a: &Piece, b: &Piece) -> R<Coset> {
        let n = a.g.n();
        if invariant(a) != invariant(b) {
            return Ok(Coset::empty(n));
        }
        self.budget.tick()?;
        self.stats.recursive_calls += 1;
        let key = self.params.memoize.then(|| Self::memo_key(a, b));
        if let Some(hit) = key.as_ref().and_then(|k| self.memo.get(k)) {
            return Ok(hit.clone());
        }
        self.depth += 1;
        self.stats.max_depth = self.stats.max_depth.max(self.depth);
        let out = self.rec_inner(a, b);
        self.depth -= 1;
        let out = out?;
        if let Some(k) = key {
            self.memo.insert(k, out.clone());
        }
        Ok(out)
    }

    fn rec_inner(&mut self, a: &Piece, b: &Piece) -> R<Coset> {
        let n = a.g.n();
        let sa = self.split(a)?;
        let sb = self.split(b)?;
        if sa.trace != sb.trace || sa.comps.len() != sb.comps.len() {
            return Ok(Coset::empty(n));
        }
        let mut parts = Vec::new();
        self.parts(&sa, 0, a.side, &mut parts)?;
        self.parts(&sb, 1, b.side, &mut parts)?;
        let Some(classes) = self.classify(&parts)? else { return Ok(Coset::empty(n)) };
        let ctx = Level::new(self, [&sa, &sb], &parts, classes)?;
        let Some(ctx) = ctx else { return Ok(Coset::empty(n)) };

        // Isomorphisms of the bag hypergraphs, one search per image of v1.
        let h1 = ctx.hypergraph(0);
        let h2 = ctx.hypergraph(1);
        let v1 = sa.x[0];
        let mut union = CosetUnion::new(sa.d.len());
        for &v2 in &sb.x {
            let Some((c1, c2)) = bounding_colors(&sa.g, v1, &sb.g, v2, &sa.d, &sb.d) else { continue };
            let budget = &mut self.budget;
            let found = timed(&mut self.stats.search, || {
                iso_coset_labeled(&h1, &h2, Within::Colors(&c1, &c2), budget)
            })?;
            union.add(&found);
        }
        let on_bag = union.finish();
        let Some(psi) = on_bag.representative() else { return Ok(Coset::empty(n)) };

        let start = Instant::now();
        let rep = ctx.lift(0, 1, psi)?;
        let mut gens = Vec::new();
        for g in on_bag.group().generators() {
            gens.push(ctx.lift(0, 0, g)?);
        }
        gens.extend(ctx.kernel()?);
        let group = PermGroup::from_generators(n, &gens)?;
        self.stats.group_ops += start.elapsed();
        if !a.g.is_isomorphism(&b.g, &rep) {
            return Err(IsoError::Internal("lifted representative is not an isomorphism".into()).into());
        }
        Ok(Coset::new(group, rep)?)
    }

    /// Groups the parts into isomorphism classes. Per part: class id and
    /// `Iso(part, class representative)`.
    fn classify(&mut self, parts: &[Part]) -> R<Option<Vec<(usize, Coset)>>> {
        let mut reps: Vec<usize> = Vec::new();
        let mut out: Vec<(usize, Coset)> = Vec::with_capacity(parts.len());
        for (i, part) in parts.iter().enumerate() {
            let inv = invariant(&part.piece);
            let mut hit = None;
            for (c, &r) in reps.iter().enumerate() {
                if invariant(&parts[r].piece) != inv {
                    continue;
                }
                let co = self.rec(&part.piece, &parts[r].piece)?;
                if !co.is_empty() {
                    hit = Some((c, co));
                    break;
                }
            }
            let entry = match hit {
                Some(e) => e,
                None => {
                    reps.push(i);
                    let aut = self.rec(&part.piece, &part.piece)?;
                    if aut.is_empty() {
                        return Err(IsoError::Internal("piece without identity automorphism".into()).into());
                    }
                    (reps.len() - 1, aut)
                }
            };
            out.push(entry);
        }
        self.stats.peak_classes = self.stats.peak_classes.max(reps.len());
        let count = |owner: usize| {
            let mut v: Vec<usize> = parts.iter().zip(&out).filter(|(p, _)| p.owner == owner).map(|(_, e)| e.0).collect();
            v.sort_unstable();
            v
        };
        Ok((count(0) == count(1)).then_some(out))
    }

    fn budget(&mut self) -> &mut Budget {
        &mut self.budget
    }
}

/// Data shared by the bag search and the lifting step of one level.
struct Level<'a> {
    splits: [&'a Split; 2],
    parts: &'a [Part],
    classes: Vec<(usize, Coset)>,
    /// Per part: `Aut(part)` with its boundary as base prefix.
    chains: Vec<PermGroup>,
    /// Per side: separator → (class id, `Iso(X_P, X_Q*)` on separator positions).
    seps: [BTreeMap<Vec<usize>, (usize, Coset)>; 2],
}

impl<'a> Level<'a> {
    fn new(
        engine: &mut Engine<'_>,
        splits: [&'a Split; 2],
        parts: &'a [Part],
        classes: Vec<(usize, Coset)>,
    ) -> R<Option<Self>> {
        let start = Instant::now();
        let mut chains = Vec::with_capacity(parts.len());
        let mut labels = Vec::with_capacity(parts.len());
        for (part, (_, co)) in parts.iter().zip(&classes) {
            let aut = co.group();
            chains.push(PermGroup::with_base_prefix(aut.degree(), aut.generators(), &part.piece.boundary)?);
            labels.push(boundary_labeling(co, &part.piece.boundary, &part.sep)?);
        }
        // The multiple-labeling coset of every separator.
        let mut groups: [BTreeMap<Vec<usize>, Vec<usize>>; 2] = [BTreeMap::new(), BTreeMap::new()];
        for (i, part) in parts.iter().enumerate() {
            groups[part.owner].entry(part.sep.clone()).or_default().push(i);
        }
        let mut multis: Vec<SeparatorCoset> = Vec::new();
        for (owner, map) in groups.iter().enumerate() {
            for (sep, members) in map {
                let mut merged: Vec<(LabelingCoset, Vec<u64>)> = Vec::new();
                for &i in members {
                    let local = labels[i].transport(|v| sep.binary_search(&v).expect("separator vertex"));
                    match merged.iter_mut().find(|(l, _)| l.same_set(&local)) {
                        Some((_, c)) => c.push(classes[i].0 as u64),
                        None => merged.push((local, vec![classes[i].0 as u64])),
                    }
                }
                for (_, c) in merged.iter_mut() {
                    c.sort_unstable();
                }
                let mut colors: Vec<Vec<u64>> = merged.iter().map(|(_, c)| c.clone()).collect();
                colors.sort();
                multis.push((owner, sep.clone(), MultipleLabelingCoset::new(sep.len(), merged)?, colors));
            }
        }
        engine.stats.group_ops += start.elapsed();
        let mut reps: Vec<usize> = Vec::new();
        let mut seps: [BTreeMap<Vec<usize>, (usize, Coset)>; 2] = [BTreeMap::new(), BTreeMap::new()];
        for i in 0..multis.len() {
            let mut hit = None;
            for (c, &r) in reps.iter().enumerate() {
                if multis[r].1.len() != multis[i].1.len() || multis[r].3 != multis[i].3 {
                    continue;
                }
                let start = Instant::now();
                let co = iso_multi_coset(&multis[i].2, &multis[r].2, engine.budget())?;
                engine.stats.search += start.elapsed();
                if !co.is_empty() {
                    hit = Some((c, co));
                    break;
                }
            }
            let entry = match hit {
                Some(e) => e,
                None => {
                    reps.push(i);
                    (reps.len() - 1, iso_multi_coset(&multis[i].2, &multis[i].2, engine.budget())?)
                }
            };
            seps[multis[i].0].insert(multis[i].1.clone(), entry);
        }
        let count = |owner: usize| {
            let mut v: Vec<usize> = seps[owner].values().map(|e| e.0).collect();
            v.sort_unstable();
            v
        };
        if count(0) != count(1) {
            return Ok(None);
        }
        Ok(Some(Level { splits, parts, classes, chains, seps }))
    }

    /// The hypergraph on the bag of one side, on bag-local indices.
    fn hypergraph(&self, side: usize) -> CosetLabeledHypergraph {
        let s = self.splits[side];
        let local = |v: usize| s.d.binary_search(&v).ok();
        let mut h = CosetLabeledHypergraph::new(s.d.len());
        for (u, v) in s.g.edges() {
            let (Some(lu), Some(lv)) = (local(u), local(v)) else { continue };
            let a = s.g.arc_color(u, v).expect("edge");
            let b = s.g.arc_color(v, u).expect("edge");
            if a == b {
                h.add_plain(&[lu, lv], vec![0, a, a]).expect("bag vertices");
            } else {
                let (first, second) = if a < b { (lu, lv) } else { (lv, lu) };
                let label = LabelingCoset::fixed(&[first, second], &[0, 1]).expect("distinct");
                h.add_labeled(label, vec![0, a.min(b), a.max(b)]).expect("bag vertices");
            }
        }
        for (sep, (class, co)) in &self.seps[side] {
            let domain: Vec<usize> = sep.iter().map(|&v| local(v).expect("separator inside bag")).collect();
            let rho = co.representative().expect("non-empty");
            let theta = co.group().conjugate(rho);
            let label = LabelingCoset::new(&domain, rho.images(), theta).expect("bijective labels");
            h.add_labeled(label, vec![1, *class as u64]).expect("bag vertices");
        }
        for (i, &v) in s.d.iter().enumerate() {
            h.add_plain(&[i], vec![2, s.g.vertex_color(v)]).expect("bag vertex");
        }
        h
    }

    /// Extends `psi` (bag of `src` → bag of `dst`, bag-local) to all vertices.
    fn lift(&self, src: usize, dst: usize, psi: &Permutation) -> R<Permutation> {
        let (s, t) = (self.splits[src], self.splits[dst]);
        let n = s.g.n();
        let mut phi = vec![usize::MAX; n];
        for (i, &v) in s.d.iter().enumerate() {
            phi[v] = t.d[psi.apply(i)];
        }
        let mut used = vec![false; self.parts.len()];
        for (i, part) in self.parts.iter().enumerate().filter(|(_, p)| p.owner == src) {
            let mut target: Vec<usize> = part.sep.iter().map(|&v| phi[v]).collect();
            target.sort_unstable();
            let mut done = false;
            for (j, other) in self.parts.iter().enumerate() {
                if other.owner != dst || used[j] || self.classes[j].0 != self.classes[i].0 || other.sep != target {
                    continue;
                }
                let wanted: Vec<usize> = part
                    .piece
                    .boundary
                    .iter()
                    .map(|&x| other.verts.binary_search(&phi[part.verts[x]]).expect("separator image"))
                    .collect();
                if let Some(map) = self.piece_map(i, j, &wanted) {
                    let skip = flags(part.verts.len(), &part.piece.boundary);
                    for (v, w) in extend_local(&part.verts, &other.verts, &map, &skip) {
                        phi[v] = w;
                    }
                    used[j] = true;
                    done = true;
                    break;
                }
            }
            if !done {
                return Err(IsoError::Internal("no matching piece while lifting".into()).into());
            }
        }
        Permutation::from_images(phi).ok_or_else(|| IsoError::Internal("lift is not a bijection".into()).into())
    }

    /// An isomorphism from part `i` to part `j` (same class) sending the
    /// boundary of `i`, in order, to the local vertices `wanted` of `j`.
    fn piece_map(&self, i: usize, j: usize, wanted: &[usize]) -> Option<Permutation> {
        let tau = self.classes[i].1.representative()?.then(&self.classes[j].1.representative()?.inverse());
        let inv = tau.inverse();
        let images: Vec<usize> = wanted.iter().map(|&w| inv.apply(w)).collect();
        let alpha = self.chains[i].element_with_base_images(&images)?;
        Some(alpha.then(&tau))
    }

    /// Generators of the automorphisms of side 0 that fix the bag pointwise.
    fn kernel(&self) -> R<Vec<Permutation>> {
        let n = self.splits[0].g.n();
        let mut gens = Vec::new();
        for (i, part) in self.parts.iter().enumerate().filter(|(_, p)| p.owner == 0) {
            let stab = self.classes[i].1.group().pointwise_stabilizer(&part.piece.boundary)?;
            let skip = flags(part.verts.len(), &part.piece.boundary);
            for g in stab.generators() {
                let mut images: Vec<usize> = (0..n).collect();
                for (v, w) in extend_local(&part.verts, &part.verts, g, &skip) {
                    images[v] = w;
                }
                gens.push(Permutation::from_images(images).expect("piece automorphism"));
            }
        }
        // Swaps of interchangeable pieces on the same separator.
        let mut stars: Vec<usize> = Vec::new();
        for (i, part) in self.parts.iter().enumerate().filter(|(_, p)| p.owner == 0) {
            let mut joined = false;
            for &r in &stars {
                let other = &self.parts[r];
                if other.sep != part.sep || self.classes[r].0 != self.classes[i].0 {
                    continue;
                }
                if let Some(map) = self.piece_map(i, r, &other.piece.boundary) {
                    let skip = flags(part.verts.len(), &part.piece.boundary);
                    let mut images: Vec<usize> = (0..n).collect();
                    for (v, w) in extend_local(&part.verts, &other.verts, &map, &skip) {
                        images[v] = w;
                        images[w] = v;
                    }
                    gens.push(Permutation::from_images(images).expect("piece swap"));
                    joined = true;
                    break;
                }
            }
            if !joined {
                stars.push(i);
            }
        }
        Ok(gens)
    }
}

/// `Iso(part, rep)[S]` as a labeling coset of the global separator `sep`,
/// labels being positions in the representative's boundary.
fn boundary_labeling(co: &Coset, boundary: &[usize], sep: &[usize]) -> Result<LabelingCoset, GroupError> {
    let sub = co.restrict(boundary)?;
    let delta = sub.coset.representative().ok_or(GroupError::NotInvariant)?;
    let theta = sub.coset.group().conjugate(delta);
    LabelingCoset::new(sep, delta.images(), theta)
}

/// Joint Color Refinement of `g1 ⊎ g2` with `v1` and `v2` individualized,
/// restricted to `d1` and `d2`. `None` if the two sides disagree.
fn bounding_colors(
    g1: &ColoredGraph,
    v1: usize,
    g2: &ColoredGraph,
    v2: usize,
    d1: &[usize],
    d2: &[usize],
) -> Option<(Vec<u64>, Vec<u64>)> {
    let n1 = g1.n();
    if n1 != g2.n() || d1.len() != d2.len() {
        return None;
    }
    let union = g1.disjoint_union(g2);
    let fresh = union.vertex_colors().iter().copied().max().unwrap_or(0) + 1;
    let mut init = union.vertex_colors().to_vec();
    init[v1] = fresh;
    init[n1 + v2] = fresh;
    let c = color_refine_from(&union, &init);
    let colors = c.colors();
    let mut balance: BTreeMap<u32, i64> = BTreeMap::new();
    for (i, &col) in colors.iter().enumerate() {
        *balance.entry(col).or_default() += if i < n1 { 1 } else { -1 };
    }
    for &v in d1 {
        *balance.entry(colors[v]).or_default() += 1 << 20;
    }
    for &v in d2 {
        *balance.entry(colors[n1 + v]).or_default() -= 1 << 20;
    }
    if balance.values().any(|&b| b != 0) {
        return None;
    }
    let c1 = d1.iter().map(|&v| colors[v] as u64).collect();
    let c2 = d2.iter().map(|&v| colors[n1 + v] as u64).collect();
    Some((c1, c2))
}

/// A coset on `d1 → d2` containing every isomorphism `(g1, v1) → (g2, v2)`
/// that maps `d1` onto `d2`, restricted to `d1`: all maps preserving the
/// joint Color Refinement classes. Empty when the classes do not match.
pub fn bounding_coset(
    g1: &ColoredGraph,
    v1: usize,
    g2: &ColoredGraph,
    v2: usize,
    d1: &[usize],
    d2: &[usize],
) -> Result<SubsetCoset, IsoError> {
    for (g, v, d) in [(g1, v1, d1), (g2, v2, d2)] {
        if let Some(&x) = d.iter().chain(std::iter::once(&v)).find(|&&x| x >= g.n()) {
            return Err(GraphError::VertexOutOfRange { vertex: x, n: g.n() }.into());
        }
    }
    let mut s1 = d1.to_vec();
    s1.sort_unstable();
    s1.dedup();
    let mut s2 = d2.to_vec();
    s2.sort_unstable();
    s2.dedup();
    let k = s1.len();
    let Some((c1, c2)) = bounding_colors(g1, v1, g2, v2, &s1, &s2) else {
        return Ok(SubsetCoset { domain: s1, codomain: s2, coset: Coset::empty(k) });
    };
    let mut classes: BTreeMap<u64, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for i in 0..k {
        classes.entry(c1[i]).or_default().0.push(i);
        classes.entry(c2[i]).or_default().1.push(i);
    }
    let mut rep = vec![0; k];
    for (left, right) in classes.values() {
        for (&a, &b) in left.iter().zip(right) {
            rep[a] = b;
        }
    }
    let lists: Vec<Vec<usize>> = classes.into_values().map(|(l, _)| l).collect();
    let group = PermGroup::symmetric_product(k, &lists)?;
    let coset = Coset::new(group, Permutation::from_images(rep).expect("class sizes agree"))?;
    Ok(SubsetCoset { domain: s1, codomain: s2, coset })
}

fn check_supported(g: &ColoredGraph) -> Result<(), IsoError> {
    if g.has_pair_colors() {
        return Err(IsoError::Unsupported("pair colors are only accepted by the closure operations".into()));
    }
    Ok(())
}

/// Decides isomorphism of `g1` and `g2`, or reports a subdivision of `K_h`
/// in one of them.
pub fn isomorphisms(g1: &ColoredGraph, g2: &ColoredGraph, params: &IsoParams) -> Result<IsoOutcome, IsoError> {
    isomorphisms_with_stats(g1, g2, params).map(|(o, _)| o)
}

pub fn isomorphisms_with_stats(
    g1: &ColoredGraph,
    g2: &ColoredGraph,
    params: &IsoParams,
) -> Result<(IsoOutcome, IsoStats), IsoError> {
    check_supported(g1)?;
    check_supported(g2)?;
    let mut engine = Engine::new(params);
    let out = match top_level(&mut engine, g1, g2) {
        Ok(Some(c)) => IsoOutcome::Isomorphic(c),
        Ok(None) => IsoOutcome::NonIsomorphic,
        Err(Halt::Detected(side)) => IsoOutcome::Detected(side),
        Err(Halt::Fail(e)) => return Err(e),
    };
    engine.stats.nodes = engine.budget.used();
    Ok((out, engine.stats))
}

/// Components are matched through their isomorphism classes; the result
/// is assembled from component isomorphisms and swaps.
fn top_level(engine: &mut Engine<'_>, g1: &ColoredGraph, g2: &ColoredGraph) -> R<Option<Coset>> {
    let n = g1.n();
    if n != g2.n() || g1.edge_count() != g2.edge_count() {
        return Ok(None);
    }
    let mut parts = Vec::new();
    for (owner, (g, side)) in [(g1, Side::First), (g2, Side::Second)].into_iter().enumerate() {
        for comp in g.connected_components() {
            let piece = Piece { g: g.induced(&comp), boundary: Vec::new(), side };
            parts.push(Part { piece, owner, verts: comp, sep: Vec::new() });
        }
    }
    let Some(classes) = engine.classify(&parts)? else { return Ok(None) };
    let start = Instant::now();
    let mut images = vec![usize::MAX; n];
    let mut used = vec![false; parts.len()];
    let mut gens = Vec::new();
    let mut last_of_class: HashMap<usize, usize> = HashMap::new();
    for i in (0..parts.len()).filter(|&i| parts[i].owner == 0) {
        let class = classes[i].0;
        let j = (0..parts.len())
            .find(|&j| parts[j].owner == 1 && !used[j] && classes[j].0 == class)
            .ok_or_else(|| Halt::Fail(IsoError::Internal("class counts disagree".into())))?;
        used[j] = true;
        let to = |a: usize, b: usize| {
            classes[a].1.representative().expect("non-empty").then(&classes[b].1.representative().expect("non-empty").inverse())
        };
        let map = to(i, j);
        let none = vec![false; parts[i].verts.len()];
        for (v, w) in extend_local(&parts[i].verts, &parts[j].verts, &map, &none) {
            images[v] = w;
        }
        for g in classes[i].1.group().generators() {
            let mut img: Vec<usize> = (0..n).collect();
            for (v, w) in extend_local(&parts[i].verts, &parts[i].verts, g, &none) {
                img[v] = w;
            }
            gens.push(Permutation::from_images(img).expect("component automorphism"));
        }
        if let Some(&prev) = last_of_class.get(&class) {
            let swap = to(prev, i);
            let mut img: Vec<usize> = (0..n).collect();
            for (v, w) in extend_local(&parts[prev].verts, &parts[i].verts, &swap, &none) {
                img[v] = w;
                img[w] = v;
            }
            gens.push(Permutation::from_images(img).expect("component swap"));
        }
        last_of_class.insert(class, i);
    }
    let rep = Permutation::from_images(images)
        .ok_or_else(|| Halt::Fail(IsoError::Internal("component matching is not a bijection".into())))?;
    let group = PermGroup::from_generators(n, &gens)?;
    engine.stats.group_ops += start.elapsed();
    if !g1.is_isomorphism(g2, &rep) || gens.iter().any(|g| !g1.is_isomorphism(g1, g)) {
        return Err(IsoError::Internal("result failed verification".into()).into());
    }
    Ok(Some(Coset::new(group, rep)?))
}

/// `Aut(g)`. Fails with `Unsupported` if `g` contains a detected `K_h` subdivision.
pub fn automorphism_group(g: &ColoredGraph, params: &IsoParams) -> Result<PermGroup, IsoError> {
    match isomorphisms(g, g, params)? {
        IsoOutcome::Isomorphic(c) => Ok(c.group().clone()),
        IsoOutcome::Detected(_) => Err(IsoError::Unsupported(format!(
            "graph contains a topological K_{}",
            params.closure.h
        ))),
        IsoOutcome::NonIsomorphic => Err(IsoError::Internal("graph not isomorphic to itself".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, random_permutation, Family};
    use num_bigint::BigUint;

    fn cycle(n: usize) -> ColoredGraph {
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        ColoredGraph::from_edges(n, &edges).unwrap()
    }

    fn path(n: usize) -> ColoredGraph {
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        ColoredGraph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn automorphism_orders() {
        let p = IsoParams::new(5);
        assert_eq!(automorphism_group(&cycle(6), &p).unwrap().order(), BigUint::from(12u32));
        assert_eq!(automorphism_group(&path(4), &p).unwrap().order(), BigUint::from(2u32));
        // 0-1-2-3-4 with 5 on 1 and 6 on 5: no symmetry
        let rigid = ColoredGraph::from_edges(7, &[(0, 1), (1, 2), (2, 3), (3, 4), (1, 5), (5, 6), (2, 6)]).unwrap();
        let rigid_tree = ColoredGraph::from_edges(7, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (2, 6)]).unwrap();
        assert!(automorphism_group(&rigid, &p).is_ok());
        assert_eq!(automorphism_group(&rigid_tree, &p).unwrap().order(), BigUint::from(1u32));
    }

    #[test]
    fn component_counts() {
        let two_triangles = ColoredGraph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]).unwrap();
        let out = isomorphisms(&cycle(6), &two_triangles, &IsoParams::new(5)).unwrap();
        assert!(matches!(out, IsoOutcome::NonIsomorphic));
        let aut = automorphism_group(&two_triangles, &IsoParams::new(5)).unwrap();
        assert_eq!(aut.order(), BigUint::from(72u32));
    }

    #[test]
    fn permuted_trees_small_t() {
        let mut deepest = 0;
        for seed in 0..10 {
            let g = generate(&Family::Tree { n: 18 }, seed).unwrap();
            let p = random_permutation(18, seed + 100);
            let h = g.apply_permutation(&p).unwrap();
            for params in [IsoParams::new(3), IsoParams::new(3).with_t(1), IsoParams::new(3).with_t(2)] {
                let (out, stats) = isomorphisms_with_stats(&g, &h, &params).unwrap();
                match out {
                    IsoOutcome::Isomorphic(c) => assert!(c.contains(&p).unwrap()),
                    other => panic!("seed {seed}: {other:?}"),
                }
                if params.closure.t() == 1 {
                    deepest = deepest.max(stats.max_depth);
                }
            }
        }
        assert!(deepest > 1, "t = 1 never split a tree");
    }

    #[test]
    fn star_boundary() {
        let star = ColoredGraph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let aut = automorphism_group(&star, &IsoParams::new(3).with_t(1)).unwrap();
        assert_eq!(aut.order(), BigUint::from(24u32));
    }

    #[test]
    fn bounding_coset_examples() {
        let c6 = cycle(6);
        let all: Vec<usize> = (0..6).collect();
        let b = bounding_coset(&c6, 0, &c6, 0, &all, &all).unwrap();
        assert!(b.coset.contains(&Permutation::identity(6)).unwrap());
        // distance classes {0}, {1,5}, {2,4}, {3}
        assert_eq!(b.coset.size(), BigUint::from(4u32));
        assert!(b.coset.contains(&Permutation::from_cycles(6, &[&[1, 5], &[2, 4]]).unwrap()).unwrap());
        let p4 = path(4);
        let b = bounding_coset(&p4, 0, &p4, 1, &[0, 1, 2, 3], &[0, 1, 2, 3]).unwrap();
        assert!(b.is_empty());
    }

    #[test]
    fn pair_colors_rejected() {
        let mut b = ColoredGraph::builder(2);
        b.add_edge(0, 1).unwrap();
        b.pair_color(0, 1, 3).unwrap();
        let g = b.build();
        assert!(matches!(isomorphisms(&g, &g, &IsoParams::new(3)), Err(IsoError::Unsupported(_))));
    }
}
