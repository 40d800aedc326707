//! Color Refinement and the 2- and 3-dimensional Weisfeiler-Leman algorithm.
//!
//! Colors are renumbered after every round so that they form `0..m` and
//! their order is a function of the previous color and the round signature
//! only. Two runs on isomorphic inputs therefore agree on color ids.

use crate::error::RefineError;
use crate::graph::ColoredGraph;

/// A coloring of the `k`-tuples of `{0..n-1}`, `k` in `1..=3`.
///
/// Tuple `(v1, .., vk)` lives at index `v1*n^(k-1) + .. + vk`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TupleColoring {
    k: usize,
    n: usize,
    colors: Vec<u32>,
    num_colors: usize,
    rounds: usize,
}

impl TupleColoring {
    /// Dense ranks of `values` under the numeric order.
    pub fn from_values(k: usize, n: usize, values: &[u64]) -> Self {
        assert_eq!(values.len(), n.pow(k as u32), "value count must be n^k");
        let (colors, num_colors) = dense_ranks(values);
        TupleColoring { k, n, colors, num_colors, rounds: 0 }
    }

    pub(crate) fn from_dense(k: usize, n: usize, colors: Vec<u32>, num_colors: usize, rounds: usize) -> Self {
        debug_assert_eq!(colors.len(), n.pow(k as u32));
        TupleColoring { k, n, colors, num_colors, rounds }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of tuples, `n^k`.
    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn num_colors(&self) -> usize {
        self.num_colors
    }

    /// Rounds that split at least one class.
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn into_colors(self) -> Vec<u32> {
        self.colors
    }

    pub fn index(&self, tuple: &[usize]) -> usize {
        debug_assert_eq!(tuple.len(), self.k);
        tuple.iter().fold(0, |acc, &v| acc * self.n + v)
    }

    pub fn decode_into(&self, mut index: usize, out: &mut [usize]) {
        for slot in out.iter_mut().rev() {
            *slot = index % self.n;
            index /= self.n;
        }
    }

    pub fn color(&self, tuple: &[usize]) -> u32 {
        self.colors[self.index(tuple)]
    }

    pub fn color_at(&self, index: usize) -> u32 {
        self.colors[index]
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_colors];
        for &c in &self.colors {
            sizes[c as usize] += 1;
        }
        sizes
    }

    /// Tuple indices per color, each ascending.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_colors];
        for (i, &c) in self.colors.iter().enumerate() {
            out[c as usize].push(i);
        }
        out
    }

    pub fn is_discrete(&self) -> bool {
        self.num_colors == self.colors.len()
    }

    /// Same partition of tuples, ignoring color ids.
    pub fn same_partition(&self, other: &TupleColoring) -> bool {
        self.k == other.k
            && self.n == other.n
            && self.num_colors == other.num_colors
            && refines_raw(&self.colors, &other.colors)
    }
}

pub(crate) fn dense_ranks(values: &[u64]) -> (Vec<u32>, usize) {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let ranks = values
        .iter()
        .map(|v| sorted.binary_search(v).expect("present") as u32)
        .collect();
    (ranks, sorted.len())
}

fn refines_raw(fine: &[u32], coarse: &[u32]) -> bool {
    let mut image: std::collections::HashMap<u32, u32> = std::collections::HashMap::new();
    fine.iter()
        .zip(coarse)
        .all(|(&f, &c)| *image.entry(f).or_insert(c) == c)
}

/// `c1 ⪯ c2`: tuples equal under `c1` are equal under `c2`.
pub fn refines(c1: &TupleColoring, c2: &TupleColoring) -> Result<bool, RefineError> {
    if c1.k != c2.k {
        return Err(RefineError::DimensionMismatch { left: c1.k, right: c2.k });
    }
    if c1.n != c2.n {
        return Err(RefineError::VertexCountMismatch { left: c1.n, right: c2.n });
    }
    Ok(refines_raw(&c1.colors, &c2.colors))
}

/// Vertex-level view for Color Refinement: per vertex the list of
/// `(neighbour, color of arc out, color of arc in)`.
#[derive(Clone, Debug)]
pub(crate) struct ArcView {
    nbrs: Vec<Vec<(u32, u32, u32)>>,
}

impl ArcView {
    pub(crate) fn of_graph(g: &ColoredGraph) -> Self {
        let mut values: Vec<u64> = g.arc_color_entries().map(|(_, c)| c).collect();
        values.push(0);
        values.sort_unstable();
        values.dedup();
        let rank = |c: u64| values.binary_search(&c).expect("present") as u32;
        let nbrs = (0..g.n())
            .map(|v| {
                g.neighbors(v)
                    .iter()
                    .zip(g.arc_colors_from(v))
                    .map(|(&w, &c)| (w as u32, rank(c), rank(g.arc_color(w, v).expect("symmetric"))))
                    .collect()
            })
            .collect();
        ArcView { nbrs }
    }

    /// Complete graph with arc colors `arc(v, w)`.
    pub(crate) fn complete(n: usize, arc: impl Fn(usize, usize) -> u32) -> Self {
        let nbrs = (0..n)
            .map(|v| {
                (0..n)
                    .filter(|&w| w != v)
                    .map(|w| (w as u32, arc(v, w), arc(w, v)))
                    .collect()
            })
            .collect();
        ArcView { nbrs }
    }

    /// Arbitrary adjacency lists of `(neighbour, out color, in color)`.
    pub(crate) fn from_lists(nbrs: Vec<Vec<(u32, u32, u32)>>) -> Self {
        ArcView { nbrs }
    }
}

/// One Color Refinement round on dense colors; returns the new dense coloring
/// and its number of colors. Members of singleton classes get an empty signature.
pub(crate) fn cr_round(view: &ArcView, colors: &[u32], num: usize) -> (Vec<u32>, usize) {
    let n = colors.len();
    let mut size = vec![0usize; num];
    for &c in colors {
        size[c as usize] += 1;
    }
    let mut buf: Vec<(u32, u32, u32)> = Vec::new();
    let mut off = vec![0usize; n + 1];
    for v in 0..n {
        off[v] = buf.len();
        if size[colors[v] as usize] > 1 {
            buf.extend(view.nbrs[v].iter().map(|&(w, o, i)| (colors[w as usize], o, i)));
            buf[off[v]..].sort_unstable();
        }
    }
    off[n] = buf.len();
    let sig = |v: usize| &buf[off[v]..off[v + 1]];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| colors[a].cmp(&colors[b]).then_with(|| sig(a).cmp(sig(b))));
    let mut new = vec![0u32; n];
    let mut next = 0u32;
    for i in 0..n {
        let v = order[i];
        if i > 0 {
            let u = order[i - 1];
            if colors[u] != colors[v] || sig(u) != sig(v) {
                next += 1;
            }
        }
        new[v] = next;
    }
    let count = if n == 0 { 0 } else { next as usize + 1 };
    (new, count)
}

/// Refines dense `colors` in place to the coarsest stable coloring below them.
/// Returns `(number of colors, splitting rounds)`.
pub(crate) fn cr_refine_in_place(view: &ArcView, colors: &mut Vec<u32>) -> (usize, usize) {
    let mut num = colors.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    let mut rounds = 0;
    loop {
        let (new, count) = cr_round(view, colors, num);
        if count == num {
            return (num, rounds);
        }
        *colors = new;
        num = count;
        rounds += 1;
    }
}

/// Stable Color Refinement coloring of `g`, starting from its vertex colors.
pub fn color_refine(g: &ColoredGraph) -> TupleColoring {
    color_refine_from(g, g.vertex_colors())
}

/// Stable Color Refinement coloring of `g` starting from `initial` instead of
/// the vertex colors of `g`.
pub fn color_refine_from(g: &ColoredGraph, initial: &[u64]) -> TupleColoring {
    assert_eq!(initial.len(), g.n());
    let (mut colors, _) = dense_ranks(initial);
    let view = ArcView::of_graph(g);
    let (num, rounds) = cr_refine_in_place(&view, &mut colors);
    TupleColoring::from_dense(1, g.n(), colors, num, rounds)
}

/// Gives `v` a fresh singleton color placed directly after its old class.
pub fn individualize(c: &TupleColoring, v: usize) -> Result<TupleColoring, RefineError> {
    if c.k != 1 {
        return Err(RefineError::InvalidDimension(c.k));
    }
    if v >= c.n {
        return Err(RefineError::VertexOutOfRange(v));
    }
    let values: Vec<u64> = (0..c.n).map(|w| 2 * c.colors[w] as u64 + u64::from(w == v)).collect();
    Ok(TupleColoring::from_values(1, c.n, &values))
}

/// Configuration for [`wl_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WlOptions {
    /// Largest `n` accepted for `k = 2`.
    pub max_n_k2: usize,
    /// Largest `n` accepted for `k = 3`.
    pub max_n_k3: usize,
}

impl Default for WlOptions {
    fn default() -> Self {
        WlOptions { max_n_k2: 8192, max_n_k3: 512 }
    }
}

pub fn wl(g: &ColoredGraph, k: usize) -> Result<TupleColoring, RefineError> {
    wl_with(g, k, &WlOptions::default())
}

pub fn wl_with(g: &ColoredGraph, k: usize, opts: &WlOptions) -> Result<TupleColoring, RefineError> {
    let n = g.n();
    match k {
        1 => return Ok(color_refine(g)),
        2 if n > opts.max_n_k2 => return Err(RefineError::TooLarge { n, k, cap: opts.max_n_k2 }),
        3 if n > opts.max_n_k3 => return Err(RefineError::TooLarge { n, k, cap: opts.max_n_k3 }),
        2 | 3 => {}
        _ => return Err(RefineError::InvalidDimension(k)),
    }
    let init = wl_initial(g, k);
    let mut colors = init.colors;
    let mut num = init.num_colors;
    let mut rounds = 0;
    loop {
        let (new, count) = wl_round(n, k, &colors, num);
        if count == num {
            break;
        }
        colors = new;
        num = count;
        rounds += 1;
    }
    Ok(TupleColoring::from_dense(k, n, colors, num, rounds))
}

/// Atomic type of the ordered pair `(v, w)`: equality, adjacency, arc color
/// and pair color. Dense ranks over all `n^2` pairs.
fn pair_atoms(g: &ColoredGraph) -> Vec<u32> {
    let n = g.n();
    let mut keys: Vec<(bool, bool, u64, u64)> = Vec::with_capacity(n * n);
    for v in 0..n {
        for w in 0..n {
            let arc = g.arc_color(v, w);
            keys.push((v == w, arc.is_some(), arc.unwrap_or(0), g.pair_color(v, w)));
        }
    }
    let mut sorted = keys.clone();
    sorted.sort_unstable();
    sorted.dedup();
    keys.iter().map(|k| sorted.binary_search(k).expect("present") as u32).collect()
}

/// The initial coloring of `k`-tuples by the isomorphism type of the ordered
/// subgraph they induce, including all colorings.
pub fn wl_initial(g: &ColoredGraph, k: usize) -> TupleColoring {
    let n = g.n();
    if k == 1 {
        return TupleColoring::from_values(1, n, g.vertex_colors());
    }
    let (vc, _) = dense_ranks(g.vertex_colors());
    let atoms = pair_atoms(g);
    let total = n.pow(k as u32);
    let mut tuple = vec![0usize; k];
    let mut keys: Vec<[u32; 12]> = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rest = idx;
        for slot in tuple.iter_mut().rev() {
            *slot = rest % n;
            rest /= n;
        }
        let mut key = [0u32; 12];
        let mut p = 0;
        for &a in &tuple {
            key[p] = vc[a];
            p += 1;
        }
        for &a in &tuple {
            for &b in &tuple {
                key[p] = atoms[a * n + b];
                p += 1;
            }
        }
        keys.push(key);
    }
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_unstable_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut colors = vec![0u32; total];
    let mut next = 0u32;
    for i in 0..total {
        if i > 0 && keys[order[i]] != keys[order[i - 1]] {
            next += 1;
        }
        colors[order[i]] = next;
    }
    let num = if total == 0 { 0 } else { next as usize + 1 };
    TupleColoring::from_dense(k, n, colors, num, 0)
}

/// Fills `out` with the sorted round signature of tuple `idx`: for each `w`
/// the colors of the tuples with one entry replaced by `w`, packed into a u128.
fn wl_signature(n: usize, k: usize, colors: &[u32], idx: usize, out: &mut Vec<u128>) {
    out.clear();
    if k == 2 {
        let (a, b) = (idx / n, idx % n);
        for w in 0..n {
            let x = colors[w * n + b] as u128;
            let y = colors[a * n + w] as u128;
            out.push((x << 32) | y);
        }
    } else {
        let nn = n * n;
        let (a, b, c) = (idx / nn, (idx / n) % n, idx % n);
        for w in 0..n {
            let x = colors[w * nn + b * n + c] as u128;
            let y = colors[a * nn + w * n + c] as u128;
            let z = colors[a * nn + b * n + w] as u128;
            out.push((x << 64) | (y << 32) | z);
        }
    }
    out.sort_unstable();
}

fn fingerprint(sig: &[u128]) -> u64 {
    let mut h: u64 = 0x9e37_79b9_7f4a_7c15 ^ sig.len() as u64;
    for &x in sig {
        h = mix(h ^ x as u64);
        h = mix(h ^ (x >> 64) as u64);
    }
    h
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One k-WL round. Within an old class, new colors are ordered by signature
/// fingerprint and then by the signature itself, and every group of equal
/// fingerprints is verified signature by signature, so the split is exact.
pub(crate) fn wl_round(n: usize, k: usize, colors: &[u32], num: usize) -> (Vec<u32>, usize) {
    let total = colors.len();
    let mut start = vec![0usize; num + 1];
    for &c in colors {
        start[c as usize + 1] += 1;
    }
    for c in 0..num {
        start[c + 1] += start[c];
    }
    let mut members = vec![0usize; total];
    let mut fill = start.clone();
    for (i, &c) in colors.iter().enumerate() {
        members[fill[c as usize]] = i;
        fill[c as usize] += 1;
    }

    let mut new = vec![0u32; total];
    let mut next = 0u32;
    let mut sig = Vec::with_capacity(n);
    let mut reference = Vec::with_capacity(n);
    let mut keyed: Vec<(u64, usize)> = Vec::new();
    for c in 0..num {
        let class = &members[start[c]..start[c + 1]];
        if class.len() == 1 {
            new[class[0]] = next;
            next += 1;
            continue;
        }
        keyed.clear();
        for &idx in class {
            wl_signature(n, k, colors, idx, &mut sig);
            keyed.push((fingerprint(&sig), idx));
        }
        keyed.sort_unstable();
        let mut s = 0;
        while s < keyed.len() {
            let mut e = s + 1;
            while e < keyed.len() && keyed[e].0 == keyed[s].0 {
                e += 1;
            }
            wl_signature(n, k, colors, keyed[s].1, &mut reference);
            let uniform = keyed[s + 1..e].iter().all(|&(_, idx)| {
                wl_signature(n, k, colors, idx, &mut sig);
                sig == reference
            });
            if uniform {
                for &(_, idx) in &keyed[s..e] {
                    new[idx] = next;
                }
                next += 1;
            } else {
                let mut exact: Vec<(Vec<u128>, usize)> = keyed[s..e]
                    .iter()
                    .map(|&(_, idx)| {
                        let mut v = Vec::with_capacity(n);
                        wl_signature(n, k, colors, idx, &mut v);
                        (v, idx)
                    })
                    .collect();
                exact.sort_unstable();
                for i in 0..exact.len() {
                    if i > 0 && exact[i].0 != exact[i - 1].0 {
                        next += 1;
                    }
                    new[exact[i].1] = next;
                }
                next += 1;
            }
            s = e;
        }
    }
    (new, next as usize)
}

/// One further round of the refinement of dimension `c.k()` applied to `c` on `g`.
pub fn one_round(g: &ColoredGraph, c: &TupleColoring) -> Result<TupleColoring, RefineError> {
    if c.n != g.n() {
        return Err(RefineError::VertexCountMismatch { left: g.n(), right: c.n });
    }
    let (colors, num) = match c.k {
        1 => cr_round(&ArcView::of_graph(g), &c.colors, c.num_colors),
        2 | 3 => wl_round(c.n, c.k, &c.colors, c.num_colors),
        k => return Err(RefineError::InvalidDimension(k)),
    };
    Ok(TupleColoring::from_dense(c.k, c.n, colors, num, c.rounds + 1))
}

/// `g` with `w` given a fresh vertex color, as in the individualized input `(G, χ_w)`.
pub fn with_individualized(g: &ColoredGraph, w: usize) -> Result<ColoredGraph, RefineError> {
    if w >= g.n() {
        return Err(RefineError::VertexOutOfRange(w));
    }
    let (ranks, _) = dense_ranks(g.vertex_colors());
    let colors = ranks.iter().enumerate().map(|(v, &r)| 2 * r as u64 + u64::from(v == w)).collect();
    Ok(g.clone().with_vertex_colors(colors).expect("length matches"))
}

/// True iff `c` refines the initial coloring of its dimension on `g` (with
/// `individualized` given a fresh color) and one more round does not split it.
pub fn is_stable(g: &ColoredGraph, c: &TupleColoring, individualized: Option<usize>) -> Result<bool, RefineError> {
    let owned;
    let g = match individualized {
        Some(w) => {
            owned = with_individualized(g, w)?;
            &owned
        }
        None => g,
    };
    if c.n != g.n() {
        return Err(RefineError::VertexCountMismatch { left: g.n(), right: c.n });
    }
    if !refines(c, &wl_initial(g, c.k))? {
        return Ok(false);
    }
    Ok(one_round(g, c)?.num_colors == c.num_colors)
}

/// Restriction of a `k`-tuple coloring to `l`-tuples by padding with the last
/// entry, optionally behind a fixed first entry `prefix`.
pub fn project(c: &TupleColoring, l: usize, prefix: Option<usize>) -> Result<TupleColoring, RefineError> {
    if l == 0 || l > c.k {
        return Err(RefineError::InvalidDimension(l));
    }
    if let Some(w) = prefix {
        if l >= c.k {
            return Err(RefineError::DimensionMismatch { left: l, right: c.k });
        }
        if w >= c.n {
            return Err(RefineError::VertexOutOfRange(w));
        }
    }
    let n = c.n;
    let total = n.pow(l as u32);
    let mut small = vec![0usize; l];
    let mut full = vec![0usize; c.k];
    let mut values = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rest = idx;
        for slot in small.iter_mut().rev() {
            *slot = rest % n;
            rest /= n;
        }
        let mut p = 0;
        if let Some(w) = prefix {
            full[0] = w;
            p = 1;
        }
        for &v in &small {
            full[p] = v;
            p += 1;
        }
        let last = small[l - 1];
        for slot in &mut full[p..] {
            *slot = last;
        }
        values.push(c.color(&full) as u64);
    }
    Ok(TupleColoring::from_values(l, n, &values))
}
