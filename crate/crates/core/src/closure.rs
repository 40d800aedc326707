//! Bounded closures: Color Refinement interleaved with splitting every color
//! class of size at most `t`, the closure graph, and the initial-set finder.

use crate::error::{ClosureError, RefineError};
use crate::graph::ColoredGraph;
use crate::refine::{self, cr_refine_in_place, dense_ranks, ArcView, TupleColoring, WlOptions};

/// `144 * a_deg^2 * h^5`, saturating at `u64::MAX`.
pub fn t_of_h(h: usize, a_deg: u64) -> u64 {
    let v = (a_deg as u128)
        .checked_pow(2)
        .and_then(|a| (h as u128).checked_pow(5).and_then(|h5| a.checked_mul(h5)))
        .and_then(|x| x.checked_mul(144));
    v.and_then(|v| u64::try_from(v).ok()).unwrap_or(u64::MAX)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClosureParams {
    /// Order of the excluded topological clique.
    pub h: usize,
    /// Average-degree constant entering the default threshold.
    pub a_deg: u64,
    /// Explicit threshold replacing the default `t_of_h(h, a_deg)`.
    pub override_t: Option<u64>,
    /// Check `X ⊆ cl(v)` for every `v ∈ X` instead of one vertex per color.
    pub exhaustive_check: bool,
    /// Dimension of the pair coloring used by the initial-set finder. 3 is the
    /// default; 2 is a heuristic kept for experiments.
    pub wl_dim: usize,
    pub wl: WlOptions,
}

impl ClosureParams {
    pub fn new(h: usize) -> Self {
        ClosureParams { h, a_deg: 2, override_t: None, exhaustive_check: false, wl_dim: 3, wl: WlOptions::default() }
    }

    pub fn with_t(mut self, t: u64) -> Self {
        self.override_t = Some(t);
        self
    }

    pub fn t(&self) -> u64 {
        self.override_t.unwrap_or_else(|| t_of_h(self.h, self.a_deg)).max(1)
    }
}

/// Runs the bounded refinement on `view` from dense `base` colors with
/// `individualized` given distinct fresh colors. Returns the stable coloring.
pub(crate) fn tcr_on_view(view: &ArcView, base: &[u32], t: u64, individualized: &[usize]) -> Vec<u32> {
    let n = base.len();
    let mut flagged = vec![false; n];
    for &v in individualized {
        flagged[v] = true;
    }
    // Key (0, c) for ordinary vertices, (1, v) for split ones.
    let keys: Vec<u64> = (0..n)
        .map(|v| if flagged[v] { (1u64 << 40) | v as u64 } else { base[v] as u64 })
        .collect();
    let (mut colors, _) = dense_ranks(&keys);
    loop {
        let (num, _) = cr_refine_in_place(view, &mut colors);
        let mut size = vec![0u64; num];
        for &c in &colors {
            size[c as usize] += 1;
        }
        if !size.iter().any(|&s| s > 1 && s <= t) {
            return colors;
        }
        let keys: Vec<u64> = (0..n)
            .map(|v| {
                let c = colors[v];
                if size[c as usize] <= t { (1u64 << 40) | v as u64 } else { c as u64 }
            })
            .collect();
        colors = dense_ranks(&keys).0;
    }
}

fn check_vertices(n: usize, set: &[usize]) -> Result<(), ClosureError> {
    match set.iter().find(|&&v| v >= n) {
        Some(&v) => Err(ClosureError::VertexOutOfRange(v)),
        None => Ok(()),
    }
}

fn singletons(colors: &[u32]) -> Vec<usize> {
    let num = colors.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    let mut size = vec![0usize; num];
    for &c in colors {
        size[c as usize] += 1;
    }
    (0..colors.len()).filter(|&v| size[colors[v] as usize] == 1).collect()
}

/// The stable coloring of bounded refinement on `g` after individualizing `individualized`.
pub fn tcr_stable(g: &ColoredGraph, t: u64, individualized: &[usize]) -> Result<TupleColoring, ClosureError> {
    check_vertices(g.n(), individualized)?;
    let (base, _) = dense_ranks(g.vertex_colors());
    let colors = tcr_on_view(&ArcView::of_graph(g), &base, t.max(1), individualized);
    let num = colors.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    Ok(TupleColoring::from_dense(1, g.n(), colors, num, 0))
}

/// `cl_t(X)` over the vertex- and arc-colored graph `g`, ascending.
pub fn closure_of(g: &ColoredGraph, t: u64, x: &[usize]) -> Result<Vec<usize>, ClosureError> {
    Ok(singletons(tcr_stable(g, t, x)?.colors()))
}

/// Closure over a pair-colored graph, evaluated on the complete graph whose
/// vertex colors are `chi(v, v)` and whose arcs carry `(adjacent?, chi(v, w))`.
pub struct PairClosure {
    view: ArcView,
    base: Vec<u32>,
}

impl PairClosure {
    pub fn new(g: &ColoredGraph, chi: &TupleColoring) -> Result<Self, ClosureError> {
        let n = g.n();
        if chi.k() != 2 || chi.n() != n {
            return Err(ClosureError::BadPairColoring { expected: n });
        }
        let view = ArcView::complete(n, |v, w| 2 * chi.color(&[v, w]) + u32::from(g.has_edge(v, w)));
        let diag: Vec<u64> = (0..n).map(|v| chi.color(&[v, v]) as u64).collect();
        Ok(PairClosure { view, base: dense_ranks(&diag).0 })
    }

    pub fn n(&self) -> usize {
        self.base.len()
    }

    pub fn closure(&self, t: u64, x: &[usize]) -> Result<Vec<usize>, ClosureError> {
        check_vertices(self.n(), x)?;
        Ok(singletons(&tcr_on_view(&self.view, &self.base, t.max(1), x)))
    }
}

pub fn closure_pair(g: &ColoredGraph, chi: &TupleColoring, t: u64, x: &[usize]) -> Result<Vec<usize>, ClosureError> {
    PairClosure::new(g, chi)?.closure(t, x)
}

/// Digraph with an arc `(v, w)` whenever `w ∈ cl_t(v)` and `v != w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureGraph {
    pub n: usize,
    /// `out[v]` is `cl_t(v) \ {v}`, ascending.
    pub out: Vec<Vec<usize>>,
    /// Strongly connected component id per vertex, numbered by minimum vertex.
    pub scc: Vec<usize>,
    /// Vertices lying in a strongly connected component without outgoing arcs.
    pub maximal: Vec<bool>,
}

impl ClosureGraph {
    pub fn has_edge(&self, v: usize, w: usize) -> bool {
        self.out[v].binary_search(&w).is_ok()
    }

    pub fn components(&self) -> Vec<Vec<usize>> {
        let count = self.scc.iter().map(|&c| c + 1).max().unwrap_or(0);
        let mut out = vec![Vec::new(); count];
        for v in 0..self.n {
            out[self.scc[v]].push(v);
        }
        out
    }

    /// Every pair of arcs `(u, v), (v, w)` with `u != w` is closed by `(u, w)`.
    pub fn is_transitive(&self) -> bool {
        (0..self.n).all(|u| {
            self.out[u]
                .iter()
                .all(|&v| self.out[v].iter().all(|&w| w == u || self.has_edge(u, w)))
        })
    }
}

pub fn closure_graph(g: &ColoredGraph, chi: &TupleColoring, t: u64) -> Result<ClosureGraph, ClosureError> {
    let pc = PairClosure::new(g, chi)?;
    let n = g.n();
    let mut out = Vec::with_capacity(n);
    for v in 0..n {
        let mut cl = pc.closure(t, &[v])?;
        cl.retain(|&w| w != v);
        out.push(cl);
    }
    Ok(closure_graph_from_out(n, out))
}

/// Components and maximality for an arbitrary out-neighbourhood list, using
/// mutual reachability (Kosaraju).
pub(crate) fn closure_graph_from_out(n: usize, out: Vec<Vec<usize>>) -> ClosureGraph {
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut stack = vec![(s, 0usize)];
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            if *i < out[v].len() {
                let w = out[v][*i];
                *i += 1;
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
                stack.pop();
            }
        }
    }
    let mut rev = vec![Vec::new(); n];
    for (v, targets) in out.iter().enumerate() {
        for &w in targets {
            rev[w].push(v);
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut raw = 0;
    for &s in order.iter().rev() {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = raw;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &w in &rev[v] {
                if comp[w] == usize::MAX {
                    comp[w] = raw;
                    stack.push(w);
                }
            }
        }
        raw += 1;
    }
    // Renumber by minimum vertex.
    let mut rename = vec![usize::MAX; raw];
    let mut next = 0;
    for v in 0..n {
        if rename[comp[v]] == usize::MAX {
            rename[comp[v]] = next;
            next += 1;
        }
    }
    let scc: Vec<usize> = comp.iter().map(|&c| rename[c]).collect();
    let mut sink = vec![true; next];
    for v in 0..n {
        if out[v].iter().any(|&w| scc[w] != scc[v]) {
            sink[scc[v]] = false;
        }
    }
    let maximal = (0..n).map(|v| sink[scc[v]]).collect();
    ClosureGraph { n, out, scc, maximal }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InitialSetResult {
    Found {
        /// Pair coloring `(v, w) ↦ WL(v, w, w)`.
        chi: TupleColoring,
        /// `{v | chi(v, v) = c0}`, ascending.
        x: Vec<usize>,
        c0: u32,
    },
    /// No diagonal color passes the closure test, so `g` contains a
    /// subdivision of `K_h`.
    Detected,
}

impl InitialSetResult {
    pub fn is_detected(&self) -> bool {
        matches!(self, InitialSetResult::Detected)
    }
}

/// Scans the diagonal colors of the pair coloring in ascending order and
/// returns the first color class `X` with `X ⊆ cl_t(v)` for the vertices `v ∈ X`.
pub fn find_initial_set(g: &ColoredGraph, params: &ClosureParams) -> Result<InitialSetResult, ClosureError> {
    if !g.is_connected() {
        return Err(ClosureError::Disconnected);
    }
    let chi = match params.wl_dim {
        3 => refine::project(&refine::wl_with(g, 3, &params.wl)?, 2, None)?,
        2 => refine::wl_with(g, 2, &params.wl)?,
        d => return Err(RefineError::InvalidDimension(d).into()),
    };
    let n = g.n();
    let mut by_color: std::collections::BTreeMap<u32, Vec<usize>> = std::collections::BTreeMap::new();
    for v in 0..n {
        by_color.entry(chi.color(&[v, v])).or_default().push(v);
    }
    let pc = PairClosure::new(g, &chi)?;
    let t = params.t();
    for (&c, x) in &by_color {
        let probes: &[usize] = if params.exhaustive_check { x } else { &x[..1] };
        let mut ok = true;
        for &v in probes {
            let cl = pc.closure(t, &[v])?;
            if !x.iter().all(|w| cl.binary_search(w).is_ok()) {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(InitialSetResult::Found { chi, x: x.clone(), c0: c });
        }
    }
    Ok(InitialSetResult::Detected)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparatorReport {
    pub ok: bool,
    /// Per component of `G - D`: its vertices and `|N(Z)|`.
    pub components: Vec<(Vec<usize>, usize)>,
    /// Indices into `components` whose boundary has size at least `h`.
    pub violations: Vec<usize>,
}

pub fn check_separator_bound(g: &ColoredGraph, d: &[usize], h: usize) -> Result<SeparatorReport, ClosureError> {
    check_vertices(g.n(), d)?;
    let mut removed = vec![false; g.n()];
    for &v in d {
        removed[v] = true;
    }
    let mut components = Vec::new();
    let mut violations = Vec::new();
    for z in g.components_avoiding(&removed) {
        let (boundary, _) = g.neighborhood(&z).expect("in range");
        if boundary.len() >= h {
            violations.push(components.len());
        }
        components.push((z, boundary.len()));
    }
    Ok(SeparatorReport { ok: violations.is_empty(), components, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, Family};

    fn fam(text: &str) -> ColoredGraph {
        generate(&Family::parse(text).unwrap(), 0).unwrap()
    }

    #[test]
    fn threshold_formula() {
        assert_eq!(t_of_h(5, 2), 1_800_000);
        assert_eq!(ClosureParams::new(5).t(), 1_800_000);
        assert_eq!(ClosureParams::new(5).with_t(3).t(), 3);
        assert_eq!(t_of_h(usize::MAX, u64::MAX), u64::MAX);
    }

    #[test]
    fn bounded_refinement_examples() {
        assert_eq!(tcr_stable(&fam("cycle(6)"), 1, &[]).unwrap().num_colors(), 1);
        assert!(tcr_stable(&fam("clique(2)"), 2, &[]).unwrap().is_discrete());
        assert!(tcr_stable(&fam("star(5)"), 5, &[]).unwrap().is_discrete());
        assert!(!tcr_stable(&fam("star(5)"), 4, &[]).unwrap().is_discrete());
    }

    #[test]
    fn closures_on_the_cycle() {
        let c6 = fam("cycle(6)");
        assert_eq!(closure_of(&c6, 2, &[0]).unwrap(), (0..6).collect::<Vec<_>>());
        // Refinement alone separates the antipode; its neighbours stay paired.
        assert_eq!(closure_of(&c6, 1, &[0]).unwrap(), vec![0, 3]);
        assert_eq!(closure_of(&c6, 1, &[0, 1, 2, 3, 4, 5]).unwrap().len(), 6);
        assert!(closure_of(&c6, 1, &[9]).is_err());
    }

    #[test]
    fn pair_closure_examples() {
        let empty = ColoredGraph::empty(5);
        let constant = TupleColoring::from_values(2, 5, &[0; 25]);
        assert_eq!(closure_pair(&empty, &constant, 3, &[1]).unwrap(), vec![1]);
        let c6 = fam("cycle(6)");
        let chi = refine::wl(&c6, 2).unwrap();
        assert_eq!(closure_pair(&c6, &chi, 2, &[0]).unwrap(), closure_of(&c6, 2, &[0]).unwrap());
        assert!(closure_pair(&c6, &chi, 2, &[]).unwrap().is_empty());
    }

    #[test]
    fn closure_graph_of_c6() {
        let c6 = fam("cycle(6)");
        let chi = refine::project(&refine::wl(&c6, 3).unwrap(), 2, None).unwrap();
        let full = closure_graph(&c6, &chi, 2).unwrap();
        assert!(full.out.iter().all(|o| o.len() == 5));
        assert_eq!(full.components().len(), 1);
        assert!(full.maximal.iter().all(|&m| m));
        let antipodal = closure_graph(&c6, &chi, 1).unwrap();
        assert!((0..6).all(|v| antipodal.out[v] == vec![(v + 3) % 6]));
        assert_eq!(antipodal.components(), vec![vec![0, 3], vec![1, 4], vec![2, 5]]);
        assert!(antipodal.maximal.iter().all(|&m| m));
        let p3 = fam("path(3)");
        let chi = refine::project(&refine::wl(&p3, 3).unwrap(), 2, None).unwrap();
        let none = closure_graph(&p3, &chi, 1).unwrap();
        assert_eq!(none.out, vec![vec![1, 2], vec![], vec![0, 1]]);
        assert_eq!(none.components(), vec![vec![0, 2], vec![1]]);
        assert_eq!(none.maximal, vec![false, true, false]);
        assert!(full.is_transitive() && antipodal.is_transitive() && none.is_transitive());
    }

    #[test]
    fn initial_set_examples() {
        let params = ClosureParams::new(5).with_t(2);
        match find_initial_set(&fam("cycle(6)"), &params).unwrap() {
            InitialSetResult::Found { x, .. } => assert_eq!(x, (0..6).collect::<Vec<_>>()),
            InitialSetResult::Detected => panic!("cycle must not be detected"),
        }
        match find_initial_set(&fam("clique(5)"), &ClosureParams::new(5).with_t(4)).unwrap() {
            InitialSetResult::Found { x, .. } => assert_eq!(x.len(), 5),
            InitialSetResult::Detected => panic!("clique closes from one vertex once t >= n - 1"),
        }
        // With t = 1 the other four vertices of K5 stay in one class.
        assert!(find_initial_set(&fam("clique(5)"), &ClosureParams::new(5).with_t(1)).unwrap().is_detected());
        assert!(matches!(
            find_initial_set(&fam("disjoint_union(path(2),path(2))"), &params),
            Err(ClosureError::Disconnected)
        ));
    }

    #[test]
    fn separator_report() {
        let p5 = fam("path(5)");
        let r = check_separator_bound(&p5, &[2], 2).unwrap();
        assert!(r.ok);
        assert_eq!(r.components.len(), 2);
        assert!(r.components.iter().all(|(_, b)| *b == 1));
        let all = check_separator_bound(&p5, &[0, 1, 2, 3, 4], 2).unwrap();
        assert!(all.ok && all.components.is_empty());
        let star = fam("star(4)");
        let r = check_separator_bound(&star, &[1, 2, 3, 4], 2).unwrap();
        assert!(!r.ok && r.violations == vec![0]);
    }
}
