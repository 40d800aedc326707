//! Permutation groups as stabilizer chains, cosets of bijections, and
//! labeling cosets.
//!
//! All products use the right action of [`Permutation::then`]. The chain is
//! built by deterministic Schreier-Sims; the base is an optional prescribed
//! prefix followed by the smallest moved points.

use num_bigint::BigUint;
use num_traits::One;

use crate::error::GroupError;
use crate::perm::Permutation;

#[derive(Clone, Debug)]
struct Level {
    point: usize,
    /// `trans[y]` maps `point` to `y` for every `y` in the basic orbit.
    trans: Vec<Option<Permutation>>,
    orbit: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct PermGroup {
    degree: usize,
    gens: Vec<Permutation>,
    levels: Vec<Level>,
}

fn smallest_moved(p: &Permutation) -> Option<usize> {
    (0..p.degree()).find(|&x| p.apply(x) != x)
}

impl PermGroup {
    pub fn trivial(degree: usize) -> Self {
        PermGroup { degree, gens: Vec::new(), levels: Vec::new() }
    }

    pub fn from_generators(degree: usize, gens: &[Permutation]) -> Result<Self, GroupError> {
        Self::with_base_prefix(degree, gens, &[])
    }

    /// Builds the chain with `prefix` as the first base points (all kept,
    /// even when their basic orbit is trivial).
    pub fn with_base_prefix(degree: usize, gens: &[Permutation], prefix: &[usize]) -> Result<Self, GroupError> {
        if let Some(g) = gens.iter().find(|g| g.degree() != degree) {
            return Err(GroupError::DegreeMismatch { expected: degree, found: g.degree() });
        }
        let mut base: Vec<usize> = Vec::with_capacity(prefix.len());
        for &b in prefix {
            if b >= degree {
                return Err(GroupError::PointOutOfRange(b));
            }
            if !base.contains(&b) {
                base.push(b);
            }
        }
        let mut group = PermGroup {
            degree,
            gens: Vec::new(),
            levels: base.iter().map(|&b| Level { point: b, trans: Vec::new(), orbit: Vec::new() }).collect(),
        };
        for g in gens {
            if !g.is_identity() && !group.gens.contains(g) {
                group.gens.push(g.clone());
            }
        }
        for i in 0..group.gens.len() {
            if group.levels.iter().all(|l| group.gens[i].apply(l.point) == l.point) {
                let p = smallest_moved(&group.gens[i]).expect("non-identity");
                group.levels.push(Level { point: p, trans: Vec::new(), orbit: Vec::new() });
            }
        }
        for l in 0..group.levels.len() {
            group.rebuild_level(l);
        }
        group.schreier_sims();
        Ok(group)
    }

    /// Direct product of the symmetric groups on the given disjoint classes.
    pub fn symmetric_product(degree: usize, classes: &[Vec<usize>]) -> Result<Self, GroupError> {
        let mut gens = Vec::new();
        let mut seen = vec![false; degree];
        for class in classes {
            let mut sorted = class.clone();
            sorted.sort_unstable();
            for &x in &sorted {
                if x >= degree {
                    return Err(GroupError::PointOutOfRange(x));
                }
                if std::mem::replace(&mut seen[x], true) {
                    return Err(GroupError::DuplicatePoint(x));
                }
            }
            for w in sorted.windows(2) {
                gens.push(Permutation::from_cycles(degree, &[&[w[0], w[1]]]).expect("in range"));
            }
        }
        let mut levels = Vec::new();
        for class in classes {
            let mut sorted = class.clone();
            sorted.sort_unstable();
            for (i, &b) in sorted.iter().enumerate().take(sorted.len().saturating_sub(1)) {
                let mut trans = vec![None; degree];
                let mut orbit = Vec::new();
                for &y in &sorted[i..] {
                    let u = if y == b {
                        Permutation::identity(degree)
                    } else {
                        Permutation::from_cycles(degree, &[&[b, y]]).expect("in range")
                    };
                    trans[y] = Some(u);
                    orbit.push(y);
                }
                levels.push(Level { point: b, trans, orbit });
            }
        }
        levels.sort_by_key(|l| l.point);
        // Transpositions (b y) with b < y lie in the stabilizer of all smaller
        // base points, so these levels form a valid chain.
        let mut all_gens = gens;
        for l in &levels {
            for &y in &l.orbit {
                if y != l.point {
                    let t = l.trans[y].clone().expect("orbit point");
                    if !all_gens.contains(&t) {
                        all_gens.push(t);
                    }
                }
            }
        }
        Ok(PermGroup { degree, gens: all_gens, levels })
    }

    fn fixes_prefix(&self, g: &Permutation, upto: usize) -> bool {
        self.levels[..upto].iter().all(|l| g.apply(l.point) == l.point)
    }

    fn rebuild_level(&mut self, l: usize) {
        let point = self.levels[l].point;
        let gens: Vec<&Permutation> = self.gens.iter().filter(|g| self.fixes_prefix(g, l)).collect();
        let mut trans: Vec<Option<Permutation>> = vec![None; self.degree];
        trans[point] = Some(Permutation::identity(self.degree));
        let mut orbit = vec![point];
        let mut i = 0;
        while i < orbit.len() {
            let y = orbit[i];
            i += 1;
            for g in &gens {
                let z = g.apply(y);
                if trans[z].is_none() {
                    trans[z] = Some(trans[y].as_ref().expect("orbit point").then(g));
                    orbit.push(z);
                }
            }
        }
        self.levels[l].trans = trans;
        self.levels[l].orbit = orbit;
    }

    /// Sifts `g` through the levels from `from` on. Returns the residue and the
    /// level where sifting stopped (`levels.len()` if it went through).
    fn strip(&self, mut g: Permutation, from: usize) -> (Permutation, usize) {
        for l in from..self.levels.len() {
            let level = &self.levels[l];
            let beta = g.apply(level.point);
            match &level.trans[beta] {
                Some(u) => g = g.then(&u.inverse()),
                None => return (g, l),
            }
        }
        (g, self.levels.len())
    }

    fn schreier_sims(&mut self) {
        let mut i = self.levels.len() as isize - 1;
        while i >= 0 {
            let l = i as usize;
            let mut jump = None;
            'scan: for yi in 0..self.levels[l].orbit.len() {
                let y = self.levels[l].orbit[yi];
                let gens: Vec<Permutation> =
                    self.gens.iter().filter(|g| self.fixes_prefix(g, l)).cloned().collect();
                for s in &gens {
                    let uy = self.levels[l].trans[y].as_ref().expect("orbit point");
                    let ys = s.apply(y);
                    let uys = self.levels[l].trans[ys].as_ref().expect("orbit closed");
                    let h = uy.then(s).then(&uys.inverse());
                    if h.is_identity() {
                        continue;
                    }
                    let (r, j) = self.strip(h, l + 1);
                    if j < self.levels.len() || !r.is_identity() {
                        if j == self.levels.len() {
                            let p = smallest_moved(&r).expect("non-identity residue");
                            self.levels.push(Level { point: p, trans: Vec::new(), orbit: Vec::new() });
                        }
                        self.gens.push(r);
                        for m in l + 1..=j {
                            self.rebuild_level(m);
                        }
                        jump = Some(j);
                        break 'scan;
                    }
                }
            }
            match jump {
                Some(j) => i = j as isize,
                None => i -= 1,
            }
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn base(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.point).collect()
    }

    /// The strong generating set.
    pub fn generators(&self) -> &[Permutation] {
        &self.gens
    }

    pub fn order(&self) -> BigUint {
        self.levels.iter().fold(BigUint::one(), |acc, l| acc * BigUint::from(l.orbit.len()))
    }

    pub fn is_trivial(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn contains(&self, p: &Permutation) -> Result<bool, GroupError> {
        if p.degree() != self.degree {
            return Err(GroupError::DegreeMismatch { expected: self.degree, found: p.degree() });
        }
        let (r, j) = self.strip(p.clone(), 0);
        Ok(j == self.levels.len() && r.is_identity())
    }

    /// Orbit partition, each orbit ascending, orbits ordered by minimum.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.degree).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for g in &self.gens {
            for x in 0..self.degree {
                let (a, b) = (find(&mut parent, x), find(&mut parent, g.apply(x)));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut out: Vec<Vec<usize>> = Vec::new();
        let mut index = vec![usize::MAX; self.degree];
        for x in 0..self.degree {
            let r = find(&mut parent, x);
            if index[r] == usize::MAX {
                index[r] = out.len();
                out.push(Vec::new());
            }
            out[index[r]].push(x);
        }
        out
    }

    /// Per point, the index of its orbit in [`PermGroup::orbits`].
    pub fn orbit_index(&self) -> Vec<usize> {
        let mut idx = vec![0; self.degree];
        for (i, orbit) in self.orbits().iter().enumerate() {
            for &x in orbit {
                idx[x] = i;
            }
        }
        idx
    }

    /// `Γ_(A)`, the elements fixing every point of `a`.
    pub fn pointwise_stabilizer(&self, a: &[usize]) -> Result<PermGroup, GroupError> {
        let chain = PermGroup::with_base_prefix(self.degree, &self.gens, a)?;
        let k = a.iter().collect::<std::collections::BTreeSet<_>>().len();
        let gens: Vec<Permutation> = chain.gens.iter().filter(|g| chain.fixes_prefix(g, k)).cloned().collect();
        PermGroup::from_generators(self.degree, &gens)
    }

    /// Some element mapping the `i`-th base point to `images[i]` for every
    /// `i < images.len()`, if one exists.
    pub fn element_with_base_images(&self, images: &[usize]) -> Option<Permutation> {
        if images.len() > self.levels.len() {
            return None;
        }
        let mut acc = Permutation::identity(self.degree);
        for (l, &t) in images.iter().enumerate() {
            let y = acc.inverse().apply(t);
            let u = self.levels[l].trans[y].as_ref()?;
            acc = u.then(&acc);
        }
        Some(acc)
    }

    pub(crate) fn transversal(&self, l: usize, y: usize) -> Option<&Permutation> {
        self.levels[l].trans.get(y).and_then(Option::as_ref)
    }

    /// Same set of permutations.
    pub fn same_group(&self, other: &PermGroup) -> bool {
        self.degree == other.degree
            && self.order() == other.order()
            && other.gens.iter().all(|g| self.contains(g).unwrap_or(false))
    }

    /// `ρ⁻¹ Γ ρ` for a permutation `ρ` of the same degree.
    pub fn conjugate(&self, rho: &Permutation) -> PermGroup {
        let inv = rho.inverse();
        let gens: Vec<Permutation> = self.gens.iter().map(|g| inv.then(g).then(rho)).collect();
        PermGroup::from_generators(self.degree, &gens).expect("degrees agree")
    }

    /// Every element, for small groups only.
    pub fn elements(&self) -> Vec<Permutation> {
        let mut out = vec![Permutation::identity(self.degree)];
        for level in self.levels.iter().rev() {
            let mut next = Vec::with_capacity(out.len() * level.orbit.len());
            for g in &out {
                for &y in &level.orbit {
                    next.push(g.then(level.trans[y].as_ref().expect("orbit point")));
                }
            }
            out = next;
        }
        out.sort();
        out
    }
}

/// The set `Γρ = {γρ | γ ∈ Γ}` of bijections from `{0..n-1}` onto `{0..n-1}`,
/// or the empty set.
#[derive(Clone, Debug)]
pub struct Coset {
    group: PermGroup,
    rep: Option<Permutation>,
}

impl Coset {
    pub fn empty(degree: usize) -> Self {
        Coset { group: PermGroup::trivial(degree), rep: None }
    }

    pub fn single(rep: Permutation) -> Self {
        Coset { group: PermGroup::trivial(rep.degree()), rep: Some(rep) }
    }

    pub fn new(group: PermGroup, rep: Permutation) -> Result<Self, GroupError> {
        if rep.degree() != group.degree() {
            return Err(GroupError::DegreeMismatch { expected: group.degree(), found: rep.degree() });
        }
        Ok(Coset { group, rep: Some(rep) })
    }

    pub fn of_group(group: PermGroup) -> Self {
        let rep = Permutation::identity(group.degree());
        Coset { group, rep: Some(rep) }
    }

    pub fn degree(&self) -> usize {
        self.group.degree()
    }

    pub fn is_empty(&self) -> bool {
        self.rep.is_none()
    }

    pub fn group(&self) -> &PermGroup {
        &self.group
    }

    pub fn representative(&self) -> Option<&Permutation> {
        self.rep.as_ref()
    }

    pub fn contains(&self, p: &Permutation) -> Result<bool, GroupError> {
        match &self.rep {
            None => Ok(false),
            Some(r) => {
                if p.degree() != r.degree() {
                    return Err(GroupError::DegreeMismatch { expected: r.degree(), found: p.degree() });
                }
                self.group.contains(&p.then(&r.inverse()))
            }
        }
    }

    /// Number of elements; zero for the empty coset.
    pub fn size(&self) -> BigUint {
        if self.rep.is_some() { self.group.order() } else { BigUint::default() }
    }

    pub fn same_set(&self, other: &Coset) -> bool {
        match (&self.rep, &other.rep) {
            (None, None) => self.degree() == other.degree(),
            (Some(_), Some(r)) => self.group.same_group(&other.group) && self.contains(r).unwrap_or(false),
            _ => false,
        }
    }

    /// `(Γρ)⁻¹ = (ρ⁻¹Γρ)ρ⁻¹`.
    pub fn inverse(&self) -> Coset {
        match &self.rep {
            None => self.clone(),
            Some(r) => Coset { group: self.group.conjugate(r), rep: Some(r.inverse()) },
        }
    }

    /// The induced coset on an invariant set `a`.
    pub fn restrict(&self, a: &[usize]) -> Result<SubsetCoset, GroupError> {
        let n = self.degree();
        let mut domain = a.to_vec();
        domain.sort_unstable();
        domain.dedup();
        if let Some(&x) = domain.iter().find(|&&x| x >= n) {
            return Err(GroupError::PointOutOfRange(x));
        }
        let mut local = vec![usize::MAX; n];
        for (i, &x) in domain.iter().enumerate() {
            local[x] = i;
        }
        let mut gens = Vec::new();
        for g in self.group.generators() {
            let images: Option<Vec<usize>> = domain
                .iter()
                .map(|&x| Some(local[g.apply(x)]).filter(|&i| i != usize::MAX))
                .collect();
            let images = images.ok_or(GroupError::NotInvariant)?;
            gens.push(Permutation::from_images_unchecked(images));
        }
        let group = PermGroup::from_generators(domain.len(), &gens)?;
        let Some(rep) = &self.rep else {
            return Ok(SubsetCoset { codomain: domain.clone(), domain, coset: Coset::empty(group.degree()) });
        };
        let mut codomain: Vec<usize> = domain.iter().map(|&x| rep.apply(x)).collect();
        codomain.sort_unstable();
        let rep_local: Vec<usize> = domain
            .iter()
            .map(|&x| codomain.binary_search(&rep.apply(x)).expect("image present"))
            .collect();
        let coset = Coset::new(group, Permutation::from_images_unchecked(rep_local))?;
        Ok(SubsetCoset { domain, codomain, coset })
    }
}

/// Accumulates cosets that are known to lie in one common coset; the result
/// is the coset they generate.
#[derive(Clone, Debug)]
pub struct CosetUnion {
    degree: usize,
    gens: Vec<Permutation>,
    rep: Option<Permutation>,
}

impl CosetUnion {
    pub fn new(degree: usize) -> Self {
        CosetUnion { degree, gens: Vec::new(), rep: None }
    }

    pub fn add(&mut self, c: &Coset) {
        let Some(r) = c.representative() else { return };
        self.gens.extend(c.group().generators().iter().cloned());
        match &self.rep {
            None => self.rep = Some(r.clone()),
            Some(base) => {
                let g = r.then(&base.inverse());
                if !g.is_identity() {
                    self.gens.push(g);
                }
            }
        }
    }

    pub fn finish(self) -> Coset {
        match self.rep {
            None => Coset::empty(self.degree),
            Some(rep) => {
                let group = PermGroup::from_generators(self.degree, &self.gens).expect("degrees agree");
                Coset { group, rep: Some(rep) }
            }
        }
    }
}

/// A coset of bijections from `domain` onto `codomain`, stored on local
/// indices: local `i` stands for `domain[i]` on the left and `codomain[i]` on the right.
#[derive(Clone, Debug)]
pub struct SubsetCoset {
    pub domain: Vec<usize>,
    pub codomain: Vec<usize>,
    pub coset: Coset,
}

impl SubsetCoset {
    pub fn is_empty(&self) -> bool {
        self.coset.is_empty()
    }

    /// Membership of the map `domain[i] ↦ image(domain[i])`.
    pub fn contains_map(&self, image: impl Fn(usize) -> usize) -> bool {
        let local: Option<Vec<usize>> = self
            .domain
            .iter()
            .map(|&x| self.codomain.binary_search(&image(x)).ok())
            .collect();
        match local.and_then(Permutation::from_images) {
            Some(p) => self.coset.contains(&p).unwrap_or(false),
            None => false,
        }
    }
}

/// A labeling coset `ρΘ`: bijections from `domain` onto labels `0..k` of the
/// form `v ↦ θ(ρ(v))` with `θ ∈ Θ`.
#[derive(Clone, Debug)]
pub struct LabelingCoset {
    domain: Vec<usize>,
    /// `rho[i]` is the label of `domain[i]`.
    rho: Permutation,
    theta: PermGroup,
}

impl LabelingCoset {
    /// `labels[i]` is the label of `domain[i]`; `domain` need not be sorted.
    pub fn new(domain: &[usize], labels: &[usize], theta: PermGroup) -> Result<Self, GroupError> {
        let k = domain.len();
        if labels.len() != k {
            return Err(GroupError::DegreeMismatch { expected: k, found: labels.len() });
        }
        if theta.degree() != k {
            return Err(GroupError::DegreeMismatch { expected: k, found: theta.degree() });
        }
        let mut pairs: Vec<(usize, usize)> = domain.iter().copied().zip(labels.iter().copied()).collect();
        pairs.sort_unstable();
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(GroupError::DuplicatePoint(w[0].0));
        }
        let rho = Permutation::from_images(pairs.iter().map(|p| p.1).collect())
            .ok_or(GroupError::BadLabels(k))?;
        Ok(LabelingCoset { domain: pairs.into_iter().map(|p| p.0).collect(), rho, theta })
    }

    /// The single labeling `domain[i] ↦ labels[i]`.
    pub fn fixed(domain: &[usize], labels: &[usize]) -> Result<Self, GroupError> {
        Self::new(domain, labels, PermGroup::trivial(domain.len()))
    }

    pub fn domain(&self) -> &[usize] {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    pub fn theta(&self) -> &PermGroup {
        &self.theta
    }

    pub fn label_of(&self, v: usize) -> Option<usize> {
        self.domain.binary_search(&v).ok().map(|i| self.rho.apply(i))
    }

    /// Whether the labeling `v ↦ label(v)` on `domain` belongs to the coset.
    pub fn contains_labeling(&self, label: impl Fn(usize) -> usize) -> bool {
        let images: Vec<usize> = (0..self.len()).map(|i| label(self.domain[i])).collect();
        let Some(target) = Permutation::from_images(images) else { return false };
        // target = ρθ for some θ ∈ Θ  ⟺  ρ⁻¹·target ∈ Θ
        self.theta.contains(&self.rho.inverse().then(&target)).unwrap_or(false)
    }

    /// `φ⁻¹ρΘ`: the labeling coset of `φ(domain)` with `φ(v) ↦ θ(ρ(v))`.
    pub fn transport(&self, phi: impl Fn(usize) -> usize) -> LabelingCoset {
        let images: Vec<usize> = self.domain.iter().map(|&v| phi(v)).collect();
        let labels: Vec<usize> = (0..self.len()).map(|i| self.rho.apply(i)).collect();
        LabelingCoset::new(&images, &labels, self.theta.clone()).expect("phi is injective on the domain")
    }

    /// Equality as sets of labelings.
    pub fn same_set(&self, other: &LabelingCoset) -> bool {
        self.domain == other.domain
            && self.theta.same_group(&other.theta)
            && self.theta.contains(&self.rho.inverse().then(&other.rho)).unwrap_or(false)
    }

    /// Orbit of the label of `v` under `Θ`, numbered by orbit minimum.
    pub fn label_orbit_of(&self, v: usize, orbit_index: &[usize]) -> Option<usize> {
        self.label_of(v).map(|l| orbit_index[l])
    }

    /// Every labeling in the coset as `(vertex, label)` lists; small `Θ` only.
    pub fn labelings(&self) -> Vec<Vec<(usize, usize)>> {
        self.theta
            .elements()
            .iter()
            .map(|th| (0..self.len()).map(|i| (self.domain[i], th.apply(self.rho.apply(i)))).collect())
            .collect()
    }
}
