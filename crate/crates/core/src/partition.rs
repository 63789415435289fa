//! Binary filtrations of `[0,1]^d` (geometric mode) or of an abstract
//! probability space (abstract mode), together with chains and rings.
//!
//! Split `k` (1-based) turns a leaf into two atoms with ids `2k-1` (the small
//! child) and `2k` (the large child); the root is atom `0`. Measures and
//! coordinates are kept as exact rationals, with `f64` views and natural logs
//! precomputed for the numerical code. Logs stay accurate when measures
//! underflow `f64`.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::math;

pub type AtomId = usize;

#[derive(Clone, Debug, PartialEq)]
pub struct Rect {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Rect {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        Rect { lo, hi }
    }

    pub fn unit(d: usize) -> Self {
        Rect { lo: vec![0.0; d], hi: vec![1.0; d] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn measure(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    /// Half-open membership `lo <= x < hi`, closed at the upper face of the unit cube.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(x)
            .all(|((&a, &b), &v)| v >= a && (v < b || (b == 1.0 && v == 1.0)))
    }

    /// Local coordinates of `x` in this box.
    pub fn to_local(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(self.lo.iter().zip(&self.hi)).map(|(&v, (&a, &b))| (v - a) / (b - a)).collect()
    }

    /// The box `other` expressed in local coordinates of `self`.
    pub fn relative(&self, other: &Rect) -> Rect {
        Rect { lo: self.to_local(&other.lo), hi: self.to_local(&other.hi) }
    }

    /// The sub-box with local coordinates `rel`.
    pub fn compose(&self, rel: &Rect) -> Rect {
        let d = self.dim();
        let mut lo = Vec::with_capacity(d);
        let mut hi = Vec::with_capacity(d);
        for s in 0..d {
            let w = self.hi[s] - self.lo[s];
            lo.push(self.lo[s] + w * rel.lo[s]);
            hi.push(self.lo[s] + w * rel.hi[s]);
        }
        Rect { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(a, b)| b <= a)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactRect {
    pub lo: Vec<Rational>,
    pub hi: Vec<Rational>,
}

impl ExactRect {
    pub fn unit(d: usize) -> Self {
        ExactRect { lo: vec![Rational::zero(); d], hi: vec![Rational::one(); d] }
    }

    pub fn to_f64(&self) -> Rect {
        Rect {
            lo: self.lo.iter().map(exact::to_f64).collect(),
            hi: self.hi.iter().map(exact::to_f64).collect(),
        }
    }

    pub fn side(&self, axis: usize) -> Rational {
        &self.hi[axis] - &self.lo[axis]
    }

    pub fn measure(&self) -> Rational {
        (0..self.lo.len()).fold(Rational::one(), |acc, s| acc * self.side(s))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Geometric,
    Abstract,
}

/// Position of a child along the split axis (geometric mode) or in the listed
/// order of the split pieces (abstract mode).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Clone, Debug)]
pub struct Atom {
    pub id: AtomId,
    pub parent: Option<AtomId>,
    /// `(small, large)` once split.
    pub children: Option<(AtomId, AtomId)>,
    pub depth: usize,
    /// Index of the split that created this atom (0 for the root).
    pub born: usize,
    /// Index of the split that divided this atom.
    pub split_index: Option<usize>,
    pub measure: Rational,
    pub measure_f64: f64,
    pub log_measure: f64,
    pub rect: Option<ExactRect>,
    pub rect_f64: Option<Rect>,
    pub log_sides: Vec<f64>,
    /// Placement inside the parent in the parent's local coordinates.
    pub rel: Option<Rect>,
    pub side: Option<Side>,
}

#[derive(Clone, Debug)]
pub enum SplitSpec {
    Cut { atom: AtomId, axis: usize, at: Rational },
    Fraction { atom: AtomId, t: Rational },
}

impl SplitSpec {
    pub fn cut(atom: AtomId, axis: usize, at: f64) -> Self {
        SplitSpec::Cut { atom, axis, at: exact::from_f64(at).unwrap_or_else(Rational::zero) }
    }

    pub fn fraction(atom: AtomId, t: f64) -> Self {
        SplitSpec::Fraction { atom, t: exact::from_f64(t).unwrap_or_else(Rational::zero) }
    }

    pub fn atom(&self) -> AtomId {
        match self {
            SplitSpec::Cut { atom, .. } | SplitSpec::Fraction { atom, .. } => *atom,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SplitRecord {
    pub index: usize,
    pub spec: SplitSpec,
    pub small: AtomId,
    pub large: AtomId,
}

impl SplitRecord {
    pub fn atom(&self) -> AtomId {
        self.spec.atom()
    }

    pub fn axis(&self) -> Option<usize> {
        match self.spec {
            SplitSpec::Cut { axis, .. } => Some(axis),
            SplitSpec::Fraction { .. } => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Filtration {
    dim: usize,
    mode: Mode,
    atoms: Vec<Atom>,
    splits: Vec<SplitRecord>,
}

/// Parent, buddy and child-role of a non-root atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Relatives {
    pub parent: AtomId,
    pub buddy: AtomId,
    pub is_small: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    pub ids: Vec<AtomId>,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn top(&self) -> AtomId {
        self.ids[0]
    }

    pub fn bottom(&self) -> AtomId {
        *self.ids.last().expect("empty chain")
    }
}

/// `R = outer \ inner` with `inner` a strict descendant of `outer`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ring {
    pub outer: AtomId,
    pub inner: AtomId,
}

/// Gap lengths `|R_-^s|`, `|R_+^s|` of a ring along one axis, with `|I^s|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisGaps {
    pub minus: f64,
    pub plus: f64,
    pub outer: f64,
    pub log_minus: f64,
    pub log_plus: f64,
    pub log_outer: f64,
}

impl Filtration {
    pub fn new_geometric(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        let root = Atom {
            id: 0,
            parent: None,
            children: None,
            depth: 0,
            born: 0,
            split_index: None,
            measure: Rational::one(),
            measure_f64: 1.0,
            log_measure: 0.0,
            rect: Some(ExactRect::unit(dim)),
            rect_f64: Some(Rect::unit(dim)),
            log_sides: vec![0.0; dim],
            rel: None,
            side: None,
        };
        Filtration { dim, mode: Mode::Geometric, atoms: vec![root], splits: Vec::new() }
    }

    pub fn new_abstract() -> Self {
        let mut f = Filtration::new_geometric(1);
        f.mode = Mode::Abstract;
        f.atoms[0].rect = None;
        f.atoms[0].rect_f64 = None;
        f.atoms[0].log_sides.clear();
        f
    }

    pub fn from_splits(mode: Mode, dim: usize, specs: &[SplitSpec]) -> Result<Self> {
        let mut f = match mode {
            Mode::Geometric => Filtration::new_geometric(dim),
            Mode::Abstract => Filtration::new_abstract(),
        };
        for s in specs {
            f.apply_split(s.clone())?;
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn is_geometric(&self) -> bool {
        self.mode == Mode::Geometric
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, id: AtomId) -> Result<&Atom> {
        self.atoms.get(id).ok_or(Error::UnknownAtom(id))
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn splits(&self) -> &[SplitRecord] {
        &self.splits
    }

    pub fn num_splits(&self) -> usize {
        self.splits.len()
    }

    /// The split with 1-based index `k`.
    pub fn split(&self, k: usize) -> &SplitRecord {
        &self.splits[k - 1]
    }

    pub fn measure(&self, id: AtomId) -> f64 {
        self.atoms[id].measure_f64
    }

    pub fn log_measure(&self, id: AtomId) -> f64 {
        self.atoms[id].log_measure
    }

    pub fn rect(&self, id: AtomId) -> Result<&Rect> {
        self.atom(id)?.rect_f64.as_ref().ok_or(Error::ModeMismatch("geometric"))
    }

    pub fn is_leaf(&self, id: AtomId) -> bool {
        self.atoms[id].children.is_none()
    }

    pub fn apply_split(&mut self, spec: SplitSpec) -> Result<(AtomId, AtomId)> {
        let id = spec.atom();
        let parent = self.atom(id)?.clone();
        if parent.children.is_some() {
            return Err(Error::NotALeaf(id));
        }
        let (first, second) = match (&spec, self.mode) {
            (SplitSpec::Cut { axis, at, .. }, Mode::Geometric) => self.cut_pieces(&parent, *axis, at)?,
            (SplitSpec::Fraction { t, .. }, Mode::Abstract) => {
                if !exact::is_positive(t) || *t >= Rational::one() {
                    return Err(Error::FractionOutOfRange(exact::to_f64(t)));
                }
                let m1 = &parent.measure * t;
                let m2 = &parent.measure - &m1;
                (self.bare_child(&parent, m1, Side::Lower), self.bare_child(&parent, m2, Side::Upper))
            }
            (SplitSpec::Cut { .. }, Mode::Abstract) => return Err(Error::ModeMismatch("geometric")),
            (SplitSpec::Fraction { .. }, Mode::Geometric) => return Err(Error::ModeMismatch("abstract")),
        };
        let index = self.splits.len() + 1;
        let (small_id, large_id) = (2 * index - 1, 2 * index);
        let first_is_small = first.measure <= second.measure;
        let (mut small, mut large) = if first_is_small { (first, second) } else { (second, first) };
        small.id = small_id;
        large.id = large_id;
        for c in [&mut small, &mut large] {
            c.born = index;
        }
        self.atoms[id].children = Some((small_id, large_id));
        self.atoms[id].split_index = Some(index);
        self.atoms.push(small);
        self.atoms.push(large);
        self.splits.push(SplitRecord { index, spec, small: small_id, large: large_id });
        Ok((small_id, large_id))
    }

    fn bare_child(&self, parent: &Atom, measure: Rational, side: Side) -> Atom {
        let log_measure = exact::ln_abs(&measure);
        Atom {
            id: 0,
            parent: Some(parent.id),
            children: None,
            depth: parent.depth + 1,
            born: 0,
            split_index: None,
            measure_f64: exact::to_f64(&measure),
            measure,
            log_measure,
            rect: None,
            rect_f64: None,
            log_sides: Vec::new(),
            rel: None,
            side: Some(side),
        }
    }

    fn cut_pieces(&self, parent: &Atom, axis: usize, at: &Rational) -> Result<(Atom, Atom)> {
        if axis >= self.dim {
            return Err(Error::AxisOutOfRange { axis, dim: self.dim });
        }
        let rect = parent.rect.as_ref().expect("geometric atom without rect");
        let (lo, hi) = (&rect.lo[axis], &rect.hi[axis]);
        if at <= lo || at >= hi {
            return Err(Error::CutOutside {
                axis,
                cut: exact::to_f64(at),
                lo: exact::to_f64(lo),
                hi: exact::to_f64(hi),
            });
        }
        let width = hi - lo;
        let mut pieces = Vec::with_capacity(2);
        for (a, b, side) in [(lo.clone(), at.clone(), Side::Lower), (at.clone(), hi.clone(), Side::Upper)] {
            let len = &b - &a;
            let measure = &parent.measure * &len / &width;
            let mut child = self.bare_child(parent, measure, side);
            let mut r = rect.clone();
            r.lo[axis] = a.clone();
            r.hi[axis] = b;
            let mut rel = Rect::unit(self.dim);
            rel.lo[axis] = exact::to_f64(&((&a - lo) / &width));
            rel.hi[axis] = exact::to_f64(&((&r.hi[axis] - lo) / &width));
            let mut log_sides = parent.log_sides.clone();
            log_sides[axis] = exact::ln_abs(&len);
            child.rect_f64 = Some(r.to_f64());
            child.rect = Some(r);
            child.log_sides = log_sides;
            child.rel = Some(rel);
            pieces.push(child);
        }
        let second = pieces.pop().unwrap();
        let first = pieces.pop().unwrap();
        Ok((first, second))
    }

    /// Cuts `atom` along `axis` at relative position `t` of its side.
    pub fn split_relative(&mut self, atom: AtomId, axis: usize, t: &Rational) -> Result<(AtomId, AtomId)> {
        let rect = self.atom(atom)?.rect.clone().ok_or(Error::ModeMismatch("geometric"))?;
        if axis >= self.dim {
            return Err(Error::AxisOutOfRange { axis, dim: self.dim });
        }
        let at = &rect.lo[axis] + t * rect.side(axis);
        self.apply_split(SplitSpec::Cut { atom, axis, at })
    }

    pub fn relatives(&self, id: AtomId) -> Result<Relatives> {
        let a = self.atom(id)?;
        let parent = a.parent.ok_or(Error::RootHasNoParent)?;
        let (s, l) = self.atoms[parent].children.expect("parent without children");
        let is_small = s == id;
        Ok(Relatives { parent, buddy: if is_small { l } else { s }, is_small })
    }

    pub fn parent(&self, id: AtomId) -> Option<AtomId> {
        self.atoms[id].parent
    }

    pub fn buddy(&self, id: AtomId) -> Result<AtomId> {
        Ok(self.relatives(id)?.buddy)
    }

    pub fn children(&self, id: AtomId) -> Option<(AtomId, AtomId)> {
        self.atoms[id].children
    }

    pub fn depth(&self, id: AtomId) -> usize {
        self.atoms[id].depth
    }

    pub fn max_depth(&self) -> usize {
        self.atoms.iter().map(|a| a.depth).max().unwrap_or(0)
    }

    /// `a ⊇ b`.
    pub fn contains(&self, a: AtomId, b: AtomId) -> bool {
        let mut cur = b;
        loop {
            if cur == a {
                return true;
            }
            if self.atoms[cur].depth <= self.atoms[a].depth {
                return false;
            }
            match self.atoms[cur].parent {
                Some(p) => cur = p,
                None => return false,
            }
        }
    }

    pub fn lca(&self, a: AtomId, b: AtomId) -> AtomId {
        let (mut x, mut y) = (a, b);
        while self.atoms[x].depth > self.atoms[y].depth {
            x = self.atoms[x].parent.unwrap();
        }
        while self.atoms[y].depth > self.atoms[x].depth {
            y = self.atoms[y].parent.unwrap();
        }
        while x != y {
            x = self.atoms[x].parent.unwrap();
            y = self.atoms[y].parent.unwrap();
        }
        x
    }

    /// Atoms strictly below `anc` down to and including `desc`, top first.
    pub fn path_down(&self, anc: AtomId, desc: AtomId) -> Vec<AtomId> {
        let mut path = Vec::new();
        let mut cur = desc;
        while cur != anc {
            path.push(cur);
            cur = self.atoms[cur].parent.expect("not a descendant");
        }
        path.reverse();
        path
    }

    /// Placement of `desc` inside `anc` in `anc`'s local coordinates.
    pub fn rel_box(&self, anc: AtomId, desc: AtomId) -> Rect {
        let mut r = Rect::unit(self.dim);
        for id in self.path_down(anc, desc) {
            let rel = self.atoms[id].rel.as_ref().expect("geometric mode required");
            r = r.compose(rel);
        }
        r
    }

    /// The leaves of the final filtration, by id.
    pub fn leaves(&self) -> Vec<AtomId> {
        self.atoms.iter().filter(|a| a.children.is_none()).map(|a| a.id).collect()
    }

    /// The atoms of `F_n`.
    pub fn leaves_at(&self, n: usize) -> Vec<AtomId> {
        self.atoms
            .iter()
            .filter(|a| a.born <= n && a.split_index.map_or(true, |k| k > n))
            .map(|a| a.id)
            .collect()
    }

    /// Whether `|a| >= rho |b|`, exact on near-ties.
    pub fn ge_scaled(&self, a: AtomId, b: AtomId, rho: f64) -> bool {
        let diff = self.atoms[a].log_measure - self.atoms[b].log_measure - math::ln(rho);
        if diff > 1e-9 {
            return true;
        }
        if diff < -1e-9 {
            return false;
        }
        let r = exact::from_f64(rho).expect("finite rho");
        self.atoms[a].measure >= r * &self.atoms[b].measure
    }

    pub fn chain_of(&self, ids: &[AtomId]) -> Result<Chain> {
        if ids.is_empty() {
            return Err(Error::InvalidParameter("empty chain".to_string()));
        }
        self.atom(ids[0])?;
        for w in ids.windows(2) {
            self.atom(w[1])?;
            if self.atoms[w[1]].parent != Some(w[0]) {
                return Err(Error::NotAChain(w[0], w[1]));
            }
        }
        Ok(Chain { ids: ids.to_vec() })
    }

    pub fn is_fat(&self, chain: &Chain, rho: f64) -> bool {
        self.ge_scaled(chain.bottom(), chain.top(), rho)
    }

    /// Splits a full chain into `rho`-fat pieces, bottom piece first.
    pub fn decompose_fat(&self, chain: &Chain, rho: f64) -> Vec<Chain> {
        let x = &chain.ids;
        let n = x.len();
        let mut pieces = Vec::new();
        // indices are 1-based as in X_1..X_n
        let mut i_prev = n;
        let less = |a: usize, b: usize| !self.ge_scaled(x[a - 1], x[b - 1], rho);
        if !less(n, 1) {
            return vec![chain.clone()];
        }
        loop {
            let next = (1..i_prev).rev().find(|&j| less(i_prev, j)).unwrap_or(0);
            pieces.push(Chain { ids: x[next..i_prev].to_vec() });
            if next == 0 {
                break;
            }
            i_prev = next;
        }
        pieces
    }

    /// All maximal `rho`-fat full chains with at least `min_len` atoms, ordered
    /// by top atom id and then depth-first with the small child first.
    pub fn enumerate_fat_chains(&self, rho: f64, min_len: usize) -> Vec<Chain> {
        let mut out = Vec::new();
        for top in 0..self.atoms.len() {
            self.fat_chains_from(top, rho, |c| {
                if c.len() >= min_len {
                    out.push(Chain { ids: c.to_vec() });
                }
            });
        }
        out
    }

    /// Calls `visit` with each maximal `rho`-fat full chain starting at `top`.
    pub fn fat_chains_from<F: FnMut(&[AtomId])>(&self, top: AtomId, rho: f64, mut visit: F) {
        let mut path = vec![top];
        self.fat_dfs(top, rho, &mut path, &mut visit);
    }

    fn fat_dfs<F: FnMut(&[AtomId])>(&self, top: AtomId, rho: f64, path: &mut Vec<AtomId>, visit: &mut F) {
        let cur = *path.last().unwrap();
        let mut extended = false;
        if let Some((s, l)) = self.atoms[cur].children {
            for c in [s, l] {
                if self.ge_scaled(c, top, rho) {
                    extended = true;
                    path.push(c);
                    self.fat_dfs(top, rho, path, visit);
                    path.pop();
                }
            }
        }
        if !extended {
            visit(path);
        }
    }

    pub fn ring_of(&self, chain: &Chain) -> Result<Ring> {
        if chain.len() < 2 {
            return Err(Error::DegenerateRing("chain has fewer than two atoms".to_string()));
        }
        Ok(Ring { outer: chain.top(), inner: chain.bottom() })
    }

    pub fn check_ring(&self, ring: &Ring) -> Result<()> {
        self.atom(ring.outer)?;
        self.atom(ring.inner)?;
        if ring.outer == ring.inner || !self.contains(ring.outer, ring.inner) {
            return Err(Error::DegenerateRing(format!(
                "atom {} is not a strict descendant of {}",
                ring.inner, ring.outer
            )));
        }
        Ok(())
    }

    pub fn ring_measure(&self, ring: &Ring) -> f64 {
        exact::to_f64(&(&self.atoms[ring.outer].measure - &self.atoms[ring.inner].measure))
    }

    /// The `2d` boxes `I_1..I_d, I_{d+1}..I_{2d}` covering the ring; some may be
    /// empty and they overlap when `d > 1`.
    pub fn ring_rectangles(&self, ring: &Ring) -> Result<Vec<Rect>> {
        self.check_ring(ring)?;
        let i = self.rect(ring.outer)?;
        let j = self.rect(ring.inner)?;
        let d = self.dim;
        let mut out = Vec::with_capacity(2 * d);
        for s in 0..d {
            let mut r = i.clone();
            r.hi[s] = j.lo[s];
            out.push(r);
        }
        for s in 0..d {
            let mut r = i.clone();
            r.lo[s] = j.hi[s];
            out.push(r);
        }
        Ok(out)
    }

    pub fn ring_sides(&self, ring: &Ring, axis: usize) -> Result<AxisGaps> {
        self.check_ring(ring)?;
        if axis >= self.dim {
            return Err(Error::AxisOutOfRange { axis, dim: self.dim });
        }
        let i = self.atoms[ring.outer].rect.as_ref().ok_or(Error::ModeMismatch("geometric"))?;
        let j = self.atoms[ring.inner].rect.as_ref().unwrap();
        let minus = &j.lo[axis] - &i.lo[axis];
        let plus = &i.hi[axis] - &j.hi[axis];
        let outer = i.side(axis);
        Ok(AxisGaps {
            minus: exact::to_f64(&minus),
            plus: exact::to_f64(&plus),
            outer: exact::to_f64(&outer),
            log_minus: exact::ln_abs(&minus),
            log_plus: exact::ln_abs(&plus),
            log_outer: exact::ln_abs(&outer),
        })
    }

    /// `A ∈ 𝒜(λ)`: `A` is not the root and `|A| <= λ |pp(A)|`.
    pub fn in_a_lambda(&self, id: AtomId, lambda: f64) -> Result<bool> {
        let rel = self.relatives(id)?;
        let l = exact::from_f64(lambda).ok_or_else(|| Error::InvalidParameter(format!("lambda = {lambda}")))?;
        Ok(self.atoms[id].measure <= l * &self.atoms[rel.parent].measure)
    }

    /// Geometric copy of an abstract filtration on `[0,1]` with identical ids;
    /// the first-listed piece of each split becomes the lower interval.
    pub fn interval_realization(&self) -> Result<Filtration> {
        if self.mode == Mode::Geometric {
            return Ok(self.clone());
        }
        let mut g = Filtration::new_geometric(1);
        for s in &self.splits {
            match &s.spec {
                SplitSpec::Fraction { atom, t } => {
                    g.split_relative(*atom, 0, t)?;
                }
                SplitSpec::Cut { .. } => unreachable!(),
            }
        }
        Ok(g)
    }

    /// Ordering of atoms by id, used for deterministic iteration.
    pub fn cmp_ids(a: &AtomId, b: &AtomId) -> Ordering {
        a.cmp(b)
    }
}
