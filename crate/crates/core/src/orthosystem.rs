//! The orthonormal system `Φ(ℱ, S)`: an orthonormal basis of `S(Ω)` followed,
//! for each split, by an orthonormal basis of `S(A') ⊕ S(A'') ⊖ S(A)`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::partition::{AtomId, Filtration, Rect};
use crate::polyspace::{mat_t_vec, mat_vec, Space, DEFAULT_TOL};

/// A frame function, as coefficient vectors on the small and large child.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameFunction {
    pub on_small: Vec<f64>,
    pub on_large: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LocalFrame {
    pub split: usize,
    pub atom: AtomId,
    pub small: AtomId,
    pub large: AtomId,
    pub funcs: Vec<FrameFunction>,
}

/// A function given by coefficient vectors on disjoint atoms.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PiecewiseFunction {
    pub pieces: BTreeMap<AtomId, Vec<f64>>,
}

impl PiecewiseFunction {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, atom: AtomId, coeffs: Vec<f64>) {
        self.pieces.insert(atom, coeffs);
    }
}

/// One analysis coefficient; level-0 entries have `split == 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficient {
    pub split: usize,
    pub frame_index: usize,
    pub atom: AtomId,
    pub value: f64,
}

/// Haar values `(φ on A', φ on A'')` for the constant space.
pub fn haar_explicit(small: f64, large: f64) -> (f64, f64) {
    let a = small;
    let b = large;
    let v1 = math::sqrt(b) / math::sqrt(a * a + a * b);
    let v2 = -a / (math::sqrt(b) * math::sqrt(a * a + b * a));
    (v1, v2)
}

fn rel_of(filt: &Filtration, id: AtomId) -> Result<Rect> {
    filt.atom(id)?.rel.clone().ok_or(Error::ModeMismatch("geometric"))
}

/// Builds the local frame of split `k` by Gram-Schmidt with re-orthogonalization.
pub fn build_frame(filt: &Filtration, space: &Space, k: usize) -> Result<LocalFrame> {
    if k == 0 || k > filt.num_splits() {
        return Err(Error::InvalidParameter(format!("split index {k}")));
    }
    let rec = filt.split(k);
    let (a, s, l) = (rec.atom(), rec.small, rec.large);
    let rs = space.restrict_matrix(&rel_of(filt, s)?);
    let rl = space.restrict_matrix(&rel_of(filt, l)?);
    Ok(frame_from_matrices(filt, space, k, a, s, l, &rs, &rl))
}

#[allow(clippy::too_many_arguments)]
fn frame_from_matrices(
    filt: &Filtration,
    space: &Space,
    k: usize,
    a: AtomId,
    s: AtomId,
    l: AtomId,
    rs: &[f64],
    rl: &[f64],
) -> LocalFrame {
    let n = space.dim();
    let la = filt.log_measure(a);
    let ws = math::exp(filt.log_measure(s) - la);
    let wl = math::exp(filt.log_measure(l) - la);
    let dot = |u: &[f64], v: &[f64]| -> f64 {
        ws * u[..n].iter().zip(&v[..n]).map(|(x, y)| x * y).sum::<f64>()
            + wl * u[n..].iter().zip(&v[n..]).map(|(x, y)| x * y).sum::<f64>()
    };
    let mut parent_basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let mut v = mat_vec(rs, &e);
        v.extend(mat_vec(rl, &e));
        parent_basis.push(v);
    }
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut j = 0;
    while out.len() < n && j < 2 * n {
        let mut v = vec![0.0; 2 * n];
        if j < n {
            v[j] = 1.0 / math::sqrt(ws);
        } else {
            v[j] = 1.0 / math::sqrt(wl);
        }
        j += 1;
        for _ in 0..2 {
            for q in parent_basis.iter().chain(out.iter()) {
                let c = dot(&v, q);
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let nv = math::sqrt(dot(&v, &v));
        if nv < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        out.push(v);
    }
    let scale = math::exp(-0.5 * la);
    let funcs = out
        .into_iter()
        .map(|v| {
            let mut f = FrameFunction {
                on_small: v[..n].iter().map(|x| x * scale).collect(),
                on_large: v[n..].iter().map(|x| x * scale).collect(),
            };
            let bt = space.to_bernstein(&f.on_small);
            let m = bt.max_abs_coeff();
            if let Some(&c) = bt.coeffs.iter().find(|c| math::abs(**c) > 1e-10 * m) {
                if c < 0.0 {
                    f.on_small.iter_mut().for_each(|x| *x = -*x);
                    f.on_large.iter_mut().for_each(|x| *x = -*x);
                }
            }
            f
        })
        .collect();
    LocalFrame { split: k, atom: a, small: s, large: l, funcs }
}

/// `Φ(ℱ, S)` with the cached parent-to-child restriction matrices.
#[derive(Clone, Debug)]
pub struct System {
    filt: Filtration,
    space: Space,
    level0: Vec<Vec<f64>>,
    frames: Vec<LocalFrame>,
    restrict: Vec<Vec<f64>>,
}

impl System {
    pub fn build(filt: &Filtration, space: &Space) -> Result<System> {
        let filt = if filt.is_geometric() {
            filt.clone()
        } else if space.is_constant() {
            filt.interval_realization()?
        } else {
            return Err(Error::SpaceMismatch("abstract filtrations support the constant space only".into()));
        };
        if space.d() != filt.dim() && !space.is_constant() {
            return Err(Error::SpaceMismatch(format!(
                "space lives in dimension {}, filtration in {}",
                space.d(),
                filt.dim()
            )));
        }
        let n = space.dim();
        let mut restrict = Vec::with_capacity(filt.num_atoms());
        for a in filt.atoms() {
            match &a.rel {
                Some(rel) => restrict.push(space.restrict_matrix(rel)),
                None => {
                    let mut id = vec![0.0; n * n];
                    for i in 0..n {
                        id[i * n + i] = 1.0;
                    }
                    restrict.push(id);
                }
            }
        }
        let level0 = (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                e
            })
            .collect();
        let frames = (1..=filt.num_splits())
            .map(|k| {
                let rec = filt.split(k);
                let (s, l) = (rec.small, rec.large);
                frame_from_matrices(&filt, space, k, rec.atom(), s, l, &restrict[s], &restrict[l])
            })
            .collect();
        Ok(System { filt, space: space.clone(), level0, frames, restrict })
    }

    pub fn filtration(&self) -> &Filtration {
        &self.filt
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn level0(&self) -> &[Vec<f64>] {
        &self.level0
    }

    pub fn frames(&self) -> &[LocalFrame] {
        &self.frames
    }

    /// Frame of split `k` (1-based).
    pub fn frame(&self, k: usize) -> &LocalFrame {
        &self.frames[k - 1]
    }

    /// Matrix taking coefficients on the parent of `id` to coefficients on `id`.
    pub fn restrict_matrix(&self, id: AtomId) -> &[f64] {
        &self.restrict[id]
    }

    /// Coefficients of `coeffs` (given on `anc`) restricted to the descendant `desc`.
    pub fn restrict_down(&self, anc: AtomId, desc: AtomId, coeffs: &[f64]) -> Vec<f64> {
        let mut c = coeffs.to_vec();
        if self.space.is_constant() {
            return c;
        }
        for id in self.filt.path_down(anc, desc) {
            c = mat_vec(&self.restrict[id], &c);
        }
        c
    }

    /// Moment vector on the parent from a moment vector on the child `id`.
    pub fn lift_moment(&self, id: AtomId, m: &[f64]) -> Vec<f64> {
        if self.space.is_constant() {
            return m.to_vec();
        }
        mat_t_vec(&self.restrict[id], m, self.space.dim())
    }

    /// Number of functions in the system.
    pub fn len(&self) -> usize {
        self.level0.len() + self.frames.iter().map(|f| f.funcs.len()).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `∫_A |u|^p` for `u` with coefficients `c` on atom `A`.
    pub fn lp_pow_on(&self, id: AtomId, c: &[f64], p: f64) -> f64 {
        self.filt.measure(id) * self.space.lp_unit(c, p, DEFAULT_TOL)
    }

    pub fn lp_norm(&self, f: &PiecewiseFunction, p: f64) -> f64 {
        math::pow(f.pieces.iter().map(|(&a, c)| self.lp_pow_on(a, c, p)).sum::<f64>(), 1.0 / p)
    }

    /// `‖φ‖_p` of one frame function.
    pub fn frame_norm(&self, k: usize, j: usize, p: f64) -> f64 {
        let fr = self.frame(k);
        let g = &fr.funcs[j];
        math::pow(self.lp_pow_on(fr.small, &g.on_small, p) + self.lp_pow_on(fr.large, &g.on_large, p), 1.0 / p)
    }

    /// Moment vectors `∫_A f l_α^A` for every atom (zero where `f` has no mass).
    pub fn moments(&self, f: &PiecewiseFunction) -> (Vec<Vec<f64>>, Vec<bool>) {
        let n = self.space.dim();
        let na = self.filt.num_atoms();
        let mut coef: Vec<Option<Vec<f64>>> = vec![None; na];
        for a in self.filt.atoms() {
            if let Some(c) = f.pieces.get(&a.id) {
                coef[a.id] = Some(c.clone());
            } else if let Some(p) = a.parent {
                if let Some(pc) = &coef[p] {
                    coef[a.id] = Some(if self.space.is_constant() { pc.clone() } else { mat_vec(&self.restrict[a.id], pc) });
                }
            }
        }
        let inside: Vec<bool> = coef.iter().map(|c| c.is_some()).collect();
        let mut mom: Vec<Vec<f64>> = vec![vec![0.0; n]; na];
        for id in (0..na).rev() {
            if let Some(c) = &coef[id] {
                let m = self.filt.measure(id);
                mom[id] = c.iter().map(|x| x * m).collect();
            } else if let Some((s, l)) = self.filt.children(id) {
                let a = self.lift_moment(s, &mom[s]);
                let b = self.lift_moment(l, &mom[l]);
                mom[id] = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            }
        }
        (mom, inside)
    }

    pub fn analyze(&self, f: &PiecewiseFunction) -> Vec<Coefficient> {
        let (mom, inside) = self.moments(f);
        let mut out = Vec::with_capacity(self.len());
        for (j, e) in self.level0.iter().enumerate() {
            out.push(Coefficient { split: 0, frame_index: j, atom: 0, value: dotv(e, &mom[0]) });
        }
        for fr in &self.frames {
            for (j, g) in fr.funcs.iter().enumerate() {
                let value = if inside[fr.atom] {
                    0.0
                } else {
                    dotv(&g.on_small, &mom[fr.small]) + dotv(&g.on_large, &mom[fr.large])
                };
                out.push(Coefficient { split: fr.split, frame_index: j, atom: fr.atom, value });
            }
        }
        out
    }

    /// `Σ value · φ` as a function on the leaves.
    pub fn synthesize(&self, coeffs: &[Coefficient]) -> PiecewiseFunction {
        let n = self.space.dim();
        let na = self.filt.num_atoms();
        let mut acc = vec![vec![0.0; n]; na];
        for c in coeffs {
            if c.split == 0 {
                acc[0].iter_mut().zip(&self.level0[c.frame_index]).for_each(|(a, e)| *a += c.value * e);
            } else {
                let fr = self.frame(c.split);
                let g = &fr.funcs[c.frame_index];
                acc[fr.small].iter_mut().zip(&g.on_small).for_each(|(a, e)| *a += c.value * e);
                acc[fr.large].iter_mut().zip(&g.on_large).for_each(|(a, e)| *a += c.value * e);
            }
        }
        let mut out = PiecewiseFunction::new();
        for id in 0..na {
            match self.filt.children(id) {
                Some((s, l)) => {
                    for ch in [s, l] {
                        let add = if self.space.is_constant() { acc[id].clone() } else { mat_vec(&self.restrict[ch], &acc[id]) };
                        acc[ch].iter_mut().zip(&add).for_each(|(a, b)| *a += b);
                    }
                }
                None => {
                    out.insert(id, acc[id].clone());
                }
            }
        }
        out
    }

    /// `P_n f` as a function on the atoms of `ℱ_n`.
    pub fn project_p(&self, f: &PiecewiseFunction, n: usize) -> PiecewiseFunction {
        let (mom, _) = self.moments(f);
        let mut out = PiecewiseFunction::new();
        for id in self.filt.leaves_at(n) {
            let m = self.filt.measure(id);
            out.insert(id, mom[id].iter().map(|x| x / m).collect());
        }
        out
    }

    /// Coefficients `⟨f, φ_j⟩` of split `k` from precomputed moments.
    pub fn split_coefficients(&self, mom: &[Vec<f64>], k: usize) -> Vec<f64> {
        let fr = self.frame(k);
        fr.funcs.iter().map(|g| dotv(&g.on_small, &mom[fr.small]) + dotv(&g.on_large, &mom[fr.large])).collect()
    }

    /// `Q_k f` on the two children for the given split coefficients.
    pub fn q_pieces(&self, k: usize, coeffs: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let fr = self.frame(k);
        let n = self.space.dim();
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        for (c, g) in coeffs.iter().zip(&fr.funcs) {
            a.iter_mut().zip(&g.on_small).for_each(|(x, y)| *x += c * y);
            b.iter_mut().zip(&g.on_large).for_each(|(x, y)| *x += c * y);
        }
        (a, b)
    }

    /// `‖Q_k f‖_p^p` for the given split coefficients.
    pub fn q_pow(&self, k: usize, coeffs: &[f64], p: f64) -> f64 {
        let fr = self.frame(k);
        let (a, b) = self.q_pieces(k, coeffs);
        self.lp_pow_on(fr.small, &a, p) + self.lp_pow_on(fr.large, &b, p)
    }

    /// `(‖Q_k f‖_p, ‖Q_k f‖_p / (|A_k|^{1/p - 1/2} ‖Q_k f‖_2))`.
    pub fn q_norm(&self, f: &PiecewiseFunction, k: usize, p: f64) -> (f64, f64) {
        let (mom, _) = self.moments(f);
        let c = self.split_coefficients(&mom, k);
        let np = math::pow(self.q_pow(k, &c, p), 1.0 / p);
        let n2 = math::sqrt(self.q_pow(k, &c, 2.0));
        let t = self.filt.measure(self.frame(k).atom);
        let ratio = if n2 > 0.0 { np / (math::pow(t, 1.0 / p - 0.5) * n2) } else { 0.0 };
        (np, ratio)
    }

    /// Leaf containing `x` (geometric mode).
    pub fn locate(&self, x: &[f64]) -> AtomId {
        let mut cur = 0;
        while let Some((s, l)) = self.filt.children(cur) {
            cur = if self.filt.rect(s).map(|r| r.contains(x)).unwrap_or(false) { s } else { l };
        }
        cur
    }

    /// Value of a piecewise function at `x`.
    pub fn eval(&self, f: &PiecewiseFunction, x: &[f64]) -> f64 {
        let mut cur = 0;
        loop {
            if let Some(c) = f.pieces.get(&cur) {
                let r = self.filt.rect(cur).expect("geometric");
                return self.space.eval_local(c, &r.to_local(x));
            }
            match self.filt.children(cur) {
                Some((s, l)) => {
                    cur = if self.filt.rect(s).map(|r| r.contains(x)).unwrap_or(false) { s } else { l };
                }
                None => return 0.0,
            }
        }
    }
}

pub fn dotv(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact;
    use crate::partition::SplitSpec;
    use crate::polyspace::SpaceSpec;
    use proptest::prelude::*;

    fn random_filtration(splits: &[(usize, f64)], dim: usize) -> Filtration {
        let mut f = Filtration::new_geometric(dim);
        for (k, &(pick, t)) in splits.iter().enumerate() {
            let leaves = f.leaves();
            let leaf = leaves[pick % leaves.len()];
            f.split_relative(leaf, k % dim, &exact::from_f64(t).unwrap()).unwrap();
        }
        f
    }

    #[test]
    fn haar_quarter() {
        let (a, b) = haar_explicit(0.25, 0.75);
        assert!((a - math::sqrt(3.0)).abs() < 1e-15);
        assert!((b + 1.0 / math::sqrt(3.0)).abs() < 1e-15);
        let mut f = Filtration::new_geometric(1);
        f.apply_split(SplitSpec::cut(0, 0, 0.25)).unwrap();
        let fr = build_frame(&f, &Space::new(SpaceSpec::Constant, 1).unwrap(), 1).unwrap();
        assert!((fr.funcs[0].on_small[0] - a).abs() < 1e-14);
        assert!((fr.funcs[0].on_large[0] - b).abs() < 1e-14);
    }

    fn gram_check(sys: &System) -> f64 {
        let mut funcs = Vec::new();
        for (j, _) in sys.level0().iter().enumerate() {
            funcs.push(sys.synthesize(&[Coefficient { split: 0, frame_index: j, atom: 0, value: 1.0 }]));
        }
        for fr in sys.frames() {
            for j in 0..fr.funcs.len() {
                funcs.push(sys.synthesize(&[Coefficient { split: fr.split, frame_index: j, atom: fr.atom, value: 1.0 }]));
            }
        }
        let mut worst: f64 = 0.0;
        for (i, a) in funcs.iter().enumerate() {
            for (j, b) in funcs.iter().enumerate() {
                let ip: f64 = a
                    .pieces
                    .iter()
                    .map(|(id, c)| sys.filtration().measure(*id) * dotv(c, &b.pieces[id]))
                    .sum();
                let e = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((ip - e).abs());
            }
        }
        worst
    }

    #[test]
    fn linear_frames_are_orthonormal() {
        let f = random_filtration(&[(0, 0.3), (1, 0.6), (5, 0.2), (2, 0.5)], 2);
        let sys = System::build(&f, &Space::new(SpaceSpec::Tensor(vec![1, 1]), 2).unwrap()).unwrap();
        assert_eq!(sys.len(), 4 * 5);
        assert!(gram_check(&sys) < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn analysis_synthesis_roundtrip(splits in prop::collection::vec((0usize..100, 0.05f64..0.95), 1..12), vals in prop::collection::vec(-1.0f64..1.0, 40)) {
            let f = random_filtration(&splits, 1);
            let space = Space::new(SpaceSpec::Tensor(vec![1]), 1).unwrap();
            let sys = System::build(&f, &space).unwrap();
            let mut g = PiecewiseFunction::new();
            for (i, leaf) in f.leaves().into_iter().enumerate() {
                g.insert(leaf, vec![vals[(2 * i) % 40], vals[(2 * i + 1) % 40]]);
            }
            let coeffs = sys.analyze(&g);
            prop_assert_eq!(coeffs.len(), 2 * (f.num_splits() + 1));
            let back = sys.synthesize(&coeffs);
            for (id, c) in &g.pieces {
                for (a, b) in c.iter().zip(&back.pieces[id]) {
                    prop_assert!((a - b).abs() < 1e-9);
                }
            }
            // P_n - P_{n-1} = Q_n
            let n = f.num_splits();
            let pn = sys.project_p(&g, n);
            let pm = sys.project_p(&g, n - 1);
            let qn: Vec<Coefficient> = coeffs.iter().filter(|c| c.split == n).cloned().collect();
            let q = sys.synthesize(&qn);
            for leaf in f.leaves() {
                let x = f.rect(leaf).unwrap().lo.iter().map(|v| v + 1e-9).collect::<Vec<_>>();
                let lhs = sys.eval(&pn, &x) - sys.eval(&pm, &x);
                prop_assert!((lhs - sys.eval(&q, &x)).abs() < 1e-7);
            }
        }

        #[test]
        fn frames_have_local_support_and_sign(splits in prop::collection::vec((0usize..100, 0.05f64..0.95), 1..10)) {
            let f = random_filtration(&splits, 1);
            let space = Space::new(SpaceSpec::Tensor(vec![1]), 1).unwrap();
            let sys = System::build(&f, &space).unwrap();
            prop_assert!(gram_check(&sys) < 1e-9);
            for fr in sys.frames() {
                for g in &fr.funcs {
                    let bt = space.to_bernstein(&g.on_small);
                    let m = bt.max_abs_coeff();
                    let first = bt.coeffs.iter().find(|c| c.abs() > 1e-10 * m).unwrap();
                    prop_assert!(*first > 0.0);
                }
            }
        }
    }
}
