//! Finite-dimensional polynomial spaces `S`, their local bases, and norms.
//!
//! Elements of `S` on an atom are coefficient vectors in the local basis
//! `l_α(t) = Π_s l_{α_s}(t_s)`, `α` ranging over the (downward closed) exponent
//! set of the space, where `l_k` are the orthonormal Legendre polynomials on
//! `[0,1]` and `t` are the atom's local coordinates. The Gram matrix of this
//! basis on an atom `A` is `|A| I`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::bernstein::{self, BTensor};
use crate::error::{Error, Result};
use crate::math;
use crate::partition::{AtomId, Filtration, Rect};
use crate::quadrature::{legendre_unit, GaussLegendre};
use crate::search;

pub const DEFAULT_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpaceSpec {
    Constant,
    Tensor(Vec<usize>),
    TotalDegree(usize),
    SpanSet(Vec<Vec<usize>>),
}

#[derive(Clone, Debug)]
pub struct Space {
    spec: SpaceSpec,
    d: usize,
    degree: Vec<usize>,
    exps: Vec<Vec<usize>>,
    /// Per axis, `(r+1) x (r+1)` row-major map from Legendre to Bernstein coefficients.
    leg_to_bern: Vec<Vec<f64>>,
    bern_basis: Vec<BTensor>,
}

fn box_exps(m: &[usize], out: &mut Vec<Vec<usize>>) {
    let mut idx = vec![0usize; m.len()];
    loop {
        out.push(idx.clone());
        let mut axis = m.len();
        loop {
            if axis == 0 {
                return;
            }
            axis -= 1;
            if idx[axis] < m[axis] {
                idx[axis] += 1;
                break;
            }
            idx[axis] = 0;
        }
    }
}

impl Space {
    pub fn new(spec: SpaceSpec, d: usize) -> Result<Space> {
        if d == 0 {
            return Err(Error::InvalidParameter(format!("dimension {d}")));
        }
        let mut exps = Vec::new();
        match &spec {
            SpaceSpec::Constant => exps.push(vec![0; d]),
            SpaceSpec::Tensor(r) => {
                if r.len() != d {
                    return Err(Error::SpaceMismatch(format!("tensor degree has {} entries, dimension is {d}", r.len())));
                }
                box_exps(r, &mut exps);
            }
            SpaceSpec::TotalDegree(r) => {
                let mut all = Vec::new();
                box_exps(&vec![*r; d], &mut all);
                exps = all.into_iter().filter(|a| a.iter().sum::<usize>() <= *r).collect();
            }
            SpaceSpec::SpanSet(ms) => {
                if ms.is_empty() {
                    return Err(Error::InvalidParameter("empty span set".into()));
                }
                for m in ms {
                    if m.len() != d {
                        return Err(Error::SpaceMismatch(format!("span element has {} entries, dimension is {d}", m.len())));
                    }
                    box_exps(m, &mut exps);
                }
                exps.sort();
                exps.dedup();
            }
        }
        exps.sort();
        let degree: Vec<usize> = (0..d).map(|s| exps.iter().map(|a| a[s]).max().unwrap_or(0)).collect();
        let leg_to_bern = degree.iter().map(|&r| legendre_to_bernstein(r)).collect();
        let mut space = Space { spec, d, degree, exps, leg_to_bern, bern_basis: Vec::new() };
        let n = space.dim();
        space.bern_basis = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                space.to_bernstein(&e)
            })
            .collect();
        Ok(space)
    }

    pub fn spec(&self) -> &SpaceSpec {
        &self.spec
    }

    /// Dimension of the space.
    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    /// Dimension of the ambient cube.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> &[usize] {
        &self.degree
    }

    pub fn exps(&self) -> &[Vec<usize>] {
        &self.exps
    }

    pub fn is_constant(&self) -> bool {
        self.dim() == 1
    }

    /// Coefficient vector of the constant function `c`.
    pub fn constant(&self, c: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        v[0] = c;
        v
    }

    /// `dim x dim` row-major matrix taking coefficients on a box to coefficients
    /// on the sub-box `rel` (given in the box's local coordinates).
    pub fn restrict_matrix(&self, rel: &Rect) -> Vec<f64> {
        let n = self.dim();
        if self.is_constant() {
            return vec![1.0];
        }
        let per_axis: Vec<Option<Vec<f64>>> = (0..self.d)
            .map(|s| {
                if rel.lo[s] == 0.0 && rel.hi[s] == 1.0 || self.degree[s] == 0 {
                    None
                } else {
                    Some(legendre_restrict_1d(self.degree[s], rel.lo[s], rel.hi[s]))
                }
            })
            .collect();
        let mut m = vec![0.0; n * n];
        for (bi, beta) in self.exps.iter().enumerate() {
            for (ai, alpha) in self.exps.iter().enumerate() {
                let mut v = 1.0;
                for s in 0..self.d {
                    let r = self.degree[s];
                    v *= match &per_axis[s] {
                        None => {
                            if beta[s] == alpha[s] {
                                1.0
                            } else {
                                0.0
                            }
                        }
                        Some(mat) => mat[beta[s] * (r + 1) + alpha[s]],
                    };
                    if v == 0.0 {
                        break;
                    }
                }
                m[bi * n + ai] = v;
            }
        }
        m
    }

    pub fn restrict(&self, coeffs: &[f64], rel: &Rect) -> Vec<f64> {
        mat_vec(&self.restrict_matrix(rel), coeffs)
    }

    pub fn to_bernstein(&self, coeffs: &[f64]) -> BTensor {
        if !self.bern_basis.is_empty() {
            let mut out = vec![0.0; self.bern_basis[0].coeffs.len()];
            for (c, b) in coeffs.iter().zip(&self.bern_basis) {
                if *c != 0.0 {
                    for (o, v) in out.iter_mut().zip(&b.coeffs) {
                        *o += c * v;
                    }
                }
            }
            return BTensor::new(self.degree.clone(), out);
        }
        let len = bernstein::tensor_len(&self.degree);
        let mut out = vec![0.0; len];
        let strides: Vec<usize> =
            (0..self.d).map(|s| self.degree[s + 1..].iter().map(|r| r + 1).product()).collect();
        let mut idx = vec![0usize; self.d];
        for pos in 0..len {
            let mut rem = pos;
            for s in 0..self.d {
                idx[s] = rem / strides[s];
                rem %= strides[s];
            }
            let mut acc = 0.0;
            for (c, alpha) in coeffs.iter().zip(&self.exps) {
                let mut v = *c;
                for s in 0..self.d {
                    let r = self.degree[s];
                    v *= self.leg_to_bern[s][idx[s] * (r + 1) + alpha[s]];
                }
                acc += v;
            }
            out[pos] = acc;
        }
        BTensor::new(self.degree.clone(), out)
    }

    /// `L^2([0,1]^d)` projection of a Bernstein tensor onto the space.
    pub fn from_bernstein(&self, t: &BTensor) -> Vec<f64> {
        let orders: Vec<usize> = (0..self.d).map(|s| t.degree[s].max(self.degree[s]) + 1).collect();
        let rules: Vec<GaussLegendre> = orders.iter().map(|&n| GaussLegendre::new(n)).collect();
        let mut out = vec![0.0; self.dim()];
        let mut idx = vec![0usize; self.d];
        let total: usize = orders.iter().product();
        let mut x = vec![0.0; self.d];
        let mut leg = Vec::new();
        let mut legs: Vec<Vec<f64>> = vec![Vec::new(); self.d];
        for _ in 0..total {
            let mut w = 1.0;
            for s in 0..self.d {
                x[s] = rules[s].nodes[idx[s]];
                w *= rules[s].weights[idx[s]];
                legendre_unit(self.degree[s], x[s], &mut leg);
                legs[s] = leg.clone();
            }
            let v = t.eval(&x) * w;
            for (o, alpha) in out.iter_mut().zip(&self.exps) {
                let mut b = v;
                for s in 0..self.d {
                    b *= legs[s][alpha[s]];
                }
                *o += b;
            }
            for s in (0..self.d).rev() {
                idx[s] += 1;
                if idx[s] < orders[s] {
                    break;
                }
                idx[s] = 0;
            }
        }
        out
    }

    pub fn eval_local(&self, coeffs: &[f64], t: &[f64]) -> f64 {
        let mut legs: Vec<Vec<f64>> = Vec::with_capacity(self.d);
        for s in 0..self.d {
            let mut v = Vec::new();
            legendre_unit(self.degree[s], t[s], &mut v);
            legs.push(v);
        }
        coeffs
            .iter()
            .zip(&self.exps)
            .map(|(c, a)| c * (0..self.d).map(|s| legs[s][a[s]]).product::<f64>())
            .sum()
    }

    /// `∫_{[0,1]^d} |u|^p`.
    pub fn lp_unit(&self, coeffs: &[f64], p: f64, tol: f64) -> f64 {
        if self.is_constant() {
            return bernstein::pow_abs(coeffs[0], p);
        }
        if p == 2.0 {
            return coeffs.iter().map(|c| c * c).sum();
        }
        if coeffs.iter().all(|&c| c == 0.0) {
            return 0.0;
        }
        self.to_bernstein(coeffs).integrate_abs_pow(p, tol)
    }

    /// `∫_{rel} |u|^p` in the unit-cube measure.
    pub fn lp_box(&self, coeffs: &[f64], rel: &Rect, p: f64, tol: f64) -> f64 {
        let vol = rel.measure();
        if vol <= 0.0 {
            return 0.0;
        }
        if self.is_constant() {
            return bernstein::pow_abs(coeffs[0], p) * vol;
        }
        self.lp_unit(&self.restrict(coeffs, rel), p, tol) * vol
    }

    /// `∫_{[0,1]^d \ inner} |u|^p` in the unit-cube measure.
    pub fn lp_ring(&self, coeffs: &[f64], inner: &Rect, p: f64, tol: f64) -> f64 {
        if self.is_constant() {
            let vol = 1.0 - inner.measure();
            return bernstein::pow_abs(coeffs[0], p) * vol.max(0.0);
        }
        slabs(inner).iter().map(|s| self.lp_box(coeffs, s, p, tol)).sum()
    }

    pub fn sup_unit(&self, coeffs: &[f64]) -> f64 {
        if self.is_constant() {
            return math::abs(coeffs[0]);
        }
        self.to_bernstein(coeffs).sup_abs(1e-8)
    }

    pub fn sup_box(&self, coeffs: &[f64], rel: &Rect) -> f64 {
        self.sup_unit(&self.restrict(coeffs, rel))
    }

    /// The coefficients of `u` as a [`Poly`] on `rect`.
    pub fn to_poly(&self, coeffs: &[f64], rect: &Rect) -> Poly {
        Poly::from_btensor(rect.clone(), &self.to_bernstein(coeffs))
    }
}

pub fn mat_vec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    m.chunks(n).map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

pub fn mat_t_vec(m: &[f64], v: &[f64], cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; cols];
    for (row, &x) in m.chunks(cols).zip(v) {
        for (o, a) in out.iter_mut().zip(row) {
            *o += a * x;
        }
    }
    out
}

/// Disjoint boxes covering `[0,1]^d \ inner`.
pub fn slabs(inner: &Rect) -> Vec<Rect> {
    let d = inner.dim();
    let mut cur = Rect::unit(d);
    let mut out = Vec::with_capacity(2 * d);
    for s in 0..d {
        if inner.lo[s] > cur.lo[s] {
            let mut r = cur.clone();
            r.hi[s] = inner.lo[s];
            out.push(r);
        }
        if inner.hi[s] < cur.hi[s] {
            let mut r = cur.clone();
            r.lo[s] = inner.hi[s];
            out.push(r);
        }
        cur.lo[s] = inner.lo[s];
        cur.hi[s] = inner.hi[s];
    }
    out
}

fn legendre_to_bernstein(r: usize) -> Vec<f64> {
    // Collocation at r+1 equispaced points: B c = L  =>  c = B^{-1} L
    let n = r + 1;
    let pts: Vec<f64> = (0..n).map(|i| if r == 0 { 0.5 } else { i as f64 / r as f64 }).collect();
    let mut b = nalgebra::DMatrix::<f64>::zeros(n, n);
    let mut l = nalgebra::DMatrix::<f64>::zeros(n, n);
    let mut buf = Vec::new();
    for (i, &x) in pts.iter().enumerate() {
        bernstein::basis_values(r, x, &mut buf);
        for j in 0..n {
            b[(i, j)] = buf[j];
        }
        legendre_unit(r, x, &mut buf);
        for j in 0..n {
            l[(i, j)] = buf[j];
        }
    }
    let sol = b.lu().solve(&l).expect("Bernstein collocation is nonsingular");
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = sol[(i, j)];
        }
    }
    out
}

/// `m[j][k] = ∫_0^1 l_k(u + (v-u)s) l_j(s) ds`.
fn legendre_restrict_1d(r: usize, u: f64, v: f64) -> Vec<f64> {
    let n = r + 1;
    let g = GaussLegendre::new(n);
    let mut m = vec![0.0; n * n];
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (&s, &w) in g.nodes.iter().zip(&g.weights) {
        legendre_unit(r, u + (v - u) * s, &mut a);
        legendre_unit(r, s, &mut b);
        for j in 0..n {
            for k in 0..n {
                m[j * n + k] += w * a[k] * b[j];
            }
        }
    }
    m
}

/// Polynomial on a reference box in the unnormalized Bernstein basis
/// `B_m(x; I) = Π_s (x_s - lo_s)^{m_s} (hi_s - x_s)^{r_s - m_s}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    pub rect: Rect,
    pub degree: Vec<usize>,
    pub coeffs: Vec<f64>,
}

fn multi_indices(degree: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    box_exps(degree, &mut out);
    out
}

impl Poly {
    /// Normalized Bernstein coefficients in local coordinates of `rect`.
    pub fn to_btensor(&self) -> BTensor {
        let coeffs = multi_indices(&self.degree)
            .iter()
            .zip(&self.coeffs)
            .map(|(m, a)| a * self.scale(m))
            .collect();
        BTensor::new(self.degree.clone(), coeffs)
    }

    pub fn from_btensor(rect: Rect, t: &BTensor) -> Poly {
        let mut p = Poly { rect, degree: t.degree.clone(), coeffs: Vec::new() };
        p.coeffs = multi_indices(&t.degree).iter().zip(&t.coeffs).map(|(m, c)| c / p.scale(m)).collect();
        p
    }

    /// `B_m = scale(m) * b_m` in local coordinates.
    fn scale(&self, m: &[usize]) -> f64 {
        let mut s = 1.0;
        for (axis, (&r, &mi)) in self.degree.iter().zip(m).enumerate() {
            s *= math::powi(self.rect.side(axis), r as i32) / math::binomial(r, mi);
        }
        s
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.to_btensor().eval(&self.rect.to_local(x))
    }
}

/// The basis `B_m(·; rect)`, `m ≤ degree`, in the order of the coefficient tensor.
pub fn bernstein_basis(rect: &Rect, degree: &[usize]) -> Vec<Poly> {
    let n = bernstein::tensor_len(degree);
    (0..n)
        .map(|i| {
            let mut coeffs = vec![0.0; n];
            coeffs[i] = 1.0;
            Poly { rect: rect.clone(), degree: degree.to_vec(), coeffs }
        })
        .collect()
}

/// Integration domain for [`lp_norm`].
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    Rect(Rect),
    Ring { outer: Rect, inner: Rect },
}

pub fn lp_norm(f: &Poly, region: &Region, p: f64) -> f64 {
    let t = f.to_btensor();
    let boxes: Vec<Rect> = match region {
        Region::Rect(r) => vec![r.clone()],
        Region::Ring { outer, inner } => {
            slabs(&outer.relative(inner)).iter().map(|s| outer.compose(s)).collect()
        }
    };
    let mut total = 0.0;
    for b in boxes {
        let rel = f.rect.relative(&b);
        total += t.restrict(&rel.lo, &rel.hi).integrate_abs_pow(p, DEFAULT_TOL) * b.measure();
    }
    math::pow(total, 1.0 / p)
}

pub fn sup_norm(f: &Poly, rect: &Rect) -> f64 {
    let rel = f.rect.relative(rect);
    f.to_btensor().restrict(&rel.lo, &rel.hi).sup_abs(1e-8)
}

/// `ε_A = sup_u ‖u‖_{L∞(A)} / ‖u‖_{L∞(pp(A))}` over `u ∈ S`.
pub fn epsilon_a(space: &Space, filt: &Filtration, id: AtomId) -> Result<f64> {
    let rel = filt.relatives(id)?;
    if space.is_constant() {
        return Ok(1.0);
    }
    let rbox = filt.atom(id)?.rel.clone().ok_or(Error::ModeMismatch("geometric"))?;
    let m = space.restrict_matrix(&rbox);
    let r = search::maximize_sphere(space.dim(), 32, id as u64 ^ rel.parent as u64, None, |c| {
        let den = space.sup_unit(c);
        if den <= 0.0 {
            return 0.0;
        }
        space.sup_unit(&mat_vec(&m, c)) / den
    });
    Ok(r.value)
}

/// `ε_{A,p} = sup_u ‖u χ_A‖_p / ‖u χ_{pp(A)}‖_p` over `u ∈ S`.
pub fn epsilon_a_p(space: &Space, filt: &Filtration, id: AtomId, p: f64) -> Result<f64> {
    let rel = filt.relatives(id)?;
    let frac = math::exp(filt.log_measure(id) - filt.log_measure(rel.parent));
    if space.is_constant() {
        return Ok(math::pow(frac, 1.0 / p));
    }
    let rbox = filt.atom(id)?.rel.clone().ok_or(Error::ModeMismatch("geometric"))?;
    let m = space.restrict_matrix(&rbox);
    let n = space.dim();
    let mm = nalgebra::DMatrix::from_row_slice(n, n, &m);
    let mtm = mm.transpose() * &mm;
    let eig = mtm.symmetric_eigen();
    let (imax, lmax) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
    let eps2 = math::sqrt(frac * lmax.max(0.0));
    if p == 2.0 {
        return Ok(eps2);
    }
    let hint: Vec<f64> = eig.eigenvectors.column(imax).iter().copied().collect();
    let r = search::maximize_sphere(n, 32, id as u64, Some(&hint), |c| {
        let den = space.lp_unit(c, p, 1e-8);
        if den <= 0.0 {
            return 0.0;
        }
        space.lp_unit(&mat_vec(&m, c), p, 1e-8) / den
    });
    Ok(math::pow(frac * r.value, 1.0 / p))
}

/// `u(A) = 1` if `A ∈ 𝒜(λ)` with `λ = 1 - c₂/2`, else `ε_{b(A),p}`.
pub fn u_of(space: &Space, filt: &Filtration, id: AtomId, p: f64, c2: f64) -> Result<f64> {
    let lambda = 1.0 - c2 / 2.0;
    if filt.in_a_lambda(id, lambda)? {
        return Ok(1.0);
    }
    epsilon_a_p(space, filt, filt.buddy(id)?, p)
}

/// Stability constants `(c₁, c₂)` with `|{|f| ≥ c₁‖f‖_∞}| ≥ c₂ |A|` for all `f ∈ S`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stability {
    pub c1: f64,
    pub c2: f64,
}

/// Smallest measured fraction `c₂` of the cube where `|f| ≥ c₁ ‖f‖_∞`,
/// over sampled `f` in the unit sphere of `S`. Polynomial spaces are
/// invariant under coordinate affine maps, so the cube stands for any atom.
pub fn stability_at(space: &Space, c1: f64, samples: usize, seed: u64) -> f64 {
    if space.is_constant() {
        return 1.0;
    }
    let pts: Vec<Vec<f64>> = (0..4096).map(|i| search::halton(i, space.d())).collect();
    let mut rng = search::rng(seed);
    let mut worst = 1.0f64;
    let n = space.dim();
    for k in 0..samples.max(n) {
        let c = if k < n {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            e
        } else {
            search::unit_vector(&mut rng, n)
        };
        let t = space.to_bernstein(&c);
        let sup = t.sup_abs(1e-8);
        let hits = pts.iter().filter(|x| math::abs(t.eval(x)) >= c1 * sup).count();
        worst = worst.min(hits as f64 / pts.len() as f64);
    }
    worst
}

/// Evaluates `c₁` on a grid and returns the pair with the largest positive `c₂`.
pub fn estimate_stability(space: &Space, c1_grid: &[f64], seed: u64) -> Stability {
    let mut best = Stability { c1: 1.0, c2: if space.is_constant() { 1.0 } else { 0.0 } };
    if space.is_constant() {
        return best;
    }
    for &c1 in c1_grid {
        let c2 = stability_at(space, c1, 64, seed);
        if c2 > 0.0 && c2 > best.c2 {
            best = Stability { c1, c2 };
        }
    }
    best
}

pub const DEFAULT_C1_GRID: [f64; 4] = [0.5, 0.25, 0.125, 0.0625];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::SplitSpec;
    use proptest::prelude::*;

    fn p1() -> Space {
        Space::new(SpaceSpec::Tensor(vec![1]), 1).unwrap()
    }

    #[test]
    fn dims() {
        assert_eq!(Space::new(SpaceSpec::TotalDegree(2), 2).unwrap().dim(), 6);
        assert_eq!(Space::new(SpaceSpec::Tensor(vec![1, 2]), 2).unwrap().dim(), 6);
        let s = Space::new(SpaceSpec::SpanSet(vec![vec![2, 0], vec![0, 1]]), 2).unwrap();
        assert_eq!(s.dim(), 4);
        assert!(Space::new(SpaceSpec::SpanSet(vec![]), 2).is_err());
        assert!(Space::new(SpaceSpec::Tensor(vec![1]), 2).is_err());
    }

    #[test]
    fn identity_function_norm() {
        let rect = Rect::unit(1);
        let f = Poly { rect: rect.clone(), degree: vec![1], coeffs: vec![0.0, 1.0] };
        let v = lp_norm(&f, &Region::Rect(rect), 2.0);
        assert!((v - 1.0 / math::sqrt(3.0)).abs() < 1e-14);
    }

    #[test]
    fn ring_norm_of_one() {
        let f = Poly { rect: Rect::unit(1), degree: vec![0], coeffs: vec![1.0] };
        let region = Region::Ring { outer: Rect::unit(1), inner: Rect::new(vec![0.25], vec![0.75]) };
        assert!((lp_norm(&f, &region, 2.0) - math::sqrt(0.5)).abs() < 1e-15);
    }

    #[test]
    fn unnormalized_basis_value() {
        let b = bernstein_basis(&Rect::unit(1), &[2]);
        assert!((b[1].eval(&[0.5]) - 0.25).abs() < 1e-15);
        let b = bernstein_basis(&Rect::new(vec![1.0], vec![3.0]), &[2]);
        // B_1(x) = (x-1)(3-x)
        assert!((b[1].eval(&[2.5]) - 0.75).abs() < 1e-14);
    }

    #[test]
    fn stability_of_linear_polynomials() {
        let c2 = stability_at(&p1(), 0.25, 64, 7);
        assert!(c2 >= 3.0 / 8.0 - 1e-3, "{c2}");
        let s = estimate_stability(&Space::new(SpaceSpec::Constant, 1).unwrap(), &DEFAULT_C1_GRID, 0);
        assert_eq!((s.c1, s.c2), (1.0, 1.0));
    }

    #[test]
    fn u_for_constant_space() {
        let sp = Space::new(SpaceSpec::Constant, 1).unwrap();
        let mut f = Filtration::new_geometric(1);
        f.apply_split(SplitSpec::cut(0, 0, 0.1)).unwrap();
        // large child has |A| = 0.9 |pp|, buddy has 0.1
        assert!((u_of(&sp, &f, 2, 2.0, 1.0).unwrap() - math::sqrt(0.1)).abs() < 1e-14);
        assert_eq!(u_of(&sp, &f, 1, 2.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn epsilon_p2_matches_multistart() {
        let sp = Space::new(SpaceSpec::Tensor(vec![2]), 1).unwrap();
        let mut f = Filtration::new_geometric(1);
        f.apply_split(SplitSpec::cut(0, 0, 0.3)).unwrap();
        let e2 = epsilon_a_p(&sp, &f, 1, 2.0).unwrap();
        let m = sp.restrict_matrix(f.atom(1).unwrap().rel.as_ref().unwrap());
        let r = search::maximize_sphere(3, 32, 3, None, |c| sp.lp_unit(&mat_vec(&m, c), 2.0, 1e-12) / sp.lp_unit(c, 2.0, 1e-12));
        assert!((e2 - math::sqrt(0.3 * r.value)).abs() < 1e-6);
        assert!(epsilon_a(&sp, &f, 1).unwrap() >= 1.0 - 1e-9);
    }

    proptest! {
        #[test]
        fn restriction_agrees_pointwise(c in prop::collection::vec(-1.0f64..1.0, 6), lo in 0.0f64..0.5, w in 0.01f64..0.5, t in 0.0f64..1.0, t2 in 0.0f64..1.0) {
            let sp = Space::new(SpaceSpec::Tensor(vec![2, 1]), 2).unwrap();
            let rel = Rect::new(vec![lo, 0.1], vec![lo + w, 0.6]);
            let rc = sp.restrict(&c, &rel);
            let x = [lo + w * t, 0.1 + 0.5 * t2];
            prop_assert!((sp.eval_local(&rc, &[t, t2]) - sp.eval_local(&c, &x)).abs() < 1e-10);
            let bt = sp.to_bernstein(&c);
            prop_assert!((bt.eval(&x) - sp.eval_local(&c, &x)).abs() < 1e-12);
            let back = sp.from_bernstein(&bt);
            for (a, b) in back.iter().zip(&c) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn ring_integral_is_outer_minus_inner(c in prop::collection::vec(-1.0f64..1.0, 4), lo in 0.05f64..0.4, w in 0.05f64..0.5) {
            let sp = Space::new(SpaceSpec::Tensor(vec![1, 1]), 2).unwrap();
            let inner = Rect::new(vec![lo, lo], vec![lo + w, lo + w]);
            let ring = sp.lp_ring(&c, &inner, 2.0, 1e-12);
            let direct = sp.lp_unit(&c, 2.0, 1e-12) - sp.lp_box(&c, &inner, 2.0, 1e-12);
            prop_assert!((ring - direct).abs() < 1e-12);
            let ring4 = sp.lp_ring(&c, &inner, 4.0, 1e-12);
            let direct4 = sp.lp_unit(&c, 4.0, 1e-12) - sp.lp_box(&c, &inner, 4.0, 1e-12);
            prop_assert!((ring4 - direct4).abs() < 1e-12);
        }
    }
}
