//! Endpoint Hermite projections `H_{m0,m1}`, the ring-adapted chains `U_m`,
//! their tensor products, the inclusion–exclusion operator `W_M`, and
//! measurements of Bernstein-basis stability on rings.
//!
//! Operators act on normalized Bernstein coefficients of degree `r` on
//! `[0,1]` (tensor coefficients in row-major order, axis 0 slowest).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_traits::{One, Zero};

use crate::bernstein::{self, BTensor};
use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::math;
use crate::partition::Rect;
use crate::polyspace::{slabs, DEFAULT_TOL};
use crate::quadrature::GaussLegendre;
use crate::search;

/// Dense exact matrix, row-major rows.
pub type RMat = Vec<Vec<Rational>>;

fn binom(n: usize, k: usize) -> Rational {
    exact::from_int(num_integer::binomial(n as i64, k as i64))
}

fn falling(i: usize, j: usize) -> Rational {
    // i (i-1) ... (i-j+1)
    if j > i {
        return Rational::zero();
    }
    exact::from_int(((i - j + 1)..=i).map(|x| x as i64).product::<i64>().max(1))
}

pub fn r_identity(n: usize) -> RMat {
    (0..n).map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect()).collect()
}

pub fn r_mul(a: &RMat, b: &RMat) -> RMat {
    let (n, k, m) = (a.len(), b.len(), b.first().map_or(0, |r| r.len()));
    let mut out = vec![vec![Rational::zero(); m]; n];
    for i in 0..n {
        for t in 0..k {
            if a[i][t].is_zero() {
                continue;
            }
            for j in 0..m {
                if !b[t][j].is_zero() {
                    out[i][j] += &a[i][t] * &b[t][j];
                }
            }
        }
    }
    out
}

pub fn r_sub(a: &RMat, b: &RMat) -> RMat {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(u, v)| u - v).collect()).collect()
}

pub fn r_kron(a: &RMat, b: &RMat) -> RMat {
    let (ar, ac) = (a.len(), a[0].len());
    let (br, bc) = (b.len(), b[0].len());
    let mut out = vec![vec![Rational::zero(); ac * bc]; ar * br];
    for i in 0..ar {
        for j in 0..ac {
            if a[i][j].is_zero() {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[i * br + k][j * bc + l] = &a[i][j] * &b[k][l];
                }
            }
        }
    }
    out
}

pub fn r_to_f64(a: &RMat) -> Vec<f64> {
    a.iter().flat_map(|r| r.iter().map(exact::to_f64)).collect()
}

pub fn r_is_zero(a: &RMat) -> bool {
    a.iter().all(|r| r.iter().all(|x| x.is_zero()))
}

/// Solves `a x = b` exactly; `None` if `a` is singular.
pub fn r_solve(mut a: RMat, mut b: RMat) -> Option<RMat> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).find(|&i| !a[i][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = Rational::one() / &a[col][col];
        for j in 0..n {
            a[col][j] = &a[col][j] * &inv;
        }
        for j in 0..b[col].len() {
            b[col][j] = &b[col][j] * &inv;
        }
        for i in 0..n {
            if i == col || a[i][col].is_zero() {
                continue;
            }
            let f = a[i][col].clone();
            for j in 0..n {
                let v = &f * &a[col][j];
                a[i][j] -= v;
            }
            for j in 0..b[col].len() {
                let v = &f * &b[col][j];
                b[i][j] -= v;
            }
        }
    }
    Some(b)
}

/// `T[k][i]`: monomial coefficient `t^k` of the normalized Bernstein polynomial `b_{i,r}`.
pub fn bernstein_to_monomial(r: usize) -> RMat {
    let mut t = vec![vec![Rational::zero(); r + 1]; r + 1];
    for i in 0..=r {
        for k in i..=r {
            let s = binom(r, i) * binom(r - i, k - i);
            t[k][i] = if (k - i) % 2 == 0 { s } else { -s };
        }
    }
    t
}

/// Inverse of [`bernstein_to_monomial`]: `t^k = Σ_{i≥k} C(i,k)/C(r,k) b_i`.
pub fn monomial_to_bernstein(r: usize) -> RMat {
    let mut t = vec![vec![Rational::zero(); r + 1]; r + 1];
    for k in 0..=r {
        for i in k..=r {
            t[i][k] = binom(i, k) / binom(r, k);
        }
    }
    t
}

/// `H_{m0,m1}` as a map from monomial coefficients of degree `≤ r` to monomial
/// coefficients of degree `≤ m0 + m1 - 1` (padded to length `r + 1`).
pub fn hermite_monomial(m0: usize, m1: usize, r: usize) -> Result<RMat> {
    let m = m0 + m1;
    if m == 0 {
        return Err(Error::InvalidParameter("Hermite projection needs m0 + m1 >= 1".into()));
    }
    if m > r + 1 {
        return Err(Error::InvalidParameter(format!("m0 + m1 = {m} exceeds r + 1 = {}", r + 1)));
    }
    // right-hand sides per input monomial x^k: derivative data at 0 and 1
    let mut out = vec![vec![Rational::zero(); r + 1]; r + 1];
    // g_i = f^{(i)}(0)/i! for i < m0, i.e. copies the low monomials
    for i in 0..m0 {
        out[i][i] = Rational::one();
    }
    if m1 > 0 {
        // Σ_{i=m0}^{m-1} g_i fall(i,j) = f^{(j)}(1) - Σ_{i<m0} g_i fall(i,j), j < m1
        let a: RMat = (0..m1).map(|j| (m0..m).map(|i| falling(i, j)).collect()).collect();
        let b: RMat = (0..m1)
            .map(|j| (0..=r).map(|k| if k < m0 { Rational::zero() } else { falling(k, j) }).collect())
            .collect();
        let sol = r_solve(a, b).expect("Hermite system is nonsingular");
        for (row, i) in (m0..m).enumerate() {
            out[i] = sol[row].clone();
        }
    }
    Ok(out)
}

/// `H_{m0,m1}` on normalized Bernstein coefficients of degree `r`.
pub fn hermite_bernstein(m0: usize, m1: usize, r: usize) -> Result<RMat> {
    let h = hermite_monomial(m0, m1, r)?;
    Ok(r_mul(&monomial_to_bernstein(r), &r_mul(&h, &bernstein_to_monomial(r))))
}

/// Applies `H_{m0,m1}` to a univariate polynomial of degree `≤ m0 + m1`;
/// the result is elevated back to the input degree.
pub fn hermite_h(m0: usize, m1: usize, f: &BTensor) -> Result<BTensor> {
    if f.dim() != 1 {
        return Err(Error::InvalidParameter("hermite_h needs a univariate polynomial".into()));
    }
    let r = f.degree[0];
    let h = r_to_f64(&hermite_bernstein(m0, m1, r)?);
    Ok(BTensor::new(vec![r], mat_vec(&h, &f.coeffs)))
}

/// `argmin_j |R_-|^{j+1/p} + |R_+|^{m-j+1/p}`, ties to the smallest `j`.
pub fn choose_j(minus: f64, plus: f64, m: usize, p: f64) -> usize {
    let val = |j: usize| math::pow(minus, j as f64 + 1.0 / p) + math::pow(plus, (m - j) as f64 + 1.0 / p);
    let mut best = 0;
    let mut bv = val(0);
    for j in 1..=m {
        let v = val(j);
        if v < bv {
            best = j;
            bv = v;
        }
    }
    best
}

/// The chain `U_0, ..., U_r` for one axis of a ring `[0,1] \ J`,
/// `J = (minus, 1 - plus)`.
#[derive(Clone, Debug)]
pub struct ProjChain {
    pub r: usize,
    pub minus: f64,
    pub plus: f64,
    pub p: f64,
    /// `js[ℓ-1]` is the `j` of `H_ℓ = H_{j, ℓ-j}`.
    pub js: Vec<usize>,
    pub exact: Vec<RMat>,
    pub ops: Vec<Vec<f64>>,
}

pub fn build_u(minus: f64, plus: f64, p: f64, r: usize) -> Result<ProjChain> {
    if !(minus >= 0.0 && plus >= 0.0 && minus + plus <= 1.0) {
        return Err(Error::InvalidParameter(format!("ring sides ({minus}, {plus}) are not in [0,1]")));
    }
    let js: Vec<usize> = (1..=r).map(|l| choose_j(minus, plus, l, p)).collect();
    let mut exact = vec![r_identity(r + 1); r + 1];
    // U_m = H_{m+1} U_{m+1}
    for m in (0..r).rev() {
        let l = m + 1;
        let h = hermite_bernstein(js[l - 1], l - js[l - 1], r)?;
        exact[m] = r_mul(&h, &exact[m + 1]);
    }
    let ops = exact.iter().map(r_to_f64).collect();
    Ok(ProjChain { r, minus, plus, p, js, exact, ops })
}

/// Per-axis chains for a ring `[0,1]^d \ J` (`J` relative to the outer box).
#[derive(Clone, Debug)]
pub struct TensorChain {
    pub inner: Rect,
    pub axes: Vec<ProjChain>,
}

impl TensorChain {
    pub fn degree(&self) -> Vec<usize> {
        self.axes.iter().map(|c| c.r).collect()
    }

    pub fn dim(&self) -> usize {
        bernstein::tensor_len(&self.degree())
    }

    fn check(&self, m: &[usize]) -> Result<()> {
        if m.len() != self.axes.len() || m.iter().zip(&self.axes).any(|(mi, c)| *mi > c.r) {
            return Err(Error::InvalidParameter(format!("multi-degree {m:?} is not below {:?}", self.degree())));
        }
        Ok(())
    }

    pub fn op_exact(&self, m: &[usize]) -> Result<RMat> {
        self.check(m)?;
        let mut out = self.axes[0].exact[m[0]].clone();
        for (c, &mi) in self.axes.iter().zip(m).skip(1) {
            out = r_kron(&out, &c.exact[mi]);
        }
        Ok(out)
    }

    pub fn op(&self, m: &[usize]) -> Result<Vec<f64>> {
        self.check(m)?;
        let mut out = self.axes[0].ops[m[0]].clone();
        let mut n = self.axes[0].r + 1;
        for (c, &mi) in self.axes.iter().zip(m).skip(1) {
            out = kron(&out, n, &c.ops[mi], c.r + 1);
            n *= c.r + 1;
        }
        Ok(out)
    }
}

pub fn tensor_u(inner: &Rect, p: f64, r: &[usize]) -> Result<TensorChain> {
    if inner.dim() != r.len() {
        return Err(Error::InvalidParameter(format!("ring has dimension {} but {} degrees were given", inner.dim(), r.len())));
    }
    let axes = (0..r.len())
        .map(|s| build_u(inner.lo[s].max(0.0), (1.0 - inner.hi[s]).max(0.0), p, r[s]))
        .collect::<Result<Vec<_>>>()?;
    Ok(TensorChain { inner: inner.clone(), axes })
}

fn kron(a: &[f64], na: usize, b: &[f64], nb: usize) -> Vec<f64> {
    let n = na * nb;
    let mut out = vec![0.0; n * n];
    for i in 0..na {
        for j in 0..na {
            let x = a[i * na + j];
            if x == 0.0 {
                continue;
            }
            for k in 0..nb {
                for l in 0..nb {
                    out[(i * nb + k) * n + j * nb + l] = x * b[k * nb + l];
                }
            }
        }
    }
    out
}

fn mat_vec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..m.len() / n).map(|i| m[i * n..(i + 1) * n].iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn min_tuple(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().zip(b).map(|(x, y)| *x.min(y)).collect()
}

/// `(sign, m_B)` for every nonempty `B ⊂ M`.
pub fn w_terms(m: &[Vec<usize>]) -> Result<Vec<(i64, Vec<usize>)>> {
    if m.is_empty() {
        return Err(Error::InvalidParameter("W_M needs a nonempty set M".into()));
    }
    if m.len() > 16 {
        return Err(Error::InvalidParameter("W_M supports at most 16 multi-degrees".into()));
    }
    let mut out = Vec::new();
    for mask in 1u32..(1 << m.len()) {
        let mut mb: Option<Vec<usize>> = None;
        for (j, t) in m.iter().enumerate() {
            if mask & (1 << j) != 0 {
                mb = Some(match mb {
                    None => t.clone(),
                    Some(x) => min_tuple(&x, t),
                });
            }
        }
        let sign = if mask.count_ones() % 2 == 1 { 1 } else { -1 };
        out.push((sign, mb.expect("nonempty mask")));
    }
    Ok(out)
}

/// `W_M = Σ_{∅≠B} (-1)^{|B|+1} U_{m_B}`, exact.
pub fn build_w_exact(tc: &TensorChain, m: &[Vec<usize>]) -> Result<RMat> {
    let n = tc.dim();
    let mut out = vec![vec![Rational::zero(); n]; n];
    for (sign, mb) in w_terms(m)? {
        let u = tc.op_exact(&mb)?;
        for i in 0..n {
            for j in 0..n {
                if sign > 0 {
                    out[i][j] += &u[i][j];
                } else {
                    out[i][j] -= &u[i][j];
                }
            }
        }
    }
    Ok(out)
}

pub fn build_w(tc: &TensorChain, m: &[Vec<usize>]) -> Result<Vec<f64>> {
    let n = tc.dim();
    let mut out = vec![0.0; n * n];
    for (sign, mb) in w_terms(m)? {
        let u = tc.op(&mb)?;
        out.iter_mut().zip(&u).for_each(|(o, x)| *o += sign as f64 * x);
    }
    Ok(out)
}

/// Bernstein coefficients (degree `r`) of the monomials `t^k`, `k ≤ m`.
pub fn monomial_basis(r: &[usize], m: &[usize]) -> Vec<Vec<Rational>> {
    let conv: Vec<RMat> = r.iter().map(|&ri| monomial_to_bernstein(ri)).collect();
    let mut out = Vec::new();
    let mut k = vec![0usize; r.len()];
    loop {
        // tensor product of the columns k_s of the per-axis conversions
        let mut v = vec![Rational::one()];
        for (s, c) in conv.iter().enumerate() {
            let col: Vec<Rational> = c.iter().map(|row| row[k[s]].clone()).collect();
            v = v.iter().flat_map(|a| col.iter().map(move |b| a * b)).collect();
        }
        out.push(v);
        let mut s = r.len();
        loop {
            if s == 0 {
                return out;
            }
            s -= 1;
            if k[s] < m[s] {
                k[s] += 1;
                k[s + 1..].iter_mut().for_each(|x| *x = 0);
                break;
            }
        }
    }
}

/// `max |W u - u|` over the monomial bases of every `P_{m^(j)}`.
pub fn w_identity_residual(tc: &TensorChain, m: &[Vec<usize>]) -> Result<f64> {
    let w = build_w(tc, m)?;
    let r = tc.degree();
    let mut worst = 0.0f64;
    for mj in m {
        for v in monomial_basis(&r, mj) {
            let v: Vec<f64> = v.iter().map(exact::to_f64).collect();
            let wv = mat_vec(&w, &v);
            let scale = v.iter().fold(1.0f64, |a, x| a.max(math::abs(*x)));
            for (a, b) in wv.iter().zip(&v) {
                worst = worst.max(math::abs(a - b) / scale);
            }
        }
    }
    Ok(worst)
}

/// Whether `W u = u` exactly on every `P_{m^(j)}`.
pub fn w_identity_exact(tc: &TensorChain, m: &[Vec<usize>]) -> Result<bool> {
    let w = build_w_exact(tc, m)?;
    let r = tc.degree();
    for mj in m {
        for v in monomial_basis(&r, mj) {
            for (i, row) in w.iter().enumerate() {
                let s: Rational = row.iter().zip(&v).map(|(a, b)| a * b).sum();
                if s != v[i] {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Boxes of a region in the unit cube.
#[derive(Clone, Debug)]
pub struct Region {
    pub boxes: Vec<Rect>,
}

impl Region {
    pub fn ring(inner: &Rect) -> Self {
        Region { boxes: slabs(inner) }
    }

    pub fn cube(d: usize) -> Self {
        Region { boxes: vec![Rect::unit(d)] }
    }

    /// `∫_region |u|^p` for a Bernstein tensor on the unit cube.
    pub fn lp_pow(&self, t: &BTensor, p: f64) -> f64 {
        self.boxes.iter().map(|b| t.restrict(&b.lo, &b.hi).integrate_abs_pow(p, DEFAULT_TOL) * b.measure()).sum()
    }

    pub fn lp_norm(&self, t: &BTensor, p: f64) -> f64 {
        math::pow(self.lp_pow(t, p), 1.0 / p)
    }

    /// Gram matrix of the normalized Bernstein basis of degree `r` on the region.
    pub fn gram(&self, r: &[usize]) -> Vec<f64> {
        let n = bernstein::tensor_len(r);
        let mut g = vec![0.0; n * n];
        for b in &self.boxes {
            let mut acc = vec![1.0];
            let mut size = 1;
            for (s, &rs) in r.iter().enumerate() {
                let g1 = gram_1d(rs, b.lo[s], b.hi[s]);
                acc = kron(&acc, size, &g1, rs + 1);
                size *= rs + 1;
            }
            g.iter_mut().zip(&acc).for_each(|(x, y)| *x += y);
        }
        g
    }
}

/// `∫_lo^hi b_i b_j` for normalized Bernstein polynomials of degree `r`.
pub fn gram_1d(r: usize, lo: f64, hi: f64) -> Vec<f64> {
    let n = r + 1;
    let g = GaussLegendre::new(n);
    let mut out = vec![0.0; n * n];
    let mut buf = Vec::new();
    let h = hi - lo;
    for (&x, &w) in g.nodes.iter().zip(&g.weights) {
        bernstein::basis_values(r, lo + h * x, &mut buf);
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] += w * h * buf[i] * buf[j];
            }
        }
    }
    out
}

fn dmat(m: &[f64], n: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, m)
}

/// `sup ‖Op f‖_{L^2(Ω)} / ‖f‖_{L^2(Ω)}` with the leading eigenvector (in
/// Bernstein coordinates), from a Jacobi-scaled generalized eigenproblem.
pub fn op_norm_l2(op: &[f64], gram: &[f64], n: usize) -> (f64, Vec<f64>) {
    let d: Vec<f64> = (0..n).map(|i| math::sqrt(gram[i * n + i].max(f64::MIN_POSITIVE))).collect();
    let g = dmat(gram, n);
    let u = dmat(op, n);
    let dinv = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, d.iter().map(|x| 1.0 / x)));
    let gh = &dinv * &g * &dinv;
    let a = &dinv * u.transpose() * &g * &u * &dinv;
    let ch = match gh.clone().cholesky() {
        Some(c) => c,
        None => return (f64::INFINITY, vec![0.0; n]),
    };
    let l = ch.l();
    let linv = l.clone().try_inverse().expect("Cholesky factor is invertible");
    let mut m = &linv * a * linv.transpose();
    m = (&m + m.transpose()) * 0.5;
    let eig = m.symmetric_eigen();
    let (k, &lmax) = eig.eigenvalues.iter().enumerate().fold((0, &f64::NEG_INFINITY), |b, x| if x.1 > b.1 { x } else { b });
    let y = eig.eigenvectors.column(k).into_owned();
    let b = linv.transpose() * y;
    let c: Vec<f64> = (0..n).map(|i| b[i] / d[i]).collect();
    (math::sqrt(lmax.max(0.0)), c)
}

/// `sup ‖Op f‖_{L^p(Ω)} / ‖f‖_{L^p(Ω)}`: exact for `p = 2`, a multistart
/// lower estimate otherwise (seeded with the `L^2` maximizer).
pub fn op_norm(op: &[f64], region: &Region, degree: &[usize], p: f64, starts: usize, seed: u64) -> f64 {
    let n = bernstein::tensor_len(degree);
    let gram = region.gram(degree);
    let (v2, hint) = op_norm_l2(op, &gram, n);
    if p == 2.0 {
        return v2;
    }
    let d: Vec<f64> = (0..n).map(|i| math::sqrt(gram[i * n + i].max(f64::MIN_POSITIVE))).collect();
    let hint_b: Vec<f64> = hint.iter().zip(&d).map(|(c, s)| c * s).collect();
    let obj = |b: &[f64]| {
        let c: Vec<f64> = b.iter().zip(&d).map(|(x, s)| x / s).collect();
        let den = region.lp_norm(&BTensor::new(degree.to_vec(), c.clone()), p);
        if !(den > 0.0) {
            return 0.0;
        }
        region.lp_norm(&BTensor::new(degree.to_vec(), mat_vec(op, &c)), p) / den
    };
    search::maximize_sphere(n, starts, seed, Some(&hint_b), obj).value
}

/// Ring norm and cube norm of `U_m` for every `m`.
#[derive(Clone, Debug)]
pub struct ChainNorms {
    pub m: Vec<usize>,
    pub on_ring: f64,
    pub on_cube: f64,
}

pub fn chain_norms(tc: &TensorChain, p: f64, starts: usize, seed: u64) -> Result<Vec<ChainNorms>> {
    let r = tc.degree();
    let ring = Region::ring(&tc.inner);
    let cube = Region::cube(r.len());
    let mut out = Vec::new();
    for m in multi_range(&r) {
        let op = tc.op(&m)?;
        out.push(ChainNorms {
            on_ring: op_norm(&op, &ring, &r, p, starts, seed),
            on_cube: op_norm(&op, &cube, &r, p, starts, seed),
            m,
        });
    }
    Ok(out)
}

/// All `m` with `0 ≤ m ≤ r` in row-major order.
pub fn multi_range(r: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut k = vec![0usize; r.len()];
    loop {
        out.push(k.clone());
        let mut s = r.len();
        loop {
            if s == 0 {
                return out;
            }
            s -= 1;
            if k[s] < r[s] {
                k[s] += 1;
                k[s + 1..].iter_mut().for_each(|x| *x = 0);
                break;
            }
        }
    }
}

/// `Σ_B ‖u_B χ_R‖_p / ‖u χ_R‖_p` for the components `u_B = ±U_{m_B} u`.
pub fn w_component_ratio(tc: &TensorChain, m: &[Vec<usize>], u: &[f64], p: f64) -> Result<f64> {
    let r = tc.degree();
    let ring = Region::ring(&tc.inner);
    let base = ring.lp_norm(&BTensor::new(r.clone(), u.to_vec()), p);
    let mut s = 0.0;
    for (_, mb) in w_terms(m)? {
        let ub = mat_vec(&tc.op(&mb)?, u);
        s += ring.lp_norm(&BTensor::new(r.clone(), ub), p);
    }
    Ok(if base > 0.0 { s / base } else { 0.0 })
}

/// `‖b_m χ_Ω‖_p` for each basis tensor, from per-axis integrals.
pub fn basis_norms(region: &Region, degree: &[usize], p: f64) -> Vec<f64> {
    let n = bernstein::tensor_len(degree);
    let mut pows = vec![0.0; n];
    for b in &region.boxes {
        let mut acc = vec![1.0];
        for (s, &r) in degree.iter().enumerate() {
            let one: Vec<f64> = (0..=r)
                .map(|k| {
                    let mut c = vec![0.0; r + 1];
                    c[k] = 1.0;
                    let t = BTensor::new(vec![r], c).restrict(&[b.lo[s]], &[b.hi[s]]);
                    t.integrate_abs_pow(p, DEFAULT_TOL) * (b.hi[s] - b.lo[s])
                })
                .collect();
            acc = acc.iter().flat_map(|a| one.iter().map(move |x| a * x)).collect();
        }
        pows.iter_mut().zip(&acc).for_each(|(x, y)| *x += y);
    }
    pows.into_iter().map(|x| math::pow(x, 1.0 / p)).collect()
}

/// `Σ |a_m| ‖B_m χ_R‖_p / ‖Σ a_m B_m χ_R‖_p` with `a_m = b_m / ‖B_m χ_R‖_p`.
pub fn stability_ratio(region: &Region, degree: &[usize], b: &[f64], norms: &[f64], p: f64) -> f64 {
    let c: Vec<f64> = b.iter().zip(norms).map(|(x, n)| if *n > 0.0 { x / n } else { 0.0 }).collect();
    let den = region.lp_norm(&BTensor::new(degree.to_vec(), c), p);
    let num: f64 = b.iter().zip(norms).filter(|(_, n)| **n > 0.0).map(|(x, _)| math::abs(*x)).sum();
    if den > 0.0 {
        num / den
    } else {
        f64::INFINITY
    }
}

/// `G_δ(m,n) = δ^{-(m+n+1)} ∫_0^δ x^{m+n}(1-x)^{2r-m-n} dx`.
pub fn hilbert_gram(r: usize, delta: f64) -> Vec<f64> {
    let n = r + 1;
    let g = GaussLegendre::new(r + 1);
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = g.integrate(0.0, 1.0, |s| math::powi(s, (i + j) as i32) * math::powi(1.0 - delta * s, (2 * r - i - j) as i32));
        }
    }
    out
}

/// Smallest admissible constant in `Σ|b_m|²‖B_{m,δ}‖² ≤ C ‖Σ b_m B_{m,δ}‖²` on `[0,δ]`.
pub fn parallelity_constant(r: usize, delta: f64) -> f64 {
    let n = r + 1;
    let g = hilbert_gram(r, delta);
    let s: Vec<f64> = (0..n).map(|i| 1.0 / math::sqrt(g[i * n + i])).collect();
    let mut m = dmat(&g, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] *= s[i] * s[j];
        }
    }
    let lmin = m.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    1.0 / lmin
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn mono(c: &[i64], r: usize) -> Vec<Rational> {
        let mut v: Vec<Rational> = c.iter().map(|x| exact::from_int(*x)).collect();
        v.resize(r + 1, Rational::zero());
        v
    }

    fn apply(m: &RMat, v: &[Rational]) -> Vec<Rational> {
        m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    #[test]
    fn hermite_small_cases() {
        // H_{1,1} x^2 = x
        let h = hermite_monomial(1, 1, 2).unwrap();
        assert_eq!(apply(&h, &mono(&[0, 0, 1], 2)), mono(&[0, 1], 2));
        // H_{0,1} f = f(1), H_{1,0} f = f(0)
        let f = mono(&[3, -1, 2], 2);
        assert_eq!(apply(&hermite_monomial(0, 1, 2).unwrap(), &f), mono(&[4], 2));
        assert_eq!(apply(&hermite_monomial(1, 0, 2).unwrap(), &f), mono(&[3], 2));
        assert!(hermite_monomial(0, 0, 2).is_err());
    }

    #[test]
    fn hermite_fixes_lower_degree() {
        for m in 1..=4 {
            for j in 0..=m {
                let h = hermite_monomial(j, m - j, 4).unwrap();
                for k in 0..m {
                    let mut e = vec![0i64; k + 1];
                    e[k] = 1;
                    assert_eq!(apply(&h, &mono(&e, 4)), mono(&e, 4));
                }
            }
        }
    }

    #[test]
    fn hermite_h_on_btensor() {
        // x^2 in degree-2 Bernstein coefficients is (0, 0, 1)
        let f = BTensor::new(vec![2], vec![0.0, 0.0, 1.0]);
        let g = hermite_h(1, 1, &f).unwrap();
        for &t in &[0.0, 0.3, 1.0] {
            assert!((g.eval(&[t]) - t).abs() < 1e-14);
        }
    }

    #[test]
    fn choose_j_cases() {
        assert_eq!(choose_j(0.01, 0.5, 2, 2.0), 0);
        assert_eq!(choose_j(0.3, 0.0, 3, 2.0), 3);
        for m in [2usize, 4, 6] {
            assert_eq!(choose_j(0.2, 0.2, m, 1.5), m / 2);
        }
        // exhaustive scan agrees
        let v = |j: usize| 0.1f64.powf(j as f64 + 0.5) + 0.7f64.powf((3 - j) as f64 + 0.5);
        let best = (0..=3).min_by(|a, b| v(*a).total_cmp(&v(*b))).unwrap();
        assert_eq!(choose_j(0.1, 0.7, 3, 2.0), best);
    }

    #[test]
    fn basis_conversions_are_inverse() {
        for r in 0..6 {
            assert_eq!(r_mul(&monomial_to_bernstein(r), &bernstein_to_monomial(r)), r_identity(r + 1));
        }
    }

    #[test]
    fn chain_properties_exact() {
        let c = build_u(1e-6, 0.3, 2.0, 3).unwrap();
        assert_eq!(c.exact[3], r_identity(4));
        for m in 0..=3 {
            for k in 0..=3 {
                let lhs = r_mul(&c.exact[m], &c.exact[k]);
                assert_eq!(lhs, c.exact[m.min(k)]);
                assert_eq!(r_mul(&c.exact[k], &c.exact[m]), lhs);
            }
            for v in monomial_basis(&[3], &[m]) {
                assert_eq!(apply(&c.exact[m], &v), v);
            }
        }
        // U_0 maps onto constants: all output Bernstein coefficients agree
        let out = apply(&c.exact[0], &mono(&[1, 2, 3, 4], 3));
        assert!(out.iter().all(|x| *x == out[0]));
    }

    #[test]
    fn w_examples() {
        let inner = Rect::new(vec![0.1, 0.2], vec![0.95, 0.6]);
        let tc = tensor_u(&inner, 2.0, &[1, 1]).unwrap();
        let m = vec![vec![1, 0], vec![0, 1]];
        let w = build_w_exact(&tc, &m).unwrap();
        let want = r_sub(&r_mul(&r_identity(4), &tc.op_exact(&[1, 0]).unwrap()), &r_sub(&tc.op_exact(&[0, 0]).unwrap(), &tc.op_exact(&[0, 1]).unwrap()));
        assert_eq!(w, want);
        assert!(w_identity_exact(&tc, &m).unwrap());
        assert!(w_identity_residual(&tc, &m).unwrap() < 1e-12);
        let single = build_w_exact(&tc, &[vec![1, 1]]).unwrap();
        assert_eq!(single, r_identity(4));
        assert!(build_w(&tc, &[]).is_err());
        // u = a x + b y + c
        let u = vec![0.5, 1.2, -0.3, 0.4];
        let bt = BTensor::new(vec![1, 1], u.clone());
        let lin = |x: f64, y: f64| bt.eval(&[x, y]);
        let (a, b, c0) = (lin(1.0, 0.0) - lin(0.0, 0.0), lin(0.0, 1.0) - lin(0.0, 0.0), lin(0.0, 0.0));
        let v: Vec<f64> = [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)].iter().map(|(x, y)| a * x + b * y + c0).collect();
        let wv = mat_vec(&build_w(&tc, &m).unwrap(), &v);
        for (x, y) in wv.iter().zip(&v) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(w_component_ratio(&tc, &m, &v, 2.0).unwrap() >= 1.0 - 1e-12);
    }

    #[test]
    fn identity_has_unit_norm() {
        let inner = Rect::new(vec![0.001], vec![0.999]);
        let tc = tensor_u(&inner, 2.0, &[2]).unwrap();
        let ring = Region::ring(&inner);
        let v = op_norm(&tc.op(&[2]).unwrap(), &ring, &[2], 2.0, 4, 0);
        assert!((v - 1.0).abs() < 1e-8);
        let v3 = op_norm(&tc.op(&[2]).unwrap(), &ring, &[2], 3.0, 4, 0);
        assert!((v3 - 1.0).abs() < 1e-6);
        // a projection has norm at least one
        assert!(op_norm(&tc.op(&[0]).unwrap(), &ring, &[2], 2.0, 4, 0) >= 1.0 - 1e-9);
    }

    #[test]
    fn l2_norm_matches_search() {
        let inner = Rect::new(vec![0.05], vec![0.7]);
        let tc = tensor_u(&inner, 2.0, &[2]).unwrap();
        let ring = Region::ring(&inner);
        let op = tc.op(&[1]).unwrap();
        let exact = op_norm(&op, &ring, &[2], 2.0, 4, 0);
        let d = basis_norms(&ring, &[2], 2.0);
        let searched = search::maximize_sphere(3, 16, 1, None, |b: &[f64]| {
            let c: Vec<f64> = b.iter().zip(&d).map(|(x, s)| x / s).collect();
            ring.lp_norm(&BTensor::new(vec![2], mat_vec(&op, &c)), 2.0) / ring.lp_norm(&BTensor::new(vec![2], c), 2.0)
        });
        assert!((searched.value - exact).abs() < 1e-6 * exact);
    }

    #[test]
    fn hilbert_limit() {
        let r = 3;
        let g = hilbert_gram(r, 1e-4);
        for i in 0..=r {
            for j in 0..=r {
                assert!((g[i * (r + 1) + j] - 1.0 / (i + j + 1) as f64).abs() < 1e-3);
            }
        }
        assert!((g[0] - 1.0).abs() < 1e-3);
        let c = parallelity_constant(r, 1e-4);
        assert!(c.is_finite() && c >= 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn tensor_chain_commutes(seed in 0u64..10_000) {
            let mut rng = search::rng(seed);
            let d = rng.gen_range(1..=3);
            let r: Vec<usize> = (0..d).map(|_| rng.gen_range(0..=2)).collect();
            let lo: Vec<f64> = (0..d).map(|_| math::pow(10.0, -6.0 * rng.gen::<f64>()) * 0.5).collect();
            let hi: Vec<f64> = lo.iter().map(|l| 1.0 - math::pow(10.0, -6.0 * rng.gen::<f64>()) * (1.0 - l) * 0.99).collect();
            let tc = tensor_u(&Rect::new(lo, hi), 2.0, &r).unwrap();
            let ms = multi_range(&r);
            let a = &ms[rng.gen_range(0..ms.len())];
            let b = &ms[rng.gen_range(0..ms.len())];
            let ua = tc.op(a).unwrap();
            let ub = tc.op(b).unwrap();
            let n = tc.dim();
            let umin = tc.op(&min_tuple(a, b)).unwrap();
            let mut ab = vec![0.0; n * n];
            let mut ba = vec![0.0; n * n];
            for i in 0..n { for k in 0..n { for j in 0..n {
                ab[i * n + j] += ua[i * n + k] * ub[k * n + j];
                ba[i * n + j] += ub[i * n + k] * ua[k * n + j];
            }}}
            for i in 0..n * n {
                prop_assert!((ab[i] - umin[i]).abs() < 1e-10);
                prop_assert!((ba[i] - umin[i]).abs() < 1e-10);
            }
        }

        #[test]
        fn w_identity_random(seed in 0u64..10_000) {
            let mut rng = search::rng(seed);
            let d = rng.gen_range(1..=3);
            let r: Vec<usize> = (0..d).map(|_| rng.gen_range(0..=3)).collect();
            let lo: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..0.4)).collect();
            let hi: Vec<f64> = (0..d).map(|_| rng.gen_range(0.6..1.0)).collect();
            let tc = tensor_u(&Rect::new(lo, hi), 1.5, &r).unwrap();
            let size = rng.gen_range(1..=4);
            let m: Vec<Vec<usize>> = (0..size).map(|_| r.iter().map(|&ri| rng.gen_range(0..=ri)).collect()).collect();
            prop_assert!(w_identity_residual(&tc, &m).unwrap() < 1e-9);
        }

        #[test]
        fn stability_ratio_at_least_one(seed in 0u64..10_000) {
            let mut rng = search::rng(seed);
            let inner = Rect::new(vec![rng.gen_range(0.0..0.3)], vec![rng.gen_range(0.7..1.0)]);
            let region = Region::ring(&inner);
            let norms = basis_norms(&region, &[2], 3.0);
            let b = search::unit_vector(&mut rng, 3);
            prop_assert!(stability_ratio(&region, &[2], &b, &norms, 3.0) >= 1.0 - 1e-9);
        }
    }
}
