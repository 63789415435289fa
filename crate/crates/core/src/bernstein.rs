//! Tensor-product Bernstein polynomials on the unit cube.
//!
//! Coefficients refer to the normalized basis `b_{i,r}(t) = C(r,i) t^i (1-t)^(r-i)`,
//! stored row-major with axis 0 slowest. Integration of `|u|^p` and the sup norm
//! are computed on the cube; callers rescale by the measure of the physical box.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::math;
use crate::quadrature::GaussLegendre;

#[derive(Clone, Debug, PartialEq)]
pub struct BTensor {
    pub degree: Vec<usize>,
    pub coeffs: Vec<f64>,
}

pub fn tensor_len(degree: &[usize]) -> usize {
    degree.iter().map(|r| r + 1).product()
}

/// Values of `b_{0,r}(t), ..., b_{r,r}(t)`.
pub fn basis_values(r: usize, t: f64, out: &mut Vec<f64>) {
    out.clear();
    let s = 1.0 - t;
    for i in 0..=r {
        out.push(math::binomial(r, i) * math::powi(t, i as i32) * math::powi(s, (r - i) as i32));
    }
}

/// Applies `mat` (`rows x shape[axis]`, row-major) along one axis of a row-major tensor.
pub fn mode_apply(data: &[f64], shape: &[usize], axis: usize, mat: &[f64], rows: usize) -> Vec<f64> {
    let n = shape[axis];
    debug_assert_eq!(mat.len(), rows * n);
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let mut out = vec![0.0; outer * rows * inner];
    for o in 0..outer {
        for i in 0..rows {
            let row = &mat[i * n..(i + 1) * n];
            let dst = &mut out[(o * rows + i) * inner..(o * rows + i + 1) * inner];
            for (k, &m) in row.iter().enumerate() {
                if m == 0.0 {
                    continue;
                }
                let src = &data[(o * n + k) * inner..(o * n + k + 1) * inner];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += m * s;
                }
            }
        }
    }
    out
}

/// de Casteljau split at `t`: coefficients of the pieces on `[0,t]` and `[t,1]`.
pub fn split_1d(c: &[f64], t: f64) -> (Vec<f64>, Vec<f64>) {
    let r = c.len() - 1;
    let mut work = c.to_vec();
    let mut left = Vec::with_capacity(r + 1);
    let mut right = vec![0.0; r + 1];
    left.push(work[0]);
    right[r] = work[r];
    for level in 1..=r {
        for i in 0..=(r - level) {
            work[i] = (1.0 - t) * work[i] + t * work[i + 1];
        }
        left.push(work[0]);
        right[r - level] = work[r - level];
    }
    (left, right)
}

/// Coefficients of the reparametrization of `c` to the subinterval `[u, v]`.
pub fn restrict_1d(c: &[f64], u: f64, v: f64) -> Vec<f64> {
    if c.len() == 1 {
        return c.to_vec();
    }
    if v > 0.0 {
        let (left, _) = split_1d(c, v);
        let (_, right) = split_1d(&left, u / v);
        right
    } else {
        let (_, right) = split_1d(c, u);
        let (left, _) = split_1d(&right, 0.0);
        left
    }
}

/// Matrix (`(r+1) x (r+1)`, row-major) of [`restrict_1d`].
pub fn restrict_matrix_1d(r: usize, u: f64, v: f64) -> Vec<f64> {
    let n = r + 1;
    let mut m = vec![0.0; n * n];
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[j] = 1.0;
        let col = restrict_1d(&e, u, v);
        for i in 0..n {
            m[i * n + j] = col[i];
        }
    }
    m
}

/// Degree elevation matrix from degree `r` to degree `s >= r` (`(s+1) x (r+1)`).
pub fn elevate_matrix_1d(r: usize, s: usize) -> Vec<f64> {
    assert!(s >= r);
    let mut m = vec![0.0; (s + 1) * (r + 1)];
    for j in 0..=s {
        for i in 0..=r {
            if j >= i && j - i <= s - r {
                m[j * (r + 1) + i] =
                    math::binomial(r, i) * math::binomial(s - r, j - i) / math::binomial(s, j);
            }
        }
    }
    m
}

struct Rule {
    weights: Vec<f64>,
    values: Vec<f64>,
}

fn rule_for(r: usize, n: usize) -> Rule {
    let g = GaussLegendre::new(n);
    let mut values = Vec::with_capacity(n * (r + 1));
    let mut buf = Vec::new();
    for &x in &g.nodes {
        basis_values(r, x, &mut buf);
        values.extend_from_slice(&buf);
    }
    Rule { weights: g.weights, values }
}

fn is_even_integer(p: f64) -> bool {
    p > 0.0 && math::round(p) == p && (p as i64) % 2 == 0
}

impl BTensor {
    pub fn new(degree: Vec<usize>, coeffs: Vec<f64>) -> Self {
        assert_eq!(tensor_len(&degree), coeffs.len());
        BTensor { degree, coeffs }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        BTensor { degree: vec![0; dim], coeffs: vec![c] }
    }

    pub fn dim(&self) -> usize {
        self.degree.len()
    }

    fn shape(&self) -> Vec<usize> {
        self.degree.iter().map(|r| r + 1).collect()
    }

    pub fn eval(&self, t: &[f64]) -> f64 {
        let mut data = self.coeffs.clone();
        let mut shape = self.shape();
        let mut buf = Vec::new();
        for axis in (0..self.dim()).rev() {
            basis_values(self.degree[axis], t[axis], &mut buf);
            data = mode_apply(&data, &shape, axis, &buf, 1);
            shape[axis] = 1;
        }
        data[0]
    }

    /// Values on the tensor grid described by per-axis value matrices.
    fn grid(&self, mats: &[&[f64]], counts: &[usize]) -> Vec<f64> {
        let mut data = self.coeffs.clone();
        let mut shape = self.shape();
        for axis in 0..self.dim() {
            data = mode_apply(&data, &shape, axis, mats[axis], counts[axis]);
            shape[axis] = counts[axis];
        }
        data
    }

    pub fn apply_axis(&self, axis: usize, mat: &[f64], new_r: usize) -> BTensor {
        let shape = self.shape();
        let coeffs = mode_apply(&self.coeffs, &shape, axis, mat, new_r + 1);
        let mut degree = self.degree.clone();
        degree[axis] = new_r;
        BTensor { degree, coeffs }
    }

    /// Reparametrization to the box `[lo, hi]` of the unit cube.
    pub fn restrict(&self, lo: &[f64], hi: &[f64]) -> BTensor {
        let mut out = self.clone();
        for axis in 0..self.dim() {
            if lo[axis] == 0.0 && hi[axis] == 1.0 || self.degree[axis] == 0 {
                continue;
            }
            let m = restrict_matrix_1d(self.degree[axis], lo[axis], hi[axis]);
            out = out.apply_axis(axis, &m, self.degree[axis]);
        }
        out
    }

    pub fn elevate(&self, degree: &[usize]) -> BTensor {
        let mut out = self.clone();
        for axis in 0..self.dim() {
            if degree[axis] != self.degree[axis] {
                let m = elevate_matrix_1d(self.degree[axis], degree[axis]);
                out = out.apply_axis(axis, &m, degree[axis]);
            }
        }
        out
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |a, &c| a.max(math::abs(c)))
    }

    fn gauss_sum(&self, p: f64, orders: &[usize]) -> f64 {
        let rules: Vec<Rule> =
            self.degree.iter().zip(orders).map(|(&r, &n)| rule_for(r, n)).collect();
        self.rule_sum(p, &rules, orders)
    }

    fn rule_sum(&self, p: f64, rules: &[Rule], orders: &[usize]) -> f64 {
        let mats: Vec<&[f64]> = rules.iter().map(|r| r.values.as_slice()).collect();
        let vals = self.grid(&mats, orders);
        let mut total = 0.0;
        let mut idx = vec![0usize; self.dim()];
        for v in vals {
            let mut w = 1.0;
            for (axis, &i) in idx.iter().enumerate() {
                w *= rules[axis].weights[i];
            }
            total += w * pow_abs(v, p);
            for axis in (0..idx.len()).rev() {
                idx[axis] += 1;
                if idx[axis] < orders[axis] {
                    break;
                }
                idx[axis] = 0;
            }
        }
        total
    }

    /// `∫_{[0,1]^d} |u|^p`, exact for even integer `p`, adaptive otherwise.
    pub fn integrate_abs_pow(&self, p: f64, tol: f64) -> f64 {
        if self.degree.iter().all(|&r| r == 0) {
            return pow_abs(self.coeffs[0], p);
        }
        if is_even_integer(p) {
            let orders: Vec<usize> = self
                .degree
                .iter()
                .map(|&r| GaussLegendre::nodes_for_degree((p as usize) * r))
                .collect();
            return self.gauss_sum(p, &orders);
        }
        if self.coeffs.len() == 2 {
            return linear_abs_pow(self.coeffs[0], self.coeffs[1], p);
        }
        if let Some(axis) = self.degree.iter().position(|&r| r == 1) {
            return self.adaptive_faces(axis, p, tol);
        }
        self.adaptive(p, tol)
    }

    fn adaptive(&self, p: f64, tol: f64) -> f64 {
        adaptive_cells(vec![self.clone()], p, tol, |ts, rules, orders| ts[0].rule_sum(p, rules, orders))
    }

    /// Integrates a degree-1 axis in closed form between its two faces and
    /// the remaining axes adaptively.
    fn adaptive_faces(&self, axis: usize, p: f64, tol: f64) -> f64 {
        let lo = self.apply_axis(axis, &[1.0, 0.0], 0);
        let hi = self.apply_axis(axis, &[0.0, 1.0], 0);
        adaptive_cells(vec![lo, hi], p, tol, |ts, rules, orders| {
            let mats: Vec<&[f64]> = rules.iter().map(|r| r.values.as_slice()).collect();
            let (va, vb) = (ts[0].grid(&mats, orders), ts[1].grid(&mats, orders));
            let mut total = 0.0;
            let mut idx = vec![0usize; orders.len()];
            for (a, b) in va.iter().zip(&vb) {
                let w: f64 = idx.iter().enumerate().map(|(ax, &i)| rules[ax].weights[i]).product();
                total += w * linear_abs_pow(*a, *b, p);
                for ax in (0..idx.len()).rev() {
                    idx[ax] += 1;
                    if idx[ax] < orders[ax] {
                        break;
                    }
                    idx[ax] = 0;
                }
            }
            total
        })
    }

    /// `sup_{[0,1]^d} |u|` by branch and bound on Bernstein coefficient hulls.
    pub fn sup_abs(&self, rel_tol: f64) -> f64 {
        if self.degree.iter().all(|&r| r == 0) {
            return math::abs(self.coeffs[0]);
        }
        let counts: Vec<usize> = self.degree.iter().map(|&r| 4 * r + 1).collect();
        let mut mats = Vec::new();
        let mut buf = Vec::new();
        for (&r, &n) in self.degree.iter().zip(&counts) {
            let mut m = Vec::with_capacity(n * (r + 1));
            for k in 0..n {
                let x = 0.5 - 0.5 * math::cos(core::f64::consts::PI * k as f64 / (n - 1).max(1) as f64);
                basis_values(r, x, &mut buf);
                m.extend_from_slice(&buf);
            }
            mats.push(m);
        }
        let refs: Vec<&[f64]> = mats.iter().map(|m| m.as_slice()).collect();
        let mut lower = self.grid(&refs, &counts).iter().fold(0.0f64, |a, &v| a.max(math::abs(v)));
        let active: Vec<usize> = (0..self.dim()).filter(|&a| self.degree[a] > 0).collect();
        let halves: Vec<(Vec<f64>, Vec<f64>)> = self
            .degree
            .iter()
            .map(|&r| (restrict_matrix_1d(r, 0.0, 0.5), restrict_matrix_1d(r, 0.5, 1.0)))
            .collect();
        let mut heap = BinaryHeap::new();
        heap.push(Cell { bound: self.max_abs_coeff(), depth: 0, t: self.clone() });
        let mut iters = 0;
        let mid = vec![0.5; self.dim()];
        while let Some(cell) = heap.pop() {
            if cell.bound <= lower * (1.0 + rel_tol) || iters > 200_000 {
                break;
            }
            iters += 1;
            lower = lower.max(corner_max(&cell.t)).max(math::abs(cell.t.eval(&mid)));
            let axis = active[cell.depth % active.len()];
            let r = cell.t.degree[axis];
            for m in [&halves[axis].0, &halves[axis].1] {
                let child = cell.t.apply_axis(axis, m, r);
                let bound = child.max_abs_coeff();
                if bound > lower * (1.0 + rel_tol) {
                    heap.push(Cell { bound, depth: cell.depth + 1, t: child });
                }
            }
        }
        lower
    }
}

fn corner_max(t: &BTensor) -> f64 {
    let d = t.dim();
    let mut best = 0.0f64;
    let strides: Vec<usize> = (0..d).map(|a| t.degree[a + 1..].iter().map(|r| r + 1).product()).collect();
    for mask in 0..(1usize << d) {
        let mut idx = 0;
        for a in 0..d {
            if mask >> a & 1 == 1 {
                idx += t.degree[a] * strides[a];
            }
        }
        best = best.max(math::abs(t.coeffs[idx]));
    }
    best
}

struct Cell {
    bound: f64,
    depth: usize,
    t: BTensor,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound.partial_cmp(&other.bound).unwrap_or(Ordering::Equal)
    }
}

/// `∫_0^1 |a (1 - t) + b t|^p dt`.
fn linear_abs_pow(a: f64, b: f64, p: f64) -> f64 {
    let (x, y) = (math::abs(a), math::abs(b));
    let q = p + 1.0;
    if a * b < 0.0 {
        return (math::pow(x, q) + math::pow(y, q)) / (q * (x + y));
    }
    let (lo, hi) = if x < y { (x, y) } else { (y, x) };
    if hi == 0.0 {
        return 0.0;
    }
    if hi - lo <= 1e-3 * hi {
        // nearly constant: expand around the midpoint instead of dividing by hi - lo
        let m = 0.5 * (lo + hi);
        let h = 0.5 * (hi - lo) / m;
        return math::pow(m, p) * (1.0 + p * (p - 1.0) * h * h / 6.0 + p * (p - 1.0) * (p - 2.0) * (p - 3.0) * h * h * h * h / 120.0);
    }
    (math::pow(hi, q) - math::pow(lo, q)) / (q * (hi - lo))
}

#[inline]
pub fn pow_abs(v: f64, p: f64) -> f64 {
    let a = math::abs(v);
    if p == 2.0 {
        a * a
    } else if p == 1.0 {
        a
    } else if a == 0.0 {
        0.0
    } else {
        math::pow(a, p)
    }
}


/// Global adaptive cubature of `sum` over tensors sharing one degree vector:
/// always bisect the cell with the largest error estimate.
fn adaptive_cells<F: Fn(&[BTensor], &[Rule], &[usize]) -> f64>(parts: Vec<BTensor>, p: f64, tol: f64, sum: F) -> f64 {
    let degree = parts[0].degree.clone();
    let base: Vec<usize> =
        degree.iter().map(|&r| if r == 0 { 1 } else { (math::ceil(p * r as f64 / 2.0) as usize + 2).max(3) }).collect();
    let fine: Vec<usize> = degree.iter().zip(&base).map(|(&r, &n)| if r == 0 { 1 } else { n + 4 }).collect();
    let rules_base: Vec<Rule> = degree.iter().zip(&base).map(|(&r, &n)| rule_for(r, n)).collect();
    let rules_fine: Vec<Rule> = degree.iter().zip(&fine).map(|(&r, &n)| rule_for(r, n)).collect();
    let peak = parts.iter().map(BTensor::max_abs_coeff).fold(0.0, f64::max);
    let scale = sum(&parts, &rules_fine, &fine).max(pow_abs(peak, p) * 1e-300);
    let abs_tol = tol * scale;
    let active: Vec<usize> = (0..degree.len()).filter(|&a| degree[a] > 0).collect();
    if active.is_empty() {
        return sum(&parts, &rules_fine, &fine);
    }
    let max_cells = match active.len() {
        1 => 4096,
        2 => 2048,
        _ => 1024,
    };
    let halves: Vec<(Vec<f64>, Vec<f64>)> =
        degree.iter().map(|&r| (restrict_matrix_1d(r, 0.0, 0.5), restrict_matrix_1d(r, 0.5, 1.0))).collect();
    let eval = |cell: Vec<BTensor>, vol: f64, depth: usize| {
        let qa = sum(&cell, &rules_base, &base) * vol;
        let qb = sum(&cell, &rules_fine, &fine) * vol;
        ErrCell { err: math::abs(qa - qb), value: qb, vol, depth, parts: cell }
    };
    let first = eval(parts, 1.0, 0);
    let mut err_total = first.err;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut cells = 1usize;
    while err_total > abs_tol && cells < max_cells {
        let Some(c) = heap.pop() else { break };
        if c.depth >= 60 {
            heap.push(c);
            break;
        }
        err_total -= c.err;
        let axis = active[c.depth % active.len()];
        let r = degree[axis];
        let (ml, mr) = &halves[axis];
        for m in [ml, mr] {
            let child: Vec<BTensor> = c.parts.iter().map(|t| t.apply_axis(axis, m, r)).collect();
            let child = eval(child, c.vol * 0.5, c.depth + 1);
            err_total += child.err;
            heap.push(child);
        }
        cells += 1;
    }
    heap.iter().map(|c| c.value).sum()
}

struct ErrCell {
    err: f64,
    value: f64,
    vol: f64,
    depth: usize,
    parts: Vec<BTensor>,
}

impl PartialEq for ErrCell {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}

impl Eq for ErrCell {}

impl PartialOrd for ErrCell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ErrCell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}
