//! Greedy n-term approximation with the `L^p`-normalized system, best-n-term
//! curves and approximation-space quasi-norms.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::orthosystem::{Coefficient, PiecewiseFunction, System};
use crate::partition::AtomId;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dictionary {
    Psi,
    C,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Exact,
    Greedy,
    DpUpperBound,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Greedy => "greedy",
            Method::DpUpperBound => "dp-upper-bound",
        }
    }
}

impl Dictionary {
    pub fn name(self) -> &'static str {
        match self {
            Dictionary::Psi => "psi",
            Dictionary::C => "C",
        }
    }
}

/// `errors[n]` bounds `E_n` for `n = 0..=N`; `errors[0] = ‖f‖_p`.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproxCurve {
    pub target: String,
    pub dictionary: Dictionary,
    pub method: Method,
    pub errors: Vec<f64>,
}

/// `‖φ‖_p` for every entry of the canonical coefficient order (level 0 first).
pub fn psi_norms(sys: &System, p: f64) -> Vec<f64> {
    let mut out: Vec<f64> = sys.level0().iter().map(|e| math::pow(sys.lp_pow_on(0, e, p), 1.0 / p)).collect();
    for fr in sys.frames() {
        for j in 0..fr.funcs.len() {
            out.push(sys.frame_norm(fr.split, j, p));
        }
    }
    out
}

/// Coefficients `ψ*(f) = ⟨f, φ⟩ ‖φ‖_p` of `f` in `Ψ = {φ / ‖φ‖_p}`.
pub fn psi_coefficients(sys: &System, f: &PiecewiseFunction, p: f64) -> Vec<Coefficient> {
    let mut c = sys.analyze(f);
    for (x, n) in c.iter_mut().zip(psi_norms(sys, p)) {
        x.value *= n;
    }
    c
}

/// `(Σ |c|^τ)^{1/τ}`.
pub fn tau_norm(coeffs: &[f64], tau: f64) -> f64 {
    math::pow(coeffs.iter().map(|c| math::pow(math::abs(*c), tau)).sum::<f64>(), 1.0 / tau)
}

/// Indices of the `n` largest `|c|`, ties to the lower index; sorted by rank.
pub fn greedy_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| math::abs(values[b]).total_cmp(&math::abs(values[a])).then(a.cmp(&b)));
    idx
}

#[derive(Clone, Debug)]
pub struct GreedyResult {
    /// Positions in the canonical coefficient order.
    pub indices: Vec<usize>,
    pub approximant: PiecewiseFunction,
    pub error: f64,
}

fn phi_coefficients(coeffs: &[Coefficient], norms: &[f64], keep: impl Fn(usize) -> bool) -> Vec<Coefficient> {
    coeffs
        .iter()
        .zip(norms)
        .enumerate()
        .filter(|(i, _)| keep(*i))
        .map(|(_, (c, n))| Coefficient { value: if *n > 0.0 { c.value / n } else { 0.0 }, ..c.clone() })
        .collect()
}

/// `G_n f`: keeps the `n` largest `Ψ` coefficients. `n` beyond the
/// number of coefficients returns the full expansion.
pub fn greedy_approx(sys: &System, f: &PiecewiseFunction, n: usize, p: f64) -> GreedyResult {
    let coeffs = psi_coefficients(sys, f, p);
    let norms = psi_norms(sys, p);
    let values: Vec<f64> = coeffs.iter().map(|c| c.value).collect();
    let mut indices = greedy_order(&values);
    indices.truncate(n.min(indices.len()));
    let mut keep = vec![false; coeffs.len()];
    indices.iter().for_each(|&i| keep[i] = true);
    let approximant = sys.synthesize(&phi_coefficients(&coeffs, &norms, |i| keep[i]));
    let residual = sys.synthesize(&phi_coefficients(&coeffs, &norms, |i| !keep[i]));
    GreedyResult { indices, approximant, error: sys.lp_norm(&residual, p) }
}

/// `f` rewritten on the leaves of the filtration.
pub fn to_leaves(sys: &System, f: &PiecewiseFunction) -> PiecewiseFunction {
    let filt = sys.filtration();
    let mut out = PiecewiseFunction::new();
    for (&a, c) in &f.pieces {
        for leaf in leaves_below(sys, a) {
            out.insert(leaf, sys.restrict_down(a, leaf, c));
        }
    }
    let _ = filt;
    out
}

fn leaves_below(sys: &System, a: AtomId) -> Vec<AtomId> {
    let filt = sys.filtration();
    let mut out = Vec::new();
    let mut stack = vec![a];
    while let Some(c) = stack.pop() {
        match filt.children(c) {
            Some((s, l)) => {
                stack.push(l);
                stack.push(s);
            }
            None => out.push(c),
        }
    }
    out
}

/// Greedy curve in `Ψ` for `n = 0..=N`, with the running minimum so that the
/// curve is non-increasing (any earlier `G_m` is also an `n`-term candidate).
pub fn greedy_curve(sys: &System, f: &PiecewiseFunction, p: f64, big_n: usize, target: &str) -> ApproxCurve {
    let coeffs = psi_coefficients(sys, f, p);
    let norms = psi_norms(sys, p);
    let values: Vec<f64> = coeffs.iter().map(|c| c.value).collect();
    let order = greedy_order(&values);
    let mut keep = vec![false; coeffs.len()];
    let mut errors = Vec::with_capacity(big_n + 1);
    let mut best = f64::INFINITY;
    for n in 0..=big_n {
        if n > 0 && n <= order.len() {
            keep[order[n - 1]] = true;
        }
        let e = if p == 2.0 {
            // Parseval
            math::sqrt(values.iter().zip(&keep).filter(|(_, k)| !**k).map(|(v, _)| v * v).sum())
        } else {
            sys.lp_norm(&sys.synthesize(&phi_coefficients(&coeffs, &norms, |i| !keep[i])), p)
        };
        best = best.min(e);
        errors.push(if n == 0 { e } else { best });
    }
    ApproxCurve { target: target.into(), dictionary: Dictionary::Psi, method: Method::Greedy, errors }
}

/// Upper bound for `E_n(f, 𝒞)` by the best `n` pairwise disjoint atom pieces,
/// each the `L^2`-projection of `f` onto `S(A)`.
pub fn c_curve(sys: &System, f: &PiecewiseFunction, p: f64, big_n: usize, target: &str) -> ApproxCurve {
    let filt = sys.filtration();
    let leaves = to_leaves(sys, f);
    let (mom, _) = sys.moments(&leaves);
    let na = filt.num_atoms();
    let inf = f64::INFINITY;
    // cost[a][k]: least ∫_A |f - g|^p with at most k disjoint pieces inside A
    let mut cost: Vec<Vec<f64>> = vec![Vec::new(); na];
    let mut mass = vec![0.0; na];
    let zero = vec![0.0; sys.space().dim()];
    for a in (0..na).rev() {
        let lv = leaves_below(sys, a);
        let own0 = match filt.children(a) {
            Some((s, l)) => mass[s] + mass[l],
            None => sys.lp_pow_on(a, leaves.pieces.get(&a).unwrap_or(&zero), p),
        };
        mass[a] = own0;
        let w = filt.measure(a);
        let g: Vec<f64> = mom[a].iter().map(|x| x / w).collect();
        let own1: f64 = lv
            .iter()
            .map(|l| {
                let fl = leaves.pieces.get(l).unwrap_or(&zero);
                let gl = sys.restrict_down(a, *l, &g);
                let d: Vec<f64> = fl.iter().zip(&gl).map(|(x, y)| x - y).collect();
                sys.lp_pow_on(*l, &d, p)
            })
            .sum();
        let mut c = vec![inf; big_n + 1];
        c[0] = own0;
        if big_n >= 1 {
            c[1] = own1.min(own0);
        }
        if let Some((s, l)) = filt.children(a) {
            let (cs, cl) = (&cost[s], &cost[l]);
            for k in 0..=big_n {
                for i in 0..=k {
                    let v = cs[i] + cl[k - i];
                    if v < c[k] {
                        c[k] = v;
                    }
                }
            }
        }
        for k in 1..=big_n {
            c[k] = c[k].min(c[k - 1]);
        }
        cost[a] = c;
    }
    let errors = cost[0].iter().map(|x| math::pow(x.max(0.0), 1.0 / p)).collect();
    ApproxCurve { target: target.into(), dictionary: Dictionary::C, method: Method::DpUpperBound, errors }
}

pub fn en_curve(sys: &System, f: &PiecewiseFunction, dict: Dictionary, p: f64, big_n: usize, target: &str) -> ApproxCurve {
    match dict {
        Dictionary::Psi => greedy_curve(sys, f, p, big_n, target),
        Dictionary::C => c_curve(sys, f, p, big_n, target),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Quasinorm {
    pub value: f64,
    /// Largest `k` with `E_{2^k}` included.
    pub truncation: usize,
    /// The last included term exceeds 1% of the ℓ^q sum.
    pub tail_warning: bool,
}

pub const DEFAULT_TRUNCATION: usize = 12;

/// `‖f‖ + ‖(2^{kα} E_{2^k})_k‖_{ℓ^q}` truncated at `k ≤ min(K, log2 N)`;
/// `q = ∞` takes the supremum.
pub fn aspace_quasinorm(curve: &ApproxCurve, alpha: f64, q: f64, base_norm: f64, k_max: usize) -> Result<Quasinorm> {
    if !(q > 0.0) {
        return Err(Error::InvalidParameter("q must be positive".into()));
    }
    let mut terms = Vec::new();
    let mut k = 0;
    while k <= k_max && (1usize << k) < curve.errors.len() {
        terms.push(math::exp2(k as f64 * alpha) * curve.errors[1 << k]);
        k += 1;
    }
    if terms.is_empty() {
        return Ok(Quasinorm { value: base_norm, truncation: 0, tail_warning: false });
    }
    let (seq, tail_warning) = if q.is_infinite() {
        (terms.iter().copied().fold(0.0, f64::max), false)
    } else {
        let s: f64 = terms.iter().map(|t| math::pow(*t, q)).sum();
        let last = math::pow(*terms.last().unwrap(), q);
        (math::pow(s, 1.0 / q), s > 0.0 && last > 0.01 * s)
    };
    Ok(Quasinorm { value: base_norm + seq, truncation: terms.len() - 1, tail_warning })
}

/// `‖Σ_{i∈Λ} ψ_i‖_p / (card Λ)^{1/p}` with `Λ` positions in the canonical order.
pub fn temlyakov_ratio(sys: &System, indices: &[usize], p: f64) -> f64 {
    if indices.is_empty() {
        return 0.0;
    }
    let norms = psi_norms(sys, p);
    let template = sys.analyze(&PiecewiseFunction::new());
    let picked: Vec<Coefficient> =
        indices.iter().map(|&i| Coefficient { value: 1.0 / norms[i], ..template[i].clone() }).collect();
    let g = sys.synthesize(&picked);
    sys.lp_norm(&g, p) / math::pow(indices.len() as f64, 1.0 / p)
}

/// `‖Σ ε_i ψ*_i ψ_i‖_p / ‖Σ ψ*_i ψ_i‖_p` for signs `ε`.
pub fn sign_flip_ratio(sys: &System, f: &PiecewiseFunction, signs: &[bool], p: f64) -> f64 {
    let coeffs = sys.analyze(f);
    let flipped: Vec<Coefficient> = coeffs
        .iter()
        .zip(signs.iter().chain(core::iter::repeat(&false)))
        .map(|(c, &s)| Coefficient { value: if s { -c.value } else { c.value }, ..c.clone() })
        .collect();
    let base = sys.lp_norm(f, p);
    if base > 0.0 {
        sys.lp_norm(&sys.synthesize(&flipped), p) / base
    } else {
        1.0
    }
}
