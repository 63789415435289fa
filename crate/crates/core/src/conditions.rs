//! Chain conditions `w1`, `w2`, `w2*` and the Bernstein-polynomial criteria.
//!
//! Every report scans all `ρ`-fat full chains: for each top atom a depth-first
//! walk visits each fat chain starting there exactly once, so every contiguous
//! subchain of a maximal fat chain is evaluated. Ratios are reported in
//! `τ`-power form, i.e. `Σ (term)^τ / (RHS)^τ`.

use alloc::rc::Rc;
use alloc::vec;
use alloc::vec::Vec;
use alloc::format;

use crate::error::{Error, Result};
use crate::math;
use crate::orthosystem::{dotv, System};
use crate::partition::{AtomId, Chain, Filtration, Side};
use crate::polyspace::{mat_vec, u_of, Poly, Space, SpaceSpec, DEFAULT_TOL};
use crate::search;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    W1,
    W2,
    W2Star,
    Special1d,
    SpecialMulti,
    Haar,
}

impl Condition {
    pub fn name(&self) -> &'static str {
        match self {
            Condition::W1 => "w1",
            Condition::W2 => "w2",
            Condition::W2Star => "w2*",
            Condition::Special1d => "special1d",
            Condition::SpecialMulti => "specialMulti",
            Condition::Haar => "haar",
        }
    }
}

/// How `w2*` is evaluated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// `dim S = 1`: `Σλ^σ / (Σλ)^σ` with `λ_X = |b(X)|`.
    ClosedForm,
    /// Tensor spaces: the explicit Bernstein criterion with degrees `r⃗`.
    BernsteinReduction,
    /// Span spaces: the Bernstein criterion for each generating degree vector.
    SpanReduction,
    /// Multi-start maximization over the unit sphere of `S`.
    Direct,
}

impl Strategy {
    pub fn auto(space: &Space) -> Strategy {
        match space.spec() {
            SpaceSpec::Constant => Strategy::ClosedForm,
            SpaceSpec::Tensor(_) => Strategy::BernsteinReduction,
            _ => Strategy::SpanReduction,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::ClosedForm => "closed-form",
            Strategy::BernsteinReduction => "bernstein-reduction",
            Strategy::SpanReduction => "span-reduction",
            Strategy::Direct => "direct",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConditionOptions {
    pub p: f64,
    pub tau: f64,
    pub rho: f64,
    /// Multi-start points for direct maximization over `f ∈ S`.
    pub starts: usize,
    pub seed: u64,
    /// Cap on the number of evaluated chains; hitting it flags the report.
    pub max_chains: usize,
    /// Stability constant used by `u(A)`.
    pub c2: f64,
}

impl ConditionOptions {
    pub fn new(p: f64, tau: f64, rho: f64) -> Self {
        ConditionOptions { p, tau, rho, starts: 64, seed: 0, max_chains: usize::MAX, c2: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::InvalidParameter(format!("p = {} must lie in (1, inf)", self.p)));
        }
        if !(self.tau > 0.0 && self.tau < self.p) {
            return Err(Error::InvalidParameter(format!("tau = {} must lie in (0, p)", self.tau)));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidParameter(format!("rho = {} must lie in (0, 1)", self.rho)));
        }
        if !(self.c2 > 0.0 && self.c2 <= 1.0) {
            return Err(Error::InvalidParameter(format!("c2 = {} must lie in (0, 1]", self.c2)));
        }
        Ok(())
    }
}

/// Best ratio among the chains with a given top atom.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainRatio {
    pub top: AtomId,
    pub len: usize,
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct ConditionReport {
    pub condition: Condition,
    pub strategy: Option<Strategy>,
    pub p: f64,
    pub tau: f64,
    pub rho: f64,
    pub max_ratio: f64,
    pub witness_chain: Option<Chain>,
    /// Maximizing `f` as a polynomial on the witness chain's top atom.
    pub witness_function: Option<Poly>,
    /// Number of chains evaluated.
    pub samples: usize,
    pub per_top: Vec<ChainRatio>,
    pub search_limited: bool,
}

impl ConditionReport {
    /// Upper bound for the same condition at a smaller `ρ' < ρ`.
    pub fn rescaled_bound(&self, rho_prime: f64) -> f64 {
        rescaling_bound(self.max_ratio, self.rho, rho_prime)
    }
}

/// `(1 + log ρ' / log ρ) (M + 1)`.
pub fn rescaling_bound(m: f64, rho: f64, rho_prime: f64) -> f64 {
    (1.0 + math::ln(rho_prime) / math::ln(rho)) * (m + 1.0)
}

trait Evaluator {
    type State: Clone;
    fn start(&mut self, top: AtomId) -> Self::State;
    fn extend(&mut self, st: &Self::State, parent: AtomId, child: AtomId) -> Self::State;
    /// Ratio of the chain ending in this state, with an optional maximizer.
    fn ratio(&mut self, st: &Self::State) -> (f64, Option<Vec<f64>>);
}

struct ScanResult {
    max_ratio: f64,
    witness: Option<Chain>,
    witness_point: Option<Vec<f64>>,
    samples: usize,
    per_top: Vec<ChainRatio>,
    limited: bool,
}

fn scan<E: Evaluator>(filt: &Filtration, rho: f64, max_chains: usize, ev: &mut E) -> ScanResult {
    let mut res = ScanResult {
        max_ratio: 0.0,
        witness: None,
        witness_point: None,
        samples: 0,
        per_top: Vec::new(),
        limited: false,
    };
    let mut path: Vec<AtomId> = Vec::new();
    'tops: for top in 0..filt.num_atoms() {
        if filt.is_leaf(top) {
            continue;
        }
        let mut best_top = ChainRatio { top, len: 0, ratio: 0.0 };
        let mut stack = vec![(0usize, top, ev.start(top))];
        while let Some((lvl, a, st)) = stack.pop() {
            path.truncate(lvl);
            path.push(a);
            if lvl >= 1 {
                if res.samples >= max_chains {
                    res.limited = true;
                    break 'tops;
                }
                res.samples += 1;
                let (r, pt) = ev.ratio(&st);
                if r > best_top.ratio {
                    best_top = ChainRatio { top, len: path.len(), ratio: r };
                }
                if r > res.max_ratio || res.witness.is_none() {
                    res.max_ratio = r.max(res.max_ratio);
                    if r >= res.max_ratio {
                        res.witness = Some(Chain { ids: path.clone() });
                        res.witness_point = pt;
                    }
                }
            }
            if let Some((s, l)) = filt.children(a) {
                for c in [l, s] {
                    if filt.ge_scaled(c, top, rho) {
                        let ns = ev.extend(&st, a, c);
                        stack.push((lvl + 1, c, ns));
                    }
                }
            }
        }
        if best_top.len > 0 {
            res.per_top.push(best_top);
        }
    }
    res
}

/// Evaluates one chain with a fresh evaluator state.
fn eval_chain<E: Evaluator>(ev: &mut E, chain: &Chain) -> (f64, Option<Vec<f64>>) {
    let mut st = ev.start(chain.top());
    for w in chain.ids.windows(2) {
        st = ev.extend(&st, w[0], w[1]);
    }
    ev.ratio(&st)
}

fn check_chain(filt: &Filtration, chain: &Chain) -> Result<()> {
    filt.chain_of(&chain.ids)?;
    if chain.len() < 2 {
        return Err(Error::InvalidParameter("chain needs at least two atoms".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------- closed form

struct ClosedForm<'a> {
    filt: &'a Filtration,
    sigma: f64,
}

impl Evaluator for ClosedForm<'_> {
    type State = (f64, f64);
    fn start(&mut self, _top: AtomId) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::NEG_INFINITY)
    }
    fn extend(&mut self, st: &(f64, f64), _parent: AtomId, child: AtomId) -> (f64, f64) {
        let lb = self.filt.log_measure(self.filt.buddy(child).expect("non-root"));
        (math::log_add_exp(st.0, self.sigma * lb), math::log_add_exp(st.1, lb))
    }
    fn ratio(&mut self, st: &(f64, f64)) -> (f64, Option<Vec<f64>>) {
        (math::exp(st.0 - self.sigma * st.1), None)
    }
}

/// `Σ λ^σ / (Σ λ)^σ` with `λ_X = |b(X)|` on one chain.
pub fn closed_form_ratio(filt: &Filtration, chain: &Chain, sigma: f64) -> Result<f64> {
    check_chain(filt, chain)?;
    Ok(eval_chain(&mut ClosedForm { filt, sigma }, chain).0)
}

/// `Σ λ^σ / (Σ λ)^σ` for a plain sequence of positive weights.
pub fn sequence_ratio(lambdas: &[f64], sigma: f64) -> f64 {
    let a = math::log_sum_exp(lambdas.iter().map(|l| sigma * math::ln(*l)));
    let b = math::log_sum_exp(lambdas.iter().map(|l| math::ln(*l)));
    math::exp(a - sigma * b)
}

// ------------------------------------------------------------------------ w1

struct W1 {
    /// `u(A)^τ` per atom.
    weights: Vec<f64>,
}

impl Evaluator for W1 {
    type State = f64;
    fn start(&mut self, _top: AtomId) -> f64 {
        0.0
    }
    fn extend(&mut self, st: &f64, _parent: AtomId, child: AtomId) -> f64 {
        st + self.weights[child]
    }
    fn ratio(&mut self, st: &f64) -> (f64, Option<Vec<f64>>) {
        (*st, None)
    }
}

/// `u(A)` for every non-root atom (index 0 holds 1).
pub fn u_values(filt: &Filtration, space: &Space, p: f64, c2: f64) -> Result<Vec<f64>> {
    let mut out = vec![1.0; filt.num_atoms()];
    for id in 1..filt.num_atoms() {
        out[id] = u_of(space, filt, id, p, c2)?;
    }
    Ok(out)
}

/// `sup_𝒳 Σ_{A ∈ 𝒳, pp(A) ∈ 𝒳} u(A)^τ` over `ρ`-fat full chains.
pub fn w1_report(filt: &Filtration, space: &Space, opts: &ConditionOptions) -> Result<ConditionReport> {
    opts.validate()?;
    let u = u_values(filt, space, opts.p, opts.c2)?;
    let mut ev = W1 { weights: u.iter().map(|x| math::pow(*x, opts.tau)).collect() };
    let res = scan(filt, opts.rho, opts.max_chains, &mut ev);
    Ok(finish(Condition::W1, None, opts, res, None))
}

fn finish(
    condition: Condition,
    strategy: Option<Strategy>,
    opts: &ConditionOptions,
    res: ScanResult,
    poly: Option<Poly>,
) -> ConditionReport {
    ConditionReport {
        condition,
        strategy,
        p: opts.p,
        tau: opts.tau,
        rho: opts.rho,
        max_ratio: res.max_ratio,
        witness_chain: res.witness,
        witness_function: poly,
        samples: res.samples,
        per_top: res.per_top,
        search_limited: res.limited,
    }
}

// -------------------------------------------------------------- special criteria

/// Ratio of one side `(s, T)` of the explicit Bernstein criterion.
#[derive(Clone, Debug, PartialEq)]
pub struct SideRatio {
    pub axis: usize,
    pub side: Side,
    pub log_lhs: f64,
    pub log_rhs: f64,
    /// `LHS / RHS`, or 0 when no buddy lies in `K_s^T`.
    pub ratio: f64,
}

#[derive(Clone, Debug)]
struct SpecialState {
    /// Per axis and side: `log Σ |b^s|^{τ/p}`.
    lhs: Vec<[f64; 2]>,
    /// Per axis and side: log gap length.
    gap: Vec<[f64; 2]>,
    /// Log side lengths of the top atom.
    outer: Rc<Vec<f64>>,
}

struct Special<'a> {
    filt: &'a Filtration,
    p: f64,
    tau: f64,
    /// Degree vectors; the ratio is the maximum over them.
    degrees: Vec<Vec<usize>>,
}

fn side_index(s: Side) -> usize {
    match s {
        Side::Lower => 0,
        Side::Upper => 1,
    }
}

/// `log γ_ℓ` for one axis; `-∞` when both gaps are empty.
pub fn log_gamma(log_minus: f64, log_plus: f64, log_outer: f64, r: usize, p: f64, tau: f64) -> f64 {
    let mut best = f64::INFINITY;
    for j in 0..=r {
        let a = (j as f64 + 1.0 / p) * log_minus - j as f64 * log_outer;
        let b = ((r - j) as f64 + 1.0 / p) * log_plus + (j as f64 - r as f64) * log_outer;
        let v = -log_outer / p + math::log_add_exp(a, b);
        if v < best {
            best = v;
        }
    }
    if best == f64::NEG_INFINITY {
        return best;
    }
    tau * best
}

impl Special<'_> {
    fn sides(&self, st: &SpecialState, r: &[usize]) -> Vec<SideRatio> {
        let d = st.gap.len();
        let (p, tau) = (self.p, self.tau);
        let gammas: Vec<f64> =
            (0..d).map(|l| log_gamma(st.gap[l][0], st.gap[l][1], st.outer[l], r[l], p, tau)).collect();
        let mut out = Vec::with_capacity(2 * d);
        for s in 0..d {
            for (k, side) in [Side::Lower, Side::Upper].into_iter().enumerate() {
                let log_lhs = st.lhs[s][k];
                let t = st.gap[s][k];
                let other = st.gap[s][1 - k];
                let rs = r[s] as f64;
                let mut log_rhs = math::log_add_exp(
                    tau / p * t,
                    (tau * rs + tau / p) * other - tau * rs * st.outer[s],
                );
                for (l, g) in gammas.iter().enumerate() {
                    if l != s {
                        log_rhs = math::log_add_exp(log_rhs, tau / p * st.outer[s] + g);
                    }
                }
                let ratio = if log_lhs == f64::NEG_INFINITY { 0.0 } else { math::exp(log_lhs - log_rhs) };
                out.push(SideRatio { axis: s, side, log_lhs, log_rhs, ratio });
            }
        }
        out
    }
}

impl Evaluator for Special<'_> {
    type State = SpecialState;
    fn start(&mut self, top: AtomId) -> SpecialState {
        let d = self.filt.dim();
        let a = self.filt.atom(top).expect("atom");
        SpecialState {
            lhs: vec![[f64::NEG_INFINITY; 2]; d],
            gap: vec![[f64::NEG_INFINITY; 2]; d],
            outer: Rc::new(a.log_sides.clone()),
        }
    }
    fn extend(&mut self, st: &SpecialState, parent: AtomId, child: AtomId) -> SpecialState {
        let f = self.filt;
        let k = f.atom(parent).expect("atom").split_index.expect("split");
        let s = f.split(k).axis().expect("geometric");
        let b = f.buddy(child).expect("non-root");
        let ba = f.atom(b).expect("atom");
        let side = side_index(ba.side.expect("geometric"));
        let lb = ba.log_sides[s];
        let mut ns = st.clone();
        ns.lhs[s][side] = math::log_add_exp(st.lhs[s][side], self.tau / self.p * lb);
        ns.gap[s][side] = math::log_add_exp(st.gap[s][side], lb);
        ns
    }
    fn ratio(&mut self, st: &SpecialState) -> (f64, Option<Vec<f64>>) {
        let mut best = 0.0f64;
        for r in &self.degrees {
            for sr in self.sides(st, r) {
                best = best.max(sr.ratio);
            }
        }
        (best, None)
    }
}

/// Per-`(s, T)` ratios of the multivariate Bernstein criterion with degrees `r⃗`.
pub fn special_multi(filt: &Filtration, chain: &Chain, p: f64, tau: f64, r: &[usize]) -> Result<Vec<SideRatio>> {
    check_chain(filt, chain)?;
    if !filt.is_geometric() {
        return Err(Error::ModeMismatch("geometric"));
    }
    if r.len() != filt.dim() {
        return Err(Error::InvalidParameter(format!("degree vector of length {} in dimension {}", r.len(), filt.dim())));
    }
    let mut ev = Special { filt, p, tau, degrees: vec![r.to_vec()] };
    let mut st = ev.start(chain.top());
    for w in chain.ids.windows(2) {
        st = ev.extend(&st, w[0], w[1]);
    }
    Ok(ev.sides(&st, r))
}

/// The univariate criterion: ratios for `T = R_-` and `T = R_+`.
pub fn special_1d(filt: &Filtration, chain: &Chain, p: f64, tau: f64, r: usize) -> Result<[SideRatio; 2]> {
    if filt.dim() != 1 {
        return Err(Error::InvalidParameter("special_1d needs d = 1".into()));
    }
    let v = special_multi(filt, chain, p, tau, &[r])?;
    Ok([v[0].clone(), v[1].clone()])
}

/// Scan of the explicit criterion over all fat chains, maximized over `degrees`.
pub fn special_report(
    filt: &Filtration,
    degrees: &[Vec<usize>],
    opts: &ConditionOptions,
) -> Result<ConditionReport> {
    opts.validate()?;
    if !filt.is_geometric() {
        return Err(Error::ModeMismatch("geometric"));
    }
    if degrees.is_empty() || degrees.iter().any(|r| r.len() != filt.dim()) {
        return Err(Error::InvalidParameter("degree vectors must match the dimension".into()));
    }
    let mut ev = Special { filt, p: opts.p, tau: opts.tau, degrees: degrees.to_vec() };
    let res = scan(filt, opts.rho, opts.max_chains, &mut ev);
    let cond = if filt.dim() == 1 { Condition::Special1d } else { Condition::SpecialMulti };
    Ok(finish(cond, Some(Strategy::BernsteinReduction), opts, res, None))
}

/// Degree vectors whose criteria together decide `w2*` for a polynomial space.
pub fn reduction_degrees(space: &Space) -> Vec<Vec<usize>> {
    let d = space.d();
    match space.spec() {
        SpaceSpec::Constant => vec![vec![0; d]],
        SpaceSpec::Tensor(r) => vec![r.clone()],
        SpaceSpec::TotalDegree(_) | SpaceSpec::SpanSet(_) => {
            let exps = space.exps();
            exps.iter()
                .filter(|m| !exps.iter().any(|o| o != *m && o.iter().zip(m.iter()).all(|(a, b)| a >= b)))
                .cloned()
                .collect()
        }
    }
}

// -------------------------------------------------------------------- direct

/// Persistent list of buddies with the restriction matrix from the chain top.
struct Node {
    buddy: AtomId,
    parent: AtomId,
    child: AtomId,
    to_buddy: Vec<f64>,
    next: Option<Rc<Node>>,
}

#[derive(Clone)]
struct DirectState {
    top: AtomId,
    to_cur: Rc<Vec<f64>>,
    list: Option<Rc<Node>>,
}

fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let x = a[i * n + k];
            if x != 0.0 {
                for j in 0..n {
                    out[i * n + j] += x * b[k * n + j];
                }
            }
        }
    }
    out
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

struct ChainMaps<'a> {
    filt: &'a Filtration,
    space: &'a Space,
}

impl ChainMaps<'_> {
    fn step(&self, m: &[f64], id: AtomId) -> Vec<f64> {
        let n = self.space.dim();
        match &self.filt.atom(id).expect("atom").rel {
            Some(rel) if !self.space.is_constant() => mat_mul(&self.space.restrict_matrix(rel), m, n),
            _ => m.to_vec(),
        }
    }

    fn start(&self, top: AtomId) -> DirectState {
        DirectState { top, to_cur: Rc::new(identity(self.space.dim())), list: None }
    }

    fn extend(&self, st: &DirectState, parent: AtomId, child: AtomId) -> DirectState {
        let b = self.filt.buddy(child).expect("non-root");
        let to_buddy = self.step(&st.to_cur, b);
        let to_child = self.step(&st.to_cur, child);
        DirectState {
            top: st.top,
            to_cur: Rc::new(to_child),
            list: Some(Rc::new(Node { buddy: b, parent, child, to_buddy, next: st.list.clone() })),
        }
    }
}

fn nodes(st: &DirectState) -> Vec<&Node> {
    let mut out = Vec::new();
    let mut cur = st.list.as_deref();
    while let Some(n) = cur {
        out.push(n);
        cur = n.next.as_deref();
    }
    out
}

struct Direct<'a> {
    maps: ChainMaps<'a>,
    p: f64,
    tau: f64,
    starts: usize,
    seed: u64,
    hint: Vec<f64>,
}

impl Direct<'_> {
    /// `Σ_b ‖fχ_b‖_p^τ / ‖fχ_R‖_p^τ` for coefficients `f` on the chain top.
    fn value(&self, st: &DirectState, f: &[f64]) -> f64 {
        let filt = self.maps.filt;
        let lt = filt.log_measure(st.top);
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for node in nodes(st) {
            let c = mat_vec(&node.to_buddy, f);
            let w = math::exp(filt.log_measure(node.buddy) - lt);
            let np = w * self.maps.space.lp_unit(&c, self.p, DEFAULT_TOL);
            lhs += math::pow(np, self.tau / self.p);
            rhs += np;
        }
        if rhs <= 0.0 {
            return 0.0;
        }
        lhs / math::pow(rhs, self.tau / self.p)
    }
}

impl Evaluator for Direct<'_> {
    type State = DirectState;
    fn start(&mut self, top: AtomId) -> DirectState {
        self.maps.start(top)
    }
    fn extend(&mut self, st: &DirectState, parent: AtomId, child: AtomId) -> DirectState {
        self.maps.extend(st, parent, child)
    }
    fn ratio(&mut self, st: &DirectState) -> (f64, Option<Vec<f64>>) {
        let n = self.maps.space.dim();
        if n == 1 {
            return (self.value(st, &[1.0]), Some(vec![1.0]));
        }
        let hint = if self.hint.len() == n { Some(self.hint.clone()) } else { None };
        let r = search::maximize_sphere(n, self.starts, self.seed, hint.as_deref(), |f| self.value(st, f));
        self.hint = r.point.clone();
        (r.value, Some(r.point))
    }
}

/// `w2*` over all `ρ`-fat chains with the chosen strategy.
pub fn w2s_report(
    filt: &Filtration,
    space: &Space,
    opts: &ConditionOptions,
    strategy: Strategy,
) -> Result<ConditionReport> {
    opts.validate()?;
    if filt.is_geometric() && space.d() != filt.dim() && !space.is_constant() {
        return Err(Error::SpaceMismatch(format!("space dimension {} vs filtration {}", space.d(), filt.dim())));
    }
    match strategy {
        Strategy::ClosedForm => {
            if space.dim() != 1 {
                return Err(Error::SpaceMismatch("closed form needs dim S = 1".into()));
            }
            let mut ev = ClosedForm { filt, sigma: opts.tau / opts.p };
            let res = scan(filt, opts.rho, opts.max_chains, &mut ev);
            Ok(finish(Condition::W2Star, Some(strategy), opts, res, None))
        }
        Strategy::BernsteinReduction | Strategy::SpanReduction => {
            let degrees = reduction_degrees(space);
            let mut rep = special_report(filt, &degrees, opts)?;
            rep.condition = Condition::W2Star;
            rep.strategy = Some(strategy);
            Ok(rep)
        }
        Strategy::Direct => {
            if !filt.is_geometric() && !space.is_constant() {
                return Err(Error::SpaceMismatch("abstract filtrations support the constant space only".into()));
            }
            let mut ev = Direct {
                maps: ChainMaps { filt, space },
                p: opts.p,
                tau: opts.tau,
                starts: opts.starts,
                seed: opts.seed,
                hint: Vec::new(),
            };
            let res = scan(filt, opts.rho, opts.max_chains, &mut ev);
            let poly = match (&res.witness, &res.witness_point) {
                (Some(c), Some(pt)) if filt.is_geometric() => Some(space.to_poly(pt, filt.rect(c.top())?)),
                _ => None,
            };
            Ok(finish(Condition::W2Star, Some(strategy), opts, res, poly))
        }
    }
}

/// Direct `w2*` ratio of one chain for the given `f` (coefficients on the top atom).
pub fn w2s_chain_value(filt: &Filtration, space: &Space, chain: &Chain, f: &[f64], p: f64, tau: f64) -> Result<f64> {
    check_chain(filt, chain)?;
    let ev = Direct { maps: ChainMaps { filt, space }, p, tau, starts: 1, seed: 0, hint: Vec::new() };
    let mut st = ev.maps.start(chain.top());
    for w in chain.ids.windows(2) {
        st = ev.maps.extend(&st, w[0], w[1]);
    }
    Ok(ev.value(&st, f))
}

/// Direct `w2*` ratio of one chain maximized over `f ∈ S`.
pub fn w2s_chain_direct(filt: &Filtration, space: &Space, chain: &Chain, opts: &ConditionOptions) -> Result<(f64, Vec<f64>)> {
    check_chain(filt, chain)?;
    let mut ev = Direct {
        maps: ChainMaps { filt, space },
        p: opts.p,
        tau: opts.tau,
        starts: opts.starts,
        seed: opts.seed,
        hint: Vec::new(),
    };
    let (r, pt) = eval_chain(&mut ev, chain);
    Ok((r, pt.unwrap_or_default()))
}

// ------------------------------------------------------------------------ w2

struct W2<'a> {
    sys: &'a System,
    p: f64,
    tau: f64,
    starts: usize,
    seed: u64,
    hint: Vec<f64>,
}

impl W2<'_> {
    /// `Σ ‖Q_{pp(X)}(fχ_R)‖_p^τ / ‖fχ_R‖_p^τ`.
    fn value(&self, st: &DirectState, f: &[f64]) -> f64 {
        let sys = self.sys;
        let filt = sys.filtration();
        let n = sys.space().dim();
        let mut m_cur = vec![0.0; n];
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for node in nodes(st) {
            let c = mat_vec(&node.to_buddy, f);
            let mb: Vec<f64> = c.iter().map(|x| x * filt.measure(node.buddy)).collect();
            rhs += sys.lp_pow_on(node.buddy, &c, self.p);
            let fr = sys.frame(filt.atom(node.parent).expect("atom").split_index.expect("split"));
            let (ms, ml) = if fr.small == node.child { (&m_cur, &mb) } else { (&mb, &m_cur) };
            let coeffs: Vec<f64> = fr.funcs.iter().map(|g| dotv(&g.on_small, ms) + dotv(&g.on_large, ml)).collect();
            let q = sys.q_pow(fr.split, &coeffs, self.p);
            lhs += math::pow(q, self.tau / self.p);
            let a = sys.lift_moment(node.child, &m_cur);
            let b = sys.lift_moment(node.buddy, &mb);
            m_cur = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        }
        if rhs <= 0.0 {
            return 0.0;
        }
        lhs / math::pow(rhs, self.tau / self.p)
    }
}

impl Evaluator for W2<'_> {
    type State = DirectState;
    fn start(&mut self, top: AtomId) -> DirectState {
        ChainMaps { filt: self.sys.filtration(), space: self.sys.space() }.start(top)
    }
    fn extend(&mut self, st: &DirectState, parent: AtomId, child: AtomId) -> DirectState {
        ChainMaps { filt: self.sys.filtration(), space: self.sys.space() }.extend(st, parent, child)
    }
    fn ratio(&mut self, st: &DirectState) -> (f64, Option<Vec<f64>>) {
        let n = self.sys.space().dim();
        if n == 1 {
            return (self.value(st, &[1.0]), Some(vec![1.0]));
        }
        let hint = if self.hint.len() == n { Some(self.hint.clone()) } else { None };
        let r = search::maximize_sphere(n, self.starts, self.seed, hint.as_deref(), |f| self.value(st, f));
        self.hint = r.point.clone();
        (r.value, Some(r.point))
    }
}

/// `w2` over all `ρ`-fat chains, using the projections `Q` of `sys`.
pub fn w2_report(sys: &System, opts: &ConditionOptions) -> Result<ConditionReport> {
    opts.validate()?;
    let mut ev = W2 { sys, p: opts.p, tau: opts.tau, starts: opts.starts, seed: opts.seed, hint: Vec::new() };
    let filt = sys.filtration();
    let res = scan(filt, opts.rho, opts.max_chains, &mut ev);
    let poly = match (&res.witness, &res.witness_point) {
        (Some(c), Some(pt)) => Some(sys.space().to_poly(pt, filt.rect(c.top())?)),
        _ => None,
    };
    Ok(finish(Condition::W2, None, opts, res, poly))
}

/// `w2` ratio of one chain for a given `f` on its top atom.
pub fn w2_chain_value(sys: &System, chain: &Chain, f: &[f64], p: f64, tau: f64) -> Result<f64> {
    check_chain(sys.filtration(), chain)?;
    let mut ev = W2 { sys, p, tau, starts: 1, seed: 0, hint: Vec::new() };
    let mut st = ev.start(chain.top());
    for w in chain.ids.windows(2) {
        st = ev.extend(&st, w[0], w[1]);
    }
    Ok(ev.value(&st, f))
}

/// Haar criterion on chains; identical to the closed form for constants.
pub fn haar_report(filt: &Filtration, opts: &ConditionOptions) -> Result<ConditionReport> {
    let space = Space::new(SpaceSpec::Constant, filt.dim())?;
    let mut rep = w2s_report(filt, &space, opts, Strategy::ClosedForm)?;
    rep.condition = Condition::Haar;
    Ok(rep)
}
