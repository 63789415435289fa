//! Builders for the explicit example and counterexample families, plus random
//! and regular filtrations used by tests and sweeps.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::math;
use crate::partition::{AtomId, Chain, Filtration, SplitSpec};

/// Names a generated family, its parameters and the designated witness chains.
#[derive(Clone, Debug, Default)]
pub struct Manifest {
    pub family: String,
    pub params: Vec<(String, String)>,
    pub chains: Vec<(String, Chain)>,
}

impl Manifest {
    fn new(family: &str) -> Self {
        Manifest { family: family.to_string(), ..Default::default() }
    }

    fn param(&mut self, k: &str, v: impl ToString) {
        self.params.push((k.to_string(), v.to_string()));
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!("gamma = {gamma} must lie in (0, 1)")));
    }
    Ok(())
}

/// Level `ℓ` with `λ_{n,j} = μ_ℓ = 2^{-ℓ/γ}`; the two endpoints have level 0.
pub fn lambda_levels(n: usize) -> Vec<u32> {
    let len = (1usize << n) + 1;
    (0..len)
        .map(|j| if j == 0 || j == len - 1 { 0 } else { n as u32 - j.trailing_zeros() })
        .collect()
}

/// `Λ_n = (λ_{n,0}, …, λ_{n,2^n})` in floating point.
pub fn lambda_sequence(gamma: f64, n: usize) -> Result<Vec<f64>> {
    check_gamma(gamma)?;
    Ok(lambda_levels(n).into_iter().map(|l| math::exp2(-(l as f64) / gamma)).collect())
}

/// `Λ_n` exactly for `γ = 1/k`, where `μ_ℓ = 2^{-kℓ}`.
pub fn lambda_sequence_exact(k: u32, n: usize) -> Result<Vec<Rational>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("1/gamma = {k} must be at least 2")));
    }
    Ok(lambda_levels(n).into_iter().map(|l| exact::dyadic(k * l)).collect())
}

/// `λ` as exact rationals: exact dyadics when `1/γ` is an integer, else the
/// nearest doubles.
fn lambda_rational(gamma: f64, n: usize) -> Result<Vec<Rational>> {
    let inv = 1.0 / gamma;
    if (inv - math::round(inv)).abs() < 1e-12 && math::round(inv) >= 2.0 {
        return lambda_sequence_exact(math::round(inv) as u32, n);
    }
    lambda_sequence(gamma, n)?
        .into_iter()
        .map(|x| exact::from_f64(x).filter(|r| !r.is_zero()).ok_or(Error::Numerical(format!("lambda underflows at n = {n}"))))
        .collect()
}

/// How `filtration_from_fractions` picks the atom split at each step.
#[derive(Clone, Debug, PartialEq)]
pub enum Schedule {
    /// Split the large child of the previous split (a single descending chain).
    Spine,
    /// Split leaves level by level, lowest id first.
    Breadth,
    /// Split the listed atoms in order.
    Explicit(Vec<AtomId>),
}

/// Abstract filtration with `|A_n'| = t_n |A_n|`.
pub fn filtration_from_fractions(t: &[Rational], schedule: &Schedule) -> Result<Filtration> {
    let half = exact::ratio(1, 2);
    let mut f = Filtration::new_abstract();
    let mut queue: alloc::collections::VecDeque<AtomId> = alloc::collections::VecDeque::from(vec![0]);
    let mut cur = 0;
    for (k, tk) in t.iter().enumerate() {
        if !exact::is_positive(tk) || *tk > half {
            return Err(Error::FractionOutOfRange(exact::to_f64(tk)));
        }
        let atom = match schedule {
            Schedule::Spine => cur,
            Schedule::Breadth => queue.pop_front().expect("leaves available"),
            Schedule::Explicit(ids) => *ids
                .get(k)
                .ok_or_else(|| Error::InvalidParameter(format!("schedule has no entry for split {}", k + 1)))?,
        };
        let (s, l) = f.apply_split(SplitSpec::Fraction { atom, t: tk.clone() })?;
        cur = l;
        queue.push_back(s);
        queue.push_back(l);
    }
    Ok(f)
}

/// Fractions for a spine whose buddies have the given measures (top measure 1).
pub fn fractions_for_buddies(buddies: &[Rational]) -> Result<Vec<Rational>> {
    let mut remaining = Rational::one();
    let mut out = Vec::with_capacity(buddies.len());
    for b in buddies {
        if !exact::is_positive(b) || *b >= remaining {
            return Err(Error::InvalidParameter("buddy measures exceed the available mass".into()));
        }
        out.push(b / &remaining);
        remaining -= b;
    }
    Ok(out)
}

/// The `τ`-separating family on `[0,1]`.
#[derive(Clone, Debug)]
pub struct Thm42 {
    pub filtration: Filtration,
    /// Chain `i` lives on `[1 - 2^{-(i-1)}, 1 - 2^{-i}]`; index `i - 1`.
    pub chains: Vec<Chain>,
    pub gamma: f64,
    /// Every designated chain is `ρ`-fat for this `ρ`.
    pub rho: f64,
    pub manifest: Manifest,
}

/// Region `i` (measure `2^{-i}`) carries a chain whose `2^i + 1` buddies have
/// measures `z_i λ_{i,j}` with `z_i = (1-ρ) 2^{-i} / Σ_j λ_{i,j}`.
pub fn thm42_filtration(tau0: f64, p: f64, i_max: usize, rho: f64) -> Result<Thm42> {
    if !(tau0 > 0.0 && tau0 < p) {
        return Err(Error::InvalidParameter(format!("tau0 = {tau0} must lie in (0, p)")));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidParameter(format!("rho = {rho} must lie in (0, 1)")));
    }
    let gamma = tau0 / p;
    check_gamma(gamma)?;
    let one_minus_rho = Rational::one() - exact::from_f64(rho).expect("finite");
    let half = exact::ratio(1, 2);
    let mut f = Filtration::new_geometric(1);
    let mut spine = 0;
    let mut chains = Vec::with_capacity(i_max);
    let mut manifest = Manifest::new("thm4.2");
    manifest.param("tau0", tau0);
    manifest.param("p", p);
    manifest.param("i_max", i_max);
    manifest.param("rho", rho);
    for i in 1..=i_max {
        let (region, rest) = if i < i_max {
            f.split_relative(spine, 0, &half)?
        } else {
            (spine, spine)
        };
        spine = rest;
        let lam = lambda_rational(gamma, i)?;
        let total: Rational = lam.iter().fold(Rational::zero(), |a, b| a + b);
        let rect = f.atom(region)?.rect.clone().expect("geometric");
        let width = rect.side(0);
        let z = &one_minus_rho * &width / &total;
        let mut hi = rect.hi[0].clone();
        let mut ids = vec![region];
        let mut cur = region;
        for l in &lam {
            hi -= &z * l;
            let (_, lg) = f.apply_split(SplitSpec::Cut { atom: cur, axis: 0, at: hi.clone() })?;
            let lower_is_large = f.atom(lg)?.rect.as_ref().unwrap().lo[0] < hi;
            if !lower_is_large {
                return Err(Error::Numerical(format!("buddy larger than remaining atom in region {i}")));
            }
            cur = lg;
            ids.push(cur);
        }
        let chain = Chain { ids };
        manifest.chains.push((format!("chain_{i}"), chain.clone()));
        chains.push(chain);
    }
    Ok(Thm42 { filtration: f, chains, gamma, rho, manifest })
}

/// The degree-separating chain on `[0,1]`.
#[derive(Clone, Debug)]
pub struct Example55 {
    pub filtration: Filtration,
    /// `X_{-1}, X_0, …, X_{2n}`.
    pub chain: Chain,
    /// The subchain `X_{j0}, …, X_{2n}` with `j0 = 2(n - ⌊log₂ n⌋)`.
    pub witness: Chain,
    pub c: Rational,
    /// `log 2^{-ωn}`.
    pub log_h: f64,
    pub manifest: Manifest,
}

fn h_of(n: usize, omega: f64) -> Result<Rational> {
    let e = omega * n as f64;
    if (e - math::round(e)).abs() < 1e-9 {
        return Ok(exact::dyadic(math::round(e) as u32));
    }
    exact::from_f64(math::exp2(-e))
        .filter(|r| !r.is_zero())
        .ok_or(Error::Numerical(format!("2^-(omega n) underflows at n = {n}")))
}

/// Smallest `n` with `n 2^{-ωn} ≤ (1-ρ)/2`.
pub fn example55_min_n(p: f64, r: usize, rho: f64) -> usize {
    let omega = p * r as f64 + 1.0;
    (1..).find(|&n| math::ln(n as f64) - omega * n as f64 * math::LN2 <= math::ln((1.0 - rho) / 2.0)).unwrap()
}

/// Cuts `[lo, hi]` positions (fractions of the top side along `axis`) for the
/// chain of example 5.5, applied inside atom `top`; returns the chain ids.
fn embed_example55(
    f: &mut Filtration,
    top: AtomId,
    axis: usize,
    n: usize,
    h: &Rational,
    c: &Rational,
) -> Result<Vec<AtomId>> {
    let rect = f.atom(top)?.rect.clone().ok_or(Error::ModeMismatch("geometric"))?;
    let (lo, w) = (rect.lo[axis].clone(), rect.side(axis));
    let abs = |x: &Rational| &lo + &w * x;
    let mut ids = vec![top];
    let mut cur = top;
    let mut right = Rational::one();
    let mut pow = Rational::one();
    let cut = |f: &mut Filtration, cur: &mut AtomId, at: Rational, ids: &mut Vec<AtomId>| -> Result<()> {
        let (_, l) = f.apply_split(SplitSpec::Cut { atom: *cur, axis, at })?;
        *cur = l;
        ids.push(l);
        Ok(())
    };
    // X_{-1} -> X_0
    right -= c;
    cut(f, &mut cur, abs(&right), &mut ids)?;
    for l in 1..=n {
        // X_{2l-2} -> X_{2l-1}: left cut at l h
        let left = h * Rational::from_integer(l.into());
        cut(f, &mut cur, abs(&left), &mut ids)?;
        // X_{2l-1} -> X_{2l}: right cut removing c 2^{-l}
        pow /= Rational::from_integer(2.into());
        right -= c * &pow;
        cut(f, &mut cur, abs(&right), &mut ids)?;
    }
    Ok(ids)
}

pub fn example55_chain(n: usize, p: f64, tau: f64, r: usize, rho: f64) -> Result<Example55> {
    if !(p > 1.0) || !(tau > 0.0 && tau < p) || !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p}, tau = {tau}, rho = {rho}")));
    }
    let min_n = example55_min_n(p, r, rho);
    if n < min_n {
        return Err(Error::Precondition(format!("n = {n} violates n 2^(-omega n) <= (1 - rho)/2; the smallest valid n is {min_n}")));
    }
    let omega = p * r as f64 + 1.0;
    let h = h_of(n, omega)?;
    let c = (Rational::one() - exact::from_f64(rho).expect("finite")) / Rational::from_integer(4.into());
    let mut f = Filtration::new_geometric(1);
    let ids = embed_example55(&mut f, 0, 0, n, &h, &c)?;
    let chain = Chain { ids };
    let j0 = 2 * (n - (usize::BITS - 1 - n.leading_zeros()) as usize);
    // chain index of X_j is j + 1
    let witness = Chain { ids: chain.ids[j0 + 1..].to_vec() };
    let mut manifest = Manifest::new("ex5.5");
    manifest.param("n", n);
    manifest.param("p", p);
    manifest.param("tau", tau);
    manifest.param("r", r);
    manifest.param("rho", rho);
    manifest.chains.push(("full".into(), chain.clone()));
    manifest.chains.push(("witness".into(), witness.clone()));
    Ok(Example55 { filtration: f, chain, witness, c, log_h: -omega * n as f64 * math::LN2, manifest })
}

/// The partition `𝒜(κ, i)` of `[0,1]^d`.
#[derive(Clone, Debug)]
pub struct Example58 {
    pub filtration: Filtration,
    /// One example-5.5 chain per requested `n`, along `axis`.
    pub chains: Vec<Chain>,
    pub manifest: Manifest,
}

/// Regions `[1-2^{-k}, 1-2^{-(k+1)}]` along an off axis each carry an
/// example-5.5 chain (degree `κ`) along `axis`; afterwards every leaf is
/// halved `halvings` times in the directions other than `axis`.
pub fn example58_partition(
    d: usize,
    kappa: usize,
    axis: usize,
    ns: &[usize],
    halvings: usize,
    p: f64,
    tau: f64,
    rho: f64,
) -> Result<Example58> {
    if d < 2 {
        return Err(Error::InvalidParameter("example58 needs d >= 2".into()));
    }
    if axis >= d {
        return Err(Error::AxisOutOfRange { axis, dim: d });
    }
    if !(tau > 0.0 && tau < p) || !(rho > 0.5 && rho < 1.0) {
        return Err(Error::InvalidParameter(format!("tau = {tau}, rho = {rho}")));
    }
    let omega = p * kappa as f64 + 1.0;
    let c = (Rational::one() - exact::from_f64(rho).expect("finite")) / Rational::from_integer(4.into());
    let off = (axis + 1) % d;
    let half = exact::ratio(1, 2);
    let mut f = Filtration::new_geometric(d);
    let mut spine = 0;
    let mut chains = Vec::new();
    for (k, &n) in ns.iter().enumerate() {
        let min_n = example55_min_n(p, kappa, rho);
        if n < min_n {
            return Err(Error::Precondition(format!("n = {n} is below the smallest valid n = {min_n}")));
        }
        let region = if k + 1 < ns.len() {
            let (s, l) = f.split_relative(spine, off, &half)?;
            spine = l;
            s
        } else {
            spine
        };
        let h = h_of(n, omega)?;
        let ids = embed_example55(&mut f, region, axis, n, &h, &c)?;
        chains.push(Chain { ids });
    }
    let others: Vec<usize> = (0..d).filter(|&s| s != axis).collect();
    for round in 0..halvings {
        let s = others[round % others.len()];
        for leaf in f.leaves() {
            f.split_relative(leaf, s, &half)?;
        }
    }
    let mut manifest = Manifest::new("ex5.8");
    manifest.param("d", d);
    manifest.param("kappa", kappa);
    manifest.param("axis", axis);
    manifest.param("halvings", halvings);
    for (n, ch) in ns.iter().zip(&chains) {
        manifest.chains.push((format!("n_{n}"), ch.clone()));
    }
    Ok(Example58 { filtration: f, chains, manifest })
}

/// Dyadic cube partition: every atom split in half, axes cycling, to `depth`.
pub fn dyadic(d: usize, depth: usize) -> Filtration {
    regular_tree(d, depth, |_, _| exact::ratio(1, 2))
}

/// Full binary tree of the given depth; `frac(atom, depth)` gives the relative
/// cut position, axes cycle with depth.
pub fn regular_tree<F: FnMut(AtomId, usize) -> Rational>(d: usize, depth: usize, mut frac: F) -> Filtration {
    let mut f = Filtration::new_geometric(d);
    let mut frontier = vec![0];
    for level in 0..depth {
        let mut next = Vec::with_capacity(2 * frontier.len());
        for a in frontier {
            let t = frac(a, level);
            let (s, l) = f.split_relative(a, level % d, &t).expect("valid fraction");
            next.push(s);
            next.push(l);
        }
        frontier = next;
    }
    f
}

/// Rational on the `2^-20` grid nearest to `x`.
pub fn grid_rational(x: f64) -> Rational {
    let k = math::round(x * (1u64 << 20) as f64) as i64;
    exact::ratio(k, 1 << 20)
}

/// Random filtration parameters.
#[derive(Clone, Debug)]
pub struct RandomSpec {
    pub dim: usize,
    pub splits: usize,
    pub max_depth: usize,
    /// Relative cut positions are drawn from `[t_min, 1 - t_min]`.
    pub t_min: f64,
}

/// Splits a uniformly chosen leaf of depth `< max_depth` at a random axis and
/// position, `splits` times (fewer if no leaf is eligible).
pub fn random_filtration<R: Rng>(rng: &mut R, spec: &RandomSpec) -> Filtration {
    let mut f = Filtration::new_geometric(spec.dim);
    for _ in 0..spec.splits {
        let leaves: Vec<AtomId> = f.leaves().into_iter().filter(|&a| f.depth(a) < spec.max_depth).collect();
        if leaves.is_empty() {
            break;
        }
        let a = leaves[rng.gen_range(0..leaves.len())];
        let axis = rng.gen_range(0..spec.dim);
        let t = grid_rational(rng.gen_range(spec.t_min..1.0 - spec.t_min));
        f.split_relative(a, axis, &t).expect("valid cut");
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::{closed_form_ratio, special_1d};
    use crate::search;

    fn sum(v: &[Rational]) -> Rational {
        v.iter().fold(Rational::zero(), |a, b| a + b)
    }

    #[test]
    fn lambda_small_cases() {
        let l1 = lambda_sequence_exact(2, 1).unwrap();
        assert_eq!(l1, vec![exact::from_int(1), exact::ratio(1, 4), exact::from_int(1)]);
        let l2 = lambda_sequence_exact(2, 2).unwrap();
        let want = [1, 16, 4, 16, 1].map(|d| exact::ratio(1, d));
        assert_eq!(l2, want.to_vec());
    }

    #[test]
    fn lambda_sums() {
        for n in 0..=14 {
            let l = lambda_sequence_exact(2, n).unwrap();
            assert!(sum(&l) <= exact::from_int(3));
            // λ^{1/2} = 2^{-level}
            let half_sum: Rational = lambda_levels(n).iter().fold(Rational::zero(), |a, &lv| a + exact::dyadic(lv));
            assert_eq!(half_sum, exact::from_int(2) + exact::ratio(n as i64, 2));
        }
    }

    #[test]
    fn fractions_reproduce_buddies() {
        let b = vec![exact::ratio(1, 8), exact::ratio(1, 16), exact::ratio(1, 8)];
        let t = fractions_for_buddies(&b).unwrap();
        let f = filtration_from_fractions(&t, &Schedule::Spine).unwrap();
        for (k, want) in b.iter().enumerate() {
            assert_eq!(&f.atom(f.split(k + 1).small).unwrap().measure, want);
        }
        assert!(filtration_from_fractions(&[exact::ratio(3, 4)], &Schedule::Spine).is_err());
    }

    #[test]
    fn thm42_chains_realize_lambda() {
        let t = thm42_filtration(1.0, 2.0, 6, 0.5).unwrap();
        let f = &t.filtration;
        let total: Rational = f.leaves().iter().fold(Rational::zero(), |a, &l| a + &f.atom(l).unwrap().measure);
        assert_eq!(total, Rational::one());
        for (i, c) in t.chains.iter().enumerate() {
            assert!(f.is_fat(c, 0.5));
            let lam = lambda_sequence(0.5, i + 1).unwrap();
            let want = crate::conditions::sequence_ratio(&lam, 0.5);
            assert!((closed_form_ratio(f, c, 0.5).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn example55_shape() {
        let e = example55_chain(16, 2.0, 1.0, 1, 0.9).unwrap();
        let f = &e.filtration;
        assert!((exact::to_f64(&e.c) - 0.025).abs() < 1e-15);
        assert_eq!(e.chain.len(), 2 * 16 + 2);
        assert!(f.is_fat(&e.chain, 0.9));
        let x0 = f.rect(e.chain.ids[1]).unwrap();
        assert!((x0.hi[0] - 0.975).abs() < 1e-15 && x0.lo[0] == 0.0);
        // left buddies have measure 2^{-3n}
        for w in e.chain.ids.windows(2) {
            let b = f.buddy(w[1]).unwrap();
            let a = f.atom(b).unwrap();
            if a.side == Some(crate::partition::Side::Lower) {
                assert!((a.log_measure - e.log_h).abs() < 1e-9);
            }
        }
        assert_eq!(example55_min_n(2.0, 1, 0.9), 2);
        assert!(example55_chain(1, 2.0, 1.0, 1, 0.9).is_err());
        assert_eq!(e.witness.len(), 2 * 4 + 1);
        let sr = special_1d(f, &e.witness, 2.0, 1.0, 2).unwrap();
        assert!(sr[0].ratio > 0.0);
    }

    #[test]
    fn example58_gammas_vanish() {
        let e = example58_partition(2, 1, 0, &[8, 10], 2, 2.0, 1.0, 0.9).unwrap();
        let f = &e.filtration;
        let chains = f.enumerate_fat_chains(0.9, 2);
        assert!(!chains.is_empty());
        for c in &chains {
            let ring = f.ring_of(c).unwrap();
            let g = f.ring_sides(&ring, 1).unwrap();
            assert_eq!(g.minus, 0.0);
            assert_eq!(g.plus, 0.0);
        }
    }

    #[test]
    fn random_is_deterministic() {
        let spec = RandomSpec { dim: 2, splits: 30, max_depth: 10, t_min: 0.1 };
        let a = random_filtration(&mut search::rng(5), &spec);
        let b = random_filtration(&mut search::rng(5), &spec);
        assert_eq!(a.num_atoms(), b.num_atoms());
        for (x, y) in a.atoms().iter().zip(b.atoms()) {
            assert_eq!(x.measure, y.measure);
        }
    }
}
