//! The `reproduce` families: each returns a CSV table, summary lines and
//! optional extra files (plots, dumps).

use anyhow::{anyhow, Result};
use lobsys_core::conditions::{self, closed_form_ratio, ConditionOptions};
use lobsys_core::exact::{self, Rational};
use lobsys_core::generators;
use lobsys_core::hermite::{self, r_is_zero, r_mul, r_sub, RMat};
use lobsys_core::orthosystem::{haar_explicit, System};
use lobsys_core::partition::{Chain, Filtration, Rect};
use lobsys_core::polyspace::{Space, SpaceSpec};
use lobsys_core::search;
use rand::Rng;

use crate::drivers::par_map;
use crate::formats::{fmt, hermite_chain_json, CsvTable};
use crate::plot::{self, Scale, Series};

pub struct Output {
    pub table: CsvTable,
    pub summary: Vec<String>,
    /// `(file name, contents)`
    pub files: Vec<(String, String)>,
}

/// `max Σ_{j=k}^{l} λ_j^σ / (Σ_{j=k}^{l} λ_j)^σ` over all contiguous ranges.
pub fn contiguous_max(lam: &[f64], sigma: f64) -> f64 {
    let mut ps = vec![0.0; lam.len() + 1];
    let mut pl = vec![0.0; lam.len() + 1];
    for (j, &l) in lam.iter().enumerate() {
        ps[j + 1] = ps[j] + l.powf(sigma);
        pl[j + 1] = pl[j] + l;
    }
    let mut best = 0.0f64;
    for k in 0..lam.len() {
        for l in k + 1..=lam.len() {
            best = best.max((ps[l] - ps[k]) / (pl[l] - pl[k]).powf(sigma));
        }
    }
    best
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn lemma315(gamma: f64, n_max: usize, plot_svg: bool) -> Result<Output> {
    let mut t = CsvTable::new(&["n", "sum_lambda", "sum_lambda_gamma"]);
    let bound = 2.0 + 0.5 / (1.0 - (1.0 - 1.0 / gamma).exp2());
    let inv = 1.0 / gamma;
    let k_exact = ((inv - inv.round()).abs() < 1e-12 && inv.round() >= 2.0).then(|| inv.round() as u32);
    let mut all_below = true;
    let mut pts = (Vec::new(), Vec::new());
    for n in 1..=n_max {
        let lam = generators::lambda_sequence(gamma, n)?;
        let s: f64 = lam.iter().sum();
        let sg: f64 = lam.iter().map(|l| l.powf(gamma)).sum();
        if let Some(k) = k_exact {
            let exact_sum: Rational = generators::lambda_sequence_exact(k, n)?.into_iter().sum();
            all_below &= exact_sum <= exact::from_f64(bound).expect("finite");
        } else {
            all_below &= s <= bound;
        }
        pts.0.push((n as f64, s));
        pts.1.push((n as f64, sg));
        t.push(vec![n.to_string(), fmt(s), fmt(sg)]);
    }
    let mode = if k_exact.is_some() { "exact rational" } else { "floating point" };
    let mut summary = vec![
        format!("gamma = {gamma}, n = 1..{n_max}"),
        format!("bound 2 + (1/2)/(1 - 2^(1 - 1/gamma)) = {bound}; all sums below it ({mode}): {all_below}"),
    ];
    let sigma = (1.0 + gamma) / 2.0;
    for n in [n_max.saturating_sub(4).max(1), n_max] {
        let c = contiguous_max(&generators::lambda_sequence(gamma, n)?, sigma);
        summary.push(format!("max contiguous-range ratio at sigma = {sigma}, n = {n}: {c}"));
    }
    let mut files = Vec::new();
    if plot_svg {
        let s = [Series { label: "sum lambda".into(), points: pts.0 }, Series { label: "sum lambda^gamma".into(), points: pts.1 }];
        files.push(("lemma3.15.svg".into(), plot::chart("lambda sums", "n", "sum", Scale::Linear, Scale::Linear, &s)));
    }
    Ok(Output { table: t, summary, files })
}

pub fn thm42(p: f64, tau0: f64, tau: f64, i_max: usize, rho: f64, plot_svg: bool) -> Result<Output> {
    let fam = generators::thm42_filtration(tau0, p, i_max, rho)?;
    let f = &fam.filtration;
    let mut t = CsvTable::new(&["i", "ratio_tau0", "ratio_tau"]);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (k, c) in fam.chains.iter().enumerate() {
        let r0 = closed_form_ratio(f, c, tau0 / p)?;
        let r1 = closed_form_ratio(f, c, tau / p)?;
        t.push(vec![(k + 1).to_string(), fmt(r0), fmt(r1)]);
        a.push(((k + 1) as f64, r0));
        b.push(((k + 1) as f64, r1));
    }
    let inc = a.windows(2).all(|w| w[1].1 > w[0].1);
    let tail: Vec<f64> = b.iter().skip(1).map(|x| x.1).collect();
    let spread = tail.iter().cloned().fold(0.0, f64::max) / tail.iter().cloned().fold(f64::INFINITY, f64::min);
    let summary = vec![
        format!("p = {p}, tau0 = {tau0}, tau = {tau}, i_max = {i_max}, rho = {rho}"),
        format!("ratio at tau0 strictly increasing: {inc}"),
        format!("max/min of the ratio at tau over i >= 2: {spread}"),
    ];
    let mut files = Vec::new();
    if plot_svg {
        let s = [Series { label: format!("tau = {tau0}"), points: a }, Series { label: format!("tau = {tau}"), points: b }];
        files.push(("thm4.2.svg".into(), plot::chart("closed-form ratio per chain", "i", "ratio", Scale::Linear, Scale::Log, &s)));
    }
    Ok(Output { table: t, summary, files })
}

/// Per `n`: max criterion over all subchains at degrees `r` and `r+1`, and
/// the designated witness at degree `r+1`.
#[derive(Clone, Debug)]
pub struct Ex55Row {
    pub n: usize,
    pub max_r: f64,
    pub max_r1: f64,
    pub witness_r1: f64,
}

pub fn ex55_row(n: usize, p: f64, tau: f64, r: usize, rho: f64) -> Result<Ex55Row> {
    let e = generators::example55_chain(n, p, tau, r, rho)?;
    let f = &e.filtration;
    let opts = ConditionOptions::new(p, tau, rho);
    let max_r = conditions::special_report(f, &[vec![r]], &opts)?.max_ratio;
    let max_r1 = conditions::special_report(f, &[vec![r + 1]], &opts)?.max_ratio;
    let w = conditions::special_1d(f, &e.witness, p, tau, r + 1)?;
    Ok(Ex55Row { n, max_r, max_r1, witness_r1: w[0].ratio.max(w[1].ratio) })
}

pub fn ex55(p: f64, tau: f64, r: usize, rho: f64, ns: &[usize], plot_svg: bool) -> Result<Output> {
    let rows = par_map(ns, |_, &n| ex55_row(n, p, tau, r, rho)).into_iter().collect::<Result<Vec<_>>>()?;
    let mut t = CsvTable::new(&["n", "max_ratio_degree_r", "max_ratio_degree_r1", "witness_ratio_degree_r1"]);
    for x in &rows {
        t.push(vec![x.n.to_string(), fmt(x.max_r), fmt(x.max_r1), fmt(x.witness_r1)]);
    }
    let llog: Vec<f64> = rows.iter().map(|x| (x.n as f64).ln().ln()).collect();
    let lw: Vec<f64> = rows.iter().map(|x| x.witness_r1.ln()).collect();
    let lm: Vec<f64> = rows.iter().map(|x| x.max_r1.ln()).collect();
    let deg_r: Vec<f64> = rows.iter().map(|x| x.max_r).collect();
    let mut summary = vec![format!("p = {p}, tau = {tau}, r = {r}, rho = {rho}, n = {ns:?}")];
    if rows.len() >= 2 {
        summary.push(format!(
            "degree r: max/min of the maximum over n = {}",
            deg_r.iter().cloned().fold(0.0, f64::max) / deg_r.iter().cloned().fold(f64::INFINITY, f64::min)
        ));
        summary.push(format!("degree r+1 witness: slope of log ratio vs log log n = {}", ls_slope(&llog, &lw)));
        summary.push(format!("degree r+1 maximum: slope of log ratio vs log log n = {}", ls_slope(&llog, &lm)));
    }
    let mut files = Vec::new();
    if plot_svg {
        let s = [
            Series { label: "degree r, max".into(), points: rows.iter().map(|x| (x.n as f64, x.max_r)).collect() },
            Series { label: "degree r+1, max".into(), points: rows.iter().map(|x| (x.n as f64, x.max_r1)).collect() },
            Series { label: "degree r+1, witness".into(), points: rows.iter().map(|x| (x.n as f64, x.witness_r1)).collect() },
        ];
        files.push(("ex5.5.svg".into(), plot::chart("explicit criterion", "n", "ratio", Scale::Log, Scale::Log, &s)));
    }
    Ok(Output { table: t, summary, files })
}

/// Tail of an example-5.5 chain starting at `j0 = 2(n - floor(log2 n))`.
pub fn ex55_witness(chain: &Chain, n: usize) -> Chain {
    let j0 = 2 * (n - n.ilog2() as usize);
    Chain { ids: chain.ids[j0 + 1..].to_vec() }
}

#[allow(clippy::too_many_arguments)]
pub fn ex58(d: usize, kappa: usize, axis: usize, ns: &[usize], halvings: usize, p: f64, tau: f64, rho: f64) -> Result<Output> {
    let e = generators::example58_partition(d, kappa, axis, ns, halvings, p, tau, rho)?;
    let f = &e.filtration;
    let deg = |k: usize| -> Vec<usize> { (0..d).map(|s| if s == axis { k } else { 0 }).collect() };
    let mut t = CsvTable::new(&["n", "witness_ratio_kappa", "witness_ratio_kappa1"]);
    for (&n, c) in ns.iter().zip(&e.chains) {
        let w = ex55_witness(c, n);
        let m = |k: usize| -> Result<f64> {
            Ok(conditions::special_multi(f, &w, p, tau, &deg(k))?.iter().map(|s| s.ratio).fold(0.0, f64::max))
        };
        t.push(vec![n.to_string(), fmt(m(kappa)?), fmt(m(kappa + 1)?)]);
    }
    let opts = ConditionOptions::new(p, tau, rho);
    let all_k = conditions::special_report(f, &[deg(kappa)], &opts)?;
    let all_k1 = conditions::special_report(f, &[deg(kappa + 1)], &opts)?;
    let summary = vec![
        format!("d = {d}, kappa = {kappa}, axis = {axis}, n = {ns:?}, halvings = {halvings}, p = {p}, tau = {tau}, rho = {rho}"),
        format!("atoms: {}, fat chains evaluated: {}", f.num_atoms(), all_k.samples),
        format!("max criterion over all fat chains, degree kappa on the axis: {}", all_k.max_ratio),
        format!("max criterion over all fat chains, degree kappa+1 on the axis: {}", all_k1.max_ratio),
    ];
    Ok(Output { table: t, summary, files: Vec::new() })
}

/// Exact checks of one chain `U_0..U_r`.
#[derive(Clone, Debug)]
pub struct HermiteChecks {
    pub idempotent: Vec<bool>,
    pub commutes: Vec<bool>,
    pub identity_on_pm: Vec<bool>,
    pub range_in_pm: Vec<bool>,
}

fn mat_vec_r(a: &RMat, v: &[Rational]) -> Vec<Rational> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

pub fn hermite_checks(c: &hermite::ProjChain) -> HermiteChecks {
    let r = c.r;
    let to_mono = hermite::bernstein_to_monomial(r);
    let mut out = HermiteChecks { idempotent: vec![], commutes: vec![], identity_on_pm: vec![], range_in_pm: vec![] };
    for m in 0..=r {
        let u = &c.exact[m];
        out.idempotent.push(r_is_zero(&r_sub(&r_mul(u, u), u)));
        out.commutes.push((0..=r).all(|k| {
            let uk = &c.exact[k];
            let lo = &c.exact[m.min(k)];
            r_is_zero(&r_sub(&r_mul(u, uk), lo)) && r_is_zero(&r_sub(&r_mul(uk, u), lo))
        }));
        out.identity_on_pm.push(hermite::monomial_basis(&[r], &[m]).iter().all(|v| mat_vec_r(u, v) == *v));
        // monomial coefficients of every column above degree m vanish
        let mono = r_mul(&to_mono, u);
        out.range_in_pm.push(mono.iter().skip(m + 1).all(|row| row.iter().all(|x| *x == Rational::from_integer(0.into()))));
    }
    out
}

pub fn hermite_repro(r: usize, p: f64, minus: f64, plus: f64, seed: u64) -> Result<Output> {
    let c = hermite::build_u(minus, plus, p, r)?;
    let checks = hermite_checks(&c);
    let tc = hermite::tensor_u(&Rect::new(vec![minus], vec![1.0 - plus]), p, &[r])?;
    let norms = hermite::chain_norms(&tc, p, 8, seed)?;
    let mut t = CsvTable::new(&[
        "m",
        "hermite_j",
        "idempotent",
        "commutes",
        "identity_on_P_m",
        "range_in_P_m",
        "norm_on_ring",
        "norm_on_cube",
    ]);
    for m in 0..=r {
        t.push(vec![
            m.to_string(),
            if m < r { c.js[m].to_string() } else { String::new() },
            checks.idempotent[m].to_string(),
            checks.commutes[m].to_string(),
            checks.identity_on_pm[m].to_string(),
            checks.range_in_pm[m].to_string(),
            fmt(norms[m].on_ring),
            fmt(norms[m].on_cube),
        ]);
    }
    let all = |v: &[bool]| v.iter().all(|&b| b);
    let summary = vec![
        format!("r = {r}, p = {p}, ring [0,1] minus ({minus}, {})", 1.0 - plus),
        format!(
            "exact checks: idempotent {}, commute {}, identity on P_m {}, range in P_m {}",
            all(&checks.idempotent),
            all(&checks.commutes),
            all(&checks.identity_on_pm),
            all(&checks.range_in_pm)
        ),
    ];
    let dump = serde_json::to_string_pretty(&hermite_chain_json(&c))? + "\n";
    Ok(Output { table: t, summary, files: vec![("hermite_operators.json".into(), dump)] })
}

/// One Haar sample: `(φ on A', φ on A'')` from the frame and from the formula.
pub fn haar_sample(t: &Rational) -> Result<((f64, f64), (f64, f64))> {
    let mut f = Filtration::new_geometric(1);
    f.split_relative(0, 0, t)?;
    let sys = System::build(&f, &Space::new(SpaceSpec::Constant, 1)?)?;
    let fr = &sys.frame(1).funcs[0];
    let (a, b) = (f.measure(sys.frame(1).small), f.measure(sys.frame(1).large));
    Ok(((fr.on_small[0], fr.on_large[0]), haar_explicit(a, b)))
}

pub fn haar(samples: usize, seed: u64) -> Result<Output> {
    let mut rng = search::rng(seed);
    let mut t = CsvTable::new(&["t", "phi_small", "phi_large", "explicit_small", "explicit_large", "abs_err"]);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let x: f64 = rng.gen_range(1e-6..=0.5);
        let tr = exact::from_f64(x).ok_or_else(|| anyhow!("sample {x}"))?;
        let ((s, l), (es, el)) = haar_sample(&tr)?;
        let sign = if s * es < 0.0 { -1.0 } else { 1.0 };
        let err = (sign * s - es).abs().max((sign * l - el).abs());
        worst = worst.max(err);
        t.push(vec![fmt(x), fmt(s), fmt(l), fmt(es), fmt(el), fmt(err)]);
    }
    Ok(Output { table: t, summary: vec![format!("{samples} samples, max abs error up to sign {worst}")], files: Vec::new() })
}
