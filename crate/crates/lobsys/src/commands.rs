//! Subcommand implementations. Each writes `report.csv`, `summary.md` and
//! `config.json` into the output directory, plus optional extra files.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use lobsys_core::approx::{self, Dictionary};
use lobsys_core::bernstein_test::{self, BiOptions, BiReport, SigmaElement};
use lobsys_core::conditions::{self, ConditionOptions, ConditionReport, Strategy};
use lobsys_core::orthosystem::System;
use lobsys_core::polyspace::Space;

use crate::config::{ex58_ns, Config};
use crate::drivers::{bi_constant_par, pool};
use crate::formats::{self, fmt, CsvTable};
use crate::plot::{self, Scale, Series};
use crate::reproduce::{self, Output};
use crate::targets::{project_onto_leaves, Target};
use crate::VERSION;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Lemma315,
    Thm42,
    Ex55,
    Ex58,
    Hermite,
    Haar,
}

impl Family {
    pub fn parse(s: &str) -> Result<Family> {
        Ok(match s {
            "lemma3.15" => Family::Lemma315,
            "thm4.2" => Family::Thm42,
            "ex5.5" => Family::Ex55,
            "ex5.8" => Family::Ex58,
            "hermite" => Family::Hermite,
            "haar" => Family::Haar,
            _ => bail!("unknown family {s:?}; expected lemma3.15, thm4.2, ex5.5, ex5.8, hermite or haar"),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Lemma315 => "lemma3.15",
            Family::Thm42 => "thm4.2",
            Family::Ex55 => "ex5.5",
            Family::Ex58 => "ex5.8",
            Family::Hermite => "hermite",
            Family::Haar => "haar",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Build,
    CheckConditions,
    EstimateBi,
    Greedy,
    Reproduce(Family),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Build => "build",
            Command::CheckConditions => "check-conditions",
            Command::EstimateBi => "estimate-bi",
            Command::Greedy => "greedy",
            Command::Reproduce(_) => "reproduce",
        }
    }

    /// Command line form, e.g. `reproduce ex5.5`.
    pub fn label(&self) -> String {
        match self {
            Command::Reproduce(f) => format!("reproduce {}", f.name()),
            c => c.name().to_string(),
        }
    }
}

/// Runs `cmd` with the effective configuration `cfg`, writing into `out`.
pub fn run(cmd: Command, cfg: &Config, out: &Path) -> Result<()> {
    cfg.validate()?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let hash = cfg.hash_with(&cmd.label());
    let pool = pool(cfg.workers)?;
    let res = pool.install(|| match cmd {
        Command::Build => build(cfg),
        Command::CheckConditions => check_conditions(cfg),
        Command::EstimateBi => estimate_bi(cfg),
        Command::Greedy => greedy(cfg),
        Command::Reproduce(f) => reproduce_family(f, cfg),
    })?;
    res.table.write(&out.join("report.csv"), &hash)?;
    let mut summary = String::new();
    writeln!(summary, "# lobsys {}", cmd.label())?;
    writeln!(summary)?;
    writeln!(summary, "- version: {VERSION}")?;
    writeln!(summary, "- config sha256: {hash}")?;
    writeln!(summary)?;
    for line in &res.summary {
        writeln!(summary, "{line}")?;
    }
    std::fs::write(out.join("summary.md"), summary)?;
    let mut shown = cfg.clone();
    shown.workers = None;
    std::fs::write(out.join("config.json"), serde_json::to_string_pretty(&shown)? + "\n")?;
    for (name, text) in &res.files {
        std::fs::write(out.join(name), text)?;
    }
    Ok(())
}

fn build(cfg: &Config) -> Result<Output> {
    let (f, manifest) = cfg.build_filtration()?;
    let mut files = vec![("filtration.json".to_string(), formats::filtration_to_json(&f))];
    if let Some(m) = &manifest {
        files.push(("manifest.json".to_string(), serde_json::to_string_pretty(&formats::manifest_json(m))? + "\n"));
    }
    let mut t = CsvTable::new(&["atom_id", "parent", "depth", "split_index", "measure"]);
    for a in f.atoms() {
        t.push(vec![
            a.id.to_string(),
            a.parent.map(|x| x.to_string()).unwrap_or_default(),
            a.depth.to_string(),
            a.split_index.map(|x| x.to_string()).unwrap_or_default(),
            a.measure.to_string(),
        ]);
    }
    let summary = vec![
        format!("- mode: {:?}, dim {}", f.mode(), f.dim()),
        format!("- splits: {}, atoms: {}, max depth: {}", f.num_splits(), f.num_atoms(), f.max_depth()),
    ];
    Ok(Output { table: t, summary, files })
}

fn condition_options(cfg: &Config) -> ConditionOptions {
    let mut o = ConditionOptions::new(cfg.p(), cfg.tau(), cfg.rho());
    o.seed = cfg.seed();
    if let Some(b) = cfg.budget {
        o.max_chains = b;
    }
    o
}

fn describe(rep: &ConditionReport) -> Vec<String> {
    let mut v = vec![format!(
        "- {}{}: max ratio {} over {} chains{}",
        rep.condition.name(),
        rep.strategy.as_ref().map(|s| format!(" ({})", s.name())).unwrap_or_default(),
        fmt(rep.max_ratio),
        rep.samples,
        if rep.search_limited { ", search limited" } else { "" }
    )];
    if let Some(c) = &rep.witness_chain {
        v.push(format!("  - witness chain: {:?}", c.ids));
    }
    if let Some(p) = &rep.witness_function {
        v.push(format!("  - witness function: {}", formats::poly_to_json(p)));
    }
    v
}

fn check_conditions(cfg: &Config) -> Result<Output> {
    let (f, _) = cfg.build_filtration()?;
    let space = Space::new(cfg.space_spec(f.dim())?, f.dim()).map_err(|e| anyhow!("space: {e}"))?;
    let opts = condition_options(cfg);
    let mut t = formats::condition_header();
    let mut summary = vec![format!(
        "- p = {}, tau = {}, rho = {}, space = {}",
        cfg.p(),
        cfg.tau(),
        cfg.rho(),
        cfg.space.as_deref().unwrap_or("constant")
    )];
    let mut add = |name: &str, r: lobsys_core::Result<ConditionReport>, t: &mut CsvTable| match r {
        Ok(rep) => {
            formats::push_condition_rows(t, &rep);
            summary.extend(describe(&rep));
        }
        Err(e) => summary.push(format!("- {name}: not evaluated ({e})")),
    };
    add("w1", conditions::w1_report(&f, &space, &opts), &mut t);
    match System::build(&f, &space) {
        Ok(sys) => add("w2", conditions::w2_report(&sys, &opts), &mut t),
        Err(e) => add("w2", Err(e), &mut t),
    }
    add("w2*", conditions::w2s_report(&f, &space, &opts, Strategy::auto(&space)), &mut t);
    if space.is_constant() {
        add("haar", conditions::haar_report(&f, &opts), &mut t);
    }
    Ok(Output { table: t, summary, files: Vec::new() })
}

fn dump_witness(g: &SigmaElement) -> String {
    let terms: Vec<String> = g
        .terms
        .iter()
        .map(|t| format!("atom {} coeffs [{}]", t.atom, t.coeffs.iter().map(|c| fmt(*c)).collect::<Vec<_>>().join(", ")))
        .collect();
    if terms.is_empty() {
        "none".into()
    } else {
        terms.join("; ")
    }
}

fn bi_row(t: &mut CsvTable, quantity: &str, r: &BiReport) {
    t.push(vec![
        quantity.into(),
        r.n.to_string(),
        fmt(r.beta),
        fmt(r.constant_estimate),
        r.restarts.to_string(),
        r.evaluations.to_string(),
        r.search_limited.to_string(),
    ]);
}

fn estimate_bi(cfg: &Config) -> Result<Output> {
    let (f, _) = cfg.build_filtration()?;
    let space = Space::new(cfg.space_spec(f.dim())?, f.dim()).map_err(|e| anyhow!("space: {e}"))?;
    let sys = System::build(&f, &space)?;
    let mut opts = BiOptions::new(cfg.p(), cfg.tau());
    opts.seed = cfg.seed();
    opts.budget = cfg.budget();
    opts.restarts = cfg.restarts();
    if let Some(d) = cfg.depth {
        opts.depth_cap = d;
    }
    opts.validate().map_err(|e| anyhow!("tau: {e}"))?;
    let mut t = CsvTable::new(&["quantity", "n", "beta", "constant", "restarts", "evaluations", "search_limited"]);
    let mut summary = vec![format!("- p = {}, tau = {}, beta = {}", cfg.p(), cfg.tau(), opts.beta())];
    let atoms = bernstein_test::bi_atoms_constant(&sys, &opts)?;
    bi_row(&mut t, "bi_atoms", &atoms);
    summary.push(format!("- bi_atoms: {} (witness {})", fmt(atoms.constant_estimate), dump_witness(&atoms.witness)));
    let rings = bernstein_test::bi_rings_constant(&sys, &opts)?;
    bi_row(&mut t, "bi_rings", &rings);
    summary.push(format!("- bi_rings: {} (witness {})", fmt(rings.constant_estimate), dump_witness(&rings.witness)));
    for n in 1..=cfg.n.unwrap_or(4) {
        let r = bi_constant_par(&sys, n, &opts, &[])?;
        bi_row(&mut t, "bi_constant", &r);
        summary.push(format!(
            "- n = {n}: constant {}{} (witness {})",
            fmt(r.constant_estimate),
            if r.search_limited { ", search limited" } else { "" },
            dump_witness(&r.witness)
        ));
    }
    Ok(Output { table: t, summary, files: Vec::new() })
}

fn greedy(cfg: &Config) -> Result<Output> {
    let (f, _) = cfg.build_filtration()?;
    let space = Space::new(cfg.space_spec(f.dim())?, f.dim()).map_err(|e| anyhow!("space: {e}"))?;
    let sys = System::build(&f, &space)?;
    let target_name = cfg.target.clone().unwrap_or_else(|| "power:0.5".into());
    let target = Target::parse(&target_name)?;
    let nodes = space.degree().iter().copied().max().unwrap_or(0) + 8;
    let fun = project_onto_leaves(&sys, |x| target.eval(x), nodes)?;
    let p = cfg.p();
    let big_n = cfg.n.unwrap_or(64);
    let psi = approx::en_curve(&sys, &fun, Dictionary::Psi, p, big_n, &target_name);
    let c = approx::en_curve(&sys, &fun, Dictionary::C, p, big_n, &target_name);
    let mut t = formats::curve_header();
    formats::push_curve_rows(&mut t, &psi);
    formats::push_curve_rows(&mut t, &c);
    let coeffs = approx::psi_coefficients(&sys, &fun, p);
    let values: Vec<f64> = coeffs.iter().map(|c| c.value).collect();
    let tau = cfg.tau();
    let alpha = 1.0 / tau - 1.0 / p;
    let base = sys.lp_norm(&fun, p);
    let q = approx::aspace_quasinorm(&psi, alpha, tau, base, approx::DEFAULT_TRUNCATION)?;
    let mut summary = vec![
        format!("- target {target_name}, p = {p}, {} coefficients", coeffs.len()),
        format!("- tau-norm of the Psi coefficients (tau = {tau}): {}", fmt(approx::tau_norm(&values, tau))),
        format!(
            "- approximation quasi-norm (alpha = {alpha}, q = tau), truncated at k = {}: {}{}",
            q.truncation,
            fmt(q.value),
            if q.tail_warning { " (tail not negligible)" } else { "" }
        ),
    ];
    summary.push("- Psi curve is greedy; C curve is an upper bound from disjoint atom pieces".into());
    let coef_csv = formats::coefficient_table(&coeffs).to_csv(&cfg.hash_with(&Command::Greedy.label()))?;
    let mut files = vec![("coefficients.csv".to_string(), coef_csv)];
    if cfg.plot() {
        let dyadic = |c: &approx::ApproxCurve| -> Vec<(f64, f64)> {
            (0..).map(|k| 1usize << k).take_while(|&n| n < c.errors.len()).map(|n| (n as f64, c.errors[n])).collect()
        };
        let s = [Series { label: "Psi greedy".into(), points: dyadic(&psi) }, Series { label: "C pieces".into(), points: dyadic(&c) }];
        files.push(("curve.svg".into(), plot::chart("E_{2^k}", "2^k", "error", Scale::Log, Scale::Log, &s)));
    }
    Ok(Output { table: t, summary, files })
}

fn reproduce_family(fam: Family, cfg: &Config) -> Result<Output> {
    let (p, plot) = (cfg.p(), cfg.plot());
    match fam {
        Family::Lemma315 => reproduce::lemma315(cfg.gamma(), cfg.n.unwrap_or(12), plot),
        Family::Thm42 => {
            let tau0 = cfg.tau0.unwrap_or(p / 2.0);
            let tau = cfg.tau.unwrap_or((tau0 + p) / 2.0);
            reproduce::thm42(p, tau0, tau, cfg.i_max.unwrap_or(12), cfg.rho(), plot)
        }
        Family::Ex55 => {
            let top = cfg.n.unwrap_or(256);
            let ns: Vec<usize> = std::iter::successors(Some(16usize), |k| Some(k * 2)).take_while(|&k| k <= top).collect();
            if ns.is_empty() {
                bail!("n: must be at least 16");
            }
            reproduce::ex55(p, cfg.tau(), cfg.kappa.unwrap_or(1), cfg.rho.unwrap_or(0.9), &ns, plot)
        }
        Family::Ex58 => reproduce::ex58(
            cfg.dim().max(2),
            cfg.kappa.unwrap_or(1),
            cfg.axis.unwrap_or(0),
            &ex58_ns(cfg.n.unwrap_or(32)),
            cfg.depth.unwrap_or(2),
            p,
            cfg.tau(),
            cfg.rho.unwrap_or(0.9),
        ),
        Family::Hermite => {
            let minus = 0.5f64.powi(cfg.depth.unwrap_or(10) as i32);
            reproduce::hermite_repro(cfg.kappa.unwrap_or(2), p, minus, 0.25, cfg.seed())
        }
        Family::Haar => reproduce::haar(cfg.samples.unwrap_or(1000), cfg.seed()),
    }
}
