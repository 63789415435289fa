//! Run configuration: one JSON document, overridden key by key by flags.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use lobsys_core::exact;
use lobsys_core::generators::{self, Manifest, RandomSpec};
use lobsys_core::partition::Filtration;
use lobsys_core::polyspace::SpaceSpec;
use lobsys_core::search;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::formats;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    /// Worker threads; results do not depend on it, so it is not hashed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot: Option<bool>,
    /// Path of a filtration file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filtration: Option<String>,
    /// empty | dyadic | regular | random | thm4.2 | ex5.5 | ex5.8
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub splits: Option<usize>,
    /// Larger-child fraction of the regular generator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau0: Option<f64>,
    /// Greedy target: x | power:a | step:c | kink:c
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident, $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl Config {
    pub fn from_json(text: &str) -> Result<Config> {
        formats::from_json_str(text).context("malformed config")
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Config::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Keys set in `other` replace those in `self`.
    pub fn overlay(&mut self, other: &Config) {
        overlay!(
            self, other, seed, p, tau, rho, space, depth, budget, restarts, workers, n, gamma, plot, filtration,
            generator, dim, splits, c3, kappa, axis, i_max, tau0, target, samples
        );
    }

    /// SHA-256 of the canonical JSON form, without `workers`.
    pub fn hash(&self) -> String {
        self.hash_with("")
    }

    /// As [`Config::hash`], with `context` (e.g. the subcommand) prepended.
    pub fn hash_with(&self, context: &str) -> String {
        let mut c = self.clone();
        c.workers = None;
        let text = format!("{context}\n{}", serde_json::to_string(&c).expect("serializable"));
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
    pub fn p(&self) -> f64 {
        self.p.unwrap_or(2.0)
    }
    pub fn tau(&self) -> f64 {
        self.tau.unwrap_or(1.0)
    }
    pub fn rho(&self) -> f64 {
        self.rho.unwrap_or(0.5)
    }
    pub fn depth(&self) -> usize {
        self.depth.unwrap_or(8)
    }
    pub fn budget(&self) -> usize {
        self.budget.unwrap_or(4000)
    }
    pub fn restarts(&self) -> usize {
        self.restarts.unwrap_or(8)
    }
    pub fn dim(&self) -> usize {
        self.dim.unwrap_or(1)
    }
    pub fn gamma(&self) -> f64 {
        self.gamma.unwrap_or(0.5)
    }
    pub fn plot(&self) -> bool {
        self.plot.unwrap_or(false)
    }

    /// Checks ranges, naming the offending key.
    pub fn validate(&self) -> Result<()> {
        let p = self.p();
        if !(p > 1.0 && p.is_finite()) {
            bail!("p: {p} must lie in (1, inf)");
        }
        let tau = self.tau();
        if !(tau > 0.0 && tau < p) {
            bail!("tau: {tau} must lie in (0, p) with p = {p}");
        }
        let rho = self.rho();
        if !(rho > 0.0 && rho < 1.0) {
            bail!("rho: {rho} must lie in (0, 1)");
        }
        let gamma = self.gamma();
        if !(gamma > 0.0 && gamma < 1.0) {
            bail!("gamma: {gamma} must lie in (0, 1)");
        }
        if let Some(c3) = self.c3 {
            if !(0.5..1.0).contains(&c3) {
                bail!("c3: {c3} must lie in [0.5, 1)");
            }
        }
        if let Some(t0) = self.tau0 {
            if !(t0 > 0.0 && t0 < p) {
                bail!("tau0: {t0} must lie in (0, p) with p = {p}");
            }
        }
        if self.dim == Some(0) {
            bail!("dim: must be positive");
        }
        if let (Some(s), None) = (&self.space, &self.filtration) {
            parse_space(s, self.dim()).map_err(|e| anyhow!("space: {e}"))?;
        }
        if self.filtration.is_some() && self.generator.is_some() {
            bail!("filtration: cannot be combined with generator");
        }
        Ok(())
    }

    pub fn space_spec(&self, d: usize) -> Result<SpaceSpec> {
        parse_space(self.space.as_deref().unwrap_or("constant"), d).map_err(|e| anyhow!("space: {e}"))
    }

    /// The filtration named by `filtration` or `generator` (default: empty).
    pub fn build_filtration(&self) -> Result<(Filtration, Option<Manifest>)> {
        if let Some(path) = &self.filtration {
            return Ok((formats::read_filtration(Path::new(path))?, None));
        }
        let gen = self.generator.as_deref().unwrap_or("empty");
        let (d, depth, p, tau, rho) = (self.dim(), self.depth(), self.p(), self.tau(), self.rho());
        Ok(match gen {
            "empty" => (Filtration::new_geometric(d), None),
            "dyadic" => (generators::dyadic(d, depth), None),
            "regular" => {
                let small = exact::from_f64(1.0 - self.c3.unwrap_or(0.75)).expect("finite");
                (generators::regular_tree(d, depth, |_, _| small.clone()), None)
            }
            "random" => {
                let spec = RandomSpec { dim: d, splits: self.splits.unwrap_or(64), max_depth: depth, t_min: 0.1 };
                (generators::random_filtration(&mut search::rng(self.seed()), &spec), None)
            }
            "thm4.2" => {
                let t = generators::thm42_filtration(self.tau0.unwrap_or(p / 2.0), p, self.i_max.unwrap_or(12), rho)
                    .map_err(|e| anyhow!("generator: {e}"))?;
                (t.filtration, Some(t.manifest))
            }
            "ex5.5" => {
                let e = generators::example55_chain(self.n.unwrap_or(16), p, tau, self.kappa.unwrap_or(1), self.rho.unwrap_or(0.9))
                    .map_err(|e| anyhow!("n: {e}"))?;
                (e.filtration, Some(e.manifest))
            }
            "ex5.8" => {
                let ns = ex58_ns(self.n.unwrap_or(32));
                let e = generators::example58_partition(
                    d.max(2),
                    self.kappa.unwrap_or(1),
                    self.axis.unwrap_or(0),
                    &ns,
                    self.depth.unwrap_or(2),
                    p,
                    tau,
                    self.rho.unwrap_or(0.9),
                )
                .map_err(|e| anyhow!("generator: {e}"))?;
                (e.filtration, Some(e.manifest))
            }
            other => bail!("generator: unknown family {other:?}"),
        })
    }
}

/// Chain parameters `8, 16, ...` up to `n` for the example-5.8 partition.
pub fn ex58_ns(n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = std::iter::successors(Some(8usize), |k| Some(k * 2)).take_while(|&k| k <= n).collect();
    if out.is_empty() {
        out.push(n);
    }
    out
}

fn parse_list(s: &str) -> Result<Vec<usize>> {
    s.split(',').map(|x| x.trim().parse::<usize>().map_err(|_| anyhow!("{x:?} is not a non-negative integer"))).collect()
}

/// `constant`, `tensor:r1,..,rd` (one value is repeated on every axis),
/// `total:r` or `span:m1;m2;...` with each `m` a comma list of length `d`.
pub fn parse_space(s: &str, d: usize) -> Result<SpaceSpec> {
    let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
    match kind.trim() {
        "constant" if arg.is_empty() => Ok(SpaceSpec::Constant),
        "tensor" => {
            let mut r = parse_list(arg)?;
            if r.len() == 1 && d > 1 {
                r = vec![r[0]; d];
            }
            if r.len() != d {
                bail!("tensor needs {d} degrees, got {}", r.len());
            }
            Ok(SpaceSpec::Tensor(r))
        }
        "total" => Ok(SpaceSpec::TotalDegree(arg.trim().parse().map_err(|_| anyhow!("{arg:?} is not a degree"))?)),
        "span" => {
            let m = arg.split(';').map(parse_list).collect::<Result<Vec<_>>>()?;
            if m.is_empty() || m.iter().any(|v| v.len() != d) {
                bail!("span entries need {d} components each");
            }
            Ok(SpaceSpec::SpanSet(m))
        }
        _ => bail!("cannot parse {s:?}; expected constant, tensor:r1,..,rd, total:r or span:m1;m2"),
    }
}
