//! Structured-text (JSON) and CSV formats.
//!
//! Rational quantities are written as `"p/q"` strings so that files round-trip
//! exactly; plain JSON numbers are accepted on input and converted exactly from
//! their binary value.

use std::io::Write;

use anyhow::{anyhow, bail, Context, Result};
use lobsys_core::exact::{self, Rational};
use lobsys_core::generators::Manifest;
use lobsys_core::hermite::{ProjChain, RMat};
use lobsys_core::orthosystem::Coefficient;
use lobsys_core::partition::{Filtration, Mode, Rect, SplitSpec};
use lobsys_core::polyspace::Poly;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::VERSION;

/// A rational written as a string or a JSON number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Text(String),
    Float(f64),
}

impl Num {
    pub fn exact(r: &Rational) -> Num {
        Num::Text(r.to_string())
    }

    pub fn to_rational(&self, key: &str) -> Result<Rational> {
        match self {
            Num::Text(s) => exact::parse(s).ok_or_else(|| anyhow!("{key}: cannot parse {s:?} as a rational")),
            Num::Float(x) => exact::from_f64(*x).ok_or_else(|| anyhow!("{key}: {x} is not finite")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Geometric,
    Abstract,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitDoc {
    pub atom: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cut: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction: Option<Num>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiltrationDoc {
    pub dim: usize,
    pub mode: ModeName,
    pub splits: Vec<SplitDoc>,
}

/// Deserializes `T`, prefixing errors with the path of the offending key.
pub fn from_json_str<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            anyhow!("{inner}")
        } else {
            anyhow!("{path}: {inner}")
        }
    })
}

impl FiltrationDoc {
    pub fn from_filtration(f: &Filtration) -> FiltrationDoc {
        let splits = f
            .splits()
            .iter()
            .map(|s| match &s.spec {
                SplitSpec::Cut { atom, axis, at } => {
                    SplitDoc { atom: *atom, axis: Some(*axis), cut: Some(Num::exact(at)), fraction: None }
                }
                SplitSpec::Fraction { atom, t } => {
                    SplitDoc { atom: *atom, axis: None, cut: None, fraction: Some(Num::exact(t)) }
                }
            })
            .collect();
        let mode = match f.mode() {
            Mode::Geometric => ModeName::Geometric,
            Mode::Abstract => ModeName::Abstract,
        };
        FiltrationDoc { dim: f.dim(), mode, splits }
    }

    pub fn to_filtration(&self) -> Result<Filtration> {
        if self.dim == 0 {
            bail!("dim: must be positive");
        }
        let mode = match self.mode {
            ModeName::Geometric => Mode::Geometric,
            ModeName::Abstract => Mode::Abstract,
        };
        let mut f = match mode {
            Mode::Geometric => Filtration::new_geometric(self.dim),
            Mode::Abstract => Filtration::new_abstract(),
        };
        for (i, s) in self.splits.iter().enumerate() {
            let key = |k: &str| format!("splits[{i}].{k}");
            let spec = match (mode, s.axis, &s.cut, &s.fraction) {
                (Mode::Geometric, Some(axis), Some(cut), None) => {
                    SplitSpec::Cut { atom: s.atom, axis, at: cut.to_rational(&key("cut"))? }
                }
                (Mode::Geometric, None, _, _) => bail!("{}: required in geometric mode", key("axis")),
                (Mode::Geometric, _, None, _) => bail!("{}: required in geometric mode", key("cut")),
                (Mode::Geometric, _, _, Some(_)) => bail!("{}: not allowed in geometric mode", key("fraction")),
                (Mode::Abstract, None, None, Some(t)) => {
                    SplitSpec::Fraction { atom: s.atom, t: t.to_rational(&key("fraction"))? }
                }
                (Mode::Abstract, _, _, None) => bail!("{}: required in abstract mode", key("fraction")),
                (Mode::Abstract, Some(_), _, _) => bail!("{}: not allowed in abstract mode", key("axis")),
                (Mode::Abstract, _, Some(_), _) => bail!("{}: not allowed in abstract mode", key("cut")),
            };
            f.apply_split(spec).map_err(|e| anyhow!("splits[{i}]: {e}"))?;
        }
        Ok(f)
    }
}

pub fn filtration_to_json(f: &Filtration) -> String {
    serde_json::to_string_pretty(&FiltrationDoc::from_filtration(f)).expect("serializable") + "\n"
}

pub fn filtration_from_json(text: &str) -> Result<Filtration> {
    from_json_str::<FiltrationDoc>(text)?.to_filtration()
}

pub fn read_filtration(path: &std::path::Path) -> Result<Filtration> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    filtration_from_json(&text).with_context(|| format!("in {}", path.display()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectDoc {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyDoc {
    pub rect: RectDoc,
    pub degree: Vec<usize>,
    pub bernstein_coeffs: Vec<f64>,
}

impl PolyDoc {
    pub fn from_poly(p: &Poly) -> PolyDoc {
        PolyDoc {
            rect: RectDoc { lo: p.rect.lo.clone(), hi: p.rect.hi.clone() },
            degree: p.degree.clone(),
            bernstein_coeffs: p.coeffs.clone(),
        }
    }

    pub fn to_poly(&self) -> Result<Poly> {
        let d = self.degree.len();
        if self.rect.lo.len() != d || self.rect.hi.len() != d {
            bail!("rect: dimension does not match degree");
        }
        if self.rect.lo.iter().zip(&self.rect.hi).any(|(a, b)| !(a < b)) {
            bail!("rect: need lo < hi on every axis");
        }
        let n: usize = self.degree.iter().map(|r| r + 1).product();
        if self.bernstein_coeffs.len() != n {
            bail!("bernstein_coeffs: expected {n} entries, got {}", self.bernstein_coeffs.len());
        }
        Ok(Poly {
            rect: Rect::new(self.rect.lo.clone(), self.rect.hi.clone()),
            degree: self.degree.clone(),
            coeffs: self.bernstein_coeffs.clone(),
        })
    }
}

pub fn poly_to_json(p: &Poly) -> String {
    serde_json::to_string(&PolyDoc::from_poly(p)).expect("serializable")
}

pub fn poly_from_json(text: &str) -> Result<Poly> {
    from_json_str::<PolyDoc>(text)?.to_poly()
}

pub fn manifest_json(m: &Manifest) -> Value {
    let params: serde_json::Map<String, Value> =
        m.params.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
    let chains: Vec<Value> = m
        .chains
        .iter()
        .map(|(name, c)| serde_json::json!({ "name": name, "atoms": c.ids }))
        .collect();
    serde_json::json!({ "family": m.family, "params": params, "witness_chains": chains })
}

fn rmat_json(m: &RMat) -> Value {
    Value::Array(m.iter().map(|row| Value::Array(row.iter().map(|x| Value::String(x.to_string())).collect())).collect())
}

/// The operators `U_m` of a univariate chain, as exact matrices on the
/// normalized Bernstein coefficients of degree `r`.
pub fn hermite_chain_json(c: &ProjChain) -> Value {
    let ops: Vec<Value> = c
        .exact
        .iter()
        .enumerate()
        .map(|(m, u)| serde_json::json!({ "m": m, "matrix": rmat_json(u) }))
        .collect();
    serde_json::json!({
        "r": c.r,
        "gap_minus": c.minus,
        "gap_plus": c.plus,
        "p": c.p,
        "hermite_j": c.js,
        "operators": ops,
    })
}

/// Header line carried by every CSV report; readers skip it as a comment.
pub fn provenance_line(config_hash: &str) -> String {
    format!("# lobsys {VERSION} config-sha256 {config_hash}\n")
}

/// CSV text with a provenance comment line.
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> CsvTable {
        CsvTable { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, config_hash: &str) -> Result<String> {
        let mut out = provenance_line(config_hash).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&self.header)?;
            for r in &self.rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        Ok(String::from_utf8(out)?)
    }

    pub fn write(&self, path: &std::path::Path, config_hash: &str) -> Result<()> {
        let mut f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        f.write_all(self.to_csv(config_hash)?.as_bytes())?;
        Ok(())
    }
}

/// Reads a table written by [`CsvTable::to_csv`].
pub fn read_csv(text: &str) -> Result<CsvTable> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = r.headers()?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec?.iter().map(String::from).collect());
    }
    Ok(CsvTable { header, rows })
}

/// Shortest round-trip form; scientific notation for very small or large values.
pub fn fmt(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn coefficient_table(coeffs: &[Coefficient]) -> CsvTable {
    let mut t = CsvTable::new(&["split_index", "frame_index", "atom_id", "coefficient"]);
    for c in coeffs {
        t.push(vec![c.split.to_string(), c.frame_index.to_string(), c.atom.to_string(), fmt(c.value)]);
    }
    t
}

pub fn condition_header() -> CsvTable {
    CsvTable::new(&["condition", "p", "tau", "rho", "chain_top_id", "chain_len", "ratio"])
}

pub fn push_condition_rows(t: &mut CsvTable, rep: &lobsys_core::conditions::ConditionReport) {
    for c in &rep.per_top {
        t.push(vec![
            rep.condition.name().to_string(),
            fmt(rep.p),
            fmt(rep.tau),
            fmt(rep.rho),
            c.top.to_string(),
            c.len.to_string(),
            fmt(c.ratio),
        ]);
    }
}

pub fn curve_header() -> CsvTable {
    CsvTable::new(&["n", "error", "dictionary", "method"])
}

pub fn push_curve_rows(t: &mut CsvTable, c: &lobsys_core::approx::ApproxCurve) {
    for (n, e) in c.errors.iter().enumerate() {
        t.push(vec![n.to_string(), fmt(*e), c.dictionary.name().to_string(), c.method.name().to_string()]);
    }
}
