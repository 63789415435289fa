//! Named target functions for greedy runs, projected onto `S` on each leaf.

use anyhow::{anyhow, bail, Result};
use lobsys_core::orthosystem::{PiecewiseFunction, System};
use lobsys_core::quadrature::GaussLegendre;

#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    /// `x_1^a`
    Power(f64),
    /// Indicator of `x_1 < c`.
    Step(f64),
    /// `|x_1 - c|`
    Kink(f64),
}

impl Target {
    pub fn parse(s: &str) -> Result<Target> {
        let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
        let num = |default: f64| -> Result<f64> {
            if arg.is_empty() {
                Ok(default)
            } else {
                arg.trim().parse().map_err(|_| anyhow!("target: {arg:?} is not a number"))
            }
        };
        let t = match kind {
            "x" if arg.is_empty() => Target::Power(1.0),
            "power" => Target::Power(num(0.5)?),
            "step" => Target::Step(num(1.0 / 3.0)?),
            "kink" => Target::Kink(num(1.0 / 3.0)?),
            _ => bail!("target: unknown {s:?}; expected x, power:a, step:c or kink:c"),
        };
        if let Target::Power(a) = t {
            if !(a > 0.0) {
                bail!("target: exponent must be positive");
            }
        }
        Ok(t)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            Target::Power(a) => x[0].powf(a),
            Target::Step(c) => f64::from(u8::from(x[0] < c)),
            Target::Kink(c) => (x[0] - c).abs(),
        }
    }
}

/// `L^2` projection of `f` onto `S(A)` for every leaf `A`, by tensor
/// Gauss-Legendre quadrature with `nodes` points per axis.
pub fn project_onto_leaves<F: Fn(&[f64]) -> f64>(sys: &System, f: F, nodes: usize) -> Result<PiecewiseFunction> {
    let filt = sys.filtration();
    if !filt.is_geometric() {
        bail!("targets need a geometric filtration");
    }
    let space = sys.space();
    let d = filt.dim();
    let n = space.dim();
    let g = GaussLegendre::new(nodes.max(1));
    let q = g.nodes.len();
    let total = q.pow(d as u32);
    let mut out = PiecewiseFunction::new();
    let mut unit = vec![0.0; n];
    for leaf in filt.leaves() {
        let rect = filt.rect(leaf)?;
        let mut c = vec![0.0; n];
        for k in 0..total {
            let (mut idx, mut w) = (k, 1.0);
            let mut t = vec![0.0; d];
            for ts in t.iter_mut() {
                *ts = g.nodes[idx % q];
                w *= g.weights[idx % q];
                idx /= q;
            }
            let x: Vec<f64> = (0..d).map(|s| rect.lo[s] + t[s] * rect.side(s)).collect();
            let fx = f(&x);
            for (j, cj) in c.iter_mut().enumerate() {
                unit[j] = 1.0;
                *cj += w * fx * space.eval_local(&unit, &t);
                unit[j] = 0.0;
            }
        }
        out.insert(leaf, c);
    }
    Ok(out)
}
