//! Seeded sampling and multi-start coordinate ascent.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream `stream` derived from `seed`, for reproducible independent restarts.
pub fn rng_stream(seed: u64, stream: u64) -> SeededRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen::<f64>();
    math::sqrt(-2.0 * math::ln(u1)) * math::cos(2.0 * core::f64::consts::PI * u2)
}

pub fn unit_vector<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| normal(rng)).collect();
        let n = norm(&v);
        if n > 1e-12 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

pub fn norm(v: &[f64]) -> f64 {
    math::sqrt(v.iter().map(|x| x * x).sum())
}

/// Point `i` of the Halton sequence in `[0,1)^d` (bases 2, 3, 5, 7, ...).
pub fn halton(i: usize, d: usize) -> Vec<f64> {
    const PRIMES: [usize; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    (0..d)
        .map(|k| {
            let b = PRIMES[k];
            let (mut f, mut r, mut n) = (1.0, 0.0, i + 1);
            while n > 0 {
                f /= b as f64;
                r += f * (n % b) as f64;
                n /= b;
            }
            r
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct AscentResult {
    pub value: f64,
    pub point: Vec<f64>,
    pub evaluations: usize,
    /// Whether the step size fell below the threshold before the budget ran out.
    pub converged: bool,
}

/// Coordinate ascent of a scale-invariant objective on the unit sphere.
pub fn ascend_sphere<F: FnMut(&[f64]) -> f64>(start: &[f64], f: &mut F, budget: usize) -> AscentResult {
    let dim = start.len();
    let mut x = start.to_vec();
    let mut best = f(&x);
    let mut evals = 1;
    let mut step = 0.5;
    let mut converged = dim == 1;
    if dim == 1 {
        return AscentResult { value: best, point: x, evaluations: evals, converged };
    }
    while evals < budget {
        let mut improved = false;
        for i in 0..dim {
            for sign in [1.0, -1.0] {
                if evals >= budget {
                    break;
                }
                let mut y = x.clone();
                y[i] += sign * step;
                let n = norm(&y);
                if n < 1e-14 {
                    continue;
                }
                y.iter_mut().for_each(|v| *v /= n);
                let val = f(&y);
                evals += 1;
                if val > best {
                    best = val;
                    x = y;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
            if step < 1e-6 {
                converged = true;
                break;
            }
        }
    }
    AscentResult { value: best, point: x, evaluations: evals, converged }
}

/// Multi-start maximization over the unit sphere: the coordinate vectors, the
/// optional hint, then random directions.
pub fn maximize_sphere<F: FnMut(&[f64]) -> f64>(
    dim: usize,
    starts: usize,
    seed: u64,
    hint: Option<&[f64]>,
    mut f: F,
) -> AscentResult {
    let mut rng = rng(seed);
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    if let Some(h) = hint {
        if norm(h) > 0.0 {
            let n = norm(h);
            candidates.push(h.iter().map(|v| v / n).collect());
        }
    }
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        candidates.push(e);
    }
    while candidates.len() < starts.max(1) {
        candidates.push(unit_vector(&mut rng, dim));
    }
    let per = if dim == 1 { 1 } else { 200 * dim };
    let mut best: Option<AscentResult> = None;
    let mut evals = 0;
    for c in &candidates {
        let r = ascend_sphere(c, &mut f, per);
        evals += r.evaluations;
        if best.as_ref().map_or(true, |b| r.value > b.value) {
            best = Some(r);
        }
    }
    let mut b = best.unwrap();
    b.evaluations = evals;
    b
}
