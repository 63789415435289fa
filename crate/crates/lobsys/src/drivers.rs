//! Parallel drivers. Every task has an index; results are collected in index
//! order and reduced deterministically, so the worker count never changes
//! the output.

use anyhow::{anyhow, Result};
use lobsys_core::bernstein_test::{self, BiOptions, BiReport};
use lobsys_core::orthosystem::System;
use lobsys_core::partition::AtomId;
use rayon::prelude::*;

pub fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        b = b.num_threads(w.max(1));
    }
    b.build().map_err(|e| anyhow!("workers: {e}"))
}

/// Order-preserving parallel map.
pub fn par_map<T: Sync, R: Send, F: Fn(usize, &T) -> R + Sync>(items: &[T], f: F) -> Vec<R> {
    items.par_iter().enumerate().map(|(i, x)| f(i, x)).collect()
}

/// `bi_constant` with the restarts spread over the pool.
pub fn bi_constant_par(sys: &System, n: usize, opts: &BiOptions, hints: &[AtomId]) -> Result<BiReport> {
    if n == 0 {
        return Err(anyhow!("n: must be positive"));
    }
    let idx: Vec<usize> = (0..opts.restarts.max(1)).collect();
    let results = par_map(&idx, |_, &i| bernstein_test::bi_restart(sys, n, opts, hints, i))
        .into_iter()
        .collect::<lobsys_core::Result<Vec<_>>>()?;
    Ok(bernstein_test::reduce_restarts(n, opts.beta(), results))
}
