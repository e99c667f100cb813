//! Deterministic parallel Monte Carlo plumbing.
//!
//! Replicates are mapped over a shared thread pool by replicate index; each
//! replicate derives its own RNG substream from the base seed, and reductions
//! run in fixed index order (pairwise tree sums). Results are therefore
//! bit-identical for a fixed seed no matter how many workers run, which is
//! what the `BOUNDS_THREADS` environment variable caps.

use std::sync::OnceLock;

use rayon::prelude::*;

/// Settings for Monte Carlo estimated bound terms.
#[derive(Clone, Copy, Debug)]
pub struct McSettings {
    pub reps: usize,
    pub seed: u64,
    /// Minimum number of replicates that must satisfy a conditioning event.
    pub min_kept: usize,
    /// Batch count for standard errors of nonlinear statistics.
    pub batches: usize,
}

impl McSettings {
    pub fn new(reps: usize, seed: u64) -> Self {
        McSettings { reps, seed, min_kept: 200, batches: 20 }
    }
}

impl Default for McSettings {
    fn default() -> Self {
        McSettings::new(10_000, 0)
    }
}

fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Ok(v) = std::env::var("BOUNDS_THREADS") {
            if let Ok(k) = v.trim().parse::<usize>() {
                if k >= 1 {
                    builder = builder.num_threads(k);
                }
            }
        }
        builder.build().expect("thread pool")
    })
}

/// Map `f` over replicate indices `0..reps` in parallel; the output vector is
/// ordered by replicate index.
pub fn par_map_replicates<T: Send>(reps: usize, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    pool().install(|| (0..reps as u64).into_par_iter().map(f).collect())
}

/// Pairwise (tree) sum in fixed order.
pub fn tree_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            tree_sum(&xs[..mid]) + tree_sum(&xs[mid..])
        }
    }
}

/// Mean and standard error of the replicate mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = tree_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = xs.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = tree_sum(&sq) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Standard error of a nonlinear statistic by contiguous batching: the
/// statistic is recomputed on `batches` index ranges and the spread of the
/// batch values estimates the sampling error of the full-sample statistic.
/// Batches on which the statistic is undefined are skipped.
pub fn batched_se(reps: usize, batches: usize, stat: impl Fn(usize, usize) -> Option<f64>) -> f64 {
    let b = batches.min(reps).max(1);
    let mut vals = Vec::with_capacity(b);
    for k in 0..b {
        let lo = k * reps / b;
        let hi = (k + 1) * reps / b;
        if hi > lo {
            if let Some(v) = stat(lo, hi) {
                vals.push(v);
            }
        }
    }
    if vals.len() < 2 {
        return f64::NAN;
    }
    let m = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / m;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
    (var / m).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_sum_matches_sequential() {
        let xs: Vec<f64> = (0..1025).map(|i| (i as f64).sin()).collect();
        let seq: f64 = xs.iter().sum();
        assert!((tree_sum(&xs) - seq).abs() < 1e-9);
    }

    #[test]
    fn par_map_is_index_ordered() {
        let out = par_map_replicates(1000, |i| i * 2);
        assert!(out.iter().enumerate().all(|(i, &v)| v == 2 * i as u64));
    }

    #[test]
    fn mean_and_se_basics() {
        let (m, se) = mean_and_se(&[1.0, 2.0, 3.0, 4.0]);
        assert!((m - 2.5).abs() < 1e-15);
        let sd = (5.0_f64 / 3.0).sqrt();
        assert!((se - sd / 2.0).abs() < 1e-15);
    }
}
