use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Relative residual below which a least-squares fit counts as an exact reproduction.
pub const UNIQUENESS_TOLERANCE: f64 = 1e-8;

/// Default ceiling on the number of supports enumerated per trial.
pub const DEFAULT_SUPPORT_CEILING: u128 = 10_000_000;

/// A random unit-norm k-sparse vector: uniform support, Gaussian values.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseDraw {
    pub support: Vec<usize>,
    pub values: Vec<f64>,
}

/// Draw number `trial` under `seed`; independent of every other draw.
pub fn sparse_draw(n: usize, k: usize, seed: u64, trial: u64) -> SparseDraw {
    let mut rng = stream_rng(seed, trial);
    let mut support = sample(&mut rng, n, k).into_vec();
    support.sort_unstable();
    let mut values: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in &mut values {
        *v /= norm;
    }
    SparseDraw { support, values }
}

fn measure(phi: &DMatrix<Complex64>, draw: &SparseDraw) -> DVector<Complex64> {
    let mut y = DVector::zeros(phi.nrows());
    for (&j, &v) in draw.support.iter().zip(&draw.values) {
        y.axpy(
            Complex64::new(v, 0.0),
            &phi.column(j),
            Complex64::new(1.0, 0.0),
        );
    }
    y
}

/// `||Phi alpha||^2` for each of `trials` unit-norm k-sparse draws.
pub fn strip_norm_ratios(
    phi: &DMatrix<Complex64>,
    k: usize,
    trials: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    if k == 0 || k > phi.nrows() || k > phi.ncols() {
        return Err(Error::InvalidInput(format!(
            "sparsity {k} must be in 1..={}",
            phi.nrows().min(phi.ncols())
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidInput("at least one trial is required".into()));
    }
    Ok((0..trials)
        .into_par_iter()
        .map(|i| measure(phi, &sparse_draw(phi.ncols(), k, seed, i)).norm_squared())
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripEstimate {
    pub k: usize,
    pub epsilon: f64,
    pub trials: u64,
    pub violations: u64,
    pub delta_hat: f64,
    /// 95% normal-approximation binomial half-width.
    pub half_width: f64,
    pub seed: u64,
}

/// Estimate from precomputed ratios, so an epsilon grid can share one sample.
pub fn estimate_from_ratios(ratios: &[f64], k: usize, epsilon: f64, seed: u64) -> StripEstimate {
    let violations = ratios
        .iter()
        .filter(|&&q| q < 1.0 - epsilon || q > 1.0 + epsilon)
        .count() as u64;
    let trials = ratios.len() as u64;
    let delta_hat = violations as f64 / trials as f64;
    StripEstimate {
        k,
        epsilon,
        trials,
        violations,
        delta_hat,
        half_width: binomial_half_width(delta_hat, trials),
        seed,
    }
}

pub fn binomial_half_width(p: f64, trials: u64) -> f64 {
    1.96 * (p * (1.0 - p) / trials as f64).sqrt()
}

/// Fraction of k-sparse draws violating `(1-eps)|a|^2 <= |Phi a|^2 <= (1+eps)|a|^2`.
pub fn estimate_strip(
    phi: &DMatrix<Complex64>,
    k: usize,
    epsilon: f64,
    trials: u64,
    seed: u64,
) -> Result<StripEstimate> {
    let ratios = strip_norm_ratios(phi, k, trials, seed)?;
    Ok(estimate_from_ratios(&ratios, k, epsilon, seed))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub k: usize,
    pub trials: u64,
    pub supports_per_trial: u128,
    pub violations: u64,
    pub seed: u64,
}

pub fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// `[Re Phi; Im Phi]`, so real coefficient vectors map to stacked measurements.
pub fn realify_matrix(phi: &DMatrix<Complex64>) -> DMatrix<f64> {
    let rows = phi.nrows();
    DMatrix::from_fn(2 * rows, phi.ncols(), |i, j| {
        if i < rows {
            phi[(i, j)].re
        } else {
            phi[(i - rows, j)].im
        }
    })
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let Some(i) = (0..k).rev().find(|&i| c[i] < n - k + i) else {
        return false;
    };
    c[i] += 1;
    for j in i + 1..k {
        c[j] = c[j - 1] + 1;
    }
    true
}

fn fits_exactly(sub: &DMatrix<f64>, y: &DVector<f64>, tol: f64) -> bool {
    let svd = sub.clone().svd(true, true);
    let Ok(beta) = svd.solve(y, 1e-12) else {
        return false;
    };
    (sub * beta - y).norm() <= tol
}

/// Counts draws whose measurement is reproduced by some other k-sparse vector,
/// by enumerating every k-support and solving least squares on it.
pub fn check_ustrip_uniqueness(
    phi: &DMatrix<Complex64>,
    k: usize,
    trials: u64,
    seed: u64,
    ceiling: u128,
) -> Result<UniquenessReport> {
    let n = phi.ncols();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "sparsity {k} must be in 1..={n}"
        )));
    }
    let supports = binomial(n as u128, k as u128);
    if supports > ceiling {
        return Err(Error::CeilingExceeded {
            count: supports,
            limit: ceiling,
        });
    }
    let real = realify_matrix(phi);
    let violations = (0..trials)
        .into_par_iter()
        .filter(|&i| {
            let draw = sparse_draw(n, k, seed, i);
            let alpha = DVector::from_iterator(k, draw.values.iter().copied());
            let y = real.select_columns(&draw.support) * alpha;
            let tol = UNIQUENESS_TOLERANCE * y.norm().max(1.0);
            // a rank-deficient true support already admits other preimages
            let own = real.select_columns(&draw.support);
            if own.clone().svd(false, false).rank(1e-10) < k {
                return true;
            }
            let mut support: Vec<usize> = (0..k).collect();
            loop {
                if support != draw.support && fits_exactly(&real.select_columns(&support), &y, tol)
                {
                    return true;
                }
                if !next_combination(&mut support, n) {
                    return false;
                }
            }
        })
        .count() as u64;
    Ok(UniquenessReport {
        k,
        trials,
        supports_per_trial: supports,
        violations,
        seed,
    })
}
