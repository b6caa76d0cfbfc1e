use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::strip::binomial;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RipMode {
    /// Every k-subset; refused when C(n, k) exceeds `ceiling`.
    Exhaustive {
        ceiling: u128,
    },
    Sampled {
        trials: u64,
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RipEstimate {
    pub k: usize,
    /// Largest `|A_T^T A_T - I|_2` seen. A lower bound on the true constant
    /// unless `exhaustive`.
    pub epsilon_hat: f64,
    pub supports_evaluated: u64,
    pub exhaustive: bool,
}

/// Spectral norm of `A_T^T A_T - I` for the columns in `support`.
pub fn rip_deviation_on_support(a: &DMatrix<f64>, support: &[usize]) -> f64 {
    let sub = a.select_columns(support);
    let mut gram = sub.transpose() * &sub;
    for i in 0..support.len() {
        gram[(i, i)] -= 1.0;
    }
    SymmetricEigen::new(gram)
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
}

pub fn rip_deviation_on_supports<S: AsRef<[usize]> + Sync>(
    a: &DMatrix<f64>,
    supports: &[S],
) -> f64 {
    supports
        .par_iter()
        .map(|s| rip_deviation_on_support(a, s.as_ref()))
        .reduce(|| 0.0, f64::max)
}

fn all_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        out.push(c.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if c[i] < n - k + i {
                break;
            }
        }
        c[i] += 1;
        for j in i + 1..k {
            c[j] = c[j - 1] + 1;
        }
    }
}

pub fn estimate_rip_delta(a: &DMatrix<f64>, k: usize, mode: RipMode) -> Result<RipEstimate> {
    let n = a.ncols();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("sparsity {k} outside 1..={n}")));
    }
    let (supports, exhaustive) = match mode {
        RipMode::Exhaustive { ceiling } => {
            let count = binomial(n as u128, k as u128);
            if count > ceiling {
                return Err(Error::CeilingExceeded {
                    count,
                    limit: ceiling,
                });
            }
            (all_subsets(n, k), true)
        }
        RipMode::Sampled { trials, seed } => {
            let supports = (0..trials)
                .map(|t| {
                    let mut s = sample(&mut stream_rng(seed, t), n, k).into_vec();
                    s.sort_unstable();
                    s
                })
                .collect();
            (supports, false)
        }
    };
    Ok(RipEstimate {
        k,
        epsilon_hat: rip_deviation_on_supports(a, &supports),
        supports_evaluated: supports.len() as u64,
        exhaustive,
    })
}
