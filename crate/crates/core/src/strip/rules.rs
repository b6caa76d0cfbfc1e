use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::f2::rank_f2_masks;
use crate::frame::{column_group_product_position, DgSet, ExponentMatrix, Frame};
use crate::rng::stream_rng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct St1Residuals {
    /// Largest `|<row_t, row_t'>|` over `t != t'`.
    pub row_orthogonality: f64,
    /// Largest `|sum_j phi(t, j)|`.
    pub row_sum: f64,
}

pub fn check_st1(phi: &DMatrix<Complex64>) -> St1Residuals {
    let rows = phi.nrows();
    let row_orthogonality = (0..rows)
        .into_par_iter()
        .map(|t| {
            let a = phi.row(t);
            (t + 1..rows)
                .map(|s| a.dotc(&phi.row(s)).norm())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let row_sum = (0..rows)
        .map(|t| phi.row(t).sum().norm())
        .fold(0.0, f64::max);
    St1Residuals {
        row_orthogonality,
        row_sum,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct St2Report {
    pub closure: bool,
    pub exhaustive: bool,
    pub pairs_checked: u64,
    /// First failing ordered pair `(j, j')` (lexicographically smallest checked).
    pub counterexample: Option<(u64, u64)>,
    /// Pairs whose product column differs from the closed-form group law.
    /// Only populated when a frame is supplied for cross-validation.
    pub group_law_mismatches: Option<u64>,
}

/// Sampling parameters used once the column count exceeds `exhaustive_limit`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct St2Sampling {
    pub exhaustive_limit: u64,
    pub sampled_pairs: u64,
    pub seed: u64,
}

impl Default for St2Sampling {
    fn default() -> Self {
        Self {
            exhaustive_limit: 4096,
            sampled_pairs: 100_000,
            seed: 0,
        }
    }
}

fn pair_list(n: u64, sampling: &St2Sampling) -> (bool, Vec<(u64, u64)>) {
    if n <= sampling.exhaustive_limit {
        return (true, Vec::new());
    }
    let pairs = (0..sampling.sampled_pairs)
        .map(|i| {
            let mut rng = stream_rng(sampling.seed, i);
            (rng.random_range(0..n), rng.random_range(0..n))
        })
        .collect();
    (false, pairs)
}

/// Closure of the columns under pointwise multiplication, checked exactly in
/// Z4 exponent arithmetic. With a frame, each product is also compared
/// against the column predicted by the group law.
pub fn check_st2(
    exps: &ExponentMatrix,
    frame: Option<&Frame>,
    sampling: &St2Sampling,
) -> St2Report {
    let n = exps.ncols() as u64;
    let mut lookup: HashMap<&[u8], u64> = HashMap::with_capacity(exps.ncols());
    for j in (0..exps.ncols()).rev() {
        lookup.insert(exps.column(j), j as u64);
    }
    let frame = frame.filter(|f| f.num_cols() == n && f.num_rows() == exps.nrows());
    let check = |a: u64, b: u64| -> (bool, bool) {
        let (ca, cb) = (exps.column(a as usize), exps.column(b as usize));
        let prod: Vec<u8> = ca.iter().zip(cb).map(|(x, y)| (x + y) & 3).collect();
        let found = lookup.get(prod.as_slice()).copied();
        let law_ok = match frame {
            Some(f) => {
                let predicted = column_group_product_position(f, a, b).expect("in range");
                exps.column(predicted as usize) == prod.as_slice()
            }
            None => true,
        };
        (found.is_some(), law_ok)
    };
    let (exhaustive, sampled) = pair_list(n, sampling);
    // (failing pair, law mismatches) per chunk
    let results: Vec<(Option<(u64, u64)>, u64)> = if exhaustive {
        (0..n)
            .into_par_iter()
            .map(|a| {
                let mut first = None;
                let mut mism = 0;
                for b in 0..n {
                    let (closed, law) = check(a, b);
                    if !closed && first.is_none() {
                        first = Some((a, b));
                    }
                    mism += u64::from(!law);
                }
                (first, mism)
            })
            .collect()
    } else {
        sampled
            .par_iter()
            .map(|&(a, b)| {
                let (closed, law) = check(a, b);
                ((!closed).then_some((a, b)), u64::from(!law))
            })
            .collect()
    };
    let counterexample = results.iter().filter_map(|r| r.0).min();
    let mismatches: u64 = results.iter().map(|r| r.1).sum();
    St2Report {
        closure: counterexample.is_none(),
        exhaustive,
        pairs_checked: if exhaustive {
            n * n
        } else {
            sampled.len() as u64
        },
        counterexample,
        group_law_mismatches: frame.map(|_| mismatches),
    }
}

/// Closure check for an arbitrary complex matrix: each product of two columns
/// must match some column within `tol` (max-abs). Exhaustive up to the limit.
pub fn check_st2_dense(phi: &DMatrix<Complex64>, tol: f64, sampling: &St2Sampling) -> St2Report {
    let n = phi.ncols() as u64;
    let matches_some = |a: u64, b: u64| {
        let prod = phi
            .column(a as usize)
            .component_mul(&phi.column(b as usize));
        phi.column_iter().any(|c| {
            c.iter()
                .zip(prod.iter())
                .all(|(x, y)| (x - y).norm() <= tol)
        })
    };
    let (exhaustive, sampled) = pair_list(n, sampling);
    let counterexample = if exhaustive {
        (0..n)
            .into_par_iter()
            .filter_map(|a| (0..n).find(|&b| !matches_some(a, b)).map(|b| (a, b)))
            .min()
    } else {
        sampled
            .par_iter()
            .filter(|&&(a, b)| !matches_some(a, b))
            .min()
            .copied()
    };
    St2Report {
        closure: counterexample.is_none(),
        exhaustive,
        pairs_checked: if exhaustive {
            n * n
        } else {
            sampled.len() as u64
        },
        counterexample,
        group_law_mismatches: None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct St3Report {
    pub eta: f64,
    /// `N^(2 - eta)`.
    pub bound: f64,
    /// Squared magnitude of the first (all-ones) column's sum; exempt from the rule.
    pub first_column_sum_sq: f64,
    pub max_column_sum_sq: f64,
    /// `None` unless `0 < eta < 1`.
    pub holds: Option<bool>,
    /// Solves `max = N^(2 - eta)`; `None` when the maximum is zero.
    pub eta_implied: Option<f64>,
    /// `|sum_x phi_j(x)|^2` for columns 2..N, sorted ascending.
    pub column_sum_spectrum: Vec<f64>,
}

impl St3Report {
    /// Distinct spectrum values after rounding to `decimals` places.
    pub fn distinct_values(&self, decimals: i32) -> Vec<f64> {
        let scale = 10f64.powi(decimals);
        let mut v: Vec<f64> = self
            .column_sum_spectrum
            .iter()
            .map(|x| (x * scale).round() / scale)
            .collect();
        v.dedup();
        v
    }
}

pub fn check_st3(phi: &DMatrix<Complex64>, eta: f64) -> St3Report {
    let sums: Vec<f64> = phi.column_iter().map(|c| c.sum().norm_sqr()).collect();
    st3_from_sums(sums, eta)
}

/// Column sums of a Z4 exponent matrix taken exactly as Gaussian integers,
/// then scaled by `normalization_sq`.
pub fn check_st3_exponents(exps: &ExponentMatrix, normalization_sq: f64, eta: f64) -> St3Report {
    let sums: Vec<f64> = (0..exps.ncols())
        .map(|j| {
            let mut counts = [0i64; 4];
            for &e in exps.column(j) {
                counts[usize::from(e & 3)] += 1;
            }
            let (re, im) = (counts[0] - counts[2], counts[1] - counts[3]);
            (re * re + im * im) as f64 * normalization_sq
        })
        .collect();
    st3_from_sums(sums, eta)
}

fn st3_from_sums(sums: Vec<f64>, eta: f64) -> St3Report {
    let n = sums.len();
    let first_column_sum_sq = sums.first().copied().unwrap_or(0.0);
    let mut column_sum_spectrum: Vec<f64> = sums.iter().skip(1).copied().collect();
    column_sum_spectrum.sort_by(f64::total_cmp);
    let max_column_sum_sq = column_sum_spectrum.last().copied().unwrap_or(0.0);
    let nf = n as f64;
    let bound = nf.powf(2.0 - eta);
    let holds = (eta > 0.0 && eta < 1.0).then_some(max_column_sum_sq <= bound);
    let eta_implied =
        (max_column_sum_sq > 0.0 && n > 1).then(|| 2.0 - max_column_sum_sq.ln() / nf.ln());
    St3Report {
        eta,
        bound,
        first_column_sum_sq,
        max_column_sum_sq,
        holds,
        eta_implied,
        column_sum_spectrum,
    }
}

/// Largest entrywise deviation of `G G^dagger` from `(cols / rows) I`.
pub fn check_tight_frame(phi: &DMatrix<Complex64>) -> f64 {
    let redundancy = phi.ncols() as f64 / phi.nrows() as f64;
    let gram = phi * phi.adjoint();
    gram.iter()
        .enumerate()
        .map(|(k, z)| {
            let (i, j) = (k % gram.nrows(), k / gram.nrows());
            let target = if i == j { redundancy } else { 0.0 };
            (z - Complex64::new(target, 0.0)).norm()
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankReport {
    pub pairs: u64,
    pub min_rank: usize,
    pub max_rank: usize,
    /// `m - 2r`.
    pub required: usize,
}

impl RankReport {
    pub fn satisfied(&self) -> bool {
        self.min_rank >= self.required
    }
}

/// GF(2) rank of every pairwise difference in the set.
pub fn check_dg_rank(set: &DgSet) -> RankReport {
    let masks: Vec<Vec<u64>> = set
        .matrices()
        .iter()
        .map(|p| p.row_masks().expect("m <= 64"))
        .collect();
    let (min_rank, max_rank, pairs) = (0..masks.len())
        .into_par_iter()
        .map(|i| {
            let mut diff = vec![0u64; masks[i].len()];
            let mut acc = (usize::MAX, 0usize, 0u64);
            for other in &masks[i + 1..] {
                for ((d, a), b) in diff.iter_mut().zip(&masks[i]).zip(other) {
                    *d = a ^ b;
                }
                let rk = rank_f2_masks(&diff);
                acc = (acc.0.min(rk), acc.1.max(rk), acc.2 + 1);
            }
            acc
        })
        .reduce(
            || (usize::MAX, 0, 0),
            |a, b| (a.0.min(b.0), a.1.max(b.1), a.2 + b.2),
        );
    let p = set.params();
    RankReport {
        pairs,
        min_rank: if pairs == 0 { 0 } else { min_rank },
        max_rank,
        required: (p.m - 2 * p.r) as usize,
    }
}
