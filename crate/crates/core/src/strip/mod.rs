//! Certification of the StRIP-ability design rules and Monte Carlo estimates
//! of the statistical isometry constants.
//!
//! Columns are numbered from 0 here; the all-ones column of a DG frame sits at
//! position 0 and is the one column exempt from the column-sum rule.

mod bounds;
mod monte_carlo;
mod rules;

pub use bounds::{
    deviation_term, strip_failure_probability, strip_measurement_bound,
    strip_measurement_bound_raw, FailureProbability,
};
pub use monte_carlo::{
    binomial, binomial_half_width, check_ustrip_uniqueness, estimate_from_ratios, estimate_strip,
    realify_matrix, sparse_draw, strip_norm_ratios, SparseDraw, StripEstimate, UniquenessReport,
    DEFAULT_SUPPORT_CEILING, UNIQUENESS_TOLERANCE,
};
pub use rules::{
    check_dg_rank, check_st1, check_st2, check_st2_dense, check_st3, check_st3_exponents,
    check_tight_frame, RankReport, St1Residuals, St2Report, St2Sampling, St3Report,
};

use serde::{Deserialize, Serialize};

use crate::frame::{ExponentMatrix, Frame};

/// Numerical tolerance for the St1 and tight-frame verdicts.
pub const PASS_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub st1: bool,
    pub st2: bool,
    pub st3: bool,
    pub tight_frame: bool,
}

impl Verdict {
    pub fn all(&self) -> bool {
        self.st1 && self.st2 && self.st3 && self.tight_frame
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripReport {
    pub num_rows: usize,
    pub num_cols: usize,
    pub normalization: f64,
    pub st1: St1Residuals,
    pub st2: St2Report,
    pub st3: St3Report,
    pub tight_frame_residual: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub seed: u64,
}

/// `normalization^2`, snapped to `1 / rows` when it matches the DG convention
/// `rows^(-1/2)`, so the all-ones column sum is exact.
fn exact_square(normalization: f64, rows: usize) -> f64 {
    let sq = normalization * normalization;
    let dg = 1.0 / rows as f64;
    if (sq - dg).abs() <= 1e-12 * dg {
        dg
    } else {
        sq
    }
}

/// Runs every rule on a Z4 exponent matrix scaled by `normalization`.
/// `frame` enables cross-validation of closure against the group law.
pub fn verify_exponents(
    exps: &ExponentMatrix,
    normalization: f64,
    frame: Option<&Frame>,
    eta: f64,
    sampling: &St2Sampling,
) -> StripReport {
    let phi = exps.to_complex(normalization);
    let st1 = check_st1(&phi);
    let st2 = check_st2(exps, frame, sampling);
    let st3 = check_st3_exponents(exps, exact_square(normalization, exps.nrows()), eta);
    let tight_frame_residual = check_tight_frame(&phi);
    let verdict = Verdict {
        st1: st1.row_orthogonality <= PASS_TOLERANCE && st1.row_sum <= PASS_TOLERANCE,
        st2: st2.closure && st2.group_law_mismatches.unwrap_or(0) == 0,
        st3: st3.holds.unwrap_or(false),
        tight_frame: tight_frame_residual <= PASS_TOLERANCE,
    };
    StripReport {
        num_rows: exps.nrows(),
        num_cols: exps.ncols(),
        normalization,
        st1,
        st2,
        st3,
        tight_frame_residual,
        tolerance: PASS_TOLERANCE,
        verdict,
        seed: sampling.seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::synthesize_frame;
    use nalgebra::DMatrix;
    use num_complex::Complex64;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn g(m: u32, r: u32) -> (Frame, DMatrix<Complex64>) {
        let f = synthesize_frame(m, r, true).unwrap();
        let phi = f.exponent_matrix().unwrap().to_complex(f.normalization());
        (f, phi)
    }

    fn gaussian(rows: usize, cols: usize, seed: u64) -> DMatrix<Complex64> {
        let mut rng = crate::rng::stream_rng(seed, 0);
        DMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.sample(StandardNormal), 0.0)
        })
    }

    #[test]
    fn st1_on_dg_frames() {
        for m in [3, 5] {
            let (_, phi) = g(m, 0);
            let r = check_st1(&phi);
            assert!(r.row_orthogonality <= 1e-12 && r.row_sum <= 1e-12, "{r:?}");
        }
    }

    #[test]
    fn st1_identity_fails_on_row_sums() {
        let phi = DMatrix::<Complex64>::identity(4, 4);
        let r = check_st1(&phi);
        assert_eq!(r.row_orthogonality, 0.0);
        assert_eq!(r.row_sum, 1.0);
    }

    #[test]
    fn st2_exhaustive_on_g30() {
        let (f, _) = g(3, 0);
        let r = check_st2(
            f.exponent_matrix().unwrap(),
            Some(&f),
            &St2Sampling::default(),
        );
        assert!(r.closure && r.exhaustive);
        assert_eq!(r.pairs_checked, 4096);
        assert_eq!(r.group_law_mismatches, Some(0));
    }

    #[test]
    fn st2_rejects_gaussian_matrix() {
        let r = check_st2_dense(&gaussian(8, 64, 3), 1e-9, &St2Sampling::default());
        assert!(!r.closure);
        assert_eq!(r.counterexample, Some((0, 0)));
    }

    #[test]
    fn st2_dense_agrees_on_unnormalized_dg() {
        let (f, _) = g(3, 0);
        let unnorm = f.exponent_matrix().unwrap().to_complex(1.0);
        assert!(check_st2_dense(&unnorm, 1e-9, &St2Sampling::default()).closure);
    }

    #[test]
    fn st2_detects_negated_column() {
        let (f, _) = g(3, 0);
        let mut e = f.exponent_matrix().unwrap().clone();
        e.shift_column(17, 2);
        let r = check_st2(&e, Some(&f), &St2Sampling::default());
        assert!(!r.closure);
        assert!(r.counterexample.is_some());
        assert!(r.group_law_mismatches.unwrap() > 0);
        assert!(!check_st2(&e, None, &St2Sampling::default()).closure);
    }

    #[test]
    fn st2_sampling_is_sound() {
        let (f, _) = g(5, 0);
        let sampling = St2Sampling {
            exhaustive_limit: 100,
            sampled_pairs: 5000,
            seed: 11,
        };
        let sampled = check_st2(f.exponent_matrix().unwrap(), Some(&f), &sampling);
        assert!(!sampled.exhaustive);
        assert_eq!(sampled.pairs_checked, 5000);
        let full = check_st2(
            f.exponent_matrix().unwrap(),
            Some(&f),
            &St2Sampling {
                exhaustive_limit: 1 << 20,
                ..sampling
            },
        );
        assert!(full.closure && full.exhaustive);
        assert!(sampled.closure);
    }

    #[test]
    fn st3_spectrum_and_first_column() {
        for m in [3, 5] {
            let (f, phi) = g(m, 0);
            let r = check_st3(&phi, 0.5);
            assert_eq!(r.column_sum_spectrum.len() as u64, f.num_cols() - 1);
            let expected = (f.num_rows() as f64).powi(2) * f.normalization().powi(2);
            assert!((r.first_column_sum_sq - expected).abs() <= 1e-9 * expected);
            assert!(
                r.distinct_values(9).len() <= 4,
                "{:?}",
                r.distinct_values(9)
            );
            assert_eq!(r.holds, Some(true));
            let eta = r.eta_implied.unwrap();
            assert!(eta <= 2.0 + 1e-12);
        }
    }

    #[test]
    fn exact_st3_matches_dense_and_is_exact_on_first_column() {
        for (m, r) in [(3, 0), (5, 0), (3, 1)] {
            let (f, phi) = g(m, r);
            let exps = f.exponent_matrix().unwrap();
            let rows = f.num_rows();
            let exact = check_st3_exponents(exps, 1.0 / rows as f64, 0.5);
            let dense = check_st3(&phi, 0.5);
            // rows^2 * normalization^2 = rows
            assert_eq!(exact.first_column_sum_sq, rows as f64);
            for (a, b) in exact
                .column_sum_spectrum
                .iter()
                .zip(&dense.column_sum_spectrum)
            {
                assert!((a - b).abs() <= 1e-9);
            }
            let report = verify_exponents(
                exps,
                f.normalization(),
                Some(&f),
                0.5,
                &St2Sampling::default(),
            );
            assert_eq!(report.st3.first_column_sum_sq, rows as f64);
        }
    }

    #[test]
    fn st3_zero_column_contributes_zero() {
        let mut phi = DMatrix::<Complex64>::from_element(4, 3, Complex64::new(1.0, 0.0));
        phi.column_mut(2).fill(Complex64::new(0.0, 0.0));
        let r = check_st3(&phi, 0.5);
        assert_eq!(r.column_sum_spectrum, vec![0.0, 16.0]);
        assert!(check_st3(&phi, 1.5).holds.is_none());
    }

    #[test]
    fn tight_frame_residuals() {
        for m in [3, 5] {
            let (_, phi) = g(m, 0);
            assert!(check_tight_frame(&phi) <= 1e-12);
        }
        let (_, phi) = g(3, 0);
        let cut = phi.remove_column(5);
        assert!(check_tight_frame(&cut) > 0.1);
    }

    #[test]
    fn dg_rank_reports() {
        let r = check_dg_rank(&crate::frame::build_dg_set(3, 0).unwrap());
        assert_eq!((r.pairs, r.min_rank, r.max_rank), (28, 3, 3));
        assert!(r.satisfied());
    }

    #[test]
    fn one_sparse_draws_never_violate() {
        let (_, phi) = g(5, 0);
        for eps in [1e-6, 0.01, 0.5] {
            assert_eq!(estimate_strip(&phi, 1, eps, 2000, 4).unwrap().violations, 0);
        }
    }

    #[test]
    fn zero_slack_is_almost_always_violated() {
        let (_, phi) = g(5, 0);
        let est = estimate_strip(&phi, 3, 0.0, 2000, 4).unwrap();
        assert!(est.delta_hat > 0.99, "{est:?}");
    }

    #[test]
    fn delta_hat_is_monotone_in_epsilon() {
        let (_, phi) = g(5, 0);
        let ratios = strip_norm_ratios(&phi, 4, 3000, 8).unwrap();
        let grid = [0.0, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0];
        let deltas: Vec<f64> = grid
            .iter()
            .map(|&e| estimate_from_ratios(&ratios, 4, e, 8).delta_hat)
            .collect();
        assert!(deltas.windows(2).all(|w| w[1] <= w[0]), "{deltas:?}");
    }

    #[test]
    fn estimate_rejects_bad_sparsity() {
        let (_, phi) = g(3, 0);
        assert!(estimate_strip(&phi, 9, 0.1, 10, 0).is_err());
        assert!(estimate_strip(&phi, 2, 0.1, 0, 0).is_err());
    }

    #[test]
    fn one_sparse_preimages_are_unique() {
        let (_, phi) = g(3, 0);
        let r = check_ustrip_uniqueness(&phi, 1, 50, 3, DEFAULT_SUPPORT_CEILING).unwrap();
        assert_eq!(r.violations, 0);
        assert_eq!(r.supports_per_trial, 64);
    }

    #[test]
    fn duplicated_column_breaks_uniqueness() {
        let (_, phi) = g(3, 0);
        let mut cols: Vec<_> = phi.column_iter().map(|c| c.into_owned()).collect();
        cols.truncate(4);
        cols.push(cols[0].clone());
        let dup = DMatrix::from_columns(&cols);
        let r = check_ustrip_uniqueness(&dup, 1, 60, 1, DEFAULT_SUPPORT_CEILING).unwrap();
        // draws landing on column 0 or 4 have a twin
        assert!(r.violations > 0 && r.violations < 60);
    }

    #[test]
    fn uniqueness_ceiling() {
        let (_, phi) = g(5, 0);
        assert!(matches!(
            check_ustrip_uniqueness(&phi, 3, 1, 0, 1000),
            Err(crate::Error::CeilingExceeded { .. })
        ));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(64, 2), 2016);
        assert_eq!(binomial(1024, 2), 523_776);
        assert_eq!(binomial(5, 7), 0);
    }

    #[test]
    fn failure_probability_cases() {
        // deviation zero: vacuous bound of exactly 2
        let n = 1024;
        let eps = 2.0 / 1023.0;
        let p = strip_failure_probability(3, eps, 32, 0.6, n).unwrap();
        assert!((p.delta - 2.0).abs() < 1e-12 && p.vacuous);
        // k = 1 reduces to 2 exp(-eps^2 m^eta / 8)
        let p = strip_failure_probability(1, 0.3, 32, 0.7, n).unwrap();
        let expected = 2.0 * (-(0.09) * 32f64.powf(0.7) / 8.0).exp();
        assert!((p.delta - expected).abs() < 1e-15);
        // frozen from a 50-digit evaluation
        let p = strip_failure_probability(3, 0.5, 32, 0.6, n).unwrap();
        assert!((p.delta - 1.841_286_019_713_409_8).abs() < 1e-14);
        assert!(p.hypotheses_hold);
        assert!(
            !strip_failure_probability(3, 0.5, 32, 0.4, n)
                .unwrap()
                .hypotheses_hold
        );
        assert!(
            !strip_failure_probability(40, 0.5, 32, 0.6, n)
                .unwrap()
                .hypotheses_hold
        );
    }

    #[test]
    fn measurement_bound_cases() {
        let n = 1024u64;
        assert_eq!(
            strip_measurement_bound(1, 1.0, 1.0, n, 1.0).unwrap(),
            (n as f64).ln().ceil() as u64
        );
        let a = strip_measurement_bound_raw(2, 0.5, 0.6, n, 0.1).unwrap();
        let b = strip_measurement_bound_raw(4, 0.5, 0.6, n, 0.1).unwrap();
        assert!((b / a - 2f64.powf(1.0 / 0.6)).abs() < 1e-12);
        let v = strip_measurement_bound_raw(3, 0.5, 0.6, n, 0.1).unwrap();
        assert!((v - 34.146_367_634_712_26).abs() < 1e-11);
        assert_eq!(strip_measurement_bound(3, 0.5, 0.6, n, 0.1).unwrap(), 35);
        assert!(strip_measurement_bound(3, 0.5, 0.6, n, 0.0).is_err());
        assert!(strip_measurement_bound(3, 0.5, 1.5, n, 1.0).is_err());
    }
}
