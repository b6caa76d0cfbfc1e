//! Empirical checks that a sensing matrix preserves the inner products an SVM
//! depends on.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::svm::{dot, LabeledSample};

/// Slack for the norm and weight hypotheses.
const HYPOTHESIS_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerProductCheck {
    pub data_inner: f64,
    pub measured_inner: f64,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

fn check_norm(x: &[f64], radius: f64) -> Result<()> {
    let norm = dot(x, x).sqrt();
    if norm > radius * (1.0 + HYPOTHESIS_SLACK) {
        return Err(Error::Hypothesis(format!(
            "|x| = {norm} exceeds R = {radius}"
        )));
    }
    Ok(())
}

fn measured(a: &DMatrix<f64>, x: &[f64]) -> Result<DVector<f64>> {
    if x.len() != a.ncols() {
        return Err(Error::LengthMismatch {
            left: a.ncols(),
            right: x.len(),
        });
    }
    Ok(a * DVector::from_column_slice(x))
}

/// Tests `(1 - eps) <x, x'> - 2 R^2 eps <= <Ax, Ax'> <= (1 + eps) <x, x'> + 2 R^2 eps`,
/// where `eps` is the isometry constant the caller believes holds on
/// `supp(x) + supp(x')`.
pub fn inner_product_preservation_check(
    a: &DMatrix<f64>,
    x: &[f64],
    x2: &[f64],
    radius: f64,
    epsilon: f64,
) -> Result<InnerProductCheck> {
    check_norm(x, radius)?;
    check_norm(x2, radius)?;
    let data_inner = dot(x, x2);
    let measured_inner = measured(a, x)?.dot(&measured(a, x2)?);
    let slack = 2.0 * radius * radius * epsilon;
    let lower = (1.0 - epsilon) * data_inner - slack;
    let upper = (1.0 + epsilon) * data_inner + slack;
    Ok(InnerProductCheck {
        data_inner,
        measured_inner,
        lower,
        upper,
        holds: lower <= measured_inner && measured_inner <= upper,
    })
}

/// Non-negative weights over labeled samples, representing `sum_i a_i y_i x_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Combination {
    pub weights: Vec<f64>,
    pub samples: Vec<LabeledSample>,
}

impl Combination {
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn vector(&self) -> Result<Vec<f64>> {
        if self.weights.len() != self.samples.len() {
            return Err(Error::LengthMismatch {
                left: self.weights.len(),
                right: self.samples.len(),
            });
        }
        let dim = self.samples.first().map_or(0, |s| s.x.len());
        let mut v = vec![0.0; dim];
        for (a, s) in self.weights.iter().zip(&self.samples) {
            if s.x.len() != dim {
                return Err(Error::LengthMismatch {
                    left: dim,
                    right: s.x.len(),
                });
            }
            for (vi, xi) in v.iter_mut().zip(&s.x) {
                *vi += a * f64::from(s.y) * xi;
            }
        }
        Ok(v)
    }

    fn validate(&self, budget: f64, radius: f64, name: &str) -> Result<()> {
        if self.weights.iter().any(|a| *a < 0.0 || !a.is_finite()) {
            return Err(Error::Hypothesis(format!("{name} has a negative weight")));
        }
        let total = self.total_weight();
        if total > budget * (1.0 + HYPOTHESIS_SLACK) {
            return Err(Error::Hypothesis(format!(
                "{name} weights sum to {total} > {budget}"
            )));
        }
        self.samples
            .iter()
            .try_for_each(|s| check_norm(&s.x, radius))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinationCheck {
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    pub bound: f64,
    pub holds: bool,
}

/// For each `(alpha, beta)` pair, measures `|<beta, alpha> - <A beta, A alpha>|`
/// against `3 C D R^2 eps`, where alpha's weights sum to at most `c` and
/// beta's to at most `d`.
pub fn combination_inner_product_check(
    a: &DMatrix<f64>,
    pairs: &[(Combination, Combination)],
    c: f64,
    d: f64,
    radius: f64,
    epsilon: f64,
) -> Result<CombinationCheck> {
    let mut deviations = Vec::with_capacity(pairs.len());
    for (alpha, beta) in pairs {
        alpha.validate(c, radius, "alpha")?;
        beta.validate(d, radius, "beta")?;
        let (va, vb) = (alpha.vector()?, beta.vector()?);
        let measured_inner = measured(a, &va)?.dot(&measured(a, &vb)?);
        deviations.push((dot(&va, &vb) - measured_inner).abs());
    }
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    let bound = 3.0 * c * d * radius * radius * epsilon;
    Ok(CombinationCheck {
        holds: max_deviation <= bound,
        deviations,
        max_deviation,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::{rip_deviation_on_support, SensingOperator};

    fn sparse(n: usize, entries: &[(usize, f64)]) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for &(i, v) in entries {
            x[i] = v;
        }
        x
    }

    #[test]
    fn identity_reproduces_inner_products() {
        let a = DMatrix::identity(4, 4);
        let x = sparse(4, &[(0, 0.6), (1, 0.8)]);
        let y = sparse(4, &[(1, 1.0)]);
        let r = inner_product_preservation_check(&a, &x, &y, 1.0, 0.0).unwrap();
        assert_eq!(r.data_inner, 0.8);
        assert_eq!(r.measured_inner, 0.8);
        assert!(r.holds);
    }

    #[test]
    fn band_holds_with_constant_measured_on_union_support() {
        let a = SensingOperator::gaussian(40, 100, 8).matrix;
        for t in 0..50u64 {
            let i = (t as usize * 7) % 100;
            let j = (t as usize * 13 + 1) % 100;
            let x = sparse(100, &[(i, 0.6), ((i + 1) % 100, 0.8)]);
            let y = sparse(100, &[(j, -0.8), ((j + 3) % 100, 0.6)]);
            let mut supp = vec![i, (i + 1) % 100, j, (j + 3) % 100];
            supp.sort_unstable();
            supp.dedup();
            let eps = rip_deviation_on_support(&a, &supp);
            assert!(
                inner_product_preservation_check(&a, &x, &y, 1.0, eps)
                    .unwrap()
                    .holds
            );
        }
    }

    #[test]
    fn zero_partner_gives_symmetric_band() {
        let a = SensingOperator::gaussian(5, 8, 1).matrix;
        let x = sparse(8, &[(2, 1.0)]);
        let r = inner_product_preservation_check(&a, &x, &[0.0; 8], 1.5, 0.2).unwrap();
        assert_eq!((r.lower, r.measured_inner, r.upper), (-0.9, 0.0, 0.9));
        assert!(r.holds);
    }

    #[test]
    fn norm_hypothesis_is_enforced() {
        let a = DMatrix::identity(2, 2);
        let err = inner_product_preservation_check(&a, &[2.0, 0.0], &[1.0, 0.0], 1.0, 0.1);
        assert!(matches!(err, Err(Error::Hypothesis(_))));
    }

    #[test]
    fn combination_budget_is_enforced() {
        let s = LabeledSample {
            x: vec![1.0, 0.0],
            y: 1,
        };
        let heavy = Combination {
            weights: vec![3.0],
            samples: vec![s.clone()],
        };
        let light = Combination {
            weights: vec![0.5],
            samples: vec![s],
        };
        let a = DMatrix::identity(2, 2);
        assert!(combination_inner_product_check(
            &a,
            &[(heavy.clone(), light.clone())],
            2.0,
            1.0,
            1.0,
            0.1
        )
        .is_err());
        let ok =
            combination_inner_product_check(&a, &[(heavy, light)], 3.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(ok.max_deviation, 0.0);
        assert!(ok.holds);
    }

    fn sample(x: Vec<f64>, y: i8) -> LabeledSample {
        LabeledSample { x, y }
    }

    #[test]
    fn zero_weights_give_zero_deviation() {
        let a = SensingOperator::gaussian(5, 8, 2).matrix;
        let s = vec![
            sample(sparse(8, &[(1, 0.7)]), 1),
            sample(sparse(8, &[(4, -0.5)]), -1),
        ];
        let zero = Combination {
            weights: vec![0.0, 0.0],
            samples: s.clone(),
        };
        let other = Combination {
            weights: vec![0.3, 0.6],
            samples: s,
        };
        let r = combination_inner_product_check(&a, &[(zero, other)], 1.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(r.max_deviation, 0.0);
        assert!(r.holds);
    }

    #[test]
    fn single_term_combination_agrees_with_pairwise_band() {
        let a = SensingOperator::gaussian(30, 60, 4).matrix;
        let x = sparse(60, &[(3, 0.6), (17, -0.8)]);
        let x2 = sparse(60, &[(17, 0.5), (40, 0.5)]);
        let eps = rip_deviation_on_support(&a, &[3, 17, 40]);
        let pair = inner_product_preservation_check(&a, &x, &x2, 1.0, eps).unwrap();
        let alpha = Combination {
            weights: vec![1.0],
            samples: vec![sample(x, 1)],
        };
        let beta = Combination {
            weights: vec![1.0],
            samples: vec![sample(x2, -1)],
        };
        let comb =
            combination_inner_product_check(&a, &[(alpha, beta)], 1.0, 1.0, 1.0, eps).unwrap();
        // labels flip both inner products, leaving the gap unchanged
        let gap = (pair.measured_inner - pair.data_inner).abs();
        assert!((comb.max_deviation - gap).abs() < 1e-12);
        assert!(pair.holds);
        // band half-width eps * (|<x, x'>| + 2 R^2) never exceeds 3 R^2 eps
        assert!(gap <= comb.bound + 1e-12 && comb.holds);
    }

    #[test]
    fn gaussian_band_holds_for_random_sparse_pairs() {
        use crate::learn::{estimate_rip_delta, RipMode};
        use crate::rng::stream_rng;
        use rand::seq::index::sample as pick;
        use rand::Rng;
        use rand_distr::StandardNormal;

        let (n, k, radius) = (256, 5, 2.0);
        let a = SensingOperator::gaussian(80, n, 17).matrix;
        let eps = estimate_rip_delta(
            &a,
            2 * k,
            RipMode::Sampled {
                trials: 400,
                seed: 3,
            },
        )
        .unwrap()
        .epsilon_hat;
        let mut rng = stream_rng(41, 0);
        let mut draw = || {
            let mut x = vec![0.0; n];
            for i in pick(&mut rng, n, k) {
                x[i] = rng.sample::<f64, _>(StandardNormal);
            }
            let scale = radius * rng.random::<f64>() / dot(&x, &x).sqrt();
            x.iter_mut().for_each(|v| *v *= scale);
            x
        };
        let trials = 1000;
        let held = (0..trials)
            .filter(|_| {
                let (x, x2) = (draw(), draw());
                inner_product_preservation_check(&a, &x, &x2, radius, eps)
                    .unwrap()
                    .holds
            })
            .count();
        assert!(held * 100 >= 95 * trials, "{held}/{trials} at eps {eps}");
    }
}
