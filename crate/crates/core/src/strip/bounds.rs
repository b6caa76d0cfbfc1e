//! Closed-form failure probability and measurement count for StRIP-able matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The squared deviation `(eps - (k-1)/(N-1))^2` in the exponent of the
/// failure probability. The printed bound brackets this term ambiguously; it
/// is read as a squared deviation so that the probability decays with the
/// row count. Changing that reading only requires editing this function.
pub fn deviation_term(k: usize, epsilon: f64, n_cols: u64) -> f64 {
    let coherence_floor = (k as f64 - 1.0) / (n_cols as f64 - 1.0);
    (epsilon - coherence_floor).powi(2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureProbability {
    pub delta: f64,
    /// `k < 1 + (m - 1) eps` and `eta > 1/2`.
    pub hypotheses_hold: bool,
    /// `delta >= 1`: the bound says nothing.
    pub vacuous: bool,
}

/// `delta = 2 exp(-(eps - (k-1)/(N-1))^2 m^eta / (8k))` for an `m x N` matrix.
pub fn strip_failure_probability(
    k: usize,
    epsilon: f64,
    m_rows: usize,
    eta: f64,
    n_cols: u64,
) -> Result<FailureProbability> {
    if k == 0 || n_cols < 2 {
        return Err(Error::InvalidInput("need k >= 1 and N >= 2".into()));
    }
    let delta = 2.0
        * (-deviation_term(k, epsilon, n_cols) * (m_rows as f64).powf(eta) / (8.0 * k as f64))
            .exp();
    let hypotheses_hold = (k as f64) < 1.0 + (m_rows as f64 - 1.0) * epsilon && eta > 0.5;
    Ok(FailureProbability {
        delta,
        hypotheses_hold,
        vacuous: delta >= 1.0,
    })
}

/// `(c k log N / eps^2)^(1/eta)` before rounding.
pub fn strip_measurement_bound_raw(
    k: usize,
    epsilon: f64,
    eta: f64,
    n_cols: u64,
    c: f64,
) -> Result<f64> {
    if c <= 0.0 {
        return Err(Error::Hypothesis(format!("c = {c} must be positive")));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Hypothesis(format!("eta = {eta} must lie in (0, 1]")));
    }
    if epsilon <= 0.0 {
        return Err(Error::Hypothesis(format!(
            "epsilon = {epsilon} must be positive"
        )));
    }
    Ok((c * k as f64 * (n_cols as f64).ln() / (epsilon * epsilon)).powf(1.0 / eta))
}

/// Smallest row count satisfying the measurement bound.
pub fn strip_measurement_bound(
    k: usize,
    epsilon: f64,
    eta: f64,
    n_cols: u64,
    c: f64,
) -> Result<u64> {
    Ok(strip_measurement_bound_raw(k, epsilon, eta, n_cols, c)?.ceil() as u64)
}
