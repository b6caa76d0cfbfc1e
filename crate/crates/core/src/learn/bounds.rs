use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rows needed by a G(o, r) sensing matrix, `(2^(r+1) C ln n / eps1)^2` with
/// `n = 2^((r+2) o)` columns.
pub fn dg_learning_measurement_bound(o: u32, r: u32, epsilon1: f64, constant: f64) -> Result<f64> {
    if o == 0 || o.is_multiple_of(2) {
        return Err(Error::EvenDegree(o));
    }
    if r > (o - 1) / 2 {
        return Err(Error::OrderTooLarge {
            m: o,
            r,
            max: (o - 1) / 2,
        });
    }
    if epsilon1.is_nan() || constant.is_nan() || epsilon1 <= 0.0 || constant <= 0.0 {
        return Err(Error::InvalidInput(
            "epsilon1 and C must be positive".into(),
        ));
    }
    let ln_n = f64::from((r + 2) * o) * std::f64::consts::LN_2;
    let root = 2f64.powi(r as i32 + 1) * constant * ln_n / epsilon1;
    Ok(root * root)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapTermInputs {
    pub radius: f64,
    pub w0_norm: f64,
    pub r: u32,
    /// Measurement rows.
    pub rows: f64,
    pub train_size: f64,
    /// Column count of the sensing matrix.
    pub n: f64,
    pub epsilon1: f64,
    #[serde(default)]
    pub sigma: f64,
}

/// `R |w0| sqrt(2^r (ln M + ln n) / sqrt(rows) + sigma + (1 + eps1) ln n / M)`.
pub fn dg_learning_gap_term(p: &GapTermInputs) -> Result<f64> {
    if p.rows <= 0.0 || p.train_size < 1.0 || p.n < 1.0 {
        return Err(Error::InvalidInput("rows, M and n must be positive".into()));
    }
    let inner = 2f64.powi(p.r as i32) * (p.train_size.ln() + p.n.ln()) / p.rows.sqrt()
        + p.sigma
        + (1.0 + p.epsilon1) * p.n.ln() / p.train_size;
    Ok(p.radius * p.w0_norm * inner.sqrt())
}
