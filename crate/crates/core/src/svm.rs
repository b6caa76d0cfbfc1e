//! Linear soft-margin SVM without bias, trained by dual coordinate ascent.
//!
//! Minimizes `mean_i max(0, 1 - y_i w^T x_i) + |w|^2 / (2C)`. Multiplying by
//! `C` gives the usual form `|w|^2/2 + (C/M) sum_i xi_i`, whose dual is
//! `max sum alpha - |sum alpha_i y_i x_i|^2 / 2` over the box `[0, C/M]^M`.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub x: Vec<f64>,
    /// -1 or +1.
    pub y: i8,
}

impl LabeledSample {
    pub fn new(x: Vec<f64>, y: i8) -> Result<Self> {
        if y != 1 && y != -1 {
            return Err(Error::InvalidInput(format!("label {y} is not +-1")));
        }
        Ok(Self { x, y })
    }

    pub fn margin(&self, w: &[f64]) -> f64 {
        f64::from(self.y) * dot(w, &self.x)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// `u -> (Re u, Im u)`, which keeps `<realify(u), realify(v)> = Re <u, v>`.
pub fn realify(u: &[Complex64]) -> Vec<f64> {
    u.iter()
        .map(|z| z.re)
        .chain(u.iter().map(|z| z.im))
        .collect()
}

fn check_dims(w: &[f64], samples: &[LabeledSample]) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if let Some(s) = samples.iter().find(|s| s.x.len() != w.len()) {
        return Err(Error::LengthMismatch {
            left: w.len(),
            right: s.x.len(),
        });
    }
    Ok(())
}

/// Mean of `max(0, 1 - y w^T x)`.
pub fn hinge_loss(w: &[f64], samples: &[LabeledSample]) -> Result<f64> {
    check_dims(w, samples)?;
    Ok(hinge_of_margins(samples.iter().map(|s| s.margin(w))))
}

/// Mean hinge of precomputed margins `y w^T x`.
pub fn hinge_of_margins(margins: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = margins.len();
    margins.map(|m| (1.0 - m).max(0.0)).sum::<f64>() / n as f64
}

/// `hinge_loss + |w|^2 / (2C)`.
pub fn regularized_loss(w: &[f64], samples: &[LabeledSample], c: f64) -> Result<f64> {
    if c <= 0.0 {
        return Err(Error::InvalidInput(format!("C = {c} must be positive")));
    }
    Ok(hinge_loss(w, samples)? + norm_sq(w) / (2.0 * c))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub tolerance: f64,
    pub max_epochs: usize,
    pub seed: u64,
}

impl SvmParams {
    pub fn new(c: f64) -> Self {
        Self {
            c,
            tolerance: 1e-6,
            max_epochs: 10_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "M")]
    pub m: usize,
    pub alphas: Vec<f64>,
    pub w: Vec<f64>,
    pub training_hash: String,
    pub converged: bool,
    pub epochs: usize,
    /// Largest projected-gradient magnitude at termination.
    pub max_violation: f64,
}

impl SvmModel {
    /// Upper end of the dual box, `C / M`.
    pub fn box_limit(&self) -> f64 {
        self.c / self.m as f64
    }

    pub fn predict(&self, x: &[f64]) -> i8 {
        predict(&self.w, x)
    }

    pub fn dual_objective(&self) -> f64 {
        self.alphas.iter().sum::<f64>() - 0.5 * norm_sq(&self.w)
    }

    /// Primal in the `|w|^2/2 + (C/M) sum xi` scaling; equals `C` times the regularized loss.
    pub fn primal_objective(&self, samples: &[LabeledSample]) -> Result<f64> {
        Ok(self.c * regularized_loss(&self.w, samples, self.c)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `sign(w^T x)`, with an exact zero mapped to +1.
pub fn predict(w: &[f64], x: &[f64]) -> i8 {
    if dot(w, x) >= 0.0 {
        1
    } else {
        -1
    }
}

/// SHA-256 over the dimensions, features and labels of a training set.
pub fn training_hash(samples: &[LabeledSample]) -> String {
    let mut h = Sha256::new();
    h.update((samples.len() as u64).to_le_bytes());
    for s in samples {
        h.update((s.x.len() as u64).to_le_bytes());
        for v in &s.x {
            h.update(v.to_le_bytes());
        }
        h.update([s.y as u8]);
    }
    hex::encode(h.finalize())
}

fn projected_gradient(g: f64, alpha: f64, upper: f64) -> f64 {
    if alpha <= 0.0 {
        g.min(0.0)
    } else if alpha >= upper {
        g.max(0.0)
    } else {
        g
    }
}

pub fn train_svm(samples: &[LabeledSample], params: &SvmParams) -> Result<SvmModel> {
    let m = samples.len();
    if m == 0 {
        return Err(Error::EmptySamples);
    }
    if params.c <= 0.0 || !params.c.is_finite() {
        return Err(Error::InvalidInput(format!(
            "C = {} must be positive",
            params.c
        )));
    }
    let dim = samples[0].x.len();
    for (i, s) in samples.iter().enumerate() {
        if s.x.len() != dim {
            return Err(Error::LengthMismatch {
                left: dim,
                right: s.x.len(),
            });
        }
        if s.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if s.y != 1 && s.y != -1 {
            return Err(Error::InvalidInput(format!(
                "label {} of sample {i} is not +-1",
                s.y
            )));
        }
    }
    let upper = params.c / m as f64;
    let diag: Vec<f64> = samples.iter().map(|s| norm_sq(&s.x)).collect();
    let mut alphas = vec![0.0; m];
    let mut w = vec![0.0; dim];
    let mut order: Vec<usize> = (0..m).collect();
    let mut converged = false;
    let mut epochs = 0;
    let mut max_violation = f64::INFINITY;

    while epochs < params.max_epochs {
        order.shuffle(&mut stream_rng(params.seed, epochs as u64));
        epochs += 1;
        max_violation = 0.0;
        for &i in &order {
            let s = &samples[i];
            let y = f64::from(s.y);
            let g = s.margin(&w) - 1.0;
            let pg = projected_gradient(g, alphas[i], upper);
            max_violation = f64::max(max_violation, pg.abs());
            if pg == 0.0 {
                continue;
            }
            let old = alphas[i];
            let new = if diag[i] > 0.0 {
                (old - g / diag[i]).clamp(0.0, upper)
            } else {
                // zero vector: the dual is linear in alpha_i with slope 1
                upper
            };
            let step = (new - old) * y;
            if step != 0.0 {
                for (wj, xj) in w.iter_mut().zip(&s.x) {
                    *wj += step * xj;
                }
            }
            alphas[i] = new;
        }
        if max_violation <= params.tolerance {
            converged = true;
            break;
        }
    }

    let mut w = representation(&alphas, samples, dim);
    // |w|^2 <= sum(alpha) <= C holds at the optimum; an inexact stop can
    // overshoot by O(tolerance), so pull back inside the ball if needed.
    let wn = norm_sq(&w);
    if wn > params.c {
        let scale = (params.c / wn).sqrt();
        for a in &mut alphas {
            *a *= scale;
        }
        w = representation(&alphas, samples, dim);
    }

    Ok(SvmModel {
        c: params.c,
        m,
        alphas,
        w,
        training_hash: training_hash(samples),
        converged,
        epochs,
        max_violation,
    })
}

/// `sum_i alpha_i y_i x_i`.
pub fn representation(alphas: &[f64], samples: &[LabeledSample], dim: usize) -> Vec<f64> {
    let mut w = vec![0.0; dim];
    for (a, s) in alphas.iter().zip(samples) {
        if *a != 0.0 {
            let coef = a * f64::from(s.y);
            for (wj, xj) in w.iter_mut().zip(&s.x) {
                *wj += coef * xj;
            }
        }
    }
    w
}
