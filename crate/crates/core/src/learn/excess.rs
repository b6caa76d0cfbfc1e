use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learn::{draw_training_set, generate_task, TaskConfig};
use crate::rng::derive_seed;
use crate::svm::{norm_sq, regularized_loss, train_svm, SvmParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcessRiskConfig {
    pub task: TaskConfig,
    #[serde(rename = "C")]
    pub c: f64,
    /// Confidence parameter of the bound.
    pub delta: f64,
    pub repetitions: usize,
    /// Multiplier in front of `C ln(1/delta) / M`.
    pub constant: f64,
    /// Also compare each trained model against itself, so gaps are at most 0.
    #[serde(default)]
    pub include_trained: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcessRiskReport {
    pub bound: f64,
    pub gaps: Vec<f64>,
    pub median_gap: f64,
    pub exceedance_fraction: f64,
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

/// Held-out regularized loss of the trained SVM minus the best loss over
/// `probes` (vectors with `|w|^2 <= 2C`), repeated over independent training
/// sets. The held-out set is shared by every repetition.
pub fn excess_risk_check(cfg: &ExcessRiskConfig, probes: &[Vec<f64>]) -> Result<ExcessRiskReport> {
    cfg.task.validate()?;
    if cfg.repetitions == 0 {
        return Err(Error::InvalidInput("repetitions must be at least 1".into()));
    }
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(Error::InvalidInput(format!(
            "delta = {} outside (0, 1)",
            cfg.delta
        )));
    }
    if probes.is_empty() && !cfg.include_trained {
        return Err(Error::InvalidInput("no comparison vectors".into()));
    }
    for p in probes {
        if p.len() != cfg.task.n {
            return Err(Error::LengthMismatch {
                left: cfg.task.n,
                right: p.len(),
            });
        }
        if norm_sq(p) > 2.0 * cfg.c * (1.0 + 1e-9) {
            return Err(Error::Hypothesis(format!(
                "probe has |w|^2 = {} > 2C",
                norm_sq(p)
            )));
        }
    }
    let eval = generate_task(&TaskConfig {
        train_size: 1,
        ..cfg.task.clone()
    })?
    .eval;
    if eval.is_empty() {
        return Err(Error::InvalidInput("M_eval must be at least 1".into()));
    }
    let probe_losses: Vec<f64> = probes
        .iter()
        .map(|p| regularized_loss(p, &eval, cfg.c))
        .collect::<Result<_>>()?;
    let best_probe = probe_losses.iter().copied().fold(f64::INFINITY, f64::min);

    let gaps = (0..cfg.repetitions)
        .map(|rep| {
            let train = draw_training_set(
                &cfg.task,
                derive_seed(rep as u64, 3) | 3,
                cfg.task.train_size,
            )?;
            let params = SvmParams {
                seed: rep as u64,
                ..SvmParams::new(cfg.c)
            };
            let w = train_svm(&train, &params)?.w;
            let loss = regularized_loss(&w, &eval, cfg.c)?;
            let best = if cfg.include_trained {
                best_probe.min(loss)
            } else {
                best_probe
            };
            Ok(loss - best)
        })
        .collect::<Result<Vec<f64>>>()?;
    let bound = cfg.constant * cfg.c * (1.0 / cfg.delta).ln() / cfg.task.train_size as f64;
    let exceed = gaps.iter().filter(|g| **g > bound).count();
    Ok(ExcessRiskReport {
        bound,
        median_gap: median(&gaps),
        exceedance_fraction: exceed as f64 / gaps.len() as f64,
        gaps,
    })
}
