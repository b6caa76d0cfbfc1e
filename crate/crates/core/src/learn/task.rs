use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::svm::{dot, LabeledSample};

/// Parameters of a synthetic sparse classification task.
///
/// Every sample is k-sparse with norm exactly `radius`. Half of its support
/// (rounded up) is drawn from the planted classifier's support so labels carry
/// signal; the rest is drawn from outside it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    pub n: usize,
    pub k: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "M")]
    pub train_size: usize,
    #[serde(rename = "M_eval")]
    pub eval_size: usize,
    #[serde(default)]
    pub label_noise: f64,
    #[serde(default)]
    pub seed: u64,
}

impl TaskConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if self.n == 0 || self.k == 0 || self.k > self.n {
            return bad(format!("need 1 <= k <= n, got k={} n={}", self.k, self.n));
        }
        if self.train_size == 0 {
            return bad("M must be at least 1".into());
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad(format!("R = {} must be positive", self.radius));
        }
        if !(0.0..=1.0).contains(&self.label_noise) {
            return bad(format!("label_noise = {} outside [0, 1]", self.label_noise));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTask {
    pub config: TaskConfig,
    /// k-sparse unit vector defining the clean labels.
    pub planted_w: Vec<f64>,
    pub train: Vec<LabeledSample>,
    pub eval: Vec<LabeledSample>,
}

const PLANTED_STREAM: u64 = 0;
const TRAIN_STREAM: u64 = 1;
const EVAL_STREAM: u64 = 2;

fn planted(cfg: &TaskConfig) -> (Vec<usize>, Vec<f64>) {
    let mut rng = stream_rng(cfg.seed, PLANTED_STREAM);
    let mut support = sample(&mut rng, cfg.n, cfg.k).into_vec();
    support.sort_unstable();
    let mut w = vec![0.0; cfg.n];
    for &j in &support {
        w[j] = rng.sample(StandardNormal);
    }
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    w.iter_mut().for_each(|v| *v /= norm);
    (support, w)
}

fn draw_sample(
    rng: &mut ChaCha8Rng,
    cfg: &TaskConfig,
    planted_support: &[usize],
    outside: &[usize],
    planted_w: &[f64],
) -> LabeledSample {
    let inside = cfg.k.div_ceil(2).max(cfg.k - outside.len().min(cfg.k));
    let mut support: Vec<usize> = sample(rng, planted_support.len(), inside)
        .into_iter()
        .map(|i| planted_support[i])
        .collect();
    support.extend(
        sample(rng, outside.len(), cfg.k - inside)
            .into_iter()
            .map(|i| outside[i]),
    );
    let mut x = vec![0.0; cfg.n];
    for &j in &support {
        x[j] = rng.sample(StandardNormal);
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v *= cfg.radius / norm);
    }
    let mut y: i8 = if dot(planted_w, &x) >= 0.0 { 1 } else { -1 };
    if rng.random::<f64>() < cfg.label_noise {
        y = -y;
    }
    LabeledSample { x, y }
}

fn draw_set(
    cfg: &TaskConfig,
    stream: u64,
    size: usize,
    support: &[usize],
    w: &[f64],
) -> Vec<LabeledSample> {
    let outside: Vec<usize> = (0..cfg.n)
        .filter(|j| support.binary_search(j).is_err())
        .collect();
    let mut rng = stream_rng(cfg.seed, stream);
    (0..size)
        .map(|_| draw_sample(&mut rng, cfg, support, &outside, w))
        .collect()
}

pub fn generate_task(cfg: &TaskConfig) -> Result<SyntheticTask> {
    cfg.validate()?;
    let (support, planted_w) = planted(cfg);
    Ok(SyntheticTask {
        config: cfg.clone(),
        train: draw_set(cfg, TRAIN_STREAM, cfg.train_size, &support, &planted_w),
        eval: draw_set(cfg, EVAL_STREAM, cfg.eval_size, &support, &planted_w),
        planted_w,
    })
}

/// A training set of `size` samples from the task distribution under `stream`;
/// streams 0..=2 are reserved by `generate_task`.
pub fn draw_training_set(cfg: &TaskConfig, stream: u64, size: usize) -> Result<Vec<LabeledSample>> {
    cfg.validate()?;
    let (support, planted_w) = planted(cfg);
    Ok(draw_set(cfg, stream, size, &support, &planted_w))
}
