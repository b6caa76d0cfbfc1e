use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learn::{
    estimate_rip_delta, generate_task, RipMode, SensingOperator, SyntheticTask, TaskConfig,
};
use crate::rng::derive_seed;
use crate::svm::{
    hinge_loss, norm_sq, predict, regularized_loss, train_svm, LabeledSample, SvmParams,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum SensingFamily {
    Gaussian,
    /// `m_list` holds the complex row count `2^m` of G(m, r); `r` defaults to
    /// the smallest order with at least `n` columns.
    Dg {
        #[serde(default)]
        r: Option<u32>,
    },
    /// `A = I`; every m must equal n. A control for the sweep itself.
    Identity,
}

fn default_rip_trials() -> u64 {
    200
}

fn default_tolerance() -> f64 {
    1e-6
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub task: TaskConfig,
    #[serde(rename = "C")]
    pub c: f64,
    pub sensing: SensingFamily,
    pub m_list: Vec<usize>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_rip_trials")]
    pub rip_trials: u64,
    #[serde(default = "default_tolerance")]
    pub svm_tolerance: f64,
    /// Output directory; a command-line flag takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.task.validate()?;
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "C = {} must be positive",
                self.c
            )));
        }
        if self.m_list.is_empty() || self.seeds.is_empty() {
            return Err(Error::InvalidInput(
                "m_list and seeds must be non-empty".into(),
            ));
        }
        if self.m_list.contains(&0) {
            return Err(Error::InvalidInput(
                "measurement counts must be positive".into(),
            ));
        }
        for &rows in &self.m_list {
            match self.sensing {
                SensingFamily::Dg { .. } if !rows.is_power_of_two() => {
                    return Err(Error::InvalidInput(format!(
                        "DG row count {rows} is not a power of two"
                    )));
                }
                SensingFamily::Identity if rows != self.task.n => {
                    return Err(Error::InvalidInput(format!(
                        "identity sensing needs m = n, got {rows}"
                    )));
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn operator(&self, rows: usize, seed: u64) -> Result<SensingOperator> {
        let n = self.task.n;
        match self.sensing {
            SensingFamily::Gaussian => Ok(SensingOperator::gaussian(
                rows,
                n,
                derive_seed(seed, rows as u64),
            )),
            SensingFamily::Dg { r } => {
                let m = rows.trailing_zeros();
                let r = match r {
                    Some(r) => r,
                    None => SensingOperator::dg_order_for(m, n)?,
                };
                SensingOperator::dg_frame(m, r, n)
            }
            SensingFamily::Identity => Ok(SensingOperator::identity(n)),
        }
    }
}

/// One (measurement count, seed) point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRun {
    pub m: usize,
    pub seed: u64,
    pub effective_rows: usize,
    pub training_hash: String,
    /// Sampled isometry constant at sparsity 2k.
    pub epsilon_hat: f64,
    /// Training-set hinge losses of the same four classifiers.
    pub train_data_hinge: f64,
    pub train_measured_hinge: f64,
    pub train_projected_hinge: f64,
    pub train_planted_hinge: f64,
    /// Held-out hinge of the data-domain SVM.
    pub data_hinge: f64,
    /// Held-out hinge of the measurement-domain SVM.
    pub measured_hinge: f64,
    /// Held-out hinge of the projected data-domain classifier `A w`.
    pub projected_hinge: f64,
    pub planted_hinge: f64,
    pub data_loss: f64,
    pub measured_loss: f64,
    pub projected_loss: f64,
    pub planted_loss: f64,
    /// Best held-out regularized loss among measurement-domain classifiers
    /// (`z_AS` and `A w_S`), standing in for the best achievable one.
    pub best_measured_loss: f64,
    pub projection_slack: f64,
    /// `C R^2 eps_hat`.
    pub slack_scale: f64,
    pub compression_gap: f64,
    pub learning_gap: f64,
    pub train_accuracy_data: f64,
    pub test_accuracy_data: f64,
    pub train_accuracy_measured: f64,
    pub test_accuracy_measured: f64,
}

impl SweepRun {
    pub fn metrics(&self) -> [(&'static str, f64); 22] {
        [
            ("epsilon_hat", self.epsilon_hat),
            ("train_data_hinge", self.train_data_hinge),
            ("train_measured_hinge", self.train_measured_hinge),
            ("train_projected_hinge", self.train_projected_hinge),
            ("train_planted_hinge", self.train_planted_hinge),
            ("data_hinge", self.data_hinge),
            ("measured_hinge", self.measured_hinge),
            ("projected_hinge", self.projected_hinge),
            ("planted_hinge", self.planted_hinge),
            ("data_loss", self.data_loss),
            ("measured_loss", self.measured_loss),
            ("projected_loss", self.projected_loss),
            ("planted_loss", self.planted_loss),
            ("best_measured_loss", self.best_measured_loss),
            ("projection_slack", self.projection_slack),
            ("slack_scale", self.slack_scale),
            ("compression_gap", self.compression_gap),
            ("learning_gap", self.learning_gap),
            ("train_accuracy_data", self.train_accuracy_data),
            ("test_accuracy_data", self.test_accuracy_data),
            ("train_accuracy_measured", self.train_accuracy_measured),
            ("test_accuracy_measured", self.test_accuracy_measured),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub m: usize,
    pub effective_rows: usize,
    pub runs: usize,
    pub metrics: BTreeMap<String, Summary>,
}

impl SweepPoint {
    pub fn mean(&self, metric: &str) -> Option<f64> {
        self.metrics.get(metric).map(|s| s.mean)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub points: Vec<SweepPoint>,
    pub runs: Vec<SweepRun>,
}

impl SweepReport {
    /// Spearman correlation between m and the mean compression gap.
    pub fn gap_trend(&self) -> f64 {
        let ms: Vec<f64> = self.points.iter().map(|p| p.m as f64).collect();
        let gaps: Vec<f64> = self
            .points
            .iter()
            .map(|p| p.mean("compression_gap").unwrap_or(f64::NAN))
            .collect();
        spearman(&ms, &gaps)
    }

    pub fn point(&self, m: usize) -> Option<&SweepPoint> {
        self.points.iter().find(|p| p.m == m)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Rank correlation with average ranks for ties. NaN when either side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn accuracy(w: &[f64], samples: &[LabeledSample]) -> f64 {
    samples.iter().filter(|s| predict(w, &s.x) == s.y).count() as f64 / samples.len() as f64
}

/// Best multiple `s * planted` with `|s * planted|^2 <= C` under the
/// regularized training loss. The objective is convex in `s`.
pub fn scaled_planted(planted: &[f64], train: &[LabeledSample], c: f64) -> Result<Vec<f64>> {
    let norm = norm_sq(planted).sqrt();
    if norm == 0.0 {
        return Ok(planted.to_vec());
    }
    let scaled = |s: f64| planted.iter().map(|v| v * s).collect::<Vec<_>>();
    let f = |s: f64| regularized_loss(&scaled(s), train, c);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0, c.sqrt() / norm);
    for _ in 0..100 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if f(a)? <= f(b)? {
            hi = b;
        } else {
            lo = a;
        }
    }
    Ok(scaled((lo + hi) / 2.0))
}

struct SeedContext {
    seed: u64,
    task: SyntheticTask,
    w_data: Vec<f64>,
    w_planted: Vec<f64>,
}

fn seed_context(cfg: &SweepConfig, seed: u64) -> Result<SeedContext> {
    let task_cfg = TaskConfig {
        seed: derive_seed(cfg.task.seed, seed),
        ..cfg.task.clone()
    };
    let task = generate_task(&task_cfg)?;
    let params = SvmParams {
        tolerance: cfg.svm_tolerance,
        seed,
        ..SvmParams::new(cfg.c)
    };
    let w_data = train_svm(&task.train, &params)?.w;
    let w_planted = scaled_planted(&task.planted_w, &task.train, cfg.c)?;
    Ok(SeedContext {
        seed,
        task,
        w_data,
        w_planted,
    })
}

fn run_point(cfg: &SweepConfig, ctx: &SeedContext, m: usize) -> Result<SweepRun> {
    let op = cfg.operator(m, ctx.seed)?;
    let (train, eval) = (&ctx.task.train, &ctx.task.eval);
    let a_train = op.measure(train)?;
    let a_eval = op.measure(eval)?;
    let params = SvmParams {
        tolerance: cfg.svm_tolerance,
        seed: ctx.seed,
        ..SvmParams::new(cfg.c)
    };
    let z = train_svm(&a_train, &params)?.w;
    let projected = op.apply(&ctx.w_data)?;
    let rip_seed = derive_seed(ctx.seed, (m as u64) << 1 | 1);
    let k2 = (2 * cfg.task.k).min(cfg.task.n);
    let epsilon_hat = estimate_rip_delta(
        &op.matrix,
        k2,
        RipMode::Sampled {
            trials: cfg.rip_trials,
            seed: rip_seed,
        },
    )?
    .epsilon_hat;

    let c = cfg.c;
    let reg = |w: &[f64]| norm_sq(w) / (2.0 * c);
    let data_hinge = hinge_loss(&ctx.w_data, eval)?;
    let measured_hinge = hinge_loss(&z, &a_eval)?;
    let projected_hinge = hinge_loss(&projected, &a_eval)?;
    let planted_hinge = hinge_loss(&ctx.w_planted, eval)?;
    let data_loss = data_hinge + reg(&ctx.w_data);
    let measured_loss = measured_hinge + reg(&z);
    let projected_loss = projected_hinge + reg(&projected);
    let radius = cfg.task.radius;
    Ok(SweepRun {
        m,
        seed: ctx.seed,
        effective_rows: op.rows(),
        training_hash: crate::svm::training_hash(train),
        epsilon_hat,
        train_data_hinge: hinge_loss(&ctx.w_data, train)?,
        train_measured_hinge: hinge_loss(&z, &a_train)?,
        train_projected_hinge: hinge_loss(&projected, &a_train)?,
        train_planted_hinge: hinge_loss(&ctx.w_planted, train)?,
        data_hinge,
        measured_hinge,
        projected_hinge,
        planted_hinge,
        data_loss,
        measured_loss,
        projected_loss,
        planted_loss: planted_hinge + reg(&ctx.w_planted),
        best_measured_loss: measured_loss.min(projected_loss),
        projection_slack: projected_loss - data_loss,
        slack_scale: c * radius * radius * epsilon_hat,
        compression_gap: measured_hinge - data_hinge,
        learning_gap: measured_hinge - planted_hinge,
        train_accuracy_data: accuracy(&ctx.w_data, train),
        test_accuracy_data: accuracy(&ctx.w_data, eval),
        train_accuracy_measured: accuracy(&z, &a_train),
        test_accuracy_measured: accuracy(&z, &a_eval),
    })
}

/// Trains data-domain and measurement-domain SVMs for every `(m, seed)` and
/// aggregates over seeds. Results do not depend on the rayon pool size.
pub fn run_compress_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let contexts: Vec<SeedContext> = cfg
        .seeds
        .par_iter()
        .map(|&s| seed_context(cfg, s))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = cfg
        .m_list
        .iter()
        .flat_map(|&m| (0..contexts.len()).map(move |i| (m, i)))
        .collect();
    let runs: Vec<SweepRun> = jobs
        .par_iter()
        .map(|&(m, i)| run_point(cfg, &contexts[i], m))
        .collect::<Result<_>>()?;
    let points = cfg
        .m_list
        .iter()
        .map(|&m| {
            let group: Vec<&SweepRun> = runs.iter().filter(|r| r.m == m).collect();
            let mut metrics = BTreeMap::new();
            for (j, (name, _)) in group[0].metrics().iter().enumerate() {
                let values: Vec<f64> = group.iter().map(|r| r.metrics()[j].1).collect();
                metrics.insert(name.to_string(), Summary::of(&values));
            }
            SweepPoint {
                m,
                effective_rows: group[0].effective_rows,
                runs: group.len(),
                metrics,
            }
        })
        .collect();
    Ok(SweepReport {
        config: cfg.clone(),
        points,
        runs,
    })
}

/// One CSV row per (m, seed).
pub fn write_runs_csv<W: Write>(out: W, runs: &[SweepRun]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if let Some(first) = runs.first() {
        let mut header = vec!["m".to_string(), "seed".into(), "effective_rows".into()];
        header.extend(first.metrics().iter().map(|(n, _)| n.to_string()));
        w.write_record(&header).map_err(csv_err)?;
    }
    for r in runs {
        let mut row = vec![
            r.m.to_string(),
            r.seed.to_string(),
            r.effective_rows.to_string(),
        ];
        row.extend(r.metrics().iter().map(|(_, v)| format!("{v:.17e}")));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `m` followed by the mean of each named metric, one row per point.
pub fn write_plot_csv<W: Write>(out: W, points: &[SweepPoint], metrics: &[&str]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["m"];
    header.extend_from_slice(metrics);
    w.write_record(&header).map_err(csv_err)?;
    for p in points {
        let mut row = vec![p.m.to_string()];
        for name in metrics {
            row.push(
                p.mean(name)
                    .map_or_else(String::new, |v| format!("{v:.17e}")),
            );
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SweepConfig {
        SweepConfig {
            task: TaskConfig {
                n: 32,
                k: 3,
                radius: 1.0,
                train_size: 40,
                eval_size: 80,
                label_noise: 0.0,
                seed: 3,
            },
            c: 10.0,
            sensing: SensingFamily::Gaussian,
            m_list: vec![8, 32],
            seeds: vec![1, 2],
            rip_trials: 20,
            svm_tolerance: 1e-6,
            output: None,
        }
    }

    #[test]
    fn spearman_basic_cases() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 4.0, 9.0, 16.0]) - 1.0).abs() < 1e-12);
        // ties share the average rank
        assert_eq!(ranks(&[2.0, 1.0, 2.0]), vec![2.5, 1.0, 2.5]);
    }

    #[test]
    fn summary_of_single_value() {
        let s = Summary::of(&[2.0]);
        assert_eq!((s.mean, s.std), (2.0, 0.0));
        let s = Summary::of(&[1.0, 3.0]);
        assert!((s.std - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sweep_shapes_and_determinism() {
        let a = run_compress_sweep(&small()).unwrap();
        assert_eq!(a.points.len(), 2);
        assert_eq!(a.runs.len(), 4);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| run_compress_sweep(&small())).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let mut buf = Vec::new();
        write_runs_csv(&mut buf, &a.runs).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 5);
    }

    #[test]
    fn identity_sized_gaussian_tracks_data_domain() {
        // with many rows the two SVMs see nearly the same Gram matrix
        let cfg = SweepConfig {
            m_list: vec![2048],
            seeds: vec![1],
            ..small()
        };
        let r = run_compress_sweep(&cfg).unwrap();
        assert!(r.runs[0].compression_gap.abs() < 0.1, "{:?}", r.runs[0]);
    }

    #[test]
    fn identity_sensing_reproduces_data_domain() {
        let cfg = SweepConfig {
            sensing: SensingFamily::Identity,
            m_list: vec![32],
            ..small()
        };
        let r = run_compress_sweep(&cfg).unwrap();
        for run in &r.runs {
            assert!(run.compression_gap.abs() < 1e-4, "{run:?}");
            assert!(run.projection_slack.abs() < 1e-12);
            assert!(run.epsilon_hat < 1e-12);
        }
        assert!(run_compress_sweep(&SweepConfig {
            m_list: vec![16],
            ..cfg
        })
        .is_err());
    }

    #[test]
    fn chain_links_are_recorded() {
        let r = run_compress_sweep(&small()).unwrap();
        for run in &r.runs {
            assert!(run.best_measured_loss <= run.measured_loss);
            assert!(run.best_measured_loss <= run.projected_loss);
            assert!((run.projection_slack - (run.projected_loss - run.data_loss)).abs() < 1e-12);
        }
        assert_eq!(r.points[0].metrics.len(), r.runs[0].metrics().len());
    }

    #[test]
    fn config_parses_nested_sensing_block() {
        let text = r#"{"task": {"n": 16, "k": 2, "R": 1.0, "M": 10, "M_eval": 20},
            "C": 1.0, "sensing": {"family": "dg", "r": 1}, "m_list": [8], "seeds": [1]}"#;
        let cfg: SweepConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.sensing, SensingFamily::Dg { r: Some(1) });
        assert_eq!(cfg.rip_trials, 200);
        let missing = r#"{"task": {"n": 16, "k": 2, "R": 1.0, "M": 10, "M_eval": 20},
            "C": 1.0, "sensing": {"family": "gaussian"}, "seeds": [1]}"#;
        let err = serde_json::from_str::<SweepConfig>(missing)
            .unwrap_err()
            .to_string();
        assert!(err.contains("m_list"), "{err}");
    }

    #[test]
    fn dg_family_uses_realified_rows() {
        let cfg = SweepConfig {
            sensing: SensingFamily::Dg { r: None },
            m_list: vec![8, 32],
            seeds: vec![1],
            ..small()
        };
        let r = run_compress_sweep(&cfg).unwrap();
        assert_eq!(r.runs[0].effective_rows, 16);
        assert_eq!(r.runs[1].effective_rows, 64);
        let bad = SweepConfig {
            m_list: vec![12],
            ..cfg
        };
        assert!(run_compress_sweep(&bad).is_err());
    }

    #[test]
    fn planted_scaling_respects_budget() {
        let t = generate_task(&small().task).unwrap();
        let w = scaled_planted(&t.planted_w, &t.train, 10.0).unwrap();
        assert!(norm_sq(&w) <= 10.0 + 1e-9);
        let l = regularized_loss(&w, &t.train, 10.0).unwrap();
        let half: Vec<f64> = w.iter().map(|v| v * 0.5).collect();
        assert!(l <= regularized_loss(&half, &t.train, 10.0).unwrap() + 1e-9);
    }
}
