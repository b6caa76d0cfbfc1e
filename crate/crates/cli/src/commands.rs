use std::fs;
use std::path::{Path, PathBuf};

use dgcl::fld::{fit_pca_fld, write_projection_csv};
use dgcl::frame::{
    synthesize_frame, write_complex_csv, ExponentMatrix, Frame, FrameFile,
    DEFAULT_MATERIALIZE_LIMIT,
};
use dgcl::learn::{
    dg_learning_measurement_bound, run_compress_sweep, write_plot_csv, write_runs_csv, SweepConfig,
};
use dgcl::strip::{
    check_ustrip_uniqueness, estimate_strip, strip_failure_probability, strip_measurement_bound,
    strip_measurement_bound_raw, verify_exponents, St2Sampling,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::OutDir;
use crate::{
    BoundsCommand, EstimateArgs, ExperimentArgs, Failure, FldArgs, GenFrameArgs, UniquenessArgs,
    VerifyArgs,
};

fn params<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).unwrap_or(Value::Null)
}

fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("reading {}: {e}", path.display())))
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::internal(e.to_string()))?;
    println!("{text}");
    Ok(())
}

/// Parsed frame file, its exponent body (synthesized from the header when the
/// file holds none) and the accessor frame for group-law checks.
fn load_frame(path: &Path) -> Result<(ExponentMatrix, f64, Frame), Failure> {
    let file = FrameFile::from_json(&read_input(path)?)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let frame = synthesize_frame(file.header.m, file.header.r, false)?;
    let exps = match file.exponent_matrix() {
        Some(e) => e,
        None => frame.materialize(DEFAULT_MATERIALIZE_LIMIT)?,
    };
    Ok((exps, file.header.normalization, frame))
}

/// Prints `value` and, with an output directory, also writes it with a manifest.
fn emit<T: Serialize>(
    out_dir: Option<&Path>,
    name: &str,
    value: &T,
    command: &str,
    seed: Option<u64>,
    parameters: Value,
) -> Result<(), Failure> {
    print_json(value)?;
    if let Some(dir) = out_dir {
        let mut out = OutDir::create(dir)?;
        out.write_json(name, value)?;
        out.finish(command, seed, parameters)?;
    }
    Ok(())
}

pub fn gen_frame(a: &GenFrameArgs) -> Result<(), Failure> {
    let materialize = !a.no_materialize;
    let frame = synthesize_frame(a.m, a.r, false)?;
    let body = if materialize {
        Some(frame.materialize(DEFAULT_MATERIALIZE_LIMIT)?)
    } else {
        None
    };
    let file = FrameFile::from_frame(&frame, body.as_ref())?;
    let mut out = OutDir::create(&a.out_dir)?;
    out.write("frame.json", format!("{}\n", file.to_json()?).as_bytes())?;
    if a.csv {
        let exps = body
            .as_ref()
            .ok_or_else(|| Failure::usage("--csv needs a materialized frame"))?;
        let mut buf = Vec::new();
        write_complex_csv(&mut buf, exps, frame.normalization())?;
        out.write("frame.csv", &buf)?;
    }
    out.finish("gen-frame", None, params(a))
}

pub fn verify(a: &VerifyArgs) -> Result<(), Failure> {
    let (exps, norm, frame) = load_frame(&a.frame)?;
    let sampling = St2Sampling {
        exhaustive_limit: a.exhaustive_limit,
        sampled_pairs: a.sampled_pairs,
        seed: a.seed,
    };
    let report = verify_exponents(&exps, norm, Some(&frame), a.eta, &sampling);
    emit(
        a.out_dir.as_deref(),
        "report.json",
        &report,
        "verify",
        Some(a.seed),
        params(a),
    )?;
    if report.verdict.all() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("{:?}", report.verdict)))
    }
}

pub fn estimate(a: &EstimateArgs) -> Result<(), Failure> {
    let (exps, norm, _) = load_frame(&a.frame)?;
    let est = estimate_strip(&exps.to_complex(norm), a.k, a.epsilon, a.trials, a.seed)?;
    emit(
        a.out_dir.as_deref(),
        "estimate.json",
        &est,
        "estimate",
        Some(a.seed),
        params(a),
    )
}

pub fn uniqueness(a: &UniquenessArgs) -> Result<(), Failure> {
    let (exps, norm, _) = load_frame(&a.frame)?;
    let rep = check_ustrip_uniqueness(&exps.to_complex(norm), a.k, a.trials, a.seed, a.ceiling)?;
    emit(
        a.out_dir.as_deref(),
        "uniqueness.json",
        &rep,
        "uniqueness",
        Some(a.seed),
        params(a),
    )
}

const PLOT_TABLES: [(&str, &[&str]); 2] = [
    (
        "plot_accuracy.csv",
        &[
            "train_accuracy_data",
            "test_accuracy_data",
            "train_accuracy_measured",
            "test_accuracy_measured",
        ],
    ),
    (
        "plot_hinge.csv",
        &[
            "data_hinge",
            "measured_hinge",
            "projected_hinge",
            "planted_hinge",
            "compression_gap",
        ],
    ),
];

pub fn experiment(a: &ExperimentArgs) -> Result<(), Failure> {
    let text = read_input(&a.config)?;
    let mut cfg: SweepConfig = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("config {}: {e}", a.config.display())))?;
    if let Some(seeds) = &a.seeds {
        cfg.seeds = seeds.clone();
    }
    // the directory is not a parameter of the run; keep it out of the manifest
    let out_dir = match (a.out_dir.clone(), cfg.output.take()) {
        (Some(dir), _) => dir,
        (None, Some(dir)) => PathBuf::from(dir),
        (None, None) => {
            return Err(Failure::usage(
                "no output directory: pass --out-dir or set `output` in the config",
            ));
        }
    };
    let report = run_compress_sweep(&cfg)?;
    let mut out = OutDir::create(&out_dir)?;
    out.write_json("report.json", &report)?;
    let mut buf = Vec::new();
    write_runs_csv(&mut buf, &report.runs)?;
    out.write("runs.csv", &buf)?;
    if a.emit_plot_data {
        for (name, metrics) in PLOT_TABLES {
            let mut buf = Vec::new();
            write_plot_csv(&mut buf, &report.points, metrics)?;
            out.write(name, &buf)?;
        }
    }
    let parameters = json!({ "config": cfg, "emit_plot_data": a.emit_plot_data });
    out.finish("experiment", Some(cfg.task.seed), parameters)?;
    print_json(&json!({
        "points": report.points.len(),
        "runs": report.runs.len(),
        "gap_trend": report.gap_trend(),
    }))
}

fn read_labeled_csv(
    path: &Path,
    label_column: &str,
) -> Result<(Vec<Vec<f64>>, Vec<usize>), Failure> {
    let bad = |msg: String| Failure::usage(format!("{}: {msg}", path.display()));
    let text = read_input(path)?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| bad(format!("no column named {label_column:?}")))?;
    let mut samples = Vec::new();
    let mut labels = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let mut x = Vec::with_capacity(rec.len().saturating_sub(1));
        for (i, field) in rec.iter().enumerate() {
            if i == label_idx {
                labels.push(
                    field
                        .trim()
                        .parse::<usize>()
                        .map_err(|e| bad(format!("row {}: label {field:?}: {e}", line + 1)))?,
                );
            } else {
                x.push(
                    field
                        .trim()
                        .parse::<f64>()
                        .map_err(|e| bad(format!("row {}: {field:?}: {e}", line + 1)))?,
                );
            }
        }
        samples.push(x);
    }
    Ok((samples, labels))
}

pub fn fld(a: &FldArgs) -> Result<(), Failure> {
    let (samples, labels) = read_labeled_csv(&a.data, &a.label_column)?;
    let model = fit_pca_fld(&samples, &labels)?;
    let mut out = OutDir::create(&a.out_dir)?;
    out.write_json("model.json", &model)?;
    let mut buf = Vec::new();
    write_projection_csv(&mut buf, &model, &samples, &labels)?;
    out.write("projection.csv", &buf)?;
    out.finish("fld", None, params(a))?;
    print_json(&json!({
        "classes": model.classes,
        "directions": model.directions.len(),
        "eigenvalues": model.eigenvalues,
        "ridge": model.ridge,
    }))
}

pub fn bounds(b: &BoundsCommand) -> Result<(), Failure> {
    match *b {
        BoundsCommand::Strip {
            k,
            epsilon,
            rows,
            eta,
            n,
            c,
        } => {
            let p = strip_failure_probability(k, epsilon, rows, eta, n)?;
            print_json(&json!({
                "failure_probability": p,
                "measurement_bound_raw": strip_measurement_bound_raw(k, epsilon, eta, n, c)?,
                "measurement_bound": strip_measurement_bound(k, epsilon, eta, n, c)?,
            }))
        }
        BoundsCommand::DgLearning { o, r, epsilon1, c } => print_json(&json!({
            "columns": 2f64.powi(((r + 2) * o) as i32),
            "measurement_bound": dg_learning_measurement_bound(o, r, epsilon1, c)?,
        })),
    }
}
