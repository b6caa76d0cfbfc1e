//! Fisher linear discriminant with an optional PCA pre-projection, and a
//! nearest-centroid classifier in the discriminant space.

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance on the generalized eigenpair residual.
pub const EIGEN_RESIDUAL_TOLERANCE: f64 = 1e-6;

/// Ridge `RIDGE_SCALE * trace(S_W) / dim` added when the reduced within-class
/// scatter is not positive definite.
pub const RIDGE_SCALE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct ScatterSet {
    pub within: DMatrix<f64>,
    pub between: DMatrix<f64>,
    pub total: DMatrix<f64>,
    /// Sorted distinct labels; class `i` below refers to `classes[i]`.
    pub classes: Vec<usize>,
    pub class_means: Vec<DVector<f64>>,
    pub class_counts: Vec<usize>,
    pub global_mean: DVector<f64>,
    pub count: usize,
}

impl ScatterSet {
    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    /// Largest entry of `|S_T - S_B - S_W|`, relative to the largest entry of `S_T`.
    pub fn decomposition_residual(&self) -> f64 {
        let diff = &self.total - &self.between - &self.within;
        diff.amax() / self.total.amax().max(f64::MIN_POSITIVE)
    }
}

fn to_matrix(samples: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = samples.first().map_or(0, Vec::len);
    if samples.is_empty() || n == 0 {
        return Err(Error::EmptySamples);
    }
    for (i, s) in samples.iter().enumerate() {
        if s.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: s.len(),
            });
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
    }
    // one sample per column
    Ok(DMatrix::from_fn(n, samples.len(), |i, j| samples[j][i]))
}

fn outer_sum(cols: impl Iterator<Item = (f64, DVector<f64>)>, n: usize) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(n, n);
    for (weight, d) in cols {
        s.ger(weight, &d, &d, 1.0);
    }
    s
}

fn scatter_of(x: &DMatrix<f64>, labels: &[usize]) -> Result<ScatterSet> {
    if labels.len() != x.ncols() {
        return Err(Error::LengthMismatch {
            left: x.ncols(),
            right: labels.len(),
        });
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (j, &l) in labels.iter().enumerate() {
        groups.entry(l).or_default().push(j);
    }
    if groups.len() < 2 {
        return Err(Error::InvalidInput("need at least two classes".into()));
    }
    let n = x.nrows();
    let count = x.ncols();
    let global_mean = x.column_mean();
    let classes: Vec<usize> = groups.keys().copied().collect();
    let class_counts: Vec<usize> = groups.values().map(Vec::len).collect();
    let class_means: Vec<DVector<f64>> = groups
        .values()
        .map(|idx| {
            idx.iter()
                .map(|&j| x.column(j).into_owned())
                .sum::<DVector<f64>>()
                / idx.len() as f64
        })
        .collect();
    let within = outer_sum(
        groups
            .values()
            .zip(&class_means)
            .flat_map(|(idx, mean)| idx.iter().map(move |&j| (1.0, x.column(j) - mean))),
        n,
    );
    let between = outer_sum(
        class_means
            .iter()
            .zip(&class_counts)
            .map(|(mean, &c)| (c as f64, mean - &global_mean)),
        n,
    );
    let total = outer_sum(x.column_iter().map(|c| (1.0, c - &global_mean)), n);
    Ok(ScatterSet {
        within,
        between,
        total,
        classes,
        class_means,
        class_counts,
        global_mean,
        count,
    })
}

/// Within, between (weighted by class size) and total scatter.
pub fn compute_scatter(samples: &[Vec<f64>], labels: &[usize]) -> Result<ScatterSet> {
    scatter_of(&to_matrix(samples)?, labels)
}

/// `det(W^T S_B W) / det(W^T S_W W)`.
pub fn fisher_criterion(w: &DMatrix<f64>, scatter: &ScatterSet) -> Result<f64> {
    if w.nrows() != scatter.within.nrows() {
        return Err(Error::LengthMismatch {
            left: scatter.within.nrows(),
            right: w.nrows(),
        });
    }
    let den = w.transpose() * &scatter.within * w;
    let scale = (w.transpose() * &scatter.total * w)
        .trace()
        .abs()
        .max(w.norm_squared());
    let eig = SymmetricEigen::new(den.clone()).eigenvalues;
    if eig.min() <= 1e-12 * scale {
        return Err(Error::Singular("W^T S_W W".into()));
    }
    let num = (w.transpose() * &scatter.between * w).determinant();
    Ok((num / den.determinant()).max(0.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FldModel {
    pub input_dim: usize,
    pub classes: Vec<usize>,
    /// `input_dim x reduced` columns, absent when PCA was skipped.
    pub pca: Option<Vec<Vec<f64>>>,
    /// Discriminant directions in the reduced space, one per entry.
    pub directions: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub centroids: Vec<Vec<f64>>,
    /// Ridge added to the reduced within-class scatter; 0 when none was needed.
    pub ridge: f64,
    pub max_eigen_residual: f64,
}

fn columns_to_vecs(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.column_iter()
        .map(|c| c.iter().copied().collect())
        .collect()
}

fn vecs_to_columns(v: &[Vec<f64>], rows: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, v.len(), |i, j| v[j][i])
}

/// Flip so the largest-magnitude entry is positive (first one on ties).
fn fix_sign(v: &mut DVector<f64>) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.neg_mut();
    }
}

/// Eigenpairs of a symmetric matrix sorted by descending eigenvalue.
fn sorted_eigen(m: DMatrix<f64>) -> Vec<(f64, DVector<f64>)> {
    let e = SymmetricEigen::new(m);
    let mut pairs: Vec<(f64, DVector<f64>)> = e
        .eigenvalues
        .iter()
        .zip(e.eigenvectors.column_iter())
        .map(|(&l, v)| (l, v.into_owned()))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs
}

impl FldModel {
    fn pca_matrix(&self) -> Option<DMatrix<f64>> {
        self.pca
            .as_ref()
            .map(|p| vecs_to_columns(p, self.input_dim))
    }

    fn reduced_dim(&self) -> usize {
        self.pca.as_ref().map_or(self.input_dim, Vec::len)
    }

    /// Coordinates of `x` in the discriminant space.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(Error::LengthMismatch {
                left: self.input_dim,
                right: x.len(),
            });
        }
        let v = DVector::from_column_slice(x);
        let reduced = match self.pca_matrix() {
            Some(p) => p.transpose() * v,
            None => v,
        };
        let w = vecs_to_columns(&self.directions, self.reduced_dim());
        Ok((w.transpose() * reduced).iter().copied().collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// PCA onto the top `N - c` total-scatter directions when `n > N - c`, then the
/// generalized eigenproblem `S_B w = lambda S_W w` in the reduced space.
pub fn fit_pca_fld(samples: &[Vec<f64>], labels: &[usize]) -> Result<FldModel> {
    let x = to_matrix(samples)?;
    let scatter = scatter_of(&x, labels)?;
    let (n, count, c) = (x.nrows(), x.ncols(), scatter.num_classes());
    let reduced_target = count.saturating_sub(c);
    let pca = if n > reduced_target {
        if reduced_target == 0 {
            return Err(Error::InvalidInput("need more samples than classes".into()));
        }
        let mut cols: Vec<DVector<f64>> = sorted_eigen(scatter.total.clone())
            .into_iter()
            .take(reduced_target)
            .map(|(_, v)| v)
            .collect();
        cols.iter_mut().for_each(fix_sign);
        Some(DMatrix::from_columns(&cols))
    } else {
        None
    };
    let (sw, sb) = match &pca {
        Some(p) => (
            p.transpose() * &scatter.within * p,
            p.transpose() * &scatter.between * p,
        ),
        None => (scatter.within.clone(), scatter.between.clone()),
    };
    let d = sw.nrows();

    let mut ridge = 0.0;
    let spectrum = SymmetricEigen::new(sw.clone()).eigenvalues;
    let well_posed = spectrum.min() > 1e-10 * spectrum.max().max(0.0);
    let chol = match sw.clone().cholesky() {
        Some(ch) if well_posed => ch,
        _ => {
            ridge = RIDGE_SCALE * sw.trace().max(f64::MIN_POSITIVE) / d as f64;
            (&sw + DMatrix::identity(d, d) * ridge)
                .cholesky()
                .ok_or_else(|| Error::Singular("within-class scatter after ridge".into()))?
        }
    };
    let sw_used = &sw + DMatrix::identity(d, d) * ridge;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("Cholesky factor".into()))?;
    let mut whitened = &l_inv * &sb * l_inv.transpose();
    whitened = (&whitened + whitened.transpose()) * 0.5;

    let keep = (c - 1).min(d);
    let mut directions = Vec::with_capacity(keep);
    let mut eigenvalues = Vec::with_capacity(keep);
    let mut max_residual: f64 = 0.0;
    for (lambda, v) in sorted_eigen(whitened).into_iter().take(keep) {
        let mut w = l_inv.transpose() * v;
        fix_sign(&mut w);
        let lambda = lambda.max(0.0);
        let lhs = &sb * &w;
        let rhs = &sw_used * &w * lambda;
        let scale = lhs.norm() + rhs.norm();
        if scale > 0.0 {
            max_residual = max_residual.max((lhs - rhs).norm() / scale);
        }
        directions.push(w);
        eigenvalues.push(lambda);
    }
    if max_residual > EIGEN_RESIDUAL_TOLERANCE {
        return Err(Error::Singular(format!(
            "eigenpair residual {max_residual:.3e}"
        )));
    }

    let mut model = FldModel {
        input_dim: n,
        classes: scatter.classes.clone(),
        pca: pca.as_ref().map(columns_to_vecs),
        directions: directions
            .iter()
            .map(|w| w.iter().copied().collect())
            .collect(),
        eigenvalues,
        centroids: Vec::new(),
        ridge,
        max_eigen_residual: max_residual,
    };
    model.centroids = scatter
        .class_means
        .iter()
        .map(|m| model.project(m.as_slice()))
        .collect::<Result<_>>()?;
    Ok(model)
}

/// Index of the nearest centroid; ties go to the lowest index.
pub fn nearest_centroid(centroids: &[Vec<f64>], z: &[f64]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d: f64 = c.iter().zip(z).map(|(a, b)| (a - b).powi(2)).sum();
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// Label of the nearest class centroid in the discriminant space.
pub fn classify_fld(model: &FldModel, x: &[f64]) -> Result<usize> {
    let z = model.project(x)?;
    Ok(model.classes[nearest_centroid(&model.centroids, &z)])
}

/// `label,z0,z1,...` per sample.
pub fn write_projection_csv<W: Write>(
    out: W,
    model: &FldModel,
    samples: &[Vec<f64>],
    labels: &[usize],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let dims = model.directions.len();
    let mut header = vec!["label".to_string()];
    header.extend((0..dims).map(|i| format!("z{i}")));
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(&header).map_err(io)?;
    for (x, l) in samples.iter().zip(labels) {
        let mut row = vec![l.to_string()];
        row.extend(model.project(x)?.iter().map(|v| format!("{v:.17e}")));
        w.write_record(&row).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
