use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::synthesize_frame;
use crate::rng::stream_rng;
use crate::strip::realify_matrix;
use crate::svm::LabeledSample;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SensingSource {
    Gaussian {
        rows: usize,
        seed: u64,
    },
    /// First `n` columns of G(m, r), realified to `2 * 2^m` rows.
    DgFrame {
        m: u32,
        r: u32,
    },
}

/// A real sensing matrix `A` with the parameters it was built from.
#[derive(Clone, Debug)]
pub struct SensingOperator {
    pub source: SensingSource,
    pub matrix: DMatrix<f64>,
}

impl SensingOperator {
    /// I.i.d. `N(0, 1/rows)` entries, so `E |Ax|^2 = |x|^2`.
    pub fn gaussian(rows: usize, n: usize, seed: u64) -> Self {
        let mut rng = stream_rng(seed, 0);
        let scale = (rows as f64).sqrt().recip();
        let matrix = DMatrix::from_fn(rows, n, |_, _| rng.sample::<f64, _>(StandardNormal) * scale);
        Self {
            source: SensingSource::Gaussian { rows, seed },
            matrix,
        }
    }

    /// Realified leading `n` columns of G(m, r).
    pub fn dg_frame(m: u32, r: u32, n: usize) -> Result<Self> {
        let frame = synthesize_frame(m, r, false)?;
        let phi = frame.leading_columns(n)?;
        Ok(Self {
            source: SensingSource::DgFrame { m, r },
            matrix: realify_matrix(&phi),
        })
    }

    /// Smallest `r` such that G(m, r) has at least `n` columns.
    pub fn dg_order_for(m: u32, n: usize) -> Result<u32> {
        (0..=(m.saturating_sub(1)) / 2)
            .find(|&r| (1u64 << ((r + 2) * m)) >= n as u64)
            .ok_or_else(|| Error::InvalidInput(format!("no G({m}, r) has {n} columns")))
    }

    pub fn identity(n: usize) -> Self {
        Self {
            source: SensingSource::Gaussian { rows: n, seed: 0 },
            matrix: DMatrix::identity(n, n),
        }
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols() {
            return Err(Error::LengthMismatch {
                left: self.cols(),
                right: x.len(),
            });
        }
        Ok((&self.matrix * DVector::from_column_slice(x))
            .as_slice()
            .to_vec())
    }

    /// `(A x_i, y_i)` for every sample.
    pub fn measure(&self, samples: &[LabeledSample]) -> Result<Vec<LabeledSample>> {
        samples
            .iter()
            .map(|s| {
                Ok(LabeledSample {
                    x: self.apply(&s.x)?,
                    y: s.y,
                })
            })
            .collect()
    }
}
