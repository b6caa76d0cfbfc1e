use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// `i^e` for `e` in Z4.
pub fn unit_power(e: u8) -> Complex64 {
    match e & 3 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Dense matrix of Z4 exponents, stored column-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl ExponentMatrix {
    pub fn from_columns(rows: usize, columns: impl IntoIterator<Item = Vec<u8>>) -> Result<Self> {
        let mut data = Vec::new();
        let mut cols = 0;
        for col in columns {
            if col.len() != rows {
                return Err(Error::LengthMismatch {
                    left: rows,
                    right: col.len(),
                });
            }
            if let Some(&bad) = col.iter().find(|&&e| e > 3) {
                return Err(Error::InvalidInput(format!("exponent {bad} outside Z4")));
            }
            data.extend_from_slice(&col);
            cols += 1;
        }
        Ok(Self { rows, cols, data })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &[u8] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn get(&self, t: usize, j: usize) -> u8 {
        self.data[j * self.rows + t]
    }

    pub fn set(&mut self, t: usize, j: usize, e: u8) {
        self.data[j * self.rows + t] = e & 3;
    }

    /// Adds `shift` to every exponent of column `j` (2 negates the column).
    pub fn shift_column(&mut self, j: usize, shift: u8) {
        for e in &mut self.data[j * self.rows..(j + 1) * self.rows] {
            *e = (*e + shift) & 3;
        }
    }

    /// Complex matrix `scale * i^E`.
    pub fn to_complex(&self, scale: f64) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |t, j| {
            unit_power(self.get(t, j)) * scale
        })
    }
}
