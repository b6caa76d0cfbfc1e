//! JSON frame files and CSV export.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::dg_frame::Frame;
use super::exponents::{unit_power, ExponentMatrix};
use crate::error::{Error, Result};
use crate::f2::modulus_coefficients;

pub const COLUMN_ORDERING: &str =
    "lexicographic in (c_0, ..., c_r, b); coefficient tuples and b read as integers with bit i = coordinate i; column 0 is the all-ones column";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameHeader {
    pub m: u32,
    pub r: u32,
    pub num_rows: usize,
    pub num_cols: u64,
    pub normalization: f64,
    /// Irreducible modulus, coefficients from degree 0 upwards.
    pub modulus: Vec<u8>,
    pub column_ordering: String,
}

/// On-disk frame: header plus optional exponent body, one string of Z4
/// digits per row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameFile {
    pub header: FrameHeader,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<Vec<String>>,
}

impl FrameFile {
    pub fn from_frame(frame: &Frame, body: Option<&ExponentMatrix>) -> Result<Self> {
        let header = FrameHeader {
            m: frame.m(),
            r: frame.r(),
            num_rows: frame.num_rows(),
            num_cols: frame.num_cols(),
            normalization: frame.normalization(),
            modulus: modulus_coefficients(frame.m())?,
            column_ordering: COLUMN_ORDERING.to_string(),
        };
        let exponents = body.map(|e| {
            (0..e.nrows())
                .map(|t| {
                    (0..e.ncols())
                        .map(|j| char::from(b'0' + e.get(t, j)))
                        .collect::<String>()
                })
                .collect()
        });
        Ok(Self { header, exponents })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses and validates header consistency and body shape.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: FrameFile = serde_json::from_str(text)?;
        let h = &file.header;
        let params = super::DgParams::new(h.m, h.r)?;
        if h.num_rows != params.num_rows() || h.num_cols != params.num_cols() {
            return Err(Error::InvalidInput(format!(
                "header dimensions {}x{} do not match G({}, {})",
                h.num_rows, h.num_cols, h.m, h.r
            )));
        }
        if h.modulus != modulus_coefficients(h.m)? {
            return Err(Error::InvalidInput(
                "modulus does not match the stored polynomial".into(),
            ));
        }
        if let Some(rows) = &file.exponents {
            if rows.len() != h.num_rows {
                return Err(Error::InvalidInput(format!(
                    "body has {} rows, header says {}",
                    rows.len(),
                    h.num_rows
                )));
            }
            for (t, row) in rows.iter().enumerate() {
                if row.len() as u64 != h.num_cols {
                    return Err(Error::InvalidInput(format!(
                        "row {t} has {} digits",
                        row.len()
                    )));
                }
                if let Some(c) = row.chars().find(|c| !matches!(c, '0'..='3')) {
                    return Err(Error::InvalidInput(format!(
                        "row {t}: {c:?} is not a Z4 digit"
                    )));
                }
            }
        }
        Ok(file)
    }

    pub fn exponent_matrix(&self) -> Option<ExponentMatrix> {
        let rows = self.exponents.as_ref()?;
        let nrows = rows.len();
        let ncols = self.header.num_cols as usize;
        let digits: Vec<&[u8]> = rows.iter().map(|r| r.as_bytes()).collect();
        let cols = (0..ncols).map(|j| digits.iter().map(|r| r[j] - b'0').collect::<Vec<u8>>());
        Some(ExponentMatrix::from_columns(nrows, cols).expect("validated on load"))
    }
}

/// Writes `row,col,re,im` for every normalized entry.
pub fn write_complex_csv<W: Write>(
    out: W,
    exps: &ExponentMatrix,
    normalization: f64,
) -> Result<()> {
    let mut out = std::io::BufWriter::new(out);
    writeln!(out, "row,col,re,im")?;
    for t in 0..exps.nrows() {
        for j in 0..exps.ncols() {
            let z = unit_power(exps.get(t, j)) * normalization;
            writeln!(out, "{t},{j},{},{}", z.re, z.im)?;
        }
    }
    out.flush()?;
    Ok(())
}
