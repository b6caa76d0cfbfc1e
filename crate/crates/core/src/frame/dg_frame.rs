use num_complex::Complex64;

use super::dg_set::{dg_matrix, DgParams};
use super::exponents::{unit_power, ExponentMatrix};
use crate::error::{Error, Result};
use crate::f2::{quad_form_mod4_masks, BitMatrix, BitVector, FieldElement};

/// Default ceiling on columns that `synthesize_frame` will materialize.
pub const DEFAULT_MATERIALIZE_LIMIT: u64 = 1 << 20;

/// Identifies the column `(P, b)` of a frame; `P` is named by its coefficient tuple.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ColumnIndex {
    pub coeffs: Vec<FieldElement>,
    pub b: BitVector,
}

/// One unnormalized column as Z4 exponents over `t = 0 .. 2^m - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameColumn {
    pub index: ColumnIndex,
    pub exponents: Vec<u8>,
}

/// The frame G(m, r). Entries are generated on demand from a basis of the
/// DG set; the full exponent matrix is only held when materialized.
#[derive(Clone, Debug)]
pub struct Frame {
    params: DgParams,
    // row masks of P for each single-bit coefficient tuple, low bit of c_r first
    basis: Vec<Vec<u64>>,
    materialized: Option<ExponentMatrix>,
}

struct ColumnParts {
    rows: Vec<u64>,
    diag_weight: u32,
    b: u64,
}

impl Frame {
    pub fn params(&self) -> DgParams {
        self.params
    }

    pub fn m(&self) -> u32 {
        self.params.m
    }

    pub fn r(&self) -> u32 {
        self.params.r
    }

    pub fn num_rows(&self) -> usize {
        self.params.num_rows()
    }

    pub fn num_cols(&self) -> u64 {
        self.params.num_cols()
    }

    /// `2^(-m/2)`, making every column unit norm.
    pub fn normalization(&self) -> f64 {
        (self.num_rows() as f64).sqrt().recip()
    }

    /// `num_cols / num_rows`.
    pub fn redundancy(&self) -> f64 {
        self.num_cols() as f64 / self.num_rows() as f64
    }

    pub fn is_materialized(&self) -> bool {
        self.materialized.is_some()
    }

    pub fn exponent_matrix(&self) -> Option<&ExponentMatrix> {
        self.materialized.as_ref()
    }

    /// Linear position of `index` under the lexicographic `(c_0, ..., c_r, b)` order.
    pub fn position(&self, index: &ColumnIndex) -> Result<u64> {
        let set_pos = self.params.position_of(&index.coeffs)?;
        if index.b.len() != self.m() as usize {
            return Err(Error::FrameMismatch);
        }
        let b = index.b.to_u64().expect("m <= 7");
        Ok((set_pos << self.m()) | b)
    }

    pub fn index_at(&self, pos: u64) -> Result<ColumnIndex> {
        self.check_position(pos)?;
        let m = self.m();
        Ok(ColumnIndex {
            coeffs: self.params.coefficients_at(pos >> m),
            b: BitVector::from_u64(pos & ((1 << m) - 1), m as usize),
        })
    }

    fn check_position(&self, pos: u64) -> Result<()> {
        if pos >= self.num_cols() {
            return Err(Error::InvalidIndex(format!(
                "column {pos} out of range for {} columns",
                self.num_cols()
            )));
        }
        Ok(())
    }

    fn parts(&self, pos: u64) -> ColumnParts {
        let m = self.m();
        let mut rows = vec![0u64; m as usize];
        let mut cpart = pos >> m;
        while cpart != 0 {
            let k = cpart.trailing_zeros() as usize;
            for (r, b) in rows.iter_mut().zip(&self.basis[k]) {
                *r ^= b;
            }
            cpart &= cpart - 1;
        }
        let diag_weight = (0..m as usize).filter(|&u| rows[u] >> u & 1 == 1).count() as u32;
        ColumnParts {
            rows,
            diag_weight,
            b: pos & ((1 << m) - 1),
        }
    }

    fn exponent_from_parts(parts: &ColumnParts, t: u64) -> u8 {
        let lin = parts.diag_weight + 2 * parts.b.count_ones() + 2 * (parts.b & t).count_ones();
        ((lin as u8) + quad_form_mod4_masks(&parts.rows, t)) & 3
    }

    /// The matrix `P` of a column position.
    pub fn matrix_at(&self, pos: u64) -> Result<BitMatrix> {
        self.check_position(pos)?;
        Ok(BitMatrix::from_row_masks(
            &self.parts(pos).rows,
            self.m() as usize,
        ))
    }

    /// Exponent of entry `(t, pos)`, computed without touching any stored matrix.
    pub fn exponent_at(&self, pos: u64, t: u64) -> Result<u8> {
        self.check_position(pos)?;
        if t >= self.num_rows() as u64 {
            return Err(Error::InvalidIndex(format!("row {t} out of range")));
        }
        Ok(Self::exponent_from_parts(&self.parts(pos), t))
    }

    /// Exponent vector of the unnormalized column at `pos`.
    pub fn column_exponents(&self, pos: u64) -> Result<Vec<u8>> {
        self.check_position(pos)?;
        let parts = self.parts(pos);
        Ok((0..self.num_rows() as u64)
            .map(|t| Self::exponent_from_parts(&parts, t))
            .collect())
    }

    pub fn column(&self, index: &ColumnIndex) -> Result<FrameColumn> {
        let pos = self.position(index)?;
        Ok(FrameColumn {
            index: index.clone(),
            exponents: self.column_exponents(pos)?,
        })
    }

    /// Builds the full exponent matrix, bounded by `limit` columns.
    pub fn materialize(&self, limit: u64) -> Result<ExponentMatrix> {
        if let Some(e) = &self.materialized {
            return Ok(e.clone());
        }
        if self.num_cols() > limit {
            return Err(Error::ResourceLimit {
                columns: self.num_cols(),
                limit,
            });
        }
        ExponentMatrix::from_columns(
            self.num_rows(),
            (0..self.num_cols()).map(|pos| self.column_exponents(pos).expect("in range")),
        )
    }

    /// First `n` columns in frame order as a complex matrix (normalized).
    pub fn leading_columns(&self, n: usize) -> Result<nalgebra::DMatrix<Complex64>> {
        if n as u64 > self.num_cols() {
            return Err(Error::InvalidInput(format!(
                "requested {n} columns from a frame with {}",
                self.num_cols()
            )));
        }
        let scale = self.normalization();
        let cols: Vec<Vec<u8>> = (0..n as u64)
            .map(|pos| self.column_exponents(pos))
            .collect::<Result<_>>()?;
        Ok(nalgebra::DMatrix::from_fn(self.num_rows(), n, |t, j| {
            unit_power(cols[j][t]) * scale
        }))
    }
}

pub fn synthesize_frame(m: u32, r: u32, materialize: bool) -> Result<Frame> {
    synthesize_frame_with_limit(m, r, materialize, DEFAULT_MATERIALIZE_LIMIT)
}

pub fn synthesize_frame_with_limit(m: u32, r: u32, materialize: bool, limit: u64) -> Result<Frame> {
    let params = DgParams::new(m, r)?;
    let nbits = ((r + 1) * m) as usize;
    let basis = (0..nbits)
        .map(|k| {
            let p = dg_matrix(&params.coefficients_at(1u64 << k))?;
            Ok(p.row_masks().expect("m <= 64"))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut frame = Frame {
        params,
        basis,
        materialized: None,
    };
    if materialize {
        frame.materialized = Some(frame.materialize(limit)?);
    }
    Ok(frame)
}

/// Normalized entry `a_{(P,b),t}`.
pub fn frame_entry(frame: &Frame, col: &ColumnIndex, t: &BitVector) -> Result<Complex64> {
    if t.len() != frame.m() as usize {
        return Err(Error::LengthMismatch {
            left: frame.m() as usize,
            right: t.len(),
        });
    }
    let pos = frame.position(col)?;
    let e = frame.exponent_at(pos, t.to_u64().expect("m <= 7"))?;
    Ok(unit_power(e) * frame.normalization())
}

/// Index of the pointwise product of two unnormalized columns:
/// `(P xor P', b xor b' xor (d_P * d_P'))`.
pub fn column_group_product(
    frame: &Frame,
    a: &ColumnIndex,
    b: &ColumnIndex,
) -> Result<ColumnIndex> {
    let pa = frame.position(a)?;
    let pb = frame.position(b)?;
    frame.index_at(column_group_product_position(frame, pa, pb)?)
}

/// Position form of [`column_group_product`].
pub fn column_group_product_position(frame: &Frame, a: u64, b: u64) -> Result<u64> {
    frame.check_position(a)?;
    frame.check_position(b)?;
    let m = frame.m();
    let low = (1u64 << m) - 1;
    let da = diag_mask(&frame.parts(a).rows);
    let db = diag_mask(&frame.parts(b).rows);
    let cpart = (a >> m) ^ (b >> m);
    let bpart = (a & low) ^ (b & low) ^ (da & db);
    Ok((cpart << m) | bpart)
}

fn diag_mask(rows: &[u64]) -> u64 {
    rows.iter()
        .enumerate()
        .fold(0, |acc, (u, r)| acc | (r & (1 << u)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::f2::{hamming_weight, quad_form_mod4};
    use crate::frame::build_dg_set;

    #[test]
    fn dimensions() {
        let f = synthesize_frame(3, 0, true).unwrap();
        assert_eq!((f.num_rows(), f.num_cols()), (8, 64));
        let f = synthesize_frame(5, 0, false).unwrap();
        assert_eq!((f.num_rows(), f.num_cols()), (32, 1024));
        let f = synthesize_frame(5, 1, false).unwrap();
        assert_eq!((f.num_rows(), f.num_cols()), (32, 32768));
    }

    #[test]
    fn first_column_is_all_ones() {
        let f = synthesize_frame(3, 0, false).unwrap();
        let col = f.index_at(0).unwrap();
        for t in 0..8 {
            let v = frame_entry(&f, &col, &BitVector::from_u64(t, 3)).unwrap();
            assert_eq!(v, Complex64::new(f.normalization(), 0.0));
        }
    }

    #[test]
    fn hand_evaluated_entry() {
        // P = 0, b = e1, t = e1: exponent 2 + 2 = 0 mod 4
        let f = synthesize_frame(3, 0, false).unwrap();
        let col = ColumnIndex {
            coeffs: vec![FieldElement::zero(3).unwrap()],
            b: BitVector::unit(3, 0),
        };
        let v = frame_entry(&f, &col, &BitVector::unit(3, 0)).unwrap();
        assert_eq!(v, Complex64::new(f.normalization(), 0.0));
        // same column at t = e2: exponent 2 -> negative
        let v = frame_entry(&f, &col, &BitVector::unit(3, 1)).unwrap();
        assert_eq!(v, Complex64::new(-f.normalization(), 0.0));
    }

    #[test]
    fn every_entry_has_magnitude_normalization() {
        let f = synthesize_frame(3, 1, true).unwrap();
        let c = f.exponent_matrix().unwrap().to_complex(f.normalization());
        for z in c.iter() {
            assert!((z.norm() - f.normalization()).abs() < 1e-15);
        }
    }

    #[test]
    fn exponents_match_definition_via_dg_set() {
        // independent route: explicit DG set members + quad_form_mod4 on BitMatrix
        let set = build_dg_set(3, 1).unwrap();
        let f = synthesize_frame(3, 1, false).unwrap();
        for pos in (0..f.num_cols()).step_by(7) {
            let idx = f.index_at(pos).unwrap();
            let p = set.get(&idx.coeffs).unwrap();
            assert_eq!(&f.matrix_at(pos).unwrap(), p);
            let wd = hamming_weight(&p.diagonal());
            let wb = hamming_weight(&idx.b);
            for t in 0..8u64 {
                let tv = BitVector::from_u64(t, 3);
                let bt = idx.b.and(&tv).unwrap().weight();
                let e = (wd + 2 * wb + quad_form_mod4(p, &tv).unwrap() as usize + 2 * bt) % 4;
                assert_eq!(f.exponent_at(pos, t).unwrap() as usize, e);
            }
        }
    }

    #[test]
    fn accessor_matches_materialized_for_g51() {
        let lazy = synthesize_frame(5, 1, false).unwrap();
        let full = synthesize_frame(5, 1, true).unwrap();
        let e = full.exponent_matrix().unwrap();
        let mut pos = 17u64;
        for _ in 0..500 {
            pos = (pos * 2654435761 + 12345) % lazy.num_cols();
            let t = pos % 32;
            assert_eq!(
                lazy.exponent_at(pos, t).unwrap(),
                e.get(t as usize, pos as usize)
            );
        }
    }

    #[test]
    fn materialization_limit() {
        assert!(matches!(
            synthesize_frame_with_limit(5, 1, true, 1024),
            Err(Error::ResourceLimit {
                columns: 32768,
                limit: 1024
            })
        ));
    }

    #[test]
    fn group_identity_and_self_product() {
        let f = synthesize_frame(3, 0, false).unwrap();
        let id = f.index_at(0).unwrap();
        for pos in 0..64 {
            let a = f.index_at(pos).unwrap();
            assert_eq!(column_group_product(&f, &a, &id).unwrap(), a);
            assert_eq!(column_group_product(&f, &id, &a).unwrap(), a);
            let sq = column_group_product(&f, &a, &a).unwrap();
            let p = f.matrix_at(pos).unwrap();
            assert!(sq.coeffs.iter().all(|c| c.is_zero()));
            assert_eq!(sq.b, p.diagonal());
            // exponentwise check of the self product
            let ea = f.column_exponents(pos).unwrap();
            let es = f.column(&sq).unwrap().exponents;
            for t in 0..8 {
                assert_eq!((2 * ea[t]) & 3, es[t]);
            }
        }
    }

    #[test]
    fn group_product_is_associative_on_g30() {
        let f = synthesize_frame(3, 0, false).unwrap();
        for a in 0..64 {
            for b in 0..64 {
                let ab = column_group_product_position(&f, a, b).unwrap();
                for c in (0..64).step_by(5) {
                    let bc = column_group_product_position(&f, b, c).unwrap();
                    assert_eq!(
                        column_group_product_position(&f, ab, c).unwrap(),
                        column_group_product_position(&f, a, bc).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn mismatched_indices_are_rejected() {
        let f3 = synthesize_frame(3, 0, false).unwrap();
        let f5 = synthesize_frame(5, 0, false).unwrap();
        let a = f5.index_at(3).unwrap();
        let b = f3.index_at(3).unwrap();
        assert!(matches!(
            column_group_product(&f3, &a, &b),
            Err(Error::FrameMismatch)
        ));
        assert!(f3.index_at(64).is_err());
        assert!(frame_entry(&f3, &b, &BitVector::zeros(5)).is_err());
    }
}
