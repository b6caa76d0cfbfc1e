//! Exact arithmetic over GF(2), GF(2^m) and Z4.

mod bits;
mod field;

pub use bits::{BitMatrix, BitVector};
pub use field::{modulus, modulus_coefficients, trace, FieldElement, SUPPORTED_DEGREES};

use crate::error::{Error, Result};

/// Number of ones in `v`.
pub fn hamming_weight(v: &BitVector) -> usize {
    v.weight()
}

pub fn xor(a: &BitVector, b: &BitVector) -> Result<BitVector> {
    a.xor(b)
}

/// Componentwise product `a * b`.
pub fn pointwise_and(a: &BitVector, b: &BitVector) -> Result<BitVector> {
    a.and(b)
}

/// `t P t^T` summed over the integers, then reduced mod 4.
///
/// The exponent of `i` lives in Z4, so no mod-2 reduction happens before the end.
pub fn quad_form_mod4(p: &BitMatrix, t: &BitVector) -> Result<u8> {
    if p.nrows() != p.ncols() || p.ncols() != t.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix with vector of length {}",
            p.nrows(),
            p.ncols(),
            t.len()
        )));
    }
    let mut total = 0usize;
    for u in (0..t.len()).filter(|&u| t.get(u)) {
        total += p.row(u).and(t)?.weight();
    }
    Ok((total % 4) as u8)
}

/// Same as [`quad_form_mod4`] on row masks (at most 64 columns).
pub(crate) fn quad_form_mod4_masks(rows: &[u64], t: u64) -> u8 {
    let mut total = 0u32;
    let mut rest = t;
    while rest != 0 {
        let u = rest.trailing_zeros() as usize;
        total += (rows[u] & t).count_ones();
        rest &= rest - 1;
    }
    (total % 4) as u8
}

/// Rank over GF(2) by Gaussian elimination on packed rows.
pub fn rank_f2(m: &BitMatrix) -> usize {
    let mut rows: Vec<Vec<u64>> = m.rows().iter().map(|r| r.words().to_vec()).collect();
    let mut rank = 0;
    for col in 0..m.ncols() {
        let (w, bit) = (col / 64, 1u64 << (col % 64));
        let Some(pivot) = (rank..rows.len()).find(|&i| rows[i][w] & bit != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let (head, tail) = rows.split_at_mut(rank + 1);
        let pivot_row = &head[rank];
        for row in tail.iter_mut().filter(|r| r[w] & bit != 0) {
            for (x, p) in row.iter_mut().zip(pivot_row) {
                *x ^= p;
            }
        }
        rank += 1;
    }
    rank
}

/// Rank of a matrix with at most 64 columns given as row masks.
pub fn rank_f2_masks(rows: &[u64]) -> usize {
    let mut rows = rows.to_vec();
    let mut rank = 0;
    for col in 0..64 {
        let bit = 1u64 << col;
        let Some(pivot) = (rank..rows.len()).find(|&i| rows[i] & bit != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let p = rows[rank];
        for r in rows[rank + 1..].iter_mut() {
            if *r & bit != 0 {
                *r ^= p;
            }
        }
        rank += 1;
    }
    rank
}

/// Carry matrix `Q` with `P + P' = (P xor P') + 2Q` over the integers, i.e. `P AND P'`.
pub fn carry_matrix(p: &BitMatrix, p2: &BitMatrix) -> Result<BitMatrix> {
    if !p.is_symmetric() || !p2.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    p.and(p2)
}
