use std::fmt;

use crate::error::{Error, Result};

const WORD: usize = 64;

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// Fixed-length vector over GF(2), packed into 64-bit words.
///
/// Coordinate `i` lives in bit `i % 64` of word `i / 64`. Bits past `len` in the
/// last word are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self::zeros(len);
        for w in v.words.iter_mut() {
            *w = u64::MAX;
        }
        v.clear_tail();
        v
    }

    /// The `i`-th standard basis vector.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    /// Builds a vector from the low `len` bits of `value` (bit `i` is coordinate `i`).
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= WORD, "from_u64 supports at most 64 coordinates");
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = value;
            v.clear_tail();
        }
        v
    }

    /// Packs the vector into a `u64`, if it fits.
    pub fn to_u64(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => v.set(i, true),
                other => {
                    return Err(Error::InvalidInput(format!(
                        "bit {i} has value {other}, expected 0 or 1"
                    )))
                }
            }
        }
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        let mask = 1u64 << (i % WORD);
        if bit {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        Ok(())
    }

    pub fn xor(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        Ok(self.zip_words(other, |a, b| a ^ b))
    }

    pub fn and(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        Ok(self.zip_words(other, |a, b| a & b))
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &Self) -> Result<bool> {
        Ok(self.and(other)?.weight() % 2 == 1)
    }

    fn zip_words(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        Self {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for BitVector {
    type Err = Error;

    /// Parses strings like `"1011"`; character `i` is coordinate `i`.
    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidInput(format!(
                    "unexpected character {other:?}"
                ))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::from_bits(&bits)
    }
}

/// Dense matrix over GF(2), one packed [`BitVector`] per row.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    ncols: usize,
    rows: Vec<BitVector>,
    symmetric: bool,
}

impl BitMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self::from_rows_unchecked(vec![BitVector::zeros(ncols); nrows], ncols)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| i == j)
    }

    pub fn from_fn(nrows: usize, ncols: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let rows = (0..nrows)
            .map(|i| {
                let mut row = BitVector::zeros(ncols);
                for j in 0..ncols {
                    if f(i, j) {
                        row.set(j, true);
                    }
                }
                row
            })
            .collect();
        Self::from_rows_unchecked(rows, ncols)
    }

    pub fn from_rows(rows: Vec<BitVector>) -> Result<Self> {
        let ncols = rows.first().map_or(0, BitVector::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
            return Err(Error::LengthMismatch {
                left: ncols,
                right: bad.len(),
            });
        }
        Ok(Self::from_rows_unchecked(rows, ncols))
    }

    /// Rows given as `u64` bit masks, for matrices with at most 64 columns.
    pub fn from_row_masks(masks: &[u64], ncols: usize) -> Self {
        let rows = masks
            .iter()
            .map(|&m| BitVector::from_u64(m, ncols))
            .collect();
        Self::from_rows_unchecked(rows, ncols)
    }

    fn from_rows_unchecked(rows: Vec<BitVector>, ncols: usize) -> Self {
        let symmetric = rows.len() == ncols
            && (0..ncols).all(|i| (0..i).all(|j| rows[i].get(j) == rows[j].get(i)));
        Self {
            ncols,
            rows,
            symmetric,
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    /// Row masks, for matrices with at most 64 columns.
    pub fn row_masks(&self) -> Option<Vec<u64>> {
        self.rows.iter().map(BitVector::to_u64).collect()
    }

    /// The diagonal `d_P`.
    pub fn diagonal(&self) -> BitVector {
        let n = self.nrows().min(self.ncols);
        let mut d = BitVector::zeros(n);
        for i in 0..n {
            d.set(i, self.get(i, i));
        }
        d
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.nrows() != other.nrows() || self.ncols != other.ncols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.nrows(),
                self.ncols,
                other.nrows(),
                other.ncols
            )));
        }
        Ok(())
    }

    /// Entrywise sum over GF(2); equals `A - B` over GF(2).
    pub fn xor(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.xor(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_rows_unchecked(rows, self.ncols))
    }

    pub fn and(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.and(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_rows_unchecked(rows, self.ncols))
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BitVector::is_zero)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.nrows(), self.ncols)?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        write!(f, "]")
    }
}
