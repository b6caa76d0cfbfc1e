//! GF(2^m) in polynomial basis for the odd degrees the frames use.

use std::fmt;
use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Degrees with a stored irreducible modulus.
pub const SUPPORTED_DEGREES: [u32; 3] = [3, 5, 7];

/// Irreducible (primitive) modulus for GF(2^m), bit `i` = coefficient of `x^i`.
pub fn modulus(m: u32) -> Result<u64> {
    match m {
        3 => Ok(0b1011),      // x^3 + x + 1
        5 => Ok(0b10_0101),   // x^5 + x^2 + 1
        7 => Ok(0b1000_0011), // x^7 + x + 1
        _ => Err(Error::UnsupportedDegree(m)),
    }
}

/// Modulus coefficients from degree 0 upwards, e.g. `[1, 1, 0, 1]` for x^3+x+1.
pub fn modulus_coefficients(m: u32) -> Result<Vec<u8>> {
    let p = modulus(m)?;
    Ok((0..=m).map(|i| ((p >> i) & 1) as u8).collect())
}

/// Element of GF(2^m). The degree doubles as the modulus id, since each
/// supported degree has exactly one stored modulus.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FieldElement {
    bits: u64,
    m: u32,
}

impl FieldElement {
    pub fn new(bits: u64, m: u32) -> Result<Self> {
        modulus(m)?;
        if bits >> m != 0 {
            return Err(Error::InvalidInput(format!("{bits:#b} has degree >= {m}")));
        }
        Ok(Self { bits, m })
    }

    pub fn zero(m: u32) -> Result<Self> {
        Self::new(0, m)
    }

    pub fn one(m: u32) -> Result<Self> {
        Self::new(1, m)
    }

    /// All 2^m elements in increasing coefficient order.
    pub fn all(m: u32) -> Result<impl Iterator<Item = FieldElement>> {
        modulus(m)?;
        Ok((0..1u64 << m).map(move |bits| Self { bits, m }))
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn degree(self) -> u32 {
        self.m
    }

    pub fn is_zero(self) -> bool {
        self.bits == 0
    }

    pub fn square(self) -> Self {
        self * self
    }

    /// `self^(2^j)`.
    pub fn frobenius(self, j: u32) -> Self {
        (0..j).fold(self, |acc, _| acc.square())
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = Self { bits: 1, m: self.m };
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base.square();
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via `x^(2^m - 2)`; `None` for zero.
    pub fn inverse(self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.pow((1u64 << self.m) - 2))
        }
    }

    /// Absolute trace `sum_{i<m} x^(2^i)`, returned as 0 or 1.
    pub fn trace(self) -> u8 {
        let mut acc = self;
        let mut y = self;
        for _ in 1..self.m {
            y = y.square();
            acc = acc + y;
        }
        debug_assert!(acc.bits <= 1, "trace left the prime field");
        acc.bits as u8
    }
}

fn clmul_reduce(mut a: u64, mut b: u64, m: u32) -> u64 {
    let p = modulus(m).expect("element constructed with a supported degree");
    let mut out = 0;
    while b != 0 {
        if b & 1 == 1 {
            out ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a >> m != 0 {
            a ^= p;
        }
    }
    out
}

impl Add for FieldElement {
    type Output = FieldElement;

    fn add(self, rhs: Self) -> Self {
        assert_eq!(self.m, rhs.m, "field elements from different fields");
        Self {
            bits: self.bits ^ rhs.bits,
            m: self.m,
        }
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;

    fn mul(self, rhs: Self) -> Self {
        assert_eq!(self.m, rhs.m, "field elements from different fields");
        Self {
            bits: clmul_reduce(self.bits, rhs.bits, self.m),
            m: self.m,
        }
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "GF(2^{})[{:0width$b}]",
            self.m,
            self.bits,
            width = self.m as usize
        )
    }
}

/// Trace of `x`.
pub fn trace(x: FieldElement) -> u8 {
    x.trace()
}
