use crate::error::{Error, Result};
use crate::f2::{modulus, BitMatrix, FieldElement};

/// Largest family `build_dg_set` will enumerate eagerly.
pub const MAX_DG_SET_SIZE: u64 = 1 << 20;

/// Validated `(m, r)` pair for a Delsarte-Goethals family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DgParams {
    pub m: u32,
    pub r: u32,
}

impl DgParams {
    pub fn new(m: u32, r: u32) -> Result<Self> {
        modulus(m)?;
        if m.is_multiple_of(2) {
            return Err(Error::EvenDegree(m));
        }
        let max = (m - 1) / 2;
        if r > max {
            return Err(Error::OrderTooLarge { m, r, max });
        }
        Ok(Self { m, r })
    }

    /// `2^((r+1)m)`.
    pub fn set_size(self) -> u64 {
        1u64 << ((self.r + 1) * self.m)
    }

    pub fn num_rows(self) -> usize {
        1 << self.m
    }

    /// `2^((r+2)m)`.
    pub fn num_cols(self) -> u64 {
        1u64 << ((self.r + 2) * self.m)
    }

    /// Coefficient tuple `(c_0, ..., c_r)` for a set position, `c_0` most significant.
    pub fn coefficients_at(self, pos: u64) -> Vec<FieldElement> {
        let mask = (1u64 << self.m) - 1;
        (0..=self.r)
            .map(|j| {
                let shift = (self.r - j) * self.m;
                FieldElement::new((pos >> shift) & mask, self.m).expect("masked to m bits")
            })
            .collect()
    }

    pub fn position_of(self, coeffs: &[FieldElement]) -> Result<u64> {
        if coeffs.len() != self.r as usize + 1 || coeffs.iter().any(|c| c.degree() != self.m) {
            return Err(Error::FrameMismatch);
        }
        Ok(coeffs
            .iter()
            .fold(0u64, |acc, c| (acc << self.m) | c.bits()))
    }
}

/// Symmetric matrix of the bilinear form
/// `B_c(x, y) = tr(c_0 x y + sum_{j=1..r} c_j (x y^(2^j) + x^(2^j) y))`
/// on the polynomial basis `1, x, ..., x^(m-1)`.
pub fn dg_matrix(coeffs: &[FieldElement]) -> Result<BitMatrix> {
    let Some(first) = coeffs.first() else {
        return Err(Error::InvalidInput("empty coefficient tuple".into()));
    };
    let m = first.degree();
    if coeffs.iter().any(|c| c.degree() != m) {
        return Err(Error::FrameMismatch);
    }
    let basis: Vec<FieldElement> = (0..m)
        .map(|u| FieldElement::new(1 << u, m))
        .collect::<Result<_>>()?;
    let form = |x: FieldElement, y: FieldElement| {
        let mut acc = coeffs[0] * x * y;
        for (j, &c) in coeffs.iter().enumerate().skip(1) {
            let j = j as u32;
            acc = acc + c * (x * y.frobenius(j) + x.frobenius(j) * y);
        }
        acc.trace() == 1
    };
    Ok(BitMatrix::from_fn(m as usize, m as usize, |u, v| {
        form(basis[u], basis[v])
    }))
}

/// The family DG(m, r), indexed by coefficient tuples in lexicographic order.
#[derive(Clone, Debug)]
pub struct DgSet {
    params: DgParams,
    matrices: Vec<BitMatrix>,
}

impl DgSet {
    pub fn params(&self) -> DgParams {
        self.params
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn matrices(&self) -> &[BitMatrix] {
        &self.matrices
    }

    pub fn get(&self, coeffs: &[FieldElement]) -> Result<&BitMatrix> {
        let pos = self.params.position_of(coeffs)?;
        Ok(&self.matrices[pos as usize])
    }
}

pub fn build_dg_set(m: u32, r: u32) -> Result<DgSet> {
    let params = DgParams::new(m, r)?;
    let size = params.set_size();
    if size > MAX_DG_SET_SIZE {
        return Err(Error::ResourceLimit {
            columns: size,
            limit: MAX_DG_SET_SIZE,
        });
    }
    let matrices = (0..size)
        .map(|pos| dg_matrix(&params.coefficients_at(pos)))
        .collect::<Result<_>>()?;
    Ok(DgSet { params, matrices })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::f2::rank_f2;

    #[test]
    fn parameter_validation() {
        assert!(matches!(
            DgParams::new(9, 0),
            Err(Error::UnsupportedDegree(9))
        ));
        assert!(matches!(
            DgParams::new(3, 2),
            Err(Error::OrderTooLarge { max: 1, .. })
        ));
        assert!(DgParams::new(7, 3).is_ok());
    }

    #[test]
    fn kerdock_m3_has_eight_members_starting_at_zero() {
        let set = build_dg_set(3, 0).unwrap();
        assert_eq!(set.len(), 8);
        assert!(set.matrices()[0].is_zero());
        assert!(set.matrices().iter().all(BitMatrix::is_symmetric));
    }

    #[test]
    fn kerdock_m3_differences_have_full_rank() {
        let set = build_dg_set(3, 0).unwrap();
        let mut pairs = 0;
        for (i, a) in set.matrices().iter().enumerate() {
            for b in &set.matrices()[i + 1..] {
                assert_eq!(rank_f2(&a.xor(b).unwrap()), 3);
                pairs += 1;
            }
        }
        assert_eq!(pairs, 28);
    }

    #[test]
    fn form_is_linear_in_coefficients() {
        let p = DgParams::new(5, 1).unwrap();
        for (a, b) in [(3u64, 900u64), (1, 1023), (77, 512)] {
            let ma = dg_matrix(&p.coefficients_at(a)).unwrap();
            let mb = dg_matrix(&p.coefficients_at(b)).unwrap();
            let mab = dg_matrix(&p.coefficients_at(a ^ b)).unwrap();
            assert_eq!(ma.xor(&mb).unwrap(), mab);
        }
    }

    #[test]
    fn position_round_trip() {
        let p = DgParams::new(5, 2).unwrap();
        for pos in [0u64, 1, 31, 32, 12345, p.set_size() - 1] {
            assert_eq!(p.position_of(&p.coefficients_at(pos)).unwrap(), pos);
        }
    }

    #[test]
    fn oversized_family_is_refused() {
        assert!(matches!(
            build_dg_set(7, 3),
            Err(Error::ResourceLimit { .. })
        ));
    }
}
