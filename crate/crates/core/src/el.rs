//! A single element type covering both kinds of frame rings: truncated
//! series rings and truncated Witt rings over them. Higher layers (matrices,
//! windows, the lifting solver) are written once against `RingHandle`.

use crate::error::{AResult, AlgebraError};
use crate::ring::{RingSpec, TruncatedSeries};
use crate::witt::WittVector;
use rand::Rng;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum El {
    Series(TruncatedSeries),
    Witt(WittVector),
}

impl El {
    pub fn as_series(&self) -> AResult<&TruncatedSeries> {
        match self {
            El::Series(s) => Ok(s),
            El::Witt(_) => Err(AlgebraError::SpecMismatch(
                "expected a series element, found a witt vector".into(),
            )),
        }
    }

    pub fn as_witt(&self) -> AResult<&WittVector> {
        match self {
            El::Witt(w) => Ok(w),
            El::Series(_) => Err(AlgebraError::SpecMismatch(
                "expected a witt vector, found a series element".into(),
            )),
        }
    }

    /// Tracked Witt length; `None` for series elements (exact at full precision).
    pub fn witt_len(&self) -> Option<usize> {
        match self {
            El::Series(_) => None,
            El::Witt(w) => Some(w.len()),
        }
    }
}

impl fmt::Display for El {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            El::Series(s) => write!(f, "{}", s.render()),
            El::Witt(w) => write!(f, "{}", w.render()),
        }
    }
}

/// Handle describing the ring an `El` lives in. For Witt rings, `budget` is
/// the construction length for constants and samples; individual elements
/// track their own lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RingHandle {
    Series(RingSpec),
    Witt { base: RingSpec, budget: usize },
}

impl RingHandle {
    pub fn p(&self) -> u64 {
        match self {
            RingHandle::Series(s) => s.p(),
            RingHandle::Witt { base, .. } => base.p(),
        }
    }

    pub fn series_spec(&self) -> AResult<&RingSpec> {
        match self {
            RingHandle::Series(s) => Ok(s),
            RingHandle::Witt { .. } => Err(AlgebraError::SpecMismatch(
                "expected a series ring".into(),
            )),
        }
    }

    pub fn witt_parts(&self) -> AResult<(&RingSpec, usize)> {
        match self {
            RingHandle::Witt { base, budget } => Ok((base, *budget)),
            RingHandle::Series(_) => Err(AlgebraError::SpecMismatch(
                "expected a witt ring".into(),
            )),
        }
    }

    pub fn contains(&self, x: &El) -> bool {
        match (self, x) {
            (RingHandle::Series(spec), El::Series(s)) => s.spec() == spec,
            (RingHandle::Witt { base, .. }, El::Witt(w)) => w.base() == base,
            _ => false,
        }
    }

    pub fn zero(&self) -> El {
        match self {
            RingHandle::Series(s) => El::Series(TruncatedSeries::zero(s)),
            RingHandle::Witt { base, budget } => El::Witt(WittVector::zero(base, *budget)),
        }
    }

    pub fn one(&self) -> AResult<El> {
        self.from_int(1)
    }

    pub fn from_int(&self, c: i128) -> AResult<El> {
        match self {
            RingHandle::Series(s) => Ok(El::Series(TruncatedSeries::from_int(s, c))),
            RingHandle::Witt { base, budget } => {
                Ok(El::Witt(WittVector::from_int(base, *budget, c)?))
            }
        }
    }

    pub fn add(&self, a: &El, b: &El) -> AResult<El> {
        match (a, b) {
            (El::Series(x), El::Series(y)) => Ok(El::Series(x.add(y)?)),
            (El::Witt(x), El::Witt(y)) => Ok(El::Witt(x.add(y)?)),
            _ => Err(AlgebraError::SpecMismatch("mixed element kinds".into())),
        }
    }

    pub fn sub(&self, a: &El, b: &El) -> AResult<El> {
        match (a, b) {
            (El::Series(x), El::Series(y)) => Ok(El::Series(x.sub(y)?)),
            (El::Witt(x), El::Witt(y)) => Ok(El::Witt(x.sub(y)?)),
            _ => Err(AlgebraError::SpecMismatch("mixed element kinds".into())),
        }
    }

    pub fn mul(&self, a: &El, b: &El) -> AResult<El> {
        match (a, b) {
            (El::Series(x), El::Series(y)) => Ok(El::Series(x.mul(y)?)),
            (El::Witt(x), El::Witt(y)) => Ok(El::Witt(x.mul(y)?)),
            _ => Err(AlgebraError::SpecMismatch("mixed element kinds".into())),
        }
    }

    pub fn neg(&self, a: &El) -> AResult<El> {
        match a {
            El::Series(x) => Ok(El::Series(x.neg())),
            El::Witt(x) => Ok(El::Witt(x.neg()?)),
        }
    }

    /// The ring's Frobenius-type endomorphism. Consumes one length unit on
    /// Witt elements.
    pub fn frobenius(&self, a: &El) -> AResult<El> {
        match a {
            El::Series(x) => Ok(El::Series(x.frobenius())),
            El::Witt(x) => Ok(El::Witt(x.frobenius()?)),
        }
    }

    pub fn invert(&self, a: &El) -> AResult<El> {
        match a {
            El::Series(x) => Ok(El::Series(x.invert()?)),
            El::Witt(x) => Ok(El::Witt(x.invert()?)),
        }
    }

    pub fn residue_fp(&self, a: &El) -> u64 {
        match a {
            El::Series(x) => x.residue_fp(),
            El::Witt(x) => x.residue_fp(),
        }
    }

    pub fn is_zero(&self, a: &El) -> bool {
        match a {
            El::Series(x) => x.is_zero(),
            El::Witt(x) => x.is_zero(),
        }
    }

    /// Equality at the common tracked length. For series elements the length
    /// is reported as `None` (full precision).
    pub fn eq_common(&self, a: &El, b: &El) -> AResult<(Option<usize>, bool)> {
        match (a, b) {
            (El::Series(x), El::Series(y)) => Ok((None, x == y)),
            (El::Witt(x), El::Witt(y)) => {
                let (n, eq) = x.eq_prefix(y);
                Ok((Some(n), eq))
            }
            _ => Err(AlgebraError::SpecMismatch("mixed element kinds".into())),
        }
    }

    pub fn render(&self, a: &El) -> String {
        a.to_string()
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> El {
        match self {
            RingHandle::Series(s) => El::Series(TruncatedSeries::sample(s, rng)),
            RingHandle::Witt { base, budget } => El::Witt(WittVector::sample(base, *budget, rng)),
        }
    }

    /// A random unit (unit residue), by resampling the constant residue.
    pub fn sample_unit<R: Rng>(&self, rng: &mut R) -> AResult<El> {
        for _ in 0..64 {
            let x = self.sample(rng);
            if self.residue_fp(&x) != 0 {
                return Ok(x);
            }
        }
        let one = self.one()?;
        let x = self.sample(rng);
        self.add(&x, &one)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dispatch_and_mismatch() {
        let rs = RingHandle::Series(RingSpec::zmod(3, 2).unwrap());
        let rw = RingHandle::Witt {
            base: RingSpec::zmod(3, 2).unwrap(),
            budget: 2,
        };
        let a = rs.from_int(4).unwrap();
        let b = rw.from_int(4).unwrap();
        assert!(rs.add(&a, &b).is_err());
        assert_eq!(rs.add(&a, &a).unwrap(), rs.from_int(8).unwrap());
        assert_eq!(rw.mul(&b, &rw.one().unwrap()).unwrap(), b);
    }
}
