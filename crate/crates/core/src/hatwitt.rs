//! Logarithmic coordinates on hat-Witt ideals of square-zero ideals.
//!
//! For a square-zero ideal `b = p^k R` the Witt vectors with entries in `b`
//! form an ideal on which all divided cross terms vanish: Witt addition is
//! coordinatewise, the module action of `x` multiplies entry `i` by the ghost
//! component `w_i(x)`, and the divided Frobenius is the plain left shift.
//! Elements are stored as exact finite-support sequences, so shifting is
//! lossless and genuinely nilpotent.

use crate::error::{AResult, AlgebraError};
use crate::ring::{RingSpec, TruncatedSeries};
use crate::witt::WittVector;
use rand::Rng;
use std::fmt;

/// The ideal `b = p^k R` inside a truncated series ring `R`, required to be
/// square-zero: `2k >= precision`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HatIdeal {
    ring: RingSpec,
    p_power: u32,
}

impl HatIdeal {
    pub fn new(ring: &RingSpec, p_power: u32) -> AResult<Self> {
        if 2 * p_power < ring.precision() {
            return Err(AlgebraError::IdealNotSquareZero);
        }
        if p_power > ring.precision() {
            return Err(AlgebraError::BadSpec(
                "ideal generator exponent exceeds the precision".into(),
            ));
        }
        Ok(HatIdeal {
            ring: ring.clone(),
            p_power,
        })
    }

    pub fn ring(&self) -> &RingSpec {
        &self.ring
    }

    pub fn p_power(&self) -> u32 {
        self.p_power
    }

    /// Whether `p * b = 0`, which makes the Frobenius vanish on the hat-Witt
    /// ideal and trivializes its filtration.
    pub fn p_kills(&self) -> bool {
        self.p_power + 1 >= self.ring.precision()
    }

    pub fn is_zero_ideal(&self) -> bool {
        self.p_power >= self.ring.precision()
    }

    pub fn contains(&self, x: &TruncatedSeries) -> bool {
        x.spec() == &self.ring && x.coeffs_divisible_by_p_pow(self.p_power)
    }

    /// A uniformly random ideal element: `p^k` times a random ring element.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> TruncatedSeries {
        TruncatedSeries::sample(&self.ring, rng).mul_int(self.ring.p_pow(self.p_power) as i128)
    }

    /// All ideal elements, when few enough.
    pub fn enumerate(&self, cap: usize) -> AResult<Vec<TruncatedSeries>> {
        let reps = self
            .ring
            .p_pow(self.ring.precision() - self.p_power);
        let monomials = self.ring.monomials();
        let mut count: u128 = 1;
        for _ in &monomials {
            count = count.saturating_mul(reps);
        }
        if count > cap as u128 {
            return Err(AlgebraError::Unsupported(format!(
                "ideal has {count} elements, cap is {cap}"
            )));
        }
        let gen = self.ring.p_pow(self.p_power);
        let mut out = vec![TruncatedSeries::zero(&self.ring)];
        for m in &monomials {
            let mut next = Vec::with_capacity(out.len() * reps as usize);
            for base in &out {
                for c in 0..reps {
                    let term = TruncatedSeries::from_terms(
                        &self.ring,
                        &[(m.clone(), (c * gen) as i128)],
                    )?;
                    next.push(base.add(&term)?);
                }
            }
            out = next;
        }
        out.sort_by_key(|a| a.render());
        out.dedup();
        Ok(out)
    }
}

/// A finite-support element of the hat-Witt ideal in logarithmic coordinates.
/// Trailing zero entries are trimmed, so equality is exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogVector {
    ideal: HatIdeal,
    entries: Vec<TruncatedSeries>,
}

impl LogVector {
    pub fn new(ideal: &HatIdeal, entries: Vec<TruncatedSeries>) -> AResult<Self> {
        for e in &entries {
            if !ideal.contains(e) {
                return Err(AlgebraError::NotInIdeal(format!(
                    "entry {} is not divisible by p^{}",
                    e.render(),
                    ideal.p_power
                )));
            }
        }
        let mut v = LogVector {
            ideal: ideal.clone(),
            entries,
        };
        v.trim();
        Ok(v)
    }

    pub fn zero(ideal: &HatIdeal) -> Self {
        LogVector {
            ideal: ideal.clone(),
            entries: vec![],
        }
    }

    fn trim(&mut self) {
        while self.entries.last().map(|e| e.is_zero()).unwrap_or(false) {
            self.entries.pop();
        }
    }

    pub fn ideal(&self) -> &HatIdeal {
        &self.ideal
    }

    pub fn entries(&self) -> &[TruncatedSeries] {
        &self.entries
    }

    pub fn support(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, i: usize) -> TruncatedSeries {
        self.entries
            .get(i)
            .cloned()
            .unwrap_or_else(|| TruncatedSeries::zero(&self.ideal.ring))
    }

    pub fn add(&self, other: &LogVector) -> AResult<LogVector> {
        if self.ideal != other.ideal {
            return Err(AlgebraError::SpecMismatch(
                "log vectors over different ideals".into(),
            ));
        }
        let n = self.support().max(other.support());
        let entries = (0..n)
            .map(|i| self.entry(i).add(&other.entry(i)))
            .collect::<AResult<Vec<_>>>()?;
        LogVector::new(&self.ideal, entries)
    }

    pub fn neg(&self) -> LogVector {
        LogVector {
            ideal: self.ideal.clone(),
            entries: self.entries.iter().map(|e| e.neg()).collect(),
        }
    }

    /// The divided Frobenius on the full hat-Witt ideal: the left shift.
    pub fn shift(&self) -> LogVector {
        let mut v = LogVector {
            ideal: self.ideal.clone(),
            entries: self.entries.iter().skip(1).cloned().collect(),
        };
        v.trim();
        v
    }

    /// `f1` on the overlap with the augmentation ideal: requires entry 0 to
    /// vanish, then shifts.
    pub fn f1_strict(&self) -> AResult<LogVector> {
        if !self.entry(0).is_zero() {
            return Err(AlgebraError::NotInIdeal(
                "log vector has a nonzero leading entry".into(),
            ));
        }
        Ok(self.shift())
    }

    /// Module action of a Witt vector: entry `i` is multiplied by `w_i(x)`.
    pub fn act(&self, x: &WittVector) -> AResult<LogVector> {
        if x.base() != &self.ideal.ring {
            return Err(AlgebraError::SpecMismatch(
                "acting vector lives over a different ring".into(),
            ));
        }
        if self.support() > x.len() {
            return Err(AlgebraError::PrecisionExhausted(format!(
                "action needs {} ghost components, witt length is {}",
                self.support(),
                x.len()
            )));
        }
        let ghosts = x.ghost()?;
        let entries = self
            .entries
            .iter()
            .zip(&ghosts)
            .map(|(e, g)| e.mul(g))
            .collect::<AResult<Vec<_>>>()?;
        LogVector::new(&self.ideal, entries)
    }

    /// Inclusion into the Witt ring at the given length.
    pub fn exp(&self, len: usize) -> AResult<WittVector> {
        if self.support() > len {
            return Err(AlgebraError::PrecisionExhausted(format!(
                "support {} exceeds target length {}",
                self.support(),
                len
            )));
        }
        let mut coords = self.entries.clone();
        coords.resize(len, TruncatedSeries::zero(&self.ideal.ring));
        WittVector::from_coords(&self.ideal.ring, coords)
    }

    /// Logarithm of a Witt vector supported in the ideal.
    pub fn log(ideal: &HatIdeal, x: &WittVector) -> AResult<LogVector> {
        LogVector::new(ideal, x.coords().to_vec())
    }

    /// Random element with the given support bound.
    pub fn sample<R: Rng>(ideal: &HatIdeal, support: usize, rng: &mut R) -> LogVector {
        let entries = (0..support).map(|_| ideal.sample(rng)).collect();
        LogVector::new(ideal, entries).expect("sampled entries lie in the ideal")
    }

    pub fn render(&self) -> String {
        let inner = self
            .entries
            .iter()
            .map(|e| e.render())
            .collect::<Vec<_>>()
            .join(", ");
        format!("[{inner}]")
    }
}

impl fmt::Display for LogVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (RingSpec, HatIdeal) {
        // R = Z/9, b = 3R
        let r = RingSpec::zmod(3, 2).unwrap();
        let ideal = HatIdeal::new(&r, 1).unwrap();
        (r, ideal)
    }

    #[test]
    fn square_zero_enforced() {
        let r = RingSpec::zmod(3, 3).unwrap();
        assert_eq!(HatIdeal::new(&r, 1), Err(AlgebraError::IdealNotSquareZero));
        assert!(HatIdeal::new(&r, 2).is_ok());
    }

    #[test]
    fn log_is_additive_against_witt_addition() {
        let (_, ideal) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..25 {
            let a = LogVector::sample(&ideal, 3, &mut rng);
            let b = LogVector::sample(&ideal, 3, &mut rng);
            let witt_sum = a.exp(4).unwrap().add(&b.exp(4).unwrap()).unwrap();
            assert_eq!(a.add(&b).unwrap().exp(4).unwrap(), witt_sum);
        }
    }

    #[test]
    fn action_matches_witt_multiplication() {
        let (r, ideal) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..25 {
            let b = LogVector::sample(&ideal, 3, &mut rng);
            let x = WittVector::sample(&r, 4, &mut rng);
            let via_action = b.act(&x).unwrap().exp(4).unwrap();
            let via_mul = x.mul(&b.exp(4).unwrap()).unwrap();
            assert_eq!(via_action, via_mul);
        }
        // action of 1 leaves entries unchanged
        let b = LogVector::sample(&ideal, 2, &mut rng);
        let one = WittVector::from_int(&r, 4, 1).unwrap();
        assert_eq!(b.act(&one).unwrap(), b);
    }

    #[test]
    fn shift_on_teichmuller_support() {
        let (_, ideal) = setup();
        // f1 of [b, 0, 0, ...] is zero
        let b = LogVector::new(&ideal, vec![TruncatedSeries::from_int(ideal.ring(), 3)]).unwrap();
        assert!(b.shift().is_zero());
        // f1 on [0, b1, b2] = [b1, b2]
        let v = LogVector::new(
            &ideal,
            vec![
                TruncatedSeries::zero(ideal.ring()),
                TruncatedSeries::from_int(ideal.ring(), 3),
                TruncatedSeries::from_int(ideal.ring(), 6),
            ],
        )
        .unwrap();
        let shifted = v.f1_strict().unwrap();
        assert_eq!(shifted.entry(0), TruncatedSeries::from_int(ideal.ring(), 3));
        assert_eq!(shifted.entry(1), TruncatedSeries::from_int(ideal.ring(), 6));
        assert!(b.f1_strict().is_err());
    }

    #[test]
    fn shift_matches_witt_f1_on_overlap() {
        let (_, ideal) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..25 {
            let mut b = LogVector::sample(&ideal, 3, &mut rng);
            // force membership in the augmentation ideal
            let mut entries = b.entries().to_vec();
            if !entries.is_empty() {
                entries[0] = TruncatedSeries::zero(ideal.ring());
            }
            b = LogVector::new(&ideal, entries).unwrap();
            let lhs = b.f1_strict().unwrap().exp(3).unwrap();
            let rhs = b.exp(4).unwrap().f1_shift().unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn enumeration_counts() {
        let (_, ideal) = setup();
        let all = ideal.enumerate(100).unwrap();
        assert_eq!(all.len(), 3); // {0, 3, 6} in Z/9
    }
}
