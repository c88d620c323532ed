//! Ring specifications and monomials for truncated power-series rings.
//!
//! A spec describes the quotient `(Z/p^N)[t_1..t_r, u] / (t_1^{n_1}, ..., t_r^{n_r}, u^m)`.
//! A truncation exponent of `0` for `u` means the ring has no `u` variable at all.
//! All ideals are monomial, so every element has a unique canonical coefficient map.

use crate::error::{AResult, AlgebraError};
use std::fmt;

/// Largest modulus we allow, so that products of two canonical residues fit in `u128`.
const MODULUS_LIMIT: u128 = 1 << 63;

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Description of a truncated power-series ring over `Z/p^N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RingSpec {
    p: u64,
    precision: u32,
    u_trunc: u32,
    t_truncs: Vec<u32>,
}

impl RingSpec {
    /// Build and validate a spec. `u_trunc == 0` means there is no `u` variable.
    pub fn new(p: u64, precision: u32, u_trunc: u32, t_truncs: Vec<u32>) -> AResult<Self> {
        if !is_prime(p) {
            return Err(AlgebraError::BadSpec(format!("p = {p} is not prime")));
        }
        if precision < 1 {
            return Err(AlgebraError::BadSpec("precision must be >= 1".into()));
        }
        if t_truncs.iter().any(|&n| n < 1) {
            return Err(AlgebraError::BadSpec(
                "t-truncation exponents must be >= 1".into(),
            ));
        }
        let spec = RingSpec {
            p,
            precision,
            u_trunc,
            t_truncs,
        };
        if spec.try_modulus().is_none() {
            return Err(AlgebraError::BadSpec(format!(
                "p^precision = {p}^{precision} exceeds the supported coefficient range"
            )));
        }
        Ok(spec)
    }

    /// The ring `Z/p^N` itself: no variables.
    pub fn zmod(p: u64, precision: u32) -> AResult<Self> {
        RingSpec::new(p, precision, 0, vec![])
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn u_trunc(&self) -> u32 {
        self.u_trunc
    }

    pub fn t_truncs(&self) -> &[u32] {
        &self.t_truncs
    }

    pub fn t_count(&self) -> usize {
        self.t_truncs.len()
    }

    /// Number of exponent slots: one for `u` plus one per `t` variable.
    pub fn slots(&self) -> usize {
        1 + self.t_truncs.len()
    }

    fn try_modulus(&self) -> Option<u128> {
        let mut m: u128 = 1;
        for _ in 0..self.precision {
            m = m.checked_mul(self.p as u128)?;
            if m > MODULUS_LIMIT {
                return None;
            }
        }
        Some(m)
    }

    /// `p^precision` as a `u128`.
    pub fn modulus(&self) -> u128 {
        self.try_modulus().expect("validated at construction")
    }

    /// `p^k` for `k <= precision`.
    pub fn p_pow(&self, k: u32) -> u128 {
        (self.p as u128).pow(k)
    }

    /// Reduce a signed integer to its least nonnegative residue.
    pub fn reduce_int(&self, c: i128) -> u128 {
        let m = self.modulus() as i128;
        (((c % m) + m) % m) as u128
    }

    /// Truncation bound for an exponent slot (slot 0 is `u`).
    fn bound(&self, slot: usize) -> u32 {
        if slot == 0 {
            // no u variable behaves like u = 0, i.e. only exponent 0 survives
            self.u_trunc.max(1)
        } else {
            self.t_truncs[slot - 1]
        }
    }

    /// Whether a monomial survives truncation in this ring.
    pub fn admits(&self, m: &Monomial) -> bool {
        if m.0.len() != self.slots() {
            return false;
        }
        if self.u_trunc == 0 && m.0[0] != 0 {
            return false;
        }
        m.0.iter().enumerate().all(|(i, &e)| e < self.bound(i))
    }

    /// Same ring structure at a different p-adic precision (headroom lifts).
    pub fn with_precision(&self, precision: u32) -> AResult<RingSpec> {
        RingSpec::new(self.p, precision, self.u_trunc, self.t_truncs.clone())
    }

    /// Whether `self` is a quotient of `src`: same variables, componentwise
    /// smaller (or equal) truncations and precision.
    pub fn refines(&self, src: &RingSpec) -> bool {
        self.p == src.p
            && self.precision <= src.precision
            && self.t_truncs.len() == src.t_truncs.len()
            && self.u_trunc <= src.u_trunc
            && self
                .t_truncs
                .iter()
                .zip(&src.t_truncs)
                .all(|(a, b)| a <= b)
    }

    /// Total number of monomials below the truncation bounds.
    pub fn monomial_count(&self) -> u128 {
        let mut n: u128 = self.u_trunc.max(1) as u128;
        for &b in &self.t_truncs {
            n *= b as u128;
        }
        n
    }

    /// All monomials of the ring in graded-lex order.
    pub fn monomials(&self) -> Vec<Monomial> {
        let slots = self.slots();
        let mut out = vec![Monomial::one(slots)];
        for slot in 0..slots {
            let bound = self.bound(slot);
            let mut next = Vec::new();
            for m in &out {
                for e in 0..bound {
                    let mut exps = m.0.clone();
                    exps[slot] = e;
                    next.push(Monomial(exps));
                }
            }
            out = next;
        }
        out.sort();
        out
    }

    /// Size of the ring, when small enough to enumerate.
    pub fn element_count_capped(&self, cap: u128) -> Option<u128> {
        let mut total: u128 = 1;
        for _ in 0..self.monomial_count() {
            total = total.checked_mul(self.modulus())?;
            if total > cap {
                return None;
            }
        }
        Some(total)
    }
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z/{}^{}", self.p, self.precision)?;
        if self.u_trunc > 0 || !self.t_truncs.is_empty() {
            write!(f, "[")?;
            let mut first = true;
            for (i, &n) in self.t_truncs.iter().enumerate() {
                if !first {
                    write!(f, ",")?;
                }
                write!(f, "t{}^{}", i + 1, n)?;
                first = false;
            }
            if self.u_trunc > 0 {
                if !first {
                    write!(f, ",")?;
                }
                write!(f, "u^{}", self.u_trunc)?;
            }
            write!(f, "]/trunc")?;
        }
        Ok(())
    }
}

/// Monomial exponent vector. Slot 0 is the `u` exponent, slots 1.. are `t_1..t_r`.
///
/// Ordered graded-lexicographically: by total degree first, then lexicographically
/// on the exponent vector. This ordering drives all canonical rendering.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(slots: usize) -> Self {
        Monomial(vec![0; slots])
    }

    pub fn u_power(slots: usize, e: u32) -> Self {
        let mut v = vec![0; slots];
        v[0] = e;
        Monomial(v)
    }

    pub fn t_power(slots: usize, i: usize, e: u32) -> Self {
        let mut v = vec![0; slots];
        v[i + 1] = e;
        Monomial(v)
    }

    pub fn u_exp(&self) -> u32 {
        self.0[0]
    }

    pub fn t_exp(&self, i: usize) -> u32 {
        self.0[i + 1]
    }

    pub fn degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Componentwise sum, or `None` on overflow.
    pub fn mul(&self, other: &Monomial) -> Option<Monomial> {
        if self.0.len() != other.0.len() {
            return None;
        }
        let mut v = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            v.push(a.checked_add(*b)?);
        }
        Some(Monomial(v))
    }

    /// Exponents multiplied by `k` (Frobenius-type powering of variables).
    pub fn pow_exponents(&self, k: u32) -> Option<Monomial> {
        let mut v = Vec::with_capacity(self.0.len());
        for &e in &self.0 {
            v.push(e.checked_mul(k)?);
        }
        Some(Monomial(v))
    }

    /// Render as a `*`-joined factor string, e.g. `u^1*t1^2`; empty for 1.
    pub fn render(&self) -> String {
        let mut parts = Vec::new();
        if self.0[0] > 0 {
            parts.push(format!("u^{}", self.0[0]));
        }
        for (i, &e) in self.0[1..].iter().enumerate() {
            if e > 0 {
                parts.push(format!("t{}^{}", i + 1, e));
            }
        }
        parts.join("*")
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(RingSpec::new(4, 1, 0, vec![]).is_err());
        assert!(RingSpec::new(3, 0, 0, vec![]).is_err());
        assert!(RingSpec::new(3, 2, 1, vec![0]).is_err());
        assert!(RingSpec::new(3, 3, 2, vec![2]).is_ok());
        // 2^64 overflows the supported range
        assert!(RingSpec::new(2, 64, 0, vec![]).is_err());
    }

    #[test]
    fn graded_lex_order() {
        let one = Monomial(vec![0, 0]);
        let u = Monomial(vec![1, 0]);
        let t = Monomial(vec![0, 1]);
        let ut = Monomial(vec![1, 1]);
        assert!(one < u);
        // same degree: lex on [u_exp, t1_exp], so t1 = [0,1] precedes u = [1,0]
        let mut v = vec![ut.clone(), u.clone(), t.clone(), one.clone()];
        v.sort();
        assert_eq!(v, vec![one, t, u, ut]);
    }

    #[test]
    fn monomial_enumeration() {
        let spec = RingSpec::new(3, 2, 2, vec![3]).unwrap();
        let ms = spec.monomials();
        assert_eq!(ms.len(), 6);
        assert!(ms.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(spec.monomial_count(), 6);
    }
}
