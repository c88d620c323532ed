//! Canonical-form elements of truncated power-series rings and their exact arithmetic.

use super::spec::{Monomial, RingSpec};
use crate::error::{AResult, AlgebraError};
use rand::Rng;
use std::collections::BTreeMap;
use std::fmt;

/// An element of a truncated power-series ring, stored as a canonical
/// coefficient map: only monomials below the truncation bounds, only nonzero
/// reduced residues. Two elements are equal iff their maps are identical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    spec: RingSpec,
    terms: BTreeMap<Monomial, u128>,
}

impl TruncatedSeries {
    pub fn zero(spec: &RingSpec) -> Self {
        TruncatedSeries {
            spec: spec.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(spec: &RingSpec) -> Self {
        Self::from_int(spec, 1)
    }

    pub fn from_int(spec: &RingSpec, c: i128) -> Self {
        let mut s = Self::zero(spec);
        s.add_term(Monomial::one(spec.slots()), spec.reduce_int(c));
        s
    }

    /// Build from (monomial, signed coefficient) pairs; truncated monomials vanish.
    pub fn from_terms(spec: &RingSpec, terms: &[(Monomial, i128)]) -> AResult<Self> {
        let mut s = Self::zero(spec);
        for (m, c) in terms {
            if m.0.len() != spec.slots() {
                return Err(AlgebraError::SpecMismatch(
                    "monomial has wrong number of exponent slots".into(),
                ));
            }
            if spec.admits(m) {
                s.add_term(m.clone(), spec.reduce_int(*c));
            }
        }
        Ok(s)
    }

    /// The variable `u` (errors if the spec has no `u`).
    pub fn var_u(spec: &RingSpec) -> AResult<Self> {
        if spec.u_trunc() == 0 {
            return Err(AlgebraError::SpecMismatch("spec has no u variable".into()));
        }
        Self::from_terms(spec, &[(Monomial::u_power(spec.slots(), 1), 1)])
    }

    /// The variable `t_{i+1}`.
    pub fn var_t(spec: &RingSpec, i: usize) -> AResult<Self> {
        if i >= spec.t_count() {
            return Err(AlgebraError::SpecMismatch(format!(
                "spec has no variable t{}",
                i + 1
            )));
        }
        Self::from_terms(spec, &[(Monomial::t_power(spec.slots(), i, 1), 1)])
    }

    pub fn spec(&self) -> &RingSpec {
        &self.spec
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &u128)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> u128 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    pub fn constant_coeff(&self) -> u128 {
        self.coeff(&Monomial::one(self.spec.slots()))
    }

    /// Residue in `F_p` of the constant term.
    pub fn residue_fp(&self) -> u64 {
        (self.constant_coeff() % self.spec.p() as u128) as u64
    }

    fn add_term(&mut self, m: Monomial, c: u128) {
        let modulus = self.spec.modulus();
        let c = c % modulus;
        if c == 0 || !self.spec.admits(&m) {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Occupied(mut e) => {
                let v = (*e.get() + c) % modulus;
                if v == 0 {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
            Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    fn check_spec(&self, other: &TruncatedSeries) -> AResult<()> {
        if self.spec != other.spec {
            return Err(AlgebraError::SpecMismatch(format!(
                "{} vs {}",
                self.spec, other.spec
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &TruncatedSeries) -> AResult<TruncatedSeries> {
        self.check_spec(other)?;
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn neg(&self) -> TruncatedSeries {
        let modulus = self.spec.modulus();
        let mut out = Self::zero(&self.spec);
        for (m, &c) in &self.terms {
            out.terms.insert(m.clone(), modulus - c);
        }
        out
    }

    pub fn sub(&self, other: &TruncatedSeries) -> AResult<TruncatedSeries> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &TruncatedSeries) -> AResult<TruncatedSeries> {
        self.check_spec(other)?;
        let modulus = self.spec.modulus();
        let mut out = Self::zero(&self.spec);
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                if let Some(m) = ma.mul(mb) {
                    if self.spec.admits(&m) {
                        out.add_term(m, (ca * cb) % modulus);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_int(&self, c: i128) -> TruncatedSeries {
        let modulus = self.spec.modulus();
        let cc = self.spec.reduce_int(c);
        let mut out = Self::zero(&self.spec);
        for (m, &v) in &self.terms {
            out.add_term(m.clone(), (v * cc) % modulus);
        }
        out
    }

    pub fn pow(&self, e: u32) -> AResult<TruncatedSeries> {
        let mut acc = Self::one(&self.spec);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// The Frobenius lift: identity on coefficients, `u -> u^p`, `t_i -> t_i^p`.
    pub fn frobenius(&self) -> TruncatedSeries {
        let p = self.spec.p() as u32;
        let mut out = Self::zero(&self.spec);
        for (m, &c) in &self.terms {
            if let Some(mp) = m.pow_exponents(p) {
                out.add_term(mp, c);
            }
        }
        out
    }

    /// Multiplicative inverse by Newton iteration from the residue inverse.
    /// Requires the constant term to be a unit mod p.
    pub fn invert(&self) -> AResult<TruncatedSeries> {
        let p = self.spec.p();
        let r = self.residue_fp();
        if r == 0 {
            return Err(AlgebraError::NotAUnit);
        }
        let r_inv = mod_inverse(r as u128, p as u128)
            .expect("nonzero residue mod prime is invertible");
        // lift the residue inverse through Z/p^N by Newton: y <- y(2 - xy)
        let mut y = Self::from_int(&self.spec, r_inv as i128);
        let one = Self::one(&self.spec);
        let two = Self::from_int(&self.spec, 2);
        for _ in 0..64 {
            let xy = self.mul(&y)?;
            if xy == one {
                return Ok(y);
            }
            y = y.mul(&two.sub(&xy)?)?;
        }
        // the maximal ideal is nilpotent, so Newton always terminates well
        // within the iteration cap when the residue is a unit
        Err(AlgebraError::NotAUnit)
    }

    /// Exact division of every coefficient by `p^k`. Errors when some
    /// coefficient is not divisible. The result stays in the same spec; the
    /// caller is responsible for tracking the precision this consumes.
    pub fn divide_coeffs_by_p_pow(&self, k: u32) -> AResult<TruncatedSeries> {
        if k == 0 {
            return Ok(self.clone());
        }
        let d = self.spec.p_pow(k);
        let mut out = Self::zero(&self.spec);
        for (m, &c) in &self.terms {
            if c % d != 0 {
                return Err(AlgebraError::PrecisionExhausted(format!(
                    "coefficient {c} of {} not divisible by {}^{}",
                    m.render(),
                    self.spec.p(),
                    k
                )));
            }
            out.terms.insert(m.clone(), c / d);
        }
        Ok(out)
    }

    /// Whether every coefficient is divisible by `p^k`.
    pub fn coeffs_divisible_by_p_pow(&self, k: u32) -> bool {
        let d = self.spec.p_pow(k.min(self.spec.precision()));
        self.terms.values().all(|&c| c % d == 0)
    }

    /// Reduce into a quotient spec (smaller truncations and/or precision).
    pub fn reduce_to(&self, target: &RingSpec) -> AResult<TruncatedSeries> {
        if !target.refines(&self.spec) {
            return Err(AlgebraError::SpecMismatch(format!(
                "{} is not a quotient of {}",
                target, self.spec
            )));
        }
        let modulus = target.modulus();
        let mut out = Self::zero(target);
        for (m, &c) in &self.terms {
            if target.admits(m) {
                out.add_term(m.clone(), c % modulus);
            }
        }
        Ok(out)
    }

    /// Canonical lift into a bigger spec (coefficients reinterpreted verbatim).
    pub fn lift_into(&self, bigger: &RingSpec) -> AResult<TruncatedSeries> {
        if !self.spec.refines(bigger) {
            return Err(AlgebraError::SpecMismatch(format!(
                "{} is not a quotient of {}",
                self.spec, bigger
            )));
        }
        let mut out = Self::zero(bigger);
        for (m, &c) in &self.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    /// Uniformly random element: independent uniform coefficient per monomial.
    pub fn sample<R: Rng>(spec: &RingSpec, rng: &mut R) -> TruncatedSeries {
        let modulus = spec.modulus();
        let mut out = Self::zero(spec);
        for m in spec.monomials() {
            let c = rng.gen_range(0..modulus);
            out.add_term(m, c);
        }
        out
    }

    /// Canonical text form: terms in graded-lex order, least nonnegative
    /// residues, e.g. `18 + 1*u^1*t1^2`.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (m, c) in &self.terms {
            if m.is_one() {
                parts.push(format!("{c}"));
            } else {
                parts.push(format!("{}*{}", c, m.render()));
            }
        }
        parts.join(" + ")
    }

    /// Coefficient vector over the spec's monomial basis (graded-lex order).
    pub fn coeff_vector(&self, basis: &[Monomial]) -> Vec<u128> {
        basis.iter().map(|m| self.coeff(m)).collect()
    }

    pub fn from_coeff_vector(spec: &RingSpec, basis: &[Monomial], v: &[u128]) -> TruncatedSeries {
        let mut out = Self::zero(spec);
        for (m, &c) in basis.iter().zip(v) {
            out.add_term(m.clone(), c % spec.modulus());
        }
        out
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Inverse of `a` modulo `m` (m need not be prime; requires gcd(a, m) = 1).
pub fn mod_inverse(a: u128, m: u128) -> Option<u128> {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    let m = m as i128;
    Some((((old_s % m) + m) % m) as u128)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(p: u64, n: u32, u: u32) -> RingSpec {
        RingSpec::new(p, n, u, vec![]).unwrap()
    }

    #[test]
    fn mul_identity() {
        // (u+3)*1 = u+3
        let s = spec(3, 3, 4);
        let e = TruncatedSeries::var_u(&s)
            .unwrap()
            .add(&TruncatedSeries::from_int(&s, 3))
            .unwrap();
        assert_eq!(e.mul(&TruncatedSeries::one(&s)).unwrap(), e);
    }

    #[test]
    fn mul_with_truncation() {
        // p=3, N=3, u^2 = 0: (u+3)(u-3) = u^2 - 9 = -9 = 18 mod 27
        let s = spec(3, 3, 2);
        let u = TruncatedSeries::var_u(&s).unwrap();
        let a = u.add(&TruncatedSeries::from_int(&s, 3)).unwrap();
        let b = u.add(&TruncatedSeries::from_int(&s, -3)).unwrap();
        let prod = a.mul(&b).unwrap();
        assert_eq!(prod, TruncatedSeries::from_int(&s, 18));
        assert_eq!(prod.render(), "18");
    }

    #[test]
    fn additive_inverse() {
        let s = spec(3, 2, 3);
        let mut rng = rand::thread_rng();
        for _ in 0..20 {
            let x = TruncatedSeries::sample(&s, &mut rng);
            assert!(x.add(&x.neg()).unwrap().is_zero());
        }
    }

    #[test]
    fn frobenius_on_linear() {
        // f(u+3) = u^3+3 when u^4 = 0
        let s = spec(3, 3, 4);
        let e = TruncatedSeries::var_u(&s)
            .unwrap()
            .add(&TruncatedSeries::from_int(&s, 3))
            .unwrap();
        let fe = e.frobenius();
        let expected = TruncatedSeries::from_terms(
            &s,
            &[
                (Monomial::u_power(s.slots(), 3), 1),
                (Monomial::one(s.slots()), 3),
            ],
        )
        .unwrap();
        assert_eq!(fe, expected);
        assert_eq!(
            TruncatedSeries::one(&s).frobenius(),
            TruncatedSeries::one(&s)
        );
    }

    #[test]
    fn invert_unit_series() {
        // p=3, N=2, u^2=0: (1+u)^{-1} = 1 - u = 1 + 8u
        let s = spec(3, 2, 2);
        let e = TruncatedSeries::one(&s)
            .add(&TruncatedSeries::var_u(&s).unwrap())
            .unwrap();
        let inv = e.invert().unwrap();
        assert_eq!(e.mul(&inv).unwrap(), TruncatedSeries::one(&s));
        assert_eq!(inv.render(), "1 + 8*u^1");
        assert!(TruncatedSeries::var_u(&s).unwrap().invert().is_err());
        assert_eq!(
            TruncatedSeries::one(&s).invert().unwrap(),
            TruncatedSeries::one(&s)
        );
    }

    #[test]
    fn quotient_map_kills_u() {
        let s3 = spec(3, 3, 3);
        let s1 = spec(3, 3, 1);
        let e = TruncatedSeries::var_u(&s3)
            .unwrap()
            .add(&TruncatedSeries::from_int(&s3, 3))
            .unwrap();
        let q = e.reduce_to(&s1).unwrap();
        assert_eq!(q, TruncatedSeries::from_int(&s1, 3));
    }

    #[test]
    fn render_canonical() {
        let s = RingSpec::new(3, 3, 3, vec![3]).unwrap();
        let e = TruncatedSeries::from_terms(
            &s,
            &[
                (Monomial(vec![1, 2]), 1),
                (Monomial(vec![0, 0]), 18),
            ],
        )
        .unwrap();
        assert_eq!(e.render(), "18 + 1*u^1*t1^2");
    }
}
