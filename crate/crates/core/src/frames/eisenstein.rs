//! Distinguished polynomials `E = u^e + a_{e-1} u^{e-1} + ... + a_0` with
//! exact integer coefficients. The constraints (`p | a_i`, `a_0/p` a unit)
//! are validated on the integers, and derived data such as `f(E)/p` at level
//! one is computed by exact integer division, so no p-adic precision is lost.

use crate::error::{FrameError, FResult};
use crate::ring::{Monomial, RingSpec, TruncatedSeries};
use std::collections::BTreeMap;

/// Integer-coefficient polynomial in `u` and `t_1..t_r`, keyed by monomials
/// with the same slot layout as the ambient ring specs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Eisenstein {
    slots: usize,
    e: u32,
    terms: BTreeMap<Monomial, i128>,
}

impl Eisenstein {
    /// Validate the shape constraints for an odd prime `p`.
    pub fn new(p: u64, t_count: usize, terms: Vec<(Monomial, i128)>) -> FResult<Self> {
        let slots = 1 + t_count;
        let mut map: BTreeMap<Monomial, i128> = BTreeMap::new();
        for (m, c) in terms {
            if m.0.len() != slots {
                return Err(FrameError::BadEisenstein(
                    "monomial has wrong number of exponent slots".into(),
                ));
            }
            if c != 0 {
                *map.entry(m).or_insert(0) += c;
            }
        }
        map.retain(|_, c| *c != 0);
        let e = map.keys().map(|m| m.u_exp()).max().unwrap_or(0);
        if e == 0 {
            return Err(FrameError::BadEisenstein(
                "no u^e leading term present".into(),
            ));
        }
        // the leading term must be exactly u^e
        let leading: Vec<&Monomial> = map.keys().filter(|m| m.u_exp() == e).collect();
        if leading.len() != 1 || !leading[0].0[1..].iter().all(|&x| x == 0) {
            return Err(FrameError::BadEisenstein(
                "leading u^e coefficient must be the constant 1".into(),
            ));
        }
        if map[&Monomial::u_power(slots, e)] != 1 {
            return Err(FrameError::BadEisenstein(
                "leading u^e coefficient must be the constant 1".into(),
            ));
        }
        // all lower coefficients divisible by p
        let p_i = p as i128;
        for (m, &c) in &map {
            if m.u_exp() < e && c % p_i != 0 {
                return Err(FrameError::BadEisenstein(format!(
                    "coefficient {c} of {} is not divisible by p",
                    if m.is_one() { "1".to_string() } else { m.render() }
                )));
            }
        }
        // a_0/p must be a unit: its constant coefficient is not divisible by p
        let constant = map.get(&Monomial::one(slots)).copied().unwrap_or(0);
        if constant % p_i != 0 || (constant / p_i) % p_i == 0 {
            return Err(FrameError::BadEisenstein(
                "constant term must be p times a unit".into(),
            ));
        }
        Ok(Eisenstein {
            slots,
            e,
            terms: map,
        })
    }

    pub fn degree(&self) -> u32 {
        self.e
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &i128)> {
        self.terms.iter()
    }

    /// Reduce into a ring spec with matching variable layout.
    pub fn reduce_into(&self, spec: &RingSpec) -> FResult<TruncatedSeries> {
        if spec.slots() != self.slots {
            return Err(FrameError::Incompatible(
                "ring spec has a different variable layout".into(),
            ));
        }
        let terms: Vec<(Monomial, i128)> =
            self.terms.iter().map(|(m, &c)| (m.clone(), c)).collect();
        Ok(TruncatedSeries::from_terms(spec, &terms).map_err(FrameError::Algebra)?)
    }

    /// `-a_0` as an integer polynomial in the t variables only; this is the
    /// image of `u` in the residue ring when `e = 1`.
    pub fn neg_a0_terms(&self) -> Vec<(Monomial, i128)> {
        self.terms
            .iter()
            .filter(|(m, _)| m.u_exp() == 0)
            .map(|(m, &c)| (m.clone(), -c))
            .collect()
    }

    /// `E/p` in the level-one ring `S/u^e` by exact integer division: the
    /// leading `u^e` dies modulo `u^e` and all lower coefficients are
    /// divisible by p. The result is a unit (constant term `a_0/p`).
    pub fn level_one_e_over_p(&self, p: u64, spec_level_one: &RingSpec) -> FResult<TruncatedSeries> {
        if spec_level_one.u_trunc() != self.e {
            return Err(FrameError::Incompatible(
                "level-one spec must truncate at u^e".into(),
            ));
        }
        let p_i = p as i128;
        let terms: Vec<(Monomial, i128)> = self
            .terms
            .iter()
            .filter(|(m, _)| m.u_exp() < self.e)
            .map(|(m, &c)| (m.clone(), c / p_i))
            .collect();
        Ok(TruncatedSeries::from_terms(spec_level_one, &terms).map_err(FrameError::Algebra)?)
    }

    /// The unit `v = f(E)/p` in the level-one ring `S/u^e`, computed by exact
    /// integer division: `f(E) = u^{pe} + sum f(a_i) u^{pi}` and modulo `u^e`
    /// only terms with `pi < e` survive, all of them divisible by p.
    pub fn level_one_unit(&self, p: u64, spec_level_one: &RingSpec) -> FResult<TruncatedSeries> {
        if spec_level_one.u_trunc() != self.e {
            return Err(FrameError::Incompatible(
                "level-one spec must truncate at u^e".into(),
            ));
        }
        let p_i = p as i128;
        let mut terms: Vec<(Monomial, i128)> = Vec::new();
        for (m, &c) in &self.terms {
            if m.u_exp() == self.e {
                continue; // u^{pe} dies modulo u^e
            }
            if let Some(mp) = m.pow_exponents(p as u32) {
                if mp.u_exp() < self.e {
                    terms.push((mp, c / p_i));
                }
            }
        }
        Ok(TruncatedSeries::from_terms(spec_level_one, &terms).map_err(FrameError::Algebra)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u_plus_3() -> Vec<(Monomial, i128)> {
        vec![(Monomial::u_power(1, 1), 1), (Monomial::one(1), 3)]
    }

    #[test]
    fn validates_shape() {
        assert!(Eisenstein::new(3, 0, u_plus_3()).is_ok());
        // a_0 not divisible by p
        let bad = vec![(Monomial::u_power(1, 1), 1), (Monomial::one(1), 1)];
        assert!(matches!(
            Eisenstein::new(3, 0, bad),
            Err(FrameError::BadEisenstein(_))
        ));
        // a_0/p not a unit
        let bad = vec![(Monomial::u_power(1, 1), 1), (Monomial::one(1), 9)];
        assert!(matches!(
            Eisenstein::new(3, 0, bad),
            Err(FrameError::BadEisenstein(_))
        ));
        // non-monic leading term
        let bad = vec![(Monomial::u_power(1, 2), 2), (Monomial::one(1), 3)];
        assert!(matches!(
            Eisenstein::new(3, 0, bad),
            Err(FrameError::BadEisenstein(_))
        ));
    }

    #[test]
    fn level_one_unit_for_linear_e() {
        // E = u + 3: f(E) = u^3 + 3 = 3 mod u, so v = 1
        let e = Eisenstein::new(3, 0, u_plus_3()).unwrap();
        let s1 = RingSpec::new(3, 3, 1, vec![]).unwrap();
        let v = e.level_one_unit(3, &s1).unwrap();
        assert_eq!(v, TruncatedSeries::one(&s1));
    }

    #[test]
    fn level_one_unit_quadratic() {
        // E = u^2 + 3u + 3: f(E) = u^6 + 3u^3 + 3; mod u^2 only f(a_0) = 3
        // survives, so v = 1
        let terms = vec![
            (Monomial::u_power(1, 2), 1),
            (Monomial::u_power(1, 1), 3),
            (Monomial::one(1), 3),
        ];
        let e = Eisenstein::new(3, 0, terms).unwrap();
        let s1 = RingSpec::new(3, 3, 2, vec![]).unwrap();
        let v = e.level_one_unit(3, &s1).unwrap();
        assert_eq!(v, TruncatedSeries::one(&s1));
    }
}
