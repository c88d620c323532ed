//! Truncated p-typical Witt vectors over truncated series rings.
//!
//! Arithmetic goes through ghost components computed in a headroom lift of
//! the coordinate ring: coordinates are lifted canonically to precision
//! `N + len`, ghosts are combined there, and coordinates are recovered by
//! exact division by powers of p. All identities used are universal integer
//! polynomial identities, so they descend through the canonical lift and the
//! monomial truncation; the extra headroom guarantees that every recovered
//! coordinate is exact at the base precision.
//!
//! Length is a tracked budget: Frobenius consumes one unit, Verschiebung adds
//! one, and equality is asserted on the common prefix.

use crate::error::{AResult, AlgebraError};
use crate::ring::{RingSpec, TruncatedSeries};
use rand::Rng;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WittVector {
    base: RingSpec,
    coords: Vec<TruncatedSeries>,
}

impl WittVector {
    pub fn from_coords(base: &RingSpec, coords: Vec<TruncatedSeries>) -> AResult<Self> {
        for c in &coords {
            if c.spec() != base {
                return Err(AlgebraError::SpecMismatch(
                    "witt coordinate not in the base ring".into(),
                ));
            }
        }
        Ok(WittVector {
            base: base.clone(),
            coords,
        })
    }

    pub fn zero(base: &RingSpec, len: usize) -> Self {
        WittVector {
            base: base.clone(),
            coords: vec![TruncatedSeries::zero(base); len],
        }
    }

    /// The multiplicative lift `[x] = (x, 0, ..., 0)`.
    pub fn teichmuller(x: &TruncatedSeries, len: usize) -> Self {
        let base = x.spec().clone();
        let mut coords = vec![TruncatedSeries::zero(&base); len];
        if len > 0 {
            coords[0] = x.clone();
        }
        WittVector { base, coords }
    }

    pub fn base(&self) -> &RingSpec {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[TruncatedSeries] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &TruncatedSeries {
        &self.coords[i]
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn truncate(&self, len: usize) -> WittVector {
        WittVector {
            base: self.base.clone(),
            coords: self.coords[..len.min(self.coords.len())].to_vec(),
        }
    }

    fn headroom_spec(&self, len: usize) -> AResult<RingSpec> {
        self.base
            .with_precision(self.base.precision() + len as u32)
            .map_err(|_| {
                AlgebraError::PrecisionExhausted(format!(
                    "headroom precision {} + {} exceeds the coefficient range",
                    self.base.precision(),
                    len
                ))
            })
    }

    /// Ghost components `w_i = sum_j p^j x_j^{p^{i-j}}` in the given spec.
    fn ghosts_in(&self, spec: &RingSpec, upto: usize) -> AResult<Vec<TruncatedSeries>> {
        let p = self.base.p() as u32;
        let lifted: Vec<TruncatedSeries> = self
            .coords
            .iter()
            .map(|c| c.lift_into(spec))
            .collect::<AResult<Vec<_>>>()?;
        let mut ghosts = Vec::with_capacity(upto);
        // running p-power table of the coordinates: powers[j] = x_j^{p^{i-j}}
        let mut powers: Vec<TruncatedSeries> = lifted.clone();
        for i in 0..upto {
            if i > 0 {
                for item in powers.iter_mut().take(self.coords.len()) {
                    *item = item.pow(p)?;
                }
                // maintain powers[j] = x_j^{p^{i-j}}: after the blanket powering
                // the newest coordinate must be reset to its first power
                if i < self.coords.len() {
                    powers[i] = lifted[i].clone();
                }
            }
            let mut w = TruncatedSeries::zero(spec);
            for (j, pw) in powers.iter().enumerate().take((i + 1).min(self.coords.len())) {
                w = w.add(&pw.mul_int(spec.p_pow(j as u32) as i128))?;
            }
            ghosts.push(w);
        }
        Ok(ghosts)
    }

    /// Ghost components reduced into the base ring.
    pub fn ghost(&self) -> AResult<Vec<TruncatedSeries>> {
        let hs = self.headroom_spec(self.len())?;
        let ghosts = self.ghosts_in(&hs, self.len())?;
        ghosts.iter().map(|g| g.reduce_to(&self.base)).collect()
    }

    /// Recover coordinates from ghost components given in a headroom spec
    /// whose precision exceeds the base by at least `len`.
    fn solve_from_ghosts(
        base: &RingSpec,
        hs: &RingSpec,
        ghosts: &[TruncatedSeries],
        len: usize,
    ) -> AResult<WittVector> {
        assert!(hs.precision() >= base.precision() + len as u32);
        let coords_h = ghost_solve_raw(hs, base.p() as u32, &ghosts[..len])?;
        let coords = coords_h
            .iter()
            .map(|z| z.reduce_to(base))
            .collect::<AResult<Vec<_>>>()?;
        WittVector::from_coords(base, coords)
    }

    fn check_base(&self, other: &WittVector) -> AResult<()> {
        if self.base != other.base {
            return Err(AlgebraError::SpecMismatch(
                "witt vectors over different base rings".into(),
            ));
        }
        Ok(())
    }

    fn binop(
        &self,
        other: &WittVector,
        combine: impl Fn(&TruncatedSeries, &TruncatedSeries) -> AResult<TruncatedSeries>,
    ) -> AResult<WittVector> {
        self.check_base(other)?;
        let len = self.len().min(other.len());
        let hs = self.headroom_spec(len)?;
        let ga = self.ghosts_in(&hs, len)?;
        let gb = other.ghosts_in(&hs, len)?;
        let g: Vec<TruncatedSeries> = ga
            .iter()
            .zip(&gb)
            .map(|(a, b)| combine(a, b))
            .collect::<AResult<Vec<_>>>()?;
        Self::solve_from_ghosts(&self.base, &hs, &g, len)
    }

    pub fn add(&self, other: &WittVector) -> AResult<WittVector> {
        self.binop(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &WittVector) -> AResult<WittVector> {
        self.binop(other, |a, b| a.sub(b))
    }

    pub fn mul(&self, other: &WittVector) -> AResult<WittVector> {
        self.binop(other, |a, b| a.mul(b))
    }

    pub fn neg(&self) -> AResult<WittVector> {
        let len = self.len();
        let hs = self.headroom_spec(len)?;
        let g = self
            .ghosts_in(&hs, len)?
            .iter()
            .map(|a| a.neg())
            .collect::<Vec<_>>();
        Self::solve_from_ghosts(&self.base, &hs, &g, len)
    }

    /// Witt-vector Frobenius: the unique vector with ghosts `(w_1, ..., w_n)`.
    /// Consumes one length unit.
    pub fn frobenius(&self) -> AResult<WittVector> {
        if self.len() < 2 {
            return Err(AlgebraError::PrecisionExhausted(
                "frobenius needs length >= 2".into(),
            ));
        }
        let len = self.len() - 1;
        let hs = self.headroom_spec(self.len())?;
        let g = self.ghosts_in(&hs, self.len())?;
        Self::solve_from_ghosts(&self.base, &hs, &g[1..], len)
    }

    /// Verschiebung: `(0, x_0, ..., x_{n-1})`, adding one length unit.
    pub fn verschiebung(&self) -> WittVector {
        let mut coords = Vec::with_capacity(self.len() + 1);
        coords.push(TruncatedSeries::zero(&self.base));
        coords.extend(self.coords.iter().cloned());
        WittVector {
            base: self.base.clone(),
            coords,
        }
    }

    /// `v^{-1}` on the first-coordinate-zero ideal: drop the leading zero.
    pub fn f1_shift(&self) -> AResult<WittVector> {
        if self.coords.is_empty() || !self.coords[0].is_zero() {
            return Err(AlgebraError::NotInIdeal(
                "first coordinate is nonzero".into(),
            ));
        }
        Ok(WittVector {
            base: self.base.clone(),
            coords: self.coords[1..].to_vec(),
        })
    }

    /// The f-compatible diagonal section on coefficients: the unique vector
    /// with all ghost components equal to `c`, for an exact integer `c`.
    pub fn from_int(base: &RingSpec, len: usize, c: i128) -> AResult<WittVector> {
        let hs = base
            .with_precision(base.precision() + len as u32)
            .map_err(|_| AlgebraError::PrecisionExhausted("delta headroom".into()))?;
        let g = vec![TruncatedSeries::from_int(&hs, c); len];
        Self::solve_from_ghosts(base, &hs, &g, len)
    }

    /// Diagonal section applied to a residue known modulo `p^src_precision`.
    /// The result is independent of the representative only when
    /// `src_precision >= base precision + len - 1`.
    pub fn delta(base: &RingSpec, len: usize, c: u128, src_precision: u32) -> AResult<WittVector> {
        if len > 0 && (src_precision as i64) < base.precision() as i64 + len as i64 - 1 {
            return Err(AlgebraError::PrecisionExhausted(format!(
                "diagonal needs source precision >= {} + {} - 1, got {}",
                base.precision(),
                len,
                src_precision
            )));
        }
        Self::from_int(base, len, c as i128)
    }

    pub fn residue_fp(&self) -> u64 {
        if self.coords.is_empty() {
            0
        } else {
            self.coords[0].residue_fp()
        }
    }

    /// Multiplicative inverse by Newton iteration; requires unit residue.
    pub fn invert(&self) -> AResult<WittVector> {
        let r = self.residue_fp();
        if r == 0 {
            return Err(AlgebraError::NotAUnit);
        }
        let p = self.base.p();
        let r_inv =
            crate::ring::mod_inverse(r as u128, p as u128).expect("unit residue") as i128;
        let mut y = WittVector::from_int(&self.base, self.len(), r_inv)?;
        let one = WittVector::from_int(&self.base, self.len(), 1)?;
        let two = WittVector::from_int(&self.base, self.len(), 2)?;
        for _ in 0..64 {
            let xy = self.mul(&y)?;
            if xy == one {
                return Ok(y);
            }
            y = y.mul(&two.sub(&xy)?)?;
        }
        Err(AlgebraError::NotAUnit)
    }

    /// Compare on the common length prefix.
    pub fn eq_prefix(&self, other: &WittVector) -> (usize, bool) {
        let n = self.len().min(other.len());
        (n, self.coords[..n] == other.coords[..n])
    }

    /// Coordinatewise reduction of the base ring.
    pub fn reduce_base_to(&self, target: &RingSpec) -> AResult<WittVector> {
        let coords = self
            .coords
            .iter()
            .map(|c| c.reduce_to(target))
            .collect::<AResult<Vec<_>>>()?;
        WittVector::from_coords(target, coords)
    }

    /// Coordinatewise canonical lift of the base ring.
    pub fn lift_base_into(&self, bigger: &RingSpec) -> AResult<WittVector> {
        let coords = self
            .coords
            .iter()
            .map(|c| c.lift_into(bigger))
            .collect::<AResult<Vec<_>>>()?;
        WittVector::from_coords(bigger, coords)
    }

    pub fn sample<R: Rng>(base: &RingSpec, len: usize, rng: &mut R) -> WittVector {
        WittVector {
            base: base.clone(),
            coords: (0..len).map(|_| TruncatedSeries::sample(base, rng)).collect(),
        }
    }

    pub fn render(&self) -> String {
        let inner = self
            .coords
            .iter()
            .map(|c| c.render())
            .collect::<Vec<_>>()
            .join(", ");
        format!("({})@len={}", inner, self.len())
    }
}

impl fmt::Display for WittVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Coordinate recovery from ghost components, all within one headroom spec:
/// `z_i = (g_i - sum_{j<i} p^j z_j^{p^{i-j}}) / p^i` with exact coefficient
/// divisions. The caller reduces or projects the returned coordinates.
pub(crate) fn ghost_solve_raw(
    hs: &RingSpec,
    p: u32,
    ghosts: &[TruncatedSeries],
) -> AResult<Vec<TruncatedSeries>> {
    let mut coords: Vec<TruncatedSeries> = Vec::with_capacity(ghosts.len());
    for (i, g) in ghosts.iter().enumerate() {
        let mut partial = TruncatedSeries::zero(hs);
        for (j, z) in coords.iter().enumerate() {
            let mut pw = z.clone();
            for _ in 0..(i - j) {
                pw = pw.pow(p)?;
            }
            partial = partial.add(&pw.mul_int(hs.p_pow(j as u32) as i128))?;
        }
        let numer = g.sub(&partial)?;
        coords.push(numer.divide_coeffs_by_p_pow(i as u32)?);
    }
    Ok(coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn zmod(p: u64, n: u32) -> RingSpec {
        RingSpec::zmod(p, n).unwrap()
    }

    /// Independent ghost oracle over coefficient-only rings: plain integer
    /// arithmetic on canonical residues, reduced at the end.
    fn ghost_oracle(p: u128, modulus: u128, coords: &[u128]) -> Vec<u128> {
        let mut out = Vec::new();
        for i in 0..coords.len() {
            let mut w: u128 = 0;
            for (j, &x) in coords.iter().enumerate().take(i + 1) {
                let e = p.pow((i - j) as u32);
                let mut pw: u128 = 1;
                for _ in 0..e {
                    pw = (pw * x) % modulus;
                }
                w = (w + p.pow(j as u32) * pw) % modulus;
            }
            out.push(w);
        }
        out
    }

    #[test]
    fn ghost_of_teichmuller() {
        let s = zmod(3, 4);
        let x = TruncatedSeries::from_int(&s, 5);
        let t = WittVector::teichmuller(&x, 3);
        let g = t.ghost().unwrap();
        assert_eq!(g[0], x);
        assert_eq!(g[1], x.pow(3).unwrap());
        assert_eq!(g[2], x.pow(9).unwrap());
        assert!(WittVector::zero(&s, 3).ghost().unwrap().iter().all(|c| c.is_zero()));
    }

    #[test]
    fn ghost_frozen_example() {
        // over Z/9: ghost((2,7)) = (2, 2^3 + 3*7) = (2, 29 mod 9) = (2, 2)
        let s = zmod(3, 2);
        let w = WittVector::from_coords(
            &s,
            vec![
                TruncatedSeries::from_int(&s, 2),
                TruncatedSeries::from_int(&s, 7),
            ],
        )
        .unwrap();
        let g = w.ghost().unwrap();
        assert_eq!(g[0], TruncatedSeries::from_int(&s, 2));
        assert_eq!(g[1], TruncatedSeries::from_int(&s, 2));
        assert_eq!(ghost_oracle(3, 9, &[2, 7]), vec![2, 2]);
    }

    #[test]
    fn one_plus_one() {
        // over Z/9 at length 2: [1] + [1] = (2, 7)
        let s = zmod(3, 2);
        let one = WittVector::from_int(&s, 2, 1).unwrap();
        let two = one.add(&one).unwrap();
        assert_eq!(two.coord(0), &TruncatedSeries::from_int(&s, 2));
        assert_eq!(two.coord(1), &TruncatedSeries::from_int(&s, 7));
    }

    #[test]
    fn ghost_is_ring_hom() {
        for (p, n, u) in [(2u64, 4u32, 0u32), (3, 3, 3)] {
            let s = RingSpec::new(p, n, u, vec![]).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            for _ in 0..30 {
                let x = WittVector::sample(&s, 3, &mut rng);
                let y = WittVector::sample(&s, 3, &mut rng);
                let gs = |w: &WittVector| w.ghost().unwrap();
                let sum = x.add(&y).unwrap();
                let prod = x.mul(&y).unwrap();
                for i in 0..3 {
                    assert_eq!(gs(&sum)[i], gs(&x)[i].add(&gs(&y)[i]).unwrap());
                    assert_eq!(gs(&prod)[i], gs(&x)[i].mul(&gs(&y)[i]).unwrap());
                }
            }
        }
    }

    #[test]
    fn teichmuller_multiplicative() {
        let s = zmod(3, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let a = TruncatedSeries::sample(&s, &mut rng);
            let b = TruncatedSeries::sample(&s, &mut rng);
            let ta = WittVector::teichmuller(&a, 3);
            let tb = WittVector::teichmuller(&b, 3);
            assert_eq!(
                ta.mul(&tb).unwrap(),
                WittVector::teichmuller(&a.mul(&b).unwrap(), 3)
            );
        }
    }

    #[test]
    fn frobenius_verschiebung_identities() {
        let s = zmod(3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let x = WittVector::sample(&s, 3, &mut rng);
            // f(v(x)) = p*x at the common length
            let fv = x.verschiebung().frobenius().unwrap();
            let p = WittVector::from_int(&s, 3, 3).unwrap();
            let px = p.mul(&x).unwrap();
            let (n, eq) = fv.eq_prefix(&px);
            assert_eq!(n, 3);
            assert!(eq);
            // v is additive
            let y = WittVector::sample(&s, 3, &mut rng);
            assert_eq!(
                x.verschiebung().add(&y.verschiebung()).unwrap(),
                x.add(&y).unwrap().verschiebung()
            );
            // ghost identity: w_0(v(x)) = 0, w_i(v(x)) = p * w_{i-1}(x)
            let gv = x.verschiebung().ghost().unwrap();
            let gx = x.ghost().unwrap();
            assert!(gv[0].is_zero());
            for i in 1..gv.len() {
                assert_eq!(gv[i], gx[i - 1].mul_int(3));
            }
        }
    }

    #[test]
    fn f1_shift_basics() {
        let s = zmod(3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = WittVector::sample(&s, 3, &mut rng);
        assert_eq!(x.verschiebung().f1_shift().unwrap(), x);
        let bad = WittVector::from_int(&s, 2, 1).unwrap();
        assert!(matches!(
            bad.f1_shift(),
            Err(AlgebraError::NotInIdeal(_))
        ));
    }

    #[test]
    fn teichmuller_is_f_stable() {
        let s = zmod(3, 3);
        let x = TruncatedSeries::from_int(&s, 5);
        let t = WittVector::teichmuller(&x, 3);
        let ft = t.frobenius().unwrap();
        assert_eq!(ft, WittVector::teichmuller(&x.pow(3).unwrap(), 2));
        let one = WittVector::from_int(&s, 3, 1).unwrap();
        assert_eq!(one.frobenius().unwrap(), WittVector::from_int(&s, 2, 1).unwrap());
    }

    #[test]
    fn diagonal_section() {
        // p=3, length 2: ghosts (3,3) solve to (3, -8)
        let s = zmod(3, 2);
        let d = WittVector::from_int(&s, 2, 3).unwrap();
        assert_eq!(d.coord(0), &TruncatedSeries::from_int(&s, 3));
        assert_eq!(d.coord(1), &TruncatedSeries::from_int(&s, -8));
        // additive on exact integers
        let a = WittVector::from_int(&s, 2, 5).unwrap();
        let b = WittVector::from_int(&s, 2, 7).unwrap();
        assert_eq!(a.add(&b).unwrap(), WittVector::from_int(&s, 2, 12).unwrap());
        // residue-level diagonal demands headroom on the source precision
        assert!(WittVector::delta(&s, 2, 3, 2).is_err());
        assert!(WittVector::delta(&s, 2, 3, 3).is_ok());
    }

    #[test]
    fn ghost_solve_roundtrip() {
        let s = RingSpec::new(2, 4, 3, vec![]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let x = WittVector::sample(&s, 4, &mut rng);
            // ghost then solve in headroom reproduces the coordinates
            let hs = x.headroom_spec(4).unwrap();
            let g = x.ghosts_in(&hs, 4).unwrap();
            let back = WittVector::solve_from_ghosts(&s, &hs, &g, 4).unwrap();
            assert_eq!(back, x);
        }
    }

    #[test]
    fn inversion() {
        let s = zmod(3, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let mut x = WittVector::sample(&s, 3, &mut rng);
            if x.residue_fp() == 0 {
                x = x.add(&WittVector::from_int(&s, 3, 1).unwrap()).unwrap();
            }
            if x.residue_fp() == 0 {
                continue;
            }
            let y = x.invert().unwrap();
            assert_eq!(x.mul(&y).unwrap(), WittVector::from_int(&s, 3, 1).unwrap());
        }
        assert!(WittVector::zero(&s, 2).invert().is_err());
    }
}
