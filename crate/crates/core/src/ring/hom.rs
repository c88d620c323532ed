//! Substitution homomorphisms between truncated series rings.
//!
//! A hom is determined by images of the variables plus coefficientwise
//! reduction of `Z/p^N` into the (smaller or equal) target precision.
//! Well-definedness on the monomial quotient is validated at construction:
//! the image of each variable must be nilpotent of the source's truncation
//! order in the target ring.

use super::series::TruncatedSeries;
use super::spec::RingSpec;
use crate::error::{AResult, AlgebraError};

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesHom {
    src: RingSpec,
    dst: RingSpec,
    u_image: Option<TruncatedSeries>,
    t_images: Vec<TruncatedSeries>,
}

impl SeriesHom {
    pub fn new(
        src: RingSpec,
        dst: RingSpec,
        u_image: Option<TruncatedSeries>,
        t_images: Vec<TruncatedSeries>,
    ) -> AResult<Self> {
        if dst.p() != src.p() || dst.precision() > src.precision() {
            return Err(AlgebraError::SpecMismatch(
                "target must share p and have precision <= source".into(),
            ));
        }
        if (src.u_trunc() > 0) != u_image.is_some() {
            return Err(AlgebraError::SpecMismatch(
                "u image must be given exactly when the source has a u variable".into(),
            ));
        }
        if t_images.len() != src.t_count() {
            return Err(AlgebraError::SpecMismatch(
                "one image per t variable required".into(),
            ));
        }
        let hom = SeriesHom {
            src,
            dst,
            u_image,
            t_images,
        };
        hom.validate()?;
        Ok(hom)
    }

    /// The quotient map onto a refinement of the source spec (identity images).
    pub fn quotient(src: RingSpec, dst: RingSpec) -> AResult<Self> {
        if !dst.refines(&src) {
            return Err(AlgebraError::SpecMismatch(format!(
                "{dst} is not a quotient of {src}"
            )));
        }
        let u_image = if src.u_trunc() > 0 {
            Some(if dst.u_trunc() > 0 {
                TruncatedSeries::var_u(&dst)?
            } else {
                TruncatedSeries::zero(&dst)
            })
        } else {
            None
        };
        let t_images = (0..src.t_count())
            .map(|i| TruncatedSeries::var_t(&dst, i))
            .collect::<AResult<Vec<_>>>()?;
        Self::new(src, dst, u_image, t_images)
    }

    fn validate(&self) -> AResult<()> {
        if let Some(ui) = &self.u_image {
            if ui.spec() != &self.dst {
                return Err(AlgebraError::SpecMismatch("u image not in target".into()));
            }
            if !ui.pow(self.src.u_trunc())?.is_zero() {
                return Err(AlgebraError::SpecMismatch(
                    "u image does not kill the source truncation ideal".into(),
                ));
            }
        }
        for (i, ti) in self.t_images.iter().enumerate() {
            if ti.spec() != &self.dst {
                return Err(AlgebraError::SpecMismatch("t image not in target".into()));
            }
            if !ti.pow(self.src.t_truncs()[i])?.is_zero() {
                return Err(AlgebraError::SpecMismatch(format!(
                    "t{} image does not kill the source truncation ideal",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn src(&self) -> &RingSpec {
        &self.src
    }

    pub fn dst(&self) -> &RingSpec {
        &self.dst
    }

    /// Whether this hom is a plain quotient (identity variable images), so
    /// that elements of the target lift canonically into the source.
    pub fn is_quotient_shaped(&self) -> bool {
        self.dst.refines(&self.src)
            && self
                .u_image
                .as_ref()
                .map(|ui| {
                    if self.dst.u_trunc() > 0 {
                        ui == &TruncatedSeries::var_u(&self.dst).unwrap()
                    } else {
                        ui.is_zero()
                    }
                })
                .unwrap_or(true)
            && self
                .t_images
                .iter()
                .enumerate()
                .all(|(i, ti)| ti == &TruncatedSeries::var_t(&self.dst, i).unwrap())
    }

    pub fn apply(&self, x: &TruncatedSeries) -> AResult<TruncatedSeries> {
        if x.spec() != &self.src {
            return Err(AlgebraError::SpecMismatch(
                "element not in the source ring".into(),
            ));
        }
        // power tables for each variable image
        let u_powers = match &self.u_image {
            Some(ui) => Some(power_table(ui, self.src.u_trunc())?),
            None => None,
        };
        let mut t_powers = Vec::with_capacity(self.t_images.len());
        for (i, ti) in self.t_images.iter().enumerate() {
            t_powers.push(power_table(ti, self.src.t_truncs()[i])?);
        }
        let mut out = TruncatedSeries::zero(&self.dst);
        for (m, &c) in x.terms() {
            let mut term = TruncatedSeries::from_int(&self.dst, c as i128);
            if m.u_exp() > 0 {
                let table = u_powers.as_ref().expect("validated");
                term = term.mul(&table[m.u_exp() as usize])?;
            }
            for i in 0..self.t_images.len() {
                let e = m.t_exp(i);
                if e > 0 {
                    term = term.mul(&t_powers[i][e as usize])?;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Compose: `self` after `first` (both substitution homs).
    pub fn compose(&self, first: &SeriesHom) -> AResult<SeriesHom> {
        if first.dst != self.src {
            return Err(AlgebraError::SpecMismatch(
                "homs not composable: middle rings differ".into(),
            ));
        }
        let u_image = match &first.u_image {
            Some(ui) => Some(self.apply(ui)?),
            None => None,
        };
        let t_images = first
            .t_images
            .iter()
            .map(|ti| self.apply(ti))
            .collect::<AResult<Vec<_>>>()?;
        SeriesHom::new(first.src.clone(), self.dst.clone(), u_image, t_images)
    }

    /// Canonical section for quotient-shaped homs: lift a target element
    /// verbatim (same monomials, coefficients reinterpreted).
    pub fn canonical_lift(&self, y: &TruncatedSeries) -> AResult<TruncatedSeries> {
        if !self.is_quotient_shaped() {
            return Err(AlgebraError::Unsupported(
                "canonical lift only along quotient-shaped homs".into(),
            ));
        }
        if y.spec() != &self.dst {
            return Err(AlgebraError::SpecMismatch(
                "element not in the target ring".into(),
            ));
        }
        y.lift_into(&self.src)
    }
}

fn power_table(x: &TruncatedSeries, up_to: u32) -> AResult<Vec<TruncatedSeries>> {
    let mut table = Vec::with_capacity(up_to as usize + 1);
    table.push(TruncatedSeries::one(x.spec()));
    for k in 1..=up_to {
        let prev = table[(k - 1) as usize].clone();
        table.push(prev.mul(x)?);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quotient_functoriality() {
        use rand::SeedableRng;
        let s3 = RingSpec::new(3, 3, 3, vec![2]).unwrap();
        let s2 = RingSpec::new(3, 2, 2, vec![2]).unwrap();
        let s1 = RingSpec::new(3, 1, 1, vec![1]).unwrap();
        let q32 = SeriesHom::quotient(s3.clone(), s2.clone()).unwrap();
        let q21 = SeriesHom::quotient(s2.clone(), s1.clone()).unwrap();
        let q31 = SeriesHom::quotient(s3.clone(), s1.clone()).unwrap();
        let composed = q21.compose(&q32).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..25 {
            let x = TruncatedSeries::sample(&s3, &mut rng);
            assert_eq!(composed.apply(&x).unwrap(), q31.apply(&x).unwrap());
        }
    }

    #[test]
    fn quotient_commutes_with_ops() {
        use rand::SeedableRng;
        let src = RingSpec::new(3, 3, 3, vec![]).unwrap();
        let dst = RingSpec::new(3, 2, 2, vec![]).unwrap();
        let q = SeriesHom::quotient(src.clone(), dst).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        for _ in 0..25 {
            let x = TruncatedSeries::sample(&src, &mut rng);
            let y = TruncatedSeries::sample(&src, &mut rng);
            assert_eq!(
                q.apply(&x.add(&y).unwrap()).unwrap(),
                q.apply(&x).unwrap().add(&q.apply(&y).unwrap()).unwrap()
            );
            assert_eq!(
                q.apply(&x.mul(&y).unwrap()).unwrap(),
                q.apply(&x).unwrap().mul(&q.apply(&y).unwrap()).unwrap()
            );
            assert_eq!(
                q.apply(&x.frobenius()).unwrap(),
                q.apply(&x).unwrap().frobenius()
            );
        }
    }

    #[test]
    fn eval_u_substitution() {
        // u -> -3 in Z/9 sends u+3 to 0
        let src = RingSpec::new(3, 3, 2, vec![]).unwrap();
        let dst = RingSpec::zmod(3, 2).unwrap();
        let hom = SeriesHom::new(
            src.clone(),
            dst.clone(),
            Some(TruncatedSeries::from_int(&dst, -3)),
            vec![],
        )
        .unwrap();
        let e = TruncatedSeries::var_u(&src)
            .unwrap()
            .add(&TruncatedSeries::from_int(&src, 3))
            .unwrap();
        assert!(hom.apply(&e).unwrap().is_zero());
    }
}
