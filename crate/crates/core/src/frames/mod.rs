//! Frames: a local ring `S` with ideal `I`, quotient `R = S/I`, a
//! Frobenius-type endomorphism `f`, and an f-linear divided Frobenius
//! `f1 : I -> S` with `1` in its image. The unique element `pi` with
//! `f = pi * f1` on `I` is stored at construction together with the witness
//! realizing `1 in f1(I)`.
//!
//! Ideal elements always carry the data needed to evaluate `f1` exactly:
//! a quotient witness for principal ideals (the distinguished element is a
//! zero divisor after p-adic truncation, so witnesses are never searched in
//! frame code), the first-coordinate-zero shape for Witt augmentation
//! ideals, and an explicit kernel part for extended ideals `I + a`.

pub mod build;
pub mod eisenstein;

pub use build::{
    hat_kernel,
    breuil_frame, breuil_residue_hom, c_frame, derive_deformation_frame, dieudonne_frame,
};
pub use eisenstein::Eisenstein;

use crate::el::{El, RingHandle};
use crate::error::{AlgebraError, FrameError, FResult};
use crate::hatwitt::{HatIdeal, LogVector};
use crate::report::{Check, Report};
use crate::ring::{divide_exact, SeriesHom, TruncatedSeries};
use crate::witt::WittVector;
use rand::Rng;

/// What kind of frame this is; carries the construction parameters that
/// later stages (morphisms, ladders) need back.
#[derive(Debug, Clone, PartialEq)]
pub enum FrameKind {
    /// `S = (Z/p^N)[[t,u]]/(u^{ae}, truncs)`, `I = E S`, `pi = f(E)`.
    Breuil { e: u32, level: u32, eis: Eisenstein },
    /// `S` a truncated Witt ring over `R`, `I` the augmentation ideal, `pi = p`.
    Dieudonne,
    /// `S` a truncated series ring, `I = p S`, `pi = p`.
    CFrame,
    /// Derived from another frame by extending the ideal by a kernel.
    Derived { base: Box<FrameKind> },
}

/// Presentation policy for the ideal.
#[derive(Debug, Clone, PartialEq)]
pub enum IdealShape {
    /// `I = gen * S`; elements carry a quotient witness, `f1(gen*w) = f(w)`.
    Principal { gen: El },
    /// Witt augmentation ideal: first coordinate zero, `f1 = v^{-1}`.
    WittFirstZero,
    /// Extended ideal `I + a` of a derived frame.
    Extended {
        base: Box<IdealShape>,
        kernel: KernelData,
    },
}

/// The kernel `a` of a derived frame, with its extension rule and the
/// certificate data the lifting solver budgets against.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelData {
    pub spec: KernelSpec,
    pub rule: KernelRule,
    /// Verified elementwise nilpotency bound of the extended `f1` on `a`.
    pub nu: usize,
    /// `f(a) = 0` verified on generators (trivial filtration).
    pub f_kills: bool,
    /// `a^2 = 0` verified.
    pub square_zero: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// `a = u^k S` inside a truncated series ring.
    MonomialUPower { min_exp: u32 },
    /// `a` the hat-Witt ideal of `b = p^k R` inside a truncated Witt ring.
    WittHat { ideal: HatIdeal },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelRule {
    /// `f1'' = 0` on the kernel.
    Zero,
    /// `f1''` is the left shift in logarithmic coordinates.
    HatShift,
}

/// An element of the kernel `a`, in the representation the rule evaluates.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelEl {
    Series(TruncatedSeries),
    Log(LogVector),
}

impl KernelEl {
    pub fn is_zero(&self) -> bool {
        match self {
            KernelEl::Series(s) => s.is_zero(),
            KernelEl::Log(l) => l.is_zero(),
        }
    }
}

/// A witnessed ideal element: enough data to evaluate `f1` exactly.
#[derive(Debug, Clone, PartialEq)]
pub enum IdealElem {
    Witnessed { value: El, witness: El },
    WittZero { value: WittVector },
    Extended { base: Box<IdealElem>, kernel: KernelEl },
}

/// How the quotient ring `R = S/I` is materialized, when it is.
#[derive(Debug, Clone, PartialEq)]
pub enum ResidueData {
    /// A substitution hom from the series ring onto the residue ring spec.
    SeriesQuotient(SeriesHom),
    /// Witt frames: `R` is the coordinate ring, the residue map is the
    /// first coordinate.
    WittFirstCoord,
    /// Not representable as a truncated series ring (e.g. ramified Breuil
    /// residue rings with e >= 2).
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub kind: FrameKind,
    pub ring: RingHandle,
    pub ideal: IdealShape,
    pub pi: El,
    pub one_witness: IdealElem,
    pub residue: ResidueData,
}

impl Frame {
    pub fn apply_f(&self, x: &El) -> FResult<El> {
        Ok(self.ring.frobenius(x)?)
    }

    pub fn ideal_value(&self, a: &IdealElem) -> FResult<El> {
        match a {
            IdealElem::Witnessed { value, .. } => Ok(value.clone()),
            IdealElem::WittZero { value } => Ok(El::Witt(value.clone())),
            IdealElem::Extended { base, kernel } => {
                let bv = self.base_frame_value(base)?;
                let kv = self.kernel_value(kernel)?;
                Ok(self.ring.add(&bv, &kv)?)
            }
        }
    }

    fn base_frame_value(&self, a: &IdealElem) -> FResult<El> {
        match a {
            IdealElem::Witnessed { value, .. } => Ok(value.clone()),
            IdealElem::WittZero { value } => Ok(El::Witt(value.clone())),
            IdealElem::Extended { .. } => Err(FrameError::Incompatible(
                "nested extended ideal elements are not supported".into(),
            )),
        }
    }

    pub fn kernel_value(&self, k: &KernelEl) -> FResult<El> {
        match k {
            KernelEl::Series(s) => Ok(El::Series(s.clone())),
            KernelEl::Log(l) => {
                let (_, budget) = self.ring.witt_parts()?;
                Ok(El::Witt(l.exp(budget).map_err(FrameError::Algebra)?))
            }
        }
    }

    /// Evaluate the divided Frobenius on a witnessed ideal element.
    pub fn f1(&self, a: &IdealElem) -> FResult<El> {
        match (&self.ideal, a) {
            (IdealShape::Principal { .. }, IdealElem::Witnessed { witness, .. }) => {
                Ok(self.ring.frobenius(witness)?)
            }
            (IdealShape::WittFirstZero, IdealElem::WittZero { value }) => {
                Ok(El::Witt(value.f1_shift()?))
            }
            (IdealShape::Extended { base, kernel }, IdealElem::Extended { base: be, kernel: ke }) => {
                let base_f1 = self.eval_base_f1(base, be)?;
                match (&kernel.rule, ke) {
                    (KernelRule::Zero, _) => Ok(base_f1),
                    (KernelRule::HatShift, KernelEl::Log(l)) => {
                        let shifted = l.shift();
                        let w = base_f1.as_witt()?;
                        let k = shifted.exp(w.len()).map_err(FrameError::Algebra)?;
                        Ok(El::Witt(w.add(&k)?))
                    }
                    (KernelRule::HatShift, KernelEl::Series(_)) => Err(FrameError::Incompatible(
                        "shift rule needs logarithmic kernel elements".into(),
                    )),
                }
            }
            _ => Err(FrameError::Incompatible(
                "ideal element does not match the frame's ideal shape".into(),
            )),
        }
    }

    fn eval_base_f1(&self, base: &IdealShape, a: &IdealElem) -> FResult<El> {
        match (base, a) {
            (IdealShape::Principal { .. }, IdealElem::Witnessed { witness, .. }) => {
                Ok(self.ring.frobenius(witness)?)
            }
            (IdealShape::WittFirstZero, IdealElem::WittZero { value }) => {
                Ok(El::Witt(value.f1_shift()?))
            }
            _ => Err(FrameError::Incompatible(
                "base ideal element does not match the base ideal shape".into(),
            )),
        }
    }

    /// Scale an ideal element by a ring element; witnesses scale along.
    pub fn ideal_scale(&self, s: &El, a: &IdealElem) -> FResult<IdealElem> {
        match a {
            IdealElem::Witnessed { value, witness } => Ok(IdealElem::Witnessed {
                value: self.ring.mul(s, value)?,
                witness: self.ring.mul(s, witness)?,
            }),
            IdealElem::WittZero { value } => {
                let prod = s.as_witt()?.mul(value)?;
                debug_assert!(prod.len() == 0 || prod.coord(0).is_zero());
                Ok(IdealElem::WittZero { value: prod })
            }
            IdealElem::Extended { base, kernel } => {
                let sb = self.ideal_scale_base(s, base)?;
                let sk = self.kernel_scale(s, kernel)?;
                Ok(IdealElem::Extended {
                    base: Box::new(sb),
                    kernel: sk,
                })
            }
        }
    }

    fn ideal_scale_base(&self, s: &El, a: &IdealElem) -> FResult<IdealElem> {
        match a {
            IdealElem::Witnessed { value, witness } => Ok(IdealElem::Witnessed {
                value: self.ring.mul(s, value)?,
                witness: self.ring.mul(s, witness)?,
            }),
            IdealElem::WittZero { value } => Ok(IdealElem::WittZero {
                value: s.as_witt()?.mul(value)?,
            }),
            IdealElem::Extended { .. } => Err(FrameError::Incompatible(
                "nested extended ideal elements are not supported".into(),
            )),
        }
    }

    pub fn kernel_scale(&self, s: &El, k: &KernelEl) -> FResult<KernelEl> {
        match k {
            KernelEl::Series(x) => Ok(KernelEl::Series(x.mul(s.as_series()?)?)),
            KernelEl::Log(l) => Ok(KernelEl::Log(l.act(s.as_witt()?)?)),
        }
    }

    pub fn ideal_add(&self, a: &IdealElem, b: &IdealElem) -> FResult<IdealElem> {
        match (a, b) {
            (
                IdealElem::Witnessed { value: v1, witness: w1 },
                IdealElem::Witnessed { value: v2, witness: w2 },
            ) => Ok(IdealElem::Witnessed {
                value: self.ring.add(v1, v2)?,
                witness: self.ring.add(w1, w2)?,
            }),
            (IdealElem::WittZero { value: v1 }, IdealElem::WittZero { value: v2 }) => {
                Ok(IdealElem::WittZero { value: v1.add(v2)? })
            }
            (
                IdealElem::Extended { base: b1, kernel: k1 },
                IdealElem::Extended { base: b2, kernel: k2 },
            ) => Ok(IdealElem::Extended {
                base: Box::new(self.ideal_add(b1, b2)?),
                kernel: self.kernel_add(k1, k2)?,
            }),
            _ => Err(FrameError::Incompatible(
                "ideal elements with different presentations".into(),
            )),
        }
    }

    pub fn kernel_add(&self, a: &KernelEl, b: &KernelEl) -> FResult<KernelEl> {
        match (a, b) {
            (KernelEl::Series(x), KernelEl::Series(y)) => Ok(KernelEl::Series(x.add(y)?)),
            (KernelEl::Log(x), KernelEl::Log(y)) => Ok(KernelEl::Log(x.add(y)?)),
            _ => Err(FrameError::Incompatible("mixed kernel elements".into())),
        }
    }

    /// The zero ideal element in this frame's presentation.
    pub fn ideal_zero(&self) -> FResult<IdealElem> {
        self.ideal_zero_for(&self.ideal)
    }

    fn ideal_zero_for(&self, shape: &IdealShape) -> FResult<IdealElem> {
        match shape {
            IdealShape::Principal { .. } => Ok(IdealElem::Witnessed {
                value: self.ring.zero(),
                witness: self.ring.zero(),
            }),
            IdealShape::WittFirstZero => {
                let (base, budget) = self.ring.witt_parts()?;
                Ok(IdealElem::WittZero {
                    value: WittVector::zero(base, budget),
                })
            }
            IdealShape::Extended { base, kernel } => Ok(IdealElem::Extended {
                base: Box::new(self.ideal_zero_for(base)?),
                kernel: self.kernel_zero(&kernel.spec)?,
            }),
        }
    }

    pub fn kernel_zero(&self, spec: &KernelSpec) -> FResult<KernelEl> {
        match spec {
            KernelSpec::MonomialUPower { .. } => Ok(KernelEl::Series(TruncatedSeries::zero(
                self.ring.series_spec()?,
            ))),
            KernelSpec::WittHat { ideal } => Ok(KernelEl::Log(LogVector::zero(ideal))),
        }
    }

    /// Embed a kernel element as an ideal element with zero base part.
    pub fn ideal_from_kernel(&self, k: KernelEl) -> FResult<IdealElem> {
        let IdealShape::Extended { base, .. } = &self.ideal else {
            return Err(FrameError::Incompatible(
                "frame has no kernel extension".into(),
            ));
        };
        Ok(IdealElem::Extended {
            base: Box::new(self.ideal_zero_for(base)?),
            kernel: k,
        })
    }

    /// Recover a witnessed presentation of an arbitrary ring element claimed
    /// to lie in the ideal. For principal ideals this runs the deterministic
    /// linear search; it exists for validation tooling, frame code proper
    /// always constructs elements with their witnesses.
    pub fn present(&self, x: &El) -> FResult<IdealElem> {
        self.present_for(&self.ideal, x)
    }

    fn present_for(&self, shape: &IdealShape, x: &El) -> FResult<IdealElem> {
        match shape {
            IdealShape::Principal { gen } => {
                let q = divide_exact(x.as_series()?, gen.as_series()?).map_err(|e| match e {
                    AlgebraError::NotDivisible => {
                        FrameError::Algebra(AlgebraError::NotInIdeal(format!(
                            "{} is not a multiple of the distinguished element",
                            x
                        )))
                    }
                    other => FrameError::Algebra(other),
                })?;
                Ok(IdealElem::Witnessed {
                    value: x.clone(),
                    witness: El::Series(q),
                })
            }
            IdealShape::WittFirstZero => {
                let w = x.as_witt()?;
                if w.len() > 0 && !w.coord(0).is_zero() {
                    return Err(FrameError::Algebra(AlgebraError::NotInIdeal(
                        "first Witt coordinate is nonzero".into(),
                    )));
                }
                Ok(IdealElem::WittZero { value: w.clone() })
            }
            IdealShape::Extended { base, kernel } => match &kernel.spec {
                KernelSpec::MonomialUPower { min_exp } => {
                    let spec = self.ring.series_spec()?;
                    let xs = x.as_series()?;
                    // solve the base membership modulo the kernel, then put
                    // the exact difference into the kernel part
                    let small = crate::ring::RingSpec::new(
                        spec.p(),
                        spec.precision(),
                        (*min_exp).min(spec.u_trunc()),
                        spec.t_truncs().to_vec(),
                    )
                    .map_err(FrameError::Algebra)?;
                    let IdealShape::Principal { gen } = base.as_ref() else {
                        return Err(FrameError::Incompatible(
                            "extended series ideal needs a principal base".into(),
                        ));
                    };
                    let gen_small = gen.as_series()?.reduce_to(&small).map_err(FrameError::Algebra)?;
                    let x_small = xs.reduce_to(&small).map_err(FrameError::Algebra)?;
                    let q_small = divide_exact(&x_small, &gen_small).map_err(|_| {
                        FrameError::Algebra(AlgebraError::NotInIdeal(
                            "not in the extended ideal modulo the kernel".into(),
                        ))
                    })?;
                    let q = q_small.lift_into(spec).map_err(FrameError::Algebra)?;
                    let base_value = gen.as_series()?.mul(&q).map_err(FrameError::Algebra)?;
                    let kernel_part = xs.sub(&base_value).map_err(FrameError::Algebra)?;
                    debug_assert!(kernel_part.terms().all(|(m, _)| m.u_exp() >= *min_exp));
                    Ok(IdealElem::Extended {
                        base: Box::new(IdealElem::Witnessed {
                            value: El::Series(base_value),
                            witness: El::Series(q),
                        }),
                        kernel: KernelEl::Series(kernel_part),
                    })
                }
                KernelSpec::WittHat { ideal } => {
                    let w = x.as_witt()?;
                    if w.len() == 0 {
                        return Ok(IdealElem::Extended {
                            base: Box::new(IdealElem::WittZero { value: w.clone() }),
                            kernel: KernelEl::Log(LogVector::zero(ideal)),
                        });
                    }
                    let c0 = w.coord(0).clone();
                    if !ideal.contains(&c0) {
                        return Err(FrameError::Algebra(AlgebraError::NotInIdeal(
                            "first coordinate is not in the kernel ideal".into(),
                        )));
                    }
                    let k = LogVector::new(ideal, vec![c0]).map_err(FrameError::Algebra)?;
                    let base_value = w.sub(&k.exp(w.len()).map_err(FrameError::Algebra)?)?;
                    Ok(IdealElem::Extended {
                        base: Box::new(IdealElem::WittZero { value: base_value }),
                        kernel: KernelEl::Log(k),
                    })
                }
            },
        }
    }

    /// Generators of the ideal as witnessed elements (a check-sample set;
    /// for hat-Witt kernels the first few shifted generators are included).
    pub fn ideal_generators(&self) -> FResult<Vec<IdealElem>> {
        match &self.ideal {
            IdealShape::Principal { gen } => Ok(vec![IdealElem::Witnessed {
                value: gen.clone(),
                witness: self.ring.one()?,
            }]),
            IdealShape::WittFirstZero => {
                let (base, budget) = self.ring.witt_parts()?;
                let one = WittVector::from_int(base, budget.saturating_sub(1), 1)?;
                Ok(vec![IdealElem::WittZero {
                    value: one.verschiebung(),
                }])
            }
            IdealShape::Extended { base, kernel } => {
                let mut gens = Vec::new();
                for g in self.base_generators(base)? {
                    gens.push(IdealElem::Extended {
                        base: Box::new(g),
                        kernel: self.kernel_zero(&kernel.spec)?,
                    });
                }
                for k in self.kernel_generators(&kernel.spec)? {
                    gens.push(self.ideal_from_kernel(k)?);
                }
                Ok(gens)
            }
        }
    }

    fn base_generators(&self, base: &IdealShape) -> FResult<Vec<IdealElem>> {
        match base {
            IdealShape::Principal { gen } => Ok(vec![IdealElem::Witnessed {
                value: gen.clone(),
                witness: self.ring.one()?,
            }]),
            IdealShape::WittFirstZero => {
                let (b, budget) = self.ring.witt_parts()?;
                let one = WittVector::from_int(b, budget.saturating_sub(1), 1)?;
                Ok(vec![IdealElem::WittZero {
                    value: one.verschiebung(),
                }])
            }
            IdealShape::Extended { .. } => Err(FrameError::Incompatible(
                "nested extended ideals are not supported".into(),
            )),
        }
    }

    pub fn kernel_generators(&self, spec: &KernelSpec) -> FResult<Vec<KernelEl>> {
        match spec {
            KernelSpec::MonomialUPower { min_exp } => {
                let s = self.ring.series_spec()?;
                let gen = TruncatedSeries::from_terms(
                    s,
                    &[(crate::ring::Monomial::u_power(s.slots(), *min_exp), 1)],
                )
                .map_err(FrameError::Algebra)?;
                Ok(vec![KernelEl::Series(gen)])
            }
            KernelSpec::WittHat { ideal } => {
                let (_, budget) = self.ring.witt_parts()?;
                let b = TruncatedSeries::from_int(
                    ideal.ring(),
                    ideal.ring().p_pow(ideal.p_power()) as i128,
                );
                let mut gens = Vec::new();
                for pos in 0..budget.min(3) {
                    let mut entries = vec![TruncatedSeries::zero(ideal.ring()); pos + 1];
                    entries[pos] = b.clone();
                    gens.push(KernelEl::Log(
                        LogVector::new(ideal, entries).map_err(FrameError::Algebra)?,
                    ));
                }
                Ok(gens)
            }
        }
    }

    pub fn sample_ideal<R: Rng>(&self, rng: &mut R) -> FResult<IdealElem> {
        match &self.ideal {
            IdealShape::Principal { gen } => {
                let w = self.ring.sample(rng);
                Ok(IdealElem::Witnessed {
                    value: self.ring.mul(gen, &w)?,
                    witness: w,
                })
            }
            IdealShape::WittFirstZero => {
                let (base, budget) = self.ring.witt_parts()?;
                let x = WittVector::sample(base, budget.saturating_sub(1), rng);
                Ok(IdealElem::WittZero {
                    value: x.verschiebung(),
                })
            }
            IdealShape::Extended { base, kernel } => {
                let b = self.sample_base_ideal(base, rng)?;
                let k = self.sample_kernel(&kernel.spec, rng)?;
                Ok(IdealElem::Extended {
                    base: Box::new(b),
                    kernel: k,
                })
            }
        }
    }

    fn sample_base_ideal<R: Rng>(&self, base: &IdealShape, rng: &mut R) -> FResult<IdealElem> {
        match base {
            IdealShape::Principal { gen } => {
                let w = self.ring.sample(rng);
                Ok(IdealElem::Witnessed {
                    value: self.ring.mul(gen, &w)?,
                    witness: w,
                })
            }
            IdealShape::WittFirstZero => {
                let (b, budget) = self.ring.witt_parts()?;
                let x = WittVector::sample(b, budget.saturating_sub(1), rng);
                Ok(IdealElem::WittZero {
                    value: x.verschiebung(),
                })
            }
            IdealShape::Extended { .. } => Err(FrameError::Incompatible(
                "nested extended ideals are not supported".into(),
            )),
        }
    }

    pub fn sample_kernel<R: Rng>(&self, spec: &KernelSpec, rng: &mut R) -> FResult<KernelEl> {
        match spec {
            KernelSpec::MonomialUPower { min_exp } => {
                let s = self.ring.series_spec()?;
                let gen = TruncatedSeries::from_terms(
                    s,
                    &[(crate::ring::Monomial::u_power(s.slots(), *min_exp), 1)],
                )
                .map_err(FrameError::Algebra)?;
                let x = TruncatedSeries::sample(s, rng);
                Ok(KernelEl::Series(gen.mul(&x).map_err(FrameError::Algebra)?))
            }
            KernelSpec::WittHat { ideal } => {
                let (_, budget) = self.ring.witt_parts()?;
                let support = rng.gen_range(0..=budget.saturating_sub(2).max(1));
                Ok(KernelEl::Log(LogVector::sample(ideal, support, rng)))
            }
        }
    }

    /// The kernel data of a derived frame.
    pub fn kernel_data(&self) -> Option<&KernelData> {
        match &self.ideal {
            IdealShape::Extended { kernel, .. } => Some(kernel),
            _ => None,
        }
    }

    /// Whether a ring element lies in the kernel of a derived frame.
    pub fn kernel_contains(&self, x: &El) -> FResult<bool> {
        let Some(kd) = self.kernel_data() else {
            return Err(FrameError::Incompatible("frame has no kernel".into()));
        };
        match (&kd.spec, x) {
            (KernelSpec::MonomialUPower { min_exp }, El::Series(s)) => {
                Ok(s.terms().all(|(m, _)| m.u_exp() >= *min_exp))
            }
            (KernelSpec::WittHat { ideal }, El::Witt(w)) => {
                Ok(w.coords().iter().all(|c| ideal.contains(c)))
            }
            _ => Err(FrameError::Incompatible("mixed kernel membership".into())),
        }
    }

    /// Verify the frame axioms on random samples; failures become report
    /// entries with the offending element rendered.
    pub fn check_axioms<R: Rng>(&self, samples: usize, rng: &mut R) -> FResult<Report> {
        let mut report = Report::new("frame-axioms");
        report.header_line(format!("pi = {}", self.pi));

        // 1 in f1(I) via the stored witness
        let f1w = self.f1(&self.one_witness)?;
        let one = self.ring.one()?;
        let (_, eq) = self.ring.eq_common(&f1w, &one)?;
        report.push(if eq {
            Check::pass("one-in-f1-image")
        } else {
            Check::fail("one-in-f1-image", format!("f1(witness) = {f1w}"))
        });

        // pi-relation f(a) = pi * f1(a) on generators and random elements
        let mut pi_ok = true;
        let mut pi_detail = String::new();
        let mut members = self.ideal_generators()?;
        for _ in 0..samples {
            members.push(self.sample_ideal(rng)?);
        }
        for a in &members {
            let lhs = self.apply_f(&self.ideal_value(a)?)?;
            let rhs = self.ring.mul(&self.pi, &self.f1(a)?)?;
            let (_, eq) = self.ring.eq_common(&lhs, &rhs)?;
            if !eq {
                pi_ok = false;
                pi_detail = format!(
                    "f(a) = {} but pi*f1(a) = {} for a = {}",
                    lhs,
                    rhs,
                    self.ideal_value(a)?
                );
                break;
            }
        }
        report.push(if pi_ok {
            Check::pass("pi-relation")
        } else {
            Check::fail("pi-relation", pi_detail)
        });

        // f1 is f-linear: f1(s*a) = f(s)*f1(a)
        let mut lin_ok = true;
        let mut lin_detail = String::new();
        for _ in 0..samples {
            let s = self.ring.sample(rng);
            let a = self.sample_ideal(rng)?;
            let lhs = self.f1(&self.ideal_scale(&s, &a)?)?;
            let rhs = self.ring.mul(&self.apply_f(&s)?, &self.f1(&a)?)?;
            let (_, eq) = self.ring.eq_common(&lhs, &rhs)?;
            if !eq {
                lin_ok = false;
                lin_detail = format!("f1(s*a) = {lhs} but f(s)*f1(a) = {rhs}");
                break;
            }
        }
        report.push(if lin_ok {
            Check::pass("f1-f-linearity")
        } else {
            Check::fail("f1-f-linearity", lin_detail)
        });

        // f is a ring endomorphism on samples
        let mut hom_ok = true;
        let mut hom_detail = String::new();
        for _ in 0..samples {
            let x = self.ring.sample(rng);
            let y = self.ring.sample(rng);
            let fxy = self.apply_f(&self.ring.mul(&x, &y)?)?;
            let fx_fy = self
                .ring
                .mul(&self.apply_f(&x)?, &self.apply_f(&y)?)?;
            let (_, eq_m) = self.ring.eq_common(&fxy, &fx_fy)?;
            let fsum = self.apply_f(&self.ring.add(&x, &y)?)?;
            let fs = self.ring.add(&self.apply_f(&x)?, &self.apply_f(&y)?)?;
            let (_, eq_a) = self.ring.eq_common(&fsum, &fs)?;
            if !(eq_m && eq_a) {
                hom_ok = false;
                hom_detail = format!("f fails to be a ring map on {x} and {y}");
                break;
            }
        }
        report.push(if hom_ok {
            Check::pass("f-ring-endomorphism")
        } else {
            Check::fail("f-ring-endomorphism", hom_detail)
        });

        // truncation stability under f
        match &self.ring {
            RingHandle::Series(spec) => {
                let mut stable = true;
                if spec.u_trunc() > 0 {
                    let u = TruncatedSeries::var_u(spec).map_err(FrameError::Algebra)?;
                    stable &= u.frobenius().pow(spec.u_trunc()).map_err(FrameError::Algebra)?.is_zero();
                }
                for i in 0..spec.t_count() {
                    let t = TruncatedSeries::var_t(spec, i).map_err(FrameError::Algebra)?;
                    stable &= t
                        .frobenius()
                        .pow(spec.t_truncs()[i])
                        .map_err(FrameError::Algebra)?
                        .is_zero();
                }
                report.push(if stable {
                    Check::pass("truncation-f-stability")
                } else {
                    Check::fail("truncation-f-stability", "f does not preserve the truncation ideal")
                });
            }
            RingHandle::Witt { base, budget } => {
                // f(v(x)) = p * x at the tracked length
                let mut ok = true;
                for _ in 0..samples {
                    let x = WittVector::sample(base, budget.saturating_sub(1), rng);
                    let fv = x.verschiebung().frobenius()?;
                    let p = WittVector::from_int(base, x.len(), base.p() as i128)?;
                    let (_, eq) = fv.eq_prefix(&p.mul(&x)?);
                    if !eq {
                        ok = false;
                        break;
                    }
                }
                report.push(if ok {
                    Check::pass("f-after-v-is-p")
                } else {
                    Check::fail("f-after-v-is-p", "f(v(x)) differs from p*x")
                });
            }
        }

        Ok(report)
    }
}
