//! Constructors for the concrete frame families and for derived deformation
//! frames with extended ideals.

use super::eisenstein::Eisenstein;
use super::{
    Frame, FrameKind, IdealElem, IdealShape, KernelData, KernelEl, KernelRule, KernelSpec,
    ResidueData,
};
use crate::el::{El, RingHandle};
use crate::error::{AlgebraError, FrameError, FResult};
use crate::hatwitt::{HatIdeal, LogVector};
use crate::ring::{RingSpec, SeriesHom, TruncatedSeries};
use crate::witt::WittVector;

/// The frame `(S_a, E S_a, R_a, f, f1)` at level `a >= 1` with `pi = f(E)`.
///
/// `S_a` truncates `u` at `u^{ae}`; `precision` is the p-adic precision of
/// the coefficients. Requires `p >= 3`.
pub fn breuil_frame(
    p: u64,
    precision: u32,
    eis: &Eisenstein,
    level: u32,
    t_truncs: Vec<u32>,
) -> FResult<Frame> {
    if p < 3 {
        return Err(FrameError::BadPrime(p));
    }
    if level < 1 {
        return Err(FrameError::Incompatible("level must be >= 1".into()));
    }
    if eis.slots() != 1 + t_truncs.len() {
        return Err(FrameError::Incompatible(
            "distinguished polynomial and spec have different variable layouts".into(),
        ));
    }
    let e = eis.degree();
    let spec = RingSpec::new(p, precision, level * e, t_truncs).map_err(FrameError::Algebra)?;
    let e_series = eis.reduce_into(&spec)?;
    let pi = El::Series(e_series.frobenius());
    let ring = RingHandle::Series(spec.clone());
    let one = ring.one()?;
    let residue = if e == 1 {
        // R_a = S_a / E S_a is again a truncated series ring: precision a,
        // u eliminated via u -> -a_0.  Needs precision >= level to see R_a.
        if precision >= level {
            let r_spec = RingSpec::new(p, level, 0, spec.t_truncs().to_vec())
                .map_err(FrameError::Algebra)?;
            let u_image =
                TruncatedSeries::from_terms(&r_spec, &eis.neg_a0_terms()).map_err(FrameError::Algebra)?;
            let t_images = residue_t_images(&r_spec)?;
            let hom = SeriesHom::new(spec.clone(), r_spec, Some(u_image), t_images)
                .map_err(FrameError::Algebra)?;
            ResidueData::SeriesQuotient(hom)
        } else {
            ResidueData::None
        }
    } else {
        ResidueData::None
    };
    Ok(Frame {
        kind: FrameKind::Breuil {
            e,
            level,
            eis: eis.clone(),
        },
        ring,
        ideal: IdealShape::Principal {
            gen: El::Series(e_series.clone()),
        },
        pi,
        one_witness: IdealElem::Witnessed {
            value: El::Series(e_series),
            witness: one,
        },
        residue,
    })
}

fn residue_t_images(r_spec: &RingSpec) -> FResult<Vec<TruncatedSeries>> {
    (0..r_spec.t_count())
        .map(|i| TruncatedSeries::var_t(r_spec, i).map_err(FrameError::Algebra))
        .collect()
}

/// The residue homomorphism of a Breuil frame, when representable.
pub fn breuil_residue_hom(frame: &Frame) -> FResult<&SeriesHom> {
    match &frame.residue {
        ResidueData::SeriesQuotient(h) => Ok(h),
        _ => Err(FrameError::Incompatible(
            "frame has no series residue ring".into(),
        )),
    }
}

/// The Dieudonne frame over an Artinian coordinate ring: `S` the truncated
/// Witt ring at the given length budget, `I` the augmentation ideal,
/// `f1 = v^{-1}`, `pi = p`.
pub fn dieudonne_frame(r_spec: &RingSpec, budget: usize) -> FResult<Frame> {
    if budget < 2 {
        return Err(FrameError::Incompatible(
            "witt length budget must be >= 2".into(),
        ));
    }
    if r_spec.p() == 2 && r_spec.precision() > 1 {
        // the construction needs pR = 0 when p = 2
        return Err(FrameError::BadPrime(2));
    }
    let ring = RingHandle::Witt {
        base: r_spec.clone(),
        budget,
    };
    let pi = ring.from_int(r_spec.p() as i128)?;
    let one_witness = IdealElem::WittZero {
        value: WittVector::from_int(r_spec, budget - 1, 1)?.verschiebung(),
    };
    Ok(Frame {
        kind: FrameKind::Dieudonne,
        ring,
        ideal: IdealShape::WittFirstZero,
        pi,
        one_witness,
        residue: ResidueData::WittFirstCoord,
    })
}

/// The frame `(S, pS, S/pS, f, f1)` over a truncated series ring with
/// `f1(p x) = f(x)` and `pi = p`.
pub fn c_frame(spec: &RingSpec) -> FResult<Frame> {
    if spec.precision() < 2 {
        return Err(FrameError::Incompatible(
            "precision must be >= 2 so that p generates a nonzero ideal".into(),
        ));
    }
    let ring = RingHandle::Series(spec.clone());
    let p = ring.from_int(spec.p() as i128)?;
    let one = ring.one()?;
    let r_spec = spec.with_precision(1).map_err(FrameError::Algebra)?;
    let hom = SeriesHom::quotient(spec.clone(), r_spec).map_err(FrameError::Algebra)?;
    Ok(Frame {
        kind: FrameKind::CFrame,
        ring,
        ideal: IdealShape::Principal { gen: p.clone() },
        pi: p.clone(),
        one_witness: IdealElem::Witnessed {
            value: p,
            witness: one,
        },
        residue: ResidueData::SeriesQuotient(hom),
    })
}

/// Extend a frame's ideal by a kernel `a` with an f-linear rule for `f1` on
/// the kernel. The rule must agree with `f1` on the overlap `a ∩ I`; that is
/// checked on generators and the construction fails with `RuleInconsistent`
/// otherwise. The returned frame records the certificate data (whether
/// `f(a) = 0`, whether `a^2 = 0`, and the nilpotency bound `nu` of the rule).
pub fn derive_deformation_frame(
    base: &Frame,
    kernel_spec: KernelSpec,
    rule: KernelRule,
) -> FResult<Frame> {
    if matches!(base.ideal, IdealShape::Extended { .. }) {
        return Err(FrameError::Incompatible(
            "cannot extend an already extended ideal".into(),
        ));
    }
    let (nu, f_kills, square_zero) = match (&kernel_spec, rule, &base.ring) {
        (KernelSpec::MonomialUPower { min_exp }, KernelRule::Zero, RingHandle::Series(spec)) => {
            if *min_exp >= spec.u_trunc() {
                return Err(FrameError::Incompatible(
                    "kernel exponent lies beyond the truncation; the kernel is zero".into(),
                ));
            }
            // rule consistency: f1(gen * u^k * m) must vanish for all basis
            // monomials m, i.e. f(u^k * m) = 0 in S
            let u_k = TruncatedSeries::from_terms(
                spec,
                &[(crate::ring::Monomial::u_power(spec.slots(), *min_exp), 1)],
            )
            .map_err(FrameError::Algebra)?;
            for m in spec.monomials() {
                let x = u_k
                    .mul(&TruncatedSeries::from_terms(spec, &[(m.clone(), 1)]).map_err(FrameError::Algebra)?)
                    .map_err(FrameError::Algebra)?;
                if !x.frobenius().is_zero() {
                    return Err(FrameError::RuleInconsistent(format!(
                        "f1(E*{}) = f({}) is nonzero but the rule demands zero",
                        x.render(),
                        x.render()
                    )));
                }
            }
            let f_kills = u_k.frobenius().is_zero();
            let square_zero = u_k.mul(&u_k).map_err(FrameError::Algebra)?.is_zero();
            (1usize, f_kills, square_zero)
        }
        (KernelSpec::WittHat { ideal }, KernelRule::HatShift, RingHandle::Witt { base: rb, budget }) => {
            if ideal.ring() != rb {
                return Err(FrameError::Incompatible(
                    "kernel ideal lives over a different coordinate ring".into(),
                ));
            }
            // rule consistency on the overlap: log vectors with zero leading
            // entry are shifted by both the Witt f1 and the rule
            let b = TruncatedSeries::from_int(rb, rb.p_pow(ideal.p_power()) as i128);
            for pos in 1..(*budget).min(3) {
                let mut entries = vec![TruncatedSeries::zero(rb); pos + 1];
                entries[pos] = b.clone();
                let lv = LogVector::new(ideal, entries).map_err(FrameError::Algebra)?;
                let via_rule = lv.shift();
                let via_witt = lv
                    .exp(*budget)
                    .map_err(FrameError::Algebra)?
                    .f1_shift()
                    .map_err(FrameError::Algebra)?;
                let rule_exp = via_rule
                    .exp(via_witt.len())
                    .map_err(FrameError::Algebra)?;
                if rule_exp != via_witt {
                    return Err(FrameError::RuleInconsistent(
                        "shift rule disagrees with v^{-1} on the overlap".into(),
                    ));
                }
            }
            // f(a) = 0 needs p*b = 0
            let f_kills = ideal.p_kills();
            (*budget, f_kills, true)
        }
        _ => {
            return Err(FrameError::Incompatible(
                "kernel kind does not fit the frame's ring".into(),
            ))
        }
    };
    let kernel = KernelData {
        spec: kernel_spec,
        rule,
        nu,
        f_kills,
        square_zero,
    };
    let one_witness = IdealElem::Extended {
        base: Box::new(base.one_witness.clone()),
        kernel: match &kernel.spec {
            KernelSpec::MonomialUPower { .. } => {
                KernelEl::Series(TruncatedSeries::zero(base.ring.series_spec()?))
            }
            KernelSpec::WittHat { ideal } => KernelEl::Log(LogVector::zero(ideal)),
        },
    };
    Ok(Frame {
        kind: FrameKind::Derived {
            base: Box::new(base.kind.clone()),
        },
        ring: base.ring.clone(),
        ideal: IdealShape::Extended {
            base: Box::new(base.ideal.clone()),
            kernel,
        },
        pi: base.pi.clone(),
        one_witness,
        residue: ResidueData::None,
    })
}

/// The hat-Witt kernel ideal for the level step `R -> R/p^k R`.
pub fn hat_kernel(r_spec: &RingSpec, p_power: u32) -> FResult<KernelSpec> {
    Ok(KernelSpec::WittHat {
        ideal: HatIdeal::new(r_spec, p_power).map_err(FrameError::Algebra)?,
    })
}

impl Frame {
    /// Residue of a ring element in `F_p` (the residue field of `S`).
    pub fn residue_fp(&self, x: &El) -> u64 {
        self.ring.residue_fp(x)
    }

    /// The distinguished generator of a principal ideal frame.
    pub fn principal_gen(&self) -> FResult<&El> {
        match &self.ideal {
            IdealShape::Principal { gen } => Ok(gen),
            IdealShape::Extended { base, .. } => match base.as_ref() {
                IdealShape::Principal { gen } => Ok(gen),
                _ => Err(FrameError::Incompatible("no principal generator".into())),
            },
            _ => Err(FrameError::Incompatible("no principal generator".into())),
        }
    }

    /// Apply the residue map `S -> R` to a ring element, when representable.
    pub fn residue_map(&self, x: &El) -> FResult<El> {
        match &self.residue {
            ResidueData::SeriesQuotient(hom) => Ok(El::Series(
                hom.apply(x.as_series()?).map_err(FrameError::Algebra)?,
            )),
            ResidueData::WittFirstCoord => {
                let w = x.as_witt()?;
                if w.len() == 0 {
                    return Err(FrameError::Algebra(AlgebraError::PrecisionExhausted(
                        "no coordinates left".into(),
                    )));
                }
                Ok(El::Series(w.coord(0).clone()))
            }
            ResidueData::None => Err(FrameError::Incompatible(
                "residue ring is not materialized for this frame".into(),
            )),
        }
    }
}
