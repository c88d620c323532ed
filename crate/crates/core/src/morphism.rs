//! u-morphisms of frames: a ring homomorphism `α : S -> S'` carrying the
//! ideal into the ideal, commuting with `f`, and twisting `f1` by a unit:
//! `f1' α = u · α f1`.
//!
//! The interesting ring map is the f-compatible lift `S -> W(R)` of the
//! residue projection: its value on `x` is the Witt vector whose ghost
//! components are `x, f(x), f^2(x), ...`, solved in a headroom lift and then
//! projected coordinatewise to `R`. Its unit is recovered exactly as
//! `f1'(κ(gen))`, never by dividing the Witt vector by p.

use crate::el::{El, RingHandle};
use crate::error::{AlgebraError, FrameError, FResult};
use crate::frames::{Frame, FrameKind, IdealElem, IdealShape, KernelEl, KernelSpec};
use crate::hatwitt::LogVector;
use crate::matrix::Mat;
use crate::report::{Check, Report};
use crate::ring::{RingSpec, SeriesHom, TruncatedSeries};
use crate::witt::{ghost_solve_raw, WittVector};
use rand::Rng;

/// The f-compatible section `S -> W(R)` over a series ring with residue
/// projection `residue : S -> R`.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaMap {
    src: RingSpec,
    residue: SeriesHom,
    budget: usize,
}

impl KappaMap {
    pub fn new(src: RingSpec, residue: SeriesHom, budget: usize) -> FResult<Self> {
        if residue.src() != &src {
            return Err(FrameError::Incompatible(
                "residue hom does not start at the source ring".into(),
            ));
        }
        // coordinate i is exact modulo p^{N - i}; projecting to the residue
        // precision needs N >= r_precision + budget - 1
        if (src.precision() as usize) + 1 < residue.dst().precision() as usize + budget {
            return Err(FrameError::Algebra(AlgebraError::PrecisionExhausted(
                format!(
                    "kappa needs source precision >= {} + {} - 1, got {}",
                    residue.dst().precision(),
                    budget,
                    src.precision()
                ),
            )));
        }
        Ok(KappaMap {
            src,
            residue,
            budget,
        })
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn residue_hom(&self) -> &SeriesHom {
        &self.residue
    }

    pub fn apply(&self, x: &TruncatedSeries) -> FResult<WittVector> {
        if x.spec() != &self.src {
            return Err(FrameError::Algebra(AlgebraError::SpecMismatch(
                "element not in the kappa source ring".into(),
            )));
        }
        let hs = self
            .src
            .with_precision(self.src.precision() + self.budget as u32)
            .map_err(|_| {
                FrameError::Algebra(AlgebraError::PrecisionExhausted(
                    "kappa headroom exceeds the coefficient range".into(),
                ))
            })?;
        let lifted = x.lift_into(&hs).map_err(FrameError::Algebra)?;
        // ghosts of the section are the Frobenius iterates
        let mut ghosts = Vec::with_capacity(self.budget);
        let mut cur = lifted;
        for _ in 0..self.budget {
            ghosts.push(cur.clone());
            cur = cur.frobenius();
        }
        let coords_h =
            ghost_solve_raw(&hs, self.src.p() as u32, &ghosts).map_err(FrameError::Algebra)?;
        let coords = coords_h
            .iter()
            .map(|z| {
                let in_src = z.reduce_to(&self.src)?;
                self.residue.apply(&in_src)
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(FrameError::Algebra)?;
        Ok(WittVector::from_coords(self.residue.dst(), coords).map_err(FrameError::Algebra)?)
    }
}

/// The underlying ring homomorphism of a frame morphism.
#[derive(Debug, Clone, PartialEq)]
pub enum RingMap {
    /// Identity on a series ring (the ideal-extension arrow).
    SeriesIdentity,
    /// Identity on a Witt ring (the ideal-extension arrow).
    WittIdentity,
    /// Substitution homomorphism between series rings.
    Series(SeriesHom),
    /// Coordinatewise reduction between Witt rings over quotient base rings.
    WittQuotient { target_base: RingSpec },
    /// The f-compatible section into a Witt ring.
    Kappa(KappaMap),
}

#[derive(Debug, Clone)]
pub struct FrameMorphism {
    pub source: Frame,
    pub target: Frame,
    pub unit: El,
    pub map: RingMap,
    /// For maps between principal ideal frames: the element with
    /// `α(gen) = gen' * witness_factor`, used to transport witnesses.
    pub witness_factor: El,
}

impl FrameMorphism {
    pub fn apply(&self, x: &El) -> FResult<El> {
        match &self.map {
            RingMap::SeriesIdentity | RingMap::WittIdentity => Ok(x.clone()),
            RingMap::Series(hom) => Ok(El::Series(
                hom.apply(x.as_series()?).map_err(FrameError::Algebra)?,
            )),
            RingMap::WittQuotient { target_base } => Ok(El::Witt(
                x.as_witt()?
                    .reduce_base_to(target_base)
                    .map_err(FrameError::Algebra)?,
            )),
            RingMap::Kappa(k) => Ok(El::Witt(k.apply(x.as_series()?)?)),
        }
    }

    /// Entrywise application to a matrix.
    pub fn apply_mat(&self, m: &Mat) -> FResult<Mat> {
        let mut out = Vec::with_capacity(m.rows() * m.cols());
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                out.push(self.apply(m.at(r, c))?);
            }
        }
        Ok(Mat::from_entries(m.rows(), m.cols(), out))
    }

    /// Transport a witnessed ideal element structurally, so that the image
    /// carries a valid witness in the target frame.
    pub fn map_ideal_elem(&self, a: &IdealElem) -> FResult<IdealElem> {
        match (&self.map, a) {
            // maps between principal frames carry witnesses along, corrected
            // by the factor with α(gen) = gen' * factor
            (RingMap::Series(_), IdealElem::Witnessed { value, witness }) => {
                self.check_principal_gens_compatible()?;
                Ok(IdealElem::Witnessed {
                    value: self.apply(value)?,
                    witness: self
                        .target
                        .ring
                        .mul(&self.witness_factor, &self.apply(witness)?)?,
                })
            }
            // identity maps: either an extension arrow (embed with zero
            // kernel part) or a re-witnessing between principal ideals
            (RingMap::SeriesIdentity, IdealElem::Witnessed { value, witness }) => {
                if let IdealShape::Extended { .. } = &self.target.ideal {
                    let kernel = match self.target.kernel_data().map(|k| &k.spec) {
                        Some(spec) => self.target.kernel_zero(spec)?,
                        None => unreachable!(),
                    };
                    Ok(IdealElem::Extended {
                        base: Box::new(a.clone()),
                        kernel,
                    })
                } else {
                    self.check_principal_gens_compatible()?;
                    Ok(IdealElem::Witnessed {
                        value: value.clone(),
                        witness: self.target.ring.mul(&self.witness_factor, witness)?,
                    })
                }
            }
            (RingMap::WittIdentity, IdealElem::WittZero { .. }) => {
                if let IdealShape::Extended { .. } = &self.target.ideal {
                    let kernel = match self.target.kernel_data().map(|k| &k.spec) {
                        Some(spec) => self.target.kernel_zero(spec)?,
                        None => unreachable!(),
                    };
                    Ok(IdealElem::Extended {
                        base: Box::new(a.clone()),
                        kernel,
                    })
                } else {
                    Ok(a.clone())
                }
            }
            // identity on a frame with an extended ideal keeps presentations
            (RingMap::SeriesIdentity, IdealElem::Extended { .. })
            | (RingMap::WittIdentity, IdealElem::Extended { .. })
                if self.source.ideal == self.target.ideal =>
            {
                Ok(a.clone())
            }
            // projections from extended frames: the kernel part dies
            (RingMap::Series(_), IdealElem::Extended { base, kernel }) => {
                let kv = self.source.kernel_value(kernel)?;
                let mapped_kernel = self.apply(&kv)?;
                if !self.target.ring.is_zero(&mapped_kernel) {
                    return Err(FrameError::Incompatible(
                        "kernel part does not die under the projection".into(),
                    ));
                }
                self.map_ideal_elem(base)
            }
            (RingMap::WittQuotient { target_base }, IdealElem::WittZero { value }) => {
                Ok(IdealElem::WittZero {
                    value: value
                        .reduce_base_to(target_base)
                        .map_err(FrameError::Algebra)?,
                })
            }
            (RingMap::WittQuotient { target_base }, IdealElem::Extended { base, kernel }) => {
                let kv = self.source.kernel_value(kernel)?;
                let mapped = kv
                    .as_witt()?
                    .reduce_base_to(target_base)
                    .map_err(FrameError::Algebra)?;
                if !mapped.is_zero() {
                    return Err(FrameError::Incompatible(
                        "kernel part does not die under the projection".into(),
                    ));
                }
                self.map_ideal_elem(base)
            }
            // kappa sends E*w to a first-coordinate-zero vector; kernel parts
            // land in the hat-Witt ideal with support one
            (RingMap::Kappa(k), IdealElem::Witnessed { value, .. }) => {
                let img = k.apply(value.as_series()?)?;
                self.target_ideal_from_witt(img)
            }
            (RingMap::Kappa(k), IdealElem::Extended { base, kernel }) => {
                let base_img = match base.as_ref() {
                    IdealElem::Witnessed { value, .. } => k.apply(value.as_series()?)?,
                    _ => {
                        return Err(FrameError::Incompatible(
                            "unexpected base presentation for kappa".into(),
                        ))
                    }
                };
                let KernelEl::Series(ks) = kernel else {
                    return Err(FrameError::Incompatible(
                        "kappa expects a series kernel part".into(),
                    ));
                };
                let kernel_img = k.apply(ks)?;
                let IdealShape::Extended { kernel: kd, .. } = &self.target.ideal else {
                    return Err(FrameError::Incompatible(
                        "kappa of an extended element needs an extended target".into(),
                    ));
                };
                let KernelSpec::WittHat { ideal } = &kd.spec else {
                    return Err(FrameError::Incompatible(
                        "target kernel is not a hat-Witt ideal".into(),
                    ));
                };
                // the image of a kernel element has support one
                for c in kernel_img.coords().iter().skip(1) {
                    if !c.is_zero() {
                        return Err(FrameError::Incompatible(
                            "kappa image of kernel element has unexpected support".into(),
                        ));
                    }
                }
                let klog = LogVector::new(ideal, vec![kernel_img.coord(0).clone()])
                    .map_err(FrameError::Algebra)?;
                if base_img.len() > 0 && !base_img.coord(0).is_zero() {
                    return Err(FrameError::Algebra(AlgebraError::NotInIdeal(
                        "kappa image of the base part is not in the augmentation ideal".into(),
                    )));
                }
                Ok(IdealElem::Extended {
                    base: Box::new(IdealElem::WittZero { value: base_img }),
                    kernel: KernelEl::Log(klog),
                })
            }
            _ => Err(FrameError::Incompatible(
                "cannot transport this ideal presentation through this map".into(),
            )),
        }
    }

    fn target_ideal_from_witt(&self, w: WittVector) -> FResult<IdealElem> {
        match &self.target.ideal {
            IdealShape::WittFirstZero => {
                if w.len() > 0 && !w.coord(0).is_zero() {
                    return Err(FrameError::Algebra(AlgebraError::NotInIdeal(
                        "image has a nonzero first coordinate".into(),
                    )));
                }
                Ok(IdealElem::WittZero { value: w })
            }
            IdealShape::Extended { .. } => self.target.present(&El::Witt(w)),
            _ => Err(FrameError::Incompatible(
                "target ideal cannot hold a Witt element".into(),
            )),
        }
    }

    fn check_principal_gens_compatible(&self) -> FResult<()> {
        let src_gen = self.source.principal_gen()?;
        let tgt_gen = self.target.principal_gen()?;
        let mapped = self.apply(src_gen)?;
        let expected = self.target.ring.mul(tgt_gen, &self.witness_factor)?;
        let (_, eq) = self.target.ring.eq_common(&mapped, &expected)?;
        if !eq {
            return Err(FrameError::Incompatible(
                "map does not carry the distinguished generator onto the target's".into(),
            ));
        }
        Ok(())
    }

    /// Canonical lift of a target ring element along quotient-shaped maps.
    pub fn canonical_lift(&self, y: &El) -> FResult<El> {
        match &self.map {
            RingMap::SeriesIdentity | RingMap::WittIdentity => Ok(y.clone()),
            RingMap::Series(hom) => Ok(El::Series(
                hom.canonical_lift(y.as_series()?).map_err(FrameError::Algebra)?,
            )),
            RingMap::WittQuotient { .. } => {
                let (src_base, _) = self.source.ring.witt_parts()?;
                Ok(El::Witt(
                    y.as_witt()?
                        .lift_base_into(src_base)
                        .map_err(FrameError::Algebra)?,
                ))
            }
            RingMap::Kappa(_) => Err(FrameError::Incompatible(
                "no canonical lift along the Witt section".into(),
            )),
        }
    }

    /// Composition `self ∘ first`, with unit `u_self * self(u_first)`.
    pub fn compose(&self, first: &FrameMorphism) -> FResult<FrameMorphism> {
        let unit = self
            .target
            .ring
            .mul(&self.unit, &self.apply(&first.unit)?)?;
        let map = match (&self.map, &first.map) {
            (RingMap::SeriesIdentity, m) | (m, RingMap::SeriesIdentity) => m.clone(),
            (RingMap::WittIdentity, m) | (m, RingMap::WittIdentity) => m.clone(),
            (RingMap::Series(second), RingMap::Series(firsth)) => {
                RingMap::Series(second.compose(firsth).map_err(FrameError::Algebra)?)
            }
            (RingMap::WittQuotient { target_base }, RingMap::WittQuotient { .. }) => {
                RingMap::WittQuotient {
                    target_base: target_base.clone(),
                }
            }
            (RingMap::WittQuotient { target_base }, RingMap::Kappa(k)) => {
                let res_spec = target_base.clone();
                let res = SeriesHom::quotient(k.residue_hom().dst().clone(), res_spec)
                    .map_err(FrameError::Algebra)?;
                let residue = res.compose(k.residue_hom()).map_err(FrameError::Algebra)?;
                RingMap::Kappa(KappaMap::new(
                    k.residue_hom().src().clone(),
                    residue,
                    k.budget(),
                )?)
            }
            (RingMap::Kappa(k), RingMap::Series(firsth)) => {
                let residue = k.residue_hom().compose(firsth).map_err(FrameError::Algebra)?;
                RingMap::Kappa(KappaMap::new(firsth.src().clone(), residue, k.budget())?)
            }
            _ => {
                return Err(FrameError::Incompatible(
                    "composition of these map kinds is not supported".into(),
                ))
            }
        };
        let witness_factor = self
            .target
            .ring
            .mul(&self.witness_factor, &self.apply(&first.witness_factor)?)?;
        Ok(FrameMorphism {
            source: first.source.clone(),
            target: self.target.clone(),
            unit,
            witness_factor,
            map,
        })
    }

    /// Verify the u-morphism identities on ideal generators and random
    /// samples: `α(I) ⊆ I'`, `f' α = α f`, and `f1' α = u α f1`.
    pub fn check<R: Rng>(&self, samples: usize, rng: &mut R) -> FResult<Report> {
        let mut report = Report::new("frame-morphism");
        report.header_line(format!("unit = {}", self.unit));

        // f-compatibility on random ring elements
        let mut ok = true;
        let mut detail = String::new();
        for _ in 0..samples {
            let x = self.source.ring.sample(rng);
            let lhs = self.target.ring.frobenius(&self.apply(&x)?)?;
            let rhs = self.apply(&self.source.ring.frobenius(&x)?)?;
            let (_, eq) = self.target.ring.eq_common(&lhs, &rhs)?;
            if !eq {
                ok = false;
                detail = format!("f'(α(x)) = {lhs} but α(f(x)) = {rhs} for x = {x}");
                break;
            }
        }
        report.push(if ok {
            Check::pass("f-compatibility")
        } else {
            Check::fail("f-compatibility", detail)
        });

        // ideal transport and the twisted f1 identity on generators plus
        // random witnessed elements
        let mut members = self.source.ideal_generators()?;
        for _ in 0..samples.min(8) {
            members.push(self.source.sample_ideal(rng)?);
        }
        let mut ok = true;
        let mut detail = String::new();
        for a in &members {
            let mapped = self.map_ideal_elem(a)?;
            let lhs = self.target.f1(&mapped)?;
            let rhs = self
                .target
                .ring
                .mul(&self.unit, &self.apply(&self.source.f1(a)?)?)?;
            let (_, eq) = self.target.ring.eq_common(&lhs, &rhs)?;
            if !eq {
                ok = false;
                detail = format!("f1'(α(a)) = {lhs} but u*α(f1(a)) = {rhs}");
                break;
            }
        }
        report.push(if ok {
            Check::pass("f1-twist")
        } else {
            Check::fail("f1-twist", detail)
        });

        Ok(report)
    }
}

/// Identity frame morphism.
pub fn identity_morphism(frame: &Frame) -> FResult<FrameMorphism> {
    let map = match &frame.ring {
        RingHandle::Series(_) => RingMap::SeriesIdentity,
        RingHandle::Witt { .. } => RingMap::WittIdentity,
    };
    Ok(FrameMorphism {
        source: frame.clone(),
        target: frame.clone(),
        unit: frame.ring.one()?,
        witness_factor: frame.ring.one()?,
        map,
    })
}

/// The ideal-extension arrow from a frame into its derived frame (same ring).
pub fn extension_morphism(base: &Frame, derived: &Frame) -> FResult<FrameMorphism> {
    if base.ring != derived.ring {
        return Err(FrameError::Incompatible(
            "extension arrow needs the same underlying ring".into(),
        ));
    }
    let map = match &base.ring {
        RingHandle::Series(_) => RingMap::SeriesIdentity,
        RingHandle::Witt { .. } => RingMap::WittIdentity,
    };
    Ok(FrameMorphism {
        source: base.clone(),
        target: derived.clone(),
        unit: derived.ring.one()?,
        witness_factor: derived.ring.one()?,
        map,
    })
}

/// Quotient morphism between series frames (level or precision drop).
pub fn series_quotient_morphism(source: &Frame, target: &Frame) -> FResult<FrameMorphism> {
    let src_spec = source.ring.series_spec()?.clone();
    let dst_spec = target.ring.series_spec()?.clone();
    let hom = SeriesHom::quotient(src_spec, dst_spec).map_err(FrameError::Algebra)?;
    Ok(FrameMorphism {
        source: source.clone(),
        target: target.clone(),
        unit: target.ring.one()?,
        witness_factor: target.ring.one()?,
        map: RingMap::Series(hom),
    })
}

/// Quotient morphism between Dieudonne frames along `R -> R'`.
pub fn witt_quotient_morphism(source: &Frame, target: &Frame) -> FResult<FrameMorphism> {
    let (src_base, _) = source.ring.witt_parts()?;
    let (dst_base, _) = target.ring.witt_parts()?;
    if !dst_base.refines(src_base) {
        return Err(FrameError::Incompatible(
            "target coordinate ring is not a quotient of the source's".into(),
        ));
    }
    Ok(FrameMorphism {
        source: source.clone(),
        target: target.clone(),
        unit: target.ring.one()?,
        witness_factor: target.ring.one()?,
        map: RingMap::WittQuotient {
            target_base: dst_base.clone(),
        },
    })
}

/// The u-morphism `κ` from a series frame (Breuil or C) into the Dieudonne
/// frame over its residue ring. The unit is `f1'(κ(gen))`, recovered by the
/// shift, and must have unit residue.
pub fn kappa_morphism(source: &Frame, target: &Frame) -> FResult<FrameMorphism> {
    let residue = match &source.residue {
        crate::frames::ResidueData::SeriesQuotient(h) => h.clone(),
        _ => {
            return Err(FrameError::Incompatible(
                "source frame has no materialized residue ring".into(),
            ))
        }
    };
    let (tgt_base, budget) = target.ring.witt_parts()?;
    if tgt_base != residue.dst() {
        return Err(FrameError::Incompatible(
            "target Witt frame is not over the source's residue ring".into(),
        ));
    }
    let kappa = KappaMap::new(source.ring.series_spec()?.clone(), residue, budget)?;
    // unit: κ(gen) lies in the augmentation ideal; u = f1'(κ(gen)) / f1(gen)
    // and f1(gen) = 1 by the witness convention
    let gen = source.principal_gen()?.clone();
    let gen_img = kappa.apply(gen.as_series().map_err(FrameError::Algebra)?)?;
    if gen_img.len() == 0 || !gen_img.coord(0).is_zero() {
        return Err(FrameError::Incompatible(
            "κ(gen) is not in the augmentation ideal; residue data inconsistent".into(),
        ));
    }
    let unit_w = gen_img.f1_shift().map_err(FrameError::Algebra)?;
    if unit_w.residue_fp() == 0 {
        return Err(FrameError::Algebra(AlgebraError::NotAUnit));
    }
    Ok(FrameMorphism {
        source: source.clone(),
        target: target.clone(),
        unit: El::Witt(unit_w),
        witness_factor: target.ring.one()?,
        map: RingMap::Kappa(kappa),
    })
}

/// The `v^{-1}`-isomorphism from a C-frame onto the level-one Breuil frame
/// over the same ring, together with its inverse (a `v`-morphism).
pub fn c_to_b1_iso(c: &Frame, b1: &Frame) -> FResult<(FrameMorphism, FrameMorphism)> {
    let c_spec = c.ring.series_spec()?;
    let b_spec = b1.ring.series_spec()?;
    if c_spec != b_spec {
        return Err(FrameError::Incompatible(
            "the two frames must share the underlying ring".into(),
        ));
    }
    let FrameKind::Breuil { level, eis, .. } = &b1.kind else {
        return Err(FrameError::Incompatible("second frame must be Breuil".into()));
    };
    if *level != 1 {
        return Err(FrameError::Incompatible("Breuil frame must be at level one".into()));
    }
    let v = eis.level_one_unit(b_spec.p(), b_spec)?;
    if v.residue_fp() == 0 {
        return Err(FrameError::Algebra(AlgebraError::NotAUnit));
    }
    let v_inv = v.invert().map_err(FrameError::Algebra)?;
    // E = p * w with w = E/p a unit; witnesses transport through w
    let w = eis.level_one_e_over_p(b_spec.p(), b_spec)?;
    let w_inv = w.invert().map_err(FrameError::Algebra)?;
    let forward = FrameMorphism {
        source: c.clone(),
        target: b1.clone(),
        unit: El::Series(v_inv.clone()),
        witness_factor: El::Series(w_inv),
        map: RingMap::SeriesIdentity,
    };
    let backward = FrameMorphism {
        source: b1.clone(),
        target: c.clone(),
        unit: El::Series(v),
        witness_factor: El::Series(w),
        map: RingMap::SeriesIdentity,
    };
    Ok((forward, backward))
}
