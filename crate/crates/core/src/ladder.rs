//! The level ladder: for each level `a` the projection factors through a
//! middle frame on both the series side and the Witt side, the section `κ`
//! connects the two columns, and deformations are classified by the same
//! Hodge-lift set on either side. This module builds the six frames of one
//! ladder step, verifies that the two base-change paths agree exactly at the
//! tracked length, and pairs the Hodge lifts κ-equivariantly.

use crate::el::El;
use crate::error::{FrameError, FResult};
use crate::frames::{
    breuil_frame, derive_deformation_frame, dieudonne_frame, hat_kernel, Eisenstein, KernelRule,
    KernelSpec, ResidueData,
};
use crate::hatwitt::HatIdeal;
use crate::hodge::{enumerate_hodge_lifts, hodge_deform, DeformationStep};
use crate::matrix::{min_tracked_len, Mat};
use crate::morphism::{
    extension_morphism, identity_morphism, kappa_morphism, series_quotient_morphism,
    witt_quotient_morphism, FrameMorphism,
};
use crate::report::{Check, Report};
use crate::ring::{RingSpec, TruncatedSeries};
use crate::solver::reduce_to_squarezero;
use crate::window::{base_change, check_window_morphism, windows_equal, Window};
use rand::Rng;

/// Build the series-side level step `B_{a+1} -> B' -> B_a`.
pub fn breuil_level_step(
    p: u64,
    precision: u32,
    eis: &Eisenstein,
    level: u32,
    t_truncs: Vec<u32>,
) -> FResult<DeformationStep> {
    let e = eis.degree();
    let upper = breuil_frame(p, precision, eis, level + 1, t_truncs.clone())?;
    let small = breuil_frame(p, precision, eis, level, t_truncs)?;
    let middle = derive_deformation_frame(
        &upper,
        KernelSpec::MonomialUPower {
            min_exp: level * e,
        },
        KernelRule::Zero,
    )?;
    let beta1 = extension_morphism(&upper, &middle)?;
    let beta2 = series_quotient_morphism(&middle, &small)?;
    let proj_full = series_quotient_morphism(&upper, &small)?;
    let ctx = reduce_to_squarezero(&middle, &small, &beta2)?.remove(0);
    // the kernel image in R_{level+1} is p^{level*e} times a unit
    let ResidueData::SeriesQuotient(rho) = &upper.residue else {
        return Err(FrameError::Incompatible(
            "upper residue ring is not materialized (requires e = 1)".into(),
        ));
    };
    let hodge_ideal = HatIdeal::new(rho.dst(), level * e).map_err(FrameError::Algebra)?;
    Ok(DeformationStep {
        upper,
        beta1,
        ctx,
        proj_full,
        hodge_ideal,
    })
}

/// Build the Witt-side level step `F_{R_{a+1}} -> F' -> F_{R_a}` for the
/// kernel `b = p^a R_{a+1}`.
pub fn dieudonne_level_step(
    r_upper: &RingSpec,
    kernel_power: u32,
    budget: usize,
) -> FResult<DeformationStep> {
    let r_small = r_upper
        .with_precision(kernel_power)
        .map_err(FrameError::Algebra)?;
    let upper = dieudonne_frame(r_upper, budget)?;
    let small = dieudonne_frame(&r_small, budget)?;
    let middle =
        derive_deformation_frame(&upper, hat_kernel(r_upper, kernel_power)?, KernelRule::HatShift)?;
    let beta1 = extension_morphism(&upper, &middle)?;
    let beta2 = witt_quotient_morphism(&middle, &small)?;
    let proj_full = witt_quotient_morphism(&upper, &small)?;
    let ctx = reduce_to_squarezero(&middle, &small, &beta2)?.remove(0);
    let hodge_ideal = HatIdeal::new(r_upper, kernel_power).map_err(FrameError::Algebra)?;
    Ok(DeformationStep {
        upper,
        beta1,
        ctx,
        proj_full,
        hodge_ideal,
    })
}

/// All six frames and five morphisms of one ladder step.
#[derive(Debug, Clone)]
pub struct LadderStep {
    pub breuil: DeformationStep,
    pub dieudonne: DeformationStep,
    pub kappa_upper: FrameMorphism,
    pub kappa_middle: FrameMorphism,
    pub kappa_small: FrameMorphism,
}

/// Assemble a ladder step at level `a` (requires `e = 1` so that the residue
/// rings are materialized).
pub fn build_ladder_step(
    p: u64,
    precision: u32,
    eis: &Eisenstein,
    level: u32,
    t_truncs: Vec<u32>,
    budget: usize,
) -> FResult<LadderStep> {
    let breuil = breuil_level_step(p, precision, eis, level, t_truncs)?;
    let ResidueData::SeriesQuotient(rho) = &breuil.upper.residue else {
        return Err(FrameError::Incompatible("no residue ring".into()));
    };
    let dieudonne = dieudonne_level_step(rho.dst(), level * eis.degree(), budget)?;
    let kappa_upper = kappa_morphism(&breuil.upper, &dieudonne.upper)?;
    let kappa_small = kappa_morphism(&breuil.ctx.small, &dieudonne.ctx.small)?;
    // κ' is carried by the same ring map and unit, between the middle frames
    let kappa_middle = FrameMorphism {
        source: breuil.ctx.middle.clone(),
        target: dieudonne.ctx.middle.clone(),
        unit: kappa_upper.unit.clone(),
        witness_factor: dieudonne.ctx.middle.ring.one()?,
        map: kappa_upper.map.clone(),
    };
    Ok(LadderStep {
        breuil,
        dieudonne,
        kappa_upper,
        kappa_middle,
        kappa_small,
    })
}

/// Verify one ladder step on a window over the upper Breuil frame: the
/// middle κ is a u-morphism (including the f1-vanishing on the kernel), the
/// two base-change paths agree exactly at the tracked length, and the Hodge
/// lifts on both sides correspond κ-equivariantly with matching counts.
pub fn kappa_ladder_step<R: Rng>(
    step: &LadderStep,
    w: &Window,
    samples: usize,
    lift_cap: usize,
    rng: &mut R,
) -> FResult<Report> {
    let mut report = Report::new("kappa-ladder");
    report.header_line(format!("ranks = ({}, {})", w.d_l, w.d_t));

    // the three κ's are u-morphisms
    for (name, m) in [
        ("kappa-upper-u-morphism", &step.kappa_upper),
        ("kappa-middle-u-morphism", &step.kappa_middle),
        ("kappa-small-u-morphism", &step.kappa_small),
    ] {
        let rep = m.check(samples, rng)?;
        report.push(if rep.passed() {
            Check::pass(name)
        } else {
            Check::fail(name, rep.render())
        });
    }

    // f1 of κ(kernel generator) vanishes: the image is a Teichmuller-type
    // vector supported in the kernel ideal, killed by the shift
    {
        let gens = step
            .breuil
            .ctx
            .middle
            .kernel_generators(&crate::solver::kernel_spec(&step.breuil.ctx.middle)?)?;
        let mut ok = true;
        let mut detail = String::new();
        for g in gens {
            let elem = step.breuil.ctx.middle.ideal_from_kernel(g)?;
            let mapped = step.kappa_middle.map_ideal_elem(&elem)?;
            let f1 = step.dieudonne.ctx.middle.f1(&mapped)?;
            if !step.dieudonne.ctx.middle.ring.is_zero(&f1) {
                ok = false;
                detail = format!("f1 of the kernel image is {f1}");
            }
        }
        report.push(if ok {
            Check::pass("f1-kills-kappa-of-kernel")
        } else {
            Check::fail("f1-kills-kappa-of-kernel", detail)
        });
    }

    // two-path base change
    {
        let down_then_kappa = base_change(
            &step.kappa_small,
            &base_change(&step.breuil.proj_full, w)?,
        )?;
        let kappa_then_down = base_change(
            &step.dieudonne.proj_full,
            &base_change(&step.kappa_upper, w)?,
        )?;
        let len = min_tracked_len(&down_then_kappa.a)
            .min(min_tracked_len(&kappa_then_down.a))
            .unwrap_or(0);
        let eq = windows_equal(&down_then_kappa, &kappa_then_down)?;
        report.push(if eq && len >= 3 {
            Check::pass("two-path-base-change").with_detail(format!("compared at length {len}"))
        } else if !eq {
            Check::fail(
                "two-path-base-change",
                format!(
                    "paths differ: {} vs {}",
                    down_then_kappa.a.render(),
                    kappa_then_down.a.render()
                ),
            )
        } else {
            Check::fail(
                "two-path-base-change",
                format!("tracked length {len} < 3"),
            )
        });
    }

    // unit coherence: the projected upper unit is the small unit
    {
        let projected = step.dieudonne.proj_full.apply(&step.kappa_upper.unit)?;
        let (_, eq) = step
            .dieudonne
            .ctx
            .small
            .ring
            .eq_common(&projected, &step.kappa_small.unit)?;
        report.push(if eq {
            Check::pass("unit-projection-coherence")
        } else {
            Check::fail(
                "unit-projection-coherence",
                format!(
                    "projected unit {projected} differs from {}",
                    step.kappa_small.unit
                ),
            )
        });
    }

    // Hodge lifts pair κ-equivariantly; both sides enumerate the same set
    {
        let lifts_b = enumerate_hodge_lifts(&step.breuil, w.d_l, w.d_t, lift_cap)?;
        let lifts_d = enumerate_hodge_lifts(&step.dieudonne, w.d_l, w.d_t, lift_cap)?;
        let mut ok = lifts_b.len() == lifts_d.len();
        let mut detail = if ok {
            String::new()
        } else {
            format!("counts differ: {} vs {}", lifts_b.len(), lifts_d.len())
        };
        if ok {
            let w_mid_b = Window::from_normal_decomposition(
                step.breuil.ctx.middle.clone(),
                w.d_l,
                w.d_t,
                w.a.clone(),
            )?;
            let w_mid_d = base_change(&step.kappa_middle, &w_mid_b)?;
            let w_mid_d = Window::from_normal_decomposition(
                step.dieudonne.ctx.middle.clone(),
                w.d_l,
                w.d_t,
                w_mid_d.a.clone(),
            )?;
            for lift in &lifts_b {
                let deformed_b = hodge_deform(&step.breuil, &w_mid_b, lift)?;
                let left = base_change(&step.kappa_upper, &deformed_b)?;
                let right = hodge_deform(&step.dieudonne, &w_mid_d, lift)?;
                if !windows_equal(&left, &right)? {
                    ok = false;
                    detail = format!(
                        "lift {} is not κ-equivariant: {} vs {}",
                        lift.render(),
                        left.a.render(),
                        right.a.render()
                    );
                    break;
                }
            }
        }
        report.push(if ok {
            Check::pass("hodge-lift-pairing").with_detail(format!(
                "{} lifts paired on both sides",
                lifts_b.len()
            ))
        } else {
            Check::fail("hodge-lift-pairing", detail)
        });
    }

    Ok(report)
}

/// Enumerate all window morphisms `w1 -> w2` over a frame whose ring is
/// small enough to list, as 1-morphism matrices.
fn enumerate_window_homs(
    frame: &crate::frames::Frame,
    w1: &Window,
    w2: &Window,
    cap: usize,
) -> FResult<Vec<Mat>> {
    let id = identity_morphism(frame)?;
    let cells = w2.rank() * w1.rank();
    let candidates: Vec<El> = match &frame.ring {
        crate::el::RingHandle::Series(spec) => {
            let count = spec
                .element_count_capped(cap as u128)
                .ok_or_else(|| FrameError::EnumerationTooLarge("series ring too large".into()))?;
            let _ = count;
            enumerate_series(spec, cap)?.into_iter().map(El::Series).collect()
        }
        crate::el::RingHandle::Witt { base, budget } => {
            let per_coord = enumerate_series(base, cap)?;
            let total = (per_coord.len() as u128).checked_pow(*budget as u32);
            match total {
                Some(t) if t <= cap as u128 => {}
                _ => {
                    return Err(FrameError::EnumerationTooLarge(
                        "witt ring too large".into(),
                    ))
                }
            }
            let mut vecs: Vec<Vec<TruncatedSeries>> = vec![vec![]];
            for _ in 0..*budget {
                let mut next = Vec::with_capacity(vecs.len() * per_coord.len());
                for v in &vecs {
                    for c in &per_coord {
                        let mut vv = v.clone();
                        vv.push(c.clone());
                        next.push(vv);
                    }
                }
                vecs = next;
            }
            vecs.into_iter()
                .map(|coords| {
                    crate::witt::WittVector::from_coords(base, coords)
                        .map(El::Witt)
                        .map_err(FrameError::Algebra)
                })
                .collect::<FResult<Vec<_>>>()?
        }
    };
    if cells != 1 {
        return Err(FrameError::EnumerationTooLarge(
            "hom enumeration is implemented for rank-one windows".into(),
        ));
    }
    let mut out = Vec::new();
    for c in candidates {
        let g = Mat::from_entries(1, 1, vec![c]);
        if check_window_morphism(&g, &id, w1, w2)?.passed() {
            out.push(g);
        }
    }
    Ok(out)
}

/// All elements of a small truncated series ring.
fn enumerate_series(spec: &RingSpec, cap: usize) -> FResult<Vec<TruncatedSeries>> {
    let count = spec
        .element_count_capped(cap as u128)
        .ok_or_else(|| FrameError::EnumerationTooLarge(format!("ring exceeds cap {cap}")))?;
    let _ = count;
    let monomials = spec.monomials();
    let mut out = vec![TruncatedSeries::zero(spec)];
    for m in &monomials {
        let mut next = Vec::with_capacity(out.len() * spec.modulus() as usize);
        for base in &out {
            for c in 0..spec.modulus() {
                let term =
                    TruncatedSeries::from_terms(spec, &[(m.clone(), c as i128)])
                        .map_err(FrameError::Algebra)?;
                next.push(base.add(&term).map_err(FrameError::Algebra)?);
            }
        }
        out = next;
    }
    Ok(out)
}

/// Desk-scale full-faithfulness probe: enumerate `Hom(w1, w2)` over the
/// series frame and `Hom(κw1, κw2)` over the Witt frame and check that κ
/// induces a bijection. Requires rank-one windows and aligned precisions
/// (series precision equal to the Witt length budget).
pub fn faithfulness_probe(
    kappa: &FrameMorphism,
    w1: &Window,
    w2: &Window,
    cap: usize,
) -> FResult<Report> {
    let mut report = Report::new("faithfulness-probe");
    let homs_series = enumerate_window_homs(&kappa.source, w1, w2, cap)?;
    let kw1 = base_change(kappa, w1)?;
    let kw2 = base_change(kappa, w2)?;
    let homs_witt = enumerate_window_homs(&kappa.target, &kw1, &kw2, cap)?;
    report.header_line(format!(
        "|Hom| = {} upstairs, {} downstairs",
        homs_series.len(),
        homs_witt.len()
    ));

    // the functor acts on morphisms by the plain entrywise ring map
    let mut images = Vec::new();
    for g in &homs_series {
        images.push(kappa.apply_mat(g)?);
    }

    // every image is a morphism downstairs
    let mut ok = true;
    let mut detail = String::new();
    for img in &images {
        let found = homs_witt
            .iter()
            .any(|h| crate::matrix::mats_equal(&kappa.target.ring, h, img).unwrap_or(false));
        if !found {
            ok = false;
            detail = format!("image {} is not a morphism downstairs", img.render());
            break;
        }
    }
    report.push(if ok {
        Check::pass("images-are-morphisms")
    } else {
        Check::fail("images-are-morphisms", detail)
    });

    // injectivity and surjectivity of the induced map
    let mut distinct = true;
    'outer: for i in 0..images.len() {
        for j in (i + 1)..images.len() {
            if crate::matrix::mats_equal(&kappa.target.ring, &images[i], &images[j])? {
                distinct = false;
                break 'outer;
            }
        }
    }
    report.push(if distinct {
        Check::pass("induced-map-injective")
    } else {
        Check::fail("induced-map-injective", "two homs collide downstairs")
    });
    report.push(if images.len() == homs_witt.len() {
        Check::pass("induced-map-bijective").with_detail(format!("{} homs", images.len()))
    } else {
        Check::fail(
            "induced-map-bijective",
            format!("{} images vs {} homs downstairs", images.len(), homs_witt.len()),
        )
    });

    Ok(report)
}
