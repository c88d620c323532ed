//! Windows over a frame, stored in normal decomposition form: ranks
//! `(d_L, d_T)` plus the invertible structural matrix `A` whose column `j`
//! holds the coordinates of `Ψ(e_j)`, where `Ψ = F1` on the L-block and `F`
//! on the T-block. `F` and `F1` are evaluated through the columns of `A`:
//! `F = pi * F1` on the L-block, and `F1(a x) = f1(a) F(x)` on witnessed
//! ideal coordinates.

use crate::el::El;
use crate::error::{AlgebraError, FrameError, FResult};
use crate::frames::{Frame, IdealElem};
use crate::matrix::{fp_invert, mats_equal, Mat};
use crate::morphism::FrameMorphism;
use crate::report::{Check, Report};
use rand::Rng;

#[derive(Debug, Clone)]
pub struct Window {
    pub frame: Frame,
    pub d_l: usize,
    pub d_t: usize,
    pub a: Mat,
}

/// An element of `Q = L ⊕ I·T` with witnessed ideal coordinates on the
/// T-block.
#[derive(Debug, Clone)]
pub struct QElement {
    pub l_coords: Vec<El>,
    pub t_coords: Vec<IdealElem>,
}

impl Window {
    /// Validate and build a window from its normal decomposition data.
    pub fn from_normal_decomposition(frame: Frame, d_l: usize, d_t: usize, a: Mat) -> FResult<Self> {
        let d = d_l + d_t;
        if a.rows() != d || a.cols() != d {
            return Err(FrameError::RankMismatch(format!(
                "structural matrix is {}x{}, ranks demand {}x{}",
                a.rows(),
                a.cols(),
                d,
                d
            )));
        }
        if d > 0 && fp_invert(frame.ring.p(), d, &a.residue(&frame.ring)).is_none() {
            return Err(FrameError::Algebra(AlgebraError::NotInvertible));
        }
        Ok(Window { frame, d_l, d_t, a })
    }

    pub fn rank(&self) -> usize {
        self.d_l + self.d_t
    }

    /// Column indices of the L-block.
    pub fn l_indices(&self) -> Vec<usize> {
        (0..self.d_l).collect()
    }

    /// `F` on the basis: `F(l_j) = pi * A_j`, `F(t_j) = A_{d_l + j}`.
    pub fn f_on_basis(&self) -> FResult<Mat> {
        self.a
            .scale_columns(&self.frame.ring, &self.frame.pi, &self.l_indices())
            .map_err(FrameError::Algebra)
    }

    /// Evaluate `F` on plain coordinates.
    pub fn eval_f(&self, x: &[El]) -> FResult<Vec<El>> {
        if x.len() != self.rank() {
            return Err(FrameError::RankMismatch("coordinate count".into()));
        }
        let ring = &self.frame.ring;
        let phi = self.f_on_basis()?;
        let fx = x
            .iter()
            .map(|c| self.frame.apply_f(c))
            .collect::<FResult<Vec<_>>>()?;
        Ok(phi.mul_vec(ring, &fx)?)
    }

    /// Evaluate `F1` on a witnessed element of `Q`.
    pub fn eval_f1(&self, q: &QElement) -> FResult<Vec<El>> {
        if q.l_coords.len() != self.d_l || q.t_coords.len() != self.d_t {
            return Err(FrameError::RankMismatch("Q-coordinate count".into()));
        }
        let ring = &self.frame.ring;
        let mut coeffs = Vec::with_capacity(self.rank());
        for c in &q.l_coords {
            coeffs.push(self.frame.apply_f(c)?);
        }
        for a in &q.t_coords {
            coeffs.push(self.frame.f1(a)?);
        }
        Ok(self.a.mul_vec(ring, &coeffs)?)
    }

    /// The value coordinates of a Q-element inside `P`.
    pub fn q_value_coords(&self, q: &QElement) -> FResult<Vec<El>> {
        let mut out = q.l_coords.clone();
        for a in &q.t_coords {
            out.push(self.frame.ideal_value(a)?);
        }
        Ok(out)
    }

    /// Standard generators of `Q`: the L-basis vectors and `gen * t_k` for
    /// each ideal generator.
    pub fn q_generators(&self) -> FResult<Vec<QElement>> {
        let ring = &self.frame.ring;
        let mut gens = Vec::new();
        for j in 0..self.d_l {
            let mut l = vec![ring.zero(); self.d_l];
            l[j] = ring.one()?;
            gens.push(QElement {
                l_coords: l,
                t_coords: vec![self.frame.ideal_zero()?; self.d_t],
            });
        }
        for ideal_gen in self.frame.ideal_generators()? {
            for k in 0..self.d_t {
                let mut t = vec![self.frame.ideal_zero()?; self.d_t];
                t[k] = ideal_gen.clone();
                gens.push(QElement {
                    l_coords: vec![ring.zero(); self.d_l],
                    t_coords: t,
                });
            }
        }
        Ok(gens)
    }

    pub fn sample_q_element<R: Rng>(&self, rng: &mut R) -> FResult<QElement> {
        let ring = &self.frame.ring;
        let l_coords = (0..self.d_l).map(|_| ring.sample(rng)).collect();
        let t_coords = (0..self.d_t)
            .map(|_| self.frame.sample_ideal(rng))
            .collect::<FResult<Vec<_>>>()?;
        Ok(QElement { l_coords, t_coords })
    }

    /// Verify the window laws: `F = pi * F1` on Q-generators and the
    /// f-semilinearity `F1(a x) = f1(a) F(x)` on random witnessed pairs.
    pub fn check_axioms<R: Rng>(&self, samples: usize, rng: &mut R) -> FResult<Report> {
        let mut report = Report::new("window-axioms");
        let ring = &self.frame.ring;

        let mut ok = true;
        let mut detail = String::new();
        for q in self.q_generators()? {
            let lhs = self.eval_f(&self.q_value_coords(&q)?)?;
            let f1 = self.eval_f1(&q)?;
            for (l, r) in lhs.iter().zip(&f1) {
                let rhs = ring.mul(&self.frame.pi, r)?;
                let (_, eq) = ring.eq_common(l, &rhs)?;
                if !eq {
                    ok = false;
                    detail = format!("F(q) = {l} but pi*F1(q) = {rhs}");
                }
            }
        }
        report.push(if ok {
            Check::pass("f-equals-pi-f1-on-q")
        } else {
            Check::fail("f-equals-pi-f1-on-q", detail)
        });

        let mut ok = true;
        let mut detail = String::new();
        for _ in 0..samples {
            // F1(a * x) = f1(a) * F(x) for a in I and x on the basis
            let a = self.frame.sample_ideal(rng)?;
            let j = rng.gen_range(0..self.rank().max(1));
            if self.rank() == 0 {
                break;
            }
            let mut x = vec![ring.zero(); self.rank()];
            x[j] = ring.one()?;
            // a*x as a Q-element
            let q = QElement {
                l_coords: (0..self.d_l)
                    .map(|i| {
                        if i == j {
                            self.frame.ideal_value(&a)
                        } else {
                            Ok(ring.zero())
                        }
                    })
                    .collect::<FResult<Vec<_>>>()?,
                t_coords: (0..self.d_t)
                    .map(|i| {
                        if i + self.d_l == j {
                            Ok(a.clone())
                        } else {
                            self.frame.ideal_zero()
                        }
                    })
                    .collect::<FResult<Vec<_>>>()?,
            };
            let lhs = self.eval_f1(&q)?;
            let fx = self.eval_f(&x)?;
            let f1a = self.frame.f1(&a)?;
            for (l, fxi) in lhs.iter().zip(&fx) {
                let rhs = ring.mul(&f1a, fxi)?;
                let (_, eq) = ring.eq_common(l, &rhs)?;
                if !eq {
                    ok = false;
                    detail = format!("F1(a*x) = {l} but f1(a)*F(x) = {rhs}");
                }
            }
        }
        report.push(if ok {
            Check::pass("f1-semilinearity")
        } else {
            Check::fail("f1-semilinearity", detail)
        });

        Ok(report)
    }
}

/// Base change along a frame morphism: apply the ring map entrywise and
/// twist the L-block columns by the unit.
pub fn base_change(m: &FrameMorphism, w: &Window) -> FResult<Window> {
    let mapped = m.apply_mat(&w.a)?;
    let twisted = mapped
        .scale_columns(&m.target.ring, &m.unit, &w.l_indices())
        .map_err(FrameError::Algebra)?;
    Window::from_normal_decomposition(m.target.clone(), w.d_l, w.d_t, twisted)
}

/// Direct sum in the L-first basis convention: `(L1 ⊕ L2) ⊕ (T1 ⊕ T2)`.
pub fn direct_sum(w1: &Window, w2: &Window) -> FResult<Window> {
    if w1.frame != w2.frame {
        return Err(FrameError::Incompatible(
            "direct sum needs a common frame".into(),
        ));
    }
    let ring = &w1.frame.ring;
    let d_l = w1.d_l + w2.d_l;
    let d_t = w1.d_t + w2.d_t;
    let d = d_l + d_t;
    // index maps from the summands into the combined L-first basis
    let map1: Vec<usize> = (0..w1.d_l)
        .chain((0..w1.d_t).map(|k| d_l + k))
        .collect();
    let map2: Vec<usize> = (0..w2.d_l)
        .map(|j| w1.d_l + j)
        .chain((0..w2.d_t).map(|k| d_l + w1.d_t + k))
        .collect();
    let mut a = Mat::zero(ring, d, d);
    for (bj, &j) in map1.iter().enumerate() {
        for (bi, &i) in map1.iter().enumerate() {
            a.set(i, j, w1.a.at(bi, bj).clone());
        }
    }
    for (bj, &j) in map2.iter().enumerate() {
        for (bi, &i) in map2.iter().enumerate() {
            a.set(i, j, w2.a.at(bi, bj).clone());
        }
    }
    Window::from_normal_decomposition(w1.frame.clone(), d_l, d_t, a)
}

/// The Hodge filtration `Q/IP ⊆ P/IP` of a normal-form window: the span of
/// the first `d_l` basis vectors over `R`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HodgeFiltration {
    pub rank: usize,
    pub ambient_rank: usize,
    /// Basis indicator: index `i` is true iff `e_i` spans the filtration.
    pub l_block: Vec<bool>,
}

pub fn hodge_filtration(w: &Window) -> HodgeFiltration {
    let mut l_block = vec![false; w.rank()];
    for item in l_block.iter_mut().take(w.d_l) {
        *item = true;
    }
    HodgeFiltration {
        rank: w.d_l,
        ambient_rank: w.rank(),
        l_block,
    }
}

/// Verify that `g` is an α-morphism of windows: `g(Q) ⊆ Q'`, `F' g = g F`,
/// and `F1' g = u g F1` on Q-generators.
pub fn check_window_morphism(
    g: &Mat,
    alpha: &FrameMorphism,
    w: &Window,
    w_prime: &Window,
) -> FResult<Report> {
    let mut report = Report::new("window-morphism");
    let ring = &w_prime.frame.ring;
    if g.rows() != w_prime.rank() || g.cols() != w.rank() {
        report.push(Check::fail(
            "shape",
            format!(
                "g is {}x{}, expected {}x{}",
                g.rows(),
                g.cols(),
                w_prime.rank(),
                w.rank()
            ),
        ));
        return Ok(report);
    }

    // g(Q) ⊆ Q': the T'-components of g on L-columns must lie in I'
    let mut q_pres: Vec<Option<QElement>> = Vec::new();
    let mut ok = true;
    let mut detail = String::new();
    for j in 0..w.d_l {
        let col = g.column(j);
        let mut t_coords = Vec::with_capacity(w_prime.d_t);
        let mut good = true;
        for c in col.iter().skip(w_prime.d_l) {
            match w_prime.frame.present(c) {
                Ok(p) => t_coords.push(p),
                Err(_) => {
                    good = false;
                    break;
                }
            }
        }
        if good {
            q_pres.push(Some(QElement {
                l_coords: col[..w_prime.d_l].to_vec(),
                t_coords,
            }));
        } else {
            ok = false;
            detail = format!("column {j} of g leaves Q'");
            q_pres.push(None);
        }
    }
    report.push(if ok {
        Check::pass("q-preservation")
    } else {
        Check::fail("q-preservation", detail)
    });

    // F' g = g F on the basis of P
    let mut ok = true;
    let mut detail = String::new();
    let phi = w.f_on_basis()?;
    for j in 0..w.rank() {
        let lhs = w_prime.eval_f(&g.column(j))?;
        let f_col = phi.column(j);
        let mapped = f_col
            .iter()
            .map(|c| alpha.apply(c))
            .collect::<FResult<Vec<_>>>()?;
        let rhs = g.mul_vec(ring, &mapped)?;
        for (l, r) in lhs.iter().zip(&rhs) {
            let (_, eq) = ring.eq_common(l, r)?;
            if !eq {
                ok = false;
                detail = format!("F'(g e_{j}) = {l} but g(F e_{j}) = {r}");
            }
        }
    }
    report.push(if ok {
        Check::pass("f-intertwining")
    } else {
        Check::fail("f-intertwining", detail)
    });

    // F1' g = u g F1 on Q-generators
    let mut ok = true;
    let mut detail = String::new();
    for (j, q) in w.q_generators()?.iter().enumerate() {
        // g(q) with presented coordinates
        let gq = if j < w.d_l {
            match &q_pres[j] {
                Some(p) => p.clone(),
                None => continue,
            }
        } else {
            // q = i * t_k: g(q) = α(i) * (column d_l + k), with the ideal
            // presentation transported through α and scaled
            let k = (j - w.d_l) % w.d_t.max(1);
            let ideal_gen = &q.t_coords[k];
            let mapped = alpha.map_ideal_elem(ideal_gen)?;
            let col = g.column(w.d_l + k);
            let mut l_coords = Vec::with_capacity(w_prime.d_l);
            let mut t_coords = Vec::with_capacity(w_prime.d_t);
            for (r, c) in col.iter().enumerate() {
                let scaled = w_prime.frame.ideal_scale(c, &mapped)?;
                if r < w_prime.d_l {
                    l_coords.push(w_prime.frame.ideal_value(&scaled)?);
                } else {
                    t_coords.push(scaled);
                }
            }
            QElement { l_coords, t_coords }
        };
        let lhs = w_prime.eval_f1(&gq)?;
        let f1q = w.eval_f1(q)?;
        let mapped = f1q
            .iter()
            .map(|c| alpha.apply(c))
            .collect::<FResult<Vec<_>>>()?;
        let gf1 = g.mul_vec(ring, &mapped)?;
        for (l, r) in lhs.iter().zip(&gf1) {
            let rhs = ring.mul(&alpha.unit, r)?;
            let (_, eq) = ring.eq_common(l, &rhs)?;
            if !eq {
                ok = false;
                detail = format!("F1'(g q) = {l} but u g F1(q) = {rhs}");
            }
        }
    }
    report.push(if ok {
        Check::pass("f1-intertwining")
    } else {
        Check::fail("f1-intertwining", detail)
    });

    Ok(report)
}

/// Structural-matrix equality of two windows over the same frame.
pub fn windows_equal(a: &Window, b: &Window) -> FResult<bool> {
    if a.d_l != b.d_l || a.d_t != b.d_t {
        return Ok(false);
    }
    Ok(mats_equal(&a.frame.ring, &a.a, &b.a)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{breuil_frame, dieudonne_frame, Eisenstein};
    use crate::morphism::{identity_morphism, kappa_morphism, series_quotient_morphism};
    use crate::ring::{Monomial, RingSpec, TruncatedSeries};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn u_plus_3() -> Eisenstein {
        Eisenstein::new(
            3,
            0,
            vec![(Monomial::u_power(1, 1), 1), (Monomial::one(1), 3)],
        )
        .unwrap()
    }

    fn unit_window(frame: &Frame, d_l: usize, d_t: usize) -> Window {
        let a = Mat::identity(&frame.ring, d_l + d_t).unwrap();
        Window::from_normal_decomposition(frame.clone(), d_l, d_t, a).unwrap()
    }

    #[test]
    fn unit_windows_evaluate() {
        let b2 = breuil_frame(3, 4, &u_plus_3(), 2, vec![]).unwrap();
        let ring = b2.ring.clone();
        // etale type: F(basis) = basis
        let etale = unit_window(&b2, 0, 1);
        let f = etale.eval_f(&[ring.one().unwrap()]).unwrap();
        assert_eq!(f[0], ring.one().unwrap());
        // multiplicative type: F(basis) = pi * basis
        let mult = unit_window(&b2, 1, 0);
        let f = mult.eval_f(&[ring.one().unwrap()]).unwrap();
        assert_eq!(f[0], b2.pi);
        // zero residue determinant is rejected
        let u = El::Series(TruncatedSeries::var_u(b2.ring.series_spec().unwrap()).unwrap());
        let bad = Mat::from_entries(1, 1, vec![u]);
        assert!(matches!(
            Window::from_normal_decomposition(b2.clone(), 1, 0, bad),
            Err(FrameError::Algebra(AlgebraError::NotInvertible))
        ));
    }

    #[test]
    fn window_axioms_hold_on_random_windows() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let b2 = breuil_frame(3, 4, &u_plus_3(), 2, vec![]).unwrap();
        let fr = dieudonne_frame(&RingSpec::zmod(3, 2).unwrap(), 4).unwrap();
        for frame in [b2, fr] {
            for (d_l, d_t) in [(1, 1), (2, 1), (0, 2)] {
                let a = Mat::sample_invertible(&frame.ring, d_l + d_t, &mut rng).unwrap();
                let w = Window::from_normal_decomposition(frame.clone(), d_l, d_t, a).unwrap();
                assert!(w.check_axioms(10, &mut rng).unwrap().passed());
            }
        }
    }

    #[test]
    fn q_generator_columns() {
        // F1 on an L-basis vector reads off the matching column of A;
        // F1(E * t_k) = f(1) * F(t_k) = the T-column
        let b2 = breuil_frame(3, 4, &u_plus_3(), 2, vec![]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let a = Mat::sample_invertible(&b2.ring, 2, &mut rng).unwrap();
        let w = Window::from_normal_decomposition(b2.clone(), 1, 1, a.clone()).unwrap();
        let gens = w.q_generators().unwrap();
        let f1_l = w.eval_f1(&gens[0]).unwrap();
        assert_eq!(f1_l, a.column(0));
        let f1_et = w.eval_f1(&gens[1]).unwrap();
        assert_eq!(f1_et, a.column(1));
    }

    #[test]
    fn base_change_identity_and_functoriality() {
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        let b3 = breuil_frame(3, 4, &u_plus_3(), 3, vec![]).unwrap();
        let b2 = breuil_frame(3, 4, &u_plus_3(), 2, vec![]).unwrap();
        let b1 = breuil_frame(3, 4, &u_plus_3(), 1, vec![]).unwrap();
        let a = Mat::sample_invertible(&b3.ring, 3, &mut rng).unwrap();
        let w = Window::from_normal_decomposition(b3.clone(), 2, 1, a).unwrap();
        // identity
        let id = identity_morphism(&b3).unwrap();
        assert!(windows_equal(&base_change(&id, &w).unwrap(), &w).unwrap());
        // two evaluation paths along the level chain
        let m32 = series_quotient_morphism(&b3, &b2).unwrap();
        let m21 = series_quotient_morphism(&b2, &b1).unwrap();
        let m31 = m21.compose(&m32).unwrap();
        let two_step = base_change(&m21, &base_change(&m32, &w).unwrap()).unwrap();
        let one_step = base_change(&m31, &w).unwrap();
        assert!(windows_equal(&two_step, &one_step).unwrap());
    }

    #[test]
    fn rank_one_multiplicative_window_under_kappa() {
        // F'(basis) = κ(f(E)) = p * u * basis after base change along κ
        let b2 = breuil_frame(3, 6, &u_plus_3(), 2, vec![]).unwrap();
        let fr2 = dieudonne_frame(&RingSpec::zmod(3, 2).unwrap(), 4).unwrap();
        let kappa = kappa_morphism(&b2, &fr2).unwrap();
        let w = unit_window(&b2, 1, 0);
        let wk = base_change(&kappa, &w).unwrap();
        let f = wk.eval_f(&[fr2.ring.one().unwrap()]).unwrap();
        let p_u = fr2
            .ring
            .mul(&fr2.ring.from_int(3).unwrap(), &kappa.unit)
            .unwrap();
        let (n, eq) = fr2.ring.eq_common(&f[0], &p_u).unwrap();
        assert!(n.unwrap() >= 3 && eq);
    }

    #[test]
    fn direct_sum_and_hodge() {
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        let b2 = breuil_frame(3, 4, &u_plus_3(), 2, vec![]).unwrap();
        let a1 = Mat::sample_invertible(&b2.ring, 2, &mut rng).unwrap();
        let w1 = Window::from_normal_decomposition(b2.clone(), 1, 1, a1).unwrap();
        let a2 = Mat::sample_invertible(&b2.ring, 1, &mut rng).unwrap();
        let w2 = Window::from_normal_decomposition(b2.clone(), 1, 0, a2).unwrap();
        let sum = direct_sum(&w1, &w2).unwrap();
        assert_eq!((sum.d_l, sum.d_t), (2, 1));
        assert!(sum.check_axioms(10, &mut rng).unwrap().passed());
        // Hodge filtration is blockwise
        let h = hodge_filtration(&sum);
        assert_eq!(h.rank, hodge_filtration(&w1).rank + hodge_filtration(&w2).rank);
        // summing with a rank-0 window changes nothing
        let zero = unit_window(&b2, 0, 0);
        let same = direct_sum(&w1, &zero).unwrap();
        assert!(windows_equal(&same, &w1).unwrap());
    }

    #[test]
    fn morphism_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(65);
        let b2 = breuil_frame(3, 4, &u_plus_3(), 2, vec![]).unwrap();
        let a = Mat::sample_invertible(&b2.ring, 2, &mut rng).unwrap();
        let w = Window::from_normal_decomposition(b2.clone(), 1, 1, a).unwrap();
        // identity is a morphism
        let id_m = identity_morphism(&b2).unwrap();
        let id = Mat::identity(&b2.ring, 2).unwrap();
        assert!(check_window_morphism(&id, &id_m, &w, &w).unwrap().passed());
        // the canonical map into a base change is a morphism
        let b1 = breuil_frame(3, 4, &u_plus_3(), 1, vec![]).unwrap();
        let m = series_quotient_morphism(&b2, &b1).unwrap();
        let wb = base_change(&m, &w).unwrap();
        let id_t = Mat::identity(&b1.ring, 2).unwrap();
        assert!(check_window_morphism(&id_t, &m, &w, &wb).unwrap().passed());
        // breaking the unit twist is detected: scaling by 1 + u is not a
        // morphism because f(1 + u) = 1 + u^3 differs from 1 + u
        let spec = b2.ring.series_spec().unwrap().clone();
        let bad_scalar = El::Series(
            TruncatedSeries::one(&spec)
                .add(&TruncatedSeries::var_u(&spec).unwrap())
                .unwrap(),
        );
        let bad = id.scale(&b2.ring, &bad_scalar).unwrap();
        let report = check_window_morphism(&bad, &id_m, &w, &w).unwrap();
        assert!(!report.passed());
    }
}
