//! Exact linear algebra over the chain ring `Z/p^N`.
//!
//! Every matrix over `Z/p^N` has a Smith normal form `U M V = diag(p^{e_i})`
//! with `U, V` invertible, obtained by always pivoting on an entry of minimal
//! p-adic valuation. This decides solvability of linear systems exactly and
//! describes the full solution set, which is what exact division by zero
//! divisors and Hom-set enumeration need.

use super::series::{mod_inverse, TruncatedSeries};
#[cfg(test)]
use super::spec::RingSpec;
use crate::error::{AResult, AlgebraError};

/// p-adic valuation of a residue, capped at the precision.
fn valuation(p: u64, precision: u32, c: u128) -> u32 {
    if c == 0 {
        return precision;
    }
    let mut v = 0;
    let mut c = c;
    while c % p as u128 == 0 {
        c /= p as u128;
        v += 1;
    }
    v
}

/// Solution set of `M x = b` over `Z/p^N`: one particular solution plus
/// kernel generators with their additive orders `p^{order}`.
#[derive(Debug, Clone)]
pub struct SolutionSet {
    pub particular: Vec<u128>,
    /// (generator vector, k) pairs; the generator has order p^k, so its
    /// distinct multiples are 0..p^k - 1.
    pub kernel: Vec<(Vec<u128>, u32)>,
}

impl SolutionSet {
    /// Number of solutions, or `None` if it exceeds `cap`.
    pub fn count_capped(&self, p: u64, cap: u128) -> Option<u128> {
        let mut n: u128 = 1;
        for (_, k) in &self.kernel {
            n = n.checked_mul((p as u128).pow(*k))?;
            if n > cap {
                return None;
            }
        }
        Some(n)
    }

    /// Enumerate all solutions (caller must have checked the count).
    pub fn enumerate(&self, p: u64, modulus: u128) -> Vec<Vec<u128>> {
        let mut out = vec![self.particular.clone()];
        for (gen, k) in &self.kernel {
            let reps = (p as u128).pow(*k);
            let mut next = Vec::with_capacity(out.len() * reps as usize);
            for sol in &out {
                for mult in 0..reps {
                    let v: Vec<u128> = sol
                        .iter()
                        .zip(gen)
                        .map(|(&s, &g)| (s + mult * g) % modulus)
                        .collect();
                    next.push(v);
                }
            }
            out = next;
        }
        out
    }
}

/// Solve `M x = b` over `Z/p^N` exactly. `m` is row-major, `rows x cols`.
/// Returns `None` when no solution exists.
pub fn solve(
    p: u64,
    precision: u32,
    rows: usize,
    cols: usize,
    m: &[u128],
    b: &[u128],
) -> Option<SolutionSet> {
    assert_eq!(m.len(), rows * cols);
    assert_eq!(b.len(), rows);
    let modulus = (p as u128).pow(precision);
    let mut a: Vec<u128> = m.iter().map(|&c| c % modulus).collect();
    let mut rhs: Vec<u128> = b.iter().map(|&c| c % modulus).collect();
    // col_tf tracks the accumulated column transform V: x = V y.
    let mut col_tf: Vec<u128> = vec![0; cols * cols];
    for i in 0..cols {
        col_tf[i * cols + i] = 1;
    }

    let at = |a: &Vec<u128>, r: usize, c: usize| a[r * cols + c];
    let k = rows.min(cols);
    let mut pivots: Vec<u32> = Vec::new(); // valuations of the diagonal

    for step in 0..k {
        // find the minimal-valuation entry in the remaining block
        let mut best: Option<(usize, usize, u32)> = None;
        for r in step..rows {
            for c in step..cols {
                let v = valuation(p, precision, at(&a, r, c));
                if v < precision && best.map(|(_, _, bv)| v < bv).unwrap_or(true) {
                    best = Some((r, c, v));
                }
            }
        }
        let Some((pr, pc, pv)) = best else {
            break; // remaining block is zero
        };
        // move pivot to (step, step)
        if pr != step {
            for c in 0..cols {
                a.swap(step * cols + c, pr * cols + c);
            }
            rhs.swap(step, pr);
        }
        if pc != step {
            for r in 0..rows {
                a.swap(r * cols + step, r * cols + pc);
            }
            for r in 0..cols {
                col_tf.swap(r * cols + step, r * cols + pc);
            }
        }
        // normalize pivot to exactly p^pv
        let pivot = at(&a, step, step);
        let unit = pivot / (p as u128).pow(pv);
        let unit_inv = mod_inverse(unit % modulus, modulus).expect("unit part invertible");
        for c in 0..cols {
            a[step * cols + c] = (a[step * cols + c] * unit_inv) % modulus;
        }
        rhs[step] = (rhs[step] * unit_inv) % modulus;
        let pivot = (p as u128).pow(pv);
        // clear the pivot column below (and above) via row ops
        for r in 0..rows {
            if r == step {
                continue;
            }
            let c0 = at(&a, r, step);
            if c0 == 0 {
                continue;
            }
            // c0 has valuation >= pv, so the factor is exact
            let factor = c0 / pivot;
            for c in 0..cols {
                let sub = (factor * at(&a, step, c)) % modulus;
                a[r * cols + c] = (a[r * cols + c] + modulus - sub) % modulus;
            }
            let sub = (factor * rhs[step]) % modulus;
            rhs[r] = (rhs[r] + modulus - sub) % modulus;
        }
        // clear the pivot row to the right via column ops (recorded in col_tf)
        for c in (step + 1)..cols {
            let c0 = at(&a, step, c);
            if c0 == 0 {
                continue;
            }
            let factor = c0 / pivot;
            for r in 0..rows {
                let sub = (factor * at(&a, r, step)) % modulus;
                a[r * cols + c] = (a[r * cols + c] + modulus - sub) % modulus;
                let sub_tf = (factor * col_tf[r * cols + step]) % modulus;
                col_tf[r * cols + c] = (col_tf[r * cols + c] + modulus - sub_tf) % modulus;
            }
        }
        pivots.push(pv);
    }

    // solvability: diagonal rows need rhs divisible by the pivot, zero rows need rhs 0
    let rank = pivots.len();
    let mut y = vec![0u128; cols];
    for (i, &pv) in pivots.iter().enumerate() {
        let d = (p as u128).pow(pv);
        if rhs[i] % d != 0 {
            return None;
        }
        y[i] = rhs[i] / d;
    }
    for r in rank..rows {
        if rhs[r] != 0 {
            return None;
        }
    }
    // particular solution x = V y
    let mut particular = vec![0u128; cols];
    for r in 0..cols {
        let mut acc: u128 = 0;
        for c in 0..cols {
            acc = (acc + col_tf[r * cols + c] * y[c]) % modulus;
        }
        particular[r] = acc;
    }
    // kernel generators: p^{N - e_i} * V e_i for diagonal entries, V e_j for zero columns
    let mut kernel = Vec::new();
    for (i, &pv) in pivots.iter().enumerate() {
        if pv == 0 {
            continue;
        }
        let scale = (p as u128).pow(precision - pv);
        let gen: Vec<u128> = (0..cols)
            .map(|r| (col_tf[r * cols + i] * scale) % modulus)
            .collect();
        kernel.push((gen, pv));
    }
    for j in rank..cols {
        let gen: Vec<u128> = (0..cols).map(|r| col_tf[r * cols + j]).collect();
        kernel.push((gen, precision));
    }
    Some(SolutionSet { particular, kernel })
}

/// Exact division in a truncated series ring, decided by linear solving over
/// `Z/p^N` on the monomial basis. Returns some `q` with `d*q = x`, or
/// `NotDivisible` when no exact quotient exists. When the divisor is a zero
/// divisor the returned witness is the particular solution of the solver;
/// frame code never relies on this search and always carries witnesses.
pub fn divide_exact(x: &TruncatedSeries, d: &TruncatedSeries) -> AResult<TruncatedSeries> {
    if x.spec() != d.spec() {
        return Err(AlgebraError::SpecMismatch(
            "dividend and divisor in different rings".into(),
        ));
    }
    let spec = x.spec().clone();
    let basis = spec.monomials();
    let n = basis.len();
    // multiplication-by-d matrix on the monomial basis
    let mut m = vec![0u128; n * n];
    for (j, bm) in basis.iter().enumerate() {
        let col = d.mul(&TruncatedSeries::from_terms(&spec, &[(bm.clone(), 1)])?)?;
        for (i, im) in basis.iter().enumerate() {
            m[i * n + j] = col.coeff(im);
        }
    }
    let b = x.coeff_vector(&basis);
    let sol = solve(spec.p(), spec.precision(), n, n, &m, &b)
        .ok_or(AlgebraError::NotDivisible)?;
    let q = TruncatedSeries::from_coeff_vector(&spec, &basis, &sol.particular);
    debug_assert_eq!(d.mul(&q).unwrap(), *x);
    Ok(q)
}

/// All exact quotients of `x` by `d`, capped; used by brute-force oracles.
pub fn all_quotients(
    x: &TruncatedSeries,
    d: &TruncatedSeries,
    cap: u128,
) -> AResult<Option<Vec<TruncatedSeries>>> {
    let spec = x.spec().clone();
    let basis = spec.monomials();
    let n = basis.len();
    let mut m = vec![0u128; n * n];
    for (j, bm) in basis.iter().enumerate() {
        let col = d.mul(&TruncatedSeries::from_terms(&spec, &[(bm.clone(), 1)])?)?;
        for (i, im) in basis.iter().enumerate() {
            m[i * n + j] = col.coeff(im);
        }
    }
    let b = x.coeff_vector(&basis);
    let Some(sol) = solve(spec.p(), spec.precision(), n, n, &m, &b) else {
        return Ok(None);
    };
    if sol.count_capped(spec.p(), cap).is_none() {
        return Err(AlgebraError::Unsupported(format!(
            "solution set larger than cap {cap}"
        )));
    }
    let vecs = sol.enumerate(spec.p(), spec.modulus());
    Ok(Some(
        vecs.iter()
            .map(|v| TruncatedSeries::from_coeff_vector(&spec, &basis, v))
            .collect(),
    ))
}
