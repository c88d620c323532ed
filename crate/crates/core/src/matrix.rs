//! Dense matrices over a frame ring, with exact inversion over local rings:
//! invert the residue matrix over `F_p` by Gaussian elimination, then lift
//! through the nilpotent maximal ideal by Newton iteration.

use crate::el::{El, RingHandle};
use crate::error::{AResult, AlgebraError};
use crate::ring::mod_inverse;
use rand::Rng;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    entries: Vec<El>,
}

impl Mat {
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<El>) -> Self {
        assert_eq!(entries.len(), rows * cols);
        Mat {
            rows,
            cols,
            entries,
        }
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> AResult<El>,
    ) -> AResult<Self> {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c)?);
            }
        }
        Ok(Mat {
            rows,
            cols,
            entries,
        })
    }

    pub fn zero(ring: &RingHandle, rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            entries: vec![ring.zero(); rows * cols],
        }
    }

    pub fn identity(ring: &RingHandle, n: usize) -> AResult<Self> {
        let mut m = Self::zero(ring, n, n);
        let one = ring.one()?;
        for i in 0..n {
            m.set(i, i, one.clone());
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &El {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: El) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn column(&self, c: usize) -> Vec<El> {
        (0..self.rows).map(|r| self.at(r, c).clone()).collect()
    }

    pub fn map(&self, mut f: impl FnMut(&El) -> AResult<El>) -> AResult<Mat> {
        let entries = self
            .entries
            .iter()
            .map(|e| f(e))
            .collect::<AResult<Vec<_>>>()?;
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    pub fn add(&self, ring: &RingHandle, other: &Mat) -> AResult<Mat> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| ring.add(a, b))
            .collect::<AResult<Vec<_>>>()?;
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    pub fn sub(&self, ring: &RingHandle, other: &Mat) -> AResult<Mat> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| ring.sub(a, b))
            .collect::<AResult<Vec<_>>>()?;
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    pub fn mul(&self, ring: &RingHandle, other: &Mat) -> AResult<Mat> {
        assert_eq!(self.cols, other.rows);
        Mat::from_fn(self.rows, other.cols, |r, c| {
            let mut acc = ring.zero();
            for k in 0..self.cols {
                let t = ring.mul(self.at(r, k), other.at(k, c))?;
                acc = if k == 0 { t } else { ring.add(&acc, &t)? };
            }
            Ok(acc)
        })
    }

    pub fn mul_vec(&self, ring: &RingHandle, v: &[El]) -> AResult<Vec<El>> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                let mut acc = ring.zero();
                for k in 0..self.cols {
                    let t = ring.mul(self.at(r, k), &v[k])?;
                    acc = if k == 0 { t } else { ring.add(&acc, &t)? };
                }
                Ok(acc)
            })
            .collect()
    }

    pub fn scale(&self, ring: &RingHandle, s: &El) -> AResult<Mat> {
        self.map(|e| ring.mul(s, e))
    }

    /// Multiply the given columns by `s` (used for the unit twist of the
    /// L-block under base change).
    pub fn scale_columns(&self, ring: &RingHandle, s: &El, cols: &[usize]) -> AResult<Mat> {
        let mut out = self.clone();
        for &c in cols {
            for r in 0..self.rows {
                out.set(r, c, ring.mul(s, self.at(r, c))?);
            }
        }
        Ok(out)
    }

    /// Residue matrix over `F_p`.
    pub fn residue(&self, ring: &RingHandle) -> Vec<u64> {
        self.entries.iter().map(|e| ring.residue_fp(e)).collect()
    }

    /// Exact inverse over a local ring: residue inverse over `F_p`, then
    /// Newton iteration `Y <- Y(2I - AY)` through the nilpotent maximal ideal.
    pub fn invert(&self, ring: &RingHandle) -> AResult<Mat> {
        if self.rows != self.cols {
            return Err(AlgebraError::NotInvertible);
        }
        let n = self.rows;
        let p = ring.p();
        let res = self.residue(ring);
        let res_inv = fp_invert(p, n, &res).ok_or(AlgebraError::NotInvertible)?;
        let mut y = Mat::from_fn(n, n, |r, c| ring.from_int(res_inv[r * n + c] as i128))?;
        let id = Mat::identity(ring, n)?;
        let two_id = id.add(ring, &id)?;
        for _ in 0..64 {
            let ay = self.mul(ring, &y)?;
            if mats_equal(ring, &ay, &id)? {
                return Ok(y);
            }
            y = y.mul(ring, &two_id.sub(ring, &ay)?)?;
        }
        Err(AlgebraError::NotInvertible)
    }

    pub fn render(&self) -> String {
        let mut rows = Vec::with_capacity(self.rows);
        for r in 0..self.rows {
            let row = (0..self.cols)
                .map(|c| self.at(r, c).to_string())
                .collect::<Vec<_>>()
                .join(", ");
            rows.push(format!("[{row}]"));
        }
        format!("[{}]", rows.join("; "))
    }

    pub fn sample<R: Rng>(ring: &RingHandle, rows: usize, cols: usize, rng: &mut R) -> Mat {
        Mat {
            rows,
            cols,
            entries: (0..rows * cols).map(|_| ring.sample(rng)).collect(),
        }
    }

    /// Random matrix with invertible residue.
    pub fn sample_invertible<R: Rng>(ring: &RingHandle, n: usize, rng: &mut R) -> AResult<Mat> {
        for _ in 0..256 {
            let m = Self::sample(ring, n, n, rng);
            if fp_invert(ring.p(), n, &m.residue(ring)).is_some() {
                return Ok(m);
            }
        }
        Mat::identity(ring, n)
    }
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Equality of all entries at the common tracked length.
pub fn mats_equal(ring: &RingHandle, a: &Mat, b: &Mat) -> AResult<bool> {
    if (a.rows, a.cols) != (b.rows, b.cols) {
        return Ok(false);
    }
    for (x, y) in a.entries.iter().zip(&b.entries) {
        let (_, eq) = ring.eq_common(x, y)?;
        if !eq {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Minimal common tracked Witt length across entries; `None` for series.
pub fn min_tracked_len(a: &Mat) -> Option<usize> {
    a.entries.iter().filter_map(|e| e.witt_len()).min()
}

/// Inverse of an `n x n` matrix over `F_p` by Gauss-Jordan elimination.
pub fn fp_invert(p: u64, n: usize, m: &[u64]) -> Option<Vec<u64>> {
    let p = p as i128;
    let mut a: Vec<i128> = m.iter().map(|&c| (c as i128) % p).collect();
    let mut inv: Vec<i128> = vec![0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1;
    }
    for col in 0..n {
        let pivot_row = (col..n).find(|&r| a[r * n + col] % p != 0)?;
        if pivot_row != col {
            for c in 0..n {
                a.swap(col * n + c, pivot_row * n + c);
                inv.swap(col * n + c, pivot_row * n + c);
            }
        }
        let piv = a[col * n + col];
        let piv_inv = mod_inverse(piv as u128, p as u128)? as i128;
        for c in 0..n {
            a[col * n + c] = (a[col * n + c] * piv_inv) % p;
            inv[col * n + c] = (inv[col * n + c] * piv_inv) % p;
        }
        for r in 0..n {
            if r == col || a[r * n + col] == 0 {
                continue;
            }
            let f = a[r * n + col];
            for c in 0..n {
                a[r * n + c] = ((a[r * n + c] - f * a[col * n + c]) % p + p) % p;
                inv[r * n + c] = ((inv[r * n + c] - f * inv[col * n + c]) % p + p) % p;
            }
        }
    }
    Some(inv.iter().map(|&c| c as u64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{RingSpec, TruncatedSeries};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn invert_unipotent_series_matrix() {
        // [[1, u], [0, 1]]^{-1} = [[1, -u], [0, 1]]
        let spec = RingSpec::new(3, 2, 3, vec![]).unwrap();
        let ring = RingHandle::Series(spec.clone());
        let u = El::Series(TruncatedSeries::var_u(&spec).unwrap());
        let m = Mat::from_entries(
            2,
            2,
            vec![ring.one().unwrap(), u.clone(), ring.zero(), ring.one().unwrap()],
        );
        let inv = m.invert(&ring).unwrap();
        assert_eq!(inv.at(0, 1), &ring.neg(&u).unwrap());
        let id = Mat::identity(&ring, 2).unwrap();
        assert!(mats_equal(&ring, &m.mul(&ring, &inv).unwrap(), &id).unwrap());
        // singular residue
        let bad = Mat::from_entries(
            2,
            2,
            vec![u.clone(), ring.zero(), ring.zero(), ring.one().unwrap()],
        );
        assert_eq!(bad.invert(&ring), Err(AlgebraError::NotInvertible));
    }

    #[test]
    fn invert_random_matrices_both_rings() {
        let series = RingHandle::Series(RingSpec::new(3, 3, 2, vec![2]).unwrap());
        let witt = RingHandle::Witt {
            base: RingSpec::zmod(3, 2).unwrap(),
            budget: 3,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for ring in [series, witt] {
            for _ in 0..8 {
                let m = Mat::sample_invertible(&ring, 2, &mut rng).unwrap();
                let inv = m.invert(&ring).unwrap();
                let prod = m.mul(&ring, &inv).unwrap();
                assert!(mats_equal(&ring, &prod, &Mat::identity(&ring, 2).unwrap()).unwrap());
            }
        }
    }
}
