//! Sorted QR decomposition by modified Gram–Schmidt.
//!
//! At step `i` the unprocessed column with the smallest residual norm is
//! moved to position `i`, so the layers detected first (bottom of `R`) get
//! the largest diagonal entries.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::CMatrix;

/// Columns below `SINGULAR_RTOL·‖F‖_F` are treated as linearly dependent.
pub const SINGULAR_RTOL: f64 = 1e-12;

/// `F·Π = Q·R` with `Π` the column permutation `perm` (`(F·Π)[:, i] = F[:, perm[i]]`).
#[derive(Debug, Clone, PartialEq)]
pub struct SqrdFactorization {
    /// Orthonormal columns; for the MMSE variant this is the extended `(m+n)×n` factor.
    pub q: CMatrix,
    /// Upper triangular with real positive diagonal.
    pub r: CMatrix,
    pub perm: Vec<usize>,
    /// Rows of `q` that act on received samples.
    pub data_rows: usize,
}

impl SqrdFactorization {
    /// `Q_dataᴴ·y`, the rotated observation.
    pub fn rotate(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        if y.len() != self.data_rows {
            return Err(Error::Dimension(format!(
                "observation of length {} for a factor with {} data rows",
                y.len(),
                self.data_rows
            )));
        }
        let n = self.q.ncols();
        let mut z = vec![Complex64::new(0.0, 0.0); n];
        for (j, zj) in z.iter_mut().enumerate() {
            let col = self.q.column(j);
            *zj = y.iter().zip(col.iter()).map(|(yi, qi)| qi.conj() * yi).sum();
        }
        Ok(z)
    }

    /// Scatters values given in sorted order back to original column order.
    pub fn unsort<T: Copy + Default>(&self, sorted: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); sorted.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            out[p] = sorted[i];
        }
        out
    }
}

/// Sorted QR of a tall (or square) matrix.
///
/// Ties in residual norm go to the lowest original column index.
pub fn sqrd(f: &CMatrix) -> Result<SqrdFactorization> {
    let (rows, cols) = f.shape();
    if rows < cols {
        return Err(Error::Dimension(format!(
            "sorted QR needs rows >= cols, got {rows}x{cols}"
        )));
    }
    let threshold = SINGULAR_RTOL * f.norm();
    let mut q = f.clone();
    let mut r = CMatrix::zeros(cols, cols);
    let mut perm: Vec<usize> = (0..cols).collect();
    let mut norms: Vec<f64> = (0..cols).map(|j| q.column(j).norm_squared()).collect();

    for i in 0..cols {
        let mut pick = i;
        for j in i + 1..cols {
            if norms[j] < norms[pick] || (norms[j] == norms[pick] && perm[j] < perm[pick]) {
                pick = j;
            }
        }
        if pick != i {
            q.swap_columns(i, pick);
            r.swap_columns(i, pick);
            perm.swap(i, pick);
            norms.swap(i, pick);
        }

        let rii = q.column(i).norm();
        if rii.is_nan() || rii <= threshold {
            return Err(Error::Singular {
                residual: rii,
                threshold,
            });
        }
        r[(i, i)] = Complex64::new(rii, 0.0);
        q.column_mut(i).unscale_mut(rii);

        for j in i + 1..cols {
            let rij: Complex64 = q.column(i).iter().zip(q.column(j).iter()).map(|(a, b)| a.conj() * b).sum();
            r[(i, j)] = rij;
            for row in 0..rows {
                let qi = q[(row, i)];
                q[(row, j)] -= rij * qi;
            }
            norms[j] -= rij.norm_sqr();
        }
    }
    Ok(SqrdFactorization {
        q,
        r,
        perm,
        data_rows: rows,
    })
}

/// Sorted QR of the regularized matrix `[H; √(N0/E_s)·I]`.
///
/// `q` keeps all `m + n` rows; [`SqrdFactorization::rotate`] uses the top
/// `m`, which is the part that multiplies received data.
pub fn mmse_sqrd(h: &CMatrix, n0: f64, es: f64) -> Result<SqrdFactorization> {
    if n0.is_nan() || n0 < 0.0 || es.is_nan() || es <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "need N0 >= 0 and E_s > 0 (got N0={n0}, E_s={es})"
        )));
    }
    let (m, n) = h.shape();
    let sigma = (n0 / es).sqrt();
    let mut ext = CMatrix::zeros(m + n, n);
    ext.view_mut((0, 0), (m, n)).copy_from(h);
    for j in 0..n {
        ext[(m + j, j)] = Complex64::new(sigma, 0.0);
    }
    let mut fac = sqrd(&ext)?;
    fac.data_rows = m;
    Ok(fac)
}
