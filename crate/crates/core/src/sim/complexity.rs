//! Closed-form complex-multiplication counts for the QR and SIC stages.
//!
//! All arithmetic is on `u128`; every division below is exact.

use crate::error::{Error, Result};
use crate::sim::Scheme;

/// Formula-level CM counts of one receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Table1Counts {
    /// QR stage: SQRD (proposed, OFDM) or MMSE-SQRD of the full matrix (baseline).
    pub cm_sqrd: u128,
    /// Interference cancellation between groups, per block.
    pub cm_sic: u128,
}

impl Table1Counts {
    pub fn total(&self) -> u128 {
        self.cm_sqrd + self.cm_sic
    }
}

/// Evaluates the count formulas for `scheme` at `(K, M, T, R)`.
///
/// OFDM is evaluated with `D = K·M` bins. The two baseline variants share one
/// formula since the filter does not change the matrix dimensions.
///
/// ```
/// use gfdm_mimo::sim::{table1_cm, Scheme};
///
/// let c = table1_cm(&Scheme::ProposedDirichlet, 256, 4, 2, 2).unwrap();
/// assert_eq!((c.cm_sqrd, c.cm_sic), (154_624, 0));
/// ```
pub fn table1_cm(scheme: &Scheme, k: usize, m: usize, t: usize, r: usize) -> Result<Table1Counts> {
    if k == 0 || m == 0 || t == 0 || r == 0 {
        return Err(Error::InvalidConfig(format!(
            "dimensions must be positive (K={k}, M={m}, T={t}, R={r})"
        )));
    }
    let (k, m, t, r) = (k as u128, m as u128, t as u128, r as u128);
    let counts = match scheme {
        Scheme::Ofdm => {
            let d = k * m;
            Table1Counts {
                cm_sqrd: d * t * t * r + d * t * r + (d * t * t - d * t) / 2,
                cm_sic: 0,
            }
        }
        Scheme::BaselineDirichlet | Scheme::BaselineRc(_) => {
            let n = k * m * t;
            Table1Counts {
                cm_sqrd: k.pow(3) * m.pow(3) * t * t * r
                    + k * k * m * m * t * r
                    + (2 * n.pow(3) + 3 * n * n + n) / 6,
                cm_sic: n * n,
            }
        }
        Scheme::ProposedDirichlet => Table1Counts {
            cm_sqrd: k * m.pow(3) * t * t * r + k * m * m * t * r + (k * m * m * t * t - k * m * t) / 2,
            cm_sic: 0,
        },
    };
    Ok(counts)
}
