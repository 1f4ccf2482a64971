//! Detection: sorted QR, sphere decoding and the three receivers.
//!
//! - [`ProposedDetector`] works on the decoupled system: one plain SQRD and one
//!   sphere decoder call of size `MT` per subcarrier. The transform `U` is
//!   unitary and `blkdiag(F_k)` is block diagonal, so per-block ML is global ML.
//! - [`BaselineDetector`] factors the full `H̃` with MMSE-SQRD and decodes the
//!   triangular system from the bottom in groups of `MT` symbols, cancelling
//!   each decided group from the rows above it.
//! - [`OfdmDetector`] solves one `R×T` problem per frequency bin.
//!
//! All detectors return constellation indices in antenna-major order
//! (`t·D + m·K + k`).

mod sphere;
mod sqrd;

pub use sphere::{sphere_decode, DetectionStats};
pub use sqrd::{mmse_sqrd, sqrd, SqrdFactorization, SINGULAR_RTOL};

use log::debug;
use num_complex::Complex64;

use crate::channel::MimoChannel;
use crate::constellation::Constellation;
use crate::decoupling::{data_permutation_inverse, BlockSystem};
use crate::error::{Error, Result};
use crate::fft;
use crate::CMatrix;

/// Regularization used when the baseline meets a rank-deficient `H̃` at `N0 = 0`.
pub const RANK_FALLBACK_REGULARIZATION: f64 = 1e-12;

/// Default candidate budget of [`exhaustive_ml`].
pub const EXHAUSTIVE_BUDGET: u128 = 1 << 20;

/// Per-subcarrier ML detection on a decoupled system.
#[derive(Debug, Clone)]
pub struct ProposedDetector {
    factors: Vec<SqrdFactorization>,
    subcarriers: usize,
    subsymbols: usize,
    tx: usize,
    rx: usize,
}

impl ProposedDetector {
    /// Factors every `F_k`; independent of the noise level.
    pub fn new(blocks: &BlockSystem) -> Result<Self> {
        let factors = blocks.blocks().iter().map(sqrd).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            factors,
            subcarriers: blocks.subcarriers(),
            subsymbols: blocks.subsymbols(),
            tx: blocks.tx(),
            rx: blocks.rx(),
        })
    }

    pub fn factors(&self) -> &[SqrdFactorization] {
        &self.factors
    }

    /// Detects all `K·M·T` symbols from `ȳ = U·y`.
    pub fn detect(&self, y_bar: &[Complex64], cs: &Constellation, stats: &mut DetectionStats) -> Result<Vec<usize>> {
        let seg_in = self.subsymbols * self.rx;
        let seg_out = self.subsymbols * self.tx;
        if y_bar.len() != self.subcarriers * seg_in {
            return Err(Error::Dimension(format!(
                "transformed observation has {} samples, expected {}",
                y_bar.len(),
                self.subcarriers * seg_in
            )));
        }
        let mut d_bar = Vec::with_capacity(self.subcarriers * seg_out);
        for (k, fac) in self.factors.iter().enumerate() {
            let z = fac.rotate(&y_bar[k * seg_in..(k + 1) * seg_in])?;
            let sorted = sphere_decode(&fac.r, &z, cs, stats);
            d_bar.extend(fac.unsort(&sorted));
        }
        data_permutation_inverse(&d_bar, self.subcarriers, self.subsymbols, self.tx)
    }
}

/// One-shot form of [`ProposedDetector`]: factor the blocks, then detect.
pub fn detect_proposed(
    y_bar: &[Complex64],
    blocks: &BlockSystem,
    cs: &Constellation,
    stats: &mut DetectionStats,
) -> Result<Vec<usize>> {
    ProposedDetector::new(blocks)?.detect(y_bar, cs, stats)
}

/// MMSE-SQRD of the full matrix with grouped sphere decoding and SIC.
#[derive(Debug, Clone)]
pub struct BaselineDetector {
    factor: SqrdFactorization,
    groups: Vec<(usize, usize)>,
    group_r: Vec<CMatrix>,
}

impl BaselineDetector {
    /// Factors `[H̃; √(N0/E_s)·I]`. Groups of `group_size` symbols are formed
    /// along the sorted order starting from the last row; the topmost group
    /// takes the remainder when `group_size` does not divide the dimension.
    pub fn new(h_tilde: &CMatrix, n0: f64, es: f64, group_size: usize) -> Result<Self> {
        if group_size == 0 {
            return Err(Error::InvalidConfig("group size must be positive".into()));
        }
        let factor = match mmse_sqrd(h_tilde, n0, es) {
            Err(Error::Singular { .. }) if n0 == 0.0 => {
                debug!(
                    "rank-deficient channel matrix without noise; regularizing with N0/E_s = {RANK_FALLBACK_REGULARIZATION:e}"
                );
                mmse_sqrd(h_tilde, RANK_FALLBACK_REGULARIZATION * es, es)?
            }
            other => other?,
        };
        let n = factor.r.ncols();
        let mut groups = Vec::new();
        let mut end = n;
        while end > 0 {
            let start = end.saturating_sub(group_size);
            groups.push((start, end));
            end = start;
        }
        let group_r = groups
            .iter()
            .map(|&(s, e)| factor.r.view((s, s), (e - s, e - s)).into_owned())
            .collect();
        Ok(Self {
            factor,
            groups,
            group_r,
        })
    }

    pub fn factor(&self) -> &SqrdFactorization {
        &self.factor
    }

    /// Group boundaries `[start, end)` in decoding order.
    pub fn groups(&self) -> &[(usize, usize)] {
        &self.groups
    }

    /// Detects from the stacked time-domain observation `y` (length `R·D`).
    pub fn detect(&self, y: &[Complex64], cs: &Constellation, stats: &mut DetectionStats) -> Result<Vec<usize>> {
        let z = self.factor.rotate(y)?;
        let r = &self.factor.r;
        let n = r.ncols();
        let mut decided = vec![0usize; n];
        let mut points = vec![Complex64::new(0.0, 0.0); n];
        for (&(start, end), rg) in self.groups.iter().zip(&self.group_r) {
            let zg: Vec<Complex64> = (start..end)
                .map(|i| {
                    let mut v = z[i];
                    for j in end..n {
                        v -= r[(i, j)] * points[j];
                    }
                    v
                })
                .collect();
            let s = sphere_decode(rg, &zg, cs, stats);
            for (offset, &idx) in s.iter().enumerate() {
                decided[start + offset] = idx;
                points[start + offset] = cs.point(idx);
            }
        }
        Ok(self.factor.unsort(&decided))
    }
}

/// One-shot form of [`BaselineDetector`].
pub fn detect_baseline_near_ml(
    y: &[Complex64],
    h_tilde: &CMatrix,
    cs: &Constellation,
    n0: f64,
    group_size: usize,
    stats: &mut DetectionStats,
) -> Result<Vec<usize>> {
    BaselineDetector::new(h_tilde, n0, cs.average_energy(), group_size)?.detect(y, cs, stats)
}

/// Per-bin detection for MIMO-OFDM (`A = W_Dᴴ`).
#[derive(Debug, Clone)]
pub struct OfdmDetector {
    factors: Vec<SqrdFactorization>,
    tx: usize,
    rx: usize,
}

impl OfdmDetector {
    /// Factors the `R×T` matrix of channel gains `h_f^{(r,t)}[q]` for every bin `q`.
    pub fn new(ch: &MimoChannel) -> Result<Self> {
        let (tx, rx) = (ch.tx(), ch.rx());
        let factors = (0..ch.block_len())
            .map(|q| sqrd(&CMatrix::from_fn(rx, tx, |r, t| ch.freq(r, t)[q])))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { factors, tx, rx })
    }

    /// Detects from per-antenna time-domain blocks.
    pub fn detect(&self, y: &[Vec<Complex64>], cs: &Constellation, stats: &mut DetectionStats) -> Result<Vec<usize>> {
        let d = self.factors.len();
        if y.len() != self.rx || y.iter().any(|v| v.len() != d) {
            return Err(Error::Dimension(format!("expected {} streams of length {d}", self.rx)));
        }
        let spectra: Vec<Vec<Complex64>> = y.iter().map(|v| fft::dft(v)).collect();
        let mut out = vec![0usize; self.tx * d];
        let mut obs = vec![Complex64::new(0.0, 0.0); self.rx];
        for (q, fac) in self.factors.iter().enumerate() {
            for (r, o) in obs.iter_mut().enumerate() {
                *o = spectra[r][q];
            }
            let z = fac.rotate(&obs)?;
            let s = fac.unsort(&sphere_decode(&fac.r, &z, cs, stats));
            for (t, idx) in s.into_iter().enumerate() {
                out[t * d + q] = idx;
            }
        }
        Ok(out)
    }
}

/// One-shot form of [`OfdmDetector`].
pub fn detect_ofdm(
    y: &[Vec<Complex64>],
    ch: &MimoChannel,
    cs: &Constellation,
    stats: &mut DetectionStats,
) -> Result<Vec<usize>> {
    OfdmDetector::new(ch)?.detect(y, cs, stats)
}

/// `argmin_d ‖y − H̃·d‖²` by full enumeration, with candidates visited in
/// lexicographic order of their index vectors (first coordinate most
/// significant); the first minimum found is kept.
pub fn exhaustive_ml(y: &[Complex64], h: &CMatrix, cs: &Constellation, budget: u128) -> Result<Vec<usize>> {
    let (rows, n) = h.shape();
    if y.len() != rows {
        return Err(Error::Dimension(format!("observation length {} != {rows}", y.len())));
    }
    let q = cs.len();
    let candidates = (q as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if candidates > budget {
        return Err(Error::BudgetExceeded { candidates, budget });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    // contrib[j][c] = H̃[:, j]·point_c
    let contrib: Vec<Vec<Vec<Complex64>>> = (0..n)
        .map(|j| {
            cs.points()
                .iter()
                .map(|&p| h.column(j).iter().map(|&v| v * p).collect())
                .collect()
        })
        .collect();
    // residual[j] = y − Σ_{i<j} contrib[i][idx[i]]
    let mut residual = vec![y.to_vec(); n + 1];
    let mut idx = vec![0usize; n];
    let mut best = idx.clone();
    let mut best_metric = f64::INFINITY;
    let mut fresh = 0;
    loop {
        for j in fresh..n {
            let (head, tail) = residual.split_at_mut(j + 1);
            for ((dst, src), c) in tail[0].iter_mut().zip(&head[j]).zip(&contrib[j][idx[j]]) {
                *dst = src - c;
            }
        }
        let metric: f64 = residual[n].iter().map(|v| v.norm_sqr()).sum();
        if metric < best_metric {
            best_metric = metric;
            best.copy_from_slice(&idx);
        }
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(best);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < q {
                break;
            }
            idx[pos] = 0;
        }
        fresh = pos;
    }
}
