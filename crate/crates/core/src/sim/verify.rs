//! Dense residual check of the decoupled factorization over a fixed grid.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{generate_channel, PdpProfile};
use crate::decoupling::verify_decomposition;
use crate::error::Result;
use crate::sim::seed;
use crate::waveform::{dirichlet_filter, GfdmConfig};

/// `(K, M, T, R)` points checked by [`verify_suite`].
pub const VERIFY_GRID: [(usize, usize, usize, usize); 4] = [(4, 2, 2, 2), (8, 2, 2, 2), (4, 4, 2, 2), (8, 4, 2, 3)];

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyCase {
    pub subcarriers: usize,
    pub subsymbols: usize,
    pub tx: usize,
    pub rx: usize,
    pub channels: usize,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub cases: Vec<VerifyCase>,
}

impl VerifyReport {
    pub fn max_residual(&self) -> f64 {
        self.cases.iter().map(|c| c.max_residual).fold(0.0, f64::max)
    }
}

/// Draws `n_channels` Rayleigh channels per grid point and records the
/// largest relative residual with the Dirichlet filter.
///
/// Channels have `max(1, D/2)` taps, longer than the default CP, to exercise
/// the circulant structure beyond the simulated channel lengths.
pub fn verify_suite(master_seed: u64, n_channels: usize) -> Result<VerifyReport> {
    let cases = VERIFY_GRID
        .iter()
        .enumerate()
        .map(|(gi, &(k, m, t, r))| {
            let cfg = GfdmConfig::new(k, m)?;
            let filter = dirichlet_filter(&cfg);
            let d = cfg.block_len();
            let pdp = PdpProfile::exponential((d / 2).max(1))?;
            let residuals = (0..n_channels)
                .into_par_iter()
                .map(|c| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(
                        master_seed,
                        seed::VERIFY_STREAM,
                        &[gi as u64, c as u64],
                    ));
                    let ch = generate_channel(t, r, &pdp, d, &mut rng)?;
                    verify_decomposition(&ch, &filter, &cfg)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(VerifyCase {
                subcarriers: k,
                subsymbols: m,
                tx: t,
                rx: r,
                channels: n_channels,
                max_residual: residuals.into_iter().fold(0.0, f64::max),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport { cases })
}
