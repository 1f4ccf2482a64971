//! Seeded Monte Carlo sweeps, complexity formulas and CSV reports.
//!
//! A sweep visits every `(SNR point, channel realization)` pair. The channel
//! of realization `c` depends only on `(seed, c)`, so all SNR points and all
//! schemes see the same channels. Data and noise of block `b` come from a
//! generator keyed by `(seed, c, b, SNR index)`; every scheme detects the same
//! data indices under the same noise samples. Work items run in parallel and
//! their integer counters are summed, so the result does not depend on
//! scheduling.

mod complexity;
mod config;
mod report;
pub mod seed;
mod verify;

pub use complexity::{table1_cm, Table1Counts};
pub use config::{default_cp_len, Overrides, Scheme, SimConfig, DEFAULT_ROLL_OFF, DESK_SCALE_MAX_BLOCK};
pub use report::{format_sig, render_csv, write_report, CSV_HEADER};
pub use verify::{verify_suite, VerifyCase, VerifyReport, VERIFY_GRID};

use std::time::{Duration, Instant};

use log::{info, warn};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::channel::{apply_channel, assemble_full_matrix, generate_channel, MimoChannel, PdpProfile};
use crate::constellation::Constellation;
use crate::decoupling::{compute_blocks, receive_transform};
use crate::detect::{BaselineDetector, DetectionStats, OfdmDetector, ProposedDetector};
use crate::error::Result;
use crate::fft;
use crate::waveform::{build_transmitter_matrix, fast_modulate, modulate, GfdmConfig, PrototypeFilter, TransmitterMatrix};

/// Aggregated outcome of one `(SNR, scheme)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub snr_db: f64,
    pub scheme: Scheme,
    pub filter: String,
    pub subcarriers: usize,
    pub subsymbols: usize,
    pub tx: usize,
    pub rx: usize,
    /// Wrongly detected symbols.
    pub errors: u64,
    /// Detected symbols (`K·M·T` per block).
    pub symbols: u64,
    /// Formula count of the QR stage, once per channel realization.
    pub cm_sqrd: u128,
    /// Formula count of the SIC stage, per block.
    pub cm_sic: u128,
    /// Measured sphere decoder CMs summed over all blocks.
    pub cm_sd: u64,
    /// Sphere decoder nodes summed over all blocks.
    pub sd_nodes: u64,
    pub blocks: u64,
    pub channels: u64,
    /// Detection time summed over worker threads; not part of the report.
    pub wall_time: Duration,
}

impl TrialRecord {
    pub fn ser(&self) -> f64 {
        if self.symbols == 0 {
            0.0
        } else {
            self.errors as f64 / self.symbols as f64
        }
    }

    pub fn cm_sd_avg(&self) -> f64 {
        per(self.cm_sd, self.blocks)
    }

    pub fn sd_nodes_avg(&self) -> f64 {
        per(self.sd_nodes, self.blocks)
    }

    /// CMs per block: the QR count spread over the blocks of a realization,
    /// plus SIC, plus the measured sphere decoder average.
    pub fn total_cm_avg(&self) -> f64 {
        let blocks_per_channel = per(self.blocks, self.channels);
        let sqrd = if blocks_per_channel > 0.0 {
            self.cm_sqrd as f64 / blocks_per_channel
        } else {
            0.0
        };
        sqrd + self.cm_sic as f64 + self.cm_sd_avg()
    }
}

fn per(total: u64, count: u64) -> f64 {
    if count == 0 {
        0.0
    } else {
        total as f64 / count as f64
    }
}

/// `N0 = E_s·10^(−SNR/10)`, optionally scaled by `(D + L)/D`; `+∞ dB` gives 0.
pub fn noise_variance(snr_db: f64, es: f64, block_len: usize, cp_len: usize, cp_loss: bool) -> f64 {
    if snr_db == f64::INFINITY {
        return 0.0;
    }
    let n0 = es * 10f64.powf(-snr_db / 10.0);
    if cp_loss {
        n0 * (block_len + cp_len) as f64 / block_len as f64
    } else {
        n0
    }
}

enum Chain {
    Proposed {
        cfg: GfdmConfig,
        filter: PrototypeFilter,
    },
    Baseline {
        filter: PrototypeFilter,
        a: TransmitterMatrix,
    },
    Ofdm,
}

enum Receiver {
    Proposed(ProposedDetector),
    Baseline(BaselineDetector),
    Ofdm(OfdmDetector),
}

impl Chain {
    fn prepare(cfg: &SimConfig, scheme: &Scheme) -> Result<Self> {
        let gcfg = cfg.gfdm_config(scheme)?;
        Ok(match scheme {
            Scheme::ProposedDirichlet => Chain::Proposed {
                filter: gcfg.prototype()?,
                cfg: gcfg,
            },
            Scheme::BaselineDirichlet | Scheme::BaselineRc(_) => {
                let filter = gcfg.prototype()?;
                let a = build_transmitter_matrix(&gcfg, &filter)?;
                Chain::Baseline { filter, a }
            }
            Scheme::Ofdm => Chain::Ofdm,
        })
    }

    fn receiver(&self, ch: &MimoChannel, n0: f64, es: f64, group: usize) -> Result<Receiver> {
        Ok(match self {
            Chain::Proposed { cfg, filter } => Receiver::Proposed(ProposedDetector::new(&compute_blocks(ch, filter, cfg)?)?),
            Chain::Baseline { a, .. } => {
                let full = assemble_full_matrix(ch, a.matrix())?;
                Receiver::Baseline(BaselineDetector::new(&full, n0, es, group)?)
            }
            Chain::Ofdm => Receiver::Ofdm(OfdmDetector::new(ch)?),
        })
    }

    fn transmit(&self, symbols: &[Complex64]) -> Result<Vec<Complex64>> {
        match self {
            Chain::Proposed { filter, .. } => fast_modulate(symbols, filter),
            Chain::Baseline { filter, a } => match filter.support() {
                Some(_) => fast_modulate(symbols, filter),
                None => modulate(symbols, a),
            },
            Chain::Ofdm => Ok(fft::idft(symbols)),
        }
    }
}

fn detect(
    chain: &Chain,
    receiver: &Receiver,
    y: &[Vec<Complex64>],
    cs: &Constellation,
    stats: &mut DetectionStats,
) -> Result<Vec<usize>> {
    match (receiver, chain) {
        (Receiver::Proposed(det), Chain::Proposed { cfg, filter }) => {
            let shift = filter.support().map_or(0, |s| s.shift);
            let y_bar = receive_transform(y, shift, cfg.subcarriers(), cfg.subsymbols())?;
            det.detect(&y_bar, cs, stats)
        }
        (Receiver::Baseline(det), _) => det.detect(&y.concat(), cs, stats),
        (Receiver::Ofdm(det), _) => det.detect(y, cs, stats),
        (Receiver::Proposed(_), _) => unreachable!("receiver built from its own chain"),
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    errors: u64,
    symbols: u64,
    stats: DetectionStats,
    blocks: u64,
    wall: Duration,
}

/// Runs the sweep described by `cfg` and returns one record per `(SNR, scheme)`.
pub fn run_sweep(cfg: &SimConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let cs = cfg.constellation()?;
    let es = cs.average_energy();
    let d = cfg.block_len();
    let pdp = PdpProfile::exponential(cfg.cp_len)?;
    cfg.check_channel_memory(pdp.taps())?;
    let chains = cfg
        .schemes
        .iter()
        .map(|s| Chain::prepare(cfg, s))
        .collect::<Result<Vec<_>>>()?;
    let group = cfg.subsymbols * cfg.tx;
    let n_sch = cfg.schemes.len();
    let n0s: Vec<f64> = cfg
        .snr_db
        .iter()
        .map(|&s| noise_variance(s, es, d, cfg.cp_len, cfg.cp_loss))
        .collect();
    if n0s.contains(&0.0) && cfg.schemes.iter().any(|s| matches!(s, Scheme::BaselineDirichlet | Scheme::BaselineRc(_))) {
        warn!("noise-free SNR point: the baseline factors H̃ without MMSE regularization");
    }
    info!(
        "sweep: {} scheme(s), {} SNR point(s), {} channel(s) x {} block(s), D = {d}",
        n_sch,
        cfg.snr_db.len(),
        cfg.n_channels,
        cfg.n_blocks
    );

    let units: Vec<(usize, usize)> = (0..cfg.snr_db.len())
        .flat_map(|s| (0..cfg.n_channels).map(move |c| (s, c)))
        .collect();
    let partials = units
        .par_iter()
        .map(|&(si, ci)| -> Result<(usize, Vec<Tally>)> {
            let ch = generate_channel(cfg.tx, cfg.rx, &pdp, d, &mut seed::channel_rng(cfg.seed, ci))?;
            let n0 = n0s[si];
            let mut tallies = vec![Tally::default(); n_sch];
            let mut receivers = Vec::with_capacity(n_sch);
            for (chain, tally) in chains.iter().zip(tallies.iter_mut()) {
                let start = Instant::now();
                receivers.push(chain.receiver(&ch, n0, es, group)?);
                tally.wall += start.elapsed();
            }
            for bi in 0..cfg.n_blocks {
                let mut rng = seed::block_rng(cfg.seed, ci, bi, si);
                let truth: Vec<usize> = (0..cfg.tx * d).map(|_| rng.random_range(0..cs.len())).collect();
                let symbols = cs.map(&truth);
                for ((chain, receiver), tally) in chains.iter().zip(&receivers).zip(tallies.iter_mut()) {
                    let start = Instant::now();
                    let mut noise_rng = rng.clone();
                    let x = symbols.chunks(d).map(|s| chain.transmit(s)).collect::<Result<Vec<_>>>()?;
                    let y = apply_channel(&x, &ch, n0, &mut noise_rng)?;
                    let decided = detect(chain, receiver, &y, &cs, &mut tally.stats)?;
                    tally.errors += decided.iter().zip(&truth).filter(|(a, b)| a != b).count() as u64;
                    tally.symbols += truth.len() as u64;
                    tally.blocks += 1;
                    tally.wall += start.elapsed();
                }
            }
            Ok((si, tallies))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut sums = vec![vec![Tally::default(); n_sch]; cfg.snr_db.len()];
    for (si, tallies) in partials {
        for (acc, t) in sums[si].iter_mut().zip(tallies) {
            acc.errors += t.errors;
            acc.symbols += t.symbols;
            acc.stats += t.stats;
            acc.blocks += t.blocks;
            acc.wall += t.wall;
        }
    }

    let mut records = Vec::with_capacity(cfg.snr_db.len() * n_sch);
    for (si, row) in sums.into_iter().enumerate() {
        for (scheme, t) in cfg.schemes.iter().zip(row) {
            let counts = table1_cm(scheme, cfg.subcarriers, cfg.subsymbols, cfg.tx, cfg.rx)?;
            records.push(TrialRecord {
                snr_db: cfg.snr_db[si],
                scheme: *scheme,
                filter: scheme.filter_label(),
                subcarriers: cfg.subcarriers,
                subsymbols: cfg.subsymbols,
                tx: cfg.tx,
                rx: cfg.rx,
                errors: t.errors,
                symbols: t.symbols,
                cm_sqrd: counts.cm_sqrd,
                cm_sic: counts.cm_sic,
                cm_sd: t.stats.cm_count,
                sd_nodes: t.stats.sd_nodes_visited,
                blocks: t.blocks,
                channels: cfg.n_channels as u64,
                wall_time: t.wall,
            });
        }
    }
    Ok(records)
}
