//! Frequency-selective MIMO Rayleigh channels with a cyclic prefix.
//!
//! The prefix is modeled implicitly: after CP removal a tap vector of length
//! `≤ L ≤ D` acts on a block as circular convolution, i.e. as the circulant
//! matrix `H_{r,t}` whose first column is the zero-padded impulse response.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fft;
use crate::CMatrix;

/// Average power per channel tap.
#[derive(Debug, Clone, PartialEq)]
pub struct PdpProfile {
    powers: Vec<f64>,
}

impl PdpProfile {
    /// Exponential profile over `taps` taps, linear in dB from 0 dB at the
    /// first tap to −10 dB at the last, normalized to unit total power.
    pub fn exponential(taps: usize) -> Result<Self> {
        if taps == 0 {
            return Err(Error::InvalidConfig("power delay profile needs at least one tap".into()));
        }
        let step_db = if taps > 1 { 10.0 / (taps - 1) as f64 } else { 0.0 };
        Self::new((0..taps).map(|i| 10f64.powf(-step_db * i as f64 / 10.0)).collect())
    }

    /// Arbitrary positive powers, rescaled to sum to one.
    pub fn new(powers: Vec<f64>) -> Result<Self> {
        if powers.is_empty() || powers.iter().any(|&p| !p.is_finite() || p <= 0.0) {
            return Err(Error::InvalidConfig("tap powers must be positive and finite".into()));
        }
        let total: f64 = powers.iter().sum();
        Ok(Self {
            powers: powers.into_iter().map(|p| p / total).collect(),
        })
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn taps(&self) -> usize {
        self.powers.len()
    }
}

/// Impulse responses of all `R×T` antenna pairs plus their `D`-point spectra.
#[derive(Debug, Clone, PartialEq)]
pub struct MimoChannel {
    tx: usize,
    rx: usize,
    block_len: usize,
    taps: Vec<Vec<Complex64>>,
    freq: Vec<Vec<Complex64>>,
}

impl MimoChannel {
    /// `taps[r·T + t]` is the impulse response from transmit antenna `t` to receive antenna `r`.
    pub fn from_taps(tx: usize, rx: usize, block_len: usize, taps: Vec<Vec<Complex64>>) -> Result<Self> {
        if tx == 0 || rx == 0 || block_len == 0 {
            return Err(Error::Dimension("antenna counts and block length must be positive".into()));
        }
        if taps.len() != tx * rx {
            return Err(Error::Dimension(format!(
                "expected {} impulse responses, got {}",
                tx * rx,
                taps.len()
            )));
        }
        if let Some(h) = taps.iter().find(|h| h.len() > block_len || h.is_empty()) {
            return Err(Error::Dimension(format!(
                "impulse response of length {} does not fit a block of {block_len}",
                h.len()
            )));
        }
        let freq = taps.iter().map(|h| spectrum(h, block_len)).collect();
        Ok(Self {
            tx,
            rx,
            block_len,
            taps,
            freq,
        })
    }

    /// `h = δ` on pairs `r = t`, zero elsewhere.
    pub fn identity(antennas: usize, block_len: usize) -> Result<Self> {
        let taps = (0..antennas * antennas)
            .map(|i| {
                let gain = if i / antennas == i % antennas { 1.0 } else { 0.0 };
                vec![Complex64::new(gain, 0.0)]
            })
            .collect();
        Self::from_taps(antennas, antennas, block_len, taps)
    }

    pub fn tx(&self) -> usize {
        self.tx
    }

    pub fn rx(&self) -> usize {
        self.rx
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn taps(&self, r: usize, t: usize) -> &[Complex64] {
        &self.taps[r * self.tx + t]
    }

    /// `h_f^{(r,t)}`, the unnormalized `D`-point DFT of the zero-padded taps.
    pub fn freq(&self, r: usize, t: usize) -> &[Complex64] {
        &self.freq[r * self.tx + t]
    }

    pub fn max_taps(&self) -> usize {
        self.taps.iter().map(Vec::len).max().unwrap_or(0)
    }
}

fn spectrum(h: &[Complex64], block_len: usize) -> Vec<Complex64> {
    let mut padded = h.to_vec();
    padded.resize(block_len, Complex64::new(0.0, 0.0));
    fft::spectrum(&padded)
}

/// Circularly-symmetric complex Gaussian sample with variance `var`.
pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * s, im * s)
}

/// Draws an uncorrelated Rayleigh channel: tap `i` of every pair is `CN(0, p_i)`.
pub fn generate_channel<R: Rng + ?Sized>(
    tx: usize,
    rx: usize,
    pdp: &PdpProfile,
    block_len: usize,
    rng: &mut R,
) -> Result<MimoChannel> {
    if pdp.taps() > block_len {
        return Err(Error::Dimension(format!(
            "{} channel taps exceed block length {block_len}",
            pdp.taps()
        )));
    }
    let taps = (0..tx * rx)
        .map(|_| pdp.powers().iter().map(|&p| complex_gaussian(rng, p)).collect())
        .collect();
    MimoChannel::from_taps(tx, rx, block_len, taps)
}

fn circular_convolve(h: &[Complex64], x: &[Complex64], out: &mut [Complex64]) {
    let d = x.len();
    for (n, y) in out.iter_mut().enumerate() {
        for (i, &hi) in h.iter().enumerate() {
            *y += hi * x[(n + d - i % d) % d];
        }
    }
}

/// `y_r = Σ_t h^{(r,t)} ⊛ x_t + n_r`, with `n_r ~ CN(0, N0·I_D)`.
///
/// Noise is drawn antenna by antenna, sample by sample, after the noiseless
/// part is formed; `n0 = 0` draws nothing.
pub fn apply_channel<R: Rng + ?Sized>(
    x: &[Vec<Complex64>],
    ch: &MimoChannel,
    n0: f64,
    rng: &mut R,
) -> Result<Vec<Vec<Complex64>>> {
    let d = ch.block_len();
    if x.len() != ch.tx() || x.iter().any(|v| v.len() != d) {
        return Err(Error::Dimension(format!(
            "expected {} streams of length {d}",
            ch.tx()
        )));
    }
    let mut y = vec![vec![Complex64::new(0.0, 0.0); d]; ch.rx()];
    for (r, yr) in y.iter_mut().enumerate() {
        for (t, xt) in x.iter().enumerate() {
            circular_convolve(ch.taps(r, t), xt, yr);
        }
    }
    if n0 > 0.0 {
        for yr in y.iter_mut() {
            for v in yr.iter_mut() {
                *v += complex_gaussian(rng, n0);
            }
        }
    }
    Ok(y)
}

/// Dense `D×D` circulant matrix with first column `h` (zero-padded).
pub fn build_circulant(h: &[Complex64], block_len: usize) -> Result<CMatrix> {
    if h.len() > block_len {
        return Err(Error::Dimension(format!(
            "{} taps exceed block length {block_len}",
            h.len()
        )));
    }
    Ok(CMatrix::from_fn(block_len, block_len, |row, col| {
        let lag = (row + block_len - col) % block_len;
        h.get(lag).copied().unwrap_or_default()
    }))
}

/// The stacked `RD×TD` matrix `H̃` whose block `(r,t)` is `H_{r,t}·A`.
pub fn assemble_full_matrix(ch: &MimoChannel, a: &CMatrix) -> Result<CMatrix> {
    let d = ch.block_len();
    if a.nrows() != d || a.ncols() != d {
        return Err(Error::Dimension(format!(
            "transmitter matrix is {}x{}, channel block length is {d}",
            a.nrows(),
            a.ncols()
        )));
    }
    let mut full = CMatrix::zeros(ch.rx() * d, ch.tx() * d);
    let mut col = vec![Complex64::new(0.0, 0.0); d];
    for r in 0..ch.rx() {
        for t in 0..ch.tx() {
            for j in 0..d {
                col.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                let src: Vec<Complex64> = a.column(j).iter().copied().collect();
                circular_convolve(ch.taps(r, t), &src, &mut col);
                for (n, v) in col.iter().enumerate() {
                    full[(r * d + n, t * d + j)] = *v;
                }
            }
        }
    }
    Ok(full)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::{build_transmitter_matrix, dirichlet_filter, modulate, rc_filter, GfdmConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n).map(|_| complex_gaussian(rng, 1.0)).collect()
    }

    /// CP insertion, linear convolution, CP removal.
    fn explicit_cp_path(h: &[Complex64], x: &[Complex64], cp: usize) -> Vec<Complex64> {
        let d = x.len();
        let mut tx: Vec<Complex64> = x[d - cp..].to_vec();
        tx.extend_from_slice(x);
        let mut rx = vec![c(0.0, 0.0); tx.len() + h.len() - 1];
        for (i, &hi) in h.iter().enumerate() {
            for (n, &xn) in tx.iter().enumerate() {
                rx[i + n] += hi * xn;
            }
        }
        rx[cp..cp + d].to_vec()
    }

    #[test]
    fn pdp_shape() {
        let pdp = PdpProfile::exponential(4).unwrap();
        let raw: Vec<f64> = (0..4).map(|i| 10f64.powf(-10.0 * i as f64 / 30.0)).collect();
        let total: f64 = raw.iter().sum();
        for (p, r) in pdp.powers().iter().zip(&raw) {
            assert!((p - r / total).abs() < 1e-15);
        }
        assert!((pdp.powers()[3] / pdp.powers()[0] - 0.1).abs() < 1e-12);
        assert!((pdp.powers().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(PdpProfile::exponential(1).unwrap().powers(), &[1.0]);
        assert!(PdpProfile::exponential(0).is_err());
        assert!(PdpProfile::new(vec![1.0, -1.0]).is_err());
    }

    #[test]
    fn flat_fading_energy() {
        let pdp = PdpProfile::exponential(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 20_000;
        let mut energy = 0.0;
        for _ in 0..draws {
            let ch = generate_channel(1, 1, &pdp, 4, &mut rng).unwrap();
            energy += ch.taps(0, 0)[0].norm_sqr();
        }
        let mean = energy / draws as f64;
        assert!((mean - 1.0).abs() < 0.03, "{mean}");
    }

    #[test]
    fn multipath_energy_per_pair() {
        let pdp = PdpProfile::exponential(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let draws = 10_000;
        let mut energy = [0.0; 4];
        for _ in 0..draws {
            let ch = generate_channel(2, 2, &pdp, 16, &mut rng).unwrap();
            for (i, e) in energy.iter_mut().enumerate() {
                *e += ch.taps(i / 2, i % 2).iter().map(|h| h.norm_sqr()).sum::<f64>();
            }
        }
        for e in energy {
            assert!((e / draws as f64 - 1.0).abs() < 0.03);
        }
    }

    #[test]
    fn seeded_generation_is_deterministic() {
        let pdp = PdpProfile::exponential(3).unwrap();
        let a = generate_channel(2, 2, &pdp, 8, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = generate_channel(2, 2, &pdp, 8, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn frequency_response_matches_taps() {
        let pdp = PdpProfile::exponential(3).unwrap();
        let ch = generate_channel(2, 3, &pdp, 8, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        for r in 0..3 {
            for t in 0..2 {
                for q in 0..8 {
                    let expected: Complex64 = ch
                        .taps(r, t)
                        .iter()
                        .enumerate()
                        .map(|(i, h)| h * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (q * i) as f64 / 8.0))
                        .sum();
                    assert!((ch.freq(r, t)[q] - expected).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn identity_channel_passes_through() {
        let ch = MimoChannel::identity(2, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = vec![random_vec(&mut rng, 8), random_vec(&mut rng, 8)];
        let y = apply_channel(&x, &ch, 0.0, &mut rng).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn noiseless_output_matches_circulant_products() {
        let pdp = PdpProfile::exponential(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let ch = generate_channel(2, 2, &pdp, 12, &mut rng).unwrap();
        let x = vec![random_vec(&mut rng, 12), random_vec(&mut rng, 12)];
        let y = apply_channel(&x, &ch, 0.0, &mut rng).unwrap();
        for r in 0..2 {
            let mut expected = nalgebra::DVector::<Complex64>::zeros(12);
            for t in 0..2 {
                let h = build_circulant(ch.taps(r, t), 12).unwrap();
                expected += h * nalgebra::DVector::from_column_slice(&x[t]);
            }
            for (a, b) in y[r].iter().zip(expected.iter()) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn circular_convolution_equals_cp_path() {
        let pdp = PdpProfile::exponential(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ch = generate_channel(1, 1, &pdp, 16, &mut rng).unwrap();
        let x = random_vec(&mut rng, 16);
        let y = apply_channel(std::slice::from_ref(&x), &ch, 0.0, &mut rng).unwrap();
        let via_cp = explicit_cp_path(ch.taps(0, 0), &x, 4);
        for (a, b) in y[0].iter().zip(&via_cp) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn noise_only_variance() {
        let ch = MimoChannel::identity(2, 2048).unwrap();
        let x = vec![vec![c(0.0, 0.0); 2048]; 2];
        let n0 = 0.3;
        let y = apply_channel(&x, &ch, n0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let var = y.iter().flatten().map(|v| v.norm_sqr()).sum::<f64>() / 4096.0;
        assert!((var / n0 - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn circulant_examples() {
        let eye = build_circulant(&[c(1.0, 0.0)], 3).unwrap();
        assert_eq!(eye, CMatrix::identity(3, 3));
        let (a, b) = (c(1.0, 2.0), c(-3.0, 0.5));
        let h = build_circulant(&[a, b], 3).unwrap();
        let z = c(0.0, 0.0);
        let expected = CMatrix::from_row_slice(3, 3, &[a, z, b, b, a, z, z, b, a]);
        assert_eq!(h, expected);
        assert!(build_circulant(&[a, b, a, b], 3).is_err());
    }

    #[test]
    fn circulant_is_diagonalized_by_dft() {
        let d = 8;
        let w = CMatrix::from_fn(d, d, |r, col| {
            Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (r * col) as f64 / d as f64) / (d as f64).sqrt()
        });
        let taps = vec![c(0.3, -1.0), c(0.5, 0.2), c(-0.7, 0.1)];
        let h = build_circulant(&taps, d).unwrap();
        let diag = &w * h * w.adjoint();
        let spec = spectrum(&taps, d);
        for r in 0..d {
            for col in 0..d {
                let expected = if r == col { spec[r] } else { c(0.0, 0.0) };
                assert!((diag[(r, col)] - expected).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn full_matrix_identity_channel() {
        let cfg = GfdmConfig::new(4, 2).unwrap();
        let a = build_transmitter_matrix(&cfg, &dirichlet_filter(&cfg)).unwrap();
        let ch = MimoChannel::identity(1, 8).unwrap();
        let full = assemble_full_matrix(&ch, a.matrix()).unwrap();
        assert!((full - a.matrix()).norm() < 1e-15);
    }

    #[test]
    fn end_to_end_equals_full_matrix() {
        let cfg = GfdmConfig::new(4, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let pdp = PdpProfile::exponential(2).unwrap();
        let ch = generate_channel(2, 3, &pdp, 12, &mut rng).unwrap();
        for f in [dirichlet_filter(&cfg), rc_filter(&cfg, 0.9).unwrap()] {
            let a = build_transmitter_matrix(&cfg, &f).unwrap();
            let full = assemble_full_matrix(&ch, a.matrix()).unwrap();
            let d: Vec<Vec<Complex64>> = (0..2).map(|_| random_vec(&mut rng, 12)).collect();
            let x: Vec<Vec<Complex64>> = d.iter().map(|dt| modulate(dt, &a).unwrap()).collect();
            let y = apply_channel(&x, &ch, 0.0, &mut rng).unwrap();
            let stacked = nalgebra::DVector::from_iterator(24, d.iter().flatten().copied());
            let expected = full * stacked;
            for (a, b) in y.iter().flatten().zip(expected.iter()) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn ofdm_blocks_are_diagonalized() {
        // A = W_Dᴴ: every block W_D·H_{r,t}·W_Dᴴ is diagonal
        let cfg = GfdmConfig::new(8, 1).unwrap();
        let a = build_transmitter_matrix(&cfg, &dirichlet_filter(&cfg)).unwrap();
        let pdp = PdpProfile::exponential(2).unwrap();
        let ch = generate_channel(2, 2, &pdp, 8, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let full = assemble_full_matrix(&ch, a.matrix()).unwrap();
        let w = a.matrix().adjoint();
        for r in 0..2 {
            for t in 0..2 {
                let block = full.view((r * 8, t * 8), (8, 8)).into_owned();
                let rotated = &w * block;
                for i in 0..8 {
                    for j in 0..8 {
                        if i != j {
                            assert!(rotated[(i, j)].norm() < 1e-10);
                        }
                    }
                    assert!((rotated[(i, i)] - ch.freq(r, t)[i] ).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn dimension_errors() {
        let ch = MimoChannel::identity(2, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(apply_channel(&[vec![c(0.0, 0.0); 4]], &ch, 0.0, &mut rng).is_err());
        assert!(assemble_full_matrix(&ch, &CMatrix::identity(3, 3)).is_err());
        assert!(MimoChannel::from_taps(1, 1, 2, vec![vec![c(1.0, 0.0); 3]]).is_err());
        let pdp = PdpProfile::exponential(5).unwrap();
        assert!(generate_channel(1, 1, &pdp, 4, &mut rng).is_err());
    }
}
