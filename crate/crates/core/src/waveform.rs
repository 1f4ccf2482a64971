//! GFDM prototype filters, the transmitter matrix, and modulation.
//!
//! A GFDM block carries `D = K·M` data symbols: `K` subcarriers, each with `M`
//! subsymbols. Symbol `d[m·K + k]` (subcarrier `k`, subsymbol `m`) is shaped by
//!
//! ```text
//! g_{k,m}[n] = g[(n − mK) mod D] · e^{j2πkn/K},   n = 0..D−1
//! ```
//!
//! and the transmitted block is `x = A·d` with `A = [g_{0,0} … g_{K−1,0} g_{0,1} …]`.
//!
//! Filters whose frequency response `g_f = √D·W_D·g` occupies at most `M`
//! consecutive (cyclic) bins form the ICI-free class: subcarrier `k` then only
//! touches bins `l + kM .. l + kM + M − 1`, which is what makes per-subcarrier
//! detection possible (see [`crate::decoupling`]).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::fft;
use crate::CMatrix;

/// Default relative-energy threshold of [`ici_free_support`].
pub const DEFAULT_SUPPORT_TOL: f64 = 1e-12;

/// Prototype filter selection.
#[derive(Debug, Clone, PartialEq)]
pub enum FilterKind {
    /// Flat `M`-bin rectangle in frequency.
    Dirichlet,
    /// Frequency-domain raised cosine with the given roll-off.
    RaisedCosine { alpha: f64 },
    /// Arbitrary time-domain taps of length `D`.
    Custom(Vec<Complex64>),
}

/// Dimensions and alphabet of one GFDM block.
#[derive(Debug, Clone, PartialEq)]
pub struct GfdmConfig {
    subcarriers: usize,
    subsymbols: usize,
    cp_len: usize,
    constellation: Constellation,
    filter: FilterKind,
}

impl GfdmConfig {
    /// `K` subcarriers and `M` subsymbols, with `L = max(1, D/8)`, unit-energy
    /// QPSK and the Dirichlet filter.
    pub fn new(subcarriers: usize, subsymbols: usize) -> Result<Self> {
        if subcarriers == 0 || subsymbols == 0 {
            return Err(Error::InvalidConfig(format!(
                "K and M must be positive (got K={subcarriers}, M={subsymbols})"
            )));
        }
        let d = subcarriers * subsymbols;
        Ok(Self {
            subcarriers,
            subsymbols,
            cp_len: (d / 8).max(1),
            constellation: Constellation::qpsk(),
            filter: FilterKind::Dirichlet,
        })
    }

    pub fn with_cp_len(mut self, cp_len: usize) -> Result<Self> {
        if cp_len == 0 || cp_len > self.block_len() {
            return Err(Error::InvalidConfig(format!(
                "CP length {cp_len} must satisfy 0 < L <= D = {}",
                self.block_len()
            )));
        }
        self.cp_len = cp_len;
        Ok(self)
    }

    pub fn with_filter(mut self, filter: FilterKind) -> Result<Self> {
        match &filter {
            FilterKind::RaisedCosine { alpha } if !(0.0..=1.0).contains(alpha) => {
                return Err(Error::RollOff(*alpha))
            }
            FilterKind::Custom(g) if g.len() != self.block_len() => {
                return Err(Error::Dimension(format!(
                    "custom filter has {} taps, block length is {}",
                    g.len(),
                    self.block_len()
                )))
            }
            _ => {}
        }
        self.filter = filter;
        Ok(self)
    }

    /// Replaces the alphabet; its average energy becomes `E_s`.
    pub fn with_constellation(mut self, constellation: Constellation) -> Self {
        self.constellation = constellation;
        self
    }

    /// `K`
    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    /// `M`
    pub fn subsymbols(&self) -> usize {
        self.subsymbols
    }

    /// `D = K·M`
    pub fn block_len(&self) -> usize {
        self.subcarriers * self.subsymbols
    }

    /// `L`
    pub fn cp_len(&self) -> usize {
        self.cp_len
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn filter_kind(&self) -> &FilterKind {
        &self.filter
    }

    /// Average symbol energy `E_s`.
    pub fn symbol_energy(&self) -> f64 {
        self.constellation.average_energy()
    }

    /// Builds the configured prototype filter.
    pub fn prototype(&self) -> Result<PrototypeFilter> {
        match &self.filter {
            FilterKind::Dirichlet => Ok(dirichlet_filter(self)),
            FilterKind::RaisedCosine { alpha } => rc_filter(self, *alpha),
            FilterKind::Custom(g) => PrototypeFilter::from_time_domain(g.clone(), self.subsymbols),
        }
    }
}

/// Compact frequency support `g_f = Π_D^l [g_1ᵀ 0ᵀ]ᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Support {
    /// The `M` nonzero frequency taps `g_1`.
    pub taps: Vec<Complex64>,
    /// Cyclic start bin `l ∈ [0, D)`.
    pub shift: usize,
}

/// A prototype filter in both domains, with its ICI-free support when it has one.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeFilter {
    time: Vec<Complex64>,
    freq: Vec<Complex64>,
    subsymbols: usize,
    support: Option<Support>,
}

impl PrototypeFilter {
    /// Builds a filter from its frequency response `g_f`, normalizing to `‖g‖ = 1`.
    pub fn from_frequency_domain(freq: Vec<Complex64>, subsymbols: usize) -> Result<Self> {
        check_len(freq.len(), subsymbols)?;
        let d = freq.len() as f64;
        let energy: f64 = freq.iter().map(|v| v.norm_sqr()).sum();
        if energy == 0.0 {
            return Err(Error::InvalidConfig("prototype filter is identically zero".into()));
        }
        // ‖g‖² = ‖g_f‖² / D
        let scale = (d / energy).sqrt();
        let freq: Vec<Complex64> = freq.into_iter().map(|v| v * scale).collect();
        let time = fft::inverse_spectrum(&freq);
        let mut filter = Self {
            time,
            freq,
            subsymbols,
            support: None,
        };
        filter.support = ici_free_support(&filter, DEFAULT_SUPPORT_TOL);
        Ok(filter)
    }

    /// Builds a filter from time-domain taps, normalizing to `‖g‖ = 1`.
    pub fn from_time_domain(time: Vec<Complex64>, subsymbols: usize) -> Result<Self> {
        check_len(time.len(), subsymbols)?;
        Self::from_frequency_domain(fft::spectrum(&time), subsymbols)
    }

    /// Time-domain taps `g`.
    pub fn time(&self) -> &[Complex64] {
        &self.time
    }

    /// Frequency response `g_f = √D·W_D·g`.
    pub fn freq(&self) -> &[Complex64] {
        &self.freq
    }

    pub fn block_len(&self) -> usize {
        self.time.len()
    }

    pub fn subsymbols(&self) -> usize {
        self.subsymbols
    }

    pub fn subcarriers(&self) -> usize {
        self.time.len() / self.subsymbols
    }

    pub fn support(&self) -> Option<&Support> {
        self.support.as_ref()
    }

    pub fn is_ici_free(&self) -> bool {
        self.support.is_some()
    }
}

fn check_len(len: usize, subsymbols: usize) -> Result<()> {
    if subsymbols == 0 || len == 0 || !len.is_multiple_of(subsymbols) {
        return Err(Error::Dimension(format!(
            "filter length {len} is not a positive multiple of M = {subsymbols}"
        )));
    }
    Ok(())
}

/// Start bin of the Dirichlet rectangle, `(D − ⌈−M/2⌉) mod D`.
pub fn dirichlet_shift(subcarriers: usize, subsymbols: usize) -> usize {
    let d = subcarriers * subsymbols;
    // ⌈−M/2⌉ = −⌊M/2⌋
    (d + subsymbols / 2) % d
}

/// The Dirichlet pulse: `g_1 = √(D/M)·1_M` starting at [`dirichlet_shift`].
pub fn dirichlet_filter(cfg: &GfdmConfig) -> PrototypeFilter {
    let (k, m) = (cfg.subcarriers(), cfg.subsymbols());
    let d = k * m;
    let shift = dirichlet_shift(k, m);
    let level = Complex64::new((d as f64 / m as f64).sqrt(), 0.0);
    let mut freq = vec![Complex64::new(0.0, 0.0); d];
    for i in 0..m {
        freq[(shift + i) % d] = level;
    }
    PrototypeFilter {
        time: fft::inverse_spectrum(&freq),
        freq,
        subsymbols: m,
        support: Some(Support {
            taps: vec![level; m],
            shift,
        }),
    }
}

/// Frequency-domain raised-cosine prototype with roll-off `alpha`.
///
/// With `c` the center of the Dirichlet rectangle (`l + (M−1)/2`) and
/// `f = |i − c|/M` the cyclic distance of bin `i` in subcarrier spacings:
///
/// ```text
/// G(f) = 1                                          f ≤ (1−α)/2
///      = ½·(1 + cos(π/α·(f − (1−α)/2)))             (1−α)/2 < f ≤ (1+α)/2
///      = 0                                          otherwise
/// ```
///
/// The response spans up to `(1+α)·M ≤ 2M` bins. `α = 0` reproduces the
/// Dirichlet rectangle.
pub fn rc_filter(cfg: &GfdmConfig, alpha: f64) -> Result<PrototypeFilter> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::RollOff(alpha));
    }
    let (k, m) = (cfg.subcarriers(), cfg.subsymbols());
    let d = k * m;
    let center = dirichlet_shift(k, m) as f64 + (m as f64 - 1.0) / 2.0;
    let freq = (0..d)
        .map(|i| {
            let mut dist = (i as f64 - center).rem_euclid(d as f64);
            if dist > d as f64 / 2.0 {
                dist = d as f64 - dist;
            }
            Complex64::new(raised_cosine(dist / m as f64, alpha), 0.0)
        })
        .collect();
    PrototypeFilter::from_frequency_domain(freq, m)
}

fn raised_cosine(f: f64, alpha: f64) -> f64 {
    let lo = (1.0 - alpha) / 2.0;
    let hi = (1.0 + alpha) / 2.0;
    if f <= lo {
        1.0
    } else if f <= hi && alpha > 0.0 {
        0.5 * (1.0 + (PI / alpha * (f - lo)).cos())
    } else {
        0.0
    }
}

/// Finds a cyclic window of `M` bins holding all but `tol` of the filter energy.
///
/// Returns `(g_1, l)` with `l` the window start when at least `(1 − tol)·‖g_f‖²`
/// lies inside the window and every outside entry has magnitude at most
/// `√tol·‖g_f‖`. Among qualifying windows the one with the most energy wins
/// (lowest start on ties).
pub fn ici_free_support(filter: &PrototypeFilter, tol: f64) -> Option<Support> {
    let support = best_window(filter.freq(), filter.subsymbols())?;
    let d = filter.freq().len();
    let m = filter.subsymbols();
    let total: f64 = filter.freq().iter().map(|v| v.norm_sqr()).sum();
    let inside: f64 = support.taps.iter().map(|v| v.norm_sqr()).sum();
    if inside < (1.0 - tol) * total {
        return None;
    }
    let limit = tol.sqrt() * total.sqrt();
    let outside_ok = (m..d).all(|j| filter.freq()[(support.shift + j) % d].norm() <= limit);
    outside_ok.then_some(support)
}

/// The `M`-bin cyclic window with the largest energy, whether or not it holds all of it.
pub(crate) fn best_window(freq: &[Complex64], m: usize) -> Option<Support> {
    let d = freq.len();
    if d == 0 || m == 0 || m > d {
        return None;
    }
    let power: Vec<f64> = freq.iter().map(|v| v.norm_sqr()).collect();
    if power.iter().all(|&p| p == 0.0) {
        return None;
    }
    let mut window: f64 = power[..m].iter().sum();
    let (mut best, mut best_energy) = (0, window);
    for start in 1..d {
        window += power[(start + m - 1) % d] - power[start - 1];
        if window > best_energy * (1.0 + 1e-14) {
            best = start;
            best_energy = window;
        }
    }
    Some(Support {
        taps: (0..m).map(|i| freq[(best + i) % d]).collect(),
        shift: best,
    })
}

/// The dense `D×D` GFDM matrix `A`; column `m·K + k` is `g_{k,m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitterMatrix {
    matrix: CMatrix,
    subcarriers: usize,
    subsymbols: usize,
}

impl TransmitterMatrix {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn subsymbols(&self) -> usize {
        self.subsymbols
    }
}

pub fn build_transmitter_matrix(cfg: &GfdmConfig, filter: &PrototypeFilter) -> Result<TransmitterMatrix> {
    let (k, m) = (cfg.subcarriers(), cfg.subsymbols());
    let d = k * m;
    if filter.block_len() != d || filter.subsymbols() != m {
        return Err(Error::Dimension(format!(
            "filter is for D={}, M={}; config has D={d}, M={m}",
            filter.block_len(),
            filter.subsymbols()
        )));
    }
    let g = filter.time();
    let matrix = CMatrix::from_fn(d, d, |n, col| {
        let (sub, car) = (col / k, col % k);
        let phase = 2.0 * PI * ((car * n) % k) as f64 / k as f64;
        g[(n + d - (sub * k) % d) % d] * Complex64::from_polar(1.0, phase)
    });
    Ok(TransmitterMatrix {
        matrix,
        subcarriers: k,
        subsymbols: m,
    })
}

/// `x = A·d` by dense matrix-vector product.
pub fn modulate(data: &[Complex64], a: &TransmitterMatrix) -> Result<Vec<Complex64>> {
    let d = a.matrix.ncols();
    if data.len() != d {
        return Err(Error::Dimension(format!("data length {} != D = {d}", data.len())));
    }
    let v = nalgebra::DVector::from_column_slice(data);
    Ok((&a.matrix * v).as_slice().to_vec())
}

/// `x = A·d` in `O(D log D)` for ICI-free filters.
///
/// Per subcarrier `k`, the gathered subsymbols `d_k[m] = d[mK + k]` go through
/// an `M`-point DFT, a cyclic rotation by `l`, and scaling by `g_1/√K`; the
/// result fills bins `l + kM ..` of the block spectrum, which one inverse
/// `D`-point DFT brings back to time.
pub fn fast_modulate(data: &[Complex64], filter: &PrototypeFilter) -> Result<Vec<Complex64>> {
    let support = filter.support().ok_or(Error::NotIciFree)?;
    let d = filter.block_len();
    let m = filter.subsymbols();
    let k = d / m;
    if data.len() != d {
        return Err(Error::Dimension(format!("data length {} != D = {d}", data.len())));
    }
    let norm = 1.0 / (k as f64).sqrt();
    let l = support.shift;
    let mut spectrum = vec![Complex64::new(0.0, 0.0); d];
    let mut sub = vec![Complex64::new(0.0, 0.0); m];
    for car in 0..k {
        for (i, s) in sub.iter_mut().enumerate() {
            *s = data[i * k + car];
        }
        let spread = fft::dft(&sub);
        for mu in 0..m {
            let value = support.taps[mu] * spread[(mu + l) % m] * norm;
            spectrum[(car * m + mu + l) % d] = value;
        }
    }
    Ok(fft::idft(&spectrum))
}
