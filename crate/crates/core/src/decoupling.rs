//! Frequency-domain decoupling for ICI-free prototype filters.
//!
//! When `g_f` occupies only the `M` cyclic bins `l .. l+M−1`, the stacked
//! channel factors as
//!
//! ```text
//! H̃ = Uᴴ · blkdiag(F_0, …, F_{K−1}) · P
//! U = (Π_{KR} ⊗ I_M)(I_R ⊗ Π_D^{−l} W_D)
//! P = (Π_{KT} ⊗ I_M)(I_T ⊗ Π_{KM})
//! ```
//!
//! with one `MR×MT` block per subcarrier. `U` is a per-antenna DFT followed by
//! index shuffles, so the receiver never forms `H̃`: it transforms `y`, slices
//! it into `K` pieces and solves `K` small problems.
//!
//! Block `F_k` has sub-block `(r,t)`
//!
//! ```text
//! E_k^{(r,t)} = K^{−1/2} · diag(window_k(Π_D^{−l} h_f^{(r,t)})) · diag(g_1) · Π_M^{−l} W_M
//! ```
//!
//! where `window_k` takes entries `kM .. kM+M−1`. The rotation on `W_M` is
//! `Π_M^{−l}` (shift by the filter offset, not by one): bin `kM + μ + l` of a
//! subcarrier-`k` pulse carries DFT coefficient `(μ + l) mod M` of its
//! subsymbols. This is the exponent that makes the factorization exact; the
//! unit-test `shift_exponent_is_filter_offset` pins it.
//!
//! Permutations are index maps, never dense matrices; the [`dense`] module
//! builds the explicit operators for verification only.

use num_complex::Complex64;

use crate::channel::MimoChannel;
use crate::error::{Error, Result};
use crate::fft;
use crate::waveform::{best_window, GfdmConfig, PrototypeFilter, Support};
use crate::CMatrix;

/// A structured permutation, realized as an index map.
///
/// Matrix semantics follow the usual convention: applying `Compose([P1, P2])`
/// to `v` yields `P1·(P2·v)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PermSpec {
    /// `Π_A^shift`: cyclic down-shift by `shift` (negative shifts move up).
    Cyclic { len: usize, shift: isize },
    /// `Π_{AB}` with `[Π_{AB}]_{mB+p, qA+n} = δ_{mn}·δ_{pq}`.
    Interleave { a: usize, b: usize },
    /// `inner ⊗ I_block`: permutes contiguous blocks.
    Blocked { inner: Box<PermSpec>, block: usize },
    /// `I_copies ⊗ inner`: the same permutation inside each segment.
    Repeated { inner: Box<PermSpec>, copies: usize },
    /// Matrix product, leftmost factor applied last.
    Compose(Vec<PermSpec>),
}

impl PermSpec {
    /// `Π_A`
    pub fn cyclic(len: usize, shift: isize) -> Self {
        PermSpec::Cyclic { len, shift }
    }

    /// `Π_{AB}`
    pub fn interleave(a: usize, b: usize) -> Self {
        PermSpec::Interleave { a, b }
    }

    pub fn blocked(self, block: usize) -> Self {
        PermSpec::Blocked {
            inner: Box::new(self),
            block,
        }
    }

    pub fn repeated(self, copies: usize) -> Self {
        PermSpec::Repeated {
            inner: Box::new(self),
            copies,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            PermSpec::Cyclic { len, .. } => *len,
            PermSpec::Interleave { a, b } => a * b,
            PermSpec::Blocked { inner, block } => inner.len() * block,
            PermSpec::Repeated { inner, copies } => inner.len() * copies,
            PermSpec::Compose(parts) => parts.first().map_or(0, PermSpec::len),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `src` with `(P·v)[i] = v[src[i]]`.
    pub fn source_map(&self) -> Vec<usize> {
        match self {
            PermSpec::Cyclic { len, shift } => {
                let n = *len;
                if n == 0 {
                    return Vec::new();
                }
                let s = shift.rem_euclid(n as isize) as usize;
                (0..n).map(|i| (i + n - s) % n).collect()
            }
            PermSpec::Interleave { a, b } => {
                let (a, b) = (*a, *b);
                let mut src = vec![0; a * b];
                for m in 0..a {
                    for p in 0..b {
                        src[m * b + p] = p * a + m;
                    }
                }
                src
            }
            PermSpec::Blocked { inner, block } => {
                let outer = inner.source_map();
                let mut src = Vec::with_capacity(outer.len() * block);
                for &o in &outer {
                    src.extend((0..*block).map(|j| o * block + j));
                }
                src
            }
            PermSpec::Repeated { inner, copies } => {
                let base = inner.source_map();
                let n = base.len();
                (0..*copies)
                    .flat_map(|c| base.iter().map(move |&s| c * n + s))
                    .collect()
            }
            PermSpec::Compose(parts) => {
                let mut iter = parts.iter();
                let Some(first) = iter.next() else {
                    return Vec::new();
                };
                let mut src = first.source_map();
                for part in iter {
                    let next = part.source_map();
                    src.iter_mut().for_each(|s| *s = next[*s]);
                }
                src
            }
        }
    }

    /// Dense matrix with `P[i, src[i]] = 1`.
    pub fn to_matrix(&self) -> CMatrix {
        let src = self.source_map();
        let mut p = CMatrix::zeros(src.len(), src.len());
        for (i, &s) in src.iter().enumerate() {
            p[(i, s)] = Complex64::new(1.0, 0.0);
        }
        p
    }
}

/// `P·v`.
pub fn apply_perm<T: Copy>(spec: &PermSpec, v: &[T]) -> Result<Vec<T>> {
    let src = spec.source_map();
    if src.len() != v.len() {
        return Err(Error::Dimension(format!(
            "permutation of {} entries applied to vector of {}",
            src.len(),
            v.len()
        )));
    }
    Ok(src.iter().map(|&s| v[s]).collect())
}

/// `Pᵀ·v` (the inverse permutation).
pub fn apply_perm_inverse<T: Copy + Default>(spec: &PermSpec, v: &[T]) -> Result<Vec<T>> {
    let src = spec.source_map();
    if src.len() != v.len() {
        return Err(Error::Dimension(format!(
            "permutation of {} entries applied to vector of {}",
            src.len(),
            v.len()
        )));
    }
    let mut out = vec![T::default(); v.len()];
    for (i, &s) in src.iter().enumerate() {
        out[s] = v[i];
    }
    Ok(out)
}

/// Index shuffles of `U` (everything but the per-antenna DFT).
pub fn receive_permutation(subcarriers: usize, subsymbols: usize, rx: usize, shift: usize) -> PermSpec {
    let d = subcarriers * subsymbols;
    PermSpec::Compose(vec![
        PermSpec::interleave(subcarriers, rx).blocked(subsymbols),
        PermSpec::cyclic(d, -(shift as isize)).repeated(rx),
    ])
}

/// `P = (Π_{KT} ⊗ I_M)(I_T ⊗ Π_{KM})`.
pub fn data_permutation_spec(subcarriers: usize, subsymbols: usize, tx: usize) -> PermSpec {
    PermSpec::Compose(vec![
        PermSpec::interleave(subcarriers, tx).blocked(subsymbols),
        PermSpec::interleave(subcarriers, subsymbols).repeated(tx),
    ])
}

/// `ȳ = U·y`: normalized DFT per antenna, cyclic up-shift by `l`, then the
/// block interleave that groups every subcarrier's `R·M` samples together.
pub fn receive_transform(
    y: &[Vec<Complex64>],
    shift: usize,
    subcarriers: usize,
    subsymbols: usize,
) -> Result<Vec<Complex64>> {
    let d = subcarriers * subsymbols;
    if y.is_empty() || y.iter().any(|v| v.len() != d) {
        return Err(Error::Dimension(format!(
            "expected one or more streams of length D = {d}"
        )));
    }
    let spectra: Vec<Complex64> = y.iter().flat_map(|yr| fft::dft(yr)).collect();
    apply_perm(&receive_permutation(subcarriers, subsymbols, y.len(), shift), &spectra)
}

/// `d̄ = P·d`; segment `k` of length `M·T` holds subcarrier `k` across all antennas.
pub fn data_permutation<T: Copy>(d: &[T], subcarriers: usize, subsymbols: usize, tx: usize) -> Result<Vec<T>> {
    apply_perm(&data_permutation_spec(subcarriers, subsymbols, tx), d)
}

/// `d = Pᵀ·d̄`.
pub fn data_permutation_inverse<T: Copy + Default>(
    d_bar: &[T],
    subcarriers: usize,
    subsymbols: usize,
    tx: usize,
) -> Result<Vec<T>> {
    apply_perm_inverse(&data_permutation_spec(subcarriers, subsymbols, tx), d_bar)
}

/// The per-subcarrier matrices `F_k` of the decoupled system.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSystem {
    blocks: Vec<CMatrix>,
    shift: usize,
    subcarriers: usize,
    subsymbols: usize,
    tx: usize,
    rx: usize,
}

impl BlockSystem {
    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &CMatrix {
        &self.blocks[k]
    }

    /// Filter offset `l`.
    pub fn shift(&self) -> usize {
        self.shift
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn subsymbols(&self) -> usize {
        self.subsymbols
    }

    pub fn tx(&self) -> usize {
        self.tx
    }

    pub fn rx(&self) -> usize {
        self.rx
    }

    /// `blkdiag(F_0, …, F_{K−1})` as a dense matrix.
    pub fn to_block_diagonal(&self) -> CMatrix {
        dense::block_diagonal(&self.blocks)
    }
}

/// Builds `F_k` for every subcarrier from the channel spectra and the filter support.
pub fn compute_blocks(ch: &MimoChannel, filter: &PrototypeFilter, cfg: &GfdmConfig) -> Result<BlockSystem> {
    let support = filter.support().ok_or(Error::NotIciFree)?;
    blocks_from_support(ch, support, cfg)
}

fn blocks_from_support(ch: &MimoChannel, support: &Support, cfg: &GfdmConfig) -> Result<BlockSystem> {
    let (k, m) = (cfg.subcarriers(), cfg.subsymbols());
    let d = k * m;
    if ch.block_len() != d || support.taps.len() != m {
        return Err(Error::Dimension(format!(
            "channel block length {} / support width {} do not match D = {d}, M = {m}",
            ch.block_len(),
            support.taps.len()
        )));
    }
    let (tx, rx) = (ch.tx(), ch.rx());
    let l = support.shift;
    let norm = 1.0 / (k as f64).sqrt();
    let w_m = dense::dft_matrix(m);
    // row μ of diag(g_1)·Π_M^{−l}·W_M is g_1[μ]·W_M[(μ+l) mod M, :]
    let shaped = CMatrix::from_fn(m, m, |mu, col| support.taps[mu] * w_m[((mu + l) % m, col)] * norm);

    let mut blocks = vec![CMatrix::zeros(m * rx, m * tx); k];
    for r in 0..rx {
        for t in 0..tx {
            let hf = ch.freq(r, t);
            for (car, block) in blocks.iter_mut().enumerate() {
                for mu in 0..m {
                    let gain = hf[(car * m + mu + l) % d];
                    for col in 0..m {
                        block[(r * m + mu, t * m + col)] = gain * shaped[(mu, col)];
                    }
                }
            }
        }
    }
    Ok(BlockSystem {
        blocks,
        shift: l,
        subcarriers: k,
        subsymbols: m,
        tx,
        rx,
    })
}

/// `‖U·H̃ − blkdiag(F_k)·P‖_F / ‖H̃‖_F`, computed with dense matrices.
///
/// Filters outside the ICI-free class are projected onto their strongest
/// `M`-bin window before the blocks are formed, so the residual measures how
/// much of `H̃` the decoupled model misses. A zero channel returns 0.
pub fn verify_decomposition(ch: &MimoChannel, filter: &PrototypeFilter, cfg: &GfdmConfig) -> Result<f64> {
    let support = match filter.support() {
        Some(s) => s.clone(),
        None => best_window(filter.freq(), cfg.subsymbols()).ok_or(Error::NotIciFree)?,
    };
    let blocks = blocks_from_support(ch, &support, cfg)?;
    let a = crate::waveform::build_transmitter_matrix(cfg, filter)?;
    let full = crate::channel::assemble_full_matrix(ch, a.matrix())?;
    let denom = full.norm();
    if denom == 0.0 {
        return Ok(0.0);
    }
    let (k, m) = (cfg.subcarriers(), cfg.subsymbols());
    let u = dense::u_matrix(k, m, ch.rx(), support.shift);
    let p = dense::p_matrix(k, m, ch.tx());
    let lhs = u * &full;
    let rhs = blocks.to_block_diagonal() * p;
    Ok((lhs - rhs).norm() / denom)
}

/// Explicit operators for checking the fast paths.
pub mod dense {
    use super::*;

    /// Unitary `W_n`.
    pub fn dft_matrix(n: usize) -> CMatrix {
        let scale = 1.0 / (n as f64).sqrt();
        CMatrix::from_fn(n, n, |r, c| {
            let phase = -2.0 * std::f64::consts::PI * ((r * c) % n) as f64 / n as f64;
            Complex64::from_polar(scale, phase)
        })
    }

    pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
        a.kronecker(b)
    }

    pub fn block_diagonal(blocks: &[CMatrix]) -> CMatrix {
        let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
        let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
        let mut out = CMatrix::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            out.view_mut((r0, c0), (b.nrows(), b.ncols())).copy_from(b);
            r0 += b.nrows();
            c0 += b.ncols();
        }
        out
    }

    /// `U = (Π_{KR} ⊗ I_M)(I_R ⊗ Π_D^{−l} W_D)` built from Kronecker products.
    pub fn u_matrix(k: usize, m: usize, rx: usize, shift: usize) -> CMatrix {
        let d = k * m;
        let eye_m = CMatrix::identity(m, m);
        let eye_r = CMatrix::identity(rx, rx);
        let outer = kron(&PermSpec::interleave(k, rx).to_matrix(), &eye_m);
        let per_antenna = PermSpec::cyclic(d, -(shift as isize)).to_matrix() * dft_matrix(d);
        outer * kron(&eye_r, &per_antenna)
    }

    /// `P = (Π_{KT} ⊗ I_M)(I_T ⊗ Π_{KM})` built from Kronecker products.
    pub fn p_matrix(k: usize, m: usize, tx: usize) -> CMatrix {
        let eye_m = CMatrix::identity(m, m);
        let eye_t = CMatrix::identity(tx, tx);
        kron(&PermSpec::interleave(k, tx).to_matrix(), &eye_m)
            * kron(&eye_t, &PermSpec::interleave(k, m).to_matrix())
    }
}
