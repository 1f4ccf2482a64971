//! Normalized DFT helpers on top of `rustfft`.
//!
//! `dft` applies the unitary matrix `W_n` with `[W_n]_{m,k} = e^{-j2πmk/n}/√n`,
//! `idft` applies its adjoint. `spectrum` is the unnormalized transform
//! (`√n·W_n`), used for channel and filter frequency responses.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(len, direction))
}

fn transform(x: &[Complex64], direction: FftDirection, scale: f64) -> Vec<Complex64> {
    if x.is_empty() {
        return Vec::new();
    }
    let mut buf = x.to_vec();
    plan(x.len(), direction).process(&mut buf);
    if scale != 1.0 {
        buf.iter_mut().for_each(|v| *v *= scale);
    }
    buf
}

/// Unitary forward DFT, `W_n·x`.
pub fn dft(x: &[Complex64]) -> Vec<Complex64> {
    transform(x, FftDirection::Forward, 1.0 / (x.len() as f64).sqrt())
}

/// Unitary inverse DFT, `W_nᴴ·x`.
pub fn idft(x: &[Complex64]) -> Vec<Complex64> {
    transform(x, FftDirection::Inverse, 1.0 / (x.len() as f64).sqrt())
}

/// Unnormalized forward DFT, `Σ_n x[n]·e^{-j2πqn/N}`.
pub fn spectrum(x: &[Complex64]) -> Vec<Complex64> {
    transform(x, FftDirection::Forward, 1.0)
}

/// Inverse of [`spectrum`].
pub fn inverse_spectrum(x: &[Complex64]) -> Vec<Complex64> {
    transform(x, FftDirection::Inverse, 1.0 / x.len() as f64)
}
