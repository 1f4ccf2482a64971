//! MIMO-GFDM spatial multiplexing with frequency-domain decoupling.
//!
//! A GFDM transmitter whose prototype filter occupies at most `M` consecutive
//! frequency bins lets a MIMO receiver split detection of a whole block into
//! `K` independent per-subcarrier problems of size `MR×MT`. This crate
//! provides the pieces to build, check and benchmark that receiver:
//!
//! - [`waveform`]: prototype filters (Dirichlet, raised cosine, custom), the
//!   transmitter matrix and a fast modulator for compact-support filters.
//! - [`channel`]: seeded Rayleigh multipath channels with an exponential power
//!   delay profile, cyclic-prefix transmission and AWGN.
//! - [`decoupling`]: the receive transform `U`, the data permutation `P`, the
//!   per-subcarrier blocks `F_k`, and a dense residual check of the factorization.
//! - [`detect`]: sorted QR (plain and MMSE), a Schnorr–Euchner depth-first
//!   sphere decoder, the per-subcarrier detector, the grouped-SIC full-matrix
//!   baseline, MIMO-OFDM detection and an exhaustive ML oracle.
//! - [`sim`]: configuration, seeded Monte Carlo sweeps, closed-form
//!   complex-multiplication counts and CSV reports.
//!
//! ```
//! use gfdm_mimo::waveform::{dirichlet_filter, GfdmConfig};
//!
//! let cfg = GfdmConfig::new(8, 2).unwrap();
//! let filter = dirichlet_filter(&cfg);
//! assert!(filter.is_ici_free());
//! assert_eq!(filter.support().unwrap().shift, 1);
//! ```
//!
//! The `book/` directory next to the crates holds a longer guide; its code
//! listings are compiled and run as doc-tests of this crate.

pub mod channel;
pub mod constellation;
pub mod decoupling;
pub mod detect;
pub mod error;
pub mod fft;
pub mod sim;
pub mod waveform;

pub use constellation::Constellation;
pub use error::{Error, Result};

/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<num_complex::Complex64>;

#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/waveform.md")]
    pub mod waveform {}
    #[doc = include_str!("../../../book/src/channel.md")]
    pub mod channel {}
    #[doc = include_str!("../../../book/src/decoupling.md")]
    pub mod decoupling {}
    #[doc = include_str!("../../../book/src/detection.md")]
    pub mod detection {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    pub mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
