//! Beamspace sensing subspace codes for single-RF-chain direction finding.
//!
//! The crate is organised bottom-up:
//!
//! - [`spatial`]: complex vectors, the uniform spatial grid, steering vectors and
//!   the one-dimensional subspace distance.
//! - [`golomb`]: GF(p) / GF(p²) arithmetic and the Bose-Chowla Sidon-set ruler.
//! - [`chancode`]: Reed-Muller codebooks, BPSK mapping, Hamming statistics and the
//!   closed form relating Hamming and subspace distance of BPSK codebooks.
//! - [`beamform`]: BPSK-induced, antenna-selection and convolutional beamformers.
//! - [`subcode`]: beamspace subspace codes, minimum distance and distance bounds.
//! - [`sim`]: measurement synthesis, ML decoding, error bounds and Monte Carlo.

pub mod beamform;
pub mod chancode;
pub mod error;
pub mod golomb;
pub mod sim;
pub mod spatial;
pub mod subcode;

pub use error::{Error, Result};
pub use num_complex::Complex64;
