//! Non-Hermitian two-level dynamics with real spectra: propagation, Bloch
//! equation, Leggett–Garg correlators, Hermitian dilation with post-selection,
//! and direct-search scans of the maximal correlator and evolution speed.

// `!(x > y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod dynamics;
pub mod embedding;
pub mod error;
pub mod export;
pub mod lgi;
pub mod qmat;
pub mod scan;

pub use error::{Error, Result};
