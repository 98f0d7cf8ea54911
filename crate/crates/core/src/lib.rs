//! Locally differentially private frequency estimation over a diffusion-based
//! molecular communication link.
//!
//! The crate is `no_std` (it needs `alloc`). Enable `std` for `std::error::Error`
//! impls and `parallel` for rayon-backed per-user parallelism; results never
//! depend on either.
//!
//! * [`channel`]: absorption probabilities, multinomial arrivals, ISI superposition,
//!   counting noise and threshold detection.
//! * [`ldp`]: the six frequency oracles (KRR, Basic RAPPOR, OUE, BLH, OLH, HR),
//!   their fixed-length wire encodings and unbiased estimators.
//! * [`rlim`]: (2,∞) run-length-limited minimum-weight codebooks and last-wins repair.
//! * [`harness`]: the end-to-end Monte-Carlo pipelines and ℓ1 evaluation.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod channel;
pub mod harness;
pub mod ldp;
pub mod rlim;
pub mod rng;

mod bits;
mod error;

pub use bits::{bits_to_u64, count_ones, u64_to_bits};
pub use error::Error;
