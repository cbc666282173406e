//! Finite-blocklength achievability bounds for short packets over Rayleigh
//! block-fading channels with pilot-assisted transmission and scaled
//! nearest-neighbour decoding.
//!
//! Two schemes are evaluated by Monte Carlo:
//!
//! * fixed-blocklength transmission without feedback ([`fbl`]), through the
//!   random-coding union bound with parameter `s`;
//! * HARQ with incremental redundancy and a bounded number of rounds
//!   ([`harq`]), through a stop-feedback achievability bound whose stopping
//!   rule thresholds the accumulated generalized information density.
//!
//! [`sweep`] turns single evaluations into energy-per-bit, rate and latency
//! CDF curves; [`cli`] is the command-line front end.

pub mod channel;
pub mod cli;
pub mod config;
pub mod density;
pub mod diagnostics;
pub mod error;
pub mod fbl;
pub mod harq;
pub mod quadrature;
pub mod rng;
pub mod search;
pub mod stats;
pub mod sweep;

pub use config::SystemConfig;
pub use density::SnnParam;
pub use error::{Error, Result};
pub use stats::Estimate;
