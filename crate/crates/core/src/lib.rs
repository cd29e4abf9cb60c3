//! Forward models and parameter extraction for flux-tunable microwave
//! resonators with nanobridge-SQUID inductors.
//!
//! The crate covers the full analysis chain of such circuits:
//!
//! - [`circuit`]: linear LC/coupling algebra and the lossy-constriction
//!   impedance transforms,
//! - [`flux`]: flux quantization, hysteretic branch tracking, tuning curves
//!   and current-phase relations,
//! - [`thermal`]: two-fluid kinetic inductance, Bardeen critical current
//!   and quasiparticle losses versus temperature,
//! - [`kerr`]: the quartic-potential Kerr nonlinearity,
//! - [`response`]: the driven Kerr cavity (steady states, two-tone
//!   susceptibility, photon-number inversion),
//! - [`fit`]: the inverse pipeline from raw complex traces to circuit
//!   parameters, including background correction and error bounds,
//! - [`calib`]: input-line attenuation estimation from amplifier noise.
//!
//! Conventions: SI units throughout; every frequency and rate is angular
//! (rad/s) inside the library and converted to Hz only at I/O boundaries.

// Validation deliberately uses `!(x > 0.0)` so NaN fails the check too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calib;
pub mod circuit;
pub mod consts;
pub mod error;
pub mod fit;
pub mod flux;
pub mod kerr;
pub mod presets;
pub mod response;
pub mod solve;
pub mod thermal;
pub mod trace;

pub use error::{Error, Result};
pub use trace::ComplexTrace;
