//! Cooperative radiative decay in dense ultracold Rydberg gases.
//!
//! The crate computes, end to end, how fast Rb Rydberg levels decay when the
//! gas is dense enough for collective emission:
//!
//! * [`atomic`] / [`numerov`] / [`channels`] — quantum-defect level
//!   energies, radial matrix elements in the Coulomb approximation,
//!   transition wavelengths and vacuum Einstein A coefficients;
//! * [`dynamics`] — the reduced two-atom master equation with its implicit
//!   collective rates, solved per transition channel;
//! * [`integrate`] — adaptive trajectory integration, intensity curves,
//!   effective decay times and the superradiance/ASE classifier;
//! * [`cascade`] — the multi-level decay network and the detected-signal
//!   population evolution;
//! * [`map`] — the critical boundary between superradiant and ASE behaviour
//!   in the (cooperativity, sample size) plane;
//! * [`config`] / [`report`] — run configuration, CSV emission and the run
//!   manifest behind the `rydsr` command-line tool.
//!
//! The dynamics core is fully dimensionless (rates in units of the channel's
//! vacuum rate, time in vacuum lifetimes); physical units enter only through
//! the atomic-structure tables and leave through the trajectory accessors.

pub mod atomic;
pub mod cascade;
pub mod channels;
pub mod config;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod integrate;
pub mod map;
pub mod numerov;
pub mod report;

pub use error::{Error, Result};
