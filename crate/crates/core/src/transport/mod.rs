//! Particle stepping with simplified physics and chip tallies.
//!
//! Photons: photoelectric absorption or Klein–Nishina Compton scattering
//! with local recoil deposit. Neutrons: elastic scattering, isotropic in the
//! centre of mass. Muons: straight lines with mean continuous loss.
//! Electrons and alphas: local deposit when out of range of the chip,
//! otherwise straight-line CSDA slowing down. No secondaries are produced.

pub mod engine;
pub mod physics;
pub mod tally;

pub use engine::{CrossingRecord, EventResult, Transport, TransportOptions};
pub use tally::{Binning, Tally};
