//! Simulator and key-leakage cryptanalysis toolkit for the αη (Y-00)
//! coherent-state stream cipher.
//!
//! The pipeline mirrors a transmission: [`keystream`] expands the secret key
//! into per-symbol bases, [`protocol`] maps bases and message bits onto phase
//! indices, [`channel`] adds wrapped Gaussian phase noise (optionally with
//! deliberate signal randomization), [`infotheory`] measures how much each
//! observation reveals, and [`attack`] turns observations back into the key.
//! [`harness`] wires these into reproducible, seeded experiments.

pub mod attack;
pub mod channel;
pub mod error;
pub mod harness;
pub mod infotheory;
pub mod keystream;
pub mod protocol;
pub mod seeding;

pub use error::{Error, Result};
