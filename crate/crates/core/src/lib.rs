//! Piecewise-transformation (PTT) mechanisms for ε-local differential
//! privacy on `[-1, 1]`, the Laplace and Duchi baselines, and the analysis
//! used to compare them.
//!
//! * [`domain`]: budgets, input values, PTT parameter derivation and checks.
//! * [`mechanisms`]: samplers, densities and the LDP ratio audit.
//! * [`analysis`]: closed-form variances and the supporting numerics.
//! * [`aggregate`]: mean estimation and the error-scaling experiment.
//! * [`cli`]: the `ptt-ldp` command line.

pub mod aggregate;
pub mod analysis;
pub mod cli;
pub mod domain;
pub mod error;
pub mod fmt;
pub mod mechanisms;

pub use domain::{
    derive_ptt_params, preset_params, PresetName, PrivacyBudget, PttFamily, PttParams, UnitValue,
};
pub use error::{Error, Result};
pub use mechanisms::{MechanismKind, NoisyTuple, RandomSource};
