//! Superdense-coding capacity of two-qubit states sent through correlated
//! (memory) noise channels, optionally protected by a weak measurement
//! before the channel and a reversal measurement after it.
//!
//! The pieces, bottom up:
//!
//! - [`matrix`]: dense complex matrices and a Jacobi Hermitian eigensolver.
//! - [`state`]: validated density matrices, the Bell-like input, entropy.
//! - [`channel`]: amplitude damping, phase damping and depolarizing Kraus
//!   families and their two-use correlated mixture.
//! - [`coding`]: the encoding ensemble and the capacity `S(ρ̄) − S(ρ)`.
//! - [`protect`]: the weak/reversal measurement protocol and a strength
//!   optimizer.
//! - [`closed_form`]: closed-form output states used to cross-check the
//!   Kraus pipeline.
//! - [`sweep`]: parameter sweeps and CSV/JSON output for the CLI.

pub mod channel;
pub mod closed_form;
pub mod coding;
pub mod error;
pub mod matrix;
pub mod protect;
pub mod state;
pub mod sweep;

pub use channel::{build_channel, ChannelKind, ChannelParams, CorrelatedChannel, KrausSet};
pub use coding::{capacity, Capacity};
pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, C64};
pub use protect::{optimize_strengths, run_protocol, MeasurementStrengths, ProtocolResult};
pub use state::{bell_like_state, BellLikeParams, DensityMatrix};
