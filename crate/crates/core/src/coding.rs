//! Dense coding: the four-unitary encoding ensemble and the capacity
//! `χ = S(ρ̄) − S(ρ)` of a shared two-qubit state.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::state::DensityMatrix;

/// Slack allowed on χ before clamping to [0, 2].
pub const CAPACITY_SLACK: f64 = 1e-9;

/// Mutually orthogonal single-qubit unitaries `U₀₀, U₁₀, U₀₁, U₁₁`.
#[derive(Clone, Debug, PartialEq)]
pub struct EncoderSet {
    ops: [ComplexMatrix; 4],
}

impl EncoderSet {
    pub fn ops(&self) -> &[ComplexMatrix; 4] {
        &self.ops
    }
}

/// `U₀₀ = I`, `U₁₀ = σ_z`, `U₀₁ = σ_x`, `U₁₁ = σ_x σ_z`.
///
/// `U₁₁|x⟩ = e^{iπx}|x ⊕ 1⟩`, i.e. `[[0, −1], [1, 0]]`.
pub fn standard_encoders() -> EncoderSet {
    let z = ComplexMatrix::sigma_z();
    let x = ComplexMatrix::sigma_x();
    let xz = x.matmul(&z).expect("2x2");
    EncoderSet {
        ops: [ComplexMatrix::identity(2), z, x, xz],
    }
}

/// Which qubit the sender encodes on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EncodingSlot {
    First,
    Second,
}

/// Equal-weight mixture of the four encoded states, encoding on the first qubit.
pub fn average_signal_state(rho: &DensityMatrix) -> Result<DensityMatrix> {
    average_signal_state_on(rho, EncodingSlot::First)
}

pub fn average_signal_state_on(rho: &DensityMatrix, slot: EncodingSlot) -> Result<DensityMatrix> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            left: 4,
            right: rho.dim(),
        });
    }
    let id = ComplexMatrix::identity(2);
    let mut avg = ComplexMatrix::zeros(4);
    for u in standard_encoders().ops() {
        let full = match slot {
            EncodingSlot::First => u.kron(&id),
            EncodingSlot::Second => id.kron(u),
        };
        avg = avg.add(&full.conjugate(rho.matrix())?)?;
    }
    DensityMatrix::validate(avg.scale(0.25))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Capacity {
    /// χ clamped to [0, 2].
    pub chi: f64,
    /// `entropy_avg − entropy_state` before clamping.
    pub raw: f64,
    pub entropy_avg: f64,
    pub entropy_state: f64,
}

pub fn capacity(rho: &DensityMatrix) -> Result<Capacity> {
    capacity_on(rho, EncodingSlot::First)
}

pub fn capacity_on(rho: &DensityMatrix, slot: EncodingSlot) -> Result<Capacity> {
    let entropy_avg = average_signal_state_on(rho, slot)?.entropy();
    let entropy_state = rho.entropy();
    let raw = entropy_avg - entropy_state;
    debug_assert!(
        (-CAPACITY_SLACK..=2.0 + CAPACITY_SLACK).contains(&raw),
        "capacity {raw} outside [0, 2]"
    );
    Ok(Capacity {
        chi: raw.clamp(0.0, 2.0),
        raw,
        entropy_avg,
        entropy_state,
    })
}
