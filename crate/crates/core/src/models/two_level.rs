use serde::{Deserialize, Serialize};

use super::{ElectronicSystem, Sector};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::statevector::StateVector;

/// Single-qubit molecule: two diabatic levels at `∓ε` mixed by `g`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelParams {
    pub epsilon: f64,
    pub g: f64,
    pub mu: f64,
}

impl Default for TwoLevelParams {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            g: 0.0,
            mu: 1.0,
        }
    }
}

/// `Ĥ_e = −ε Z + g X`, with `μ̂ = μ X` stored as the z component.
pub fn build_two_level(p: TwoLevelParams) -> Result<ElectronicSystem> {
    if !(p.epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "two-level epsilon must be positive, got {}",
            p.epsilon
        )));
    }
    let h_e = PauliSum::from_labels([("Z", -p.epsilon), ("X", p.g)])?;
    let mu = PauliSum::from_labels([("X", p.mu)])?;
    ElectronicSystem::new(h_e, [PauliSum::zero(1), PauliSum::zero(1), mu], Sector::Full)
}

/// `φ = arctan(−g/ε)`; `R_Y(φ)|0⟩` is the exact ground state.
pub fn two_level_ground_angle(p: TwoLevelParams) -> f64 {
    (-p.g / p.epsilon).atan()
}

/// `R_Y(φ)|0⟩ = exp(−i φ/2 Y)|0⟩`.
pub fn two_level_ground_state(p: TwoLevelParams) -> StateVector {
    let mut s = StateVector::zero(1);
    let y = PauliString::new(&[Pauli::Y], 1.0).expect("one qubit");
    s.apply_pauli_rotation(&y, two_level_ground_angle(p) / 2.0)
        .expect("one qubit");
    s
}
