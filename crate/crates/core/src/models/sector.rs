use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::StateVector;

/// Symmetry sector of the electronic register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sector {
    /// Every computational basis state.
    Full,
    /// Fixed electron number and `2·M_s` on interleaved spin orbitals.
    Fermionic { n_electrons: usize, two_ms: i32 },
}

impl Sector {
    /// Whether electronic configuration `b` (low `n_electronic` bits) belongs.
    pub fn contains(self, b: u64, n_electronic: usize) -> bool {
        match self {
            Sector::Full => true,
            Sector::Fermionic { n_electrons, two_ms } => {
                let mask = if n_electronic == 64 {
                    u64::MAX
                } else {
                    (1u64 << n_electronic) - 1
                };
                let occ = b & mask;
                let up = (occ & 0x5555_5555_5555_5555).count_ones() as i32;
                let down = (occ & 0xAAAA_AAAA_AAAA_AAAA).count_ones() as i32;
                (up + down) as usize == n_electrons && up - down == two_ms
            }
        }
    }
}

/// Sorted list of the basis states spanning a sector.
///
/// The low `n_electronic` qubits are constrained by the sector; any qubits
/// above them (the photon) are unconstrained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectorBasis {
    n_qubits: usize,
    states: Vec<u64>,
}

impl SectorBasis {
    pub fn new(n_qubits: usize, sector: Sector, n_electronic: usize) -> Result<Self> {
        if n_electronic > n_qubits {
            return Err(Error::SizeMismatch {
                left: n_electronic,
                right: n_qubits,
            });
        }
        if n_qubits >= 40 {
            return Err(Error::TooManyQubits(n_qubits));
        }
        let states: Vec<u64> = (0..1u64 << n_qubits)
            .filter(|&b| sector.contains(b, n_electronic))
            .collect();
        if states.is_empty() {
            return Err(Error::EmptySector);
        }
        Ok(Self { n_qubits, states })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn index_of(&self, b: u64) -> Option<usize> {
        self.states.binary_search(&b).ok()
    }

    /// Scatters sector coordinates into a full-register state.
    pub fn embed(&self, coords: impl IntoIterator<Item = Complex64>) -> StateVector {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << self.n_qubits];
        for (&b, c) in self.states.iter().zip(coords) {
            amps[b as usize] = c;
        }
        StateVector::normalized(amps).expect("eigenvectors have unit norm")
    }

    /// Gathers the sector components of a full-register state.
    pub fn restrict(&self, state: &StateVector) -> Vec<Complex64> {
        let amps = state.amplitudes();
        self.states.iter().map(|&b| amps[b as usize]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_filled_two_site_singlet_sector() {
        let basis = SectorBasis::new(
            4,
            Sector::Fermionic {
                n_electrons: 2,
                two_ms: 0,
            },
            4,
        )
        .unwrap();
        // one up (qubit 0 or 2) and one down (qubit 1 or 3)
        assert_eq!(basis.states(), &[0b0011, 0b0110, 0b1001, 0b1100]);
    }

    #[test]
    fn photon_qubit_is_free() {
        let sector = Sector::Fermionic {
            n_electrons: 1,
            two_ms: 1,
        };
        let basis = SectorBasis::new(3, sector, 2).unwrap();
        assert_eq!(basis.states(), &[0b001, 0b101]);
    }

    #[test]
    fn empty_sector_is_an_error() {
        let sector = Sector::Fermionic {
            n_electrons: 5,
            two_ms: 1,
        };
        assert!(matches!(SectorBasis::new(4, sector, 4), Err(Error::EmptySector)));
    }
}
