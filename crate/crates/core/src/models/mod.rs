//! Electronic model Hamiltonians, dipole operators and the exact
//! diagonalization oracle.

mod fcidump;
mod hubbard;
mod molecular;
mod sector;
mod two_level;

pub use fcidump::{
    dipole_to_string, fcidump_to_string, parse_dipole_file, parse_dipole_str, parse_fcidump, parse_fcidump_str,
    write_dipole_file, write_fcidump, MolecularIntegrals,
};
pub use hubbard::{build_hubbard, double_occupancy_operator, HubbardParams};
pub use molecular::build_molecular;
pub use sector::{Sector, SectorBasis};
pub use two_level::{build_two_level, two_level_ground_angle, two_level_ground_state, TwoLevelParams};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::dense::{hermitian_eigen, MAX_DENSE_DIM};
use crate::error::{check_size, Error, Result};
use crate::operator::PauliOperator;
use crate::pauli::{jordan_wigner_sum, FermionOp, PauliSum};
use crate::statevector::StateVector;

/// Default absolute transition-dipole threshold separating bright from dark.
pub const BRIGHT_THRESHOLD: f64 = 1e-6;

/// Energy window within which eigenvalues are treated as one level.
pub const DEGENERACY_TOLERANCE: f64 = 1e-8;

/// Electronic Hamiltonian with its Cartesian dipole components.
#[derive(Clone, Debug)]
pub struct ElectronicSystem {
    pub h_e: PauliSum,
    /// `μ̂_x, μ̂_y, μ̂_z`.
    pub dipole: [PauliSum; 3],
    /// Symmetry sector the physical states live in.
    pub sector: Sector,
}

impl ElectronicSystem {
    pub fn new(h_e: PauliSum, dipole: [PauliSum; 3], sector: Sector) -> Result<Self> {
        let n = h_e.n_qubits();
        for d in &dipole {
            check_size(n, d.n_qubits())?;
            if !d.is_hermitian() {
                return Err(Error::NotHermitian);
            }
        }
        if !h_e.is_hermitian() {
            return Err(Error::NotHermitian);
        }
        Ok(Self { h_e, dipole, sector })
    }

    pub fn n_qubits(&self) -> usize {
        self.h_e.n_qubits()
    }

    /// `e·μ̂` for a (not necessarily normalized) direction.
    pub fn projected_dipole(&self, direction: [f64; 3]) -> PauliSum {
        let mut out = PauliSum::zero(self.n_qubits());
        for (d, &e) in self.dipole.iter().zip(&direction) {
            if e != 0.0 {
                out.add_scaled(d, e).expect("dipole components share the register");
            }
        }
        out
    }

    /// Total electron number operator on the spin-orbital register.
    pub fn number_operator(&self) -> PauliSum {
        number_operator(self.n_qubits())
    }
}

/// `N̂ = Σ_p n̂_p` over all spin orbitals.
pub fn number_operator(n_modes: usize) -> PauliSum {
    let ops: Vec<FermionOp> = (0..n_modes).map(FermionOp::number).collect();
    jordan_wigner_sum(&ops, n_modes).expect("modes within register")
}

/// `Ŝ_z = ½ Σ_p (n̂_{p↑} − n̂_{p↓})` with interleaved spin orbitals.
pub fn spin_z_operator(n_modes: usize) -> PauliSum {
    let ops: Vec<FermionOp> = (0..n_modes)
        .map(|m| {
            let sign = if m % 2 == 0 { 0.5 } else { -0.5 };
            FermionOp::new(sign, vec![(m, true), (m, false)])
        })
        .collect();
    jordan_wigner_sum(&ops, n_modes).expect("modes within register")
}

/// Eigenpairs of an operator restricted to a sector, ascending in energy.
#[derive(Clone, Debug)]
pub struct Spectrum {
    basis: SectorBasis,
    energies: Vec<f64>,
    vectors: DMatrix<Complex64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn energy(&self, k: usize) -> f64 {
        self.energies[k]
    }

    pub fn basis(&self) -> &SectorBasis {
        &self.basis
    }

    /// Eigenvector `k` in sector coordinates.
    pub fn sector_vector(&self, k: usize) -> DVector<Complex64> {
        self.vectors.column(k).into_owned()
    }

    /// Eigenvector `k` on the full register.
    pub fn state(&self, k: usize) -> StateVector {
        self.basis.embed(self.vectors.column(k).iter().copied())
    }

    /// `(E_k, |Ψ_k⟩)` pairs.
    pub fn pairs(&self) -> impl Iterator<Item = (f64, StateVector)> + '_ {
        (0..self.len()).map(|k| (self.energies[k], self.state(k)))
    }

    /// Indices of the eigenvalues within [`DEGENERACY_TOLERANCE`] of `E_k`.
    pub fn cluster(&self, k: usize) -> std::ops::Range<usize> {
        let e = self.energies[k];
        let mut lo = k;
        while lo > 0 && (self.energies[lo - 1] - e).abs() < DEGENERACY_TOLERANCE {
            lo -= 1;
        }
        let mut hi = k + 1;
        while hi < self.len() && (self.energies[hi] - e).abs() < DEGENERACY_TOLERANCE {
            hi += 1;
        }
        lo..hi
    }

    /// `⟨Ψ_j|O|Ψ_k⟩` through the sector-restricted matrix of `op`.
    pub fn matrix_element(&self, op: &SectorMatrix, j: usize, k: usize) -> Complex64 {
        let v = self.vectors.column(k);
        let w = &op.matrix * v;
        self.vectors.column(j).dotc(&w)
    }
}

/// Dense matrix of an operator that maps a sector into itself.
#[derive(Clone, Debug)]
pub struct SectorMatrix {
    pub matrix: DMatrix<Complex64>,
}

impl SectorMatrix {
    /// Restricts `op` to `basis`; amplitude leaking out of the sector is dropped.
    pub fn new(op: &PauliSum, basis: &SectorBasis) -> Result<Self> {
        check_size(op.n_qubits(), basis.n_qubits())?;
        let dim = basis.len();
        if dim > MAX_DENSE_DIM {
            return Err(Error::DimensionTooLarge {
                dimension: dim,
                limit: MAX_DENSE_DIM,
            });
        }
        let compiled = PauliOperator::new(op);
        let mut matrix = DMatrix::<Complex64>::zeros(dim, dim);
        for (col, &b) in basis.states().iter().enumerate() {
            compiled.column(b, |row_state, value| {
                if let Some(row) = basis.index_of(row_state) {
                    matrix[(row, col)] += value;
                }
            });
        }
        Ok(Self { matrix })
    }
}

/// Full eigendecomposition of `h` inside `basis`.
pub fn diagonalize_in(h: &PauliSum, basis: SectorBasis) -> Result<Spectrum> {
    if basis.is_empty() {
        return Err(Error::EmptySector);
    }
    if !h.is_hermitian() {
        return Err(Error::NotHermitian);
    }
    let m = SectorMatrix::new(h, &basis)?;
    let (energies, vectors) = hermitian_eigen(&m.matrix);
    Ok(Spectrum {
        basis,
        energies,
        vectors,
    })
}

/// Spectrum of `sys.h_e` restricted to `sector`.
pub fn exact_diagonalize(sys: &ElectronicSystem, sector: Sector) -> Result<Spectrum> {
    let basis = SectorBasis::new(sys.n_qubits(), sector, sys.n_qubits())?;
    diagonalize_in(&sys.h_e, basis)
}

/// Lowest excited level reachable from the ground state through `dipole`.
#[derive(Clone, Debug)]
pub struct BrightState {
    /// First index of the bright level in the spectrum.
    pub index: usize,
    pub energy: f64,
    pub excitation_energy: f64,
    /// `|⟨Ψ_0|μ̂|Ψ_J⟩|`, summed in quadrature over a degenerate level.
    pub transition_dipole: f64,
    /// Normalized target; inside a degenerate level this is the projection
    /// of `μ̂|Ψ_0⟩` onto the level.
    pub state: StateVector,
}

/// Scans the spectrum upwards for the first level with a transition dipole
/// above `threshold`. Levels degenerate with the ground state are skipped.
pub fn find_first_bright_state(spectrum: &Spectrum, dipole: &PauliSum, threshold: f64) -> Result<BrightState> {
    if threshold <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "bright-state threshold must be positive, got {threshold}"
        )));
    }
    if spectrum.is_empty() {
        return Err(Error::EmptySector);
    }
    let mu = SectorMatrix::new(dipole, spectrum.basis())?;
    let ground = spectrum.vectors.column(0).into_owned();
    let mu_ground = &mu.matrix * &ground;
    let mut k = spectrum.cluster(0).end;
    while k < spectrum.len() {
        let level = spectrum.cluster(k);
        let overlaps: Vec<Complex64> = level
            .clone()
            .map(|j| spectrum.vectors.column(j).dotc(&mu_ground))
            .collect();
        let strength = overlaps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if strength > threshold {
            let mut target = DVector::<Complex64>::zeros(spectrum.basis.len());
            for (j, c) in level.clone().zip(&overlaps) {
                target += spectrum.vectors.column(j) * *c;
            }
            target /= Complex64::new(strength, 0.0);
            return Ok(BrightState {
                index: level.start,
                energy: spectrum.energy(level.start),
                excitation_energy: spectrum.energy(level.start) - spectrum.energy(0),
                transition_dipole: strength,
                state: spectrum.basis.embed(target.iter().copied()),
            });
        }
        k = level.end;
    }
    Err(Error::NoBrightState { threshold })
}
