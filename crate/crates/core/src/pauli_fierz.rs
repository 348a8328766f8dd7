//! Electron–photon Hamiltonian on the electronic register plus one photon
//! qubit:
//!
//! `Ĥ(ω, λ) = Ĥ_e⊗I + (ω/2)(I − Z_ph) − λ√(ω/2) (e·μ̂)⊗X_ph + (λ²/2)(e·μ̂)²⊗I`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ElectronicSystem, SectorBasis};
use crate::pathway::PathwaySchedule;
use crate::pauli::{PauliString, PauliSum, HERMITIAN_TOLERANCE, MAX_QUBITS};

/// Frequencies below `OMEGA_GUARD · ω_max` use a finite difference for `∂_s Ĥ`.
pub const OMEGA_GUARD: f64 = 1e-8;

/// Step in `s` of the fallback finite difference.
pub const GUARD_STEP: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct CoupledSystem {
    electronic: ElectronicSystem,
    polarization: [f64; 3],
    projected_dipole: PauliSum,
    dse: PauliSum,
    h_e_ext: PauliSum,
    photon_number: PauliSum,
    coupling: PauliSum,
    dse_ext: PauliSum,
}

/// Origin of a Trotter factor; fixes its place in the product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TermKind {
    Electronic,
    Photon,
    Coupling,
    SelfEnergy,
}

/// A Pauli string with unit coefficient and the schedule-independent part of
/// its weight.
#[derive(Clone, Debug)]
pub struct TrotterTerm {
    pub string: PauliString,
    pub kind: TermKind,
    pub base: f64,
}

impl TrotterTerm {
    /// Coefficient in `Ĥ(ω, λ)`.
    pub fn coefficient(&self, omega: f64, lambda: f64) -> f64 {
        match self.kind {
            TermKind::Electronic => self.base,
            TermKind::Photon => self.base * omega,
            TermKind::Coupling => -self.base * lambda * (omega / 2.0).sqrt(),
            TermKind::SelfEnergy => self.base * lambda * lambda / 2.0,
        }
    }
}

/// Ordered factor list of one first-order Trotter step.
///
/// Order: diagonal electronic strings, remaining electronic strings, the
/// photon frequency, the dipole coupling, then the dipole self-energy; each
/// block in canonical string order. Identity strings are excluded and only
/// contribute a global phase.
#[derive(Clone, Debug)]
pub struct TrotterLayout {
    n_qubits: usize,
    terms: Vec<TrotterTerm>,
    identity: [f64; 4],
}

impl TrotterLayout {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[TrotterTerm] {
        &self.terms
    }

    /// Identity coefficient of `Ĥ(ω, λ)`, the rate of the dropped global phase.
    pub fn identity_coefficient(&self, omega: f64, lambda: f64) -> f64 {
        let [e, p, c, d] = self.identity;
        e + p * omega - c * lambda * (omega / 2.0).sqrt() + d * lambda * lambda / 2.0
    }

    /// Layout of an arbitrary Hermitian operator treated as fixed electronic
    /// terms.
    pub fn from_static(h: &PauliSum) -> Result<Self> {
        let mut layout = Self {
            n_qubits: h.n_qubits(),
            terms: Vec::new(),
            identity: [0.0; 4],
        };
        layout.push_block(h, TermKind::Electronic, true)?;
        Ok(layout)
    }

    fn push_block(&mut self, sum: &PauliSum, kind: TermKind, diagonal_first: bool) -> Result<()> {
        let mut strings: Vec<PauliString> = sum.iter().collect();
        if diagonal_first {
            strings.sort_by_key(|s| s.x_mask() != 0);
        }
        for s in strings {
            let c = s.coeff();
            if c.im.abs() > HERMITIAN_TOLERANCE {
                return Err(Error::ComplexCoefficient(c));
            }
            if s.is_identity() {
                self.identity[kind as usize] += c.re;
                continue;
            }
            self.terms.push(TrotterTerm {
                string: s.with_coeff(1.0),
                kind,
                base: c.re,
            });
        }
        Ok(())
    }
}

impl CoupledSystem {
    /// Attaches a photon qubit polarized along `e` (normalized internally).
    pub fn couple(sys: ElectronicSystem, e: [f64; 3]) -> Result<Self> {
        let norm = e.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::ZeroPolarization);
        }
        let n = sys.n_qubits();
        if n + 1 > MAX_QUBITS {
            return Err(Error::TooManyQubits(n + 1));
        }
        let polarization = e.map(|x| x / norm);
        let projected_dipole = sys.projected_dipole(polarization);
        let dse = projected_dipole.mul(&projected_dipole)?;
        let photon = |label: &str| PauliSum::from_labels([(label, 1.0)]).expect("one-qubit label");
        let id = PauliSum::identity(1, 1.0);
        let h_e_ext = sys.h_e.tensor(&id)?;
        let photon_number = PauliSum::identity(n, 0.5).tensor(&id.sub(&photon("Z"))?)?;
        let coupling = projected_dipole.tensor(&photon("X"))?;
        let dse_ext = dse.tensor(&id)?;
        Ok(Self {
            electronic: sys,
            polarization,
            projected_dipole,
            dse,
            h_e_ext,
            photon_number,
            coupling,
            dse_ext,
        })
    }

    pub fn electronic(&self) -> &ElectronicSystem {
        &self.electronic
    }

    pub fn polarization(&self) -> [f64; 3] {
        self.polarization
    }

    pub fn n_electronic_qubits(&self) -> usize {
        self.electronic.n_qubits()
    }

    /// The photon is the highest qubit.
    pub fn photon_qubit(&self) -> usize {
        self.electronic.n_qubits()
    }

    pub fn n_qubits(&self) -> usize {
        self.electronic.n_qubits() + 1
    }

    /// `e·μ̂` on the electronic register.
    pub fn projected_dipole(&self) -> &PauliSum {
        &self.projected_dipole
    }

    /// `(e·μ̂)²` on the electronic register.
    pub fn dse(&self) -> &PauliSum {
        &self.dse
    }

    /// `Ĥ_e ⊗ I`.
    pub fn electronic_hamiltonian(&self) -> &PauliSum {
        &self.h_e_ext
    }

    /// `b̂†b̂ = (I − Z_ph)/2`.
    pub fn photon_number(&self) -> &PauliSum {
        &self.photon_number
    }

    /// Electronic sector with the photon qubit free.
    pub fn sector_basis(&self) -> Result<SectorBasis> {
        SectorBasis::new(self.n_qubits(), self.electronic.sector, self.n_electronic_qubits())
    }

    pub fn hamiltonian_at(&self, omega: f64, lambda: f64) -> Result<PauliSum> {
        if omega < 0.0 {
            return Err(Error::NegativeFrequency(omega));
        }
        let mut h = self.h_e_ext.clone();
        h.add_scaled(&self.photon_number, omega)?;
        h.add_scaled(&self.coupling, -lambda * (omega / 2.0).sqrt())?;
        h.add_scaled(&self.dse_ext, lambda * lambda / 2.0)?;
        Ok(h)
    }

    /// `∂Ĥ/∂ω = b̂†b̂ − λ/(2√(2ω)) (e·μ̂)⊗X`.
    fn d_omega(&self, omega: f64, lambda: f64) -> Result<PauliSum> {
        let mut d = self.photon_number.clone();
        d.add_scaled(&self.coupling, -lambda / (2.0 * (2.0 * omega).sqrt()))?;
        Ok(d)
    }

    /// `∂Ĥ/∂λ = −√(ω/2) (e·μ̂)⊗X + λ (e·μ̂)²`.
    fn d_lambda(&self, omega: f64, lambda: f64) -> Result<PauliSum> {
        let mut d = self.coupling.scale(-(omega / 2.0).sqrt());
        d.add_scaled(&self.dse_ext, lambda)?;
        Ok(d)
    }

    /// `∂_s Ĥ(ω(s), λ(s))` for `s ∈ (0, 1]`.
    pub fn d_hamiltonian_d_s(&self, sched: &PathwaySchedule, s: f64) -> Result<PauliSum> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::PathCoordinate(s));
        }
        let omega = sched.omega(s)?;
        let lambda = sched.lambda(s)?;
        if omega < OMEGA_GUARD * sched.omega_max {
            let lo = (s - GUARD_STEP).max(0.0);
            let hi = (s + GUARD_STEP).min(1.0);
            let h_hi = self.hamiltonian_at(sched.omega(hi)?, sched.lambda(hi)?)?;
            let h_lo = self.hamiltonian_at(sched.omega(lo)?, sched.lambda(lo)?)?;
            return Ok(h_hi.sub(&h_lo)?.scale(1.0 / (hi - lo)));
        }
        let mut d = self.d_omega(omega, lambda)?.scale(sched.omega_prime(s)?);
        d.add_scaled(&self.d_lambda(omega, lambda)?, sched.lambda_prime(s)?)?;
        Ok(d)
    }

    /// Fixed factor order used by every Trotter step of this system.
    pub fn trotter_layout(&self) -> Result<TrotterLayout> {
        let mut layout = TrotterLayout {
            n_qubits: self.n_qubits(),
            terms: Vec::new(),
            identity: [0.0; 4],
        };
        layout.push_block(&self.h_e_ext, TermKind::Electronic, true)?;
        layout.push_block(&self.photon_number, TermKind::Photon, false)?;
        layout.push_block(&self.coupling, TermKind::Coupling, false)?;
        layout.push_block(&self.dse_ext, TermKind::SelfEnergy, false)?;
        Ok(layout)
    }

    /// Reassembles `Ĥ(ω, λ)` from a layout, identity part included.
    pub fn layout_hamiltonian(layout: &TrotterLayout, omega: f64, lambda: f64) -> Result<PauliSum> {
        let mut h = PauliSum::identity(layout.n_qubits, layout.identity_coefficient(omega, lambda));
        for t in &layout.terms {
            h.add_string(&t.string.with_coeff(Complex64::new(t.coefficient(omega, lambda), 0.0)))?;
        }
        Ok(h)
    }
}
