//! Post-selection, fidelities, eigenvalue scans along the pathway and
//! power-law fits.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_size, Error, Result};
use crate::models::{diagonalize_in, SectorBasis};
use crate::pathway::PathwaySchedule;
use crate::pauli_fierz::CoupledSystem;
use crate::statevector::{StateVector, MIN_PROJECTION_PROBABILITY};

/// Projects the photon onto `|0⟩`; returns the renormalized state and `p₀`.
pub fn postselect_vacuum(state: &StateVector, photon_qubit: usize) -> Result<(StateVector, f64)> {
    state.project_qubit(photon_qubit, 0)
}

/// Fidelities of a final state against an electronic target in the vacuum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    /// `|⟨Ψ_J;0|Ψ⟩|²`.
    pub fid_raw: f64,
    /// `|⟨Ψ_J|Ψ_post⟩|²` after vacuum projection; NaN when `p₀` vanishes.
    pub fid_postselected: f64,
    pub p0: f64,
    /// `1 − fid_postselected`.
    pub eps_final: f64,
    /// `1 − fid_raw`.
    pub eps_final_raw: f64,
}

pub fn fidelity_report(final_state: &StateVector, cs: &CoupledSystem, target: &StateVector) -> Result<FidelityReport> {
    check_size(cs.n_qubits(), final_state.n_qubits())?;
    check_size(cs.n_electronic_qubits(), target.n_qubits())?;
    let vacuum = final_state.high_qubit_slice(0);
    let p0: f64 = vacuum.iter().map(|a| a.norm_sqr()).sum();
    let overlap: Complex64 = target.amplitudes().iter().zip(vacuum).map(|(a, b)| a.conj() * b).sum();
    let fid_raw = overlap.norm_sqr();
    let fid_postselected = if p0 >= MIN_PROJECTION_PROBABILITY {
        fid_raw / p0
    } else {
        f64::NAN
    };
    Ok(FidelityReport {
        fid_raw,
        fid_postselected,
        p0,
        eps_final: 1.0 - fid_postselected,
        eps_final_raw: 1.0 - fid_raw,
    })
}

/// One point of an eigenvalue scan along the schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub s: f64,
    pub omega: f64,
    pub lambda: f64,
    /// Lowest eigenvalues of `Ĥ(s)` in the sector, ascending.
    pub energies: Vec<f64>,
    /// Energy rank of the followed adiabatic state.
    pub followed_index: usize,
    pub followed_energy: f64,
    /// `|⟨Ψ_0;1|Φ(s)⟩|²` for the followed state `Φ(s)`.
    pub initial_weight: f64,
    /// `|⟨Ψ_J;0|Φ(s)⟩|²`.
    pub target_weight: f64,
}

/// Eigenvalues of `Ĥ(s)` at `n_points` uniform `s ∈ [0, 1]`, following the
/// adiabatic state that starts as `initial` by maximum overlap with the
/// previous grid point. `initial` and `target` live on the coupled register.
pub fn pathway_spectrum(
    cs: &CoupledSystem,
    sched: &PathwaySchedule,
    n_points: usize,
    n_states: usize,
    initial: &StateVector,
    target: &StateVector,
) -> Result<Vec<SpectrumPoint>> {
    if n_points < 2 {
        return Err(Error::InvalidParameter(
            "a pathway scan needs at least two points".into(),
        ));
    }
    check_size(cs.n_qubits(), initial.n_qubits())?;
    check_size(cs.n_qubits(), target.n_qubits())?;
    let basis: SectorBasis = cs.sector_basis()?;
    let to_sector = |s: &StateVector| DVector::from_vec(basis.restrict(s));
    let initial_v = to_sector(initial);
    let target_v = to_sector(target);
    // diagonalizations are independent; tracking is sequential
    let spectra = (0..n_points)
        .into_par_iter()
        .map(|i| {
            let s = i as f64 / (n_points - 1) as f64;
            let (omega, lambda) = (sched.omega(s)?, sched.lambda(s)?);
            let spectrum = diagonalize_in(&cs.hamiltonian_at(omega, lambda)?, basis.clone())?;
            Ok((s, omega, lambda, spectrum))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut previous = initial_v.clone();
    let mut points = Vec::with_capacity(n_points);
    for (i, (s, omega, lambda, spectrum)) in spectra.into_iter().enumerate() {
        let overlaps: Vec<f64> = (0..spectrum.len())
            .map(|k| spectrum.sector_vector(k).dotc(&previous).norm())
            .collect();
        let followed = (0..spectrum.len())
            .max_by(|&a, &b| overlaps[a].total_cmp(&overlaps[b]))
            .ok_or(Error::EmptySector)?;
        // ω(0) = 0 leaves the photon doublet degenerate; keep the initial
        // vector itself there instead of an arbitrary eigenvector mixture.
        let vector = if i == 0 {
            initial_v.clone()
        } else {
            spectrum.sector_vector(followed)
        };
        let energies: Vec<f64> = spectrum.energies().iter().take(n_states).copied().collect();
        points.push(SpectrumPoint {
            s,
            omega,
            lambda,
            energies,
            followed_index: followed,
            followed_energy: spectrum.energy(followed),
            initial_weight: vector.dotc(&initial_v).norm_sqr(),
            target_weight: vector.dotc(&target_v).norm_sqr(),
        });
        previous = vector;
    }
    Ok(points)
}

/// `y ≈ prefactor · x^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub prefactor: f64,
    pub exponent: f64,
    /// Coefficient of determination of the log–log regression.
    pub r_squared: f64,
}

/// Ordinary least squares of `ln y` on `ln x`. Needs at least two points
/// with positive coordinates and distinct `x`.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<PowerLaw> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter("x and y lengths differ".into()));
    }
    if x.len() < 2 {
        return Err(Error::InvalidParameter(
            "power-law fit needs at least two points".into(),
        ));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter("power-law fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("power-law fit needs distinct x values".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = ly.iter().map(|b| (b - my).powi(2)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(PowerLaw {
        prefactor: intercept.exp(),
        exponent,
        r_squared,
    })
}
