//! Adiabatic schedule `ω(s) = ω_max s`, `λ(s) = λ_max sin³(πs)` and the
//! adiabatic-time estimate built on it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{exact_diagonalize, find_first_bright_state, ElectronicSystem, SectorMatrix, BRIGHT_THRESHOLD};
use crate::pauli_fierz::CoupledSystem;

/// Pairs closer than this in energy count as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;

/// Couplings below this are treated as symmetry-forbidden.
pub const NEGLIGIBLE_COUPLING: f64 = 1e-10;

/// Default number of interior grid points for [`adiabatic_time_bound`].
pub const BOUND_GRID: usize = 201;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathwaySchedule {
    pub omega_max: f64,
    pub lambda_max: f64,
    pub total_time: f64,
    pub n_steps: usize,
}

impl PathwaySchedule {
    pub fn new(omega_max: f64, lambda_max: f64, total_time: f64, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidParameter("schedule needs at least one step".into()));
        }
        if !(total_time >= 0.0) || !total_time.is_finite() {
            return Err(Error::InvalidParameter(format!("total time {total_time} is invalid")));
        }
        if omega_max < 0.0 {
            return Err(Error::NegativeFrequency(omega_max));
        }
        if !lambda_max.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda_max {lambda_max} is invalid")));
        }
        Ok(Self {
            omega_max,
            lambda_max,
            total_time,
            n_steps,
        })
    }

    /// Schedule with `N = T/δT` steps; `T` must be a whole number of steps.
    pub fn from_time_step(omega_max: f64, lambda_max: f64, total_time: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("time step {dt} must be positive")));
        }
        let ratio = total_time / dt;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "total time {total_time} is not a positive multiple of the step {dt}"
            )));
        }
        Self::new(omega_max, lambda_max, total_time, n as usize)
    }

    pub fn dt(&self) -> f64 {
        self.total_time / self.n_steps as f64
    }

    /// `s_k = k/N`.
    pub fn s(&self, k: usize) -> f64 {
        k as f64 / self.n_steps as f64
    }

    fn check(s: f64) -> Result<()> {
        if (0.0..=1.0).contains(&s) {
            Ok(())
        } else {
            Err(Error::PathCoordinate(s))
        }
    }

    pub fn omega(&self, s: f64) -> Result<f64> {
        Self::check(s)?;
        Ok(self.omega_max * s)
    }

    pub fn lambda(&self, s: f64) -> Result<f64> {
        Self::check(s)?;
        Ok(self.lambda_max * (PI * s).sin().powi(3))
    }

    pub fn omega_prime(&self, s: f64) -> Result<f64> {
        Self::check(s)?;
        Ok(self.omega_max)
    }

    pub fn lambda_prime(&self, s: f64) -> Result<f64> {
        Self::check(s)?;
        let x = PI * s;
        Ok(3.0 * PI * self.lambda_max * x.sin().powi(2) * x.cos())
    }

    /// `(s_k, ω_k, λ_k)` for `k = 0..N−1`, the left endpoints of each step.
    pub fn grid(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.n_steps).map(move |k| {
            let s = self.s(k);
            (s, self.omega_max * s, self.lambda_max * (PI * s).sin().powi(3))
        })
    }
}

/// `ω_max = 2ΔE` with `ΔE` the first bright excitation along `polarization`.
pub fn estimate_omega_max(sys: &ElectronicSystem, polarization: [f64; 3]) -> Result<f64> {
    let norm = polarization.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroPolarization);
    }
    let e = polarization.map(|x| x / norm);
    let spectrum = exact_diagonalize(sys, sys.sector)?;
    let bright = find_first_bright_state(&spectrum, &sys.projected_dipole(e), BRIGHT_THRESHOLD)?;
    Ok(2.0 * bright.excitation_energy)
}

/// `max_s max_{K≠J} |⟨Ψ_K|∂_s Ĥ|Ψ_J⟩| / (E_K − E_J)²` over `grid_size`
/// uniform points `s_i = i/grid_size`, `i = 1..=grid_size`.
///
/// `J` is the eigenstate with energy rank `target_index` at the first grid
/// point and is followed by maximum overlap afterwards. Pairs whose coupling
/// is below [`NEGLIGIBLE_COUPLING`] are skipped; a coupled pair closer than
/// [`DEGENERACY_GAP`] makes the bound infinite.
pub fn adiabatic_time_bound(
    cs: &CoupledSystem,
    sched: &PathwaySchedule,
    target_index: usize,
    grid_size: usize,
) -> Result<f64> {
    if grid_size == 0 {
        return Err(Error::InvalidParameter("bound grid needs at least one point".into()));
    }
    let basis = cs.sector_basis()?;
    let mut followed: Option<nalgebra::DVector<num_complex::Complex64>> = None;
    let mut bound = 0.0f64;
    for i in 1..=grid_size {
        let s = i as f64 / grid_size as f64;
        let h = cs.hamiltonian_at(sched.omega(s)?, sched.lambda(s)?)?;
        let spectrum = crate::models::diagonalize_in(&h, basis.clone())?;
        if target_index >= spectrum.len() {
            return Err(Error::InvalidParameter(format!(
                "target index {target_index} beyond the {}-state sector",
                spectrum.len()
            )));
        }
        let j = match &followed {
            None => target_index,
            Some(prev) => (0..spectrum.len())
                .max_by(|&a, &b| {
                    let oa = spectrum.sector_vector(a).dotc(prev).norm();
                    let ob = spectrum.sector_vector(b).dotc(prev).norm();
                    oa.total_cmp(&ob)
                })
                .expect("nonempty spectrum"),
        };
        let dh = SectorMatrix::new(&cs.d_hamiltonian_d_s(sched, s)?, &basis)?;
        let vj = spectrum.sector_vector(j);
        let dh_vj = &dh.matrix * &vj;
        for k in 0..spectrum.len() {
            if k == j {
                continue;
            }
            let coupling = spectrum.sector_vector(k).dotc(&dh_vj).norm();
            if coupling < NEGLIGIBLE_COUPLING {
                continue;
            }
            let gap = (spectrum.energy(k) - spectrum.energy(j)).abs();
            if gap < DEGENERACY_GAP {
                return Ok(f64::INFINITY);
            }
            bound = bound.max(coupling / (gap * gap));
        }
        followed = Some(vj);
    }
    Ok(bound)
}
