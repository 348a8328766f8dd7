use serde::{Deserialize, Serialize};

use super::{ElectronicSystem, Sector};
use crate::error::{Error, Result};
use crate::pauli::{jordan_wigner_sum, FermionOp, PauliSum};

/// Open one-dimensional Hubbard chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HubbardParams {
    pub n_sites: usize,
    pub t: f64,
    pub u: f64,
    pub n_electrons: usize,
    /// Site coordinates along the chain; `None` means `p − (L−1)/2`.
    pub site_positions: Option<Vec<f64>>,
}

impl HubbardParams {
    /// Half filling with unit hopping and centered positions.
    pub fn half_filled(n_sites: usize, u: f64) -> Self {
        Self {
            n_sites,
            t: 1.0,
            u,
            n_electrons: n_sites,
            site_positions: None,
        }
    }

    /// Coordinates of each site, centered on the chain midpoint by default.
    pub fn positions(&self) -> Vec<f64> {
        match &self.site_positions {
            Some(x) => x.clone(),
            None => {
                let mid = (self.n_sites as f64 - 1.0) / 2.0;
                (0..self.n_sites).map(|p| p as f64 - mid).collect()
            }
        }
    }

    /// Lowest `2·M_s` compatible with the electron count.
    pub fn two_ms(&self) -> i32 {
        (self.n_electrons % 2) as i32
    }
}

/// Spin orbital of site `p` and spin `σ` (0 = up, 1 = down).
pub(crate) fn spin_orbital(p: usize, sigma: usize) -> usize {
    2 * p + sigma
}

/// `Ĥ = −t Σ_{pσ} (a†_{pσ} a_{p+1,σ} + h.c.) + U Σ_p n̂_{p↑} n̂_{p↓}` on `2L`
/// qubits with `μ̂_z = Σ_p x_p (n̂_{p↑} + n̂_{p↓})`.
pub fn build_hubbard(p: &HubbardParams) -> Result<ElectronicSystem> {
    let l = p.n_sites;
    if l == 0 {
        return Err(Error::InvalidParameter("Hubbard chain needs at least one site".into()));
    }
    if p.n_electrons == 0 || p.n_electrons > 2 * l {
        return Err(Error::InvalidParameter(format!(
            "{} electrons do not fit {} sites",
            p.n_electrons, l
        )));
    }
    let positions = p.positions();
    if positions.len() != l {
        return Err(Error::InvalidParameter(format!(
            "{} site positions given for {} sites",
            positions.len(),
            l
        )));
    }
    let n_modes = 2 * l;
    let mut h_ops = Vec::new();
    for site in 0..l.saturating_sub(1) {
        for sigma in 0..2 {
            let a = spin_orbital(site, sigma);
            let b = spin_orbital(site + 1, sigma);
            h_ops.push(FermionOp::excitation(-p.t, a, b));
            h_ops.push(FermionOp::excitation(-p.t, b, a));
        }
    }
    for site in 0..l {
        let (up, down) = (spin_orbital(site, 0), spin_orbital(site, 1));
        h_ops.push(FermionOp::new(
            p.u,
            vec![(up, true), (up, false), (down, true), (down, false)],
        ));
    }
    let h_e = jordan_wigner_sum(&h_ops, n_modes)?;

    let dipole_ops: Vec<FermionOp> = (0..l)
        .flat_map(|site| {
            let x = positions[site];
            (0..2).map(move |sigma| {
                let m = spin_orbital(site, sigma);
                FermionOp::new(x, vec![(m, true), (m, false)])
            })
        })
        .collect();
    let mu_z = jordan_wigner_sum(&dipole_ops, n_modes)?;
    let zero = PauliSum::zero(n_modes);
    ElectronicSystem::new(
        h_e,
        [zero.clone(), zero, mu_z],
        Sector::Fermionic {
            n_electrons: p.n_electrons,
            two_ms: p.two_ms(),
        },
    )
}

/// `Σ_p n̂_{p↑} n̂_{p↓}`.
pub fn double_occupancy_operator(n_sites: usize) -> PauliSum {
    let ops: Vec<FermionOp> = (0..n_sites)
        .map(|site| {
            let (up, down) = (spin_orbital(site, 0), spin_orbital(site, 1));
            FermionOp::new(1.0, vec![(up, true), (up, false), (down, true), (down, false)])
        })
        .collect();
    jordan_wigner_sum(&ops, 2 * n_sites).expect("modes within register")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{exact_diagonalize, number_operator, spin_z_operator};
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    /// Occupation-basis Hubbard matrix with explicit fermionic signs.
    fn dense_hubbard(l: usize, t: f64, u: f64) -> DMatrix<Complex64> {
        let n = 2 * l;
        let dim = 1usize << n;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        // a†_i a_j |b⟩ with the sign of the modes below each index
        let hop = |b: usize, i: usize, j: usize| -> Option<(usize, f64)> {
            if b >> j & 1 == 0 {
                return None;
            }
            let sign_j = if (b & ((1 << j) - 1)).count_ones() % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            let b1 = b & !(1 << j);
            if b1 >> i & 1 == 1 {
                return None;
            }
            let sign_i = if (b1 & ((1 << i) - 1)).count_ones() % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            Some((b1 | 1 << i, sign_i * sign_j))
        };
        for b in 0..dim {
            for site in 0..l {
                if b >> (2 * site) & 1 == 1 && b >> (2 * site + 1) & 1 == 1 {
                    m[(b, b)] += u;
                }
            }
            for site in 0..l.saturating_sub(1) {
                for sigma in 0..2 {
                    let (i, j) = (2 * site + sigma, 2 * site + 2 + sigma);
                    for (x, y) in [(i, j), (j, i)] {
                        if let Some((c, s)) = hop(b, x, y) {
                            m[(c, b)] += -t * s;
                        }
                    }
                }
            }
        }
        m
    }

    #[test]
    fn matches_independent_dense_construction() {
        for l in 1..=4 {
            let sys = build_hubbard(&HubbardParams {
                t: 0.7,
                ..HubbardParams::half_filled(l, 3.1)
            })
            .unwrap();
            let diff = sys.h_e.to_dense() - dense_hubbard(l, 0.7, 3.1);
            assert!(diff.norm() < 1e-12, "L = {l}");
        }
    }

    #[test]
    fn two_site_ground_energies() {
        let sys = build_hubbard(&HubbardParams::half_filled(2, 0.0)).unwrap();
        let spec = exact_diagonalize(&sys, sys.sector).unwrap();
        assert!((spec.energy(0) + 2.0).abs() < 1e-12);

        let sys = build_hubbard(&HubbardParams::half_filled(2, 4.0)).unwrap();
        let spec = exact_diagonalize(&sys, sys.sector).unwrap();
        let (u, t) = (4.0f64, 1.0f64);
        let root = (u * u + 16.0 * t * t).sqrt();
        let expected = [(u - root) / 2.0, 0.0, u, (u + root) / 2.0];
        assert_eq!(spec.len(), 4);
        for (e, x) in spec.energies().iter().zip(expected) {
            assert!((e - x).abs() < 1e-12, "{e} vs {x}");
        }
        assert!((spec.energy(0) - (2.0 - 2.0 * 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn conserves_number_and_spin() {
        let sys = build_hubbard(&HubbardParams::half_filled(4, 4.0)).unwrap();
        let n = number_operator(8);
        let sz = spin_z_operator(8);
        assert!(sys.h_e.commutator(&n).unwrap().is_empty());
        assert!(sys.h_e.commutator(&sz).unwrap().is_empty());
        assert!(sys.dipole[2].commutator(&n).unwrap().is_empty());
        assert!(sys.dipole[2].is_hermitian());
    }

    #[test]
    fn centered_dipole_has_no_identity_component() {
        let sys = build_hubbard(&HubbardParams::half_filled(4, 4.0)).unwrap();
        assert!(sys.dipole[2].identity_coeff().norm() < 1e-14);
        assert_eq!(
            HubbardParams::half_filled(4, 0.0).positions(),
            vec![-1.5, -0.5, 0.5, 1.5]
        );
    }

    #[test]
    fn rejects_bad_fillings() {
        let mut p = HubbardParams::half_filled(2, 1.0);
        p.n_electrons = 5;
        assert!(build_hubbard(&p).is_err());
        p.n_electrons = 0;
        assert!(build_hubbard(&p).is_err());
    }
}
