use super::{ElectronicSystem, MolecularIntegrals, Sector};
use crate::error::Result;
use crate::pauli::{jordan_wigner_sum, FermionOp, PauliSum};

/// Integrals below this magnitude are dropped from the operator.
const INTEGRAL_CUTOFF: f64 = 1e-14;

/// `Ĥ = V + Σ_{pq,σ} h_pq a†_{pσ} a_{qσ} + ½ Σ_{pqrs,στ} (pq|rs) a†_{pσ} a†_{rτ} a_{sτ} a_{qσ}`
/// on `2N` interleaved spin orbitals (orbital `p`, spin `σ` → qubit `2p + σ`),
/// together with the three one-body dipole operators.
pub fn build_molecular(m: &MolecularIntegrals) -> Result<ElectronicSystem> {
    let n = m.n_orbitals;
    let n_modes = 2 * n;
    let so = |p: usize, sigma: usize| 2 * p + sigma;
    let mut ops = Vec::new();
    for p in 0..n {
        for q in 0..n {
            let h = m.h[(p, q)];
            if h.abs() > INTEGRAL_CUTOFF {
                for sigma in 0..2 {
                    ops.push(FermionOp::excitation(h, so(p, sigma), so(q, sigma)));
                }
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let v = m.eri(p, q, r, s);
                    if v.abs() <= INTEGRAL_CUTOFF {
                        continue;
                    }
                    for sigma in 0..2 {
                        for tau in 0..2 {
                            let (ps, qs, rt, st) = (so(p, sigma), so(q, sigma), so(r, tau), so(s, tau));
                            if ps == rt || qs == st {
                                continue;
                            }
                            ops.push(FermionOp::new(
                                0.5 * v,
                                vec![(ps, true), (rt, true), (st, false), (qs, false)],
                            ));
                        }
                    }
                }
            }
        }
    }
    let mut h_e = jordan_wigner_sum(&ops, n_modes)?;
    h_e.add_scaled(&PauliSum::identity(n_modes, m.core_energy), 1.0)?;
    let dipole = [
        one_body(&m.dipole[0], m.dipole_core[0], n_modes)?,
        one_body(&m.dipole[1], m.dipole_core[1], n_modes)?,
        one_body(&m.dipole[2], m.dipole_core[2], n_modes)?,
    ];
    ElectronicSystem::new(
        h_e,
        dipole,
        Sector::Fermionic {
            n_electrons: m.n_electrons,
            two_ms: m.ms2,
        },
    )
}

fn one_body(matrix: &nalgebra::DMatrix<f64>, constant: f64, n_modes: usize) -> Result<PauliSum> {
    let n = matrix.nrows();
    let mut ops = Vec::new();
    for p in 0..n {
        for q in 0..n {
            let v = matrix[(p, q)];
            if v.abs() > INTEGRAL_CUTOFF {
                for sigma in 0..2 {
                    ops.push(FermionOp::excitation(v, 2 * p + sigma, 2 * q + sigma));
                }
            }
        }
    }
    let mut sum = jordan_wigner_sum(&ops, n_modes)?;
    sum.add_scaled(&PauliSum::identity(n_modes, constant), 1.0)?;
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_hubbard, number_operator, spin_z_operator, HubbardParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_integrals(n: usize, seed: u64) -> MolecularIntegrals {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = MolecularIntegrals::zeros(n, 2, 0);
        m.core_energy = rng.gen_range(-1.0..1.0);
        for p in 0..n {
            for q in 0..=p {
                m.set_h(p, q, rng.gen_range(-1.0..1.0));
                m.set_dipole(1, p, q, rng.gen_range(-1.0..1.0));
                for r in 0..n {
                    for s in 0..=r {
                        m.set_eri(p, q, r, s, rng.gen_range(-0.5..0.5));
                    }
                }
            }
        }
        m
    }

    #[test]
    fn hubbard_dimer_from_integrals() {
        let (t, u) = (1.0, 4.0);
        let mut m = MolecularIntegrals::zeros(2, 2, 0);
        m.set_h(0, 1, -t);
        m.set_eri(0, 0, 0, 0, u);
        m.set_eri(1, 1, 1, 1, u);
        let mol = build_molecular(&m).unwrap();
        let hub = build_hubbard(&HubbardParams::half_filled(2, u)).unwrap();
        assert!(mol.h_e.sub(&hub.h_e).unwrap().is_empty());
    }

    #[test]
    fn diagonal_one_body_is_diagonal() {
        let mut m = MolecularIntegrals::zeros(3, 2, 0);
        m.set_h(0, 0, -1.0);
        m.set_h(1, 1, 0.5);
        m.set_h(2, 2, 2.0);
        let sys = build_molecular(&m).unwrap();
        assert!(sys.h_e.iter().all(|s| s.x_mask() == 0));
    }

    #[test]
    fn random_integrals_give_symmetric_hamiltonian() {
        let m = random_integrals(3, 5);
        let sys = build_molecular(&m).unwrap();
        assert!(sys.h_e.is_hermitian());
        assert!(sys.dipole[1].is_hermitian());
        assert!(sys.h_e.commutator(&number_operator(6)).unwrap().is_empty());
        assert!(sys.h_e.commutator(&spin_z_operator(6)).unwrap().is_empty());
        assert!(sys.dipole[1].commutator(&number_operator(6)).unwrap().is_empty());
    }
}
