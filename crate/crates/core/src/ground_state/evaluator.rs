//! Real-arithmetic pp-tUPS evaluation inside the ansatz sector.
//!
//! The generators, the reference and a real Hamiltonian keep every
//! amplitude real, so the state is a real vector over the sector basis.
//! Each tile splits that basis into groups of at most four states that
//! differ only on the tile's qubits.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{local_generators, TileGate, TupsAnsatz};
use crate::dense::hermitian_eigen;
use crate::error::{check_size, Error, Result};
use crate::models::SectorBasis;
use crate::operator::PauliOperator;
use crate::pauli::PauliSum;
use crate::statevector::StateVector;

const EIGENVALUE_MERGE: f64 = 1e-9;
const MATRIX_ELEMENT_CUTOFF: f64 = 1e-14;

type Block = [f64; 256];

/// `exp(θK) = Σ_μ cos(θμ)·A_μ + sin(θμ)·B_μ` with `A + iB` the spectral
/// projector of `iK` onto eigenvalue `μ`. Only entries inside the local
/// particle-number blocks are stored.
#[derive(Clone, Debug)]
struct Spectral {
    generator: Block,
    entries: Vec<usize>,
    /// `(μ, A, B)` restricted to `entries`.
    terms: Vec<(f64, Vec<f64>, Vec<f64>)>,
}

impl Spectral {
    fn new(k: &DMatrix<f64>) -> Self {
        let (values, vectors) = hermitian_eigen(&k.map(|x| Complex64::new(0.0, x)));
        let mut dense: Vec<(f64, Block, Block)> = Vec::new();
        for (j, &mu) in values.iter().enumerate() {
            let idx = match dense.iter().position(|t| (t.0 - mu).abs() < EIGENVALUE_MERGE) {
                Some(i) => i,
                None => {
                    dense.push((mu, [0.0; 256], [0.0; 256]));
                    dense.len() - 1
                }
            };
            let (_, a, b) = &mut dense[idx];
            for r in 0..16 {
                for c in 0..16 {
                    let p = vectors[(r, j)] * vectors[(c, j)].conj();
                    a[16 * r + c] += p.re;
                    b[16 * r + c] += p.im;
                }
            }
        }
        // N and Sz of the four local spin orbitals
        let charges = |l: usize| (l.count_ones(), (l & 0b0101).count_ones());
        let entries: Vec<usize> = (0..256).filter(|e| charges(e / 16) == charges(e % 16)).collect();
        let terms = dense
            .into_iter()
            .map(|(mu, a, b)| {
                (
                    mu,
                    entries.iter().map(|&e| a[e]).collect(),
                    entries.iter().map(|&e| b[e]).collect(),
                )
            })
            .collect();
        let mut generator = [0.0; 256];
        for r in 0..16 {
            for c in 0..16 {
                generator[16 * r + c] = k[(r, c)];
            }
        }
        Self {
            generator,
            entries,
            terms,
        }
    }

    fn exponential(&self, theta: f64) -> Block {
        let mut packed = vec![0.0; self.entries.len()];
        for (mu, a, b) in &self.terms {
            let (s, c) = (theta * mu).sin_cos();
            for ((mi, ai), bi) in packed.iter_mut().zip(a).zip(b) {
                *mi += c * ai + s * bi;
            }
        }
        let mut m = [0.0; 256];
        for (&e, v) in self.entries.iter().zip(packed) {
            m[e] = v;
        }
        m
    }
}

#[derive(Clone, Copy, Debug)]
struct Group {
    len: usize,
    local: [usize; 4],
    index: [usize; 4],
}

/// Compressed sparse rows of a real symmetric operator.
#[derive(Clone, Debug)]
struct SparseReal {
    row_start: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl SparseReal {
    fn new(h: &PauliSum, basis: &SectorBasis) -> Result<Self> {
        if !h.is_hermitian() {
            return Err(Error::NotHermitian);
        }
        let op = PauliOperator::new(h);
        let mut row_start = vec![0];
        let mut cols = Vec::new();
        let mut values = Vec::new();
        let mut failure = None;
        for &b in basis.states() {
            // Hermitian and real: column b is row b
            op.column(b, |b2, c| {
                if c.norm() <= MATRIX_ELEMENT_CUTOFF {
                    return;
                }
                if c.im.abs() > MATRIX_ELEMENT_CUTOFF {
                    failure.get_or_insert(Error::ComplexCoefficient(c));
                    return;
                }
                match basis.index_of(b2) {
                    Some(j) => {
                        cols.push(j);
                        values.push(c.re);
                    }
                    None => {
                        failure.get_or_insert(Error::InvalidParameter("hamiltonian leaves the ansatz sector".into()));
                    }
                }
            });
            row_start.push(cols.len());
        }
        match failure {
            Some(e) => Err(e),
            None => Ok(Self {
                row_start,
                cols,
                values,
            }),
        }
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let range = self.row_start[i]..self.row_start[i + 1];
            *o = self.cols[range.clone()]
                .iter()
                .zip(&self.values[range])
                .map(|(&j, v)| v * x[j])
                .sum();
        }
    }
}

/// Energy and adjoint gradient of a fixed ansatz and Hamiltonian.
#[derive(Clone, Debug)]
pub struct TupsEvaluator {
    ansatz: TupsAnsatz,
    basis: SectorBasis,
    hamiltonian: SparseReal,
    reference: usize,
    spectral: [Spectral; 2],
    gates: Vec<TileGate>,
    /// Groups per tile, indexed by the tile's lower orbital.
    tiles: Vec<Vec<Group>>,
}

impl TupsEvaluator {
    pub fn new(ansatz: &TupsAnsatz, h_e: &PauliSum) -> Result<Self> {
        ansatz.validate()?;
        check_size(ansatz.n_qubits(), h_e.n_qubits())?;
        let n = ansatz.n_qubits();
        let basis = SectorBasis::new(n, ansatz.sector(), n)?;
        let hamiltonian = SparseReal::new(h_e, &basis)?;
        let reference = basis
            .index_of(ansatz.reference_occupation()?)
            .ok_or(Error::EmptySector)?;
        let [k1, k2] = local_generators()?;
        let spectral = [Spectral::new(&k1), Spectral::new(&k2)];
        let tiles = (0..ansatz.n_orbitals - 1)
            .map(|lower| tile_groups(&basis, 2 * lower))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            ansatz: ansatz.clone(),
            basis,
            hamiltonian,
            reference,
            spectral,
            gates: ansatz.gates(),
            tiles,
        })
    }

    pub fn ansatz(&self) -> &TupsAnsatz {
        &self.ansatz
    }

    pub fn basis(&self) -> &SectorBasis {
        &self.basis
    }

    pub fn n_params(&self) -> usize {
        self.ansatz.n_params()
    }

    fn forward(&self, params: &[f64]) -> (Vec<f64>, Vec<Block>) {
        let mut psi = vec![0.0; self.basis.len()];
        psi[self.reference] = 1.0;
        let gates = &self.gates;
        let blocks: Vec<Block> = gates
            .iter()
            .zip(params)
            .map(|(g, &t)| self.spectral[g.kind as usize].exponential(t))
            .collect();
        for (g, m) in gates.iter().zip(&blocks) {
            apply_groups(&self.tiles[g.lower], m, &mut psi);
        }
        (psi, blocks)
    }

    /// Sector amplitudes of the ansatz state.
    pub fn sector_state(&self, params: &[f64]) -> Result<Vec<f64>> {
        self.ansatz.check_params(params)?;
        Ok(self.forward(params).0)
    }

    /// The ansatz state on the full register.
    pub fn state(&self, params: &[f64]) -> Result<StateVector> {
        let psi = self.sector_state(params)?;
        Ok(self.basis.embed(psi.into_iter().map(|x| Complex64::new(x, 0.0))))
    }

    pub fn energy(&self, params: &[f64]) -> Result<f64> {
        let psi = self.sector_state(params)?;
        let mut h_psi = vec![0.0; psi.len()];
        self.hamiltonian.apply(&psi, &mut h_psi);
        Ok(dot(&psi, &h_psi))
    }

    /// `E(θ)` and `∂E/∂θ_k = 2⟨Φ|Ĥ G_K⋯G_{k+1} κ_k G_k⋯G_1|Φ₀⟩`, from one
    /// forward and one backward sweep.
    pub fn energy_and_gradient(&self, params: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.ansatz.check_params(params)?;
        let (mut psi, blocks) = self.forward(params);
        let mut lambda = vec![0.0; psi.len()];
        self.hamiltonian.apply(&psi, &mut lambda);
        let energy = dot(&psi, &lambda);
        let mut grad = vec![0.0; self.gates.len()];
        for (k, g) in self.gates.iter().enumerate().rev() {
            let generator = &self.spectral[g.kind as usize].generator;
            grad[k] = 2.0 * backward_step(&self.tiles[g.lower], generator, &blocks[k], &mut psi, &mut lambda);
        }
        Ok((energy, grad))
    }
}

/// `E(θ)` and its gradient for a one-off evaluation.
pub fn energy_and_gradient(ansatz: &TupsAnsatz, params: &[f64], h_e: &PauliSum) -> Result<(f64, Vec<f64>)> {
    TupsEvaluator::new(ansatz, h_e)?.energy_and_gradient(params)
}

fn tile_groups(basis: &SectorBasis, shift: usize) -> Result<Vec<Group>> {
    let mask = 0xFu64 << shift;
    let mut by_base: HashMap<u64, usize> = HashMap::new();
    let mut groups: Vec<Group> = Vec::new();
    for (i, &b) in basis.states().iter().enumerate() {
        let slot = *by_base.entry(b & !mask).or_insert_with(|| {
            groups.push(Group {
                len: 0,
                local: [0; 4],
                index: [0; 4],
            });
            groups.len() - 1
        });
        let g = &mut groups[slot];
        if g.len == 4 {
            return Err(Error::InvalidParameter("tile block larger than four states".into()));
        }
        g.local[g.len] = ((b & mask) >> shift) as usize;
        g.index[g.len] = i;
        g.len += 1;
    }
    Ok(groups)
}

/// In-place `v ← M v` on every group of a tile.
fn apply_groups(groups: &[Group], m: &Block, v: &mut [f64]) {
    for g in groups {
        let n = g.len;
        let mut x = [0.0; 4];
        for k in 0..n {
            x[k] = v[g.index[k]];
        }
        for i in 0..n {
            let row = &m[16 * g.local[i]..16 * g.local[i] + 16];
            let mut acc = 0.0;
            for k in 0..n {
                acc += row[g.local[k]] * x[k];
            }
            v[g.index[i]] = acc;
        }
    }
}

/// Returns `⟨λ|K|ψ⟩`, then rewinds both vectors through the gate:
/// `ψ ← Mᵀψ`, `λ ← Mᵀλ`.
fn backward_step(groups: &[Group], k: &Block, m: &Block, psi: &mut [f64], lambda: &mut [f64]) -> f64 {
    let mut overlap = 0.0;
    for g in groups {
        let n = g.len;
        let (mut x, mut y) = ([0.0; 4], [0.0; 4]);
        for j in 0..n {
            x[j] = psi[g.index[j]];
            y[j] = lambda[g.index[j]];
        }
        for i in 0..n {
            let li = g.local[i];
            let (mut kx, mut mx, mut my) = (0.0, 0.0, 0.0);
            for j in 0..n {
                let lj = g.local[j];
                kx += k[16 * li + lj] * x[j];
                let mt = m[16 * lj + li];
                mx += mt * x[j];
                my += mt * y[j];
            }
            overlap += y[i] * kx;
            psi[g.index[i]] = mx;
            lambda[g.index[i]] = my;
        }
    }
    overlap
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_hubbard, HubbardParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(sites: usize, layers: usize, u: f64) -> (TupsAnsatz, PauliSum) {
        let sys = build_hubbard(&HubbardParams::half_filled(sites, u)).unwrap();
        (TupsAnsatz::new(sites, layers, sites, 0).unwrap(), sys.h_e)
    }

    fn random_params(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect()
    }

    #[test]
    fn sector_state_matches_full_register() {
        let (a, h) = setup(4, 2, 4.0);
        let eval = TupsEvaluator::new(&a, &h).unwrap();
        let params = random_params(a.n_params(), 11);
        let fast = eval.state(&params).unwrap();
        let full = a.state(&params).unwrap();
        let diff: f64 = fast
            .amplitudes()
            .iter()
            .zip(full.amplitudes())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum();
        assert!(diff.sqrt() < 1e-12);
        let e_full = full.expectation(&h).unwrap().re;
        assert!((eval.energy(&params).unwrap() - e_full).abs() < 1e-12);
    }

    #[test]
    fn adjoint_gradient_matches_central_differences() {
        let (a, h) = setup(4, 2, 4.0);
        let eval = TupsEvaluator::new(&a, &h).unwrap();
        let params = random_params(a.n_params(), 5);
        let (_, grad) = eval.energy_and_gradient(&params).unwrap();
        let step = 1e-5;
        for k in 0..params.len() {
            let mut plus = params.clone();
            let mut minus = params.clone();
            plus[k] += step;
            minus[k] -= step;
            let fd = (eval.energy(&plus).unwrap() - eval.energy(&minus).unwrap()) / (2.0 * step);
            assert!((fd - grad[k]).abs() < 1e-7, "param {k}: {fd} vs {}", grad[k]);
        }
    }

    #[test]
    fn gradient_passes_secant_checks() {
        let (a, h) = setup(4, 1, 2.0);
        let eval = TupsEvaluator::new(&a, &h).unwrap();
        let params = random_params(a.n_params(), 8);
        let (_, grad) = eval.energy_and_gradient(&params).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h_step = 1e-4;
        for _ in 0..20 {
            let dir: Vec<f64> = (0..params.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let shifted = |s: f64| -> Vec<f64> { params.iter().zip(&dir).map(|(p, d)| p + s * d).collect() };
            let secant =
                (eval.energy(&shifted(h_step)).unwrap() - eval.energy(&shifted(-h_step)).unwrap()) / (2.0 * h_step);
            let directional = dot(&grad, &dir);
            assert!((secant - directional).abs() <= 1e-5 * directional.abs().max(1.0));
        }
    }

    #[test]
    fn rejects_wrong_length_and_sector() {
        let (a, h) = setup(2, 1, 4.0);
        let eval = TupsEvaluator::new(&a, &h).unwrap();
        assert!(eval.energy(&[0.0]).is_err());
        let b = TupsAnsatz::new(3, 1, 2, 0).unwrap();
        assert!(matches!(TupsEvaluator::new(&b, &h), Err(Error::SizeMismatch { .. })));
    }
}
