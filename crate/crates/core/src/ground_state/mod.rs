//! Perfect-pairing tiled unitary product states.
//!
//! Spatial orbital `p` owns spin orbitals `2p` (up) and `2p + 1` (down).
//! Every tile couples neighbouring orbitals `(q + 1, q)`, so both generators
//! act on the four contiguous qubits `2q..2q + 4` and their exponentials are
//! exact 16×16 blocks.

mod bhpt;
mod evaluator;

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::expm_unitary;
use crate::error::{check_size, Error, Result};
use crate::models::Sector;
use crate::pauli::{jordan_wigner, FermionOp, PauliSum, MAX_QUBITS};
use crate::statevector::StateVector;

pub use bhpt::{minimize_local, optimize, optimize_from, BhptConfig, LocalMinimum, OptimizeResult};
pub use evaluator::{energy_and_gradient, TupsEvaluator};

/// Generators of one tile: `κ¹ = Ê_pq − Ê_qp` and `κ² = Ê_pq² − Ê_qp²`,
/// with the singlet excitation `Ê_pq = a†_{p↑}a_{q↑} + a†_{p↓}a_{q↓}`.
#[derive(Clone, Debug)]
pub struct GeneratorPair {
    pub p: usize,
    pub q: usize,
    pub kappa1: PauliSum,
    pub kappa2: PauliSum,
}

impl GeneratorPair {
    pub fn new(p: usize, q: usize, n_orbitals: usize) -> Result<Self> {
        if p == q {
            return Err(Error::InvalidParameter("generator orbitals must differ".into()));
        }
        let n_modes = 2 * n_orbitals;
        let single = |to: usize, from: usize| -> Result<PauliSum> {
            let up = jordan_wigner(&FermionOp::excitation(1.0, 2 * to, 2 * from), n_modes)?;
            let down = jordan_wigner(&FermionOp::excitation(1.0, 2 * to + 1, 2 * from + 1), n_modes)?;
            up.add(&down)
        };
        let e_pq = single(p, q)?;
        let e_qp = single(q, p)?;
        let kappa1 = e_pq.sub(&e_qp)?;
        let kappa2 = e_pq.mul(&e_pq)?.sub(&e_qp.mul(&e_qp)?)?;
        Ok(Self { p, q, kappa1, kappa2 })
    }

    pub fn generator(&self, kind: GeneratorKind) -> &PauliSum {
        match kind {
            GeneratorKind::Single => &self.kappa1,
            GeneratorKind::Paired => &self.kappa2,
        }
    }
}

/// Which generator of a tile a parameter multiplies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorKind {
    /// `κ¹`, the singlet orbital rotation.
    Single,
    /// `κ²`, the paired double excitation.
    Paired,
}

/// One parametrized exponential `exp(θ κ)` on the tile `(lower + 1, lower)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TileGate {
    pub lower: usize,
    pub kind: GeneratorKind,
}

/// Shape of a pp-tUPS wavefunction.
///
/// `n_layers` correlating layers of `Û = exp(θ₁κ¹)exp(θ₂κ²)exp(θ₃κ¹)` tiles
/// are followed by `⌈N/2⌉` orbital-optimization layers of `Q̂ = exp(θκ¹)`.
/// Each layer applies the tiles `(2p, 2p−1)` before `(2p+1, 2p)` (one-based
/// orbitals).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupsAnsatz {
    pub n_orbitals: usize,
    pub n_layers: usize,
    pub n_electrons: usize,
    pub two_ms: i32,
}

impl TupsAnsatz {
    pub fn new(n_orbitals: usize, n_layers: usize, n_electrons: usize, two_ms: i32) -> Result<Self> {
        let a = Self {
            n_orbitals,
            n_layers,
            n_electrons,
            two_ms,
        };
        a.validate()?;
        Ok(a)
    }

    fn validate(&self) -> Result<()> {
        if self.n_orbitals < 2 {
            return Err(Error::InvalidParameter("pp-tUPS needs at least two orbitals".into()));
        }
        if 2 * self.n_orbitals > MAX_QUBITS {
            return Err(Error::TooManyQubits(2 * self.n_orbitals));
        }
        self.spin_counts().map(|_| ())
    }

    fn spin_counts(&self) -> Result<(usize, usize)> {
        let n = self.n_electrons as i64;
        let m = self.two_ms as i64;
        if (n + m) % 2 != 0 || m.abs() > n {
            return Err(Error::InvalidParameter(format!(
                "{} electrons cannot have 2Ms = {}",
                self.n_electrons, self.two_ms
            )));
        }
        let (up, down) = (((n + m) / 2) as usize, ((n - m) / 2) as usize);
        if up > self.n_orbitals || down > self.n_orbitals {
            return Err(Error::InvalidParameter(
                "more electrons of one spin than orbitals".into(),
            ));
        }
        Ok((up, down))
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.n_orbitals
    }

    pub fn sector(&self) -> Sector {
        Sector::Fermionic {
            n_electrons: self.n_electrons,
            two_ms: self.two_ms,
        }
    }

    /// Number of orbital-optimization layers, `⌈N/2⌉`.
    pub fn n_orbital_layers(&self) -> usize {
        self.n_orbitals.div_ceil(2)
    }

    /// `3·L·(N−1) + ⌈N/2⌉·(N−1)`.
    pub fn n_params(&self) -> usize {
        (3 * self.n_layers + self.n_orbital_layers()) * (self.n_orbitals - 1)
    }

    /// Lower orbitals of the tiles of one layer in application order.
    fn layer_tiles(&self) -> impl Iterator<Item = usize> + '_ {
        let last = self.n_orbitals - 1;
        (0..last).step_by(2).chain((1..last).step_by(2))
    }

    /// Gates in application order; parameter `k` multiplies gate `k`.
    pub fn gates(&self) -> Vec<TileGate> {
        use GeneratorKind::{Paired, Single};
        let mut gates = Vec::with_capacity(self.n_params());
        for _ in 0..self.n_layers {
            for lower in self.layer_tiles() {
                for kind in [Single, Paired, Single] {
                    gates.push(TileGate { lower, kind });
                }
            }
        }
        for _ in 0..self.n_orbital_layers() {
            gates.extend(self.layer_tiles().map(|lower| TileGate { lower, kind: Single }));
        }
        gates
    }

    /// Perfect-pairing reference: orbitals `0, 2, 4, …` fill before the odd
    /// ones, separately for each spin.
    pub fn reference_occupation(&self) -> Result<u64> {
        let (up, down) = self.spin_counts()?;
        let order: Vec<usize> = (0..self.n_orbitals)
            .step_by(2)
            .chain((1..self.n_orbitals).step_by(2))
            .collect();
        let mut bits = 0u64;
        for &p in &order[..up] {
            bits |= 1 << (2 * p);
        }
        for &p in &order[..down] {
            bits |= 1 << (2 * p + 1);
        }
        Ok(bits)
    }

    pub fn reference(&self) -> Result<StateVector> {
        Ok(StateVector::basis(
            self.n_qubits(),
            self.reference_occupation()? as usize,
        ))
    }

    pub fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() == self.n_params() {
            Ok(())
        } else {
            Err(Error::ParameterCount {
                got: params.len(),
                expected: self.n_params(),
            })
        }
    }

    /// Parameters of `self` that reproduce the state of a shallower ansatz:
    /// its correlating layers are kept, the extra ones are zero, and the
    /// orbital-optimization block is carried over.
    pub fn extend_params(&self, shallower: &TupsAnsatz, params: &[f64]) -> Result<Vec<f64>> {
        shallower.check_params(params)?;
        let same_shape = shallower.n_orbitals == self.n_orbitals
            && shallower.n_electrons == self.n_electrons
            && shallower.two_ms == self.two_ms;
        if !same_shape || shallower.n_layers > self.n_layers {
            return Err(Error::InvalidParameter(
                "warm start needs a shallower ansatz of the same shape".into(),
            ));
        }
        let per_layer = 3 * (self.n_orbitals - 1);
        let split = shallower.n_layers * per_layer;
        let mut out = params[..split].to_vec();
        out.resize((self.n_layers * per_layer).max(split), 0.0);
        out.extend_from_slice(&params[split..]);
        Ok(out)
    }

    /// `Π exp(θ_k κ_k) |reference⟩` on the full register.
    pub fn apply_ansatz(&self, params: &[f64], reference: &StateVector) -> Result<StateVector> {
        self.check_params(params)?;
        check_size(self.n_qubits(), reference.n_qubits())?;
        let local = local_generators()?;
        let mut state = reference.clone();
        for (gate, &theta) in self.gates().iter().zip(params) {
            if theta == 0.0 {
                continue;
            }
            let k = &local[gate.kind as usize];
            let u = expm_unitary(&k.map(|x| Complex64::new(0.0, x)), theta);
            apply_block(state.amplitudes_mut(), 2 * gate.lower, &u);
        }
        Ok(state)
    }

    /// The ansatz state built on its own reference.
    pub fn state(&self, params: &[f64]) -> Result<StateVector> {
        self.apply_ansatz(params, &self.reference()?)
    }
}

/// Real 16×16 matrices of `κ¹` and `κ²` for the tile `(1, 0)`, indexed by
/// [`GeneratorKind`]. Adjacent tiles see identical blocks.
pub(crate) fn local_generators() -> Result<[DMatrix<f64>; 2]> {
    let pair = GeneratorPair::new(1, 0, 2)?;
    let real = |sum: &PauliSum| -> Result<DMatrix<f64>> {
        let dense = sum.to_dense();
        if dense.iter().any(|c| c.im.abs() > 1e-14) {
            return Err(Error::InvalidParameter("tile generator is not real".into()));
        }
        Ok(dense.map(|c| c.re))
    };
    Ok([real(&pair.kappa1)?, real(&pair.kappa2)?])
}

/// Applies a 16×16 block to qubits `shift..shift + 4`.
fn apply_block(amps: &mut [Complex64], shift: usize, u: &DMatrix<Complex64>) {
    let mask = 0xF << shift;
    let mut x = [Complex64::new(0.0, 0.0); 16];
    for base in (0..amps.len()).filter(|b| b & mask == 0) {
        for (l, xl) in x.iter_mut().enumerate() {
            *xl = amps[base | (l << shift)];
        }
        for r in 0..16 {
            amps[base | (r << shift)] = (0..16).map(|c| u[(r, c)] * x[c]).sum();
        }
    }
}

/// Optimized parameters together with the ansatz they belong to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub ansatz: TupsAnsatz,
    pub params: Vec<f64>,
    pub energy: f64,
    pub exact_energy: Option<f64>,
    pub fidelity: Option<f64>,
}

impl Checkpoint {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let c: Checkpoint = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        c.ansatz.validate()?;
        c.ansatz.check_params(&c.params)?;
        Ok(c)
    }

    pub fn state(&self) -> Result<StateVector> {
        self.ansatz.state(&self.params)
    }
}
