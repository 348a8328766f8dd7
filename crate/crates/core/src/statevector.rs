//! Dense statevector register.
//!
//! Amplitude index bit `q` holds the occupation of qubit `q`; the last qubit
//! is the most significant bit. When a photon qubit is appended to an
//! electronic register it becomes that most significant qubit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{check_size, Error, Result};
use crate::krylov::{expm_multiply, KrylovOptions, KrylovStats};
use crate::operator::PauliOperator;
use crate::pauli::{i_pow, parity, PauliString, PauliSum, MAX_QUBITS};

/// Allowed deviation of the norm from one.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Smallest outcome probability for which a projection is performed.
pub const MIN_PROJECTION_PROBABILITY: f64 = 1e-14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        assert!(n_qubits < 40, "register too large for a dense statevector");
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    /// Wraps normalized amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let state = Self::from_unchecked(amps)?;
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Normalizes the amplitudes before wrapping them.
    pub fn normalized(amps: Vec<Complex64>) -> Result<Self> {
        let mut state = Self::from_unchecked(amps)?;
        let norm = state.norm_sqr();
        if norm < MIN_PROJECTION_PROBABILITY {
            return Err(Error::NotNormalized(norm));
        }
        let scale = 1.0 / norm.sqrt();
        state.amps.iter_mut().for_each(|a| *a *= scale);
        Ok(state)
    }

    fn from_unchecked(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "amplitude count {len} is not a power of two"
            )));
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    /// Haar-ish random state for tests and benchmarks.
    pub fn random<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Self {
        let amps = (0..1usize << n_qubits)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        Self::normalized(amps).expect("random state has nonzero norm")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    /// `|electronic⟩ ⊗ |photon_occ⟩` with the new qubit as the highest index.
    pub fn init_product(electronic: &StateVector, photon_occ: u8) -> Result<StateVector> {
        let norm = electronic.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        if photon_occ > 1 {
            return Err(Error::InvalidParameter(format!(
                "photon occupation {photon_occ} is not 0 or 1"
            )));
        }
        if electronic.n_qubits + 1 > MAX_QUBITS {
            return Err(Error::TooManyQubits(electronic.n_qubits + 1));
        }
        let dim = electronic.amps.len();
        let mut amps = vec![ZERO; 2 * dim];
        let offset = photon_occ as usize * dim;
        amps[offset..offset + dim].copy_from_slice(&electronic.amps);
        Ok(Self {
            n_qubits: electronic.n_qubits + 1,
            amps,
        })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        check_size(self.n_qubits, other.n_qubits)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// `P|ψ⟩` for a single Pauli string (coefficient included).
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        check_size(self.n_qubits, p.n_qubits())?;
        let (x, z) = (p.x_mask() as usize, p.z_mask());
        let phase = p.coeff() * i_pow((p.x_mask() & z).count_ones());
        let old = std::mem::replace(&mut self.amps, vec![ZERO; 1 << self.n_qubits]);
        for (b, a) in old.into_iter().enumerate() {
            let f = if parity(b as u64 & z) { -phase } else { phase };
            self.amps[b ^ x] = f * a;
        }
        Ok(())
    }

    /// `|ψ⟩ ← exp(−i·θ·P)|ψ⟩` for the operator sequence of `p`.
    ///
    /// Only the Pauli operators of `p` are used; its coefficient must be
    /// folded into `theta` by the caller.
    pub fn apply_pauli_rotation(&mut self, p: &PauliString, theta: f64) -> Result<()> {
        check_size(self.n_qubits, p.n_qubits())?;
        if p.is_identity() {
            let phase = Complex64::from_polar(1.0, -theta);
            self.amps.iter_mut().for_each(|a| *a *= phase);
            return Ok(());
        }
        let (cos, sin) = (theta.cos(), theta.sin());
        let x = p.x_mask();
        let z = p.z_mask();
        // P|b⟩ = i^{|x&z|} (−1)^{|b&z|} |b ⊕ x⟩
        let base = i_pow((x & z).count_ones());
        let minus_i_sin = Complex64::new(0.0, -sin);
        if x == 0 {
            let plus = Complex64::new(cos, -sin);
            let minus = Complex64::new(cos, sin);
            for (b, a) in self.amps.iter_mut().enumerate() {
                *a *= if parity(b as u64 & z) { minus } else { plus };
            }
            return Ok(());
        }
        let low = x & x.wrapping_neg();
        for b in 0..self.amps.len() as u64 {
            if b & low != 0 {
                continue;
            }
            let partner = b ^ x;
            let (i, j) = (b as usize, partner as usize);
            // Phase picked up mapping b → partner and partner → b.
            let to_partner = if parity(b & z) { -base } else { base };
            let to_b = if parity(partner & z) { -base } else { base };
            let (ab, ap) = (self.amps[i], self.amps[j]);
            self.amps[i] = cos * ab + minus_i_sin * to_b * ap;
            self.amps[j] = cos * ap + minus_i_sin * to_partner * ab;
        }
        Ok(())
    }

    /// `⟨ψ|O|ψ⟩`.
    pub fn expectation(&self, op: &PauliSum) -> Result<Complex64> {
        check_size(self.n_qubits, op.n_qubits())?;
        Ok(PauliOperator::new(op).expectation(&self.amps))
    }

    /// `⟨ψ|O|ψ⟩` for a prepared operator.
    pub fn expectation_of(&self, op: &PauliOperator) -> Result<Complex64> {
        check_size(self.n_qubits, op.n_qubits())?;
        Ok(op.expectation(&self.amps))
    }

    /// `|ψ⟩ ← exp(−i·dt·H)|ψ⟩` through matrix-free Lanczos.
    pub fn evolve_exact_step(&mut self, h: &PauliSum, dt: f64) -> Result<KrylovStats> {
        check_size(self.n_qubits, h.n_qubits())?;
        if !h.is_hermitian() {
            return Err(Error::NotHermitian);
        }
        let op = PauliOperator::new(h);
        self.evolve_with(&op, dt, &KrylovOptions::default())
    }

    /// Exact step with a prepared operator, which must be Hermitian.
    pub fn evolve_with(&mut self, op: &PauliOperator, dt: f64, opts: &KrylovOptions) -> Result<KrylovStats> {
        check_size(self.n_qubits, op.n_qubits())?;
        expm_multiply(op, &mut self.amps, dt, opts)
    }

    /// Probability of measuring `outcome` on `qubit`.
    pub fn outcome_probability(&self, qubit: usize, outcome: u8) -> Result<f64> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                qubit,
                n_qubits: self.n_qubits,
            });
        }
        let want = outcome as usize & 1;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(b, _)| (b >> qubit) & 1 == want)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Projects `qubit` onto `outcome`, returning the renormalized state and
    /// the probability of that outcome before projection.
    pub fn project_qubit(&self, qubit: usize, outcome: u8) -> Result<(StateVector, f64)> {
        let probability = self.outcome_probability(qubit, outcome)?;
        if probability < MIN_PROJECTION_PROBABILITY {
            return Err(Error::ProjectionImpossible(probability));
        }
        let want = outcome as usize & 1;
        let scale = 1.0 / probability.sqrt();
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(b, &a)| if (b >> qubit) & 1 == want { a * scale } else { ZERO })
            .collect();
        Ok((
            Self {
                n_qubits: self.n_qubits,
                amps,
            },
            probability,
        ))
    }

    /// Amplitudes of the lower qubits when the highest qubit is in `outcome`,
    /// i.e. `(I ⊗ ⟨outcome|)|ψ⟩` without renormalization.
    pub fn high_qubit_slice(&self, outcome: u8) -> &[Complex64] {
        let half = self.amps.len() / 2;
        if outcome == 0 {
            &self.amps[..half]
        } else {
            &self.amps[half..]
        }
    }

    /// Writes `n_qubits` (u32) followed by interleaved re/im f64, all
    /// little-endian. Debugging aid, not a stable format.
    pub fn write_dump(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(&(self.n_qubits as u32).to_le_bytes())?;
        for a in &self.amps {
            out.write_all(&a.re.to_le_bytes())?;
            out.write_all(&a.im.to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_dump(path: &Path) -> Result<StateVector> {
        let mut input = BufReader::new(File::open(path)?);
        let mut word = [0u8; 4];
        input.read_exact(&mut word)?;
        let n_qubits = u32::from_le_bytes(word) as usize;
        if n_qubits >= 40 {
            return Err(Error::TooManyQubits(n_qubits));
        }
        let mut amps = Vec::with_capacity(1 << n_qubits);
        let mut buf = [0u8; 16];
        for _ in 0..1usize << n_qubits {
            input.read_exact(&mut buf)?;
            let re = f64::from_le_bytes(buf[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(buf[8..].try_into().expect("8 bytes"));
            amps.push(Complex64::new(re, im));
        }
        Ok(Self { n_qubits, amps })
    }
}
