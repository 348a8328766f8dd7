//! Pauli strings, Pauli sums and the Jordan–Wigner encoding.
//!
//! A Pauli string on `n` qubits is stored as a pair of bit masks: bit `q` of
//! `x` is set for X or Y on qubit `q`, bit `q` of `z` for Z or Y. The pair
//! `(x, z)` denotes the operator `i^{|x & z|} X^x Z^z`, which is exactly the
//! tensor product of the single-qubit Paulis. Every stored operator sequence
//! is therefore hermitian and all phases live in the coefficient.
//!
//! Qubit `q` corresponds to bit `q` of a computational-basis index, so the
//! highest qubit is the most significant bit. Labels such as `"XZI"` list
//! qubit 0 first.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{check_size, Error, Result};

/// Coefficients with modulus below this are dropped from a [`PauliSum`].
pub const PRUNE_TOLERANCE: f64 = 1e-14;

/// Tolerance on imaginary parts used by [`PauliSum::is_hermitian`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Widest register a bit-mask Pauli string can describe.
pub const MAX_QUBITS: usize = 64;

const I_POWERS: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

/// `i^k`.
#[inline]
pub(crate) fn i_pow(k: u32) -> Complex64 {
    I_POWERS[(k & 3) as usize]
}

#[inline]
pub(crate) fn parity(bits: u64) -> bool {
    bits.count_ones() & 1 == 1
}

/// A single-qubit Pauli operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Operator content of a Pauli string, without its coefficient.
///
/// Ordered lexicographically on the operator sequence (qubit 0 first, with
/// `I < X < Y < Z`), which fixes the canonical term order of a [`PauliSum`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Word {
    pub x: u64,
    pub z: u64,
}

impl Word {
    pub const IDENTITY: Word = Word { x: 0, z: 0 };

    fn code(self, q: u32) -> u8 {
        let x = (self.x >> q) & 1;
        let z = (self.z >> q) & 1;
        match (x, z) {
            (0, 0) => 0,
            (1, 0) => 1,
            (1, 1) => 2,
            _ => 3,
        }
    }

    #[inline]
    pub fn y_count(self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Group product `self · other`, returned as the resulting word and the
    /// power of `i` multiplying it.
    #[inline]
    pub fn multiply(self, other: Word) -> (Word, u32) {
        let out = Word {
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        };
        // Moving Z^{z1} through X^{x2} costs (-1)^{|z1 & x2|}.
        // Wrapping arithmetic is exact modulo 4.
        let power = self
            .y_count()
            .wrapping_add(other.y_count())
            .wrapping_sub(out.y_count())
            .wrapping_add(2 * (self.z & other.x).count_ones());
        (out, power & 3)
    }

    pub fn commutes_with(self, other: Word) -> bool {
        !parity((self.x & other.z) ^ (self.z & other.x))
    }

    pub fn is_diagonal(self) -> bool {
        self.x == 0
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        let diff = (self.x ^ other.x) | (self.z ^ other.z);
        if diff == 0 {
            return Ordering::Equal;
        }
        let q = diff.trailing_zeros();
        self.code(q).cmp(&other.code(q))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn check_width(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_QUBITS {
        Err(Error::TooManyQubits(n_qubits))
    } else {
        Ok(())
    }
}

fn check_qubit(qubit: usize, n_qubits: usize) -> Result<()> {
    if qubit < n_qubits {
        Ok(())
    } else {
        Err(Error::QubitOutOfRange { qubit, n_qubits })
    }
}

/// A weighted tensor product of single-qubit Paulis.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliString {
    n_qubits: usize,
    word: Word,
    coeff: Complex64,
}

impl PauliString {
    pub fn new(ops: &[Pauli], coeff: impl Into<Complex64>) -> Result<Self> {
        check_width(ops.len())?;
        let mut word = Word::IDENTITY;
        for (q, op) in ops.iter().enumerate() {
            let (x, z) = op.bits();
            word.x |= (x as u64) << q;
            word.z |= (z as u64) << q;
        }
        Ok(Self {
            n_qubits: ops.len(),
            word,
            coeff: coeff.into(),
        })
    }

    /// Parses a label such as `"XZI"` (qubit 0 first).
    pub fn from_label(label: &str, coeff: impl Into<Complex64>) -> Result<Self> {
        let ops = label
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::InvalidParameter(format!("bad Pauli symbol {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(&ops, coeff)
    }

    pub fn identity(n_qubits: usize, coeff: impl Into<Complex64>) -> Result<Self> {
        check_width(n_qubits)?;
        Ok(Self {
            n_qubits,
            word: Word::IDENTITY,
            coeff: coeff.into(),
        })
    }

    /// `coeff · P` acting on `qubit` and identity elsewhere.
    pub fn single(n_qubits: usize, qubit: usize, pauli: Pauli, coeff: impl Into<Complex64>) -> Result<Self> {
        check_width(n_qubits)?;
        check_qubit(qubit, n_qubits)?;
        let (x, z) = pauli.bits();
        Ok(Self {
            n_qubits,
            word: Word {
                x: (x as u64) << qubit,
                z: (z as u64) << qubit,
            },
            coeff: coeff.into(),
        })
    }

    pub(crate) fn from_word(n_qubits: usize, word: Word, coeff: Complex64) -> Self {
        Self { n_qubits, word, coeff }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn coeff(&self) -> Complex64 {
        self.coeff
    }

    pub fn with_coeff(&self, coeff: impl Into<Complex64>) -> Self {
        Self {
            coeff: coeff.into(),
            ..self.clone()
        }
    }

    pub fn pauli(&self, qubit: usize) -> Pauli {
        Pauli::from_bits((self.word.x >> qubit) & 1 == 1, (self.word.z >> qubit) & 1 == 1)
    }

    pub fn ops(&self) -> Vec<Pauli> {
        (0..self.n_qubits).map(|q| self.pauli(q)).collect()
    }

    pub fn label(&self) -> String {
        (0..self.n_qubits).map(|q| self.pauli(q).symbol()).collect()
    }

    /// Qubits carrying a non-identity factor, in ascending order.
    pub fn support(&self) -> Vec<usize> {
        let mask = self.word.x | self.word.z;
        (0..self.n_qubits).filter(|q| (mask >> q) & 1 == 1).collect()
    }

    pub fn x_mask(&self) -> u64 {
        self.word.x
    }

    pub fn z_mask(&self) -> u64 {
        self.word.z
    }

    pub fn is_identity(&self) -> bool {
        self.word == Word::IDENTITY
    }

    pub fn adjoint(&self) -> Self {
        self.with_coeff(self.coeff.conj())
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        self.word.commutes_with(other.word)
    }

    /// Group product `self · other` with the phase folded into the coefficient.
    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        check_size(self.n_qubits, other.n_qubits)?;
        let (word, power) = self.word.multiply(other.word);
        Ok(Self {
            n_qubits: self.n_qubits,
            word,
            coeff: self.coeff * other.coeff * i_pow(power),
        })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})·{}", self.coeff, self.label())
    }
}

/// A canonicalized linear combination of Pauli strings on a fixed register.
///
/// Like terms are always merged and coefficients with modulus below
/// [`PRUNE_TOLERANCE`] are removed, so two sums describing the same operator
/// compare equal term by term.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<Word, Complex64>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        assert!(n_qubits <= MAX_QUBITS, "at most {MAX_QUBITS} qubits");
        Self {
            n_qubits,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n_qubits: usize, coeff: impl Into<Complex64>) -> Self {
        let mut sum = Self::zero(n_qubits);
        sum.accumulate(Word::IDENTITY, coeff.into());
        sum
    }

    pub fn from_strings<I>(n_qubits: usize, strings: I) -> Result<Self>
    where
        I: IntoIterator<Item = PauliString>,
    {
        check_width(n_qubits)?;
        let mut sum = Self::zero(n_qubits);
        for s in strings {
            sum.add_string(&s)?;
        }
        Ok(sum)
    }

    /// Builds a sum from `(label, coefficient)` pairs, e.g. `[("XX", 0.5)]`.
    pub fn from_labels<'a, I, C>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, C)>,
        C: Into<Complex64>,
    {
        let strings = terms
            .into_iter()
            .map(|(label, c)| PauliString::from_label(label, c))
            .collect::<Result<Vec<_>>>()?;
        let n = strings
            .first()
            .map(PauliString::n_qubits)
            .ok_or_else(|| Error::InvalidParameter("empty term list".into()))?;
        Self::from_strings(n, strings)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = PauliString> + '_ {
        self.terms
            .iter()
            .map(|(&w, &c)| PauliString::from_word(self.n_qubits, w, c))
    }

    pub(crate) fn words(&self) -> impl Iterator<Item = (Word, Complex64)> + '_ {
        self.terms.iter().map(|(&w, &c)| (w, c))
    }

    /// Coefficient of the term with the same operator sequence as `s`.
    pub fn coefficient_of(&self, s: &PauliString) -> Complex64 {
        self.terms.get(&s.word).copied().unwrap_or_default()
    }

    pub fn identity_coeff(&self) -> Complex64 {
        self.terms.get(&Word::IDENTITY).copied().unwrap_or_default()
    }

    fn accumulate(&mut self, word: Word, coeff: Complex64) {
        let entry = self.terms.entry(word).or_default();
        *entry += coeff;
        if entry.norm() < PRUNE_TOLERANCE {
            self.terms.remove(&word);
        }
    }

    pub fn add_string(&mut self, s: &PauliString) -> Result<()> {
        check_size(self.n_qubits, s.n_qubits)?;
        self.accumulate(s.word, s.coeff);
        Ok(())
    }

    /// `self += factor · other`.
    pub fn add_scaled(&mut self, other: &PauliSum, factor: impl Into<Complex64>) -> Result<()> {
        check_size(self.n_qubits, other.n_qubits)?;
        let factor = factor.into();
        for (&w, &c) in &other.terms {
            self.accumulate(w, c * factor);
        }
        Ok(())
    }

    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        let mut out = self.clone();
        out.add_scaled(other, 1.0)?;
        Ok(out)
    }

    pub fn sub(&self, other: &PauliSum) -> Result<PauliSum> {
        let mut out = self.clone();
        out.add_scaled(other, -1.0)?;
        Ok(out)
    }

    pub fn scale(&self, factor: impl Into<Complex64>) -> PauliSum {
        let factor = factor.into();
        let mut out = Self::zero(self.n_qubits);
        for (&w, &c) in &self.terms {
            out.accumulate(w, c * factor);
        }
        out
    }

    /// Operator product `self · other`.
    pub fn mul(&self, other: &PauliSum) -> Result<PauliSum> {
        check_size(self.n_qubits, other.n_qubits)?;
        let mut out = Self::zero(self.n_qubits);
        for (&wa, &ca) in &self.terms {
            for (&wb, &cb) in &other.terms {
                let (w, power) = wa.multiply(wb);
                out.accumulate(w, ca * cb * i_pow(power));
            }
        }
        Ok(out)
    }

    /// `self · other − other · self`.
    pub fn commutator(&self, other: &PauliSum) -> Result<PauliSum> {
        check_size(self.n_qubits, other.n_qubits)?;
        let mut out = Self::zero(self.n_qubits);
        for (&wa, &ca) in &self.terms {
            for (&wb, &cb) in &other.terms {
                if wa.commutes_with(wb) {
                    continue;
                }
                // Anticommuting strings: ab − ba = 2ab.
                let (w, power) = wa.multiply(wb);
                out.accumulate(w, 2.0 * ca * cb * i_pow(power));
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> PauliSum {
        Self {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(&w, c)| (w, c.conj())).collect(),
        }
    }

    /// True when every coefficient is real within [`HERMITIAN_TOLERANCE`].
    pub fn is_hermitian(&self) -> bool {
        self.terms.values().all(|c| c.im.abs() <= HERMITIAN_TOLERANCE)
    }

    /// True when every coefficient is imaginary within [`HERMITIAN_TOLERANCE`].
    pub fn is_antihermitian(&self) -> bool {
        self.terms.values().all(|c| c.re.abs() <= HERMITIAN_TOLERANCE)
    }

    /// Re-canonicalizes with the given pruning tolerance.
    pub fn canonicalize(&self, tolerance: f64) -> PauliSum {
        Self {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.norm() >= tolerance)
                .map(|(&w, &c)| (w, c))
                .collect(),
        }
    }

    /// Sum of coefficient moduli, an upper bound on the spectral norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// `self ⊗ other`, with `self` on the low qubits.
    pub fn tensor(&self, other: &PauliSum) -> Result<PauliSum> {
        let n = self.n_qubits + other.n_qubits;
        check_width(n)?;
        let shift = self.n_qubits;
        let mut out = Self::zero(n);
        for (&wa, &ca) in &self.terms {
            for (&wb, &cb) in &other.terms {
                let w = Word {
                    x: wa.x | (wb.x << shift),
                    z: wa.z | (wb.z << shift),
                };
                out.accumulate(w, ca * cb);
            }
        }
        Ok(out)
    }

    /// Pads with identities on new high qubits up to `n_qubits`.
    pub fn embed(&self, n_qubits: usize) -> Result<PauliSum> {
        if n_qubits < self.n_qubits {
            return Err(Error::SizeMismatch {
                left: self.n_qubits,
                right: n_qubits,
            });
        }
        check_width(n_qubits)?;
        Ok(Self {
            n_qubits,
            terms: self.terms.clone(),
        })
    }

    /// Dense matrix in the computational basis. Intended for small registers.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        assert!(self.n_qubits <= 14, "dense matrices limited to 14 qubits");
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for (&w, &c) in &self.terms {
            let phase = c * i_pow(w.y_count());
            for b in 0..dim as u64 {
                let sign = if parity(b & w.z) { -1.0 } else { 1.0 };
                m[((b ^ w.x) as usize, b as usize)] += phase * sign;
            }
        }
        m
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, s) in self.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// A product of fermionic ladder operators, `coeff · Π a^(†)_{mode}`.
///
/// Factors are applied right to left as written; no normal ordering is
/// assumed.
#[derive(Clone, Debug, PartialEq)]
pub struct FermionOp {
    /// `(mode, dagger)` pairs, leftmost factor first.
    pub factors: Vec<(usize, bool)>,
    pub coeff: Complex64,
}

impl FermionOp {
    pub fn new(coeff: impl Into<Complex64>, factors: Vec<(usize, bool)>) -> Self {
        Self {
            factors,
            coeff: coeff.into(),
        }
    }

    pub fn creation(mode: usize) -> Self {
        Self::new(1.0, vec![(mode, true)])
    }

    pub fn annihilation(mode: usize) -> Self {
        Self::new(1.0, vec![(mode, false)])
    }

    /// `n̂_p = a†_p a_p`.
    pub fn number(mode: usize) -> Self {
        Self::new(1.0, vec![(mode, true), (mode, false)])
    }

    /// `coeff · a†_p a_q`.
    pub fn excitation(coeff: impl Into<Complex64>, p: usize, q: usize) -> Self {
        Self::new(coeff, vec![(p, true), (q, false)])
    }

    pub fn adjoint(&self) -> Self {
        Self {
            factors: self.factors.iter().rev().map(|&(m, d)| (m, !d)).collect(),
            coeff: self.coeff.conj(),
        }
    }

    pub fn max_mode(&self) -> Option<usize> {
        self.factors.iter().map(|&(m, _)| m).max()
    }
}

/// Jordan–Wigner image of a single ladder operator:
/// `a_p → Z_0 ⋯ Z_{p−1} (X_p + iY_p)/2`, `a†_p → Z_0 ⋯ Z_{p−1} (X_p − iY_p)/2`.
pub fn ladder_image(mode: usize, dagger: bool, n_modes: usize) -> Result<PauliSum> {
    check_width(n_modes)?;
    if mode >= n_modes {
        return Err(Error::ModeOutOfRange { index: mode, n_modes });
    }
    let string = (1u64 << mode) - 1;
    let bit = 1u64 << mode;
    let y_sign = if dagger { -0.5 } else { 0.5 };
    let mut sum = PauliSum::zero(n_modes);
    sum.accumulate(Word { x: bit, z: string }, Complex64::new(0.5, 0.0));
    sum.accumulate(
        Word {
            x: bit,
            z: string | bit,
        },
        Complex64::new(0.0, y_sign),
    );
    Ok(sum)
}

/// Jordan–Wigner image of one fermionic product on `n_modes` qubits.
pub fn jordan_wigner(op: &FermionOp, n_modes: usize) -> Result<PauliSum> {
    jordan_wigner_sum(std::slice::from_ref(op), n_modes)
}

/// Jordan–Wigner image of a sum of fermionic products.
pub fn jordan_wigner_sum<'a, I>(ops: I, n_modes: usize) -> Result<PauliSum>
where
    I: IntoIterator<Item = &'a FermionOp>,
{
    check_width(n_modes)?;
    let annihilators = (0..n_modes)
        .map(|p| ladder_image(p, false, n_modes))
        .collect::<Result<Vec<_>>>()?;
    let creators = (0..n_modes)
        .map(|p| ladder_image(p, true, n_modes))
        .collect::<Result<Vec<_>>>()?;
    let mut total = PauliSum::zero(n_modes);
    for op in ops {
        if let Some(m) = op.max_mode() {
            if m >= n_modes {
                return Err(Error::ModeOutOfRange { index: m, n_modes });
            }
        }
        let mut product = PauliSum::identity(n_modes, op.coeff);
        for &(mode, dagger) in &op.factors {
            let image = if dagger { &creators[mode] } else { &annihilators[mode] };
            product = product.mul(image)?;
            if product.is_empty() {
                break;
            }
        }
        total.add_scaled(&product, 1.0)?;
    }
    Ok(total)
}
