//! Matrix-free action of a [`PauliSum`] on amplitude vectors.
//!
//! Terms are grouped by their X mask: every string in a group maps basis
//! state `b` to `b ^ x` with amplitude factor `c · i^{|x&z|} · (−1)^{|b&z|}`.
//! Diagonal terms are folded into a single precomputed vector.

use num_complex::Complex64;

use crate::pauli::{i_pow, parity, PauliSum, Word};

#[derive(Clone, Debug)]
struct FlipGroup {
    x: u64,
    terms: Vec<(u64, Complex64)>,
}

/// A [`PauliSum`] prepared for repeated application to dense vectors.
#[derive(Clone, Debug)]
pub struct PauliOperator {
    n_qubits: usize,
    identity: Complex64,
    diagonal: Option<Vec<Complex64>>,
    groups: Vec<FlipGroup>,
}

impl PauliOperator {
    pub fn new(sum: &PauliSum) -> Self {
        Self::from_words(sum.n_qubits(), sum.words())
    }

    pub(crate) fn from_words<I>(n_qubits: usize, words: I) -> Self
    where
        I: IntoIterator<Item = (Word, Complex64)>,
    {
        let dim = 1usize << n_qubits;
        let mut identity = Complex64::new(0.0, 0.0);
        let mut diagonal: Option<Vec<Complex64>> = None;
        let mut groups: Vec<FlipGroup> = Vec::new();
        for (w, c) in words {
            if w == Word::IDENTITY {
                identity += c;
            } else if w.is_diagonal() {
                let diag = diagonal.get_or_insert_with(|| vec![Complex64::new(0.0, 0.0); dim]);
                for (b, d) in diag.iter_mut().enumerate() {
                    if parity(b as u64 & w.z) {
                        *d -= c;
                    } else {
                        *d += c;
                    }
                }
            } else {
                let factor = c * i_pow(w.y_count());
                match groups.iter_mut().find(|g| g.x == w.x) {
                    Some(g) => g.terms.push((w.z, factor)),
                    None => groups.push(FlipGroup {
                        x: w.x,
                        terms: vec![(w.z, factor)],
                    }),
                }
            }
        }
        Self {
            n_qubits,
            identity,
            diagonal,
            groups,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Coefficient of the identity string.
    pub fn identity_coeff(&self) -> Complex64 {
        self.identity
    }

    /// `out = H · input`.
    pub fn apply(&self, input: &[Complex64], out: &mut [Complex64]) {
        self.apply_traceless(input, out);
        if self.identity != Complex64::new(0.0, 0.0) {
            for (o, &v) in out.iter_mut().zip(input) {
                *o += self.identity * v;
            }
        }
    }

    /// `out = (H − c₀ I) · input`, where `c₀` is the identity coefficient.
    pub fn apply_traceless(&self, input: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(input.len(), self.dim());
        debug_assert_eq!(out.len(), self.dim());
        match &self.diagonal {
            Some(diag) => {
                for ((o, &v), &d) in out.iter_mut().zip(input).zip(diag) {
                    *o = d * v;
                }
            }
            None => out.fill(Complex64::new(0.0, 0.0)),
        }
        for group in &self.groups {
            let x = group.x as usize;
            if let [(z, f)] = group.terms.as_slice() {
                let (z, f) = (*z, *f);
                for (b, &v) in input.iter().enumerate() {
                    let term = if parity(b as u64 & z) { -f } else { f };
                    out[b ^ x] += term * v;
                }
            } else {
                for (b, &v) in input.iter().enumerate() {
                    let mut factor = Complex64::new(0.0, 0.0);
                    for &(z, f) in &group.terms {
                        if parity(b as u64 & z) {
                            factor -= f;
                        } else {
                            factor += f;
                        }
                    }
                    out[b ^ x] += factor * v;
                }
            }
        }
    }

    /// `⟨v|H|v⟩`.
    pub fn expectation(&self, v: &[Complex64]) -> Complex64 {
        let mut hv = vec![Complex64::new(0.0, 0.0); v.len()];
        self.apply(v, &mut hv);
        v.iter().zip(&hv).map(|(a, b)| a.conj() * b).sum()
    }

    /// Matrix element `⟨b'|H|b⟩` for every `b'` reached from basis state `b`.
    pub(crate) fn column(&self, b: u64, mut visit: impl FnMut(u64, Complex64)) {
        let mut diag = self.identity;
        if let Some(d) = &self.diagonal {
            diag += d[b as usize];
        }
        if diag != Complex64::new(0.0, 0.0) {
            visit(b, diag);
        }
        for group in &self.groups {
            let mut factor = Complex64::new(0.0, 0.0);
            for &(z, f) in &group.terms {
                if parity(b & z) {
                    factor -= f;
                } else {
                    factor += f;
                }
            }
            if factor != Complex64::new(0.0, 0.0) {
                visit(b ^ group.x, factor);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn matches_dense_matrix() {
        let h = PauliSum::from_labels([
            ("XYZ", Complex64::new(0.3, 0.0)),
            ("ZZI", Complex64::new(-1.1, 0.0)),
            ("IXX", Complex64::new(0.7, 0.0)),
            ("YYI", Complex64::new(0.2, 0.0)),
            ("XYI", Complex64::new(0.4, 0.0)),
            ("III", Complex64::new(2.0, 0.0)),
        ])
        .unwrap();
        let op = PauliOperator::new(&h);
        let v: Vec<Complex64> = (0..8)
            .map(|k| Complex64::new(k as f64 * 0.1 - 0.3, 0.05 * k as f64))
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); 8];
        op.apply(&v, &mut out);
        let dense = h.to_dense() * DVector::from_vec(v.clone());
        for k in 0..8 {
            assert!((out[k] - dense[k]).norm() < 1e-12);
        }
        let mut col = [Complex64::new(0.0, 0.0); 8];
        op.column(5, |b, c| col[b as usize] += c);
        let dense = h.to_dense();
        for k in 0..8 {
            assert!((col[k] - dense[(k, 5)]).norm() < 1e-12);
        }
    }
}
