//! Lanczos approximation of `exp(−i·dt·H)·v` for Hermitian `H`.
//!
//! The Krylov space is grown one vector at a time (with full
//! re-orthogonalization) until either the subspace becomes invariant or the
//! a-posteriori error estimate `β_m |[exp(−i·dt·T_m) e₁]_m|` drops below the
//! tolerance. If the maximum dimension is reached first the step is split in
//! two halves, recursively.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dense::symmetric_eigen;
use crate::error::{Error, Result};
use crate::operator::PauliOperator;

#[derive(Clone, Copy, Debug)]
pub struct KrylovOptions {
    pub max_dim: usize,
    pub tolerance: f64,
    /// Maximum recursion depth when splitting an unconverged step.
    pub max_splits: u32,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            max_dim: 60,
            tolerance: 1e-12,
            max_splits: 8,
        }
    }
}

/// Work done by one call to [`expm_multiply`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct KrylovStats {
    pub matvecs: usize,
    pub substeps: usize,
    pub max_dim: usize,
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `exp(−i·dt·T) e₁` for the symmetric tridiagonal `T` given by its
/// diagonal `alpha` and off-diagonal `beta`.
fn tridiagonal_expm_first_column(alpha: &[f64], beta: &[f64], dt: f64) -> Vec<Complex64> {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for k in 0..m {
        t[(k, k)] = alpha[k];
        if k + 1 < m {
            t[(k, k + 1)] = beta[k];
            t[(k + 1, k)] = beta[k];
        }
    }
    let (values, vectors) = symmetric_eigen(&t);
    (0..m)
        .map(|row| {
            (0..m)
                .map(|l| vectors[(row, l)] * vectors[(0, l)] * Complex64::from_polar(1.0, -dt * values[l]))
                .sum()
        })
        .collect()
}

/// Single Lanczos attempt. Leaves `psi` untouched on failure.
fn lanczos_step(
    op: &PauliOperator,
    psi: &mut [Complex64],
    dt: f64,
    opts: &KrylovOptions,
    stats: &mut KrylovStats,
) -> Result<()> {
    let beta0 = norm(psi);
    if beta0 == 0.0 || dt == 0.0 {
        return Ok(());
    }
    let n = psi.len();
    let mut basis: Vec<Vec<Complex64>> = vec![psi.iter().map(|x| x / beta0).collect()];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let mut last_residual = f64::INFINITY;

    for j in 0..opts.max_dim {
        op.apply_traceless(&basis[j], &mut w);
        stats.matvecs += 1;
        let a = inner(&basis[j], &w).re;
        for (wi, vi) in w.iter_mut().zip(&basis[j]) {
            *wi -= a * vi;
        }
        if j > 0 {
            let b = beta[j - 1];
            for (wi, vi) in w.iter_mut().zip(&basis[j - 1]) {
                *wi -= b * vi;
            }
        }
        for v in &basis {
            let h = inner(v, &w);
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= h * vi;
            }
        }
        alpha.push(a);
        let b = norm(&w);
        let y = tridiagonal_expm_first_column(&alpha, &beta, dt);
        let m = alpha.len();
        let scale = alpha.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
        let breakdown = b <= 1e-14 * scale;
        last_residual = b * y[m - 1].norm();
        if breakdown || last_residual < opts.tolerance {
            stats.max_dim = stats.max_dim.max(m);
            psi.fill(Complex64::new(0.0, 0.0));
            for (coef, v) in y.iter().zip(&basis) {
                let c = coef * beta0;
                for (p, vi) in psi.iter_mut().zip(v) {
                    *p += c * vi;
                }
            }
            return Ok(());
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    Err(Error::KrylovNotConverged {
        residual: last_residual,
        dimension: opts.max_dim,
    })
}

fn split_step(
    op: &PauliOperator,
    psi: &mut [Complex64],
    dt: f64,
    opts: &KrylovOptions,
    depth: u32,
    stats: &mut KrylovStats,
) -> Result<()> {
    match lanczos_step(op, psi, dt, opts, stats) {
        Ok(()) => {
            stats.substeps += 1;
            Ok(())
        }
        Err(Error::KrylovNotConverged { .. }) if depth < opts.max_splits => {
            split_step(op, psi, dt / 2.0, opts, depth + 1, stats)?;
            split_step(op, psi, dt / 2.0, opts, depth + 1, stats)
        }
        Err(e) => Err(e),
    }
}

/// In-place `psi ← exp(−i·dt·H)·psi`. The identity part of `H` is applied
/// as an exact phase.
pub fn expm_multiply(op: &PauliOperator, psi: &mut [Complex64], dt: f64, opts: &KrylovOptions) -> Result<KrylovStats> {
    let mut stats = KrylovStats::default();
    split_step(op, psi, dt, opts, 0, &mut stats)?;
    let shift = op.identity_coeff().re;
    if shift != 0.0 {
        let phase = Complex64::from_polar(1.0, -dt * shift);
        psi.iter_mut().for_each(|p| *p *= phase);
    }
    Ok(stats)
}
