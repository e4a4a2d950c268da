//! Krylov (Lanczos) evaluation of `exp(W)·v` for skew-Hermitian `W`.
//!
//! The fourth-order Magnus–Zassenhaus scheme needs the exponential of a correction
//! operator `W⁽²⁾` that mixes multiplication and differentiation and therefore has no
//! diagonal representation in either physical or Fourier space. Its action is computed in
//! a Krylov subspace instead: writing `W = i·H` with `H = −i·W` Hermitian, `m` steps of the
//! Lanczos recurrence give an orthonormal basis `V_m` and a real symmetric tridiagonal
//! `T_m = V_m†·H·V_m`, and
//!
//! ```text
//!     exp(W)·v ≈ β₀ · V_m · exp(i·T_m) · e₁ ,      β₀ = ‖v‖ .
//! ```
//!
//! `W⁽²⁾` shrinks with the step size (`‖W⁽²⁾‖ = O(h)` at fixed spatial resolution), so a
//! handful of iterations reaches roundoff; the a-posteriori stopping estimate is the
//! standard `β_{m+1}·|[exp(i·T_m)·e₁]_m|`, the first neglected term of the Lanczos series.
//!
//! Failure to converge within the iteration cap is reported through
//! [`KrylovInfo::converged`], not as an error: the propagation driver decides whether to
//! abort, and fixed-iteration studies deliberately run with `tol = 0`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::sync::Arc;

use crate::grid::WaveFunction;
use crate::{MagsplitError, Result};

/// Options for [`expm_krylov`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovConfig {
    /// Hard cap on Lanczos iterations (= operator applications).
    pub max_iters: usize,
    /// Stopping tolerance for the a-posteriori estimate; `0.0` forces exactly
    /// `max_iters` iterations (barring breakdown).
    pub tol: f64,
    /// Re-orthogonalize each new basis vector against the whole basis. Keeps the basis
    /// orthonormal to machine precision; the bases here are small (≤ 32), so the cost is
    /// negligible against the FFTs inside the operator application.
    pub reorthogonalize: bool,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        KrylovConfig { max_iters: 12, tol: 1e-12, reorthogonalize: true }
    }
}

/// What a [`expm_krylov`] call did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovInfo {
    /// Lanczos iterations performed (= operator applications).
    pub iterations: usize,
    /// Whether the stopping estimate fell below `tol` (or the subspace became exact).
    pub converged: bool,
    /// Whether the recurrence broke down, i.e. the Krylov subspace is invariant and the
    /// result is exact up to roundoff.
    pub breakdown: bool,
    /// Final value of the stopping estimate.
    pub error_estimate: f64,
}

/// Dense `exp(i·T)` for a real symmetric tridiagonal `T` given by its diagonal and
/// off-diagonal, via an eigendecomposition. The result is unitary up to roundoff.
pub fn expm_tridiag(diag: &[f64], off: &[f64]) -> Result<DMatrix<Complex64>> {
    let m = diag.len();
    if m == 0 || off.len() + 1 != m {
        return Err(MagsplitError::Config(format!(
            "expm_tridiag: need len(off) = len(diag) − 1 ≥ 0 (got {} and {})",
            off.len(),
            m
        )));
    }
    let mut t = DMatrix::<f64>::zeros(m, m);
    for (j, &a) in diag.iter().enumerate() {
        t[(j, j)] = a;
    }
    for (j, &b) in off.iter().enumerate() {
        t[(j, j + 1)] = b;
        t[(j + 1, j)] = b;
    }
    let eig = nalgebra::linalg::SymmetricEigen::new(t);
    let q = &eig.eigenvectors;
    let phases: Vec<Complex64> = eig
        .eigenvalues
        .iter()
        .map(|&l| Complex64::new(0.0, l).exp())
        .collect();
    let mut out = DMatrix::<Complex64>::zeros(m, m);
    for row in 0..m {
        for col in 0..m {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, ph) in phases.iter().enumerate() {
                acc += q[(row, j)] * ph * q[(col, j)];
            }
            out[(row, col)] = acc;
        }
    }
    Ok(out)
}

/// Approximates `exp(W)·v` for a skew-Hermitian operator given by its action `matvec`.
///
/// `matvec` must implement `u ↦ W·u`; internally the recurrence runs on the Hermitian
/// `H = −i·W`. Inner products and norms are the discrete L² ones of the grid, so the basis
/// is orthonormal in the same norm the propagation error is measured in.
///
/// The returned state is rescaled to the exact input norm: the true exponential of a
/// skew-Hermitian operator is unitary, and pinning the norm keeps drift from accumulating
/// over long propagations.
pub fn expm_krylov(
    mut matvec: impl FnMut(&WaveFunction) -> Result<WaveFunction>,
    v: &WaveFunction,
    config: &KrylovConfig,
) -> Result<(WaveFunction, KrylovInfo)> {
    if config.max_iters == 0 {
        return Err(MagsplitError::Config("expm_krylov: max_iters must be ≥ 1".into()));
    }
    let beta0 = v.norm_l2();
    if beta0 == 0.0 {
        return Ok((
            v.clone(),
            KrylovInfo { iterations: 0, converged: true, breakdown: true, error_estimate: 0.0 },
        ));
    }
    let n = v.values.len();
    let mut basis: Vec<WaveFunction> = Vec::with_capacity(config.max_iters);
    let mut first = v.clone();
    let inv = 1.0 / beta0;
    for z in &mut first.values {
        *z *= inv;
    }
    basis.push(first);
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut breakdown = false;
    let mut estimate = f64::INFINITY;
    let mut y_first_col: Vec<Complex64> = vec![Complex64::new(1.0, 0.0)];

    for j in 0..config.max_iters {
        // w = H·vⱼ = −i·W·vⱼ
        let wv = matvec(&basis[j])?;
        let mut w: Vec<Complex64> = wv.values.iter().map(|z| z * Complex64::new(0.0, -1.0)).collect();
        if w.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(MagsplitError::NonFinite("Krylov operator application"));
        }
        let a = {
            let vj = &basis[j].values;
            let dx = v.grid.dx();
            (vj.iter().zip(&w).map(|(x, y)| x.conj() * y).sum::<Complex64>() * dx).re
        };
        alpha.push(a);
        {
            let vj = &basis[j].values;
            for i in 0..n {
                w[i] -= a * vj[i];
            }
            if j > 0 {
                let b_prev = beta[j - 1];
                let vp = &basis[j - 1].values;
                for i in 0..n {
                    w[i] -= b_prev * vp[i];
                }
            }
        }
        if config.reorthogonalize {
            let dx = v.grid.dx();
            for vb in &basis {
                let overlap = vb.values.iter().zip(&w).map(|(x, y)| x.conj() * y).sum::<Complex64>() * dx;
                for (wi, vi) in w.iter_mut().zip(&vb.values) {
                    *wi -= overlap * vi;
                }
            }
        }
        let b = {
            let dx = v.grid.dx();
            (dx * w.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
        };
        let m = j + 1;
        let expt = expm_tridiag(&alpha, &beta)?;
        y_first_col = (0..m).map(|row| expt[(row, 0)]).collect();
        estimate = b * y_first_col[m - 1].norm();
        if estimate < config.tol {
            converged = true;
            break;
        }
        // Breakdown: the subspace is invariant and the tridiagonal representation exact.
        let scale = alpha
            .iter()
            .chain(beta.iter())
            .fold(f64::MIN_POSITIVE, |acc, x| acc.max(x.abs()));
        if b <= 1e-14 * scale {
            converged = true;
            breakdown = true;
            break;
        }
        if m == config.max_iters {
            break;
        }
        beta.push(b);
        let mut next = WaveFunction {
            values: w,
            grid: Arc::clone(&v.grid),
        };
        let invb = 1.0 / b;
        for z in &mut next.values {
            *z *= invb;
        }
        basis.push(next);
    }

    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (coef, vb) in y_first_col.iter().zip(&basis) {
        let c = beta0 * coef;
        for (oi, vi) in out.iter_mut().zip(&vb.values) {
            *oi += c * vi;
        }
    }
    let mut result = WaveFunction { values: out, grid: Arc::clone(&v.grid) };
    let rn = result.norm_l2();
    if rn > 0.0 {
        let fix = beta0 / rn;
        for z in &mut result.values {
            *z *= fix;
        }
    }
    Ok((
        result,
        KrylovInfo { iterations: alpha.len(), converged, breakdown, error_estimate: estimate },
    ))
}
