//! Symmetrized multiplication–differentiation operator sums.
//!
//! The correction exponents of the fourth-order Magnus–Zassenhaus scheme are built from
//! the symmetrized blocks `⟨f⟩ₖ = ½(D_f·Kₖ + Kₖ·D_f)`, where `D_f` multiplies pointwise by
//! a real grid function `f` and `Kₖ` is the spectral k-th derivative. A [`SymOpSum`]
//! represents
//!
//! ```text
//!     W = Σⱼ  cⱼ · i^(kⱼ+1) · ⟨fⱼ⟩_{kⱼ}
//! ```
//!
//! with real `cⱼ` and real `fⱼ`, which makes `W` skew-Hermitian term by term: for even `k`
//! the block `⟨f⟩ₖ` is Hermitian and the prefactor is imaginary, for odd `k` the block is
//! skew-Hermitian (the odd-order symbol has its Nyquist entry zeroed; see [`crate::grid`])
//! and the prefactor is real. Skew-Hermitian exponents keep `exp(W)` unitary, which the
//! Lanczos exponentiation in [`crate::lanczos`] relies on.
//!
//! [`SymOpSum::apply`] costs `2 + 2m` transforms, where `m` is the number of distinct
//! derivative orders `k ≥ 1` in the sum (terms sharing an order are merged at
//! construction): one shared forward transform of the input, per order one inverse
//! transform for `D_f·Kₖu` and one forward transform of `f⊙u`, and one shared inverse
//! transform of the accumulated spectral branch. A purely diagonal sum costs none.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::sync::Arc;

use crate::grid::{make_symbol, FftEngine, Grid1D, WaveFunction};
use crate::{MagsplitError, Result};

/// `i^p` for the term prefactor convention.
fn i_pow(p: usize) -> Complex64 {
    match p % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// A skew-Hermitian sum `Σⱼ cⱼ·i^(kⱼ+1)·⟨fⱼ⟩_{kⱼ}` of symmetrized blocks.
#[derive(Debug, Clone)]
pub struct SymOpSum {
    grid: Arc<Grid1D>,
    /// `(k, f, coeff)` triples, ascending in `k`, at most one triple per `k`.
    terms: Vec<(usize, Vec<f64>, f64)>,
}

impl SymOpSum {
    /// Builds a sum from `(k, f, coeff)` triples.
    ///
    /// Triples sharing a derivative order are merged into one (`f ← Σ c·f`, coefficient 1),
    /// so the per-apply transform budget depends only on the set of distinct orders.
    pub fn new(grid: &Arc<Grid1D>, terms: Vec<(usize, Vec<f64>, f64)>) -> Result<Self> {
        let n = grid.n_points;
        let mut merged: Vec<(usize, Vec<f64>, f64)> = Vec::new();
        for (k, f, c) in terms {
            if f.len() != n {
                return Err(MagsplitError::GridMismatch(format!(
                    "term with k={k}: f length {} vs n_points {n}",
                    f.len()
                )));
            }
            if !c.is_finite() || f.iter().any(|v| !v.is_finite()) {
                return Err(MagsplitError::NonFinite("SymOpSum term"));
            }
            match merged.iter_mut().find(|(mk, _, _)| *mk == k) {
                Some((_, mf, mc)) => {
                    // Fold the existing coefficient into the samples, then add.
                    for (a, b) in mf.iter_mut().zip(&f) {
                        *a = *mc * *a + c * b;
                    }
                    *mc = 1.0;
                }
                None => merged.push((k, f, c)),
            }
        }
        merged.sort_by_key(|(k, _, _)| *k);
        Ok(SymOpSum { grid: Arc::clone(grid), terms: merged })
    }

    /// The merged `(k, f, coeff)` triples, ascending in `k`.
    pub fn terms(&self) -> &[(usize, Vec<f64>, f64)] {
        &self.terms
    }

    /// The grid the operator lives on.
    pub fn grid(&self) -> &Arc<Grid1D> {
        &self.grid
    }

    /// Applies the operator: `2 + 2m` transforms for `m` derivative orders `k ≥ 1`
    /// (none when the sum is diagonal).
    pub fn apply(&self, engine: &mut FftEngine, u: &WaveFunction) -> Result<WaveFunction> {
        if !engine.grid().same_as(&self.grid) || !u.grid.same_as(&self.grid) {
            return Err(MagsplitError::GridMismatch(
                "SymOpSum, engine, and state must share one grid".into(),
            ));
        }
        let n = self.grid.n_points;
        let mut acc = vec![Complex64::new(0.0, 0.0); n];
        for (k, f, c) in &self.terms {
            if *k == 0 {
                let factor = i_pow(1) * *c;
                for j in 0..n {
                    acc[j] += factor * f[j] * u.values[j];
                }
            }
        }
        let derivative_terms: Vec<&(usize, Vec<f64>, f64)> =
            self.terms.iter().filter(|(k, _, _)| *k >= 1).collect();
        if !derivative_terms.is_empty() {
            let mut u_hat = u.values.clone();
            engine.forward(&mut u_hat);
            let mut spectral_acc = vec![Complex64::new(0.0, 0.0); n];
            for (k, f, c) in derivative_terms {
                let symbol = make_symbol(&self.grid, *k);
                let factor = i_pow(k + 1) * (0.5 * *c);
                // Branch D_f·Kₖ: differentiate the shared spectrum, multiply by f.
                let mut d = u_hat.clone();
                for (z, s) in d.iter_mut().zip(&symbol.values) {
                    *z *= s;
                }
                engine.inverse(&mut d);
                for j in 0..n {
                    acc[j] += factor * f[j] * d[j];
                }
                // Branch Kₖ·D_f: transform f⊙u, accumulate its differentiated spectrum.
                let mut z: Vec<Complex64> = u.values.iter().zip(f).map(|(v, &w)| v * w).collect();
                engine.forward(&mut z);
                for ((a, s), zv) in spectral_acc.iter_mut().zip(&symbol.values).zip(&z) {
                    *a += factor * s * zv;
                }
            }
            engine.inverse(&mut spectral_acc);
            for j in 0..n {
                acc[j] += spectral_acc[j];
            }
        }
        WaveFunction::new(Arc::clone(&self.grid), acc)
    }

    /// Assembles the operator as a dense matrix for small grids (`n ≤ 256`).
    ///
    /// Intended for validation: the dense matrix of a sum must agree with [`Self::apply`]
    /// to roundoff and be exactly skew-Hermitian up to roundoff. Uses private FFT plans and
    /// does not touch any engine's transform counter.
    pub fn materialize_dense(&self) -> Result<DMatrix<Complex64>> {
        let n = self.grid.n_points;
        const LIMIT: usize = 256;
        if n > LIMIT {
            return Err(MagsplitError::SizeGuard { n, limit: LIMIT });
        }
        let mut planner = rustfft::FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for (k, f, c) in &self.terms {
            if *k == 0 {
                let factor = i_pow(1) * *c;
                for j in 0..n {
                    m[(j, j)] += factor * f[j];
                }
                continue;
            }
            // Dense Kₖ, column by column.
            let symbol = make_symbol(&self.grid, *k);
            let mut kk = DMatrix::<Complex64>::zeros(n, n);
            for j in 0..n {
                let mut col = vec![Complex64::new(0.0, 0.0); n];
                col[j] = Complex64::new(1.0, 0.0);
                fwd.process(&mut col);
                for (z, s) in col.iter_mut().zip(&symbol.values) {
                    *z *= s;
                }
                inv.process(&mut col);
                let scale = 1.0 / n as f64;
                for (row, z) in col.iter().enumerate() {
                    kk[(row, j)] = z * scale;
                }
            }
            let factor = i_pow(k + 1) * (0.5 * *c);
            for col in 0..n {
                for row in 0..n {
                    m[(row, col)] += factor * (f[row] + f[col]) * kk[(row, col)];
                }
            }
        }
        Ok(m)
    }

    /// Power-iteration estimate of the operator norm (largest singular value).
    ///
    /// The sum is skew-Hermitian, hence normal, so iterating the operator itself converges
    /// to the spectral radius. Diagnostic only — stability analyses compare `‖W⁽²⁾‖·h`
    /// against the uniform bounds of the scheme derivation, but nothing in the propagators
    /// depends on this value.
    pub fn norm_estimate(&self, engine: &mut FftEngine, iters: usize) -> Result<f64> {
        let grid = &self.grid;
        let len = grid.b - grid.a;
        let mut v = WaveFunction::from_fn(grid, |x| {
            let t = 2.0 * std::f64::consts::PI * (x - grid.a) / len;
            Complex64::new(1.0 + 0.5 * t.cos(), 0.25 * t.sin())
        });
        v.normalize();
        let mut estimate = 0.0;
        for _ in 0..iters.max(1) {
            let w = self.apply(engine, &v)?;
            estimate = w.norm_l2();
            if estimate == 0.0 {
                return Ok(0.0);
            }
            v = w;
            v.normalize();
        }
        Ok(estimate)
    }
}

/// Largest spectral magnitude of `data` outside the band `|mode| ≤ n/4`, relative to the
/// largest overall. Returns 0 for identically zero data.
fn relative_tail(engine: &mut FftEngine, data: &[Complex64]) -> f64 {
    let n = engine.grid().n_points;
    let cutoff = n / 4;
    let mut buf = data.to_vec();
    engine.forward(&mut buf);
    let mut max_all = 0.0f64;
    let mut max_tail = 0.0f64;
    for (m, z) in buf.iter().enumerate() {
        let m_signed = if m < n / 2 { m as i64 } else { m as i64 - n as i64 };
        let mag = z.norm();
        max_all = max_all.max(mag);
        if m_signed.unsigned_abs() as usize > cutoff {
            max_tail = max_tail.max(mag);
        }
    }
    if max_all == 0.0 {
        0.0
    } else {
        max_tail / max_all
    }
}

/// Raw symmetrized block `⟨f⟩ₖu = ½(f⊙Kₖu + Kₖ(f⊙u))`, without the `i^(k+1)` prefactor.
fn angle_block(engine: &mut FftEngine, f: &[f64], k: usize, u: &WaveFunction) -> Result<WaveFunction> {
    let du = engine.apply_derivative(u, k)?;
    let fu = WaveFunction::new(
        Arc::clone(&u.grid),
        u.values.iter().zip(f).map(|(z, &w)| z * w).collect(),
    )?;
    let dfu = engine.apply_derivative(&fu, k)?;
    let values = (0..u.values.len())
        .map(|j| 0.5 * (f[j] * du.values[j] + dfu.values[j]))
        .collect();
    WaveFunction::new(Arc::clone(&u.grid), values)
}

fn lincomb(a: f64, u: &WaveFunction, b: f64, v: &WaveFunction) -> WaveFunction {
    let values = u
        .values
        .iter()
        .zip(&v.values)
        .map(|(x, y)| a * x + b * y)
        .collect();
    WaveFunction { values, grid: Arc::clone(&u.grid) }
}

/// Verifies the four commutator identities behind the fourth-order correction exponent,
/// returning the relative L² errors in order:
///
/// 1. `[⟨μ₀₀⟩₀, ⟨1⟩₂] = −2·⟨∂ₓμ₀₀⟩₁`
/// 2. `[[⟨μ₀₀⟩₀, ⟨1⟩₂], ⟨1⟩₂] = 4·⟨∂ₓ²μ₀₀⟩₂ − ⟨∂ₓ⁴μ₀₀⟩₀`
/// 3. `[⟨∂ₓμ₁₁⟩₁, ⟨1⟩₂] = −2·⟨∂ₓ²μ₁₁⟩₂ + ½·⟨∂ₓ⁴μ₁₁⟩₀`
/// 4. `[[⟨μ₀₀⟩₀, ⟨1⟩₂], ⟨μ₀₀⟩₀] = −2·⟨(∂ₓμ₀₀)²⟩₀`
///
/// Both sides are applied to the supplied test state `u`; spatial derivatives of the
/// moment functions are taken spectrally. The identities are exact for the continuous
/// operators, and they survive discretization only while every product stays below the
/// Nyquist frequency, so all inputs must be band-limited to `|mode| ≤ n/4`; inputs with a
/// larger relative spectral tail than `1e−10` are rejected with
/// [`MagsplitError::BandLimit`].
pub fn verify_commutator_identities(
    engine: &mut FftEngine,
    mu00: &[f64],
    mu11: &[f64],
    u: &WaveFunction,
) -> Result<[f64; 4]> {
    let grid = Arc::clone(engine.grid());
    let n = grid.n_points;
    if mu00.len() != n || mu11.len() != n || u.values.len() != n {
        return Err(MagsplitError::GridMismatch(
            "moment samples and state must match the engine grid".into(),
        ));
    }
    let cutoff = n / 4;
    for data in [mu00, mu11] {
        let z: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let tail = relative_tail(engine, &z);
        if tail > 1e-10 {
            return Err(MagsplitError::BandLimit { tail, cutoff });
        }
    }
    let tail = relative_tail(engine, &u.values);
    if tail > 1e-10 {
        return Err(MagsplitError::BandLimit { tail, cutoff });
    }

    let real = |w: &WaveFunction| -> Vec<f64> { w.values.iter().map(|z| z.re).collect() };
    let wrap = |data: &[f64]| -> WaveFunction {
        WaveFunction {
            values: data.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            grid: Arc::clone(&grid),
        }
    };
    let mu00_w = wrap(mu00);
    let dx_mu00 = real(&engine.apply_derivative(&mu00_w, 1)?);
    let dxx_mu00 = real(&engine.apply_derivative(&mu00_w, 2)?);
    let dx4_mu00 = real(&engine.apply_derivative(&mu00_w, 4)?);
    let mu11_w = wrap(mu11);
    let dx_mu11 = real(&engine.apply_derivative(&mu11_w, 1)?);
    let dxx_mu11 = real(&engine.apply_derivative(&mu11_w, 2)?);
    let dx4_mu11 = real(&engine.apply_derivative(&mu11_w, 4)?);

    let mul = |f: &[f64], w: &WaveFunction| -> WaveFunction {
        WaveFunction {
            values: w.values.iter().zip(f).map(|(z, &v)| z * v).collect(),
            grid: Arc::clone(&grid),
        }
    };

    // C·v = [⟨μ₀₀⟩₀, ⟨1⟩₂]·v = μ₀₀⊙(∂ₓ²v) − ∂ₓ²(μ₀₀⊙v).
    let commutator_c = |engine: &mut FftEngine, v: &WaveFunction| -> Result<WaveFunction> {
        let d2v = engine.apply_derivative(v, 2)?;
        let d2mv = engine.apply_derivative(&mul(mu00, v), 2)?;
        Ok(lincomb(1.0, &mul(mu00, &d2v), -1.0, &d2mv))
    };

    let rel = |lhs: &WaveFunction, rhs: &WaveFunction| -> f64 {
        lhs.l2_distance(rhs) / rhs.norm_l2().max(1e-30)
    };

    // (1)
    let lhs1 = commutator_c(engine, u)?;
    let rhs1_block = angle_block(engine, &dx_mu00, 1, u)?;
    let rhs1 = lincomb(-2.0, &rhs1_block, 0.0, u);
    let e1 = rel(&lhs1, &rhs1);

    // (2)
    let bu = engine.apply_derivative(u, 2)?;
    let cbu = commutator_c(engine, &bu)?;
    let cu = commutator_c(engine, u)?;
    let bcu = engine.apply_derivative(&cu, 2)?;
    let lhs2 = lincomb(1.0, &cbu, -1.0, &bcu);
    let rhs2 = lincomb(
        4.0,
        &angle_block(engine, &dxx_mu00, 2, u)?,
        -1.0,
        &mul(&dx4_mu00, u),
    );
    let e2 = rel(&lhs2, &rhs2);

    // (3)
    let a3u = angle_block(engine, &dx_mu11, 1, u)?;
    let a3bu = angle_block(engine, &dx_mu11, 1, &bu)?;
    let ba3u = engine.apply_derivative(&a3u, 2)?;
    let lhs3 = lincomb(1.0, &a3bu, -1.0, &ba3u);
    let rhs3 = lincomb(
        -2.0,
        &angle_block(engine, &dxx_mu11, 2, u)?,
        0.5,
        &mul(&dx4_mu11, u),
    );
    let e3 = rel(&lhs3, &rhs3);

    // (4)
    let au = mul(mu00, u);
    let cau = commutator_c(engine, &au)?;
    let acu = mul(mu00, &cu);
    let lhs4 = lincomb(1.0, &cau, -1.0, &acu);
    let grad_sq: Vec<f64> = dx_mu00.iter().map(|g| g * g).collect();
    let rhs4 = lincomb(-2.0, &mul(&grad_sq, u), 0.0, u);
    let e4 = rel(&lhs4, &rhs4);

    Ok([e1, e2, e3, e4])
}
