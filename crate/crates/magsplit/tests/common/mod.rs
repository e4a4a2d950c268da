//! Shared helpers for the integration tests: an independent spectral toolbox built
//! directly on `rustfft`/`nalgebra` (no code shared with the library under test beyond
//! the FFT backend), plus single-step implementations of the three classic
//! time-independent splittings the laser schemes must reduce to when the pulse is off.
//!
//! Conventions match the library's documented ones: uniform periodic grid `x_j = a + j·Δx`
//! on `[a,b)`, wavenumbers in FFT order, and odd-order derivative symbols with a zeroed
//! Nyquist mode.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Blanes–Moan coefficients (13-stage, order 4), transcribed independently.
pub const BM_A1: f64 = 0.0792036964311957;
pub const BM_A2: f64 = 0.353172906049774;
pub const BM_A3: f64 = -0.0420650803577195;
pub const BM_B1: f64 = 0.209515106613362;
pub const BM_B2: f64 = -0.143851773179818;

/// Independent spectral toolbox on a periodic grid.
pub struct SpectralBox {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub eps: f64,
    pub x: Vec<f64>,
    pub kap: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl SpectralBox {
    pub fn new(a: f64, b: f64, n: usize, eps: f64) -> Self {
        let mut planner = FftPlanner::new();
        let dx = (b - a) / n as f64;
        let x: Vec<f64> = (0..n).map(|j| a + j as f64 * dx).collect();
        let l = b - a;
        let kap: Vec<f64> = (0..n)
            .map(|m| {
                let mm = if m <= n / 2 { m as isize } else { m as isize - n as isize };
                2.0 * PI * mm as f64 / l
            })
            .collect();
        SpectralBox {
            n,
            a,
            b,
            eps,
            x,
            kap,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn fft(&self, u: &[Complex64]) -> Vec<Complex64> {
        let mut buf = u.to_vec();
        self.fwd.process(&mut buf);
        buf
    }

    pub fn ifft(&self, uh: &[Complex64]) -> Vec<Complex64> {
        let mut buf = uh.to_vec();
        self.inv.process(&mut buf);
        let s = 1.0 / self.n as f64;
        for z in &mut buf {
            *z *= s;
        }
        buf
    }

    /// Multiplies in Fourier space by `mult[m]` (one forward + one inverse transform).
    pub fn fourier_multiply(&self, mult: &[Complex64], u: &[Complex64]) -> Vec<Complex64> {
        let mut uh = self.fft(u);
        for (z, m) in uh.iter_mut().zip(mult) {
            *z *= m;
        }
        self.ifft(&uh)
    }

    /// The free-flight multiplier `exp(i·γ·h·ε·c₂)`, `c₂ = −κ²`.
    pub fn kinetic_multiplier(&self, gamma: f64, h: f64) -> Vec<Complex64> {
        self.kap
            .iter()
            .map(|&k| Complex64::new(0.0, -gamma * h * self.eps * k * k).exp())
            .collect()
    }

    /// `(iκ)^k` in FFT order, Nyquist zeroed for odd `k`.
    pub fn symbol(&self, k: usize) -> Vec<Complex64> {
        self.kap
            .iter()
            .enumerate()
            .map(|(m, &kp)| {
                if k % 2 == 1 && m == self.n / 2 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, kp).powu(k as u32)
                }
            })
            .collect()
    }

    /// Dense matrix of the k-th spectral derivative, built column-by-column from unit
    /// vectors (independent of any library materialization).
    pub fn dense_derivative(&self, k: usize) -> DMatrix<Complex64> {
        let n = self.n;
        let sym = self.symbol(k);
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for col in 0..n {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[col] = Complex64::new(1.0, 0.0);
            let de = self.fourier_multiply(&sym, &e);
            for row in 0..n {
                m[(row, col)] = de[row];
            }
        }
        m
    }

    /// Dense symmetrized block `½(diag(f)·Dₖ + Dₖ·diag(f))`.
    pub fn dense_sym_block(&self, f: &[f64], k: usize) -> DMatrix<Complex64> {
        let dk = self.dense_derivative(k);
        let n = self.n;
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                m[(r, c)] = 0.5 * (f[r] + f[c]) * dk[(r, c)];
            }
        }
        m
    }

    /// `exp(i·H)` for a Hermitian dense matrix, via eigendecomposition.
    pub fn expm_i_hermitian(&self, h_mat: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let eig = nalgebra::SymmetricEigen::new(h_mat.clone());
        let n = h_mat.nrows();
        let mut phases = DMatrix::<Complex64>::zeros(n, n);
        for j in 0..n {
            phases[(j, j)] = Complex64::new(0.0, eig.eigenvalues[j]).exp();
        }
        &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
    }

    // ------------------------------------------------------------- static one-steps

    /// Strang splitting for time-independent `V`:
    /// `exp(½ihεΔ) · exp(−ihV/ε) · exp(½ihεΔ)`.
    pub fn static_strang_step(&self, u: &[Complex64], v: &[f64], h: f64) -> Vec<Complex64> {
        let k = self.kinetic_multiplier(0.5, h);
        let u1 = self.fourier_multiply(&k, u);
        let u2: Vec<Complex64> = u1
            .iter()
            .zip(v)
            .map(|(z, &vv)| z * Complex64::new(0.0, -h / self.eps * vv).exp())
            .collect();
        self.fourier_multiply(&k, &u2)
    }

    /// Chin–Chen compact fourth-order splitting for time-independent `V`
    /// (gradient-corrected midpoint potential `V − (h²/24)(V′)²`):
    /// `e^{−ihV/6ε} · e^{½ihεΔ} · e^{−2ih(V−h²(V′)²/24)/3ε} · e^{½ihεΔ} · e^{−ihV/6ε}`.
    pub fn static_cc_step(&self, u: &[Complex64], v: &[f64], vp: &[f64], h: f64) -> Vec<Complex64> {
        let eps = self.eps;
        let k = self.kinetic_multiplier(0.5, h);
        let d6: Vec<Complex64> = v
            .iter()
            .map(|&vv| Complex64::new(0.0, -h / (6.0 * eps) * vv).exp())
            .collect();
        let d23: Vec<Complex64> = v
            .iter()
            .zip(vp)
            .map(|(&vv, &g)| {
                Complex64::new(0.0, -2.0 * h / (3.0 * eps) * (vv - h * h / 24.0 * g * g)).exp()
            })
            .collect();
        let mut w: Vec<Complex64> = u.iter().zip(&d6).map(|(z, p)| z * p).collect();
        w = self.fourier_multiply(&k, &w);
        for (z, p) in w.iter_mut().zip(&d23) {
            *z *= p;
        }
        w = self.fourier_multiply(&k, &w);
        for (z, p) in w.iter_mut().zip(&d6) {
            *z *= p;
        }
        w
    }

    /// Blanes–Moan 13-stage fourth-order splitting for time-independent `V`.
    pub fn static_bm_step(&self, u: &[Complex64], v: &[f64], h: f64) -> Vec<Complex64> {
        let eps = self.eps;
        let a4 = 1.0 - 2.0 * (BM_A1 + BM_A2 + BM_A3);
        let b3 = 0.5 - BM_B1 - BM_B2;
        let a = [BM_A1, BM_A2, BM_A3, a4];
        let b = [BM_B1, BM_B2, b3];
        let seq: [(bool, usize); 13] = [
            (true, 0),
            (false, 0),
            (true, 1),
            (false, 1),
            (true, 2),
            (false, 2),
            (true, 3),
            (false, 2),
            (true, 2),
            (false, 1),
            (true, 1),
            (false, 0),
            (true, 0),
        ];
        let mut w = u.to_vec();
        for &(kin, idx) in &seq {
            if kin {
                let mult = self.kinetic_multiplier(a[idx], h);
                w = self.fourier_multiply(&mult, &w);
            } else {
                for (z, &vv) in w.iter_mut().zip(v) {
                    *z *= Complex64::new(0.0, -b[idx] * h / eps * vv).exp();
                }
            }
        }
        w
    }

    /// Symmetric Zassenhaus fourth-order splitting for time-independent `V`:
    /// `K(½) · e^{−ihV/2ε} · e^{W} · e^{−ihV/2ε} · K(½)` with the non-commuting exponent
    ///
    /// `W = i(h³/6ε)(V′)² + i(h³ε/6)·½(V″∘∂ₓ² + ∂ₓ²∘V″) − i(h³ε/24)V⁗`
    ///
    /// (the last term optional, matching the keep/drop switch of the scheme under test)
    /// applied exactly through a dense Hermitian eigendecomposition.
    pub fn static_zassenhaus_step(
        &self,
        u: &[Complex64],
        v: &[f64],
        vp: &[f64],
        vpp: &[f64],
        vpppp: &[f64],
        h: f64,
        keep_fourth_derivative: bool,
    ) -> Vec<Complex64> {
        let eps = self.eps;
        let n = self.n;
        let f0: Vec<f64> = vp
            .iter()
            .zip(vpppp)
            .map(|(&g, &g4)| {
                let mut t = h * h * h / (6.0 * eps) * g * g;
                if keep_fourth_derivative {
                    t -= h * h * h * eps / 24.0 * g4;
                }
                t
            })
            .collect();
        let f2: Vec<f64> = vpp.iter().map(|&g| h * h * h * eps / 6.0 * g).collect();
        // H = −iW is Hermitian: H = diag(f0) + ½(diag(f2)·D₂ + D₂·diag(f2)).
        let mut h_mat = self.dense_sym_block(&f2, 2);
        for j in 0..n {
            h_mat[(j, j)] += Complex64::new(f0[j], 0.0);
        }
        let expw = self.expm_i_hermitian(&h_mat);
        let k = self.kinetic_multiplier(0.5, h);
        let dh: Vec<Complex64> = v
            .iter()
            .map(|&vv| Complex64::new(0.0, -0.5 * h / eps * vv).exp())
            .collect();
        let mut w = self.fourier_multiply(&k, u);
        for (z, p) in w.iter_mut().zip(&dh) {
            *z *= p;
        }
        let wv = nalgebra::DVector::from_column_slice(&w);
        let wv = &expw * wv;
        let mut w: Vec<Complex64> = wv.iter().cloned().collect();
        for (z, p) in w.iter_mut().zip(&dh) {
            *z *= p;
        }
        self.fourier_multiply(&k, &w)
    }
}

/// Discrete L² distance `sqrt(Δx·Σ|a−b|²)` between two coefficient vectors.
pub fn l2_dist(a: &[Complex64], b: &[Complex64], dx: f64) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>() * dx).sqrt()
}

/// Discrete L² norm.
pub fn l2_norm(a: &[Complex64], dx: f64) -> f64 {
    (a.iter().map(|x| x.norm_sqr()).sum::<f64>() * dx).sqrt()
}

/// Ordinary least-squares slope of `ln(err)` against `ln(h)` over ALL supplied points.
pub fn lsq_slope(hs: &[f64], errs: &[f64]) -> f64 {
    assert_eq!(hs.len(), errs.len());
    let m = hs.len() as f64;
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    (m * sxy - sx * sy) / (m * sxx - sx * sx)
}
