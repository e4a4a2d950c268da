//! Periodic spectral-collocation grid and Fourier kernels.
//!
//! The spatial discretization lives on the uniform periodic grid
//! `xⱼ = a + j·(b−a)/n`, `j = 0..n−1`, with the right endpoint identified with the left.
//! Differential operators become circulant matrices `Kₖ = F⁻¹ D_{cₖ} F`, where `F` is the
//! discrete Fourier transform and the diagonal `cₖ` — the *symbol* of the k-th derivative —
//! holds `(i·κₘ)ᵏ` over the FFT-ordered wavenumbers `κₘ = 2πm/(b−a)`,
//! `m = 0,…,n/2−1, −n/2,…,−1`.
//!
//! Two exponential kernels cover every splitting stage that is not handled by Lanczos:
//! [`FftEngine::exp_circulant`] applies `F⁻¹ D_{exp(v)} F` for an arbitrary per-mode
//! exponent vector `v` (Laplacian kernels `½ihε·c₂`, fused drift kernels
//! `ihεa₁·c₂ − ½s·c₁`, …), and [`FftEngine::exp_diagonal`] applies a pointwise unitary
//! phase `e^{i·φ(x)}` (potential kernels).
//!
//! For odd derivative orders the Nyquist entry of the symbol is set to zero. The Nyquist
//! mode carries no sign information for an odd derivative on a real grid; zeroing it keeps
//! odd-order operators skew-Hermitian after discretization, which in turn keeps the drift
//! exponential `exp(−½s·∂ₓ)` exactly unitary.
//!
//! Every forward or inverse transform performed through an [`FftEngine`] increments its
//! transform counter by one; the per-step FFT budgets of the propagation schemes are part
//! of the public contract and are asserted in tests, so all Fourier work must go through
//! an engine.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::{MagsplitError, Result};

/// Uniform periodic grid on `[a, b)` with precomputed nodes and FFT-ordered wavenumbers.
#[derive(Debug, Clone)]
pub struct Grid1D {
    /// Left endpoint.
    pub a: f64,
    /// Right endpoint (identified with `a` by periodicity; not itself a node).
    pub b: f64,
    /// Number of collocation points; even, ≥ 4.
    pub n_points: usize,
    /// Collocation nodes `xⱼ = a + j·(b−a)/n`.
    pub nodes: Vec<f64>,
    /// FFT-ordered wavenumbers `2πm/(b−a)`, `m = 0,…,n/2−1, −n/2,…,−1`.
    pub wavenumbers: Vec<f64>,
}

impl Grid1D {
    /// Builds a grid on `[a, b)` with `n_points` nodes.
    ///
    /// `n_points` must be even and at least 4 (the Nyquist policy for odd-order symbols
    /// assumes a unique Nyquist mode), and `b > a`.
    pub fn new(a: f64, b: f64, n_points: usize) -> Result<Arc<Self>> {
        if !a.is_finite() || !b.is_finite() || b <= a {
            return Err(MagsplitError::Config(format!(
                "invalid domain [{a}, {b}): need finite b > a"
            )));
        }
        if n_points < 4 || !n_points.is_multiple_of(2) {
            return Err(MagsplitError::Config(format!(
                "n_points = {n_points}: must be even and ≥ 4"
            )));
        }
        let n = n_points;
        let dx = (b - a) / n as f64;
        let nodes = (0..n).map(|j| a + j as f64 * dx).collect();
        let two_pi_over_l = 2.0 * std::f64::consts::PI / (b - a);
        let wavenumbers = (0..n)
            .map(|m| {
                let m_signed = if m < n / 2 { m as i64 } else { m as i64 - n as i64 };
                two_pi_over_l * m_signed as f64
            })
            .collect();
        Ok(Arc::new(Grid1D { a, b, n_points, nodes, wavenumbers }))
    }

    /// Grid spacing `Δx = (b−a)/n`.
    pub fn dx(&self) -> f64 {
        (self.b - self.a) / self.n_points as f64
    }

    /// Structural equality: same endpoints and point count.
    pub fn same_as(&self, other: &Grid1D) -> bool {
        self.a == other.a && self.b == other.b && self.n_points == other.n_points
    }
}

/// The Fourier symbol `cₖ` of the k-th spectral differentiation matrix.
#[derive(Debug, Clone)]
pub struct Symbol {
    /// Derivative order `k ≥ 0`.
    pub order: usize,
    /// `cₖ[m] = (i·κₘ)ᵏ` in FFT order; for odd `k` the Nyquist entry is zeroed.
    pub values: Vec<Complex64>,
}

/// Builds the symbol of the k-th derivative on `grid`.
///
/// `values[m] = (i·κₘ)ᵏ`; for odd `k` the Nyquist entry (`m = −n/2`) is set to zero so the
/// discretized operator stays skew-Hermitian (see the module docs). `k = 0` yields the
/// identity symbol.
pub fn make_symbol(grid: &Grid1D, k: usize) -> Symbol {
    let n = grid.n_points;
    let values = grid
        .wavenumbers
        .iter()
        .enumerate()
        .map(|(m, &kappa)| {
            if k % 2 == 1 && m == n / 2 {
                Complex64::new(0.0, 0.0)
            } else {
                (Complex64::new(0.0, kappa)).powu(k as u32)
            }
        })
        .collect();
    Symbol { order: k, values }
}

/// Complex state vector sampled on a [`Grid1D`].
#[derive(Debug, Clone)]
pub struct WaveFunction {
    /// Node samples `u(xⱼ)`.
    pub values: Vec<Complex64>,
    /// The grid the samples live on.
    pub grid: Arc<Grid1D>,
}

impl WaveFunction {
    /// Wraps node samples; the length must match the grid.
    pub fn new(grid: Arc<Grid1D>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(MagsplitError::GridMismatch(format!(
                "state length {} vs n_points {}",
                values.len(),
                grid.n_points
            )));
        }
        Ok(WaveFunction { values, grid })
    }

    /// Samples a closure over the nodes.
    pub fn from_fn(grid: &Arc<Grid1D>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes.iter().map(|&x| f(x)).collect();
        WaveFunction { values, grid: Arc::clone(grid) }
    }

    /// Discrete L² norm `sqrt(Δx·Σ|uⱼ|²)`.
    pub fn norm_l2(&self) -> f64 {
        let dx = self.grid.dx();
        (dx * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Discrete L² inner product `Δx·Σ conj(uⱼ)·vⱼ`.
    pub fn inner(&self, other: &WaveFunction) -> Complex64 {
        let dx = self.grid.dx();
        self.values
            .iter()
            .zip(&other.values)
            .map(|(u, v)| u.conj() * v)
            .sum::<Complex64>()
            * dx
    }

    /// Discrete L² distance to another state on the same grid.
    pub fn l2_distance(&self, other: &WaveFunction) -> f64 {
        let dx = self.grid.dx();
        (dx * self
            .values
            .iter()
            .zip(&other.values)
            .map(|(u, v)| (u - v).norm_sqr())
            .sum::<f64>())
        .sqrt()
    }

    /// Rescales to unit discrete L² norm.
    pub fn normalize(&mut self) {
        let n = self.norm_l2();
        if n > 0.0 {
            let inv = 1.0 / n;
            for z in &mut self.values {
                *z *= inv;
            }
        }
    }
}

/// FFT workspace bound to one grid size, with cached plans and a transform counter.
///
/// The counter increments by one per forward or inverse transform. Kernels built on top
/// have fixed budgets: [`FftEngine::apply_derivative`] and [`FftEngine::exp_circulant`]
/// perform exactly 2 transforms each; [`FftEngine::exp_diagonal`] performs none.
///
/// An engine is single-threaded state; concurrent trajectories each own one
/// (plans themselves are cheap to re-derive and `rustfft` plans are internally shareable,
/// but the counter and scratch buffer are per-worker by design).
pub struct FftEngine {
    grid: Arc<Grid1D>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    transforms: u64,
}

impl FftEngine {
    /// Creates an engine (and FFT plans) for the given grid.
    pub fn new(grid: &Arc<Grid1D>) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.n_points);
        let inverse = planner.plan_fft_inverse(grid.n_points);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        FftEngine {
            grid: Arc::clone(grid),
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            transforms: 0,
        }
    }

    /// The grid this engine is planned for.
    pub fn grid(&self) -> &Arc<Grid1D> {
        &self.grid
    }

    /// Total number of single transforms (forward + inverse) performed so far.
    pub fn transforms(&self) -> u64 {
        self.transforms
    }

    /// In-place forward DFT (unnormalized); counts as one transform.
    pub fn forward(&mut self, buf: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, &mut self.scratch);
        self.transforms += 1;
    }

    /// In-place inverse DFT (normalized by 1/n); counts as one transform.
    pub fn inverse(&mut self, buf: &mut [Complex64]) {
        self.inverse.process_with_scratch(buf, &mut self.scratch);
        let scale = 1.0 / buf.len() as f64;
        for z in buf.iter_mut() {
            *z *= scale;
        }
        self.transforms += 1;
    }

    fn check_grid(&self, u: &WaveFunction) -> Result<()> {
        if self.grid.same_as(&u.grid) {
            Ok(())
        } else {
            Err(MagsplitError::GridMismatch(format!(
                "engine on [{}, {}) n={} vs state on [{}, {}) n={}",
                self.grid.a, self.grid.b, self.grid.n_points, u.grid.a, u.grid.b, u.grid.n_points
            )))
        }
    }

    /// Spectral k-th derivative `F⁻¹ D_{cₖ} F u`. Exactly 2 transforms.
    pub fn apply_derivative(&mut self, u: &WaveFunction, k: usize) -> Result<WaveFunction> {
        self.check_grid(u)?;
        let symbol = make_symbol(&self.grid, k);
        let mut buf = u.values.clone();
        self.forward(&mut buf);
        for (z, c) in buf.iter_mut().zip(&symbol.values) {
            *z *= c;
        }
        self.inverse(&mut buf);
        WaveFunction::new(Arc::clone(&self.grid), buf)
    }

    /// Circulant exponential `F⁻¹ D_{exp(v)} F u` for a per-mode exponent vector `v`
    /// (e.g. `½ihε·c₂`, or the fused drift exponent `ihεa₁·c₂ − ½s·c₁`).
    /// Exactly 2 transforms.
    pub fn exp_circulant(&mut self, exponent: &[Complex64], u: &WaveFunction) -> Result<WaveFunction> {
        self.check_grid(u)?;
        if exponent.len() != self.grid.n_points {
            return Err(MagsplitError::GridMismatch(format!(
                "exponent length {} vs n_points {}",
                exponent.len(),
                self.grid.n_points
            )));
        }
        let mut buf = u.values.clone();
        self.forward(&mut buf);
        for (z, v) in buf.iter_mut().zip(exponent) {
            *z *= v.exp();
        }
        self.inverse(&mut buf);
        WaveFunction::new(Arc::clone(&self.grid), buf)
    }

    /// Pointwise unitary phase `output[j] = e^{i·phase[j]}·u[j]`. No transforms.
    pub fn exp_diagonal(&mut self, phase: &[f64], u: &WaveFunction) -> Result<WaveFunction> {
        self.check_grid(u)?;
        if phase.len() != self.grid.n_points {
            return Err(MagsplitError::GridMismatch(format!(
                "phase length {} vs n_points {}",
                phase.len(),
                self.grid.n_points
            )));
        }
        let values = u
            .values
            .iter()
            .zip(phase)
            .map(|(z, &p)| z * Complex64::new(0.0, p).exp())
            .collect();
        WaveFunction::new(Arc::clone(&self.grid), values)
    }
}
