//! Spectral-collocation propagators for the 1-D time-dependent Schrödinger equation
//!
//! This crate solves
//!
//! ```text
//!     i ε ∂u/∂t = [ −ε² ∂²/∂x² + V₀(x) + e(t)·x ] u,     x ∈ [a,b) periodic,
//! ```
//!
//! with a semiclassical parameter `ε ∈ (0,1]`, a static potential `V₀`, and a laser pulse
//! `e(t)` (general time-dependent potentials `V(x,t)` are supported on the Magnus–Zassenhaus
//! path). Space is discretized by Fourier spectral collocation on a uniform periodic grid;
//! time stepping uses exponential splittings of a fourth-order Magnus expansion in which the
//! time dependence enters only through per-step integrals ("moments") of the pulse.
//!
//! Six schemes are provided, all unitary and all built from three kernel types — Fourier-
//! diagonal (circulant) exponentials, pointwise diagonal exponentials, and a small Lanczos
//! exponentiation for one non-commuting exponent:
//!
//! | Scheme    | Order | Structure |
//! |-----------|-------|-----------|
//! | `MZ2`     | 2     | Strang splitting of the midpoint Magnus exponent |
//! | `MZ4`     | 4     | Magnus–Zassenhaus: circulant/diagonal kernels + Lanczos inner exponent |
//! | `MaStBM`  | 4     | Strang-wrapped Blanes–Moan 13-stage splitting |
//! | `MaStBMc` | 4     | same, outer drift fused into the boundary Laplacian kernels |
//! | `MaStCC`  | 4     | Strang-wrapped Chin–Chen compact splitting |
//! | `MaCC`    | 4     | Chin–Chen splitting applied directly to the Magnus exponent |
//!
//! The crate also ships a benchmark harness (`harness` module and the `magsplit` binary)
//! that generates cross-validated reference solutions, sweeps step sizes, fits convergence
//! slopes, and reports wall time and FFT counts per run.
//!
//! # Module map
//!
//! * [`grid`] — periodic grid, differentiation symbols, FFT engine with transform counting,
//!   circulant/diagonal exponential kernels.
//! * [`potentials`] — catalog of static potentials, laser pulses, general `V(x,t)`;
//!   the effective potential `Ṽ` and its gradient-corrected variant `V̂`.
//! * [`moments`] — Gauss–Legendre rules and the per-step Magnus integrals
//!   `r`, `s`, `μ₀₀`, `μ₁₁` with their spatial derivatives.
//! * [`symop`] — symmetrized differential operators `⟨f⟩ₖ = ½(f∘∂ₓᵏ + ∂ₓᵏ∘f)`,
//!   FFT-economical application, dense materialization, commutator-identity checks.
//! * [`lanczos`] — Krylov approximation of `exp(iH)v` for Hermitian `H`.
//! * [`schemes`] — the six one-step propagators.
//! * [`harness`] — experiment configs, propagation driver, reference generation,
//!   h-sweeps, CSV/JSON output.

pub mod grid;
pub mod harness;
pub mod lanczos;
pub mod moments;
pub mod potentials;
pub mod schemes;
pub mod symop;

use thiserror::Error;

/// Unified error type for the crate.
#[derive(Debug, Error)]
pub enum MagsplitError {
    /// Two objects that must share a grid (same endpoints and point count) do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    /// A guard against accidentally large dense work was violated.
    #[error("dense-size guard: n_points = {n} exceeds limit {limit}")]
    SizeGuard { n: usize, limit: usize },
    /// Input to an identity check carries spectral content above the aliasing guard.
    #[error("band-limit precondition violated: relative tail mass {tail:.3e} above mode {cutoff}")]
    BandLimit { tail: f64, cutoff: usize },
    /// A numerical kernel produced non-finite values.
    #[error("non-finite values encountered in {0}")]
    NonFinite(&'static str),
    /// Invalid configuration or parameters.
    #[error("config error: {0}")]
    Config(String),
    /// The two independent reference runs disagree beyond the acceptance gate.
    #[error("reference cross-validation failed: |Δ|₂ = {diff:.3e} exceeds gate {gate:.3e}")]
    CrossValidation { diff: f64, gate: f64 },
    /// A Lanczos inner exponential hit its iteration cap without meeting its tolerance
    /// during propagation.
    #[error("Krylov exponential failed to converge at step {step} (t = {t:.6}): estimate {estimate:.3e} > tol {tol:.3e}; raise lanczos_max_iters or relax lanczos_tol")]
    KrylovFailure { step: usize, t: f64, estimate: f64, tol: f64 },
    /// I/O failure while reading configs or writing results.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// Malformed JSON in a config file.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, MagsplitError>;

pub use grid::{FftEngine, Grid1D, Symbol, WaveFunction};
pub use harness::{
    build_initial_state, build_schedule, energy, fit_slope_tail, make_reference, propagate,
    propagate_recording, self_check, sweep, ExperimentConfig, PropagationOutcome,
    ReferenceSolution, RunRecord, SlopeFit, SweepResult, CROSS_VALIDATION_GATE,
};
pub use lanczos::{expm_krylov, expm_tridiag, KrylovConfig, KrylovInfo};
pub use moments::{gauss_legendre, grid_moments, scalar_moments, GridMoments, QuadratureRule, ScalarMoments};
pub use potentials::{LaserPulse, StaticPotential, TimeDependentPotential};
pub use schemes::{SchemeId, SchemeSpec, Stepper};
pub use symop::{verify_commutator_identities, SymOpSum};
