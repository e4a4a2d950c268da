//! Time-averaged moments of the potential over one step, and the quadrature behind them.
//!
//! A step from `t₀` to `t₀+h` sees the potential only through its first two Legendre
//! moments in time:
//!
//! * `μ₀₀(x) = ∫₀ʰ V(x, t₀+ζ) dζ` — the averaged potential, and
//! * `μ₁₁(x) = ∫₀ʰ (ζ − h/2)·V(x, t₀+ζ) dζ` — the centered first moment, which enters the
//!   fourth-order schemes through its spatial gradient.
//!
//! For the laser form `V = V₀(x) + e(t)·x` both reduce to scalar integrals of the pulse:
//! with `r = (1/h)∫₀ʰ e` and `s = 2∫₀ʰ (ζ−h/2)·e`, one has `μ₀₀ = h·(V₀ + r·x)` and
//! `μ₁₁ = (s/2)·x`. The schemes consume [`ScalarMoments`] on that fast path and full
//! [`GridMoments`] otherwise.
//!
//! All integrals use Gauss–Legendre quadrature on the unit interval. The rules are exact
//! for the polynomial pulse pieces used in testing and converge spectrally for smooth
//! pulses; a step that straddles a pulse discontinuity is the caller's responsibility
//! (the propagation driver aligns steps with pulse breakpoints).

use crate::grid::Grid1D;
use crate::potentials::{LaserPulse, StaticPotential, TimeDependentPotential};
use crate::{MagsplitError, Result};

/// A quadrature rule on `[0,1]`: `∫₀¹ f ≈ Σᵢ wᵢ·f(kᵢ)`, knots ascending, `Σᵢ wᵢ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub n_knots: usize,
    pub knots: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss–Legendre rule with `n` knots on `[0,1]` (exact for degree `2n−1`), `1 ≤ n ≤ 32`.
///
/// Knots are the roots of the Legendre polynomial `Pₙ` mapped from `[−1,1]`, found by
/// Newton iteration from the Chebyshev-like initial guesses; weights follow from the
/// derivative values. Symmetry about `1/2` is enforced exactly by mirroring the lower
/// half, which lets centered-moment sums cancel to exactly zero for time-independent
/// integrands.
pub fn gauss_legendre(n: usize) -> Result<QuadratureRule> {
    if n == 0 || n > 32 {
        return Err(MagsplitError::Config(format!(
            "gauss_legendre supports 1..=32 knots (got {n})"
        )));
    }
    let mut knots = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    // Roots of P_n on [−1,1]; compute the lower half and mirror.
    let m = n.div_ceil(2);
    for i in 0..m {
        // Initial guess for the i-th root (descending order on [−1,1]).
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P_n'(x) by the three-term recurrence.
            let mut p0 = 1.0f64;
            let mut p1 = x;
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            if n == 1 {
                dp = 1.0;
            }
            let step = p / dp;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Map x∈[−1,1] (descending guess ⇒ upper half) to [0,1] and mirror; `1.0 - hi`
        // is exact for hi∈[1/2,1], so paired knots are reflections of each other exactly.
        let hi = 0.5 * (1.0 + x);
        let lo = 1.0 - hi;
        knots[i] = lo;
        knots[n - 1 - i] = hi;
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    if n == 1 {
        knots[0] = 0.5;
        weights[0] = 1.0;
    }
    if n % 2 == 1 && n > 1 {
        knots[n / 2] = 0.5;
    }
    Ok(QuadratureRule { n_knots: n, knots, weights })
}

/// Scalar pulse moments over the step `[t₀, t₀+h]`.
///
/// `r = (1/h)·∫₀ʰ e(t₀+ζ) dζ` (average field) and `s = 2·∫₀ʰ (ζ−h/2)·e(t₀+ζ) dζ`
/// (centered first moment, so that `μ₁₁ = (s/2)·x` for a laser potential).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMoments {
    pub r: f64,
    pub s: f64,
    pub t0: f64,
    pub h: f64,
}

/// Computes [`ScalarMoments`] of a pulse by quadrature.
///
/// The centered moment is accumulated over mirrored knot pairs so that a constant pulse
/// yields `s = 0` exactly in floating point.
pub fn scalar_moments(pulse: &LaserPulse, t0: f64, h: f64, quad: &QuadratureRule) -> ScalarMoments {
    let n = quad.n_knots;
    let samples: Vec<f64> = quad.knots.iter().map(|&k| pulse.eval(t0 + h * k)).collect();
    let r: f64 = quad.weights.iter().zip(&samples).map(|(w, e)| w * e).sum();
    let mut s = 0.0;
    for i in 0..n / 2 {
        let j = n - 1 - i;
        // knots[j] − 1/2 = −(knots[i] − 1/2) exactly, by construction of the rule.
        let c = quad.knots[j] - 0.5;
        s += quad.weights[i] * c * (samples[j] - samples[i]);
    }
    // A middle knot sits exactly at 1/2 and contributes nothing to the centered moment.
    s *= 2.0 * h * h;
    ScalarMoments { r, s, t0, h }
}

/// Grid moments of a general potential over the step `[t₀, t₀+h]`, sampled on the nodes.
///
/// `dx4_mu00` is present only when the potential provides an analytic fourth spatial
/// derivative; it feeds the optional O(h³ε) phase term of the fourth-order inner exponent.
#[derive(Debug, Clone)]
pub struct GridMoments {
    /// `μ₀₀(xⱼ) = ∫₀ʰ V dζ`.
    pub mu00: Vec<f64>,
    /// `μ₁₁(xⱼ) = ∫₀ʰ (ζ−h/2)·V dζ`.
    pub mu11: Vec<f64>,
    /// `∂ₓμ₀₀(xⱼ)`.
    pub dx_mu00: Vec<f64>,
    /// `∂ₓ²μ₀₀(xⱼ)`.
    pub dxx_mu00: Vec<f64>,
    /// `∂ₓμ₁₁(xⱼ)`.
    pub dx_mu11: Vec<f64>,
    /// `∂ₓ⁴μ₀₀(xⱼ)`, when the potential exposes a fourth derivative.
    pub dx4_mu00: Option<Vec<f64>>,
    pub t0: f64,
    pub h: f64,
}

/// Computes [`GridMoments`] of a general potential by quadrature in time.
///
/// Centered moments (`mu11`, `dx_mu11`) use mirrored knot pairs, so a time-independent
/// potential yields exactly zero.
pub fn grid_moments(
    potential: &TimeDependentPotential,
    grid: &Grid1D,
    t0: f64,
    h: f64,
    quad: &QuadratureRule,
) -> GridMoments {
    let n = grid.n_points;
    let nq = quad.n_knots;
    let mut mu00 = vec![0.0f64; n];
    let mut mu11 = vec![0.0f64; n];
    let mut dx_mu00 = vec![0.0f64; n];
    let mut dxx_mu00 = vec![0.0f64; n];
    let mut dx_mu11 = vec![0.0f64; n];
    let mut dx4_mu00 = if potential.has_dx4() { Some(vec![0.0f64; n]) } else { None };

    // Per-knot samples, kept so the mirrored-pair pass can reuse them.
    let mut v = vec![vec![0.0f64; n]; nq];
    let mut vx = vec![vec![0.0f64; n]; nq];
    for (q, &k) in quad.knots.iter().enumerate() {
        let t = t0 + h * k;
        let w = quad.weights[q];
        for (j, &x) in grid.nodes.iter().enumerate() {
            let val = potential.eval(x, t);
            let d1 = potential.dx(x, t);
            v[q][j] = val;
            vx[q][j] = d1;
            mu00[j] += w * val;
            dx_mu00[j] += w * d1;
            dxx_mu00[j] += w * potential.dxx(x, t);
            if let Some(acc) = dx4_mu00.as_mut() {
                acc[j] += w * potential.dx4(x, t).unwrap_or(0.0);
            }
        }
    }
    for acc in [&mut mu00, &mut dx_mu00, &mut dxx_mu00] {
        for a in acc.iter_mut() {
            *a *= h;
        }
    }
    if let Some(acc) = dx4_mu00.as_mut() {
        for a in acc.iter_mut() {
            *a *= h;
        }
    }
    for i in 0..nq / 2 {
        let q = nq - 1 - i;
        let c = quad.knots[q] - 0.5;
        let w = quad.weights[i];
        for j in 0..n {
            mu11[j] += w * c * (v[q][j] - v[i][j]);
            dx_mu11[j] += w * c * (vx[q][j] - vx[i][j]);
        }
    }
    for j in 0..n {
        mu11[j] *= h * h;
        dx_mu11[j] *= h * h;
    }
    GridMoments { mu00, mu11, dx_mu00, dxx_mu00, dx_mu11, dx4_mu00, t0, h }
}

/// Builds the laser-form [`GridMoments`] directly from [`ScalarMoments`]:
/// `μ₀₀ = h·(V₀ + r·x)`, `μ₁₁ = (s/2)·x`, `∂ₓμ₀₀ = h·(V₀′ + r)`, `∂ₓ²μ₀₀ = h·V₀″`,
/// `∂ₓμ₁₁ = s/2`, `∂ₓ⁴μ₀₀ = h·V₀⁗`.
pub fn grid_moments_from_laser(v0: &StaticPotential, sm: &ScalarMoments, grid: &Grid1D) -> GridMoments {
    let h = sm.h;
    let mu00 = grid.nodes.iter().map(|&x| h * (v0.eval(x) + sm.r * x)).collect();
    let mu11 = grid.nodes.iter().map(|&x| 0.5 * sm.s * x).collect();
    let dx_mu00 = grid.nodes.iter().map(|&x| h * (v0.grad(x) + sm.r)).collect();
    let dxx_mu00 = grid.nodes.iter().map(|&x| h * v0.d2(x)).collect();
    let dx_mu11 = vec![0.5 * sm.s; grid.n_points];
    let dx4_mu00 = Some(grid.nodes.iter().map(|&x| h * v0.d4(x)).collect());
    GridMoments { mu00, mu11, dx_mu00, dxx_mu00, dx_mu11, dx4_mu00, t0: sm.t0, h }
}
