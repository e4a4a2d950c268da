//! Static potentials, laser pulses, and general time-dependent potentials.
//!
//! The library's main problem class is the *laser* form `V(x,t) = V₀(x) + e(t)·x` with a
//! static potential `V₀` and a scalar pulse `e(t)`. For that class the per-step time
//! integrals reduce to two scalars (see [`crate::moments`]), and the splitting schemes only
//! ever evaluate two spatial functions built here:
//!
//! * the effective potential `Ṽ(x,t,h) = V₀(x) + r(t,h)·x` ([`eval_v_tilde`]), and
//! * its gradient-corrected perturbation `V̂ = Ṽ − (h²/24)·(V₀′(x)+r)²` ([`eval_v_hat`]),
//!   which absorbs the `[[Δ,Ṽ],Ṽ]` commutator of the compact fourth-order splitting.
//!
//! Potentials expose analytic derivatives (first, second, and fourth) rather than spectral
//! differentiation of samples: `V̂` needs `V₀′`, the Magnus–Zassenhaus inner exponent needs
//! `V₀″` and (optionally) `V₀⁗`, and the catalog potentials are polynomial wells whose
//! derivatives at the domain wrap are *not* representable spectrally. A tabulated variant
//! exists for sampled data and documents its spectral-derivative caveat.
//!
//! Sign convention: the Hamiltonian term is `+e(t)·x`. A pulse that physically enters as
//! `−e(t)·x₁` is represented by negating the pulse.

use std::sync::Arc;

use crate::grid::Grid1D;
use crate::{MagsplitError, Result};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type RealFn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A static potential `V₀(x)` with analytic derivatives.
#[derive(Clone)]
pub struct StaticPotential {
    value: RealFn,
    d1: RealFn,
    d2: RealFn,
    d4: RealFn,
    /// Catalog label (used for config selection and output provenance).
    pub label: String,
}

impl std::fmt::Debug for StaticPotential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StaticPotential").field("label", &self.label).finish()
    }
}

impl StaticPotential {
    /// Deep double well `V₀(x) = x⁴ − 15x²`.
    pub fn well1() -> Self {
        StaticPotential {
            value: Arc::new(|x| x.powi(4) - 15.0 * x * x),
            d1: Arc::new(|x| 4.0 * x.powi(3) - 30.0 * x),
            d2: Arc::new(|x| 12.0 * x * x - 30.0),
            d4: Arc::new(|_| 24.0),
            label: "well1".into(),
        }
    }

    /// Shallow double well `V₀(x) = x⁴/5 − 2x²`.
    pub fn well2() -> Self {
        StaticPotential {
            value: Arc::new(|x| x.powi(4) / 5.0 - 2.0 * x * x),
            d1: Arc::new(|x| 0.8 * x.powi(3) - 4.0 * x),
            d2: Arc::new(|x| 2.4 * x * x - 4.0),
            d4: Arc::new(|_| 24.0 / 5.0),
            label: "well2".into(),
        }
    }

    /// Harmonic potential `V₀(x) = x²/2`.
    pub fn harmonic() -> Self {
        StaticPotential {
            value: Arc::new(|x| 0.5 * x * x),
            d1: Arc::new(|x| x),
            d2: Arc::new(|_| 1.0),
            d4: Arc::new(|_| 0.0),
            label: "harmonic".into(),
        }
    }

    /// The zero potential (free particle).
    pub fn zero() -> Self {
        StaticPotential {
            value: Arc::new(|_| 0.0),
            d1: Arc::new(|_| 0.0),
            d2: Arc::new(|_| 0.0),
            d4: Arc::new(|_| 0.0),
            label: "zero".into(),
        }
    }

    /// A custom potential from analytic closures for `V₀`, `V₀′`, `V₀″`, `V₀⁗`.
    pub fn custom(
        label: impl Into<String>,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d4: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        StaticPotential {
            value: Arc::new(value),
            d1: Arc::new(d1),
            d2: Arc::new(d2),
            d4: Arc::new(d4),
            label: label.into(),
        }
    }

    /// A potential from node samples, with derivatives taken spectrally.
    ///
    /// The samples are interpreted as one period of a smooth periodic function; spectral
    /// differentiation of non-periodic data (e.g. a polynomial well sampled on a finite
    /// box) produces wrap-around artifacts, so prefer the analytic constructors for such
    /// potentials. Evaluation off the nodes uses the nearest node (sufficient because all
    /// propagator kernels only ever evaluate on the grid).
    pub fn tabulated(label: impl Into<String>, grid: &Arc<Grid1D>, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.n_points {
            return Err(MagsplitError::GridMismatch(format!(
                "samples length {} vs n_points {}",
                samples.len(),
                grid.n_points
            )));
        }
        let d1s = spectral_derivative(grid, &samples, 1);
        let d2s = spectral_derivative(grid, &samples, 2);
        let d4s = spectral_derivative(grid, &samples, 4);
        let lookup = move |table: Vec<f64>, grid: Arc<Grid1D>| -> RealFn {
            Arc::new(move |x: f64| {
                let l = grid.b - grid.a;
                let pos = (x - grid.a).rem_euclid(l) / grid.dx();
                let j = (pos.round() as usize) % grid.n_points;
                table[j]
            })
        };
        Ok(StaticPotential {
            value: lookup(samples, Arc::clone(grid)),
            d1: lookup(d1s, Arc::clone(grid)),
            d2: lookup(d2s, Arc::clone(grid)),
            d4: lookup(d4s, Arc::clone(grid)),
            label: label.into(),
        })
    }

    /// Selects a catalog potential by label: `well1`, `well2`, `harmonic`, `zero`.
    pub fn from_label(label: &str) -> Result<Self> {
        match label {
            "well1" => Ok(Self::well1()),
            "well2" => Ok(Self::well2()),
            "harmonic" => Ok(Self::harmonic()),
            "zero" => Ok(Self::zero()),
            other => Err(MagsplitError::Config(format!("unknown potential label '{other}'"))),
        }
    }

    /// `V₀(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    /// `V₀′(x)`.
    pub fn grad(&self, x: f64) -> f64 {
        (self.d1)(x)
    }

    /// `V₀″(x)`.
    pub fn d2(&self, x: f64) -> f64 {
        (self.d2)(x)
    }

    /// `V₀⁗(x)`.
    pub fn d4(&self, x: f64) -> f64 {
        (self.d4)(x)
    }

    /// Samples a derivative order (0, 1, 2, or 4) over the grid nodes.
    pub fn sample(&self, grid: &Grid1D, order: usize) -> Result<Vec<f64>> {
        let f: &RealFn = match order {
            0 => &self.value,
            1 => &self.d1,
            2 => &self.d2,
            4 => &self.d4,
            other => {
                return Err(MagsplitError::Config(format!(
                    "static potentials expose derivative orders 0,1,2,4 only (got {other})"
                )))
            }
        };
        Ok(grid.nodes.iter().map(|&x| f(x)).collect())
    }
}

/// Spectral derivative of one period of node samples (local helper for tabulated data;
/// does not touch any transform counter).
fn spectral_derivative(grid: &Grid1D, samples: &[f64], k: usize) -> Vec<f64> {
    use num_complex::Complex64;
    use rustfft::FftPlanner;
    let n = grid.n_points;
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    let symbol = crate::grid::make_symbol(grid, k);
    for (z, c) in buf.iter_mut().zip(&symbol.values) {
        *z *= c;
    }
    inv.process(&mut buf);
    buf.iter().map(|z| z.re / n as f64).collect()
}

/// A scalar laser pulse `e(t)`.
#[derive(Clone)]
pub struct LaserPulse {
    value: RealFn,
    /// Catalog label.
    pub label: String,
    /// False for piecewise profiles whose lobes start/stop discontinuously.
    pub smooth_flag: bool,
    breakpoints: Option<Arc<dyn Fn(f64, f64) -> Vec<f64> + Send + Sync>>,
}

impl std::fmt::Debug for LaserPulse {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LaserPulse")
            .field("label", &self.label)
            .field("smooth_flag", &self.smooth_flag)
            .finish()
    }
}

/// The asymmetric sine-lobe pulse: `sin(25πt)` on `[0.6k, 0.6k+0.04]`,
/// `sin(5πt)` on `(0.6k+0.04, 0.6k+0.24]` for `k = 1,2,…`, and `0` elsewhere.
///
/// The profile is discontinuous at `0.6k+0.04` and `0.6k+0.24` and has a kink at `0.6k`;
/// time steps that straddle those instants degrade every scheme's order, so the
/// propagation driver aligns step boundaries with them.
pub fn pulse_e1(t: f64) -> f64 {
    if t < 0.6 {
        return 0.0;
    }
    let k = (t / 0.6).floor();
    let tau = t - 0.6 * k;
    if tau <= 0.04 {
        (25.0 * std::f64::consts::PI * t).sin()
    } else if tau <= 0.24 {
        (5.0 * std::f64::consts::PI * t).sin()
    } else {
        0.0
    }
}

/// The chirped pulse `e₂(t) = 10·exp(−10(t−1)²)·sin(500(t−1)⁴ + 10)`.
pub fn pulse_e2(t: f64) -> f64 {
    10.0 * (-10.0 * (t - 1.0) * (t - 1.0)).exp() * (500.0 * (t - 1.0).powi(4) + 10.0).sin()
}

impl LaserPulse {
    /// The piecewise sine-lobe pulse ([`pulse_e1`]); not smooth.
    pub fn e1() -> Self {
        LaserPulse {
            value: Arc::new(pulse_e1),
            label: "e1".into(),
            smooth_flag: false,
            breakpoints: Some(Arc::new(|t0, t1| {
                let mut pts = Vec::new();
                let mut k = 1usize;
                loop {
                    let base = 0.6 * k as f64;
                    if base > t1 {
                        break;
                    }
                    for off in [0.0, 0.04, 0.24] {
                        let t = base + off;
                        if t > t0 && t < t1 {
                            pts.push(t);
                        }
                    }
                    k += 1;
                }
                pts
            })),
        }
    }

    /// The chirped pulse ([`pulse_e2`]); smooth.
    pub fn e2() -> Self {
        LaserPulse {
            value: Arc::new(pulse_e2),
            label: "e2".into(),
            smooth_flag: true,
            breakpoints: None,
        }
    }

    /// The zero pulse (laser off).
    pub fn zero() -> Self {
        LaserPulse {
            value: Arc::new(|_| 0.0),
            label: "zero".into(),
            smooth_flag: true,
            breakpoints: None,
        }
    }

    /// A custom smooth pulse from a closure.
    pub fn custom(label: impl Into<String>, smooth_flag: bool, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        LaserPulse {
            value: Arc::new(f),
            label: label.into(),
            smooth_flag,
            breakpoints: None,
        }
    }

    /// Selects a catalog pulse by label: `e1`, `e2`, `zero`.
    pub fn from_label(label: &str) -> Result<Self> {
        match label {
            "e1" => Ok(Self::e1()),
            "e2" => Ok(Self::e2()),
            "zero" => Ok(Self::zero()),
            other => Err(MagsplitError::Config(format!("unknown pulse label '{other}'"))),
        }
    }

    /// `e(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        (self.value)(t)
    }

    /// Non-smooth instants of the pulse strictly inside `(t0, t1)`, ascending.
    ///
    /// Empty for smooth pulses. The propagation driver inserts these as step boundaries.
    pub fn breakpoints_in(&self, t0: f64, t1: f64) -> Vec<f64> {
        match &self.breakpoints {
            Some(f) => {
                let mut pts = f(t0, t1);
                pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
                pts
            }
            None => Vec::new(),
        }
    }
}

/// A general time-dependent potential `V(x,t)` with analytic spatial derivatives.
///
/// Drives the Magnus–Zassenhaus schemes through grid moments when the potential is not of
/// laser form. Spatial derivatives up to order 2 are required; the fourth derivative is
/// optional and enables the O(h³ε) phase correction of the fourth-order inner exponent.
#[derive(Clone)]
pub struct TimeDependentPotential {
    value: RealFn2,
    d1: RealFn2,
    d2: RealFn2,
    d4: Option<RealFn2>,
    /// Descriptive label.
    pub label: String,
}

impl std::fmt::Debug for TimeDependentPotential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TimeDependentPotential").field("label", &self.label).finish()
    }
}

impl TimeDependentPotential {
    /// Wraps a laser-form potential `V₀(x) + e(t)·x` as a general `V(x,t)`.
    pub fn from_laser(v0: &StaticPotential, pulse: &LaserPulse) -> Self {
        let (v, p) = (v0.clone(), pulse.clone());
        let (v1, p1) = (v0.clone(), pulse.clone());
        let v2 = v0.clone();
        let v4 = v0.clone();
        TimeDependentPotential {
            value: Arc::new(move |x, t| v.eval(x) + p.eval(t) * x),
            d1: Arc::new(move |x, t| v1.grad(x) + p1.eval(t)),
            d2: Arc::new(move |x, _| v2.d2(x)),
            d4: Some(Arc::new(move |x, _| v4.d4(x))),
            label: format!("{}+{}·x", v0.label, pulse.label),
        }
    }

    /// A custom potential from closures for `V`, `∂ₓV`, `∂ₓ²V` and optionally `∂ₓ⁴V`.
    pub fn custom(
        label: impl Into<String>,
        value: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        d1: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        d4: Option<RealFn2>,
    ) -> Self {
        TimeDependentPotential {
            value: Arc::new(value),
            d1: Arc::new(d1),
            d2: Arc::new(d2),
            d4,
            label: label.into(),
        }
    }

    /// `V(x,t)`.
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        (self.value)(x, t)
    }

    /// `∂ₓV(x,t)`.
    pub fn dx(&self, x: f64, t: f64) -> f64 {
        (self.d1)(x, t)
    }

    /// `∂ₓ²V(x,t)`.
    pub fn dxx(&self, x: f64, t: f64) -> f64 {
        (self.d2)(x, t)
    }

    /// `∂ₓ⁴V(x,t)` when available.
    pub fn dx4(&self, x: f64, t: f64) -> Option<f64> {
        self.d4.as_ref().map(|f| f(x, t))
    }

    /// Whether a fourth spatial derivative is available.
    pub fn has_dx4(&self) -> bool {
        self.d4.is_some()
    }
}

/// Samples the effective potential `Ṽ(x) = V₀(x) + r·x` over the grid nodes.
pub fn eval_v_tilde(v0: &StaticPotential, r: f64, grid: &Grid1D) -> Vec<f64> {
    grid.nodes.iter().map(|&x| v0.eval(x) + r * x).collect()
}

/// Samples the gradient-corrected potential `V̂(x) = Ṽ(x) − (h²/24)·(V₀′(x)+r)²`.
pub fn eval_v_hat(v0: &StaticPotential, r: f64, h: f64, grid: &Grid1D) -> Vec<f64> {
    let c = h * h / 24.0;
    grid.nodes
        .iter()
        .map(|&x| {
            let g = v0.grad(x) + r;
            v0.eval(x) + r * x - c * g * g
        })
        .collect()
}
