//! Benchmark harness: experiment configuration, initial states, the propagation driver,
//! cross-validated reference solutions, step-size sweeps, and CSV/JSON reporting.
//!
//! The harness is deliberately thin glue over the library: a [`ExperimentConfig`] names a
//! problem (domain, potential, pulse, ε, final time) and a measurement plan (schemes, step
//! sizes, reference resolution); [`sweep`] turns that into error/cost tables with fitted
//! convergence slopes. Reference solutions are never trusted from a single scheme:
//! [`make_reference`] runs two structurally different integrators at the same fine step and
//! rejects the pair if they disagree beyond [`CROSS_VALIDATION_GATE`].

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use crate::grid::{FftEngine, Grid1D, WaveFunction};
use crate::lanczos::KrylovConfig;
use crate::moments::gauss_legendre;
use crate::potentials::{LaserPulse, StaticPotential};
use crate::schemes::{KrylovUsage, SchemeId, SchemeSpec, Stepper};
use crate::{MagsplitError, Result};

/// Largest admissible L² distance between the two independent reference runs.
pub const CROSS_VALIDATION_GATE: f64 = 1e-10;

fn default_lanczos_max_iters() -> usize {
    KrylovConfig::default().max_iters
}
fn default_lanczos_tol() -> f64 {
    KrylovConfig::default().tol
}
fn default_true() -> bool {
    true
}
fn default_reference_scheme() -> String {
    "MaCC".to_string()
}

/// One benchmark experiment, as read from a flat JSON config file.
///
/// Step sizes come either from an explicit `h_values` list or from a geometric ladder
/// `h_start · h_ratio^k, k = 0..h_count` (exactly one of the two forms must be given).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `"example1"`, `"example2"`, or `"custom"` (used for the `--full` variants and
    /// default output naming).
    pub problem: String,
    /// Domain endpoints `[a, b)`, periodic.
    pub domain: [f64; 2],
    /// Grid size (even).
    pub n_points: usize,
    /// Semiclassical parameter.
    pub epsilon: f64,
    /// Final time.
    #[serde(rename = "T")]
    pub t_final: f64,
    /// Static potential label: `well1 | well2 | harmonic | zero`.
    pub potential: String,
    /// Pulse label: `e1 | e2 | zero`.
    pub pulse: String,
    /// Scheme names to benchmark (order is preserved in reports).
    pub schemes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_count: Option<usize>,
    /// Gauss–Legendre knots for the per-step moment integrals (1..=32).
    pub quad_knots: usize,
    #[serde(default = "default_lanczos_max_iters")]
    pub lanczos_max_iters: usize,
    #[serde(default = "default_lanczos_tol")]
    pub lanczos_tol: f64,
    #[serde(default = "default_true")]
    pub lanczos_reorthogonalize: bool,
    /// Scheme used for the reference run (its cross-check partner is chosen
    /// automatically; see [`make_reference`]).
    #[serde(default = "default_reference_scheme")]
    pub reference_scheme: String,
    /// Step size of the reference runs; must satisfy `h_ref ≤ min(h)/20`.
    pub h_ref: f64,
    /// Initial Gaussian center.
    pub x0: f64,
    /// Initial Gaussian width parameter (`δ` in `exp(−(x−x₀)²/2δ)`).
    pub delta: f64,
    /// Output path stem for CSV/JSON reports (defaults to the problem name).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    /// Echoed into reports; reserved for randomized studies.
    #[serde(default)]
    pub seed: u64,
    /// Fuse the outer drift kernels of adjacent steps (outer-shift schemes only).
    #[serde(default)]
    pub fuse_boundary: bool,
    /// Record an energy trace (time, ⟨H⟩) every 100 steps during propagation.
    #[serde(default)]
    pub record_energy: bool,
    /// Keep the fourth-derivative phase term in `MZ4`'s inner exponent.
    #[serde(default = "default_true")]
    pub mz4_fourth_derivative: bool,
}

impl ExperimentConfig {
    /// Quartic double well `x⁴ − 15x²` on `[−10,10)` with the piecewise pulse `e1`, ε = 1.
    /// Desk variant: `T = 1`, 96 points; full variant: `T = 4`, 150 points.
    pub fn example1(full: bool) -> Self {
        ExperimentConfig {
            problem: "example1".into(),
            domain: [-10.0, 10.0],
            n_points: if full { 150 } else { 96 },
            epsilon: 1.0,
            t_final: if full { 4.0 } else { 1.0 },
            potential: "well1".into(),
            pulse: "e1".into(),
            schemes: SchemeId::ALL.iter().map(|s| s.as_str().to_string()).collect(),
            h_values: None,
            h_start: Some(0.025),
            h_ratio: Some(0.5),
            h_count: Some(5),
            quad_knots: 3,
            // MZ4's inner exponent reaches norm ≈ 36 at the largest step (the quartic
            // well is steep at the domain edge), so the Lanczos cap must be generous.
            lanczos_max_iters: 64,
            lanczos_tol: default_lanczos_tol(),
            lanczos_reorthogonalize: true,
            reference_scheme: default_reference_scheme(),
            h_ref: 1.0 / 20480.0,
            x0: -2.5,
            delta: 0.2,
            output: None,
            seed: 7,
            fuse_boundary: false,
            record_energy: false,
            mz4_fourth_derivative: true,
        }
    }

    /// Shallow quartic well `x⁴/5 − 2x²` on `[−5,5)` with the chirped Gaussian pulse `e2`,
    /// ε = 10⁻². Desk variant: `T = 0.5`, 1024 points; full variant: `T = 2.5`, 2000 points.
    pub fn example2(full: bool) -> Self {
        ExperimentConfig {
            problem: "example2".into(),
            domain: [-5.0, 5.0],
            n_points: if full { 2000 } else { 1024 },
            epsilon: 1e-2,
            t_final: if full { 2.5 } else { 0.5 },
            potential: "well2".into(),
            pulse: "e2".into(),
            schemes: SchemeId::ALL.iter().map(|s| s.as_str().to_string()).collect(),
            h_values: Some(vec![1.0 / 400.0, 1.0 / 800.0, 1.0 / 1600.0, 1.0 / 3200.0]),
            h_start: None,
            h_ratio: None,
            h_count: None,
            quad_knots: 11,
            lanczos_max_iters: default_lanczos_max_iters(),
            lanczos_tol: default_lanczos_tol(),
            lanczos_reorthogonalize: true,
            reference_scheme: default_reference_scheme(),
            h_ref: 1.0 / 64000.0,
            x0: -2.5,
            delta: 1e-2,
            output: None,
            seed: 11,
            fuse_boundary: false,
            record_energy: false,
            mz4_fourth_derivative: true,
        }
    }

    /// Switches a named problem to its full benchmark extent (`example1`: T = 4, 150
    /// points; `example2`: T = 2.5, 2000 points).
    pub fn apply_full(&mut self) -> Result<()> {
        match self.problem.as_str() {
            "example1" => {
                self.t_final = 4.0;
                self.n_points = 150;
                Ok(())
            }
            "example2" => {
                self.t_final = 2.5;
                self.n_points = 2000;
                Ok(())
            }
            other => Err(MagsplitError::Config(format!(
                "problem '{other}' has no full variant (--full applies to example1/example2)"
            ))),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Checks the config invariants; every load path should call this before running.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(MagsplitError::Config(m));
        if !matches!(self.problem.as_str(), "example1" | "example2" | "custom") {
            return fail(format!("problem '{}' (expected example1, example2, or custom)", self.problem));
        }
        let [a, b] = self.domain;
        if !a.is_finite() || !b.is_finite() || b <= a {
            return fail(format!("domain [{a}, {b}] must be finite with b > a"));
        }
        if self.n_points < 4 || !self.n_points.is_multiple_of(2) {
            return fail(format!("n_points = {} must be even and ≥ 4", self.n_points));
        }
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return fail(format!("epsilon = {} must be finite and > 0", self.epsilon));
        }
        if !self.t_final.is_finite() || self.t_final <= 0.0 {
            return fail(format!("T = {} must be finite and > 0", self.t_final));
        }
        StaticPotential::from_label(&self.potential)?;
        LaserPulse::from_label(&self.pulse)?;
        if self.schemes.is_empty() {
            return fail("schemes list is empty".into());
        }
        self.scheme_ids()?;
        self.reference_scheme.parse::<SchemeId>()?;
        if !(1..=32).contains(&self.quad_knots) {
            return fail(format!("quad_knots = {} must be in 1..=32", self.quad_knots));
        }
        if self.lanczos_max_iters == 0 {
            return fail("lanczos_max_iters must be ≥ 1".into());
        }
        if self.lanczos_tol.is_nan() || self.lanczos_tol < 0.0 {
            return fail(format!("lanczos_tol = {} must be ≥ 0", self.lanczos_tol));
        }
        let hs = self.h_list()?;
        if !self.h_ref.is_finite() || self.h_ref <= 0.0 {
            return fail(format!("h_ref = {} must be finite and > 0", self.h_ref));
        }
        let min_h = hs.iter().cloned().fold(f64::INFINITY, f64::min);
        if self.h_ref * 20.0 > min_h * (1.0 + 1e-12) {
            return fail(format!(
                "h_ref = {} too coarse: reference runs need h_ref ≤ min(h)/20 = {}",
                self.h_ref,
                min_h / 20.0
            ));
        }
        if !self.delta.is_finite() || self.delta <= 0.0 {
            return fail(format!("delta = {} must be finite and > 0", self.delta));
        }
        if !self.x0.is_finite() {
            return fail(format!("x0 = {} must be finite", self.x0));
        }
        Ok(())
    }

    /// The step sizes, largest first.
    pub fn h_list(&self) -> Result<Vec<f64>> {
        let geo = (self.h_start, self.h_ratio, self.h_count);
        let hs: Vec<f64> = match (&self.h_values, geo) {
            (Some(list), (None, None, None)) => list.clone(),
            (None, (Some(h0), Some(q), Some(k))) => {
                if k == 0 {
                    return Err(MagsplitError::Config("h_count must be ≥ 1".into()));
                }
                (0..k).map(|j| h0 * q.powi(j as i32)).collect()
            }
            (None, (None, None, None)) => {
                return Err(MagsplitError::Config(
                    "no step sizes: give h_values or h_start/h_ratio/h_count".into(),
                ))
            }
            _ => {
                return Err(MagsplitError::Config(
                    "give either h_values or the full h_start/h_ratio/h_count triple, not a mixture".into(),
                ))
            }
        };
        if hs.is_empty() {
            return Err(MagsplitError::Config("h_values is empty".into()));
        }
        for &h in &hs {
            if !h.is_finite() || h <= 0.0 {
                return Err(MagsplitError::Config(format!("step size {h} must be finite and > 0")));
            }
        }
        let mut sorted = hs;
        sorted.sort_by(|x, y| y.partial_cmp(x).unwrap());
        Ok(sorted)
    }

    pub fn scheme_ids(&self) -> Result<Vec<SchemeId>> {
        self.schemes.iter().map(|s| s.parse()).collect()
    }

    pub fn grid(&self) -> Result<Arc<Grid1D>> {
        Grid1D::new(self.domain[0], self.domain[1], self.n_points)
    }

    pub fn static_potential(&self) -> Result<StaticPotential> {
        StaticPotential::from_label(&self.potential)
    }

    pub fn laser_pulse(&self) -> Result<LaserPulse> {
        LaserPulse::from_label(&self.pulse)
    }

    /// The scheme parameters this config implies for `id`.
    pub fn make_spec(&self, id: SchemeId) -> Result<SchemeSpec> {
        let mut spec = SchemeSpec::new(id, self.epsilon)?;
        spec.quad = gauss_legendre(self.quad_knots)?;
        spec.krylov = KrylovConfig {
            max_iters: self.lanczos_max_iters,
            tol: self.lanczos_tol,
            reorthogonalize: self.lanczos_reorthogonalize,
        };
        spec.fuse_boundary = self.fuse_boundary;
        spec.mz4_fourth_derivative = self.mz4_fourth_derivative;
        Ok(spec)
    }

    pub fn make_stepper(&self, id: SchemeId, grid: &Arc<Grid1D>) -> Result<Stepper> {
        self.make_stepper_with(self.make_spec(id)?, grid)
    }

    pub fn make_stepper_with(&self, spec: SchemeSpec, grid: &Arc<Grid1D>) -> Result<Stepper> {
        Stepper::new(spec, grid, &self.static_potential()?, &self.laser_pulse()?)
    }

    /// The normalized Gaussian initial state of this config.
    pub fn initial_state(&self, grid: &Arc<Grid1D>) -> Result<WaveFunction> {
        build_initial_state(grid, self.x0, self.delta)
    }

    /// Report path stem: `output` if set, else the problem name.
    pub fn output_stem(&self) -> String {
        self.output.clone().unwrap_or_else(|| self.problem.clone())
    }
}

/// The normalized Gaussian `(δπ)^(−1/4) · exp(−(x−x₀)²/(2δ))`, renormalized in the
/// discrete L² norm. Warns on stderr when the state carries noticeable mass at the domain
/// edges (periodic wrap-around would then contaminate a run).
pub fn build_initial_state(grid: &Arc<Grid1D>, x0: f64, delta: f64) -> Result<WaveFunction> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(MagsplitError::Config(format!("delta = {delta} must be finite and > 0")));
    }
    let amp = (delta * PI).powf(-0.25);
    let mut u = WaveFunction::from_fn(grid, |x| {
        Complex64::new(amp * (-(x - x0) * (x - x0) / (2.0 * delta)).exp(), 0.0)
    });
    let peak = u.values.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    if peak == 0.0 || !peak.is_finite() {
        return Err(MagsplitError::Config(format!(
            "initial Gaussian (x0 = {x0}, delta = {delta}) vanishes or overflows on this grid"
        )));
    }
    let edge = u.values[0].norm().max(u.values[grid.n_points - 1].norm()) / peak;
    if edge > 1e-12 {
        eprintln!(
            "warning: initial state has relative boundary amplitude {edge:.2e}; \
             periodic wrap-around may affect the run (x0 = {x0}, delta = {delta})"
        );
    }
    u.normalize();
    Ok(u)
}

/// Step boundaries for integrating `[0, t_final]` with nominal step `h`.
///
/// The count is `round(t_final/h)` when that is within 10⁻⁹ of exact, else
/// `ceil(t_final/h)` (the final step is shortened to land exactly on `t_final`).
/// Pulse breakpoints strictly inside the window are inserted as extra boundaries unless
/// one already sits within 10⁻¹² of them, so no step straddles a kink of the pulse.
pub fn build_schedule(t_final: f64, h: f64, breakpoints: &[f64]) -> Vec<f64> {
    if t_final <= 0.0 {
        return vec![0.0];
    }
    let ratio = t_final / h;
    let n = (if (ratio - ratio.round()).abs() < 1e-9 {
        ratio.round() as usize
    } else {
        ratio.ceil() as usize
    })
    .max(1);
    let mut ts: Vec<f64> = (0..n).map(|j| j as f64 * h).collect();
    ts.push(t_final);
    for &bk in breakpoints {
        if bk > 0.0 && bk < t_final && ts.iter().all(|&t| (t - bk).abs() > 1e-12) {
            ts.push(bk);
        }
    }
    ts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ts
}

/// What one propagation did.
#[derive(Debug, Clone)]
pub struct PropagationOutcome {
    /// State at `t_final`.
    pub state: WaveFunction,
    /// Steps taken (breakpoint-aligned windows included).
    pub steps: usize,
    /// Transforms consumed, measured on the engine.
    pub transforms: u64,
    /// Wall time of the stepping loop.
    pub seconds: f64,
    /// Largest `|‖u‖ − ‖u₀‖|` observed (checked every 100 steps and at the end).
    pub norm_drift: f64,
    /// Lanczos usage during this propagation (zero for all schemes but `MZ4`).
    pub krylov: KrylovUsage,
}

/// Advances `u0` from `t = 0` to `t_final` in steps of `h`.
///
/// Breakpoints of the pulse are honored as step boundaries, the norm is monitored every
/// 100 steps, and a Lanczos inner exponential that fails to converge aborts the run with
/// a diagnostic. With `fuse_boundary` set (outer-shift schemes), the trailing drift
/// kernel of each step merges with the leading one of the next, saving 2 transforms per
/// interior seam without changing the result.
pub fn propagate(
    stepper: &mut Stepper,
    engine: &mut FftEngine,
    u0: &WaveFunction,
    t_final: f64,
    h: f64,
) -> Result<PropagationOutcome> {
    propagate_impl(stepper, engine, u0, t_final, h, None)
}

/// Like [`propagate`], but also samples `(t, ⟨H⟩)` at `t = 0`, every `sample_every`
/// steps, and at `t_final`. Observable transforms run on a separate engine so the
/// outcome's transform count stays the propagation cost alone; the energy trace also
/// forces unfused stepping, so the sampled states are the true intermediate states.
pub fn propagate_recording(
    stepper: &mut Stepper,
    engine: &mut FftEngine,
    u0: &WaveFunction,
    t_final: f64,
    h: f64,
    sample_every: usize,
) -> Result<(PropagationOutcome, Vec<(f64, f64)>)> {
    let mut obs_engine = FftEngine::new(engine.grid());
    let mut trace = Vec::new();
    let outcome = propagate_impl(
        stepper,
        engine,
        u0,
        t_final,
        h,
        Some((&mut obs_engine, sample_every.max(1), &mut trace)),
    )?;
    Ok((outcome, trace))
}

fn propagate_impl(
    stepper: &mut Stepper,
    engine: &mut FftEngine,
    u0: &WaveFunction,
    t_final: f64,
    h: f64,
    mut trace: Option<(&mut FftEngine, usize, &mut Vec<(f64, f64)>)>,
) -> Result<PropagationOutcome> {
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(MagsplitError::Config(format!("t_final = {t_final} must be finite and ≥ 0")));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(MagsplitError::Config(format!("step size h = {h} must be finite and > 0")));
    }
    let start = Instant::now();
    let transforms0 = engine.transforms();
    let krylov0 = stepper.krylov_usage();
    let norm0 = u0.norm_l2();
    if let Some((obs_engine, _, out)) = trace.as_mut() {
        let v = stepper.potential_samples(0.0);
        out.push((0.0, energy(&mut **obs_engine, u0, &v, stepper.spec().epsilon)?));
    }
    if t_final == 0.0 {
        return Ok(PropagationOutcome {
            state: u0.clone(),
            steps: 0,
            transforms: 0,
            seconds: start.elapsed().as_secs_f64(),
            norm_drift: 0.0,
            krylov: KrylovUsage::default(),
        });
    }
    let ts = build_schedule(t_final, h, &stepper.breakpoints_in(0.0, t_final));
    let fuse = stepper.spec().fuse_boundary && stepper.has_outer_shift() && trace.is_none();
    let mut u = u0.clone();
    let mut max_drift = 0.0f64;
    let mut pending: Option<Vec<Complex64>> = None;
    for i in 0..ts.len() - 1 {
        let t0 = ts[i];
        let hi = ts[i + 1] - ts[i];
        let unconverged_before = stepper.krylov_usage().unconverged;
        if fuse {
            let ctx = stepper.make_context(t0, hi)?;
            let shift = stepper.half_shift_exponent(&ctx)?.ok_or_else(|| {
                MagsplitError::Config("fused stepping requires an outer-shift scheme".into())
            })?;
            let lead = match pending.take() {
                Some(mut p) => {
                    for (z, w) in p.iter_mut().zip(&shift) {
                        *z += w;
                    }
                    p
                }
                None => shift.clone(),
            };
            u = engine.exp_circulant(&lead, &u)?;
            u = stepper.inner_step_with_context(engine, &u, &ctx)?;
            pending = Some(shift);
        } else {
            u = stepper.step(engine, &u, t0, hi)?;
        }
        let usage = stepper.krylov_usage();
        if usage.unconverged > unconverged_before {
            let (estimate, tol) = usage
                .last
                .map(|info| (info.error_estimate, stepper.spec().krylov.tol))
                .unwrap_or((f64::NAN, stepper.spec().krylov.tol));
            return Err(MagsplitError::KrylovFailure { step: i, t: t0, estimate, tol });
        }
        if (i + 1) % 100 == 0 {
            max_drift = max_drift.max((u.norm_l2() - norm0).abs());
        }
        if let Some((obs_engine, every, out)) = trace.as_mut() {
            if (i + 1) % *every == 0 || i + 1 == ts.len() - 1 {
                let t = ts[i + 1];
                let v = stepper.potential_samples(t);
                out.push((t, energy(&mut **obs_engine, &u, &v, stepper.spec().epsilon)?));
            }
        }
    }
    if let Some(p) = pending {
        u = engine.exp_circulant(&p, &u)?;
    }
    max_drift = max_drift.max((u.norm_l2() - norm0).abs());
    let krylov1 = stepper.krylov_usage();
    Ok(PropagationOutcome {
        state: u,
        steps: ts.len() - 1,
        transforms: engine.transforms() - transforms0,
        seconds: start.elapsed().as_secs_f64(),
        norm_drift: max_drift,
        krylov: KrylovUsage {
            calls: krylov1.calls - krylov0.calls,
            matvecs: krylov1.matvecs - krylov0.matvecs,
            unconverged: krylov1.unconverged - krylov0.unconverged,
            last: krylov1.last,
        },
    })
}

/// The energy expectation `⟨u, (−ε²∂ₓ² + V)u⟩ / ⟨u,u⟩`, with the kinetic part summed in
/// Fourier space (exact for the collocation discretization, Nyquist mode included).
pub fn energy(
    engine: &mut FftEngine,
    u: &WaveFunction,
    v_samples: &[f64],
    epsilon: f64,
) -> Result<f64> {
    let grid = engine.grid().clone();
    if !u.grid.same_as(&grid) || v_samples.len() != grid.n_points {
        return Err(MagsplitError::GridMismatch(
            "energy: state, engine, and potential samples must share one grid".into(),
        ));
    }
    let dx = grid.dx();
    let n = grid.n_points as f64;
    let norm2: f64 = u.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx;
    if norm2 == 0.0 {
        return Err(MagsplitError::Config("energy of the zero state is undefined".into()));
    }
    let mut buf = u.values.clone();
    engine.forward(&mut buf);
    // Parseval for the unnormalized forward transform: Σ_j|u_j|² = (1/n)Σ_m|û_m|²,
    // so the quadrature weight for the Fourier-space sum is dx/n, not dx/n².
    let kinetic: f64 = buf
        .iter()
        .zip(&grid.wavenumbers)
        .map(|(z, &k)| k * k * z.norm_sqr())
        .sum::<f64>()
        * dx
        / n
        * epsilon
        * epsilon;
    let potential: f64 = u
        .values
        .iter()
        .zip(v_samples)
        .map(|(z, &v)| v * z.norm_sqr())
        .sum::<f64>()
        * dx;
    Ok((kinetic + potential) / norm2)
}

/// A reference solution together with its cross-validation evidence.
#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub state: WaveFunction,
    /// L² distance between the two independent reference runs.
    pub cross_validation_diff: f64,
    pub scheme: SchemeId,
    pub h_ref: f64,
}

/// Computes a cross-validated reference state at `t_final`.
///
/// The configured reference scheme (default `MaCC`) and a structurally different checker
/// (`MZ4`, or `MaCC` when the reference already is `MZ4`) both run at `h_ref` with
/// reference-grade Lanczos settings; if their final states differ by more than
/// [`CROSS_VALIDATION_GATE`] in L², the reference is rejected with
/// [`MagsplitError::CrossValidation`] rather than silently trusted.
pub fn make_reference(
    cfg: &ExperimentConfig,
    grid: &Arc<Grid1D>,
    u0: &WaveFunction,
) -> Result<ReferenceSolution> {
    let ref_id: SchemeId = cfg.reference_scheme.parse()?;
    let check_id = if ref_id == SchemeId::Mz4 { SchemeId::MaCc } else { SchemeId::Mz4 };
    let run = |id: SchemeId| -> Result<WaveFunction> {
        let mut spec = cfg.make_spec(id)?;
        spec.krylov.tol = spec.krylov.tol.min(1e-14);
        spec.krylov.max_iters = spec.krylov.max_iters.max(16);
        spec.fuse_boundary = false;
        let mut stepper = cfg.make_stepper_with(spec, grid)?;
        let mut engine = FftEngine::new(grid);
        Ok(propagate(&mut stepper, &mut engine, u0, cfg.t_final, cfg.h_ref)?.state)
    };
    let (a, b) = rayon::join(|| run(ref_id), || run(check_id));
    let (a, b) = (a?, b?);
    let diff = a.l2_distance(&b);
    if diff > CROSS_VALIDATION_GATE {
        return Err(MagsplitError::CrossValidation { diff, gate: CROSS_VALIDATION_GATE });
    }
    Ok(ReferenceSolution { state: a, cross_validation_diff: diff, scheme: ref_id, h_ref: cfg.h_ref })
}

/// One benchmark run: scheme × step size, with its error and cost.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub scheme: String,
    pub h: f64,
    /// Final-time L² distance to the cross-validated reference.
    pub error: f64,
    pub seconds: f64,
    pub transforms: u64,
    pub norm_drift: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_trace: Option<Vec<(f64, f64)>>,
}

/// Least-squares convergence slope of one scheme's error column.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlopeFit {
    pub scheme: String,
    pub slope: f64,
    /// Points entering the fit (the tail of the h-ladder; see [`fit_slope_tail`]).
    pub points_used: usize,
}

/// Output of [`sweep`].
#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub rows: Vec<RunRecord>,
    pub slopes: Vec<SlopeFit>,
    /// Cross-validation distance of the reference pair (evidence, not an error bound).
    pub reference_cross_diff: f64,
}

#[derive(Serialize)]
struct SweepReport<'a> {
    config: &'a ExperimentConfig,
    reference_cross_diff: f64,
    slopes: &'a [SlopeFit],
    rows: &'a [RunRecord],
}

impl SweepResult {
    /// Deterministic CSV: header `scheme,h,error,seconds,transforms,norm_drift`, rows in
    /// scheme-major, h-descending order. Only the `seconds` column varies across
    /// identical re-runs.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("scheme,h,error,seconds,transforms,norm_drift\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{:.12e},{:.3},{},{:.3e}\n",
                r.scheme, r.h, r.error, r.seconds, r.transforms, r.norm_drift
            ));
        }
        s
    }

    /// JSON mirror of the CSV with the originating config echoed in.
    pub fn to_json(&self, cfg: &ExperimentConfig) -> Result<String> {
        Ok(serde_json::to_string_pretty(&SweepReport {
            config: cfg,
            reference_cross_diff: self.reference_cross_diff,
            slopes: &self.slopes,
            rows: &self.rows,
        })?)
    }
}

/// Fits `error ≈ C·h^p` on the tail of an h-ladder and returns `(p, points_used)`.
///
/// Points at or below the round-off floor (error < 10⁻¹³) are dropped; of the rest, the
/// smallest ⌈2k/3⌉ step sizes enter an ordinary least-squares fit in log–log coordinates.
/// Fewer than two usable points yield `NaN`.
pub fn fit_slope_tail(hs: &[f64], errs: &[f64]) -> (f64, usize) {
    let mut pts: Vec<(f64, f64)> = hs
        .iter()
        .zip(errs)
        .filter(|(&h, &e)| h > 0.0 && e.is_finite() && e > 1e-13)
        .map(|(&h, &e)| (h.ln(), e.ln()))
        .collect();
    pts.sort_by(|p, q| q.0.partial_cmp(&p.0).unwrap());
    let k = pts.len();
    if k < 2 {
        return (f64::NAN, k);
    }
    let take = ((2 * k + 2) / 3).max(2);
    let tail = &pts[k - take..];
    let m = tail.len() as f64;
    let sx: f64 = tail.iter().map(|p| p.0).sum();
    let sy: f64 = tail.iter().map(|p| p.1).sum();
    let sxx: f64 = tail.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = tail.iter().map(|p| p.0 * p.1).sum();
    let denom = m * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return (f64::NAN, take);
    }
    ((m * sxy - sx * sy) / denom, take)
}

/// Runs the full measurement plan of a config: one cross-validated reference, then every
/// scheme × step-size combination (in parallel), then per-scheme slope fits.
///
/// Row order is deterministic (schemes in config order, h descending); re-running the
/// same config reproduces every column except wall time.
pub fn sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let hs = cfg.h_list()?;
    if hs.len() < 3 {
        return Err(MagsplitError::Config(format!(
            "sweeps need at least 3 step sizes to fit a slope (got {})",
            hs.len()
        )));
    }
    let schemes = cfg.scheme_ids()?;
    let grid = cfg.grid()?;
    let u0 = cfg.initial_state(&grid)?;
    let reference = make_reference(cfg, &grid, &u0)?;
    let pairs: Vec<(SchemeId, f64)> = schemes
        .iter()
        .flat_map(|&s| hs.iter().map(move |&h| (s, h)))
        .collect();
    let rows: Vec<RunRecord> = pairs
        .par_iter()
        .map(|&(id, h)| -> Result<RunRecord> {
            let mut stepper = cfg.make_stepper(id, &grid)?;
            let mut engine = FftEngine::new(&grid);
            let (outcome, trace) = if cfg.record_energy {
                let (o, t) =
                    propagate_recording(&mut stepper, &mut engine, &u0, cfg.t_final, h, 100)?;
                (o, Some(t))
            } else {
                (propagate(&mut stepper, &mut engine, &u0, cfg.t_final, h)?, None)
            };
            Ok(RunRecord {
                scheme: id.as_str().to_string(),
                h,
                error: outcome.state.l2_distance(&reference.state),
                seconds: outcome.seconds,
                transforms: outcome.transforms,
                norm_drift: outcome.norm_drift,
                energy_trace: trace,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let slopes = schemes
        .iter()
        .map(|&s| {
            let (hh, ee): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .filter(|r| r.scheme == s.as_str())
                .map(|r| (r.h, r.error))
                .unzip();
            let (slope, points_used) = fit_slope_tail(&hh, &ee);
            SlopeFit { scheme: s.as_str().to_string(), slope, points_used }
        })
        .collect();
    Ok(SweepResult { rows, slopes, reference_cross_diff: reference.cross_validation_diff })
}

/// Writes `text` to `path`, creating parent directories as needed.
pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// One entry of the built-in verification suite (see [`self_check`]).
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, measured: f64, bound: f64) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed: measured.is_finite() && measured <= bound,
        detail: format!("{measured:.3e} (bound {bound:.1e})"),
    }
}

/// Fast internal consistency suite used by the `verify` CLI subcommand: differentiation
/// symbols, quadrature, pulse moments, the laser moment bridge, operator identities,
/// dense equivalence of the symmetrized operators, Lanczos oracles, a free-flight
/// propagation check, and the pulse-off reduction between schemes.
pub fn self_check() -> Vec<CheckResult> {
    match self_check_impl() {
        Ok(results) => results,
        Err(e) => vec![CheckResult {
            name: "self-check setup".into(),
            passed: false,
            detail: format!("failed to run: {e}"),
        }],
    }
}

fn self_check_impl() -> Result<Vec<CheckResult>> {
    use crate::lanczos::{expm_krylov, expm_tridiag};
    use crate::moments::{grid_moments, grid_moments_from_laser, scalar_moments};
    use crate::potentials::TimeDependentPotential;
    use crate::symop::{verify_commutator_identities, SymOpSum};

    let mut out = Vec::new();

    // Differentiation symbols on a 4-point grid over [0, 2π): κ = [0, 1, −2, −1].
    {
        let grid = Grid1D::new(0.0, 2.0 * PI, 4)?;
        let c1 = crate::grid::make_symbol(&grid, 1).values;
        let c2 = crate::grid::make_symbol(&grid, 2).values;
        let want1 = [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 0.0), // odd-order Nyquist zeroed
            Complex64::new(0.0, -1.0),
        ];
        let want2 = [0.0, -1.0, -4.0, -1.0].map(|r| Complex64::new(r, 0.0));
        let err = c1
            .iter()
            .zip(&want1)
            .chain(c2.iter().zip(&want2))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        out.push(check("derivative symbols (n = 4)", err, 1e-14));
    }

    // 3-knot Gauss–Legendre on [0,1] against the closed form.
    {
        let q = gauss_legendre(3)?;
        let want_knots = [0.5 * (1.0 - (0.6f64).sqrt()), 0.5, 0.5 * (1.0 + (0.6f64).sqrt())];
        let want_w = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];
        let err = q
            .knots
            .iter()
            .zip(&want_knots)
            .chain(q.weights.iter().zip(&want_w))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        out.push(check("Gauss-Legendre 3-knot rule", err, 1e-14));
    }

    // Moments of the ramp pulse e(t) = t: r = t0 + h/2, s = h³/6.
    {
        let pulse = LaserPulse::custom("ramp", true, |t| t);
        let (t0, h) = (0.3, 0.37);
        let q = gauss_legendre(5)?;
        let sm = scalar_moments(&pulse, t0, h, &q);
        let err = (sm.r - (t0 + 0.5 * h)).abs().max((sm.s - h * h * h / 6.0).abs());
        out.push(check("ramp-pulse moments", err, 1e-14));
    }

    // Laser moment bridge: direct grid moments of V₀ + e·x equal the scalar-moment form.
    {
        let grid = Grid1D::new(-10.0, 10.0, 32)?;
        let v0 = StaticPotential::well1();
        let pulse = LaserPulse::e1();
        let pot = TimeDependentPotential::from_laser(&v0, &pulse);
        let q = gauss_legendre(11)?;
        let (t0, h) = (0.61, 0.022);
        let gm = grid_moments(&pot, &grid, t0, h, &q);
        let sm = scalar_moments(&pulse, t0, h, &q);
        let bridged = grid_moments_from_laser(&v0, &sm, &grid);
        let scale = gm.mu00.iter().map(|v| v.abs()).fold(1e-30f64, f64::max);
        let err = gm
            .mu00
            .iter()
            .zip(&bridged.mu00)
            .chain(gm.dx_mu00.iter().zip(&bridged.dx_mu00))
            .chain(gm.mu11.iter().zip(&bridged.mu11))
            .chain(gm.dx_mu11.iter().zip(&bridged.dx_mu11))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max)
            / scale;
        out.push(check("laser moment bridge", err, 1e-12));
    }

    // Commutator identities on band-limited data (n = 64).
    {
        let grid = Grid1D::new(-10.0, 10.0, 64)?;
        let mut engine = FftEngine::new(&grid);
        let l = 20.0;
        let w = 2.0 * PI / l;
        let mu00: Vec<f64> =
            grid.nodes.iter().map(|&x| 1.3 * (w * x).sin() + 0.4 * (2.0 * w * x).cos()).collect();
        let mu11: Vec<f64> =
            grid.nodes.iter().map(|&x| 0.7 * (w * x).cos() + 0.2 * (3.0 * w * x).sin()).collect();
        let u = WaveFunction::from_fn(&grid, |x| {
            Complex64::new(0.0, 2.0 * w * x).exp() + 0.5 * Complex64::new(0.0, -w * x).exp()
        });
        let errs = verify_commutator_identities(&mut engine, &mu00, &mu11, &u)?;
        let err = errs.iter().cloned().fold(0.0f64, f64::max);
        out.push(check("commutator identities (n = 64)", err, 1e-9));
    }

    // FFT application of a symmetrized operator sum vs its dense matrix (n = 32).
    {
        let grid = Grid1D::new(-4.0, 4.0, 32)?;
        let mut engine = FftEngine::new(&grid);
        let w = 2.0 * PI / 8.0;
        let f0: Vec<f64> = grid.nodes.iter().map(|&x| 0.3 + (w * x).sin()).collect();
        let f1: Vec<f64> = grid.nodes.iter().map(|&x| (2.0 * w * x).cos() - 0.2).collect();
        let f2: Vec<f64> = grid.nodes.iter().map(|&x| 0.5 * (w * x).cos()).collect();
        let op = SymOpSum::new(&grid, vec![(0, f0, 1.0), (1, f1, 2.0), (2, f2, -0.7)])?;
        let u = WaveFunction::from_fn(&grid, |x| {
            Complex64::new((w * x).cos(), (3.0 * w * x).sin() * 0.4)
        });
        let fast = op.apply(&mut engine, &u)?;
        let dense = op.materialize_dense()?;
        let nv = nalgebra::DVector::from_column_slice(&u.values);
        let dv = &dense * nv;
        let num: f64 = fast
            .values
            .iter()
            .zip(dv.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let den: f64 = dv.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-30);
        out.push(check("symmetrized operator vs dense (n = 32)", num / den, 1e-11));
    }

    // Tridiagonal exponential is unitary.
    {
        let diag = [0.3, -0.1, 0.7, 0.2, -0.5, 0.9, 0.0, 0.4];
        let off = [0.6, 0.1, -0.3, 0.8, 0.2, -0.6, 0.5];
        let u = expm_tridiag(&diag, &off)?;
        let id = nalgebra::DMatrix::<Complex64>::identity(8, 8);
        let err = (&u * u.adjoint() - id).norm();
        out.push(check("tridiagonal exponential unitarity", err, 1e-13));
    }

    // Krylov exponential against the closed form for a pointwise-diagonal operator.
    {
        let grid = Grid1D::new(0.0, 2.0 * PI, 16)?;
        let phi: Vec<f64> = grid.nodes.iter().map(|&x| (x).sin()).collect();
        let v = WaveFunction::from_fn(&grid, |x| Complex64::new((2.0 * x).cos(), 0.5 * x.sin()));
        let cfg = KrylovConfig { max_iters: 20, tol: 1e-13, reorthogonalize: true };
        let phi_op = phi.clone();
        let g = grid.clone();
        let (got, info) = expm_krylov(
            move |w: &WaveFunction| {
                let vals: Vec<Complex64> =
                    w.values.iter().zip(&phi_op).map(|(z, &p)| Complex64::new(0.0, p) * z).collect();
                WaveFunction::new(g.clone(), vals)
            },
            &v,
            &cfg,
        )?;
        let want = WaveFunction::new(
            grid.clone(),
            v.values
                .iter()
                .zip(&phi)
                .map(|(z, &p)| z * Complex64::new(0.0, p).exp())
                .collect(),
        )?;
        let err = got.l2_distance(&want) / want.norm_l2();
        out.push(check(
            &format!("Krylov diagonal oracle ({} iterations)", info.iterations),
            err,
            1e-11,
        ));
    }

    // Free flight: MZ2 with V ≡ 0 equals the analytic mode-wise phase evolution.
    {
        let grid = Grid1D::new(-10.0, 10.0, 64)?;
        let mut engine = FftEngine::new(&grid);
        let eps = 0.7;
        let h = 0.3;
        let w = 2.0 * PI / 20.0;
        let modes: [(i32, Complex64); 3] = [
            (1, Complex64::new(0.6, 0.0)),
            (-2, Complex64::new(0.0, 0.3)),
            (3, Complex64::new(-0.2, 0.1)),
        ];
        let u0 = WaveFunction::from_fn(&grid, |x| {
            modes.iter().map(|&(m, c)| c * Complex64::new(0.0, m as f64 * w * x).exp()).sum()
        });
        let want = WaveFunction::from_fn(&grid, |x| {
            modes
                .iter()
                .map(|&(m, c)| {
                    let kap = m as f64 * w;
                    c * Complex64::new(0.0, m as f64 * w * x).exp()
                        * Complex64::new(0.0, -h * eps * kap * kap).exp()
                })
                .sum()
        });
        let spec = SchemeSpec::new(SchemeId::Mz2, eps)?;
        let mut stepper =
            Stepper::new(spec, &grid, &StaticPotential::zero(), &LaserPulse::zero())?;
        let got = stepper.step(&mut engine, &u0, 0.0, h)?;
        out.push(check("free flight (MZ2, n = 64)", got.l2_distance(&want), 1e-13));
    }

    // Pulse off: the compact scheme and its drift-sandwich variant coincide.
    {
        let grid = Grid1D::new(-10.0, 10.0, 64)?;
        let mut engine = FftEngine::new(&grid);
        let v0 = StaticPotential::well1();
        let pulse = LaserPulse::zero();
        let u0 = build_initial_state(&grid, -2.5, 0.2)?;
        let mut run = |id: SchemeId| -> Result<WaveFunction> {
            let spec = SchemeSpec::new(id, 0.25)?;
            let mut stepper = Stepper::new(spec, &grid, &v0, &pulse)?;
            stepper.step(&mut engine, &u0, 0.0, 0.01)
        };
        let a = run(SchemeId::MaCc)?;
        let b = run(SchemeId::MaStCc)?;
        out.push(check("pulse-off reduction (MaCC vs MaStCC)", a.l2_distance(&b), 1e-14));
    }

    Ok(out)
}
