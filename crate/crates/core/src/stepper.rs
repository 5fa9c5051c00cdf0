//! Time integration: an adaptive Dormand–Prince 5(4) pair and a fixed-step
//! fourth-order exponential time-differencing Runge–Kutta scheme (ETDRK4).

use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Model, NonlinearWorkspace};
use crate::error::{FksError, Result};
use crate::record::{RunRecord, RunStatus};
use crate::spectral::{mode_weight, SpectralField, TWO_PI};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Dormand–Prince 5(4) with step-size control.
    #[serde(alias = "erk")]
    AdaptiveErk,
    /// Fixed-step ETDRK4 with contour-integral coefficients.
    Etdrk4,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StepperConfig {
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_fixed: f64,
    pub safety: f64,
    /// Points on the contour used for the ETDRK4 coefficients.
    pub contour_points: usize,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            method: Method::AdaptiveErk,
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            dt_init: 1e-4,
            dt_min: 1e-12,
            dt_fixed: 1e-3,
            safety: 0.9,
            contour_points: 32,
        }
    }
}

impl StepperConfig {
    pub fn etdrk4(dt: f64) -> Self {
        Self {
            method: Method::Etdrk4,
            dt_fixed: dt,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(FksError::param(format!("{name} must be positive, got {v}")))
            }
        };
        positive("rel_tol", self.rel_tol)?;
        positive("abs_tol", self.abs_tol)?;
        positive("dt_init", self.dt_init)?;
        positive("dt_min", self.dt_min)?;
        positive("dt_fixed", self.dt_fixed)?;
        positive("safety", self.safety)?;
        if self.dt_min >= self.dt_init {
            return Err(FksError::param("dt_min must be smaller than dt_init"));
        }
        if self.contour_points < 4 {
            return Err(FksError::param("contour_points must be at least 4"));
        }
        Ok(())
    }

    /// Step size a fresh integration starts with.
    pub fn initial_dt(&self) -> f64 {
        match self.method {
            Method::AdaptiveErk => self.dt_init,
            Method::Etdrk4 => self.dt_fixed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IntegrationState {
    pub t: f64,
    pub field: SpectralField,
    /// Step size proposed for the next step (never the clipped one).
    pub dt: f64,
    pub n_steps: u64,
    pub n_rejects: u64,
}

impl IntegrationState {
    pub fn new(field: SpectralField, t: f64, dt: f64) -> Self {
        Self {
            t,
            field,
            dt,
            n_steps: 0,
            n_rejects: 0,
        }
    }
}

/// Per-mode ETDRK4 weights for one step size.
#[derive(Clone, Debug)]
pub struct Etdrk4Tables {
    pub dt: f64,
    /// `e^{σh}`
    pub e: Vec<f64>,
    /// `e^{σh/2}`
    pub e2: Vec<f64>,
    /// `h (e^{σh/2} − 1)/(σh)`
    pub q: Vec<f64>,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub f3: Vec<f64>,
}

/// ETDRK4 weights for the model's symbol at step `dt`, each φ-type function
/// averaged over `contour_points` points on the unit circle around `σh`.
pub fn etdrk4_coefficients(model: &Model, dt: f64, contour_points: usize) -> Etdrk4Tables {
    let m = contour_points.max(1);
    let roots: Vec<Complex64> = (0..m)
        .map(|j| Complex64::from_polar(1.0, TWO_PI * (j as f64 + 0.5) / m as f64))
        .collect();
    let modes = model.symbol().len();
    let mut t = Etdrk4Tables {
        dt,
        e: Vec::with_capacity(modes),
        e2: Vec::with_capacity(modes),
        q: Vec::with_capacity(modes),
        f1: Vec::with_capacity(modes),
        f2: Vec::with_capacity(modes),
        f3: Vec::with_capacity(modes),
    };
    for &sigma in model.symbol() {
        let l = sigma * dt;
        let (mut q, mut f1, mut f2, mut f3) = (0.0, 0.0, 0.0, 0.0);
        for root in &roots {
            let r = root + l;
            let er = r.exp();
            let r3 = r * r * r;
            q += (((r * 0.5).exp() - 1.0) / r).re;
            f1 += ((-4.0 - r + er * (4.0 - 3.0 * r + r * r)) / r3).re;
            f2 += ((2.0 + r + er * (r - 2.0)) / r3).re;
            f3 += ((-4.0 - 3.0 * r - r * r + er * (4.0 - r)) / r3).re;
        }
        let scale = dt / m as f64;
        t.e.push(l.exp());
        t.e2.push((0.5 * l).exp());
        t.q.push(q * scale);
        t.f1.push(f1 * scale);
        t.f2.push(f2 * scale);
        t.f3.push(f3 * scale);
    }
    t
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Relative slack under which a step is treated as landing on its target.
const LANDING_SLACK: f64 = 1e-9;

/// Advances an [`IntegrationState`] with reusable buffers.
pub struct Integrator {
    model: Model,
    cfg: StepperConfig,
    nl: NonlinearWorkspace,
    k: [Vec<Complex64>; 7],
    y: Vec<Complex64>,
    tables: Option<Etdrk4Tables>,
    clip_tables: Option<Etdrk4Tables>,
    /// `(n_steps, t)` for which `k[6]` holds `f(u)` of the current state.
    fsal: Option<(u64, f64)>,
    /// Fixed steps are timed as `origin + count·h` so that `t` does not drift.
    etd_origin: f64,
    etd_count: u64,
}

impl Integrator {
    pub fn new(model: Model, cfg: StepperConfig) -> Result<Self> {
        cfg.validate()?;
        let modes = model.grid().modes();
        let tables = match cfg.method {
            Method::Etdrk4 => Some(etdrk4_coefficients(&model, cfg.dt_fixed, cfg.contour_points)),
            Method::AdaptiveErk => None,
        };
        Ok(Self {
            nl: model.workspace(),
            k: std::array::from_fn(|_| vec![Complex64::default(); modes]),
            y: vec![Complex64::default(); modes],
            tables,
            clip_tables: None,
            fsal: None,
            etd_origin: f64::NAN,
            etd_count: 0,
            model,
            cfg,
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn config(&self) -> &StepperConfig {
        &self.cfg
    }

    /// Take one accepted step, never passing `target`. A step that reaches
    /// `target` sets `state.t = target` exactly.
    pub fn step_towards(&mut self, state: &mut IntegrationState, target: f64) -> Result<()> {
        match self.cfg.method {
            Method::AdaptiveErk => self.step_dopri(state, target)?,
            Method::Etdrk4 => self.step_etd(state, target)?,
        }
        state.field.zero_mean();
        Ok(())
    }

    fn step_dopri(&mut self, state: &mut IntegrationState, target: f64) -> Result<()> {
        let remaining = target - state.t;
        let mut h = state.dt.max(self.cfg.dt_min);
        let mut clipped = false;
        if h >= remaining * (1.0 - LANDING_SLACK) {
            h = remaining;
            clipped = true;
        }
        let u = state.field.coeffs();
        if self.fsal != Some((state.n_steps, state.t)) {
            self.model.rhs_into(&mut self.nl, u, &mut self.k[0]);
        } else {
            // The cached derivative sits in k[6].
            let (head, tail) = self.k.split_at_mut(6);
            head[0].copy_from_slice(&tail[0]);
        }
        if !all_finite(&self.k[0]) {
            return Err(FksError::NonFiniteState { t: state.t });
        }
        let scale_u = l2_norm(u);
        let mut rejected = false;
        loop {
            let err = self.dopri_trial(u, h);
            let new_norm = l2_norm(&self.y);
            let tol = self.cfg.rel_tol * scale_u.max(new_norm) + self.cfg.abs_tol;
            let ratio = err / tol;
            if ratio.is_finite() && ratio <= 1.0 {
                let factor = if ratio == 0.0 {
                    5.0
                } else {
                    (self.cfg.safety * ratio.powf(-0.2)).clamp(0.2, 5.0)
                };
                let proposed = h * factor;
                // A step shortened only to hit the target keeps the old proposal.
                if !clipped || rejected {
                    state.dt = proposed;
                }
                state.field.coeffs_mut().copy_from_slice(&self.y);
                state.t = if clipped { target } else { state.t + h };
                state.n_steps += 1;
                self.fsal = Some((state.n_steps, state.t));
                return Ok(());
            }
            state.n_rejects += 1;
            rejected = true;
            clipped = false;
            let factor = if ratio.is_finite() {
                (self.cfg.safety * ratio.powf(-0.2)).clamp(0.2, 1.0)
            } else {
                0.2
            };
            h *= factor;
            state.dt = h;
            if h < self.cfg.dt_min {
                return Err(FksError::StepSizeUnderflow {
                    t: state.t,
                    dt: h,
                    dt_min: self.cfg.dt_min,
                });
            }
        }
    }

    /// One DOPRI trial from `u` (with `k[0] = f(u)`) into `self.y`; returns
    /// the L² norm of the embedded error estimate.
    fn dopri_trial(&mut self, u: &[Complex64], h: f64) -> f64 {
        let model = &self.model;
        let nl = &mut self.nl;
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let y = &mut self.y;
        for i in 0..y.len() {
            y[i] = u[i] + k1[i] * (h * A21);
        }
        model.rhs_into(nl, y, k2);
        for i in 0..y.len() {
            y[i] = u[i] + (k1[i] * A31 + k2[i] * A32) * h;
        }
        model.rhs_into(nl, y, k3);
        for i in 0..y.len() {
            y[i] = u[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * h;
        }
        model.rhs_into(nl, y, k4);
        for i in 0..y.len() {
            y[i] = u[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * h;
        }
        model.rhs_into(nl, y, k5);
        for i in 0..y.len() {
            y[i] = u[i] + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * h;
        }
        model.rhs_into(nl, y, k6);
        for i in 0..y.len() {
            y[i] = u[i] + (k1[i] * B1 + k3[i] * B3 + k4[i] * B4 + k5[i] * B5 + k6[i] * B6) * h;
        }
        model.rhs_into(nl, y, k7);
        let nyq = y.len() - 1;
        let mut err2 = 0.0;
        for i in 0..y.len() {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            err2 += mode_weight(i, nyq) * e.norm_sqr();
        }
        (TWO_PI * err2).sqrt()
    }

    fn step_etd(&mut self, state: &mut IntegrationState, target: f64) -> Result<()> {
        let h = self.cfg.dt_fixed;
        if self.etd_origin + self.etd_count as f64 * h != state.t {
            self.etd_origin = state.t;
            self.etd_count = 0;
        }
        let remaining = target - state.t;
        let (tables, new_t) = if remaining < h * (1.0 - LANDING_SLACK) {
            let stale = self.clip_tables.as_ref().map_or(true, |t| t.dt != remaining);
            if stale {
                self.clip_tables = Some(etdrk4_coefficients(&self.model, remaining, self.cfg.contour_points));
            }
            (self.clip_tables.as_ref().unwrap(), target)
        } else if remaining <= h * (1.0 + LANDING_SLACK) {
            (self.tables.as_ref().unwrap(), target)
        } else {
            (
                self.tables.as_ref().unwrap(),
                self.etd_origin + (self.etd_count + 1) as f64 * h,
            )
        };
        let v = state.field.coeffs();
        let model = &self.model;
        let nl = &mut self.nl;
        let [nv, na, nb, nc, a, b, c] = &mut self.k;
        model.nonlinear_into(nl, v, nv);
        for i in 0..v.len() {
            a[i] = v[i] * tables.e2[i] + nv[i] * tables.q[i];
        }
        model.nonlinear_into(nl, a, na);
        for i in 0..v.len() {
            b[i] = v[i] * tables.e2[i] + na[i] * tables.q[i];
        }
        model.nonlinear_into(nl, b, nb);
        for i in 0..v.len() {
            c[i] = a[i] * tables.e2[i] + (nb[i] * 2.0 - nv[i]) * tables.q[i];
        }
        model.nonlinear_into(nl, c, nc);
        let y = &mut self.y;
        for i in 0..v.len() {
            y[i] = v[i] * tables.e[i]
                + nv[i] * tables.f1[i]
                + (na[i] + nb[i]) * (2.0 * tables.f2[i])
                + nc[i] * tables.f3[i];
        }
        if !all_finite(y) {
            return Err(FksError::NonFiniteState { t: state.t });
        }
        state.field.coeffs_mut().copy_from_slice(y);
        if new_t == target {
            self.etd_origin = target;
            self.etd_count = 0;
        } else {
            self.etd_count += 1;
        }
        state.t = new_t;
        state.n_steps += 1;
        Ok(())
    }
}

fn all_finite(v: &[Complex64]) -> bool {
    v.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

fn l2_norm(v: &[Complex64]) -> f64 {
    let nyq = v.len() - 1;
    let s: f64 = v
        .iter()
        .enumerate()
        .map(|(k, c)| mode_weight(k, nyq) * c.norm_sqr())
        .sum();
    (TWO_PI * s).sqrt()
}

/// One accepted adaptive step.
pub fn step_adaptive(state: &IntegrationState, model: &Model, cfg: &StepperConfig) -> Result<IntegrationState> {
    let cfg = StepperConfig {
        method: Method::AdaptiveErk,
        ..cfg.clone()
    };
    let mut next = state.clone();
    Integrator::new(model.clone(), cfg)?.step_towards(&mut next, f64::INFINITY)?;
    Ok(next)
}

/// One ETDRK4 step of size `cfg.dt_fixed`.
pub fn step_etdrk4(state: &IntegrationState, model: &Model, cfg: &StepperConfig) -> Result<IntegrationState> {
    let cfg = StepperConfig {
        method: Method::Etdrk4,
        ..cfg.clone()
    };
    let mut next = state.clone();
    Integrator::new(model.clone(), cfg)?.step_towards(&mut next, f64::INFINITY)?;
    Ok(next)
}

/// Hook invoked by [`integrate`] at times it requests.
pub trait Observer {
    /// Earliest pending event time, if any. Events at or before the current
    /// time fire immediately.
    fn next_event(&self) -> Option<f64>;

    /// Called with the state at the pending event time; must advance the
    /// pending event.
    fn observe(&mut self, state: &IntegrationState, record: &mut RunRecord) -> Result<()>;

    /// Called once after the final step.
    fn finish(&mut self, _state: &IntegrationState, _record: &mut RunRecord) -> Result<()> {
        Ok(())
    }

    /// Called with the last good state when the integration aborts.
    fn on_abort(&mut self, _state: &IntegrationState, _record: &mut RunRecord) -> Result<()> {
        Ok(())
    }
}

pub type ObserverSet<'a> = Vec<Box<dyn Observer + 'a>>;

/// Result of [`integrate`]: the record and the state it stopped in.
pub struct Integration {
    pub record: RunRecord,
    pub state: IntegrationState,
}

/// Integrate `state` to `t_end`, stopping exactly at every observer event.
///
/// Integration failures mark the record aborted instead of returning `Err`;
/// `Err` is reserved for observer failures (I/O) and invalid arguments.
pub fn integrate(
    mut state: IntegrationState,
    model: &Model,
    cfg: &StepperConfig,
    t_end: f64,
    observers: &mut ObserverSet<'_>,
) -> Result<Integration> {
    if !(t_end.is_finite() && t_end >= state.t) {
        return Err(FksError::param(format!(
            "t_end = {t_end} must be finite and not before t = {}",
            state.t
        )));
    }
    let started = Instant::now();
    let mut record = RunRecord::new();
    let mut integrator = Integrator::new(model.clone(), cfg.clone())?;
    state.field.zero_mean();
    fire_due(observers, &state, &mut record)?;
    while state.t < t_end {
        let target = observers
            .iter()
            .filter_map(|o| o.next_event())
            .filter(|&e| e > state.t)
            .fold(t_end, f64::min);
        while state.t < target {
            if let Err(e) = integrator.step_towards(&mut state, target) {
                log::warn!("integration aborted at t = {}: {e}", state.t);
                record.status = RunStatus::Aborted;
                record.abort_reason = Some(e.to_string());
                for o in observers.iter_mut() {
                    o.on_abort(&state, &mut record)?;
                }
                record.finalize(&state, started.elapsed().as_secs_f64());
                return Ok(Integration { record, state });
            }
        }
        fire_due(observers, &state, &mut record)?;
    }
    for o in observers.iter_mut() {
        o.finish(&state, &mut record)?;
    }
    record.status = RunStatus::Complete;
    record.finalize(&state, started.elapsed().as_secs_f64());
    Ok(Integration { record, state })
}

fn fire_due(observers: &mut ObserverSet<'_>, state: &IntegrationState, record: &mut RunRecord) -> Result<()> {
    for o in observers.iter_mut() {
        while o.next_event().is_some_and(|e| e <= state.t) {
            o.observe(state, record)?;
        }
    }
    Ok(())
}
