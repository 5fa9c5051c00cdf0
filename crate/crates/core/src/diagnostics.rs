//! Observables sampled along a trajectory.

use serde::{Deserialize, Serialize};

use crate::dynamics::ModelParams;
use crate::error::{FksError, Result};
use crate::record::RunRecord;
use crate::spectral::{
    derivative, lp_norm, sobolev_norm, to_physical, to_spectral, Grid, PhysicalField, SpectralField,
};
use crate::stepper::{IntegrationState, Observer};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSample {
    pub t: f64,
    pub l2: f64,
    pub linf: f64,
    pub dx_linf: f64,
    /// `‖Λ^{(1+δ)/2} u‖_{L²}`
    pub h_half: f64,
    pub mean: f64,
    pub n_critical: usize,
    /// Fitted analyticity radius; `None` when too few modes sit above round-off.
    pub rho: Option<f64>,
    pub dt: f64,
}

pub fn sample(u: &SpectralField, t: f64, p: &ModelParams) -> Result<DiagnosticsSample> {
    let (_, delta) = p.exponents();
    let phys = to_physical(u)?;
    let du = to_physical(&derivative(u, 1)?)?;
    let fit = fit_analyticity_radius(u, default_fit_range(u.grid()));
    Ok(DiagnosticsSample {
        t,
        l2: sobolev_norm(u, 0.0),
        linf: lp_norm(&phys, f64::INFINITY)?,
        dx_linf: lp_norm(&du, f64::INFINITY)?,
        h_half: sobolev_norm(u, 0.5 * (1.0 + delta)),
        mean: u.mean(),
        n_critical: count_sign_changes(du.values()),
        rho: fit.rho,
        dt: 0.0,
    })
}

/// Number of critical points of `u`, counted as sign changes of `∂x u` at the
/// nodes, cyclically.
pub fn count_critical_points(u: &PhysicalField) -> Result<usize> {
    let du = to_physical(&derivative(&to_spectral(u)?, 1)?)?;
    Ok(count_sign_changes(du.values()))
}

/// Cyclic sign changes. Values within round-off of zero (relative to the
/// largest magnitude) take the sign of their predecessor.
fn count_sign_changes(values: &[f64]) -> usize {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 1e-12 * scale;
    let sign = |v: f64| {
        if v > floor {
            Some(true)
        } else if v < -floor {
            Some(false)
        } else {
            None
        }
    };
    let Some(start) = values.iter().position(|&v| sign(v).is_some()) else {
        return 0;
    };
    let n = values.len();
    let mut current = sign(values[start]).unwrap();
    let mut changes = 0;
    for i in 1..=n {
        if let Some(s) = sign(values[(start + i) % n]) {
            if s != current {
                changes += 1;
                current = s;
            }
        }
    }
    changes
}

/// Default wavenumber window `[n/8, n/4]` for the decay fit.
pub fn default_fit_range(grid: &Grid) -> (usize, usize) {
    (grid.n() / 8, grid.n() / 4)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Negated slope of `log|û|` against `ξ`, floored at zero.
    pub rho: Option<f64>,
    pub usable_modes: usize,
    /// RMS residual of the exponential (log-linear) model.
    pub residual_exp: f64,
    /// RMS residual of the algebraic (log-log) model.
    pub residual_alg: f64,
    /// True when algebraic decay explains the spectrum better.
    pub poor_fit: bool,
}

const MIN_FIT_MODES: usize = 8;

/// Least-squares fit of `log|û(ξ)| ≈ a − ρξ` over `ξ ∈ [lo, hi]`, skipping
/// modes below `1e−13·max|û|`.
pub fn fit_analyticity_radius(f: &SpectralField, range: (usize, usize)) -> FitResult {
    let coeffs = f.coeffs();
    let floor = 1e-13 * f.max_abs_coeff();
    let hi = range.1.min(coeffs.len() - 1);
    let pts: Vec<(f64, f64)> = (range.0.max(1)..=hi)
        .filter_map(|k| {
            let a = coeffs[k].norm();
            (a > floor && a > 0.0).then(|| (k as f64, a.ln()))
        })
        .collect();
    if pts.len() < MIN_FIT_MODES {
        return FitResult {
            rho: None,
            usable_modes: pts.len(),
            residual_exp: f64::NAN,
            residual_alg: f64::NAN,
            poor_fit: true,
        };
    }
    let (slope, residual_exp) = least_squares(pts.iter().copied());
    let (_, residual_alg) = least_squares(pts.iter().map(|&(x, y)| (x.ln(), y)));
    FitResult {
        rho: Some((-slope).max(0.0)),
        usable_modes: pts.len(),
        residual_exp,
        residual_alg,
        poor_fit: residual_alg < residual_exp,
    }
}

/// Slope and RMS residual of the least-squares line through `pts`.
fn least_squares(pts: impl Iterator<Item = (f64, f64)> + Clone) -> (f64, f64) {
    let n = pts.clone().count() as f64;
    let (sx, sy) = pts.clone().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (sxx, sxy) = pts.clone().fold((0.0, 0.0), |(a, b), (x, y)| {
        (a + (x - mx).powi(2), b + (x - mx) * (y - my))
    });
    let slope = sxy / sxx;
    let ss: f64 = pts.map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    (slope, (ss / n).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Steady,
    Chaotic,
}

pub const DEFAULT_REGIME_TOL: f64 = 1e-3;
const MIN_WINDOW_SAMPLES: usize = 10;

/// Steady when both `‖u‖_∞` and `‖u‖_{L²}` vary by less than `tol_rel`
/// (peak-to-peak over mean) across samples with `t ∈ window`.
pub fn classify_regime(samples: &[DiagnosticsSample], window: (f64, f64), tol_rel: f64) -> Result<Regime> {
    let spreads = window_spreads(samples, window)?;
    let steady = spreads.linf < tol_rel && spreads.l2 < tol_rel;
    Ok(if steady { Regime::Steady } else { Regime::Chaotic })
}

/// Relative peak-to-peak variation of the norms over a window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSpreads {
    pub linf: f64,
    pub l2: f64,
    pub n_samples: usize,
}

pub fn window_spreads(samples: &[DiagnosticsSample], window: (f64, f64)) -> Result<WindowSpreads> {
    let in_window: Vec<&DiagnosticsSample> = samples.iter().filter(|s| s.t >= window.0 && s.t <= window.1).collect();
    if in_window.len() < MIN_WINDOW_SAMPLES {
        return Err(FksError::TooFewSamples {
            needed: MIN_WINDOW_SAMPLES,
            got: in_window.len(),
        });
    }
    let spread = |get: fn(&DiagnosticsSample) -> f64| {
        let (lo, hi, sum) = in_window
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY, 0.0), |(lo, hi, s), x| {
                let v = get(x);
                (lo.min(v), hi.max(v), s + v)
            });
        let mean = sum / in_window.len() as f64;
        if mean == 0.0 {
            if hi == lo {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (hi - lo) / mean.abs()
        }
    };
    Ok(WindowSpreads {
        linf: spread(|s| s.linf),
        l2: spread(|s| s.l2),
        n_samples: in_window.len(),
    })
}

/// Second half of the record's time span.
pub fn default_window(record: &RunRecord) -> (f64, f64) {
    let t0 = record.samples.first().map_or(0.0, |s| s.t);
    let t1 = record.samples.last().map_or(0.0, |s| s.t);
    (0.5 * (t0 + t1), t1)
}

/// Observer recording a [`DiagnosticsSample`] at the start time, at every
/// multiple of `interval` after it, and at the final time.
///
/// Sample times sit on the grid `k·interval` measured from time zero, so a run
/// resumed from a snapshot samples at the same times as the original run.
pub struct Sampler {
    params: ModelParams,
    start: Option<f64>,
    interval: f64,
    t_end: f64,
    next_index: u64,
}

impl Sampler {
    pub fn new(params: ModelParams, t0: f64, interval: f64, t_end: f64) -> Result<Self> {
        if !(interval.is_finite() && interval > 0.0) {
            return Err(FksError::param(format!(
                "sample interval must be positive, got {interval}"
            )));
        }
        // First grid point strictly after t0 (allowing for round-off in t0).
        let mut next_index = (t0 / interval).floor().max(0.0) as u64;
        while next_index as f64 * interval <= t0 * (1.0 + 1e-12) + 1e-300 {
            next_index += 1;
        }
        Ok(Self {
            params,
            start: Some(t0),
            interval,
            t_end,
            next_index,
        })
    }

    fn push(&self, state: &IntegrationState, record: &mut RunRecord) -> Result<()> {
        let mut s = sample(&state.field, state.t, &self.params)?;
        s.dt = state.dt;
        record.samples.push(s);
        Ok(())
    }
}

impl Observer for Sampler {
    fn next_event(&self) -> Option<f64> {
        if self.start.is_some() {
            return self.start;
        }
        let t = self.next_index as f64 * self.interval;
        (t <= self.t_end * (1.0 + 1e-12)).then_some(t.min(self.t_end))
    }

    fn observe(&mut self, state: &IntegrationState, record: &mut RunRecord) -> Result<()> {
        if self.start.take().is_none() {
            self.next_index += 1;
        }
        if record.samples.last().is_some_and(|s| s.t >= state.t) {
            return Ok(());
        }
        self.push(state, record)
    }

    fn finish(&mut self, state: &IntegrationState, record: &mut RunRecord) -> Result<()> {
        if record.samples.last().map_or(true, |s| s.t < state.t) {
            self.push(state, record)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn params() -> ModelParams {
        ModelParams::fractional(0.1, 1.0, 1.0).unwrap()
    }

    #[test]
    fn sample_of_cosine() {
        let g = Grid::new(64).unwrap();
        let u = SpectralField::from_modes(&g, &[(1, c(0.5, 0.0))]).unwrap();
        let s = sample(&u, 0.0, &params()).unwrap();
        assert_abs_diff_eq!(s.l2, PI.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(s.linf, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.dx_linf, 1.0, epsilon = 1e-3);
        assert_eq!(s.n_critical, 2);
        assert_eq!(s.mean, 0.0);
        // ‖Λ cos x‖ = √π
        assert_abs_diff_eq!(s.h_half, PI.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn sample_of_zero() {
        let g = Grid::new(64).unwrap();
        let s = sample(&SpectralField::zeros(&g), 1.0, &params()).unwrap();
        assert_eq!((s.l2, s.linf, s.dx_linf, s.n_critical), (0.0, 0.0, 0.0, 0));
        assert_eq!(s.rho, None);
    }

    #[test]
    fn critical_points() {
        let g = Grid::new(128).unwrap();
        let count = |f: &dyn Fn(f64) -> f64| count_critical_points(&PhysicalField::from_fn(&g, f).unwrap()).unwrap();
        assert_eq!(count(&|x| x.cos()), 2);
        assert_eq!(count(&|x| (3.0 * x).cos()), 6);
        assert_eq!(count(&|x| (3.0 * x).cos() + 0.1 * x.cos()), 6);
        assert_eq!(count(&|_| 0.0), 0);
    }

    #[test]
    fn critical_points_against_dense_root_count() {
        // Derivative roots of a trigonometric polynomial, counted on a very
        // fine grid, versus the nodal count on a coarser one.
        let f = |x: f64| (2.0 * x).sin() + 0.4 * (5.0 * x).cos() - 0.2 * (7.0 * x + 0.3).sin();
        let df = |x: f64| 2.0 * (2.0 * x).cos() - 2.0 * (5.0 * x).sin() - 1.4 * (7.0 * x + 0.3).cos();
        let dense = 200_000;
        let mut roots = 0;
        for j in 0..dense {
            let a = df(2.0 * PI * j as f64 / dense as f64);
            let b = df(2.0 * PI * (j + 1) as f64 / dense as f64);
            if a.signum() != b.signum() {
                roots += 1;
            }
        }
        let g = Grid::new(256).unwrap();
        let u = PhysicalField::from_fn(&g, f).unwrap();
        assert_eq!(count_critical_points(&u).unwrap(), roots);
    }

    #[test]
    fn fit_of_exponential_spectrum() {
        let g = Grid::new(256).unwrap();
        let modes: Vec<(i64, Complex64)> = (1..=128).map(|k| (k, c((-0.3 * k as f64).exp(), 0.0))).collect();
        let f = SpectralField::from_modes(&g, &modes).unwrap();
        let fit = fit_analyticity_radius(&f, default_fit_range(&g));
        assert_abs_diff_eq!(fit.rho.unwrap(), 0.3, epsilon = 0.01);
        assert!(!fit.poor_fit);
    }

    #[test]
    fn fit_flags_algebraic_decay() {
        let g = Grid::new(256).unwrap();
        let modes: Vec<(i64, Complex64)> = (1..=128).map(|k| (k, c((k as f64).powi(-2), 0.0))).collect();
        let f = SpectralField::from_modes(&g, &modes).unwrap();
        assert!(fit_analyticity_radius(&f, default_fit_range(&g)).poor_fit);
    }

    #[test]
    fn fit_of_white_noise_is_near_zero() {
        let g = Grid::new(1024).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let modes: Vec<(i64, Complex64)> = (1..512)
            .map(|k| (k, Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI))))
            .collect();
        let f = SpectralField::from_modes(&g, &modes).unwrap();
        assert!(fit_analyticity_radius(&f, default_fit_range(&g)).rho.unwrap() < 1e-3);
    }

    #[test]
    fn fit_needs_eight_modes() {
        let g = Grid::new(256).unwrap();
        let f = SpectralField::from_modes(&g, &[(1, c(1.0, 0.0)), (40, c(1e-3, 0.0))]).unwrap();
        let fit = fit_analyticity_radius(&f, default_fit_range(&g));
        assert_eq!(fit.rho, None);
        assert_eq!(fit.usable_modes, 1);
    }

    fn series(values: &[(f64, f64)]) -> Vec<DiagnosticsSample> {
        values
            .iter()
            .enumerate()
            .map(|(i, &(linf, l2))| DiagnosticsSample {
                t: i as f64,
                l2,
                linf,
                dx_linf: 0.0,
                h_half: 0.0,
                mean: 0.0,
                n_critical: 0,
                rho: None,
                dt: 0.0,
            })
            .collect()
    }

    #[test]
    fn regime_classification() {
        let flat = series(&[(1.0, 2.0); 20]);
        assert_eq!(classify_regime(&flat, (0.0, 19.0), 1e-3).unwrap(), Regime::Steady);
        let wiggly: Vec<(f64, f64)> = (0..20).map(|i| (1.0 + 0.1 * (i as f64).sin(), 2.0)).collect();
        assert_eq!(
            classify_regime(&series(&wiggly), (0.0, 19.0), 1e-3).unwrap(),
            Regime::Chaotic
        );
        assert!(matches!(
            classify_regime(&flat, (15.0, 19.0), 1e-3),
            Err(FksError::TooFewSamples { needed: 10, got: 5 })
        ));
    }
}
