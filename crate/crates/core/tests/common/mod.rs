//! Property checks shared by the proptest suites and the acceptance report.
//! Each returns the measured defect, to be compared with its tolerance.
#![allow(dead_code)]

use fks_core::dynamics::{nonlinear_term, rhs};
use fks_core::experiments::{execute, IcKind, InitialCondition, RunConfig};
use fks_core::spectral::{frac_deriv, hilbert, sobolev_norm, to_physical, to_spectral};
use fks_core::stepper::{integrate, IntegrationState, Method};
use fks_core::{Grid, Model, ModelParams, PhysicalField, SpectralField, StepperConfig};
use num_complex::Complex64;

pub const ROUNDTRIP_TOL: f64 = 1e-13;
pub const SEMIGROUP_TOL: f64 = 1e-12;
pub const HILBERT_TOL: f64 = 1e-15;
pub const PLANCHEREL_TOL: f64 = 1e-12;
pub const MEAN_TOL: f64 = 1e-14;
pub const ODD_DRIFT_TOL: f64 = 1e-8;
pub const ORTHOGONALITY_TOL: f64 = 1e-10;
pub const CONTINUATION_TOL: f64 = 1e-10;

pub const GRID_SIZES: [usize; 6] = [8, 16, 32, 64, 128, 256];

pub fn spectral(n: usize, values: &[f64]) -> SpectralField {
    let g = Grid::new(n).unwrap();
    to_spectral(&PhysicalField::new(&g, values.to_vec()).unwrap()).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn roundtrip(n: usize, values: &[f64]) -> f64 {
    let back = to_physical(&spectral(n, values)).unwrap();
    max_diff(back.values(), values)
}

/// `Λ^b Λ^a f` against `Λ^{a+b} f`, relative to the largest coefficient.
pub fn semigroup(n: usize, values: &[f64], a: f64, b: f64) -> f64 {
    let f = spectral(n, values);
    let two_step = frac_deriv(&frac_deriv(&f, a).unwrap(), b).unwrap();
    let one_step = frac_deriv(&f, a + b).unwrap();
    two_step.max_coeff_diff(&one_step).unwrap() / one_step.max_abs_coeff().max(1e-300)
}

/// `H H f + f` for `f` without mean and Nyquist modes.
pub fn hilbert_involution(n: usize, values: &[f64]) -> f64 {
    let mut f = spectral(n, values);
    let nyq = f.grid().nyquist();
    f.coeffs_mut()[0] = Complex64::default();
    f.coeffs_mut()[nyq] = Complex64::default();
    hilbert(&hilbert(&f)).max_coeff_diff(&f.scaled(-1.0)).unwrap()
}

/// Relative gap between nodal and spectral `‖u‖²`.
pub fn plancherel(n: usize, values: &[f64]) -> f64 {
    let g = Grid::new(n).unwrap();
    let physical_sq: f64 = values.iter().map(|v| v * v).sum::<f64>() * g.dx();
    let spectral_sq = sobolev_norm(&spectral(n, values), 0.0).powi(2);
    (physical_sq - spectral_sq).abs() / physical_sq.max(1e-300)
}

/// `|⟨u, N(u)⟩| / (‖u‖ ‖N(u)‖)`.
pub fn orthogonality(n: usize, values: &[f64]) -> f64 {
    let f = spectral(n, values);
    let nl = nonlinear_term(&f);
    let scale = sobolev_norm(&f, 0.0) * sobolev_norm(&nl, 0.0);
    f.inner(&nl).unwrap().abs() / scale.max(1e-300)
}

/// Mean of the right-hand side for data with mean `shift`, and of the state
/// after integrating zero-mean data; the larger of the two.
pub fn mean_conservation(amps: &[f64], shift: f64) -> f64 {
    let g = Grid::new(64).unwrap();
    let p = ModelParams::fractional(0.2, 1.0, 1.0).unwrap();
    let values: Vec<f64> = (0..64)
        .map(|j| {
            let x = g.node(j);
            amps.iter()
                .enumerate()
                .map(|(k, a)| a * ((k + 1) as f64 * x + k as f64).cos())
                .sum::<f64>()
                / 8.0
        })
        .collect();
    let mut f = spectral(64, &values);
    f.coeffs_mut()[0] = Complex64::new(shift, 0.0);
    let from_rhs = rhs(&p, &f).unwrap().mean().abs();
    let model = Model::new(p, &g).unwrap();
    let out = integrate(
        IntegrationState::new(f, 0.0, 1e-2),
        &model,
        &StepperConfig::etdrk4(1e-2),
        0.5,
        &mut Vec::new(),
    )
    .unwrap();
    from_rhs.max(out.state.field.mean().abs())
}

/// Largest real part of the coefficients after integrating sine-series data
/// to `t = 1`; zero for an exactly odd solution.
pub fn odd_symmetry_drift(amps: &[f64], adaptive: bool) -> f64 {
    let g = Grid::new(64).unwrap();
    let modes: Vec<(i64, Complex64)> = amps
        .iter()
        .enumerate()
        .map(|(k, &a)| ((k + 1) as i64, Complex64::new(0.0, -0.5 * a)))
        .collect();
    let f = SpectralField::from_modes(&g, &modes).unwrap();
    let model = Model::new(ModelParams::fractional(0.1, 1.0, 1.0).unwrap(), &g).unwrap();
    let mut stepper = StepperConfig::etdrk4(5e-3);
    if adaptive {
        stepper.method = Method::AdaptiveErk;
    }
    let out = integrate(
        IntegrationState::new(f, 0.0, 1e-3),
        &model,
        &stepper,
        1.0,
        &mut Vec::new(),
    )
    .unwrap();
    out.state.field.coeffs().iter().fold(0.0f64, |m, c| m.max(c.re.abs()))
}

/// Save at `t_snap`, reload, continue to `t = 1`; the larger of the gap at
/// the next sample (in `‖u‖_{L²}`) and the final coefficient gap.
pub fn snapshot_continuation(seed: u64, t_snap: f64, adaptive: bool) -> f64 {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::new(ModelParams::fractional(0.2, 1.2, 0.8).unwrap(), 64, 1.0);
    cfg.ic = InitialCondition::new(IcKind::RandomH3);
    cfg.seed = seed;
    cfg.stepper = StepperConfig::etdrk4(1e-2);
    if adaptive {
        cfg.stepper.method = Method::AdaptiveErk;
    }
    cfg.sample_interval = 0.1;
    cfg.snapshot_times = vec![t_snap];
    cfg.out_dir = Some(dir.path().to_path_buf());
    let whole = execute(&cfg).unwrap();

    let mut resumed = cfg.clone();
    resumed.ic = InitialCondition::new(IcKind::FromSnapshot(whole.record.snapshots[0].path.clone()));
    resumed.out_dir = None;
    let tail = execute(&resumed).unwrap();
    let next = &tail.record.samples[1];
    let reference = whole.record.sample_near(next.t).unwrap();
    if (reference.t - next.t).abs() > 1e-12 {
        return f64::INFINITY;
    }
    (reference.l2 - next.l2)
        .abs()
        .max(whole.state.field.max_coeff_diff(&tail.state.field).unwrap())
}
