use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::snapshot::read_snapshot;
use crate::error::{FksError, Result};
use crate::spectral::{to_physical, to_spectral, Grid, PhysicalField, SpectralField, TWO_PI};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "path", rename_all = "snake_case")]
pub enum IcKind {
    /// `cos x`
    Cos,
    /// `cos x + e^{−x²} sin x` with `x ∈ [−π, π)`
    CosGaussSin,
    /// Random phases, magnitudes `|ξ|^{−3.5}`.
    RandomH3,
    FromSnapshot(PathBuf),
}

impl fmt::Display for IcKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IcKind::Cos => f.write_str("cos"),
            IcKind::CosGaussSin => f.write_str("cos-gauss-sin"),
            IcKind::RandomH3 => f.write_str("random-h3"),
            IcKind::FromSnapshot(p) => write!(f, "snapshot:{}", p.display()),
        }
    }
}

impl FromStr for IcKind {
    type Err = FksError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cos" => Ok(IcKind::Cos),
            "cos-gauss-sin" => Ok(IcKind::CosGaussSin),
            "random-h3" => Ok(IcKind::RandomH3),
            _ => match s.strip_prefix("snapshot:") {
                Some(p) if !p.is_empty() => Ok(IcKind::FromSnapshot(PathBuf::from(p))),
                _ => Err(FksError::param(format!(
                    "unknown initial condition '{s}' (expected cos, cos-gauss-sin, random-h3 or snapshot:<path>)"
                ))),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    #[serde(flatten)]
    pub kind: IcKind,
    #[serde(default = "unit")]
    pub amplitude: f64,
}

fn unit() -> f64 {
    1.0
}

impl InitialCondition {
    pub fn new(kind: IcKind) -> Self {
        Self { kind, amplitude: 1.0 }
    }
}

impl Default for InitialCondition {
    fn default() -> Self {
        Self::new(IcKind::Cos)
    }
}

/// Initial field plus where to resume from.
#[derive(Clone, Debug)]
pub struct InitialData {
    pub field: SpectralField,
    pub t0: f64,
    /// Step size carried over from a snapshot.
    pub dt: Option<f64>,
    /// Mean subtracted to project onto the zero-mean subspace.
    pub mean_removed: f64,
}

/// Zero-mean initial field on `grid`. `seed` only matters for random data.
pub fn make_initial(ic: &InitialCondition, grid: &Grid, seed: u64) -> Result<SpectralField> {
    load_initial(ic, grid, seed).map(|d| d.field)
}

pub fn load_initial(ic: &InitialCondition, grid: &Grid, seed: u64) -> Result<InitialData> {
    let a = ic.amplitude;
    if !a.is_finite() {
        return Err(FksError::param(format!("amplitude must be finite, got {a}")));
    }
    let (mut field, t0, dt) = match &ic.kind {
        IcKind::Cos => (
            SpectralField::from_modes(grid, &[(1, Complex64::new(0.5 * a, 0.0))])?,
            0.0,
            None,
        ),
        IcKind::CosGaussSin => {
            let u = PhysicalField::from_fn(grid, |x| {
                let y = if x >= PI { x - TWO_PI } else { x };
                a * (x.cos() + (-y * y).exp() * x.sin())
            })?;
            (to_spectral(&u)?, 0.0, None)
        }
        IcKind::RandomH3 => (random_h3(grid, a, seed)?, 0.0, None),
        IcKind::FromSnapshot(path) => {
            let snap = read_snapshot(path)?;
            if snap.header.n != grid.n() {
                return Err(FksError::GridMismatch {
                    expected: grid.n(),
                    found: snap.header.n,
                });
            }
            let u = PhysicalField::new(grid, snap.values.iter().map(|v| a * v).collect())?;
            (to_spectral(&u)?, snap.header.t, snap.header.dt)
        }
    };
    let mean_removed = field.mean();
    field.zero_mean();
    Ok(InitialData {
        field,
        t0,
        dt,
        mean_removed,
    })
}

fn random_h3(grid: &Grid, amplitude: f64, seed: u64) -> Result<SpectralField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![Complex64::default(); grid.modes()];
    for (k, c) in coeffs.iter_mut().enumerate().take(grid.nyquist()).skip(1) {
        let phase = TWO_PI * rng.gen::<f64>();
        *c = Complex64::from_polar((k as f64).powf(-3.5), phase);
    }
    let f = SpectralField::from_half_spectrum(grid, coeffs)?;
    let peak = to_physical(&f)?.max_abs();
    Ok(f.scaled(amplitude / peak))
}
