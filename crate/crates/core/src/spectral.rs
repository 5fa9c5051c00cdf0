//! Fourier representation of real, 2π-periodic fields.
//!
//! A [`SpectralField`] stores the Fourier-series coefficients
//! `u(x) = Σ_ξ û(ξ) e^{iξx}` for the wavenumbers `ξ = 0..=n/2` only. The
//! negative half is implied by Hermitian symmetry `û(−ξ) = conj(û(ξ))`, so the
//! symmetry holds exactly by construction; the only coefficients that could
//! break it are the imaginary parts of the mean and the Nyquist mode, which
//! [`to_physical`] checks.
//!
//! All norms carry the 2π factor of the torus, i.e. they equal the integrals
//! over `[0, 2π)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use crate::error::{FksError, Result};

/// Length of the periodic domain.
pub const TWO_PI: f64 = 2.0 * PI;

const SYMMETRY_TOL: f64 = 1e-10;

struct Plans {
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
}

/// Uniform collocation grid `x_j = 2πj/n` on the torus.
///
/// Cloning is cheap; FFT plans are shared behind an `Arc` and are immutable,
/// so a grid can be used from many threads at once.
#[derive(Clone)]
pub struct Grid {
    n: usize,
    dealias_cutoff: usize,
    plans: Arc<Plans>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("dealias_cutoff", &self.dealias_cutoff)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.dealias_cutoff == other.dealias_cutoff
    }
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(FksError::InvalidGrid(format!("n must be even and at least 8, got {n}")));
        }
        let mut planner = RealFftPlanner::<f64>::new();
        let plans = Plans {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        };
        Ok(Self {
            n,
            dealias_cutoff: default_dealias_cutoff(n),
            plans: Arc::new(plans),
        })
    }

    /// Override the two-thirds cutoff, e.g. for convergence studies.
    pub fn with_dealias_cutoff(mut self, cutoff: usize) -> Result<Self> {
        if cutoff > self.n / 2 {
            return Err(FksError::InvalidGrid(format!(
                "dealias cutoff {cutoff} exceeds the Nyquist wavenumber {}",
                self.n / 2
            )));
        }
        self.dealias_cutoff = cutoff;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored coefficients, `n/2 + 1`.
    pub fn modes(&self) -> usize {
        self.n / 2 + 1
    }

    pub fn nyquist(&self) -> usize {
        self.n / 2
    }

    pub fn dealias_cutoff(&self) -> usize {
        self.dealias_cutoff
    }

    pub fn length(&self) -> f64 {
        TWO_PI
    }

    pub fn dx(&self) -> f64 {
        TWO_PI / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        TWO_PI * j as f64 / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    pub fn workspace(&self) -> FftWorkspace {
        FftWorkspace::new(self)
    }
}

/// Largest cutoff `K` with `3K < n`, so that quadratic products of modes
/// `|ξ| ≤ K` never alias back into `|ξ| ≤ K`. Equals `floor(n/3)` whenever
/// `n` is not a multiple of three (in particular for every power of two).
fn default_dealias_cutoff(n: usize) -> usize {
    (n - 1) / 3
}

/// Scratch buffers for repeated transforms on one grid.
///
/// Owned per caller (one per integrator, one per thread); never shared.
pub struct FftWorkspace {
    grid: Grid,
    real: Vec<f64>,
    spec: Vec<Complex64>,
    scratch_fwd: Vec<Complex64>,
    scratch_inv: Vec<Complex64>,
}

impl FftWorkspace {
    pub fn new(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            real: vec![0.0; grid.n],
            spec: vec![Complex64::default(); grid.modes()],
            scratch_fwd: grid.plans.forward.make_scratch_vec(),
            scratch_inv: grid.plans.inverse.make_scratch_vec(),
        }
    }

    /// Physical values → normalised Fourier coefficients (`ξ = 0..=n/2`).
    pub fn forward(&mut self, values: &[f64], out: &mut [Complex64]) {
        self.real.copy_from_slice(values);
        self.grid
            .plans
            .forward
            .process_with_scratch(&mut self.real, out, &mut self.scratch_fwd)
            .expect("buffer lengths are fixed by the grid");
        let scale = 1.0 / self.grid.n as f64;
        for c in out.iter_mut() {
            *c *= scale;
        }
        // Exactly real by symmetry; clear round-off.
        out[0].im = 0.0;
        let last = out.len() - 1;
        out[last].im = 0.0;
    }

    /// Fourier coefficients → physical values. The imaginary parts of the mean
    /// and Nyquist coefficients are ignored.
    pub fn inverse(&mut self, coeffs: &[Complex64], out: &mut [f64]) {
        self.spec.copy_from_slice(coeffs);
        self.spec[0].im = 0.0;
        let last = self.spec.len() - 1;
        self.spec[last].im = 0.0;
        self.grid
            .plans
            .inverse
            .process_with_scratch(&mut self.spec, out, &mut self.scratch_inv)
            .expect("buffer lengths are fixed by the grid");
    }
}

/// Collocation values `u(x_j)`.
#[derive(Clone, Debug)]
pub struct PhysicalField {
    grid: Grid,
    values: Vec<f64>,
}

impl PhysicalField {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(FksError::GridMismatch {
                expected: grid.n,
                found: values.len(),
            });
        }
        check_finite(&values)?;
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    /// Sample `f` at the grid nodes.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().into_iter().map(f).collect())
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.n],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(FksError::NonFinite {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

/// Fourier coefficients of a real field, `ξ = 0..=n/2`.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![Complex64::default(); grid.modes()],
        }
    }

    /// Build from the non-negative half spectrum. Fails on non-finite input or
    /// on a mean / Nyquist coefficient that is not real.
    pub fn from_half_spectrum(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.modes() {
            return Err(FksError::GridMismatch {
                expected: grid.modes(),
                found: coeffs.len(),
            });
        }
        if let Some(i) = coeffs.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(FksError::NonFinite {
                index: i,
                value: coeffs[i].norm(),
            });
        }
        let field = Self {
            grid: grid.clone(),
            coeffs,
        };
        field.check_symmetry()?;
        Ok(field)
    }

    /// Build from `(ξ, û(ξ))` pairs; the conjugate mode is implied. Negative
    /// wavenumbers are accepted and conjugated.
    pub fn from_modes(grid: &Grid, modes: &[(i64, Complex64)]) -> Result<Self> {
        let mut field = Self::zeros(grid);
        for &(xi, c) in modes {
            let k = xi.unsigned_abs() as usize;
            if k > grid.nyquist() {
                return Err(FksError::param(format!(
                    "wavenumber {xi} is not representable on n = {}",
                    grid.n
                )));
            }
            field.coeffs[k] += if xi < 0 { c.conj() } else { c };
        }
        field.check_symmetry()?;
        Ok(field)
    }

    /// Build from the full spectrum ordered `ξ = −n/2+1, …, n/2`, checking
    /// Hermitian symmetry to 1e−10 relative.
    pub fn from_full_spectrum(grid: &Grid, full: &[Complex64]) -> Result<Self> {
        let n = grid.n;
        if full.len() != n {
            return Err(FksError::GridMismatch {
                expected: n,
                found: full.len(),
            });
        }
        let offset = n / 2 - 1;
        let scale = full.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        for k in 1..n / 2 {
            let pos = full[offset + k];
            let neg = full[offset - k];
            let defect = (pos - neg.conj()).norm();
            if defect > SYMMETRY_TOL * scale.max(f64::MIN_POSITIVE) {
                return Err(FksError::SymmetryViolation {
                    wavenumber: k as i64,
                    defect: defect / scale,
                });
            }
        }
        let coeffs = (0..=n / 2).map(|k| full[offset + k]).collect();
        Self::from_half_spectrum(grid, coeffs)
    }

    pub fn to_full_spectrum(&self) -> Vec<Complex64> {
        let n = self.grid.n;
        (0..n).map(|i| self.coeff(i as i64 - (n as i64 / 2 - 1))).collect()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Coefficients for `ξ = 0..=n/2`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// `û(ξ)` for any signed wavenumber; zero outside the resolved band.
    pub fn coeff(&self, xi: i64) -> Complex64 {
        let k = xi.unsigned_abs() as usize;
        if k > self.grid.nyquist() {
            return Complex64::default();
        }
        if xi < 0 {
            self.coeffs[k].conj()
        } else {
            self.coeffs[k]
        }
    }

    /// Mean value `(1/2π)∫u`, i.e. `û(0)`.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn zero_mean(&mut self) {
        self.coeffs[0] = Complex64::default();
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Apply a Fourier multiplier given on `ξ ≥ 0`. The symbol must satisfy
    /// `m(−ξ) = conj(m(ξ))` for the result to stay real.
    pub fn apply_symbol(&self, symbol: impl Fn(usize) -> Complex64) -> Self {
        let coeffs = self.coeffs.iter().enumerate().map(|(k, c)| symbol(k) * c).collect();
        Self {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    /// `a·self + b·other`.
    pub fn lin_comb(&self, a: f64, other: &SpectralField, b: f64) -> Result<Self> {
        self.check_same_grid(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(x, y)| x * a + y * b)
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            coeffs,
        })
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.apply_symbol(|_| Complex64::new(a, 0.0))
    }

    /// `∫_T u v dx` by Plancherel.
    pub fn inner(&self, other: &SpectralField) -> Result<f64> {
        self.check_same_grid(other)?;
        let nyq = self.grid.nyquist();
        let sum: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .enumerate()
            .map(|(k, (a, b))| mode_weight(k, nyq) * (a * b.conj()).re)
            .sum();
        Ok(TWO_PI * sum)
    }

    /// Largest relative distance between two fields in coefficient max-norm.
    pub fn max_coeff_diff(&self, other: &SpectralField) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm())))
    }

    pub(crate) fn check_same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(FksError::GridMismatch {
                expected: self.grid.n,
                found: other.grid.n,
            });
        }
        Ok(())
    }

    fn check_symmetry(&self) -> Result<()> {
        let scale = self.max_abs_coeff();
        if scale == 0.0 {
            return Ok(());
        }
        let nyq = self.grid.nyquist();
        for (k, xi) in [(0usize, 0i64), (nyq, nyq as i64)] {
            let defect = self.coeffs[k].im.abs() / scale;
            if defect > SYMMETRY_TOL {
                return Err(FksError::SymmetryViolation { wavenumber: xi, defect });
            }
        }
        Ok(())
    }
}

/// Multiplicity of stored mode `k` in the full index set `−n/2+1..=n/2`.
pub(crate) fn mode_weight(k: usize, nyquist: usize) -> f64 {
    if k == 0 || k == nyquist {
        1.0
    } else {
        2.0
    }
}

/// `|ξ|^s`, with the `ξ = 0` value fixed to 1 for `s = 0` and 0 otherwise.
pub fn abs_power(xi: usize, s: f64) -> f64 {
    if xi == 0 {
        if s == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        (xi as f64).powf(s)
    }
}

pub fn to_spectral(u: &PhysicalField) -> Result<SpectralField> {
    check_finite(&u.values)?;
    let mut out = SpectralField::zeros(&u.grid);
    u.grid.workspace().forward(&u.values, &mut out.coeffs);
    Ok(out)
}

pub fn to_physical(f: &SpectralField) -> Result<PhysicalField> {
    f.check_symmetry()?;
    if !f.is_finite() {
        return Err(FksError::NonFinite {
            index: f.coeffs.iter().position(|c| !c.norm().is_finite()).unwrap_or(0),
            value: f64::NAN,
        });
    }
    let mut values = vec![0.0; f.grid.n];
    f.grid.workspace().inverse(&f.coeffs, &mut values);
    Ok(PhysicalField {
        grid: f.grid.clone(),
        values,
    })
}

/// `Λ^s u`, symbol `|ξ|^s`.
pub fn frac_deriv(f: &SpectralField, s: f64) -> Result<SpectralField> {
    if !s.is_finite() || s < 0.0 {
        return Err(FksError::param(format!(
            "fractional order must be finite and non-negative, got {s}"
        )));
    }
    Ok(f.apply_symbol(|k| Complex64::new(abs_power(k, s), 0.0)))
}

/// Periodic Hilbert transform, symbol `−i sgn ξ`. The Nyquist mode is zeroed
/// since the symbol is odd.
pub fn hilbert(f: &SpectralField) -> SpectralField {
    let nyq = f.grid.nyquist();
    f.apply_symbol(|k| {
        if k == 0 || k == nyq {
            Complex64::default()
        } else {
            Complex64::new(0.0, -1.0)
        }
    })
}

/// `∂x^order u`, symbol `(iξ)^order`; Nyquist zeroed for odd orders.
pub fn derivative(f: &SpectralField, order: u32) -> Result<SpectralField> {
    if order == 0 {
        return Err(FksError::param("derivative order must be at least 1"));
    }
    let nyq = f.grid.nyquist();
    let odd = order % 2 == 1;
    Ok(f.apply_symbol(|k| {
        if odd && k == nyq {
            Complex64::default()
        } else {
            Complex64::new(0.0, k as f64).powu(order)
        }
    }))
}

/// Zero every mode with `|ξ|` above the grid's dealias cutoff.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let cutoff = f.grid.dealias_cutoff;
    f.apply_symbol(|k| {
        if k > cutoff {
            Complex64::default()
        } else {
            Complex64::new(1.0, 0.0)
        }
    })
}

/// `‖Λ^s u‖_{L²(T)} = sqrt(2π Σ_ξ |ξ|^{2s} |û(ξ)|²)`.
pub fn sobolev_norm(f: &SpectralField, s: f64) -> f64 {
    let nyq = f.grid.nyquist();
    let sum: f64 = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| mode_weight(k, nyq) * abs_power(k, 2.0 * s) * c.norm_sqr())
        .sum();
    (TWO_PI * sum).sqrt()
}

/// `‖u‖_{L^p(T)}` by the trapezoidal rule; `p = f64::INFINITY` gives the max norm.
pub fn lp_norm(u: &PhysicalField, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(FksError::param(format!("L^p exponent must be >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(u.max_abs());
    }
    let dx = u.grid.dx();
    let sum: f64 = u.values.iter().map(|v| v.abs().powf(p)).sum();
    Ok((dx * sum).powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(6).is_err());
        assert!(Grid::new(9).is_err());
        assert!(Grid::new(8).is_ok());
        assert!(grid(16).with_dealias_cutoff(9).is_err());
    }

    #[test]
    fn default_cutoff_is_two_thirds_rule() {
        assert_eq!(grid(16).dealias_cutoff(), 5);
        assert_eq!(grid(1024).dealias_cutoff(), 341);
        assert_eq!(grid(4096).dealias_cutoff(), 1365);
    }

    #[test]
    fn cosine_has_two_half_coefficients() {
        let g = grid(8);
        let u = PhysicalField::from_fn(&g, f64::cos).unwrap();
        let f = to_spectral(&u).unwrap();
        for xi in -3i64..=4 {
            let expected = if xi.abs() == 1 { 0.5 } else { 0.0 };
            assert_abs_diff_eq!(f.coeff(xi).re, expected, epsilon = 1e-14);
            assert_abs_diff_eq!(f.coeff(xi).im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn sine_three() {
        let g = grid(16);
        let u = PhysicalField::from_fn(&g, |x| (3.0 * x).sin()).unwrap();
        let f = to_spectral(&u).unwrap();
        assert_abs_diff_eq!(f.coeff(3).im, -0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(f.coeff(-3).im, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(f.coeff(3).re, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn zero_field_roundtrip() {
        let g = grid(8);
        let f = to_spectral(&PhysicalField::zeros(&g)).unwrap();
        assert_eq!(f.max_abs_coeff(), 0.0);
        assert_eq!(to_physical(&f).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn non_finite_input_names_index() {
        let g = grid(8);
        let err = PhysicalField::new(&g, vec![0.0, 1.0, f64::NAN, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, FksError::NonFinite { index: 2, .. }), "{err}");
    }

    #[test]
    fn synthesis_of_cosine() {
        let g = grid(8);
        let f = SpectralField::from_modes(&g, &[(1, c(0.5, 0.0))]).unwrap();
        let u = to_physical(&f).unwrap();
        for (j, v) in u.values().iter().enumerate() {
            assert_abs_diff_eq!(*v, g.node(j).cos(), epsilon = 1e-15);
        }
    }

    #[test]
    fn asymmetric_full_spectrum_rejected() {
        let g = grid(8);
        let mut full = vec![c(0.0, 0.0); 8];
        // ξ = 2 at index 3 + 2, ξ = −2 at index 1
        full[5] = c(1.0, 0.5);
        full[1] = c(1.0, 0.5);
        assert!(matches!(
            SpectralField::from_full_spectrum(&g, &full),
            Err(FksError::SymmetryViolation { wavenumber: 2, .. })
        ));
        full[1] = c(1.0, -0.5);
        let f = SpectralField::from_full_spectrum(&g, &full).unwrap();
        assert_eq!(f.coeff(2), c(1.0, 0.5));
        assert_eq!(f.to_full_spectrum(), full);
    }

    #[test]
    fn complex_mean_rejected_by_synthesis() {
        let g = grid(8);
        let mut coeffs = vec![c(0.0, 0.0); 5];
        coeffs[1] = c(1.0, 0.0);
        coeffs[0] = c(0.0, 0.3);
        assert!(SpectralField::from_half_spectrum(&g, coeffs).is_err());
    }

    #[test]
    fn fractional_derivative_examples() {
        let g = grid(32);
        let cos4 = SpectralField::from_modes(&g, &[(4, c(0.5, 0.0))]).unwrap();
        let out = frac_deriv(&cos4, 0.5).unwrap();
        assert_abs_diff_eq!(out.coeff(4).re, 1.0, epsilon = 1e-14);

        let sin2 = SpectralField::from_modes(&g, &[(2, c(0.0, -0.5))]).unwrap();
        let out = frac_deriv(&sin2, 1.0).unwrap();
        assert_abs_diff_eq!(out.coeff(2).im, -1.0, epsilon = 1e-14);

        let same = frac_deriv(&sin2, 0.0).unwrap();
        assert_eq!(same.coeffs(), sin2.coeffs());
        assert!(frac_deriv(&sin2, -0.5).is_err());
    }

    #[test]
    fn zero_order_keeps_mean_positive_order_kills_it() {
        let g = grid(8);
        let f = SpectralField::from_modes(&g, &[(0, c(2.0, 0.0)), (1, c(0.5, 0.0))]).unwrap();
        assert_eq!(frac_deriv(&f, 0.0).unwrap().mean(), 2.0);
        assert_eq!(frac_deriv(&f, 0.7).unwrap().mean(), 0.0);
    }

    #[test]
    fn hilbert_of_cos_and_sin() {
        let g = grid(16);
        let cos1 = SpectralField::from_modes(&g, &[(1, c(0.5, 0.0))]).unwrap();
        let sin1 = SpectralField::from_modes(&g, &[(1, c(0.0, -0.5))]).unwrap();
        assert_eq!(hilbert(&cos1).coeffs(), sin1.coeffs());
        let minus_cos = cos1.scaled(-1.0);
        assert_eq!(hilbert(&sin1).coeffs(), minus_cos.coeffs());
    }

    #[test]
    fn derivative_examples() {
        let g = grid(16);
        let sin3 = SpectralField::from_modes(&g, &[(3, c(0.0, -0.5))]).unwrap();
        let d = derivative(&sin3, 1).unwrap();
        assert_abs_diff_eq!(d.coeff(3).re, 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(d.coeff(3).im, 0.0, epsilon = 1e-14);

        let cos2 = SpectralField::from_modes(&g, &[(2, c(0.5, 0.0))]).unwrap();
        let d2 = derivative(&cos2, 2).unwrap();
        assert_abs_diff_eq!(d2.coeff(2).re, -2.0, epsilon = 1e-14);

        let nyq = SpectralField::from_modes(&g, &[(8, c(1.0, 0.0))]).unwrap();
        assert_eq!(derivative(&nyq, 1).unwrap().max_abs_coeff(), 0.0);
        assert_eq!(derivative(&nyq, 2).unwrap().coeff(8).re, -64.0);
        assert!(derivative(&nyq, 0).is_err());
    }

    #[test]
    fn dealias_examples() {
        let g = grid(16);
        let f = SpectralField::from_modes(&g, &[(5, c(1.0, 0.0)), (6, c(1.0, 0.0))]).unwrap();
        let d = dealias(&f);
        assert_eq!(d.coeff(5).re, 1.0);
        assert_eq!(d.coeff(6).re, 0.0);
        let low = SpectralField::from_modes(&g, &[(2, c(0.3, 0.1))]).unwrap();
        assert_eq!(dealias(&low).coeffs(), low.coeffs());
    }

    #[test]
    fn norm_examples() {
        let g = grid(32);
        let cos1 = SpectralField::from_modes(&g, &[(1, c(0.5, 0.0))]).unwrap();
        assert_abs_diff_eq!(sobolev_norm(&cos1, 0.0), PI.sqrt(), epsilon = 1e-14);
        let sin2 = SpectralField::from_modes(&g, &[(2, c(0.0, -0.5))]).unwrap();
        assert_abs_diff_eq!(sobolev_norm(&sin2, 1.0), 2.0 * PI.sqrt(), epsilon = 1e-14);
        assert_eq!(sobolev_norm(&SpectralField::zeros(&g), 0.5), 0.0);

        let u = to_physical(&cos1).unwrap();
        assert_abs_diff_eq!(lp_norm(&u, f64::INFINITY).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(lp_norm(&u, 4.0).unwrap(), (3.0 * PI / 4.0).powf(0.25), epsilon = 1e-13);
        assert_abs_diff_eq!(lp_norm(&u, 2.0).unwrap(), sobolev_norm(&cos1, 0.0), epsilon = 1e-10);
        assert!(lp_norm(&u, 0.5).is_err());
    }

    #[test]
    fn inner_product_matches_quadrature() {
        let g = grid(16);
        let a = PhysicalField::from_fn(&g, |x| x.cos() + 0.3 * (2.0 * x).sin()).unwrap();
        let b = PhysicalField::from_fn(&g, |x| (2.0 * x).sin() - 0.1 * (8.0 * x).cos()).unwrap();
        let quad: f64 = a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum::<f64>() * g.dx();
        let fa = to_spectral(&a).unwrap();
        let fb = to_spectral(&b).unwrap();
        assert_abs_diff_eq!(fa.inner(&fb).unwrap(), quad, epsilon = 1e-13);
    }
}
