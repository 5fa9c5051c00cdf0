//! The model right-hand side `u_t = Λ^γ u − εΛ^{1+δ}u − ∂x(u²/2)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FksError, Result};
use crate::spectral::{abs_power, FftWorkspace, Grid, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Symbol `|ξ|^γ − ε|ξ|^{1+δ}`.
    Fractional,
    /// Kuramoto–Sivashinsky symbol `ξ² − εξ⁴`; `gamma`/`delta` are ignored.
    #[serde(rename = "classic_ks")]
    ClassicKS,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Fractional => "fractional",
            Variant::ClassicKS => "classic_ks",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub variant: Variant,
    pub eps: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl ModelParams {
    pub fn fractional(eps: f64, gamma: f64, delta: f64) -> Result<Self> {
        let p = Self {
            variant: Variant::Fractional,
            eps,
            gamma,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn classic_ks(eps: f64) -> Result<Self> {
        let p = Self {
            variant: Variant::ClassicKS,
            eps,
            gamma: 2.0,
            delta: 3.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(FksError::param(format!("eps must be positive, got {}", self.eps)));
        }
        if self.variant == Variant::ClassicKS {
            return Ok(());
        }
        let (g, d) = (self.gamma, self.delta);
        if !(d.is_finite() && d > 0.0 && d <= 1.0) {
            return Err(FksError::param(format!("delta must lie in (0, 1], got {d}")));
        }
        if !(g.is_finite() && g >= 0.0 && g < 1.0 + d) {
            return Err(FksError::param(format!(
                "gamma must satisfy 0 <= gamma < 1 + delta = {}, got {g}",
                1.0 + d
            )));
        }
        Ok(())
    }

    /// Effective `(γ, δ)`: the stored values, or `(2, 3)` for ClassicKS.
    pub fn exponents(&self) -> (f64, f64) {
        match self.variant {
            Variant::Fractional => (self.gamma, self.delta),
            Variant::ClassicKS => (2.0, 3.0),
        }
    }

    /// Copy with one named parameter replaced (`eps`, `gamma` or `delta`).
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        let mut p = *self;
        match name {
            "eps" => p.eps = value,
            "gamma" => p.gamma = value,
            "delta" => p.delta = value,
            other => return Err(FksError::param(format!("unknown parameter axis '{other}'"))),
        }
        p.validate()?;
        Ok(p)
    }
}

/// Linear growth rate `σ(ξ)` of mode `ξ`.
pub fn linear_symbol(p: &ModelParams, xi: i64) -> f64 {
    let k = xi.unsigned_abs() as usize;
    let (gamma, delta) = p.exponents();
    abs_power(k, gamma) - p.eps * abs_power(k, 1.0 + delta)
}

/// Edge of the unstable band, the positive root of `σ`.
pub fn k_star(p: &ModelParams) -> f64 {
    let (gamma, delta) = p.exponents();
    p.eps.powf(-1.0 / (1.0 + delta - gamma))
}

/// `−∂x(u²/2)` with the product formed on the dealiased field and the result
/// truncated to the dealiased band.
pub fn nonlinear_term(f: &SpectralField) -> SpectralField {
    let mut ws = NonlinearWorkspace::new(f.grid());
    let mut out = SpectralField::zeros(f.grid());
    ws.apply(f.coeffs(), out.coeffs_mut());
    out
}

/// Full right-hand side `σ(ξ)û(ξ) + N(û)(ξ)`.
pub fn rhs(p: &ModelParams, f: &SpectralField) -> Result<SpectralField> {
    let model = Model::new(*p, f.grid())?;
    let mut ws = NonlinearWorkspace::new(f.grid());
    let mut out = SpectralField::zeros(f.grid());
    model.rhs_into(&mut ws, f.coeffs(), out.coeffs_mut());
    Ok(out)
}

/// Scratch space for repeated nonlinear-term evaluations.
pub struct NonlinearWorkspace {
    fft: FftWorkspace,
    cutoff: usize,
    spec: Vec<Complex64>,
    phys: Vec<f64>,
}

impl NonlinearWorkspace {
    pub fn new(grid: &Grid) -> Self {
        Self {
            fft: grid.workspace(),
            cutoff: grid.dealias_cutoff(),
            spec: vec![Complex64::default(); grid.modes()],
            phys: vec![0.0; grid.n()],
        }
    }

    /// Write `−∂x(u²/2)` for the half spectrum `input` into `out`.
    pub fn apply(&mut self, input: &[Complex64], out: &mut [Complex64]) {
        let cutoff = self.cutoff;
        for (k, (s, c)) in self.spec.iter_mut().zip(input).enumerate() {
            *s = if k <= cutoff { *c } else { Complex64::default() };
        }
        self.fft.inverse(&self.spec, &mut self.phys);
        for v in self.phys.iter_mut() {
            *v *= *v;
        }
        self.fft.forward(&self.phys, out);
        for (k, c) in out.iter_mut().enumerate() {
            *c = if k <= cutoff {
                // −(iξ/2)·ĉ
                Complex64::new(0.5 * k as f64 * c.im, -0.5 * k as f64 * c.re)
            } else {
                Complex64::default()
            };
        }
    }
}

/// Model bound to a grid: the tabulated symbol plus a switch for the
/// nonlinearity (off for linear dispersion checks).
#[derive(Clone, Debug)]
pub struct Model {
    params: ModelParams,
    grid: Grid,
    symbol: Vec<f64>,
    nonlinear: bool,
}

impl Model {
    pub fn new(params: ModelParams, grid: &Grid) -> Result<Self> {
        params.validate()?;
        let symbol = (0..grid.modes()).map(|k| linear_symbol(&params, k as i64)).collect();
        Ok(Self {
            params,
            grid: grid.clone(),
            symbol,
            nonlinear: true,
        })
    }

    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    pub fn is_nonlinear(&self) -> bool {
        self.nonlinear
    }

    pub fn workspace(&self) -> NonlinearWorkspace {
        NonlinearWorkspace::new(&self.grid)
    }

    pub fn nonlinear_into(&self, ws: &mut NonlinearWorkspace, input: &[Complex64], out: &mut [Complex64]) {
        if self.nonlinear {
            ws.apply(input, out);
        } else {
            out.iter_mut().for_each(|c| *c = Complex64::default());
        }
    }

    pub fn rhs_into(&self, ws: &mut NonlinearWorkspace, input: &[Complex64], out: &mut [Complex64]) {
        self.nonlinear_into(ws, input, out);
        for ((o, c), s) in out.iter_mut().zip(input).zip(&self.symbol) {
            *o += c * *s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{to_physical, to_spectral, PhysicalField};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn symbol_values() {
        let p = ModelParams::fractional(0.01, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(linear_symbol(&p, 100), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(linear_symbol(&p, 50), 25.0, epsilon = 1e-12);
        assert_abs_diff_eq!(linear_symbol(&p, -50), 25.0, epsilon = 1e-12);
        assert_eq!(linear_symbol(&p, 0), 0.0);
        let bs = ModelParams::fractional(1.0, 0.0, 1.0).unwrap();
        assert_eq!(linear_symbol(&bs, 0), 1.0);
        let ks = ModelParams::classic_ks(0.25).unwrap();
        assert_abs_diff_eq!(linear_symbol(&ks, 3), 9.0 - 0.25 * 81.0, epsilon = 1e-12);
    }

    #[test]
    fn band_edges() {
        let cases = [
            (1.0, 1.0, 0.01, 100.0, 1e-9),
            (0.5, 1.45, 0.8, 86.7, 0.1),
            (0.5, 1.3, 0.5, 32.0, 1e-9),
            (1.0, 1.0, 0.04, 25.0, 1e-9),
        ];
        for (delta, gamma, eps, expected, tol) in cases {
            let p = ModelParams::fractional(eps, gamma, delta).unwrap();
            assert_abs_diff_eq!(k_star(&p), expected, epsilon = tol);
        }
        assert_abs_diff_eq!(k_star(&ModelParams::classic_ks(0.01).unwrap()), 10.0, epsilon = 1e-12);
    }

    #[test]
    fn parameter_ranges() {
        assert!(ModelParams::fractional(0.1, 3.0, 1.0).is_err());
        assert!(ModelParams::fractional(0.1, 2.0, 1.0).is_err());
        assert!(ModelParams::fractional(0.1, 1.0, 1.5).is_err());
        assert!(ModelParams::fractional(0.1, 1.0, 0.0).is_err());
        assert!(ModelParams::fractional(0.0, 1.0, 1.0).is_err());
        assert!(ModelParams::fractional(0.1, -0.1, 1.0).is_err());
        assert!(ModelParams::fractional(0.1, 0.0, 1.0).is_ok());
    }

    #[test]
    fn rhs_of_cosine() {
        let eps = 0.1;
        let p = ModelParams::fractional(eps, 1.0, 1.0).unwrap();
        let g = Grid::new(32).unwrap();
        let u = SpectralField::from_modes(&g, &[(1, c(0.5, 0.0))]).unwrap();
        let r = rhs(&p, &u).unwrap();
        // (1 − ε) cos x + ½ sin 2x
        assert_abs_diff_eq!(r.coeff(1).re, 0.5 * (1.0 - eps), epsilon = 1e-14);
        assert_abs_diff_eq!(r.coeff(2).im, -0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(r.coeff(2).re, 0.0, epsilon = 1e-14);
        assert_eq!(r.mean(), 0.0);
        assert_eq!(rhs(&p, &SpectralField::zeros(&g)).unwrap().max_abs_coeff(), 0.0);
    }

    #[test]
    fn nonlinear_term_of_cosine_is_half_sin_two_x() {
        let g = Grid::new(16).unwrap();
        let u = SpectralField::from_modes(&g, &[(1, c(0.5, 0.0))]).unwrap();
        let n = to_physical(&nonlinear_term(&u)).unwrap();
        for (j, v) in n.values().iter().enumerate() {
            assert_abs_diff_eq!(*v, 0.5 * (2.0 * g.node(j)).sin(), epsilon = 1e-14);
        }
    }

    #[test]
    fn linear_only_rhs() {
        let p = ModelParams::fractional(0.01, 1.0, 1.0).unwrap();
        let g = Grid::new(32).unwrap();
        let model = Model::new(p, &g).unwrap().linear_only();
        let u = SpectralField::from_modes(&g, &[(5, c(0.0, -0.5))]).unwrap();
        let mut out = SpectralField::zeros(&g);
        model.rhs_into(&mut model.workspace(), u.coeffs(), out.coeffs_mut());
        assert_relative_eq!(out.coeff(5).im, -0.5 * 4.75, max_relative = 1e-14);
    }

    #[test]
    fn product_is_exact_below_cutoff() {
        // u = cos 3x + sin 5x on n = 32 (cutoff 10): u² has modes up to 10 and
        // must be recovered exactly.
        let g = Grid::new(32).unwrap();
        let u = PhysicalField::from_fn(&g, |x| (3.0 * x).cos() + (5.0 * x).sin()).unwrap();
        let n = nonlinear_term(&to_spectral(&u).unwrap());
        let expected = PhysicalField::from_fn(&g, |x| {
            let (a, b) = (
                (3.0 * x).cos() + (5.0 * x).sin(),
                -3.0 * (3.0 * x).sin() + 5.0 * (5.0 * x).cos(),
            );
            -a * b
        })
        .unwrap();
        let got = to_physical(&n).unwrap();
        for (a, b) in got.values().iter().zip(expected.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn params_json_roundtrip() {
        let p = ModelParams::fractional(0.5, 1.3, 0.5).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"fractional\""));
        let back: ModelParams = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let ks = serde_json::to_string(&ModelParams::classic_ks(0.1).unwrap()).unwrap();
        assert!(ks.contains("\"classic_ks\""));
    }
}
