//! Closed-form constants from the a-priori estimates: absorbing-set shift,
//! analyticity strip, oscillation count and the L² growth envelope.

use std::f64::consts::{LN_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::dynamics::ModelParams;
use crate::error::{FksError, Result};

/// Shift `λ = (6γ/((1+δ)ε))^{1/(1+δ−γ)} + 1` used in the absorbing-set argument.
pub fn theory_lambda(p: &ModelParams) -> Result<f64> {
    p.validate()?;
    let (gamma, delta) = p.exponents();
    Ok((6.0 * gamma / ((1.0 + delta) * p.eps)).powf(1.0 / (1.0 + delta - gamma)) + 1.0)
}

/// `max_ξ [a|ξ|^m − ε|ξ|^{1+δ}]` for `1 ≤ m < 1+δ`, in closed form.
pub fn growth_max(a: f64, m: f64, eps: f64, delta: f64) -> f64 {
    let q = 1.0 + delta;
    let xi = (m * a / (eps * q)).powf(1.0 / (q - m));
    a * xi.powf(m) - eps * xi.powf(q)
}

/// The strip-growth constant `C(λ, k, ε, δ, γ)`.
pub fn c_analytic(lambda: f64, k: f64, p: &ModelParams) -> f64 {
    let (gamma, delta) = p.exponents();
    growth_max(2.0 * (lambda + k + 1.0), gamma.max(1.0), p.eps, delta)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Analyticity {
    pub c_analytic: f64,
    pub k_strip: f64,
    pub t_analytic: f64,
    pub width: f64,
    pub e_script: f64,
}

/// Analyticity constants for data with `‖∂x³u0‖_{L²} = u0_h3` and
/// `‖u0‖_∞ = u0_linf`, using `λ = √2‖u0‖_∞`. `c` is the unspecified constant
/// of the strip-width bound.
pub fn theory_analyticity(u0_h3: f64, u0_linf: f64, p: &ModelParams, c: f64) -> Result<Analyticity> {
    p.validate()?;
    if !(u0_h3.is_finite() && u0_h3 > 0.0 && u0_linf.is_finite() && u0_linf > 0.0) {
        return Err(FksError::param("u0_h3 and u0_linf must be positive"));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(FksError::param(format!("width constant c must be positive, got {c}")));
    }
    let (gamma, delta) = p.exponents();
    if gamma.max(1.0) >= 1.0 + delta {
        return Err(FksError::param("max(1, gamma) must be below 1 + delta"));
    }
    let lambda = SQRT_2 * u0_linf;
    // λ² − ‖u0‖²_∞ = ‖u0‖²_∞ for this λ.
    let k = (u0_h3 * u0_h3 + 1.0 / (lambda * lambda - u0_linf * u0_linf)).powi(3);
    let big_c = c_analytic(lambda, k, p);
    let t = (big_c / (k * c) + 1.0).ln() / (3.0 * big_c);
    let e_script = big_c / k;
    Ok(Analyticity {
        c_analytic: big_c,
        k_strip: k,
        t_analytic: t,
        width: (e_script / c + 1.0).ln() / (3.0 * e_script),
        e_script,
    })
}

/// `(τ_M, bound)`: strip width after time `T/M` and the resulting bound on
/// critical points where `∂x u` is large.
pub fn theory_oscillation(m: f64, u0_h3: f64, u0_linf: f64, p: &ModelParams, c: f64) -> Result<(f64, f64)> {
    if !(m.is_finite() && m > 1.0) {
        return Err(FksError::param(format!("M must exceed 1, got {m}")));
    }
    let a = theory_analyticity(u0_h3, u0_linf, p, c)?;
    let tau = a.width / m;
    Ok((tau, oscillation_bound(m, tau)))
}

pub fn oscillation_bound(m: f64, tau: f64) -> f64 {
    4.0 * PI / LN_2 * (m / tau).ln() / tau
}

/// Exponent rate `(2γ/(ε(1+δ)))^{1/(1+δ−γ)}` of the L² growth bound.
pub fn gronwall_rate(p: &ModelParams) -> f64 {
    let (gamma, delta) = p.exponents();
    (2.0 * gamma / (p.eps * (1.0 + delta))).powf(1.0 / (1.0 + delta - gamma))
}

/// Bound on `‖u(t)‖²_{L²}` given `‖u0‖_{L²}`.
pub fn gronwall_l2_envelope(u0_l2: f64, p: &ModelParams, t: f64) -> f64 {
    u0_l2 * u0_l2 * (2.0 * gronwall_rate(p) * t).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryConstants {
    pub lambda: f64,
    pub c_analytic: f64,
    pub k_strip: f64,
    pub t_analytic: f64,
    pub width: f64,
    pub e_script: f64,
    pub m: f64,
    pub tau_m: f64,
    pub osc_bound: f64,
    pub gronwall_rate: f64,
}

pub fn theory_constants(u0_h3: f64, u0_linf: f64, m: f64, p: &ModelParams, c: f64) -> Result<TheoryConstants> {
    let a = theory_analyticity(u0_h3, u0_linf, p, c)?;
    let (tau_m, osc_bound) = theory_oscillation(m, u0_h3, u0_linf, p, c)?;
    Ok(TheoryConstants {
        lambda: theory_lambda(p)?,
        c_analytic: a.c_analytic,
        k_strip: a.k_strip,
        t_analytic: a.t_analytic,
        width: a.width,
        e_script: a.e_script,
        m,
        tau_m,
        osc_bound,
        gronwall_rate: gronwall_rate(p),
    })
}
