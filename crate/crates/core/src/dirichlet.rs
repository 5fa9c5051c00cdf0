//! Dirichlet kernel and the tail identity for functions vanishing at a point.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FksError, Result};
use crate::special::hurwitz_zeta;
use crate::spectral::{Grid, PhysicalField, SpectralField};

/// `b_M(x) = Σ_{|ξ|≤M} e^{−iξ(x−x0)} = 1 + 2Σ_{ξ=1}^{M} cos ξ(x−x0)`.
#[derive(Clone, Debug)]
pub struct DirichletKernel {
    pub x0: f64,
    pub m: usize,
    pub values: PhysicalField,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailCheck {
    /// `Σ_{|ξ|≤M} ĝ(ξ)`
    pub head: f64,
    /// `Σ_{|ξ|>M} ĝ(ξ)`
    pub tail: f64,
    /// `|head + tail|`, zero when `g(0) = u(x0)² = 0`.
    pub identity_defect: f64,
    /// `(Σ_{|ξ|>M}|ξ|^{1+δ}|ĝ|²)^{1/2} (Σ_{|ξ|>M}|ξ|^{−(1+δ)})^{1/2}`
    pub bound: f64,
    pub bound_holds: bool,
}

pub fn dirichlet_tools(grid: &Grid, x0: f64, m: usize) -> Result<DirichletKernel> {
    if m == 0 || m >= grid.nyquist() {
        return Err(FksError::param(format!(
            "M must satisfy 1 <= M < n/2 = {}, got {m}",
            grid.nyquist()
        )));
    }
    let values = PhysicalField::from_fn(grid, |x| {
        1.0 + 2.0 * (1..=m).map(|k| (k as f64 * (x - x0)).cos()).sum::<f64>()
    })?;
    Ok(DirichletKernel { x0, m, values })
}

impl DirichletKernel {
    /// Check the head/tail identity and the tail bound for `g(x) = u²(x + x0)`,
    /// where `u(x0) = 0`. The square is formed without aliasing.
    pub fn tail_check(&self, u: &SpectralField, delta: f64) -> Result<TailCheck> {
        let grid = u.grid();
        let shift = |k: usize| Complex64::from_polar(1.0, k as f64 * self.x0);
        let shifted = u.apply_symbol(shift);
        let at_x0: f64 = shifted
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if k == 0 || k == grid.nyquist() {
                    c.re
                } else {
                    2.0 * c.re
                }
            })
            .sum();
        if at_x0.abs() > 1e-10 {
            return Err(FksError::param(format!("u(x0) = {at_x0:e} is not zero")));
        }
        // Pad to 2n so the product spectrum is exact.
        let big = Grid::new(2 * grid.n())?;
        let mut padded = SpectralField::zeros(&big);
        for (k, c) in shifted.coeffs().iter().enumerate().take(grid.nyquist()) {
            padded.coeffs_mut()[k] = *c;
        }
        let mut ws = big.workspace();
        let mut phys = vec![0.0; big.n()];
        ws.inverse(padded.coeffs(), &mut phys);
        for v in phys.iter_mut() {
            *v *= *v;
        }
        let mut g = vec![Complex64::default(); big.modes()];
        ws.forward(&phys, &mut g);

        let nyq = big.nyquist();
        let weight = |k: usize| if k == 0 || k == nyq { 1.0 } else { 2.0 };
        let (mut head, mut tail, mut energy) = (0.0, 0.0, 0.0);
        for (k, c) in g.iter().enumerate() {
            if k <= self.m {
                head += weight(k) * c.re;
            } else {
                tail += weight(k) * c.re;
                energy += weight(k) * (k as f64).powf(1.0 + delta) * c.norm_sqr();
            }
        }
        let series = 2.0 * hurwitz_zeta(1.0 + delta, self.m as f64 + 1.0);
        let bound = (energy * series).sqrt();
        Ok(TailCheck {
            head,
            tail,
            identity_defect: (head + tail).abs(),
            bound,
            bound_holds: tail.abs() <= bound * (1.0 + 1e-12),
        })
    }
}
