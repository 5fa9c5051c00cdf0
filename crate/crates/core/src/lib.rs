//! Pseudo-spectral solver and diagnostics for the fractional
//! Kuramoto–Sivashinsky equation
//!
//! ```text
//! u_t + (u²/2)_x = Λ^γ u − ε Λ^{1+δ} u,    x ∈ [0, 2π) periodic,
//! ```
//!
//! where `Λ^s` is the Fourier multiplier `|ξ|^s`.

pub mod diagnostics;
pub mod dirichlet;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod kernel;
pub mod record;
pub mod special;
pub mod spectral;
pub mod stepper;
pub mod theory;

pub use dynamics::{k_star, linear_symbol, Model, ModelParams, Variant};
pub use error::{FksError, Result};
pub use spectral::{Grid, PhysicalField, SpectralField};
pub use stepper::{integrate, IntegrationState, Method, StepperConfig};
