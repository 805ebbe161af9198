//! Optimal proportional reinsurance and investment under common-shock
//! dependence.
//!
//! An insurer runs two lines of business. Ordinary claims (line 1) arrive by a
//! Cox process with intensity λ⁽¹⁾(t, Y¹_t) driven by a diffusion factor Y¹.
//! Catastrophic claims (line 2) arrive by an independent Cox process with
//! intensity λ⁽²⁾(t, Y²_t), and every catastrophic claim of size z knocks the
//! risky asset price down by the factor 1 − K(t, z): the same shock hits the
//! insurance book and the financial market. The insurer chooses proportional
//! retentions u⁽¹⁾, u⁽²⁾ ∈ [0, 1] and an investment amount w ∈ ℝ to maximise
//! expected exponential utility of terminal wealth, discounted into horizon
//! units by the accumulation factor B(t, T) = exp(∫_t^T r(s) ds).
//!
//! The value function factorises as
//!
//! ```text
//! V(t, x, y¹, y²) = 1 − e^(−γ x B(t,T)) · ψ₁(t, y¹) · ψ₂(t, y²)
//! ```
//!
//! where each ψ solves a linear backward reaction–diffusion PDE whose reaction
//! term is the pointwise minimum over controls of a convex objective (Ψ₁ for
//! the first line, Ψ₂ for the second line plus investment). The minimisers are
//! the optimal controls.
//!
//! # Modules
//!
//! - [`model`]: model configuration (time coefficients, claim laws, premium
//!   principles, intensities, market) with validation and JSON serialization.
//! - [`strategy`]: pointwise optimal-control solvers, closed forms under the
//!   expected-value principle, no-shock baselines, comparison reports, and
//!   tabulated strategy fields.
//! - [`pde`]: Crank–Nicolson solver for the ψ equations, a Feynman–Kac Monte
//!   Carlo oracle, the assembled value function, and existence preconditions.
//! - [`sim`]: path simulator (factors, Cox arrivals by thinning, jumping
//!   asset, wealth) and utility estimators with antithetic and
//!   common-random-number support.
//! - [`cli`]: experiment runner behind the `commonshock` binary (solve,
//!   simulate, verify, compare, sweep) with manifests and deterministic
//!   artifacts.
//!
//! # Quick start
//!
//! ```
//! use commonshock::cli::presets;
//! use commonshock::strategy;
//!
//! let cfg = presets::evp_comparison();
//! let sol = strategy::optimal_second_line(&cfg, 0.0, -0.2).unwrap();
//! // Common shocks make risky investment less attractive: here w* < 0.
//! assert!(sol.investment < 0.0);
//! assert!((0.0..=1.0).contains(&sol.retention));
//! ```

pub mod cli;
pub mod error;
pub mod model;
pub mod pde;
pub mod sim;
pub mod strategy;
pub(crate) mod util;

pub use error::{CliError, ModelError, PdeError, SimError, SolveError};
