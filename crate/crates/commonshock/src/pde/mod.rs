//! Reaction–diffusion solvers for the ψ factors of the value function.
//!
//! The value function factorises as V = 1 − e^(−γxB(t,T)) ψ₁(t,y¹) ψ₂(t,y²),
//! where each ψᵢ solves a linear backward PDE
//!
//! ```text
//! ∂ψ/∂t + b⁽ⁱ⁾(t) ∂ψ/∂y + ½ a⁽ⁱ⁾(t)² ∂²ψ/∂y² + gᵢ(t, y) ψ = 0,   ψ(T, ·) = 1,
//! ```
//!
//! whose reaction gᵢ is the generator term minimised over the controls
//! ([`min_generator_term`]). The module provides:
//!
//! - [`solve_psi_pde`] / [`solve_with_reaction`]: backward Crank–Nicolson
//!   marching with a Rannacher start on a truncated spatial domain
//!   ([`SolverOptions`], [`PdeSolution`]);
//! - [`feynman_kac_oracle`] / [`feynman_kac_with_table`]: an independent
//!   Monte Carlo evaluation of the same ψ through the stochastic
//!   representation ψ = E[e^{∫g}] ([`ReactionTable`], [`FkEstimate`]);
//! - [`value_function`]: both ψ surfaces assembled into a queryable
//!   [`ValueFunction`];
//! - [`check_existence_preconditions`]: probes of the sufficient conditions
//!   (uniform ellipticity, bounded reaction) behind the verification
//!   theorem.

mod grid;
mod oracle;
mod precondition;
mod solver;
mod value;

pub use grid::Grid1D;
pub use oracle::{feynman_kac_oracle, feynman_kac_with_table, FkEstimate, ReactionTable};
pub use precondition::check_existence_preconditions;
pub use solver::{min_generator_term, solve_psi_pde, solve_with_reaction, PdeSolution, SolverOptions};
pub use value::{value_function, ValueFunction};
