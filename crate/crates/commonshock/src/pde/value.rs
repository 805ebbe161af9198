//! The assembled value function.
//!
//! With exponential utility U(x) = 1 − e^(−γx) the value function of the
//! combined reinsurance-investment problem factorises as
//!
//! ```text
//! V(t, x, y¹, y²) = 1 − e^(−γ x B(t,T)) · ψ₁(t, y¹) · ψ₂(t, y²)
//! ```
//!
//! where x is current wealth and B(t, T) the accumulation factor. The two ψ
//! surfaces come from [`solve_psi_pde`]; this module only assembles and
//! queries them.

use serde::{Deserialize, Serialize};

use crate::error::PdeError;
use crate::model::{LineId, ModelConfig};
use crate::pde::solver::{solve_psi_pde, PdeSolution, SolverOptions};

/// ψ₁, ψ₂ and the configuration they were solved for.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValueFunction {
    config: ModelConfig,
    pub psi_ordinary: PdeSolution,
    pub psi_catastrophic: PdeSolution,
}

/// Solves both ψ equations with the same discretization options.
pub fn value_function(cfg: &ModelConfig, opts: &SolverOptions) -> Result<ValueFunction, PdeError> {
    Ok(ValueFunction {
        config: cfg.clone(),
        psi_ordinary: solve_psi_pde(cfg, LineId::Ordinary, opts)?,
        psi_catastrophic: solve_psi_pde(cfg, LineId::Catastrophic, opts)?,
    })
}

impl ValueFunction {
    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn psi(&self, line: LineId) -> &PdeSolution {
        match line {
            LineId::Ordinary => &self.psi_ordinary,
            LineId::Catastrophic => &self.psi_catastrophic,
        }
    }

    /// E[e^(−γ X_T) | state] under the optimal strategy:
    /// e^(−γ x B(t,T)) ψ₁(t, y¹) ψ₂(t, y²).
    pub fn exponential_moment(
        &self,
        t: f64,
        wealth: f64,
        y1: f64,
        y2: f64,
    ) -> Result<f64, PdeError> {
        let horizon = self.config.horizon();
        let b = self.config.accumulation_factor(t, horizon)?;
        let gamma = self.config.preferences.risk_aversion;
        Ok((-gamma * wealth * b).exp()
            * self.psi_ordinary.eval(t, y1)?
            * self.psi_catastrophic.eval(t, y2)?)
    }

    /// V(t, x, y¹, y²) = 1 − E[e^(−γ X_T)].
    pub fn evaluate(&self, t: f64, wealth: f64, y1: f64, y2: f64) -> Result<f64, PdeError> {
        Ok(1.0 - self.exponential_moment(t, wealth, y1, y2)?)
    }

    /// Certainty equivalent: the deterministic current wealth c with
    /// U(c·B(t,T)) = V(t, x, y¹, y²), i.e. c = x − ln(ψ₁ψ₂)/(γB).
    pub fn certainty_equivalent(
        &self,
        t: f64,
        wealth: f64,
        y1: f64,
        y2: f64,
    ) -> Result<f64, PdeError> {
        let horizon = self.config.horizon();
        let b = self.config.accumulation_factor(t, horizon)?;
        let gamma = self.config.preferences.risk_aversion;
        let psi = self.psi_ordinary.eval(t, y1)? * self.psi_catastrophic.eval(t, y2)?;
        Ok(wealth - psi.ln() / (gamma * b))
    }

    /// V at the configured initial state (t = 0, x = R₀, y = y₀).
    pub fn initial_value(&self) -> Result<f64, PdeError> {
        self.evaluate(
            0.0,
            self.config.preferences.initial_wealth,
            self.config.ordinary.initial_factor,
            self.config.catastrophic.initial_factor,
        )
    }

    pub fn to_json(&self) -> Result<String, PdeError> {
        serde_json::to_string_pretty(self)
            .map_err(|e| PdeError::Precondition(format!("value function not serializable: {e}")))
    }
}
