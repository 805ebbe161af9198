//! Model configuration: two insurance lines, a financial market hit by the
//! catastrophic line's shocks, and the insurer's preferences.
//!
//! ```text
//! dY⁽ⁱ⁾_t = b⁽ⁱ⁾(t) dt + a⁽ⁱ⁾(t) dW⁽ⁱ⁾_t                    stochastic factors
//! N⁽ⁱ⁾      Cox process with intensity λ⁽ⁱ⁾(t, Y⁽ⁱ⁾_t)        claim arrivals
//! dP_t  = P_t⁻ [ μ(t) dt + σ(t) dW_t − ∫ K(t, z) m⁽²⁾(dt,dz) ]  risky asset
//! ```
//!
//! Catastrophic claims (line 2) and the downward jumps of P share the same
//! marked point process m⁽²⁾: that is the common shock. All deterministic
//! coefficients are [`TimeCoefficient`]s, claim laws are
//! [`ClaimDistribution`]s, and premia follow a [`PremiumPrinciple`].
//!
//! Monetary units are arbitrary but consistent; rates (r, μ, premium rates,
//! intensities) are per unit of model time, and the horizon T is in the same
//! time unit.

pub mod claims;
pub mod coeff;
pub mod premium;
pub mod validate;

use serde::{Deserialize, Serialize};

pub use claims::ClaimDistribution;
pub use coeff::TimeCoefficient;
pub use premium::{CustomPremium, PremiumPrinciple};
pub use validate::{
    validate_admissibility, validate_premium, CheckResult, SamplingGrid, ValidationReport,
};

use crate::error::ModelError;

/// Identifies one of the two insurance lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineId {
    /// Line 1: ordinary claims, independent of the market.
    Ordinary,
    /// Line 2: catastrophic claims, shared with the asset's jumps.
    Catastrophic,
}

impl LineId {
    pub fn label(self) -> &'static str {
        match self {
            LineId::Ordinary => "ordinary",
            LineId::Catastrophic => "catastrophic",
        }
    }
}

/// Claim-arrival intensity λ(t, y) = time profile × positive factor shape.
///
/// All built-in shapes are strictly positive; boundedness in y differs and is
/// what the admissibility and PDE precondition validators probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum IntensityModel {
    /// λ(t, y) = rate(t): no factor feedback.
    Constant { rate: TimeCoefficient },
    /// λ(t, y) = scale(t)·e^(−y): unbounded as y → −∞.
    ExpNegFactor { scale: TimeCoefficient },
    /// λ(t, y) = scale(t)/(1 + e^(−y)): increasing in y, bounded in (0, scale).
    Logistic { scale: TimeCoefficient },
    /// λ(t, y) = scale(t)·(1 + 1/(1 + e^(−y))): bounded in (scale, 2·scale).
    OnePlusLogistic { scale: TimeCoefficient },
}

impl IntensityModel {
    /// λ(t, y).
    pub fn eval(&self, t: f64, y: f64) -> f64 {
        match self {
            IntensityModel::Constant { rate } => rate.eval(t),
            IntensityModel::ExpNegFactor { scale } => scale.eval(t) * (-y).exp(),
            IntensityModel::Logistic { scale } => scale.eval(t) / (1.0 + (-y).exp()),
            IntensityModel::OnePlusLogistic { scale } => {
                scale.eval(t) * (1.0 + 1.0 / (1.0 + (-y).exp()))
            }
        }
    }

    fn time_profile(&self) -> &TimeCoefficient {
        match self {
            IntensityModel::Constant { rate } => rate,
            IntensityModel::ExpNegFactor { scale }
            | IntensityModel::Logistic { scale }
            | IntensityModel::OnePlusLogistic { scale } => scale,
        }
    }

    pub fn validate(&self, horizon: f64) -> Result<(), ModelError> {
        let profile = self.time_profile();
        profile.validate(horizon)?;
        if profile.min_on(0.0, horizon) <= 0.0 {
            return Err(ModelError::InvalidConfig(
                "intensity time profile must be strictly positive".into(),
            ));
        }
        Ok(())
    }
}

/// Proportional effect of a catastrophic claim of size z on the asset price:
/// the price is multiplied by 1 − K(t, z) at the claim time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum JumpFunction {
    /// K ≡ 0: the market ignores catastrophic claims (no common shock).
    None,
    /// K(t, z) = slope(t)·z with slope(t) ≥ 0.
    Multiplicative { slope: TimeCoefficient },
}

impl JumpFunction {
    /// K(t, z).
    pub fn eval(&self, t: f64, z: f64) -> f64 {
        match self {
            JumpFunction::None => 0.0,
            JumpFunction::Multiplicative { slope } => slope.eval(t) * z,
        }
    }

    /// Multiplicative slope k(t) (0 for `None`).
    pub fn slope_at(&self, t: f64) -> f64 {
        match self {
            JumpFunction::None => 0.0,
            JumpFunction::Multiplicative { slope } => slope.eval(t),
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, JumpFunction::None)
    }
}

/// Risky asset and money market.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FinancialMarket {
    /// Money-market rate r(t).
    pub rate: TimeCoefficient,
    /// Risky-asset drift μ(t).
    pub drift: TimeCoefficient,
    /// Risky-asset diffusion volatility σ(t); must stay strictly positive.
    pub volatility: TimeCoefficient,
    /// Common-shock jump function K(t, z) ∈ [0, 1).
    pub jump: JumpFunction,
    /// Initial asset price P₀ > 0.
    pub initial_price: f64,
}

/// One insurance line: arrivals, factor dynamics, claims, and premia.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InsuranceLine {
    /// Claim-arrival intensity λ(t, y).
    pub intensity: IntensityModel,
    /// Dominating bound δ(t) ≥ λ(t, Y_t), used by the admissibility checks
    /// and as the thinning proposal rate in simulation.
    pub intensity_bound: TimeCoefficient,
    /// Factor drift b(t).
    pub factor_drift: TimeCoefficient,
    /// Factor volatility a(t) ≥ 0.
    pub factor_volatility: TimeCoefficient,
    /// Initial factor level y₀.
    pub initial_factor: f64,
    /// Claim-size law Z.
    pub claims: ClaimDistribution,
    /// Premium principle for c(t, y) and q(t, y, u).
    pub premium: PremiumPrinciple,
}

impl InsuranceLine {
    /// λ(t, y).
    pub fn intensity_at(&self, t: f64, y: f64) -> f64 {
        self.intensity.eval(t, y)
    }

    /// Gross premium rate c(t, y).
    pub fn gross_premium(&self, t: f64, y: f64) -> f64 {
        let lambda = self.intensity_at(t, y);
        match &self.premium {
            PremiumPrinciple::ExpectedValue { insurer_loading, .. } => {
                (1.0 + insurer_loading) * self.claims.mean() * lambda
            }
            PremiumPrinciple::Variance { insurer_loading, .. } => {
                (self.claims.mean() + insurer_loading * self.claims.second_moment()) * lambda
            }
            PremiumPrinciple::Custom(c) => (c.gross)(t, y),
        }
    }

    /// Reinsurance premium rate q(t, y, u), defined for every real u via the
    /// algebraic extension of the built-in principles.
    pub fn reinsurance_premium(&self, t: f64, y: f64, u: f64) -> f64 {
        let lambda = self.intensity_at(t, y);
        let ceded = 1.0 - u;
        match &self.premium {
            PremiumPrinciple::ExpectedValue { reinsurer_loading, .. } => {
                (1.0 + reinsurer_loading) * self.claims.mean() * ceded * lambda
            }
            PremiumPrinciple::Variance { reinsurer_loading, .. } => {
                (self.claims.mean() * ceded
                    + reinsurer_loading * self.claims.second_moment() * ceded * ceded)
                    * lambda
            }
            PremiumPrinciple::Custom(c) => (c.reinsurance)(t, y, u),
        }
    }

    /// ∂q/∂u (t, y, u).
    pub fn reinsurance_premium_du(&self, t: f64, y: f64, u: f64) -> f64 {
        let lambda = self.intensity_at(t, y);
        match &self.premium {
            PremiumPrinciple::ExpectedValue { reinsurer_loading, .. } => {
                -(1.0 + reinsurer_loading) * self.claims.mean() * lambda
            }
            PremiumPrinciple::Variance { reinsurer_loading, .. } => {
                (-self.claims.mean()
                    - 2.0 * reinsurer_loading * self.claims.second_moment() * (1.0 - u))
                    * lambda
            }
            PremiumPrinciple::Custom(c) => (c.reinsurance_du)(t, y, u),
        }
    }

    /// ∂²q/∂u² (t, y, u).
    pub fn reinsurance_premium_du2(&self, t: f64, y: f64, u: f64) -> f64 {
        let lambda = self.intensity_at(t, y);
        match &self.premium {
            PremiumPrinciple::ExpectedValue { .. } => 0.0,
            PremiumPrinciple::Variance { reinsurer_loading, .. } => {
                2.0 * reinsurer_loading * self.claims.second_moment() * lambda
            }
            PremiumPrinciple::Custom(c) => (c.reinsurance_du2)(t, y, u),
        }
    }

    fn validate(&self, horizon: f64, label: &str) -> Result<(), ModelError> {
        let ctx = |e: ModelError| {
            ModelError::InvalidConfig(format!("{label} line: {e}"))
        };
        self.intensity.validate(horizon).map_err(ctx)?;
        self.intensity_bound.validate(horizon).map_err(ctx)?;
        if self.intensity_bound.min_on(0.0, horizon) <= 0.0 {
            return Err(ModelError::InvalidConfig(format!(
                "{label} line: intensity bound delta(t) must be strictly positive"
            )));
        }
        self.factor_drift.validate(horizon).map_err(ctx)?;
        self.factor_volatility.validate(horizon).map_err(ctx)?;
        if self.factor_volatility.min_on(0.0, horizon) < 0.0 {
            return Err(ModelError::InvalidConfig(format!(
                "{label} line: factor volatility must be nonnegative"
            )));
        }
        if !self.initial_factor.is_finite() {
            return Err(ModelError::InvalidConfig(format!(
                "{label} line: initial factor must be finite"
            )));
        }
        self.claims.validate().map_err(ctx)?;
        if let Some((theta, theta_r)) = self.premium.loadings() {
            if !(theta.is_finite() && theta_r.is_finite() && 0.0 < theta && theta < theta_r) {
                return Err(ModelError::InvalidConfig(format!(
                    "{label} line: loadings must satisfy 0 < theta < theta_R, got ({theta}, {theta_r})"
                )));
            }
        }
        Ok(())
    }
}

/// Insurer preferences: exponential utility 1 − e^(−γ x) at horizon T.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preferences {
    /// Risk aversion γ > 0.
    pub risk_aversion: f64,
    /// Horizon T > 0.
    pub horizon: f64,
    /// Initial reserve R₀ ≥ 0.
    pub initial_wealth: f64,
}

/// Full model configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    pub preferences: Preferences,
    pub market: FinancialMarket,
    /// Line 1.
    pub ordinary: InsuranceLine,
    /// Line 2 (drives the market jumps).
    pub catastrophic: InsuranceLine,
}

impl ModelConfig {
    /// Horizon T.
    pub fn horizon(&self) -> f64 {
        self.preferences.horizon
    }

    pub fn line(&self, id: LineId) -> &InsuranceLine {
        match id {
            LineId::Ordinary => &self.ordinary,
            LineId::Catastrophic => &self.catastrophic,
        }
    }

    /// Accumulation factor B(t₁, t₂) = exp(∫_{t₁}^{t₂} r(s) ds) for
    /// 0 ≤ t₁ ≤ t₂ ≤ T. Exact for constant and piecewise-constant rates.
    pub fn accumulation_factor(&self, t1: f64, t2: f64) -> Result<f64, ModelError> {
        let horizon = self.horizon();
        for t in [t1, t2] {
            if !(0.0..=horizon * (1.0 + 1e-12)).contains(&t) {
                return Err(ModelError::TimeOutOfRange { t, horizon });
            }
        }
        if t2 < t1 {
            return Err(ModelError::InvalidConfig(format!(
                "accumulation factor needs t1 <= t2, got ({t1}, {t2})"
            )));
        }
        Ok(self.market.rate.integral(t1, t2).exp())
    }

    /// B̄ = exp(∫₀^T |r(s)| ds) ≥ sup B(t, T): the moment-condition constant.
    pub fn accumulation_bar(&self) -> f64 {
        self.market.rate.abs_integral(0.0, self.horizon()).exp()
    }

    /// γ·B(t, T): the tilt scale entering every exponential moment. `t` is
    /// clamped to [0, T].
    pub fn gamma_b(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.horizon());
        self.preferences.risk_aversion * self.market.rate.integral(t, self.horizon()).exp()
    }

    /// Structural validation: coefficient sanity, positivity, loading order,
    /// and the jump-size range K(t, z) ∈ [0, 1) on the support of Z⁽²⁾
    /// (probed at the 1 − 10⁻⁶ quantile when the support is unbounded).
    pub fn validate(&self) -> Result<(), ModelError> {
        let horizon = self.preferences.horizon;
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(ModelError::InvalidConfig(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        let gamma = self.preferences.risk_aversion;
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(ModelError::InvalidConfig(format!(
                "risk aversion must be positive, got {gamma}"
            )));
        }
        let r0 = self.preferences.initial_wealth;
        if !(r0.is_finite() && r0 >= 0.0) {
            return Err(ModelError::InvalidConfig(format!(
                "initial wealth must be nonnegative, got {r0}"
            )));
        }
        self.market.rate.validate(horizon)?;
        self.market.drift.validate(horizon)?;
        self.market.volatility.validate(horizon)?;
        if self.market.volatility.min_on(0.0, horizon) <= 0.0 {
            return Err(ModelError::InvalidConfig(
                "market volatility must be strictly positive".into(),
            ));
        }
        if !(self.market.initial_price.is_finite() && self.market.initial_price > 0.0) {
            return Err(ModelError::InvalidConfig(format!(
                "initial price must be positive, got {}",
                self.market.initial_price
            )));
        }
        if let JumpFunction::Multiplicative { slope } = &self.market.jump {
            slope.validate(horizon)?;
            if slope.min_on(0.0, horizon) < 0.0 {
                return Err(ModelError::InvalidConfig(
                    "jump slope k(t) must be nonnegative".into(),
                ));
            }
            let k_max = slope.max_on(0.0, horizon);
            let probe = match self.catastrophic.claims.support_upper() {
                Some(cap) => cap,
                None => self.catastrophic.claims.quantile(1.0 - 1e-6),
            };
            if k_max * probe >= 1.0 {
                return Err(ModelError::InvalidConfig(format!(
                    "jump size K(t, z) = k z reaches {:.4} >= 1 at z = {probe:.4}; \
                     shrink k or the claim support",
                    k_max * probe
                )));
            }
        }
        self.ordinary.validate(horizon, "ordinary")?;
        self.catastrophic.validate(horizon, "catastrophic")?;
        Ok(())
    }

    /// Serializes to pretty JSON. Fails for configs holding custom premium
    /// closures.
    pub fn to_json_string(&self) -> Result<String, ModelError> {
        serde_json::to_string_pretty(self).map_err(|e| ModelError::Parse(e.to_string()))
    }

    /// Parses and structurally validates a JSON config.
    pub fn from_json_str(s: &str) -> Result<Self, ModelError> {
        let cfg: ModelConfig =
            serde_json::from_str(s).map_err(|e| ModelError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Counterfactual with the market jump removed (K ≡ 0). Used for
    /// no-shock baselines.
    pub fn without_market_jump(&self) -> ModelConfig {
        let mut cfg = self.clone();
        cfg.market.jump = JumpFunction::None;
        cfg
    }

    /// Copy with the jump slope scaled by `factor` (sweeps in k).
    pub fn with_jump_slope_scaled(&self, factor: f64) -> ModelConfig {
        let mut cfg = self.clone();
        if let JumpFunction::Multiplicative { slope } = &self.market.jump {
            cfg.market.jump = JumpFunction::Multiplicative {
                slope: slope.scaled(factor),
            };
        }
        cfg
    }

    /// Copy with one line's intensity time profile scaled by `factor`
    /// (sweeps in λ₀). The dominating bound is scaled along with it.
    pub fn with_intensity_scaled(&self, id: LineId, factor: f64) -> ModelConfig {
        let mut cfg = self.clone();
        let line = match id {
            LineId::Ordinary => &mut cfg.ordinary,
            LineId::Catastrophic => &mut cfg.catastrophic,
        };
        line.intensity = match &line.intensity {
            IntensityModel::Constant { rate } => IntensityModel::Constant {
                rate: rate.scaled(factor),
            },
            IntensityModel::ExpNegFactor { scale } => IntensityModel::ExpNegFactor {
                scale: scale.scaled(factor),
            },
            IntensityModel::Logistic { scale } => IntensityModel::Logistic {
                scale: scale.scaled(factor),
            },
            IntensityModel::OnePlusLogistic { scale } => IntensityModel::OnePlusLogistic {
                scale: scale.scaled(factor),
            },
        };
        line.intensity_bound = line.intensity_bound.scaled(factor.max(1.0));
        cfg
    }

    /// Copy with a different risk aversion (sweeps in γ).
    pub fn with_risk_aversion(&self, gamma: f64) -> ModelConfig {
        let mut cfg = self.clone();
        cfg.preferences.risk_aversion = gamma;
        cfg
    }

    /// Copy with a different reinsurer loading on one line (sweeps in θ_R).
    /// No-op for custom premium principles.
    pub fn with_reinsurer_loading(&self, id: LineId, new_theta_r: f64) -> ModelConfig {
        let mut cfg = self.clone();
        let line = match id {
            LineId::Ordinary => &mut cfg.ordinary,
            LineId::Catastrophic => &mut cfg.catastrophic,
        };
        match &mut line.premium {
            PremiumPrinciple::ExpectedValue { reinsurer_loading, .. }
            | PremiumPrinciple::Variance { reinsurer_loading, .. } => {
                *reinsurer_loading = new_theta_r;
            }
            PremiumPrinciple::Custom(_) => {}
        }
        cfg
    }
}

impl TimeCoefficient {
    /// Pointwise scaling f ↦ factor·f.
    pub fn scaled(&self, factor: f64) -> TimeCoefficient {
        match self {
            TimeCoefficient::Constant { value } => TimeCoefficient::Constant {
                value: value * factor,
            },
            TimeCoefficient::PiecewiseConstant { breaks, values } => {
                TimeCoefficient::PiecewiseConstant {
                    breaks: breaks.clone(),
                    values: values.iter().map(|v| v * factor).collect(),
                }
            }
            TimeCoefficient::Tabulated { times, values } => TimeCoefficient::Tabulated {
                times: times.clone(),
                values: values.iter().map(|v| v * factor).collect(),
            },
        }
    }
}
