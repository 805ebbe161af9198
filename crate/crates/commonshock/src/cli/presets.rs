//! Built-in benchmark configurations.
//!
//! Every preset passes [`ModelConfig::validate`]. They differ in which parts
//! of the theory they exercise:
//!
//! - [`fig1`]: exponential claims on both lines and an unbounded catastrophic
//!   intensity λ⁽²⁾(y) = 10·e^(−y). Its exponential catastrophic claim law
//!   sits exactly past the integrability threshold E[e^{2γB̄Z}] < ∞, so the
//!   admissibility validator reports that check as failed by design; the
//!   pointwise solvers remain well defined because their tilts stay below the
//!   divergence wall.
//! - [`fig2`]: truncated-exponential catastrophic claims with a bounded
//!   logistic intensity; fully admissible.
//! - [`evp_comparison`]: the workhorse. Bounded intensities, truncated
//!   catastrophic claims, expected-value premia, and a jump slope chosen so
//!   that the initial state sits in the shock-dominant regime (w* < 0).
//!   Fully admissible, suitable for simulation and verification.
//! - [`no_shock_baseline`]: [`evp_comparison`] with K ≡ 0, for decoupled
//!   baselines and common-random-number comparisons.
//! - [`variance_shock`]: [`evp_comparison`] under the variance premium
//!   principle, which makes ∂q/∂u genuinely u-dependent.

use crate::model::{
    ClaimDistribution, FinancialMarket, InsuranceLine, IntensityModel, JumpFunction, ModelConfig,
    Preferences, PremiumPrinciple, TimeCoefficient,
};

fn constant(value: f64) -> TimeCoefficient {
    TimeCoefficient::constant(value)
}

fn evp(insurer_loading: f64, reinsurer_loading: f64) -> PremiumPrinciple {
    PremiumPrinciple::ExpectedValue {
        insurer_loading,
        reinsurer_loading,
    }
}

/// Ordinary line shared by the benchmark presets: λ⁽¹⁾(y) = 2·(1 + logistic(y))
/// ∈ (2, 4), exponential claims with mean 1/3.
fn ordinary_line() -> InsuranceLine {
    InsuranceLine {
        intensity: IntensityModel::OnePlusLogistic {
            scale: constant(2.0),
        },
        intensity_bound: constant(6.0),
        factor_drift: constant(0.0),
        factor_volatility: constant(0.25),
        initial_factor: 0.1,
        claims: ClaimDistribution::Exponential { rate: 3.0 },
        premium: evp(0.1, 0.25),
    }
}

/// Exponential catastrophic claims with an unbounded intensity
/// λ⁽²⁾(y) = 10·e^(−y) dominated by δ = 60 on the working range.
pub fn fig1() -> ModelConfig {
    ModelConfig {
        preferences: Preferences {
            risk_aversion: 0.5,
            horizon: 1.0,
            initial_wealth: 1.0,
        },
        market: FinancialMarket {
            rate: constant(0.02),
            drift: constant(0.05),
            volatility: constant(0.1),
            jump: JumpFunction::Multiplicative {
                slope: constant(0.05),
            },
            initial_price: 1.0,
        },
        ordinary: ordinary_line(),
        catastrophic: InsuranceLine {
            intensity: IntensityModel::ExpNegFactor {
                scale: constant(10.0),
            },
            intensity_bound: constant(60.0),
            factor_drift: constant(0.0),
            factor_volatility: constant(0.3),
            initial_factor: -0.2,
            claims: ClaimDistribution::Exponential { rate: 1.0 },
            premium: evp(0.1, 0.3),
        },
    }
}

/// Truncated-exponential catastrophic claims with a bounded logistic
/// intensity λ⁽²⁾(y) = 5/(1 + e^(−y)).
pub fn fig2() -> ModelConfig {
    let mut cfg = fig1();
    cfg.market.jump = JumpFunction::Multiplicative {
        slope: constant(0.005),
    };
    cfg.catastrophic = InsuranceLine {
        intensity: IntensityModel::Logistic {
            scale: constant(5.0),
        },
        intensity_bound: constant(8.0),
        factor_drift: constant(0.0),
        factor_volatility: constant(0.3),
        initial_factor: 0.0,
        claims: ClaimDistribution::TruncatedExponential {
            rate: 1.0,
            cap: 100.0,
        },
        premium: evp(0.1, 0.3),
    };
    cfg
}

/// Fully admissible configuration in the shock-dominant regime at the
/// initial state: λ⁽²⁾(0, y₀)·k·E[Z] ≈ 0.045 > μ − r = 0.03, so w*(0, y₀) < 0.
pub fn evp_comparison() -> ModelConfig {
    ModelConfig {
        preferences: Preferences {
            risk_aversion: 0.5,
            horizon: 1.0,
            initial_wealth: 2.0,
        },
        market: FinancialMarket {
            rate: constant(0.02),
            drift: constant(0.05),
            volatility: constant(0.15),
            jump: JumpFunction::Multiplicative {
                slope: constant(0.025),
            },
            initial_price: 1.0,
        },
        ordinary: ordinary_line(),
        catastrophic: InsuranceLine {
            intensity: IntensityModel::Logistic {
                scale: constant(4.0),
            },
            intensity_bound: constant(7.0),
            factor_drift: constant(0.0),
            factor_volatility: constant(0.3),
            initial_factor: -0.2,
            claims: ClaimDistribution::TruncatedExponential {
                rate: 1.0,
                cap: 20.0,
            },
            premium: evp(0.1, 0.3),
        },
    }
}

/// [`evp_comparison`] with the market jump removed: the investment decouples
/// to the Merton ratio and the two lines decouple completely.
pub fn no_shock_baseline() -> ModelConfig {
    evp_comparison().without_market_jump()
}

/// [`evp_comparison`] under the variance premium principle on both lines.
pub fn variance_shock() -> ModelConfig {
    let mut cfg = evp_comparison();
    cfg.ordinary.premium = PremiumPrinciple::Variance {
        insurer_loading: 0.1,
        reinsurer_loading: 0.3,
    };
    cfg.catastrophic.premium = PremiumPrinciple::Variance {
        insurer_loading: 0.1,
        reinsurer_loading: 0.3,
    };
    cfg
}

/// All presets with their canonical names.
pub fn all() -> Vec<(&'static str, ModelConfig)> {
    vec![
        ("fig1", fig1()),
        ("fig2", fig2()),
        ("evp-comparison", evp_comparison()),
        ("no-shock-baseline", no_shock_baseline()),
        ("variance-shock", variance_shock()),
    ]
}

/// Looks a preset up by name. Matching is case-insensitive and treats `_`
/// and `-` as equal.
pub fn by_name(name: &str) -> Option<ModelConfig> {
    let norm = name.to_ascii_lowercase().replace('_', "-");
    all()
        .into_iter()
        .find(|(n, _)| *n == norm)
        .map(|(_, cfg)| cfg)
}

/// Canonical preset names, for CLI help and error messages.
pub fn names() -> Vec<&'static str> {
    all().into_iter().map(|(n, _)| n).collect()
}
