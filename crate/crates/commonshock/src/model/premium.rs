//! Premium principles for gross premia c(t, y) and proportional reinsurance
//! premia q(t, y, u).
//!
//! Built-in principles (expected value and variance) are polynomial in the
//! retention u, so their natural algebraic extension to u ∈ ℝ is used
//! everywhere: the first-order-condition functions are then well defined on
//! the whole real line, roots are found unclamped, and the optimal control is
//! obtained by projecting the root onto [0, 1] afterwards. With
//!
//! ```text
//! λ = λ(t, y),  m₁ = E[Z],  m₂ = E[Z²],  θ insurer loading,  θ_R reinsurer loading:
//!
//! expected value:  c = (1 + θ) m₁ λ          q(u) = (1 + θ_R) m₁ (1 − u) λ
//! variance:        c = m₁ λ + θ m₂ λ          q(u) = m₁ (1 − u) λ + θ_R m₂ (1 − u)² λ
//! ```
//!
//! A custom principle supplies closures for c, q, ∂q/∂u, ∂²q/∂u²; the
//! closures must themselves be globally defined in u and satisfy the premium
//! validator ([`crate::model::validate_premium`]).

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Premium principle attached to one insurance line.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "principle", rename_all = "kebab-case")]
pub enum PremiumPrinciple {
    /// c and q proportional to expected claim flow, loadings θ < θ_R.
    ExpectedValue {
        insurer_loading: f64,
        reinsurer_loading: f64,
    },
    /// Loadings applied to the claim-flow variance, θ < θ_R.
    Variance {
        insurer_loading: f64,
        reinsurer_loading: f64,
    },
    /// User-supplied premium functions. Not serializable: configs holding a
    /// custom principle are constructed in code, never parsed from JSON.
    #[serde(skip)]
    Custom(CustomPremium),
}

/// Closures defining a custom premium principle.
///
/// `gross(t, y)` is the insurer's premium rate c; `reinsurance(t, y, u)` is
/// the reinsurance premium rate q for retention u, and the two derivative
/// fields are ∂q/∂u and ∂²q/∂u², all defined for every real u.
#[derive(Clone)]
pub struct CustomPremium {
    pub gross: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub reinsurance: Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>,
    pub reinsurance_du: Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>,
    pub reinsurance_du2: Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for PremiumPrinciple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PremiumPrinciple::ExpectedValue {
                insurer_loading,
                reinsurer_loading,
            } => f
                .debug_struct("ExpectedValue")
                .field("insurer_loading", insurer_loading)
                .field("reinsurer_loading", reinsurer_loading)
                .finish(),
            PremiumPrinciple::Variance {
                insurer_loading,
                reinsurer_loading,
            } => f
                .debug_struct("Variance")
                .field("insurer_loading", insurer_loading)
                .field("reinsurer_loading", reinsurer_loading)
                .finish(),
            PremiumPrinciple::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl PremiumPrinciple {
    /// Loadings (θ, θ_R) for the built-in principles.
    pub fn loadings(&self) -> Option<(f64, f64)> {
        match self {
            PremiumPrinciple::ExpectedValue {
                insurer_loading,
                reinsurer_loading,
            }
            | PremiumPrinciple::Variance {
                insurer_loading,
                reinsurer_loading,
            } => Some((*insurer_loading, *reinsurer_loading)),
            PremiumPrinciple::Custom(_) => None,
        }
    }

    /// True for the expected-value principle (closed forms apply).
    pub fn is_expected_value(&self) -> bool {
        matches!(self, PremiumPrinciple::ExpectedValue { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serde_round_trip_builtins() {
        let p = PremiumPrinciple::Variance {
            insurer_loading: 0.05,
            reinsurer_loading: 0.15,
        };
        let js = serde_json::to_string(&p).unwrap();
        assert!(js.contains("variance"));
        let back: PremiumPrinciple = serde_json::from_str(&js).unwrap();
        assert_eq!(back.loadings(), Some((0.05, 0.15)));
    }

    #[test]
    fn custom_principle_not_serializable() {
        let id2 = Arc::new(|_t: f64, _y: f64| 1.0);
        let id3 = Arc::new(|_t: f64, _y: f64, _u: f64| 0.0);
        let p = PremiumPrinciple::Custom(CustomPremium {
            gross: id2,
            reinsurance: id3.clone(),
            reinsurance_du: id3.clone(),
            reinsurance_du2: id3,
        });
        assert!(serde_json::to_string(&p).is_err());
        assert!(p.loadings().is_none());
    }
}
