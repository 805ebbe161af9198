//! Claim-size distributions and exponentially tilted moments.
//!
//! Every first-order condition of the control problem contains integrals of
//! the form
//!
//! ```text
//! E[Zᵏ e^(c Z)] = ∫ zᵏ e^(c z) F(dz),   k ∈ {0, 1, 2},
//! ```
//!
//! with a state-dependent tilt c = γ B(t,T) (u + w k(t)). These are evaluated
//! in closed form for every supported law. Divergent moments (unbounded
//! support with c at or above the exponential rate) raise
//! [`ModelError::DivergentMoment`] instead of returning infinity; root
//! solvers treat that error as "+∞ on the increasing side".

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Claim-size law Z > 0 with finite second moment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum ClaimDistribution {
    /// Exponential with the given rate: density a·e^(−a z) on (0, ∞).
    Exponential { rate: f64 },
    /// Exponential conditioned on Z ≤ cap: density a·e^(−a z)/(1 − e^(−a·cap))
    /// on (0, cap].
    TruncatedExponential { rate: f64, cap: f64 },
    /// Finitely many atoms with probabilities summing to one. Atoms must be
    /// strictly increasing and positive.
    Discrete { atoms: Vec<f64>, weights: Vec<f64> },
}

impl ClaimDistribution {
    /// Checks structural invariants.
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidConfig(msg));
        match self {
            ClaimDistribution::Exponential { rate } => {
                if !(rate.is_finite() && *rate > 0.0) {
                    return bad(format!("exponential rate must be positive, got {rate}"));
                }
            }
            ClaimDistribution::TruncatedExponential { rate, cap } => {
                if !(rate.is_finite() && *rate > 0.0) {
                    return bad(format!("truncated-exponential rate must be positive, got {rate}"));
                }
                if !(cap.is_finite() && *cap > 0.0) {
                    return bad(format!("truncated-exponential cap must be positive, got {cap}"));
                }
            }
            ClaimDistribution::Discrete { atoms, weights } => {
                if atoms.is_empty() || atoms.len() != weights.len() {
                    return bad(format!(
                        "discrete law needs equal nonzero atom/weight counts, got {}/{}",
                        atoms.len(),
                        weights.len()
                    ));
                }
                if atoms.iter().any(|z| !(z.is_finite() && *z > 0.0)) {
                    return bad("discrete atoms must be finite and positive".into());
                }
                if atoms.windows(2).any(|w| !(w[1] > w[0])) {
                    return bad("discrete atoms must be strictly increasing".into());
                }
                if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                    return bad("discrete weights must be positive".into());
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return bad(format!("discrete weights must sum to 1, got {total}"));
                }
            }
        }
        Ok(())
    }

    /// Essential supremum of the support: `None` means unbounded.
    pub fn support_upper(&self) -> Option<f64> {
        match self {
            ClaimDistribution::Exponential { .. } => None,
            ClaimDistribution::TruncatedExponential { cap, .. } => Some(*cap),
            ClaimDistribution::Discrete { atoms, .. } => Some(*atoms.last().unwrap()),
        }
    }

    /// E[Z]. Always finite.
    pub fn mean(&self) -> f64 {
        self.tilted_moment(0.0, 1).expect("untilted mean is finite")
    }

    /// E[Z²]. Always finite.
    pub fn second_moment(&self) -> f64 {
        self.tilted_moment(0.0, 2).expect("untilted second moment is finite")
    }

    /// E[Zᵒʳᵈᵉʳ e^(tilt·Z)] for order ∈ {0, 1, 2}.
    ///
    /// Errors with [`ModelError::DivergentMoment`] when the integral diverges
    /// (exponential law, tilt ≥ rate) and [`ModelError::MomentOverflow`] when
    /// the finite value exceeds the f64 range.
    pub fn tilted_moment(&self, tilt: f64, order: u8) -> Result<f64, ModelError> {
        assert!(order <= 2, "tilted_moment supports orders 0, 1, 2");
        let value = match self {
            ClaimDistribution::Exponential { rate } => {
                if tilt >= *rate {
                    return Err(ModelError::DivergentMoment {
                        tilt,
                        rate: *rate,
                        order,
                    });
                }
                let gap = rate - tilt;
                match order {
                    0 => rate / gap,
                    1 => rate / (gap * gap),
                    _ => 2.0 * rate / (gap * gap * gap),
                }
            }
            ClaimDistribution::TruncatedExponential { rate, cap } => {
                let b = tilt - rate;
                if b * cap > 700.0 {
                    return Err(ModelError::MomentOverflow { tilt, order });
                }
                let mass = -(-rate * cap).exp_m1(); // 1 − e^(−a·cap)
                rate * exp_poly_integral(b, *cap, order) / mass
            }
            ClaimDistribution::Discrete { atoms, weights } => {
                let mut acc = 0.0;
                for (&z, &w) in atoms.iter().zip(weights) {
                    let e = tilt * z;
                    if e > 700.0 {
                        return Err(ModelError::MomentOverflow { tilt, order });
                    }
                    acc += w * z.powi(order as i32) * e.exp();
                }
                acc
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(ModelError::MomentOverflow { tilt, order })
        }
    }

    /// Quantile function F⁻¹(p) for p ∈ [0, 1). Used for inversion sampling
    /// and for probing jump-size bounds at extreme quantiles.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0 - 1e-16);
        match self {
            ClaimDistribution::Exponential { rate } => -(-p).ln_1p() / rate,
            ClaimDistribution::TruncatedExponential { rate, cap } => {
                let mass = -(-rate * cap).exp_m1();
                (-(p * mass)).ln_1p() / -rate
            }
            ClaimDistribution::Discrete { atoms, weights } => {
                let mut cum = 0.0;
                for (&z, &w) in atoms.iter().zip(weights) {
                    cum += w;
                    if p < cum {
                        return z;
                    }
                }
                *atoms.last().unwrap()
            }
        }
    }

    /// Inversion sampler: maps a uniform draw u ∈ [0, 1) to a claim size.
    /// Deterministic in u, so antithetic mirroring u ↦ 1 − u yields
    /// complementary quantiles.
    pub fn sample_from_uniform(&self, u: f64) -> f64 {
        self.quantile(u)
    }
}

/// Stable ∫₀^d zᵏ e^(b z) dz for k ∈ {0, 1, 2}.
///
/// Near b·d = 0 the closed forms (e.g. expm1(bd)/b) cancel catastrophically,
/// so a short power series in x = b·d takes over:
///
/// ```text
/// ∫₀^d zᵏ e^(bz) dz = d^(k+1) Σ_{n≥0} xⁿ / (n! (n+k+1))
/// ```
fn exp_poly_integral(b: f64, d: f64, order: u8) -> f64 {
    let x = b * d;
    if x.abs() <= 0.5 {
        let mut term = 1.0; // xⁿ/n!
        let mut acc = 0.0;
        for n in 0..40u32 {
            let contrib = term / (n as f64 + order as f64 + 1.0);
            acc += contrib;
            if contrib.abs() < 1e-20 * acc.abs().max(1.0) {
                break;
            }
            term *= x / (n as f64 + 1.0);
        }
        return acc * d.powi(order as i32 + 1);
    }
    let i0 = x.exp_m1() / b;
    if order == 0 {
        return i0;
    }
    let ex = x.exp();
    let i1 = (d * ex - i0) / b;
    if order == 1 {
        return i1;
    }
    (d * d * ex - 2.0 * i1) / b
}
