//! Deterministic time-dependent coefficients.
//!
//! Every deterministic input of the model (r, μ, σ, factor drift and
//! volatility b⁽ⁱ⁾ and a⁽ⁱ⁾, intensity bounds δ⁽ⁱ⁾, jump slope k) is a
//! [`TimeCoefficient`]: constant, piecewise constant, or tabulated with
//! linear interpolation. All three kinds integrate exactly, which keeps the
//! accumulation factor B(t, T) = exp(∫_t^T r(s) ds) and the per-step factor
//! moments of the simulator free of quadrature error.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// A deterministic, measurable, bounded coefficient of time on `[0, T]`.
///
/// Outside its defining range a coefficient extends by its boundary value,
/// so evaluation is total on ℝ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TimeCoefficient {
    /// f(t) = value.
    Constant { value: f64 },
    /// f(t) = values[i] on [breaks[i], breaks[i+1]), with breaks[0] = 0 and
    /// the last value extending to +∞.
    PiecewiseConstant { breaks: Vec<f64>, values: Vec<f64> },
    /// Linear interpolation through (times[i], values[i]), clamped outside
    /// [times.first(), times.last()].
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

impl TimeCoefficient {
    /// Constant coefficient.
    pub fn constant(value: f64) -> Self {
        TimeCoefficient::Constant { value }
    }

    /// Checks structural invariants. `horizon` is the model horizon T; the
    /// coefficient must be usable on all of `[0, horizon]`.
    pub fn validate(&self, horizon: f64) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidConfig(msg));
        if !(horizon > 0.0) || !horizon.is_finite() {
            return bad(format!("horizon must be finite and positive, got {horizon}"));
        }
        match self {
            TimeCoefficient::Constant { value } => {
                if !value.is_finite() {
                    return bad(format!("constant coefficient must be finite, got {value}"));
                }
            }
            TimeCoefficient::PiecewiseConstant { breaks, values } => {
                if breaks.is_empty() || breaks.len() != values.len() {
                    return bad(format!(
                        "piecewise coefficient needs equal nonzero break/value counts, got {}/{}",
                        breaks.len(),
                        values.len()
                    ));
                }
                if breaks[0] != 0.0 {
                    return bad(format!("first break must be 0, got {}", breaks[0]));
                }
                if breaks.windows(2).any(|w| !(w[1] > w[0])) {
                    return bad("breaks must be strictly increasing".into());
                }
                if breaks.iter().chain(values).any(|v| !v.is_finite()) {
                    return bad("piecewise breaks and values must be finite".into());
                }
            }
            TimeCoefficient::Tabulated { times, values } => {
                if times.len() < 2 || times.len() != values.len() {
                    return bad(format!(
                        "tabulated coefficient needs >= 2 nodes and equal time/value counts, got {}/{}",
                        times.len(),
                        values.len()
                    ));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return bad("tabulated times must be strictly increasing".into());
                }
                if times.iter().chain(values).any(|v| !v.is_finite()) {
                    return bad("tabulated times and values must be finite".into());
                }
            }
        }
        Ok(())
    }

    /// Point evaluation f(t), clamped to the defining range.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeCoefficient::Constant { value } => *value,
            TimeCoefficient::PiecewiseConstant { breaks, values } => {
                let idx = breaks.partition_point(|&b| b <= t);
                values[idx.saturating_sub(1).min(values.len() - 1)]
            }
            TimeCoefficient::Tabulated { times, values } => {
                let n = times.len();
                if t <= times[0] {
                    return values[0];
                }
                if t >= times[n - 1] {
                    return values[n - 1];
                }
                let hi = times.partition_point(|&s| s <= t).min(n - 1);
                let lo = hi - 1;
                let frac = (t - times[lo]) / (times[hi] - times[lo]);
                values[lo] + frac * (values[hi] - values[lo])
            }
        }
    }

    /// Exact ∫_a^b f(s) ds. Antisymmetric in the limits.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if a > b {
            return -self.integral(b, a);
        }
        self.fold_segments(a, b, |x1, v1, x2, v2| (x2 - x1) * 0.5 * (v1 + v2))
    }

    /// Exact ∫_a^b f(s)² ds (symmetric in the limits). On each linear piece
    /// from v₁ to v₂, ∫ f² = (x₂−x₁)(v₁² + v₁v₂ + v₂²)/3, which reduces to
    /// (x₂−x₁)v² on constant pieces.
    pub fn square_integral(&self, a: f64, b: f64) -> f64 {
        if a > b {
            return self.square_integral(b, a);
        }
        self.fold_segments(a, b, |x1, v1, x2, v2| {
            (x2 - x1) * (v1 * v1 + v1 * v2 + v2 * v2) / 3.0
        })
    }

    /// Exact ∫_a^b |f(s)| ds (a ≤ b required by all callers; symmetric).
    pub fn abs_integral(&self, a: f64, b: f64) -> f64 {
        if a > b {
            return self.abs_integral(b, a);
        }
        self.fold_segments(a, b, |x1, v1, x2, v2| {
            if v1 * v2 >= 0.0 {
                (x2 - x1) * 0.5 * (v1.abs() + v2.abs())
            } else {
                // Linear segment crossing zero: two triangles.
                let root = x1 + (x2 - x1) * v1 / (v1 - v2);
                0.5 * (root - x1) * v1.abs() + 0.5 * (x2 - root) * v2.abs()
            }
        })
    }

    /// Exact minimum of f over [a, b].
    pub fn min_on(&self, a: f64, b: f64) -> f64 {
        self.extremum(a, b, f64::min)
    }

    /// Exact maximum of f over [a, b].
    pub fn max_on(&self, a: f64, b: f64) -> f64 {
        self.extremum(a, b, f64::max)
    }

    /// Maximum of |f| over [a, b].
    pub fn abs_max_on(&self, a: f64, b: f64) -> f64 {
        self.min_on(a, b).abs().max(self.max_on(a, b).abs())
    }

    fn extremum(&self, a: f64, b: f64, pick: fn(f64, f64) -> f64) -> f64 {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let mut best = pick(self.eval(a), self.eval(b));
        let nodes: &[f64] = match self {
            TimeCoefficient::Constant { .. } => &[],
            TimeCoefficient::PiecewiseConstant { breaks, .. } => breaks,
            TimeCoefficient::Tabulated { times, .. } => times,
        };
        for (i, &s) in nodes.iter().enumerate() {
            if s >= a && s <= b {
                best = pick(best, self.eval(s));
                // Piecewise segments are right-open: probe the segment value
                // itself, which eval(s) already returns. For the segment that
                // straddles `b`, eval(b) above covers it.
                let _ = i;
            }
        }
        best
    }

    /// Splits [a, b] at every node of the coefficient and folds the linear
    /// (or constant) pieces through `piece(x1, f(x1), x2, f(x2))`.
    fn fold_segments(&self, a: f64, b: f64, piece: impl Fn(f64, f64, f64, f64) -> f64) -> f64 {
        debug_assert!(a <= b);
        if a == b {
            return 0.0;
        }
        let mut cuts: Vec<f64> = vec![a];
        let nodes: &[f64] = match self {
            TimeCoefficient::Constant { .. } => &[],
            TimeCoefficient::PiecewiseConstant { breaks, .. } => breaks,
            TimeCoefficient::Tabulated { times, .. } => times,
        };
        for &s in nodes {
            if s > a && s < b {
                cuts.push(s);
            }
        }
        cuts.push(b);
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (x1, x2) = (w[0], w[1]);
            // On a piecewise-constant segment the right endpoint belongs to
            // the next piece, so evaluate the midpoint-safe left value.
            let (v1, v2) = match self {
                TimeCoefficient::PiecewiseConstant { .. } => {
                    let v = self.eval(x1);
                    (v, v)
                }
                _ => (self.eval(x1), self.eval(x2)),
            };
            total += piece(x1, v1, x2, v2);
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        // Composite Simpson oracle, n even.
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn constant_eval_and_integral() {
        let c = TimeCoefficient::constant(0.02);
        assert_eq!(c.eval(-1.0), 0.02);
        assert_eq!(c.eval(0.7), 0.02);
        // [TRIVIAL] ∫_0^2 0.02 = 0.04
        assert!((c.integral(0.0, 2.0) - 0.04).abs() < 1e-15);
        assert!((c.integral(2.0, 0.0) + 0.04).abs() < 1e-15);
    }

    #[test]
    fn piecewise_eval_integral_extrema() {
        let c = TimeCoefficient::PiecewiseConstant {
            breaks: vec![0.0, 1.0, 2.0],
            values: vec![1.0, -2.0, 3.0],
        };
        c.validate(3.0).unwrap();
        assert_eq!(c.eval(0.0), 1.0);
        assert_eq!(c.eval(0.999), 1.0);
        assert_eq!(c.eval(1.0), -2.0);
        assert_eq!(c.eval(5.0), 3.0);
        assert_eq!(c.eval(-1.0), 1.0);
        // [DERIVED] ∫_0.5^2.5: 0.5·1 + 1·(−2) + 0.5·3 = 0.0
        assert!((c.integral(0.5, 2.5) - 0.0).abs() < 1e-15);
        // [DERIVED] ∫|f| over the same window: 0.5 + 2 + 1.5 = 4
        assert!((c.abs_integral(0.5, 2.5) - 4.0).abs() < 1e-15);
        assert_eq!(c.min_on(0.5, 2.5), -2.0);
        assert_eq!(c.max_on(0.5, 2.5), 3.0);
        assert_eq!(c.max_on(0.0, 0.5), 1.0);
    }

    #[test]
    fn tabulated_matches_simpson_oracle() {
        let c = TimeCoefficient::Tabulated {
            times: vec![0.0, 0.5, 1.5, 2.0],
            values: vec![1.0, 3.0, -1.0, 0.5],
        };
        c.validate(2.0).unwrap();
        // Interpolation midpoint: (1+3)/2 at t = 0.25.
        assert!((c.eval(0.25) - 2.0).abs() < 1e-15);
        // Clamping outside the table.
        assert_eq!(c.eval(-3.0), 1.0);
        assert_eq!(c.eval(9.0), 0.5);
        // [DERIVED] exact trapezoid vs Simpson on the smooth pieces; the
        // integrand is piecewise linear so Simpson with aligned panels is
        // also exact.
        let oracle = simpson(|t| c.eval(t), 0.0, 0.5, 64)
            + simpson(|t| c.eval(t), 0.5, 1.5, 64)
            + simpson(|t| c.eval(t), 1.5, 2.0, 64);
        assert!((c.integral(0.0, 2.0) - oracle).abs() < 1e-12);
        // Extension segments: ∫_{-1}^{0} = 1, ∫_2^3 = 0.5.
        assert!((c.integral(-1.0, 3.0) - (oracle + 1.5)).abs() < 1e-12);
    }

    #[test]
    fn tabulated_abs_integral_splits_at_sign_change() {
        let c = TimeCoefficient::Tabulated {
            times: vec![0.0, 1.0],
            values: vec![-1.0, 1.0],
        };
        // [DERIVED] f(t) = 2t − 1 on [0,1]: ∫|f| = 1/4 + 1/4 = 1/2.
        assert!((c.abs_integral(0.0, 1.0) - 0.5).abs() < 1e-15);
        assert!((c.integral(0.0, 1.0) - 0.0).abs() < 1e-15);
        assert_eq!(c.min_on(0.0, 1.0), -1.0);
        assert_eq!(c.abs_max_on(0.25, 0.6), 0.5);
    }

    #[test]
    fn square_integral_matches_simpson_oracle() {
        // [TRIVIAL] constant: ∫_0^2 0.3² = 0.18.
        let c = TimeCoefficient::constant(0.3);
        assert!((c.square_integral(0.0, 2.0) - 0.18).abs() < 1e-15);
        // [DERIVED] piecewise: 1·1² + 0.5·(−2)² = 3.
        let pw = TimeCoefficient::PiecewiseConstant {
            breaks: vec![0.0, 1.0],
            values: vec![1.0, -2.0],
        };
        assert!((pw.square_integral(0.0, 1.5) - 3.0).abs() < 1e-15);
        // [DERIVED] tabulated vs Simpson (exact for piecewise quadratics).
        let tab = TimeCoefficient::Tabulated {
            times: vec![0.0, 0.5, 1.5, 2.0],
            values: vec![1.0, 3.0, -1.0, 0.5],
        };
        let oracle = simpson(|t| tab.eval(t) * tab.eval(t), 0.0, 0.5, 64)
            + simpson(|t| tab.eval(t) * tab.eval(t), 0.5, 1.5, 64)
            + simpson(|t| tab.eval(t) * tab.eval(t), 1.5, 2.0, 64);
        assert!((tab.square_integral(0.0, 2.0) - oracle).abs() < 1e-12);
        assert_eq!(
            tab.square_integral(1.8, 0.2),
            tab.square_integral(0.2, 1.8)
        );
    }

    #[test]
    fn validation_rejects_malformed_tables() {
        let unsorted = TimeCoefficient::Tabulated {
            times: vec![0.0, 0.5, 0.5],
            values: vec![1.0, 2.0, 3.0],
        };
        assert!(unsorted.validate(1.0).is_err());
        let bad_break = TimeCoefficient::PiecewiseConstant {
            breaks: vec![0.5, 1.0],
            values: vec![1.0, 2.0],
        };
        assert!(bad_break.validate(1.0).is_err());
        let nan = TimeCoefficient::constant(f64::NAN);
        assert!(nan.validate(1.0).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let c = TimeCoefficient::PiecewiseConstant {
            breaks: vec![0.0, 0.25],
            values: vec![0.01, 0.03],
        };
        let js = serde_json::to_string(&c).unwrap();
        assert!(js.contains("piecewise-constant"));
        let back: TimeCoefficient = serde_json::from_str(&js).unwrap();
        assert_eq!(back, c);
    }
}
