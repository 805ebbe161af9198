//! Tabulated strategy fields and the [`Strategy`] abstraction used by the
//! simulator.
//!
//! A [`StrategyField`] caches the pointwise optimal controls on a rectangular
//! (t, y) grid per line and answers queries by bilinear interpolation with
//! clamping outside the grid. Tabulation is embarrassingly parallel across
//! nodes and runs on the rayon pool.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::model::ModelConfig;
use crate::strategy::{
    optimal_first_retention, optimal_second_line, RetentionRegion, SignRegion,
};
use crate::util::{linspace, locate};

/// Controls applied at one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyPoint {
    /// u⁽¹⁾ ∈ [0, 1].
    pub first_retention: f64,
    /// u⁽²⁾ ∈ [0, 1].
    pub second_retention: f64,
    /// w ∈ ℝ (amount of wealth in the risky asset).
    pub investment: f64,
}

/// A feedback strategy: controls as a function of (t, Y¹, Y²).
///
/// Implementations must be pure functions of the state so that common-random-
/// number comparisons stay valid.
pub trait Strategy: Sync {
    fn point(&self, t: f64, y1: f64, y2: f64) -> StrategyPoint;

    /// Short human-readable tag for reports.
    fn label(&self) -> String {
        "strategy".into()
    }
}

impl<S: Strategy + ?Sized> Strategy for &S {
    fn point(&self, t: f64, y1: f64, y2: f64) -> StrategyPoint {
        (**self).point(t, y1, y2)
    }

    fn label(&self) -> String {
        (**self).label()
    }
}

/// State-independent controls.
#[derive(Debug, Clone, Copy)]
pub struct ConstantStrategy {
    pub first_retention: f64,
    pub second_retention: f64,
    pub investment: f64,
}

impl Strategy for ConstantStrategy {
    fn point(&self, _t: f64, _y1: f64, _y2: f64) -> StrategyPoint {
        StrategyPoint {
            first_retention: self.first_retention,
            second_retention: self.second_retention,
            investment: self.investment,
        }
    }

    fn label(&self) -> String {
        format!(
            "constant(u1={}, u2={}, w={})",
            self.first_retention, self.second_retention, self.investment
        )
    }
}

/// A base strategy with shifted retentions (clamped back into [0, 1]) and a
/// scaled investment. Used by the optimality verifier.
#[derive(Clone, Copy)]
pub struct PerturbedStrategy<'a, S: Strategy + ?Sized> {
    pub base: &'a S,
    /// Multiplier on w.
    pub investment_scale: f64,
    /// Additive shift on u⁽¹⁾ before clamping.
    pub first_shift: f64,
    /// Additive shift on u⁽²⁾ before clamping.
    pub second_shift: f64,
}

impl<'a, S: Strategy + ?Sized> Strategy for PerturbedStrategy<'a, S> {
    fn point(&self, t: f64, y1: f64, y2: f64) -> StrategyPoint {
        let base = self.base.point(t, y1, y2);
        StrategyPoint {
            first_retention: (base.first_retention + self.first_shift).clamp(0.0, 1.0),
            second_retention: (base.second_retention + self.second_shift).clamp(0.0, 1.0),
            investment: base.investment * self.investment_scale,
        }
    }

    fn label(&self) -> String {
        format!(
            "perturbed(du1={:+}, du2={:+}, w x {})",
            self.first_shift, self.second_shift, self.investment_scale
        )
    }
}

/// Optimal controls tabulated on a grid, per line.
///
/// The time grid is shared; the factor grids of the two lines have equal
/// length (so the field exports as a single rectangular CSV) but their spans
/// differ. Queries clamp to the grid, which is harmless when the grid covers
/// the simulated factor range (the default span is ±6·max a(t)·√T around y₀).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategyField {
    pub times: Vec<f64>,
    pub first_factors: Vec<f64>,
    pub second_factors: Vec<f64>,
    /// Row-major over times × first_factors.
    pub first_retention: Vec<f64>,
    pub first_region: Vec<RetentionRegion>,
    /// Row-major over times × second_factors.
    pub second_retention: Vec<f64>,
    pub investment: Vec<f64>,
    pub second_region: Vec<RetentionRegion>,
    pub sign: Vec<SignRegion>,
}

impl StrategyField {
    /// Default tabulation grids: `nt` times on [0, T], `ny` factor levels per
    /// line spanning y₀ ± max(6·max|a(t)|·√T, 0.5).
    pub fn default_grids(cfg: &ModelConfig, nt: usize, ny: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let horizon = cfg.horizon();
        let times = linspace(0.0, horizon, nt);
        let span = |line: &crate::model::InsuranceLine| {
            let a_max = line.factor_volatility.abs_max_on(0.0, horizon);
            let half = (6.0 * a_max * horizon.sqrt()).max(0.5);
            linspace(
                line.initial_factor - half,
                line.initial_factor + half,
                ny,
            )
        };
        (times, span(&cfg.ordinary), span(&cfg.catastrophic))
    }

    /// Tabulates the optimal controls of `cfg` on the given grids.
    pub fn tabulate(
        cfg: &ModelConfig,
        times: Vec<f64>,
        first_factors: Vec<f64>,
        second_factors: Vec<f64>,
    ) -> Result<Self, SolveError> {
        assert!(times.len() >= 2 && first_factors.len() >= 2 && second_factors.len() >= 2);
        assert_eq!(
            first_factors.len(),
            second_factors.len(),
            "factor grids must have equal length"
        );
        let nt = times.len();
        let n1 = first_factors.len();
        let n2 = second_factors.len();

        let first: Vec<_> = (0..nt * n1)
            .into_par_iter()
            .map(|idx| optimal_first_retention(cfg, times[idx / n1], first_factors[idx % n1]))
            .collect::<Result<_, _>>()?;
        let second: Vec<_> = (0..nt * n2)
            .into_par_iter()
            .map(|idx| optimal_second_line(cfg, times[idx / n2], second_factors[idx % n2]))
            .collect::<Result<_, _>>()?;

        Ok(StrategyField {
            times,
            first_factors,
            second_factors,
            first_retention: first.iter().map(|s| s.retention).collect(),
            first_region: first.iter().map(|s| s.region).collect(),
            second_retention: second.iter().map(|s| s.retention).collect(),
            investment: second.iter().map(|s| s.investment).collect(),
            second_region: second.iter().map(|s| s.region).collect(),
            sign: second.iter().map(|s| s.sign).collect(),
        })
    }

    /// Tabulates the no-shock counterfactual (K ≡ 0) on the same grids.
    pub fn tabulate_no_shock(
        cfg: &ModelConfig,
        times: Vec<f64>,
        first_factors: Vec<f64>,
        second_factors: Vec<f64>,
    ) -> Result<Self, SolveError> {
        Self::tabulate(
            &cfg.without_market_jump(),
            times,
            first_factors,
            second_factors,
        )
    }

    /// Bilinear interpolation on one surface, clamped to the grid.
    fn interp(&self, values: &[f64], factors: &[f64], t: f64, y: f64) -> f64 {
        let (i, ft) = locate(&self.times, t);
        let (j, fy) = locate(factors, y);
        let n = factors.len();
        let v00 = values[i * n + j];
        let v01 = values[i * n + (j + 1).min(n - 1)];
        let v10 = values[(i + 1).min(self.times.len() - 1) * n + j];
        let v11 = values[(i + 1).min(self.times.len() - 1) * n + (j + 1).min(n - 1)];
        let top = v00 + fy * (v01 - v00);
        let bottom = v10 + fy * (v11 - v10);
        top + ft * (bottom - top)
    }

    /// CSV export: one row per (t, factor index) with both lines' states and
    /// controls; region labels are spelled out.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "t,y1,first_retention,first_region,y2,second_retention,investment,second_region,sign\n",
        );
        let n = self.second_factors.len();
        for (i, &t) in self.times.iter().enumerate() {
            for j in 0..n {
                let idx = i * n + j;
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    t,
                    self.first_factors[j],
                    self.first_retention[idx],
                    self.first_region[idx].label(),
                    self.second_factors[j],
                    self.second_retention[idx],
                    self.investment[idx],
                    self.second_region[idx].label(),
                    self.sign[idx].label(),
                ));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("field serialization cannot fail")
    }
}

impl Strategy for StrategyField {
    fn point(&self, t: f64, y1: f64, y2: f64) -> StrategyPoint {
        StrategyPoint {
            first_retention: self.interp(&self.first_retention, &self.first_factors, t, y1),
            second_retention: self.interp(&self.second_retention, &self.second_factors, t, y2),
            investment: self.interp(&self.investment, &self.second_factors, t, y2),
        }
    }

    fn label(&self) -> String {
        "optimal-field".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::presets;

    fn small_field(cfg: &ModelConfig) -> StrategyField {
        let (ts, y1s, y2s) = StrategyField::default_grids(cfg, 5, 9);
        StrategyField::tabulate(cfg, ts, y1s, y2s).unwrap()
    }

    #[test]
    fn field_reproduces_nodes_exactly() {
        let cfg = presets::evp_comparison();
        let field = small_field(&cfg);
        for (i, &t) in field.times.iter().enumerate() {
            for (j, (&y1, &y2)) in field
                .first_factors
                .iter()
                .zip(&field.second_factors)
                .enumerate()
            {
                let p = field.point(t, y1, y2);
                let idx = i * field.second_factors.len() + j;
                assert!((p.first_retention - field.first_retention[idx]).abs() < 1e-12);
                assert!((p.second_retention - field.second_retention[idx]).abs() < 1e-12);
                assert!((p.investment - field.investment[idx]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn interpolation_stays_within_corner_range() {
        let cfg = presets::evp_comparison();
        let field = small_field(&cfg);
        let (t0, t1) = (field.times[1], field.times[2]);
        let (y0, y1) = (field.second_factors[3], field.second_factors[4]);
        let n = field.second_factors.len();
        let corners = [
            field.investment[n + 3],
            field.investment[n + 4],
            field.investment[2 * n + 3],
            field.investment[2 * n + 4],
        ];
        let lo = corners.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = corners.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let p = field.point(0.5 * (t0 + t1), 0.0, 0.5 * (y0 + y1));
        assert!(p.investment >= lo - 1e-12 && p.investment <= hi + 1e-12);
    }

    #[test]
    fn queries_clamp_outside_the_grid() {
        let cfg = presets::evp_comparison();
        let field = small_field(&cfg);
        let inside = field.point(0.0, field.first_factors[0], field.second_factors[0]);
        let outside = field.point(-5.0, -100.0, -100.0);
        assert_eq!(inside.investment, outside.investment);
        assert_eq!(inside.first_retention, outside.first_retention);
    }

    #[test]
    fn no_shock_field_has_flat_merton_investment() {
        let cfg = presets::evp_comparison();
        let (ts, y1s, y2s) = StrategyField::default_grids(&cfg, 4, 7);
        let field = StrategyField::tabulate_no_shock(&cfg, ts, y1s, y2s).unwrap();
        // Without jumps the optimal investment is deterministic in y.
        let n = field.second_factors.len();
        for i in 0..field.times.len() {
            let row = &field.investment[i * n..(i + 1) * n];
            for v in row {
                assert!((v - row[0]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn perturbations_clamp_and_scale() {
        let base = ConstantStrategy {
            first_retention: 0.95,
            second_retention: 0.1,
            investment: -2.0,
        };
        let p = PerturbedStrategy {
            base: &base,
            investment_scale: 1.1,
            first_shift: 0.1,
            second_shift: -0.2,
        };
        let pt = p.point(0.0, 0.0, 0.0);
        assert_eq!(pt.first_retention, 1.0);
        assert_eq!(pt.second_retention, 0.0);
        assert!((pt.investment + 2.2).abs() < 1e-15);
    }

    #[test]
    fn csv_and_json_exports() {
        let cfg = presets::evp_comparison();
        let field = small_field(&cfg);
        let csv = field.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(
            lines.len(),
            1 + field.times.len() * field.second_factors.len()
        );
        assert!(lines[0].starts_with("t,y1,first_retention"));
        let js = field.to_json();
        let back: StrategyField = serde_json::from_str(&js).unwrap();
        assert_eq!(back.investment, field.investment);
    }
}
