//! Model validation batteries with human-readable and JSON reports.
//!
//! Two validators cover the standing assumptions of the control problem:
//!
//! - [`validate_premium`]: the premium-principle requirements on one line
//!   (no reinsurance costs nothing; full reinsurance is dearer than the
//!   gross premium; q decreases and is convex in the retention).
//! - [`validate_admissibility`]: the conditions that make the optimisation
//!   well posed (intensity dominance λ ≤ δ, premium dominance q(·,·,0) ≤ δ,
//!   the exponential claim moments E[e^{2γB̄Z}] and E[Z²e^{γB̄Z}], a bounded
//!   market price of risk, and the integrability constant κ).
//!
//! Analytic conditions are checked exactly where possible (moment
//! divergence, coefficient extrema); state-dependent inequalities are probed
//! on a [`SamplingGrid`], and every failed check records its worst point.

use serde::Serialize;
use std::fmt;

use crate::model::{InsuranceLine, LineId, ModelConfig};
use crate::util::linspace;

/// Probe grid for state-dependent validation checks.
#[derive(Debug, Clone)]
pub struct SamplingGrid {
    /// Times in [0, T].
    pub times: Vec<f64>,
    /// Factor levels y.
    pub factors: Vec<f64>,
    /// Retentions u in [0, 1].
    pub retentions: Vec<f64>,
}

impl SamplingGrid {
    pub fn new(times: Vec<f64>, factors: Vec<f64>, retentions: Vec<f64>) -> Self {
        assert!(!times.is_empty() && !factors.is_empty() && !retentions.is_empty());
        SamplingGrid {
            times,
            factors,
            retentions,
        }
    }

    /// Default probe grid for one line: 41 times across the horizon, 41
    /// factor levels spanning y₀ ± 5·max a(t)·√T (at least ±0.5), and 21
    /// retentions in [0, 1].
    pub fn for_line(cfg: &ModelConfig, id: LineId) -> Self {
        let horizon = cfg.horizon();
        let line = cfg.line(id);
        let a_max = line.factor_volatility.abs_max_on(0.0, horizon);
        let half_width = (5.0 * a_max * horizon.sqrt()).max(0.5);
        SamplingGrid {
            times: linspace(0.0, horizon, 41),
            factors: linspace(
                line.initial_factor - half_width,
                line.initial_factor + half_width,
                41,
            ),
            retentions: linspace(0.0, 1.0, 21),
        }
    }
}

/// Outcome of a single named check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// What was computed and against which threshold.
    pub detail: String,
    /// State at which the worst margin was attained, when meaningful.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_y: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_value: Option<f64>,
}

impl CheckResult {
    pub(crate) fn pass(name: impl Into<String>, detail: String) -> Self {
        CheckResult {
            name: name.into(),
            passed: true,
            detail,
            worst_t: None,
            worst_y: None,
            worst_value: None,
        }
    }

    pub(crate) fn fail(name: impl Into<String>, detail: String) -> Self {
        CheckResult {
            passed: false,
            ..CheckResult::pass(name, detail)
        }
    }

    pub(crate) fn at(mut self, t: f64, y: f64, value: f64) -> Self {
        self.worst_t = Some(t);
        self.worst_y = Some(y);
        self.worst_value = Some(value);
        self
    }
}

/// A battery of named checks over one subject (a line or a whole config).
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub subject: String,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn new(subject: impl Into<String>) -> Self {
        ValidationReport {
            subject: subject.into(),
            checks: Vec::new(),
        }
    }

    /// True when every check passed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub(crate) fn push(&mut self, check: CheckResult) {
        self.checks.push(check);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "validation of {}: {}",
            self.subject,
            if self.passed() { "PASS" } else { "FAIL" }
        )?;
        for c in &self.checks {
            write!(
                f,
                "  [{}] {}: {}",
                if c.passed { "pass" } else { "FAIL" },
                c.name,
                c.detail
            )?;
            if let (Some(t), Some(y)) = (c.worst_t, c.worst_y) {
                write!(f, " (worst at t = {t:.4}, y = {y:.4})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Scans `f` over the (t, y) grid and returns (max value, argmax t, argmax y).
fn grid_max(grid: &SamplingGrid, mut f: impl FnMut(f64, f64) -> f64) -> (f64, f64, f64) {
    let mut best = (f64::NEG_INFINITY, grid.times[0], grid.factors[0]);
    for &t in &grid.times {
        for &y in &grid.factors {
            let v = f(t, y);
            if v > best.0 {
                best = (v, t, y);
            }
        }
    }
    best
}

/// Validates the premium-principle requirements on one line over a probe
/// grid: q(t, y, 1) = 0, q(t, y, 0) > c(t, y), ∂q/∂u ≤ 0, and ∂²q/∂u² ≥ 0.
pub fn validate_premium(line: &InsuranceLine, grid: &SamplingGrid) -> ValidationReport {
    let mut report = ValidationReport::new("premium principle");
    let scale = line
        .gross_premium(grid.times[0], line.initial_factor)
        .abs()
        .max(1.0);

    let (worst_q1, t1, y1) = grid_max(grid, |t, y| line.reinsurance_premium(t, y, 1.0).abs());
    let tol = 1e-10 * scale;
    report.push(if worst_q1 <= tol {
        CheckResult::pass(
            "full retention costs nothing",
            format!("max |q(t, y, 1)| = {worst_q1:.3e} <= {tol:.1e}"),
        )
    } else {
        CheckResult::fail(
            "full retention costs nothing",
            format!("max |q(t, y, 1)| = {worst_q1:.3e} > {tol:.1e}"),
        )
        .at(t1, y1, worst_q1)
    });

    let (worst_gap, t2, y2) = grid_max(grid, |t, y| {
        line.gross_premium(t, y) - line.reinsurance_premium(t, y, 0.0)
    });
    report.push(if worst_gap < 0.0 {
        CheckResult::pass(
            "full reinsurance dearer than gross premium",
            format!("max (c - q(., ., 0)) = {worst_gap:.3e} < 0"),
        )
    } else {
        CheckResult::fail(
            "full reinsurance dearer than gross premium",
            format!("c - q(., ., 0) reaches {worst_gap:.3e} >= 0"),
        )
        .at(t2, y2, worst_gap)
    });

    let mut worst_slope = (f64::NEG_INFINITY, 0.0, 0.0);
    let mut worst_curv = (f64::INFINITY, 0.0, 0.0);
    for &t in &grid.times {
        for &y in &grid.factors {
            for &u in &grid.retentions {
                let du = line.reinsurance_premium_du(t, y, u);
                if du > worst_slope.0 {
                    worst_slope = (du, t, y);
                }
                let du2 = line.reinsurance_premium_du2(t, y, u);
                if du2 < worst_curv.0 {
                    worst_curv = (du2, t, y);
                }
            }
        }
    }
    report.push(if worst_slope.0 <= 1e-12 * scale {
        CheckResult::pass(
            "q decreasing in retention",
            format!("max dq/du = {:.3e}", worst_slope.0),
        )
    } else {
        CheckResult::fail(
            "q decreasing in retention",
            format!("dq/du reaches {:.3e} > 0", worst_slope.0),
        )
        .at(worst_slope.1, worst_slope.2, worst_slope.0)
    });
    report.push(if worst_curv.0 >= -1e-12 * scale {
        CheckResult::pass(
            "q convex in retention",
            format!("min d2q/du2 = {:.3e}", worst_curv.0),
        )
    } else {
        CheckResult::fail(
            "q convex in retention",
            format!("d2q/du2 reaches {:.3e} < 0", worst_curv.0),
        )
        .at(worst_curv.1, worst_curv.2, worst_curv.0)
    });

    report
}

/// Validates the admissibility conditions of the whole configuration.
///
/// Per line: λ(t, y) ≤ δ(t) and q(t, y, 0) ≤ δ(t) on the probe grid, then
/// the moment conditions E[e^{2γB̄Z}] < ∞ and E[Z² e^{γB̄Z}] < ∞ (exact:
/// divergence is detected analytically, not sampled). Globally: the market
/// price of risk sup |μ − r|/σ and the integrability constant
/// κ = (2/σ_min²)·B̄·E[e^{γB̄ Z⁽²⁾}], reported with the log-space bound
/// ln ∫ δ e^{κδ} ≤ ln(T·sup δ) + κ·sup δ, which is finite for every bounded
/// δ on a finite horizon.
pub fn validate_admissibility(cfg: &ModelConfig) -> ValidationReport {
    let mut report = ValidationReport::new("admissibility");
    let horizon = cfg.horizon();
    let gamma = cfg.preferences.risk_aversion;
    let b_bar = cfg.accumulation_bar();

    for id in [LineId::Ordinary, LineId::Catastrophic] {
        let line = cfg.line(id);
        let label = id.label();
        let grid = SamplingGrid::for_line(cfg, id);

        let (worst, t, y) = grid_max(&grid, |t, y| {
            line.intensity_at(t, y) - line.intensity_bound.eval(t)
        });
        report.push(if worst <= 0.0 {
            CheckResult::pass(
                format!("{label}: intensity dominated by delta"),
                format!("max (lambda - delta) = {worst:.3e} on the probe grid"),
            )
        } else {
            CheckResult::fail(
                format!("{label}: intensity dominated by delta"),
                format!("lambda exceeds delta by {worst:.3e}"),
            )
            .at(t, y, worst)
        });

        let (worst_q, tq, yq) = grid_max(&grid, |t, y| {
            line.reinsurance_premium(t, y, 0.0) - line.intensity_bound.eval(t)
        });
        report.push(if worst_q <= 0.0 {
            CheckResult::pass(
                format!("{label}: full-reinsurance premium dominated by delta"),
                format!("max (q(., ., 0) - delta) = {worst_q:.3e}"),
            )
        } else {
            CheckResult::fail(
                format!("{label}: full-reinsurance premium dominated by delta"),
                format!("q(., ., 0) exceeds delta by {worst_q:.3e}"),
            )
            .at(tq, yq, worst_q)
        });

        let tilt2 = 2.0 * gamma * b_bar;
        report.push(match line.claims.tilted_moment(tilt2, 0) {
            Ok(v) => CheckResult::pass(
                format!("{label}: E[exp(2 gamma Bbar Z)] finite"),
                format!("= {v:.6e} at tilt {tilt2:.4}"),
            ),
            Err(e) => CheckResult::fail(
                format!("{label}: E[exp(2 gamma Bbar Z)] finite"),
                format!("{e}"),
            ),
        });
        let tilt1 = gamma * b_bar;
        report.push(match line.claims.tilted_moment(tilt1, 2) {
            Ok(v) => CheckResult::pass(
                format!("{label}: E[Z^2 exp(gamma Bbar Z)] finite"),
                format!("= {v:.6e} at tilt {tilt1:.4}"),
            ),
            Err(e) => CheckResult::fail(
                format!("{label}: E[Z^2 exp(gamma Bbar Z)] finite"),
                format!("{e}"),
            ),
        });
    }

    let mut price_of_risk = 0.0f64;
    for &t in &linspace(0.0, horizon, 201) {
        let ratio = (cfg.market.drift.eval(t) - cfg.market.rate.eval(t)).abs()
            / cfg.market.volatility.eval(t);
        price_of_risk = price_of_risk.max(ratio);
    }
    report.push(if price_of_risk.is_finite() {
        CheckResult::pass(
            "market price of risk bounded",
            format!("sup |mu - r|/sigma = {price_of_risk:.6}"),
        )
    } else {
        CheckResult::fail(
            "market price of risk bounded",
            "sup |mu - r|/sigma is not finite".into(),
        )
    });

    let sigma_min = cfg.market.volatility.min_on(0.0, horizon);
    match cfg
        .catastrophic
        .claims
        .tilted_moment(gamma * b_bar, 0)
    {
        Ok(m0) => {
            let kappa = 2.0 / (sigma_min * sigma_min) * b_bar * m0;
            let delta_sup = cfg.catastrophic.intensity_bound.max_on(0.0, horizon);
            let log_bound = (horizon * delta_sup).ln() + kappa * delta_sup;
            report.push(CheckResult::pass(
                "integrability of delta exp(kappa delta)",
                format!(
                    "kappa = {kappa:.4}, sup delta = {delta_sup:.4}, \
                     ln integral <= {log_bound:.4} (finite)"
                ),
            ));
        }
        Err(e) => {
            report.push(CheckResult::fail(
                "integrability of delta exp(kappa delta)",
                format!("kappa undefined: {e}"),
            ));
        }
    }

    report
}
