//! Existence preconditions for a classical solution of the ψ equations.
//!
//! The verification argument behind the pointwise optimisers needs the
//! reaction–diffusion problems to admit classical positive solutions. The
//! standard sufficient conditions checked here:
//!
//! - uniform ellipticity: a⁽ⁱ⁾(t) ≥ κ > 0 and σ(t) ≥ κ > 0;
//! - a bounded, continuous optimal reaction g on the working domain: probed
//!   on the default span and on a doubled span. A reaction that keeps
//!   growing on the doubled span (an unbounded intensity such as λ = c·e^(−y))
//!   fails the check, with the advice to switch to a bounded intensity shape;
//! - a finite Lipschitz-in-y modulus for g, estimated by finite differences
//!   (reported; fails only when non-finite).
//!
//! The result is a [`ValidationReport`], not a hard error: `solve` callers
//! may proceed on a truncated domain at their own risk, while `verify`
//! treats failures as property violations.

use crate::model::{CheckResult, LineId, ModelConfig, ValidationReport};
use crate::pde::grid::default_span;
use crate::pde::solver::min_generator_term;
use crate::util::linspace;

/// Probes the sufficient conditions for classical solvability and returns a
/// per-check report.
pub fn check_existence_preconditions(cfg: &ModelConfig) -> ValidationReport {
    let mut report = ValidationReport::new("existence-preconditions");
    let horizon = cfg.horizon();

    let sigma_min = cfg.market.volatility.min_on(0.0, horizon);
    report.push(if sigma_min > 0.0 {
        CheckResult::pass(
            "market-ellipticity",
            format!("min sigma(t) = {sigma_min:.6} > 0"),
        )
    } else {
        CheckResult::fail(
            "market-ellipticity",
            format!("min sigma(t) = {sigma_min:.6} <= 0"),
        )
    });

    for line in [LineId::Ordinary, LineId::Catastrophic] {
        let label = line.label();
        let l = cfg.line(line);

        let a_min = l.factor_volatility.min_on(0.0, horizon);
        report.push(if a_min > 0.0 {
            CheckResult::pass(
                format!("factor-ellipticity-{label}"),
                format!("min a(t) = {a_min:.6} > 0"),
            )
        } else {
            CheckResult::fail(
                format!("factor-ellipticity-{label}"),
                format!(
                    "min a(t) = {a_min:.6} <= 0: the factor diffusion degenerates and the \
                     ψ equation loses uniform ellipticity"
                ),
            )
        });

        report.push(reaction_bounded_check(cfg, line));
        report.push(reaction_lipschitz_check(cfg, line));
    }

    report
}

/// Max |g| over a probe grid; on the first evaluation error returns the
/// error text instead.
fn reaction_sup(
    cfg: &ModelConfig,
    line: LineId,
    width: f64,
) -> Result<(f64, f64, f64), String> {
    let (lo, hi) = default_span(cfg, line, width);
    let mut sup = 0.0f64;
    let (mut worst_t, mut worst_y) = (0.0, lo);
    for &t in &linspace(0.0, cfg.horizon(), 17) {
        for &y in &linspace(lo, hi, 41) {
            let g = min_generator_term(cfg, line, t, y)
                .map_err(|e| format!("reaction failed at (t={t:.3}, y={y:.3}): {e}"))?;
            if g.abs() > sup {
                sup = g.abs();
                worst_t = t;
                worst_y = y;
            }
        }
    }
    Ok((sup, worst_t, worst_y))
}

fn reaction_bounded_check(cfg: &ModelConfig, line: LineId) -> CheckResult {
    let name = format!("reaction-bounded-{}", line.label());
    let base = match reaction_sup(cfg, line, 6.0) {
        Ok(v) => v,
        Err(e) => return CheckResult::fail(name, e),
    };
    let doubled = match reaction_sup(cfg, line, 12.0) {
        Ok(v) => v,
        Err(e) => return CheckResult::fail(name, e),
    };
    let (sup_base, ..) = base;
    let (sup_doubled, t, y) = doubled;
    let growth = sup_doubled / sup_base.max(1e-12);
    if growth > 3.0 {
        CheckResult::fail(
            name,
            format!(
                "sup|g| grows from {sup_base:.4} on the working span to {sup_doubled:.4} on a \
                 doubled span (factor {growth:.2}); the reaction looks unbounded in y, so a \
                 classical solution on the whole line is not guaranteed. Consider a bounded \
                 intensity shape (logistic family) or interpret results on the truncated domain."
            ),
        )
        .at(t, y, sup_doubled)
    } else {
        CheckResult::pass(
            name,
            format!("sup|g| = {sup_base:.4} (doubled-span growth factor {growth:.2} <= 3)"),
        )
    }
}

fn reaction_lipschitz_check(cfg: &ModelConfig, line: LineId) -> CheckResult {
    let name = format!("reaction-lipschitz-{}", line.label());
    let (lo, hi) = default_span(cfg, line, 6.0);
    let ys = linspace(lo, hi, 41);
    let step = ys[1] - ys[0];
    let mut modulus = 0.0f64;
    let (mut worst_t, mut worst_y) = (0.0, lo);
    for &t in &linspace(0.0, cfg.horizon(), 9) {
        let mut prev = match min_generator_term(cfg, line, t, ys[0]) {
            Ok(v) => v,
            Err(e) => return CheckResult::fail(name, e.to_string()),
        };
        for &y in &ys[1..] {
            let g = match min_generator_term(cfg, line, t, y) {
                Ok(v) => v,
                Err(e) => return CheckResult::fail(name, e.to_string()),
            };
            let slope = ((g - prev) / step).abs();
            if slope > modulus {
                modulus = slope;
                worst_t = t;
                worst_y = y;
            }
            prev = g;
        }
    }
    if modulus.is_finite() {
        CheckResult::pass(
            name,
            format!("finite-difference Lipschitz modulus in y: {modulus:.4}"),
        )
        .at(worst_t, worst_y, modulus)
    } else {
        CheckResult::fail(name, "non-finite Lipschitz modulus".into())
    }
}
