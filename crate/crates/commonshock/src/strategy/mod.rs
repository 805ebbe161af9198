//! Pointwise optimal-control solvers.
//!
//! The HJB reduction turns the control problem into two pointwise
//! minimisations per state. For the first line,
//!
//! ```text
//! Ψ₁(t, y, u) = γB(t,T)(q⁽¹⁾ − c⁽¹⁾) + λ⁽¹⁾ ∫ (e^(γB z u) − 1) F⁽¹⁾(dz),
//! ```
//!
//! minimised over u ∈ [0, 1]. For the second line and the investment,
//!
//! ```text
//! Ψ₂(t, y, u, w) = γB [ (q⁽²⁾ − c⁽²⁾) + ½ γB σ² w² − w(μ − r) ]
//!                + λ⁽²⁾ ∫ (e^(γB (z u + w K(t,z))) − 1) F⁽²⁾(dz),
//! ```
//!
//! minimised over (u, w) ∈ [0, 1] × ℝ. Stationarity is expressed through the
//! scaled first-order conditions (H for retention, H̃ for investment):
//!
//! ```text
//! H(t, y, u, w)  = ∂q⁽²⁾/∂u + λ⁽²⁾ ∫ z e^(γB (z u + w K)) F(dz)
//! H̃(t, y, u, w) = γB σ² w − (μ − r) + λ⁽²⁾ ∫ K e^(γB (z u + w K)) F(dz)
//! ```
//!
//! Both are strictly increasing in their own argument (convexity of Ψ₂), and
//! the reduced outer function w ↦ H̃(ũ(w), w), with ũ(w) the inner root of
//! H(·, w) = 0, is strictly increasing with slope at least γBσ² (by the
//! Cauchy–Schwarz inequality applied to the mixed second moments). The
//! nested solver exploits exactly this structure: inner Newton in u, outer
//! Newton in w, both safeguarded by bisection, with moment divergence acting
//! as a +∞ wall on the upper side.
//!
//! Built-in premium principles extend algebraically to u ∈ ℝ, so roots are
//! located unconstrained and then projected onto [0, 1]; the projection is
//! exact because each FOC is monotone in u.

mod compare;
mod field;
mod root;

use crate::error::{ModelError, SolveError};
use crate::model::{ClaimDistribution, InsuranceLine, ModelConfig};
use serde::{Deserialize, Serialize};

pub use compare::{compare_shock_effect, ComparisonReport, ComparisonRow};
pub use field::{ConstantStrategy, PerturbedStrategy, Strategy, StrategyField, StrategyPoint};
pub use root::{RootOptions, RootResult};

use root::{as_val, bracket_above, bracket_below, solve_increasing, Val};

/// Where the projected retention sits relative to (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RetentionRegion {
    /// Unconstrained root ≤ 0: cede everything (u* = 0).
    FullReinsurance,
    /// Root inside (0, 1): u* interior.
    Interior,
    /// Unconstrained root ≥ 1: keep everything (u* = 1).
    NoReinsurance,
}

impl RetentionRegion {
    pub fn label(self) -> &'static str {
        match self {
            RetentionRegion::FullReinsurance => "full-reinsurance",
            RetentionRegion::Interior => "interior",
            RetentionRegion::NoReinsurance => "no-reinsurance",
        }
    }
}

/// Sign classification of the optimal investment from the model primitives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignRegion {
    /// μ − r < λ⁽²⁾ ∫K F(dz): shock risk outweighs the excess return, w* < 0.
    ShockDominant,
    /// μ − r > λ⁽²⁾ ∫K e^(γB z) F(dz): excess return dominates, w* > 0.
    ExcessReturnDominant,
    /// Neither inequality holds; the sign is not determined a priori.
    Indeterminate,
}

impl SignRegion {
    pub fn label(self) -> &'static str {
        match self {
            SignRegion::ShockDominant => "shock-dominant",
            SignRegion::ExcessReturnDominant => "excess-return-dominant",
            SignRegion::Indeterminate => "indeterminate",
        }
    }
}

/// Optimal first-line retention at one state.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FirstLineSolution {
    /// u⁽¹⁾* ∈ [0, 1].
    pub retention: f64,
    pub region: RetentionRegion,
    /// |FOC| at the interior root (0 at a projected boundary).
    pub residual: f64,
    /// Root of the FOC on ℝ before projection.
    pub unconstrained_retention: f64,
}

/// Optimal second-line retention and investment at one state.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SecondLineSolution {
    /// u⁽²⁾* ∈ [0, 1].
    pub retention: f64,
    /// w* ∈ ℝ.
    pub investment: f64,
    pub region: RetentionRegion,
    pub sign: SignRegion,
    /// |H(u*, w*)| for interior solutions (0 at a projected boundary).
    pub retention_residual: f64,
    /// |H̃(u*, w*)|: the investment FOC always holds at the solution.
    pub investment_residual: f64,
    /// Root (ū, w̄) of the unconstrained system.
    pub unconstrained_retention: f64,
    pub unconstrained_investment: f64,
}

/// A priori bounds on the optimal investment.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InvestmentBounds {
    /// Merton-type cap (μ − r)/(γB σ²).
    pub upper: f64,
    /// min{0, upper − δ(t) E[e^(γB Z)] / (γB σ²)}.
    pub lower: f64,
    /// Whether w* < upper strictly (true iff E[K(t, Z)] > 0).
    pub strict_upper: bool,
    pub sign: SignRegion,
}

/// Closed-form solution under the expected-value principle with
/// multiplicative jumps.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EvpSolution {
    /// Tilt level φ* solving E[Z e^(γB φ Z)] = (1 + θ_R) E[Z].
    pub phi_star: f64,
    /// Unconstrained pair: w̄ = upper − λ k (1+θ_R) E[Z]/(γBσ²), ū = φ* − w̄ k.
    pub unconstrained_retention: f64,
    pub unconstrained_investment: f64,
    /// Projected controls.
    pub retention: f64,
    pub investment: f64,
    pub region: RetentionRegion,
}

/// Optimal controls when the market ignores the catastrophic shocks (K ≡ 0).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NoShockPoint {
    pub first_retention: f64,
    pub second_retention: f64,
    /// Merton investment (μ − r)/(γB σ²): deterministic in y.
    pub investment: f64,
}

/// Pointwise evaluation context for one line at one state (t, y).
pub(crate) struct ControlContext<'a> {
    line: &'a InsuranceLine,
    t: f64,
    y: f64,
    pub gamma_b: f64,
    pub lambda: f64,
    /// σ²(t); 0 for the first line where it is unused.
    pub sigma2: f64,
    /// μ(t) − r(t); 0 for the first line.
    pub excess: f64,
    /// Multiplicative jump slope k(t); 0 for the first line or K ≡ 0.
    pub k: f64,
}

impl<'a> ControlContext<'a> {
    pub fn first(cfg: &'a ModelConfig, t: f64, y: f64) -> Self {
        let line = &cfg.ordinary;
        ControlContext {
            line,
            t,
            y,
            gamma_b: cfg.gamma_b(t),
            lambda: line.intensity_at(t, y),
            sigma2: 0.0,
            excess: 0.0,
            k: 0.0,
        }
    }

    pub fn second(cfg: &'a ModelConfig, t: f64, y: f64) -> Self {
        let line = &cfg.catastrophic;
        let sigma = cfg.market.volatility.eval(t);
        ControlContext {
            line,
            t,
            y,
            gamma_b: cfg.gamma_b(t),
            lambda: line.intensity_at(t, y),
            sigma2: sigma * sigma,
            excess: cfg.market.drift.eval(t) - cfg.market.rate.eval(t),
            k: cfg.market.jump.slope_at(t),
        }
    }

    fn claims(&self) -> &ClaimDistribution {
        &self.line.claims
    }

    fn tilt(&self, u: f64, w: f64) -> f64 {
        self.gamma_b * (u + w * self.k)
    }

    fn moment(&self, tilt: f64, order: u8) -> Result<f64, ModelError> {
        self.claims().tilted_moment(tilt, order)
    }

    fn dq(&self, u: f64) -> f64 {
        self.line.reinsurance_premium_du(self.t, self.y, u)
    }

    fn d2q(&self, u: f64) -> f64 {
        self.line.reinsurance_premium_du2(self.t, self.y, u)
    }

    /// Ψ₁(t, y, u) (investment terms absent).
    pub fn objective1(&self, u: f64) -> Result<f64, ModelError> {
        let q = self.line.reinsurance_premium(self.t, self.y, u);
        let c = self.line.gross_premium(self.t, self.y);
        let m0 = self.moment(self.gamma_b * u, 0)?;
        Ok(self.gamma_b * (q - c) + self.lambda * (m0 - 1.0))
    }

    /// Ψ₂(t, y, u, w).
    pub fn objective2(&self, u: f64, w: f64) -> Result<f64, ModelError> {
        let q = self.line.reinsurance_premium(self.t, self.y, u);
        let c = self.line.gross_premium(self.t, self.y);
        let m0 = self.moment(self.tilt(u, w), 0)?;
        Ok(self.gamma_b
            * (q - c + 0.5 * self.gamma_b * self.sigma2 * w * w - w * self.excess)
            + self.lambda * (m0 - 1.0))
    }

    /// H(t, y, u, w) = ∂q/∂u + λ ∫ z e^(tilt·z) F(dz); equals ∂Ψ₂/∂u / γB.
    pub fn retention_foc(&self, u: f64, w: f64) -> Result<f64, ModelError> {
        Ok(self.dq(u) + self.lambda * self.moment(self.tilt(u, w), 1)?)
    }

    /// ∂H/∂u = ∂²q/∂u² + λ γB ∫ z² e^(tilt·z) F(dz) > 0.
    pub fn retention_foc_du(&self, u: f64, w: f64) -> Result<f64, ModelError> {
        Ok(self.d2q(u) + self.lambda * self.gamma_b * self.moment(self.tilt(u, w), 2)?)
    }

    /// H̃(t, y, u, w) = γBσ²w − (μ−r) + λ k ∫ z e^(tilt·z) F(dz); equals
    /// ∂Ψ₂/∂w / γB under multiplicative jumps K = k z.
    pub fn investment_foc(&self, u: f64, w: f64) -> Result<f64, ModelError> {
        let jump = if self.k == 0.0 {
            0.0
        } else {
            self.lambda * self.k * self.moment(self.tilt(u, w), 1)?
        };
        Ok(self.gamma_b * self.sigma2 * w - self.excess + jump)
    }

    /// ∂H̃/∂w = γBσ² + λ γB k² ∫ z² e^(tilt·z) F(dz) ≥ γBσ² > 0.
    pub fn investment_foc_dw(&self, u: f64, w: f64) -> Result<f64, ModelError> {
        let jump = if self.k == 0.0 {
            0.0
        } else {
            self.lambda * self.gamma_b * self.k * self.k * self.moment(self.tilt(u, w), 2)?
        };
        Ok(self.gamma_b * self.sigma2 + jump)
    }

    /// ∂H/∂w = ∂H̃/∂u = λ γB k ∫ z² e^(tilt·z) F(dz).
    pub fn mixed_foc_cross(&self, u: f64, w: f64) -> Result<f64, ModelError> {
        if self.k == 0.0 {
            return Ok(0.0);
        }
        Ok(self.lambda * self.gamma_b * self.k * self.moment(self.tilt(u, w), 2)?)
    }

    /// Magnitude scale of the retention FOC, used for residual tolerances.
    fn retention_scale(&self) -> f64 {
        (self.dq(0.0).abs() + self.lambda * self.claims().mean()).max(1e-8)
    }

    /// Magnitude scale of the investment FOC.
    fn investment_scale(&self) -> f64 {
        let upper = self.merton_upper();
        (self.gamma_b * self.sigma2 * (1.0 + upper.abs())
            + self.excess.abs()
            + self.lambda * self.k * self.claims().mean())
        .max(1e-8)
    }

    /// Merton cap (μ − r)/(γB σ²).
    pub fn merton_upper(&self) -> f64 {
        self.excess / (self.gamma_b * self.sigma2)
    }
}

fn check_time(cfg: &ModelConfig, t: f64) -> Result<(), ModelError> {
    let horizon = cfg.horizon();
    if !(0.0..=horizon * (1.0 + 1e-12)).contains(&t) {
        return Err(ModelError::TimeOutOfRange { t, horizon });
    }
    Ok(())
}

/// Ψ₁(t, y¹, u): the first-line generator term before minimisation.
pub fn first_line_objective(cfg: &ModelConfig, t: f64, y: f64, u: f64) -> Result<f64, ModelError> {
    debug_assert!(t >= 0.0 && t <= cfg.horizon() * (1.0 + 1e-12));
    ControlContext::first(cfg, t, y).objective1(u)
}

/// Ψ₂(t, y², u, w): the second-line generator term before minimisation.
pub fn second_line_objective(
    cfg: &ModelConfig,
    t: f64,
    y: f64,
    u: f64,
    w: f64,
) -> Result<f64, ModelError> {
    debug_assert!(t >= 0.0 && t <= cfg.horizon() * (1.0 + 1e-12));
    ControlContext::second(cfg, t, y).objective2(u, w)
}

/// Retention first-order condition H(t, y², u, w) of the second line.
pub fn retention_foc(cfg: &ModelConfig, t: f64, y: f64, u: f64, w: f64) -> Result<f64, ModelError> {
    ControlContext::second(cfg, t, y).retention_foc(u, w)
}

/// Investment first-order condition H̃(t, y², u, w).
pub fn investment_foc(
    cfg: &ModelConfig,
    t: f64,
    y: f64,
    u: f64,
    w: f64,
) -> Result<f64, ModelError> {
    ControlContext::second(cfg, t, y).investment_foc(u, w)
}

/// Solves the first-line FOC on ℝ and projects onto [0, 1].
///
/// The boundary sets of the projection coincide with the classical regions:
/// u* = 0 iff ∂q/∂u(·, 0) + λE[Z] ≥ 0, and u* = 1 iff
/// ∂q/∂u(·, 1) + λE[Z e^(γBZ)] ≤ 0 (+∞ counts as > 0).
pub fn optimal_first_retention(
    cfg: &ModelConfig,
    t: f64,
    y: f64,
) -> Result<FirstLineSolution, SolveError> {
    check_time(cfg, t)?;
    let ctx = ControlContext::first(cfg, t, y);
    let r = retention_root_real(&ctx, 0.0, 0.5)?;
    Ok(project_first(r))
}

fn project_first(r: RootResult) -> FirstLineSolution {
    let (retention, region, residual) = project_retention(r);
    FirstLineSolution {
        retention,
        region,
        residual,
        unconstrained_retention: r.root,
    }
}

fn project_retention(r: RootResult) -> (f64, RetentionRegion, f64) {
    if r.root <= 0.0 {
        (0.0, RetentionRegion::FullReinsurance, 0.0)
    } else if r.root >= 1.0 {
        (1.0, RetentionRegion::NoReinsurance, 0.0)
    } else {
        (r.root, RetentionRegion::Interior, r.residual)
    }
}

/// Root on ℝ of u ↦ H(u, w) for the line held by `ctx`.
fn retention_root_real(
    ctx: &ControlContext<'_>,
    w: f64,
    warm: f64,
) -> Result<RootResult, SolveError> {
    let name = "retention FOC";
    let tol = 1e-13 * ctx.retention_scale();
    let opts = RootOptions {
        tol,
        ..RootOptions::default()
    };
    let mut f = |u: f64| as_val(ctx.retention_foc(u, w));
    let start_val = f(warm)?;
    let (lo, flo) = bracket_below(name, &mut f, warm, start_val, 0.25)?;
    if flo.abs() <= tol {
        return Ok(RootResult {
            root: lo,
            residual: flo.abs(),
            iterations: 0,
        });
    }
    let (hi, fhi) = bracket_above(name, &mut f, lo, Val::Finite(flo), 0.25)?;
    let mut df = |u: f64| as_val(ctx.retention_foc_du(u, w));
    solve_increasing(name, &mut f, &mut df, lo, flo, hi, fhi, &opts)
}

/// Root of w ↦ H̃(u, w) at fixed retention u: the conditional optimal
/// investment w̃(t, y, u).
pub fn investment_root(cfg: &ModelConfig, t: f64, y: f64, u: f64) -> Result<f64, SolveError> {
    check_time(cfg, t)?;
    let ctx = ControlContext::second(cfg, t, y);
    Ok(investment_root_ctx(&ctx, u)?.root)
}

fn investment_root_ctx(ctx: &ControlContext<'_>, u: f64) -> Result<RootResult, SolveError> {
    let upper = ctx.merton_upper();
    if ctx.k == 0.0 {
        // H̃ is affine in w with root exactly at the Merton cap.
        return Ok(RootResult {
            root: upper,
            residual: 0.0,
            iterations: 0,
        });
    }
    let name = "investment FOC";
    let tol = 1e-13 * ctx.investment_scale();
    let opts = RootOptions {
        tol,
        ..RootOptions::default()
    };
    let mut f = |w: f64| as_val(ctx.investment_foc(u, w));
    // H̃(u, upper) = λ k E[Z e^(tilt Z)] ≥ 0 (or +∞): upper is always an
    // upper bracket.
    let fupper = f(upper)?;
    let step = (1.0 + upper.abs()).max(1.0 / (ctx.gamma_b * ctx.sigma2).min(1.0));
    let (lo, flo) = bracket_below(name, &mut f, upper, fupper, step)?;
    if flo.abs() <= tol {
        return Ok(RootResult {
            root: lo,
            residual: flo.abs(),
            iterations: 0,
        });
    }
    let mut df = |w: f64| as_val(ctx.investment_foc_dw(u, w));
    solve_increasing(name, &mut f, &mut df, lo, flo, upper, fupper, &opts)
}

/// Solves the coupled second-line system: inner root ũ(w) of H(·, w) = 0,
/// outer root of w ↦ H̃(ũ(w), w), then projection of ū onto [0, 1] with the
/// investment re-solved on the active boundary.
pub fn optimal_second_line(
    cfg: &ModelConfig,
    t: f64,
    y: f64,
) -> Result<SecondLineSolution, SolveError> {
    check_time(cfg, t)?;
    let ctx = ControlContext::second(cfg, t, y);
    let sign = classify_sign(&ctx)?;
    let upper = ctx.merton_upper();

    let (u_bar, w_bar, u_res, w_res) = if ctx.k == 0.0 {
        // Decoupled: the investment FOC ignores u and vice versa.
        let r = retention_root_real(&ctx, upper, 0.5)?;
        (r.root, upper, r.residual, 0.0)
    } else {
        solve_second_line_nested(&ctx)?
    };

    let unconstrained = RootResult {
        root: u_bar,
        residual: u_res,
        iterations: 0,
    };
    let (retention, region, retention_residual) = project_retention(unconstrained);
    let (investment, investment_residual) = if region == RetentionRegion::Interior {
        (w_bar, w_res)
    } else {
        // Re-solve the investment on the active retention boundary.
        let r = investment_root_ctx(&ctx, retention)?;
        (r.root, r.residual)
    };

    Ok(SecondLineSolution {
        retention,
        investment,
        region,
        sign,
        retention_residual,
        investment_residual,
        unconstrained_retention: u_bar,
        unconstrained_investment: w_bar,
    })
}

/// Inner-outer Newton for the unconstrained system H = H̃ = 0.
fn solve_second_line_nested(
    ctx: &ControlContext<'_>,
) -> Result<(f64, f64, f64, f64), SolveError> {
    let name = "coupled second-line FOC";
    let upper = ctx.merton_upper();
    let tol = 1e-13 * ctx.investment_scale();
    let opts = RootOptions {
        tol,
        ..RootOptions::default()
    };

    let warm = std::cell::Cell::new(0.5f64);
    let inner_res = std::cell::Cell::new(0.0f64);
    let inner = |w: f64| -> Result<f64, SolveError> {
        let r = retention_root_real(ctx, w, warm.get())?;
        warm.set(r.root);
        inner_res.set(r.residual);
        Ok(r.root)
    };

    let mut f = |w: f64| -> Result<Val, SolveError> {
        let u = inner(w)?;
        as_val(ctx.investment_foc(u, w))
    };
    // Reduced derivative along the inner-root manifold:
    // F'(w) = ∂H̃/∂w − (∂H̃/∂u)(∂H/∂w)/(∂H/∂u), which Cauchy–Schwarz keeps
    // at or above γBσ².
    let mut df = |w: f64| -> Result<Val, SolveError> {
        let u = inner(w)?;
        let dhw = match as_val(ctx.investment_foc_dw(u, w))? {
            Val::Finite(v) => v,
            Val::PlusInf => return Ok(Val::PlusInf),
        };
        let cross = match as_val(ctx.mixed_foc_cross(u, w))? {
            Val::Finite(v) => v,
            Val::PlusInf => return Ok(Val::PlusInf),
        };
        let dhu = match as_val(ctx.retention_foc_du(u, w))? {
            Val::Finite(v) => v,
            Val::PlusInf => return Ok(Val::PlusInf),
        };
        Ok(Val::Finite((dhw - cross * cross / dhu).max(
            ctx.gamma_b * ctx.sigma2 * 0.5,
        )))
    };

    // F(upper) = λ k E[Z e^(tilt Z)] > 0: exact upper bracket. For the lower
    // bracket, start from the a-priori lower bound when the moment exists.
    let fupper = f(upper)?;
    let seed_step = match ctx.moment(ctx.gamma_b, 0) {
        Ok(m0) => {
            let delta = ctx.line.intensity_bound.eval(ctx.t);
            (delta * m0 / (ctx.gamma_b * ctx.sigma2)).max(1.0)
        }
        Err(_) => (1.0 + upper.abs()).max(1.0),
    };
    let (lo, flo) = bracket_below(name, &mut f, upper, fupper, seed_step)?;
    let w_root = if flo.abs() <= tol {
        RootResult {
            root: lo,
            residual: flo.abs(),
            iterations: 0,
        }
    } else {
        solve_increasing(name, &mut f, &mut df, lo, flo, upper, fupper, &opts)?
    };

    // One final inner solve pins ũ(w̄) and its residual.
    let u_final = retention_root_real(ctx, w_root.root, warm.get())?;
    Ok((
        u_final.root,
        w_root.root,
        u_final.residual,
        w_root.residual,
    ))
}

fn classify_sign(ctx: &ControlContext<'_>) -> Result<SignRegion, SolveError> {
    let mean = ctx.claims().mean();
    if ctx.k <= 0.0 || mean <= 0.0 {
        return Ok(SignRegion::Indeterminate);
    }
    // Shock-dominant: μ − r < λ ∫K F(dz) = λ k E[Z].
    if ctx.excess < ctx.lambda * ctx.k * mean {
        return Ok(SignRegion::ShockDominant);
    }
    // Excess-return-dominant: μ − r > λ k E[Z e^(γB Z)]; a divergent moment
    // means the threshold is +∞ and the condition cannot hold.
    match as_val(ctx.moment(ctx.gamma_b, 1))? {
        Val::Finite(m1) if ctx.excess > ctx.lambda * ctx.k * m1 => {
            Ok(SignRegion::ExcessReturnDominant)
        }
        _ => Ok(SignRegion::Indeterminate),
    }
}

/// A priori bounds for the optimal investment at one state.
pub fn investment_bounds(cfg: &ModelConfig, t: f64, y: f64) -> Result<InvestmentBounds, ModelError> {
    check_time(cfg, t)?;
    let ctx = ControlContext::second(cfg, t, y);
    let upper = ctx.merton_upper();
    // The lower bound needs E[e^(γB Z)]; divergence is a reported error.
    let m0 = ctx.moment(ctx.gamma_b, 0)?;
    let delta = cfg.catastrophic.intensity_bound.eval(t);
    let lower = (upper - delta * m0 / (ctx.gamma_b * ctx.sigma2)).min(0.0);
    let strict_upper = ctx.k > 0.0 && ctx.claims().mean() > 0.0;
    let sign = classify_sign(&ctx).map_err(|e| match e {
        SolveError::Model(m) => m,
        other => ModelError::InvalidConfig(other.to_string()),
    })?;
    Ok(InvestmentBounds {
        upper,
        lower,
        strict_upper,
        sign,
    })
}

/// Closed forms under the expected-value principle with K(t, z) = k(t)·z.
///
/// The tilt equation E[Z e^(γB φ Z)] = (1 + θ_R)E[Z] has the explicit root
/// φ* = a(1 − (1+θ_R)^(−1/2))/γB for exponential claims with rate a, and is
/// solved numerically (still one-dimensional and increasing) otherwise. Then
///
/// ```text
/// w̄ = (μ − r)/(γBσ²) − λ k (1+θ_R) E[Z]/(γBσ²),    ū = φ* − w̄ k,
/// ```
///
/// and ū is projected onto [0, 1] with the investment re-solved on the
/// boundary when the projection is active.
pub fn evp_closed_form(cfg: &ModelConfig, t: f64, y: f64) -> Result<EvpSolution, SolveError> {
    check_time(cfg, t)?;
    if !cfg.catastrophic.premium.is_expected_value() {
        return Err(SolveError::Unsupported(
            "evp_closed_form needs the expected-value principle on the catastrophic line".into(),
        ));
    }
    let (_, theta_r) = cfg.catastrophic.premium.loadings().expect("built-in principle");
    let ctx = ControlContext::second(cfg, t, y);
    let mean = ctx.claims().mean();

    let phi_star = match ctx.claims() {
        ClaimDistribution::Exponential { rate } => {
            rate * (1.0 - (1.0 + theta_r).powf(-0.5)) / ctx.gamma_b
        }
        _ => {
            let name = "expected-value tilt equation";
            let target = (1.0 + theta_r) * mean;
            let tol = 1e-13 * target.max(1e-8);
            let opts = RootOptions {
                tol,
                ..RootOptions::default()
            };
            let mut f =
                |phi: f64| as_val(ctx.moment(ctx.gamma_b * phi, 1).map(|m1| m1 - target));
            // φ = 0 gives E[Z] − (1+θ_R)E[Z] < 0: exact lower bracket.
            let flo = -theta_r * mean;
            let (hi, fhi) = bracket_above(name, &mut f, 0.0, Val::Finite(flo), 1.0 / ctx.gamma_b)?;
            let mut df = |phi: f64| {
                as_val(ctx.moment(ctx.gamma_b * phi, 2).map(|m2| ctx.gamma_b * m2))
            };
            solve_increasing(name, &mut f, &mut df, 0.0, flo, hi, fhi, &opts)?.root
        }
    };

    let gbs = ctx.gamma_b * ctx.sigma2;
    let w_bar = ctx.merton_upper() - ctx.lambda * ctx.k * (1.0 + theta_r) * mean / gbs;
    let u_bar = phi_star - w_bar * ctx.k;
    let unconstrained = RootResult {
        root: u_bar,
        residual: 0.0,
        iterations: 0,
    };
    let (retention, region, _) = project_retention(unconstrained);
    let investment = if region == RetentionRegion::Interior {
        w_bar
    } else {
        investment_root_ctx(&ctx, retention)?.root
    };
    Ok(EvpSolution {
        phi_star,
        unconstrained_retention: u_bar,
        unconstrained_investment: w_bar,
        retention,
        investment,
        region,
    })
}

/// Optimal controls for the no-shock counterfactual (the same model with
/// K ≡ 0). The first-line problem is identical with or without the shock.
pub fn no_shock_strategy(
    cfg: &ModelConfig,
    t: f64,
    y1: f64,
    y2: f64,
) -> Result<NoShockPoint, SolveError> {
    let stripped = cfg.without_market_jump();
    let first = optimal_first_retention(&stripped, t, y1)?;
    let second = optimal_second_line(&stripped, t, y2)?;
    Ok(NoShockPoint {
        first_retention: first.retention,
        second_retention: second.retention,
        investment: second.investment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::presets;
    use crate::model::{PremiumPrinciple, TimeCoefficient};

    /// Exponential rate-1 claims, r ≡ 0 so γB = γ exactly.
    fn exp_line_config(gamma: f64, theta_r: f64) -> ModelConfig {
        let mut cfg = presets::evp_comparison();
        cfg.preferences.risk_aversion = gamma;
        cfg.market.rate = TimeCoefficient::constant(0.0);
        cfg.ordinary.claims = ClaimDistribution::Exponential { rate: 1.0 };
        cfg.ordinary.premium = PremiumPrinciple::ExpectedValue {
            insurer_loading: 0.1,
            reinsurer_loading: theta_r,
        };
        cfg
    }

    #[test]
    fn first_retention_evp_exponential_closed_form() {
        // [DERIVED] interior root of (1+θ_R)E[Z] = E[Z e^(γBuZ)] for
        // exponential rate 1, γB = 0.5, θ_R = 0.3:
        // u* = (1 − 1.3^(−1/2))/0.5 = 0.2458839613859416.
        let cfg = exp_line_config(0.5, 0.3);
        let sol = optimal_first_retention(&cfg, 0.0, 0.1).unwrap();
        assert_eq!(sol.region, RetentionRegion::Interior);
        assert!((sol.retention - 0.2458839613859416).abs() < 1e-10);
        assert!(sol.residual <= 1e-10);
        // The FOC really vanishes there.
        let ctx = ControlContext::first(&cfg, 0.0, 0.1);
        assert!(ctx.retention_foc(sol.retention, 0.0).unwrap().abs() < 1e-10);
    }

    #[test]
    fn first_retention_no_reinsurance_for_small_risk_aversion() {
        // [DERIVED] A₁ requires E[Z e^(γBZ)] ≤ (1+θ_R)E[Z]: for exponential
        // rate 1 that is (1−γB)^(−2) ≤ 1.3, i.e. γB ≤ 1 − 1.3^(−1/2) ≈ 0.1229.
        let cfg = exp_line_config(0.12, 0.3);
        let sol = optimal_first_retention(&cfg, 0.0, 0.1).unwrap();
        assert_eq!(sol.region, RetentionRegion::NoReinsurance);
        assert_eq!(sol.retention, 1.0);
        assert!(sol.unconstrained_retention >= 1.0);

        let cfg = exp_line_config(0.13, 0.3);
        let sol = optimal_first_retention(&cfg, 0.0, 0.1).unwrap();
        assert_eq!(sol.region, RetentionRegion::Interior);
    }

    #[test]
    fn full_reinsurance_needs_custom_premium() {
        // Built-in principles price q(·,·,0) above c, so the FOC at 0 is
        // negative and u* > 0. A custom principle with a positive FOC at 0
        // lands in the full-reinsurance region.
        use crate::model::{CustomPremium, IntensityModel};
        use std::sync::Arc;
        let mut cfg = exp_line_config(0.5, 0.3);
        cfg.ordinary.intensity = IntensityModel::Constant {
            rate: TimeCoefficient::constant(3.0),
        };
        // q = 0.5·λ·(1−u): cheaper than the expected claim flow E[Z]λ = 3,
        // so ceding everything is optimal: ∂q/∂u(0) + λE[Z] = −1.5 + 3 > 0.
        cfg.ordinary.premium = PremiumPrinciple::Custom(CustomPremium {
            gross: Arc::new(|_, _| 3.3),
            reinsurance: Arc::new(|_, _, u| 0.5 * 3.0 * (1.0 - u)),
            reinsurance_du: Arc::new(|_, _, _| -0.5 * 3.0),
            reinsurance_du2: Arc::new(|_, _, _| 0.0),
        });
        let sol = optimal_first_retention(&cfg, 0.0, 0.1).unwrap();
        assert_eq!(sol.region, RetentionRegion::FullReinsurance);
        assert_eq!(sol.retention, 0.0);
    }

    #[test]
    fn second_line_interior_solution_zeroes_both_focs() {
        let cfg = presets::evp_comparison();
        let sol = optimal_second_line(&cfg, 0.0, -0.2).unwrap();
        assert_eq!(sol.region, RetentionRegion::Interior);
        let h = retention_foc(&cfg, 0.0, -0.2, sol.retention, sol.investment).unwrap();
        let ht = investment_foc(&cfg, 0.0, -0.2, sol.retention, sol.investment).unwrap();
        assert!(h.abs() < 1e-10, "H = {h}");
        assert!(ht.abs() < 1e-10, "H~ = {ht}");
        assert!(sol.retention_residual < 1e-10);
        assert!(sol.investment_residual < 1e-10);
    }

    #[test]
    fn second_line_matches_evp_closed_form() {
        let cfg = presets::evp_comparison();
        for &(t, y) in &[(0.0, -0.2), (0.3, 0.4), (0.9, -1.0)] {
            let numeric = optimal_second_line(&cfg, t, y).unwrap();
            let closed = evp_closed_form(&cfg, t, y).unwrap();
            assert!(
                (numeric.retention - closed.retention).abs() < 1e-8,
                "retention at ({t}, {y})"
            );
            assert!(
                (numeric.investment - closed.investment).abs() < 1e-8,
                "investment at ({t}, {y})"
            );
        }
    }

    #[test]
    fn conditional_investment_root_decreases_in_retention() {
        // w̃(t, y, 1) < w̃(t, y, 1/2) < w̃(t, y, 0): more retained risk makes
        // the common shock dearer, pushing the investment down.
        let cfg = presets::fig1();
        let w0 = investment_root(&cfg, 0.0, -0.2, 0.0).unwrap();
        let w05 = investment_root(&cfg, 0.0, -0.2, 0.5).unwrap();
        let w1 = investment_root(&cfg, 0.0, -0.2, 1.0).unwrap();
        assert!(w1 < w05 && w05 < w0, "w1 = {w1}, w05 = {w05}, w0 = {w0}");
        // Each root actually zeroes its FOC.
        for (u, w) in [(0.0, w0), (0.5, w05), (1.0, w1)] {
            let ht = investment_foc(&cfg, 0.0, -0.2, u, w).unwrap();
            assert!(ht.abs() <= 1e-8, "residual {ht} at u = {u}");
        }
    }

    #[test]
    fn bounds_sandwich_the_optimal_investment() {
        let cfg = presets::evp_comparison();
        for &(t, y) in &[(0.0, -0.2), (0.25, 0.0), (0.5, 0.8), (0.75, -0.9)] {
            let sol = optimal_second_line(&cfg, t, y).unwrap();
            let bounds = investment_bounds(&cfg, t, y).unwrap();
            assert!(bounds.lower <= sol.investment + 1e-12);
            assert!(sol.investment <= bounds.upper + 1e-12);
            if bounds.strict_upper {
                assert!(sol.investment < bounds.upper);
            }
            match bounds.sign {
                SignRegion::ShockDominant => assert!(sol.investment < 0.0),
                SignRegion::ExcessReturnDominant => assert!(sol.investment > 0.0),
                SignRegion::Indeterminate => {}
            }
        }
    }

    #[test]
    fn no_shock_strategy_hits_merton_cap() {
        let cfg = presets::evp_comparison();
        let (t, y1, y2) = (0.2, 0.1, -0.2);
        let point = no_shock_strategy(&cfg, t, y1, y2).unwrap();
        let stripped = cfg.without_market_jump();
        let ctx = ControlContext::second(&stripped, t, y2);
        assert!((point.investment - ctx.merton_upper()).abs() < 1e-12);
        // First line unaffected by the jump removal.
        let direct = optimal_first_retention(&cfg, t, y1).unwrap();
        assert!((point.first_retention - direct.retention).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_time_rejected() {
        let cfg = presets::evp_comparison();
        assert!(matches!(
            optimal_second_line(&cfg, 2.0, 0.0),
            Err(SolveError::Model(ModelError::TimeOutOfRange { .. }))
        ));
        assert!(investment_bounds(&cfg, -0.5, 0.0).is_err());
    }

    #[test]
    fn variance_principle_second_line_still_converges() {
        let mut cfg = presets::evp_comparison();
        cfg.catastrophic.premium = PremiumPrinciple::Variance {
            insurer_loading: 0.05,
            reinsurer_loading: 0.15,
        };
        let sol = optimal_second_line(&cfg, 0.1, -0.3).unwrap();
        assert!(sol.retention_residual < 1e-10 || sol.region != RetentionRegion::Interior);
        assert!(sol.investment_residual < 1e-10);
        assert!(evp_closed_form(&cfg, 0.1, -0.3).is_err());
    }
}
