//! Backward Crank–Nicolson marching for the ψ reaction–diffusion equations.
//!
//! Each ψ solves, on [0, T] × ℝ with terminal value 1,
//!
//! ```text
//! ∂ψ/∂t + b(t) ∂ψ/∂y + ½ a(t)² ∂²ψ/∂y² + g(t, y) ψ = 0
//! ```
//!
//! with the reaction g given by the minimised generator term. The solver
//! truncates ℝ to a wide interval, imposes zero curvature at the artificial
//! boundaries (ghost-node linear extrapolation, which keeps the system
//! tridiagonal and preserves constants exactly), and marches backward with
//! the trapezoidal (Crank–Nicolson) scheme. The first marched interval is
//! split into two implicit-Euler half steps (a Rannacher start) to damp any
//! high-frequency content injected at the boundary rows.
//!
//! The reaction is tabulated once per time level before marching; the march
//! itself is a sequence of tridiagonal solves.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PdeError, SolveError};
use crate::model::{LineId, ModelConfig};
use crate::pde::grid::{default_span, solve_tridiagonal, Grid1D};
use crate::util::{linspace, locate};

/// Discretization controls for [`solve_with_reaction`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Number of time steps (levels = n_time + 1).
    pub n_time: usize,
    /// Number of spatial nodes.
    pub n_space: usize,
    /// Implicit-Euler half steps replacing the first Crank–Nicolson steps
    /// (must be even; 2 = classic Rannacher start, 0 = plain CN).
    pub rannacher_half_steps: usize,
    /// Spatial domain override; default spans the diffusive reach.
    pub domain: Option<(f64, f64)>,
    /// Half-width of the default domain in units of max a(t)·√T.
    pub domain_width: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            n_time: 200,
            n_space: 401,
            rannacher_half_steps: 2,
            domain: None,
            domain_width: 6.0,
        }
    }
}

impl SolverOptions {
    /// Coarse settings for quick smoke runs and tests.
    pub fn coarse() -> Self {
        SolverOptions {
            n_time: 40,
            n_space: 81,
            ..SolverOptions::default()
        }
    }
}

/// ψ tabulated on the full time × space grid, with the reaction used.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PdeSolution {
    pub line: LineId,
    /// Ascending time levels 0 = t₀ < … < t_{n_time} = T.
    pub times: Vec<f64>,
    /// Ascending spatial nodes.
    pub ys: Vec<f64>,
    /// ψ values, row-major over times × ys.
    pub values: Vec<f64>,
    /// Reaction g(t, y) on the same layout (diagnostic and reusable).
    pub reaction: Vec<f64>,
}

impl PdeSolution {
    /// Bilinear interpolation; errors when (t, y) leaves the grid.
    pub fn eval(&self, t: f64, y: f64) -> Result<f64, PdeError> {
        let (t_min, t_max) = (self.times[0], *self.times.last().unwrap());
        let (y_min, y_max) = (self.ys[0], *self.ys.last().unwrap());
        let t_slack = 1e-12 * (1.0 + t_max.abs());
        let y_slack = 1e-12 * (1.0 + y_max.abs().max(y_min.abs()));
        if t < t_min - t_slack || t > t_max + t_slack || y < y_min - y_slack || y > y_max + y_slack
        {
            return Err(PdeError::OutOfDomain {
                t,
                y,
                t_min,
                t_max,
                y_min,
                y_max,
            });
        }
        Ok(self.interp(&self.values, t, y))
    }

    /// Bilinear interpolation with clamping to the grid.
    pub fn eval_clamped(&self, t: f64, y: f64) -> f64 {
        self.interp(&self.values, t, y)
    }

    /// The reaction g(t, y) by bilinear interpolation (clamped).
    pub fn reaction_at(&self, t: f64, y: f64) -> f64 {
        self.interp(&self.reaction, t, y)
    }

    fn interp(&self, table: &[f64], t: f64, y: f64) -> f64 {
        let (i, ft) = locate(&self.times, t);
        let (j, fy) = locate(&self.ys, y);
        let n = self.ys.len();
        let v00 = table[i * n + j];
        let v01 = table[i * n + j + 1];
        let v10 = table[(i + 1) * n + j];
        let v11 = table[(i + 1) * n + j + 1];
        let lo = v00 + fy * (v01 - v00);
        let hi = v10 + fy * (v11 - v10);
        lo + ft * (hi - lo)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// CSV export with columns t, y, psi, reaction.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,y,psi,reaction\n");
        let n = self.ys.len();
        for (i, &t) in self.times.iter().enumerate() {
            for (j, &y) in self.ys.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    t,
                    y,
                    self.values[i * n + j],
                    self.reaction[i * n + j]
                ));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serialization cannot fail")
    }
}

/// Reaction for the minimised generator: the pointwise optimal controls are
/// solved at (t, y) and substituted into the generator term.
pub fn min_generator_term(
    cfg: &ModelConfig,
    line: LineId,
    t: f64,
    y: f64,
) -> Result<f64, SolveError> {
    match line {
        LineId::Ordinary => {
            let sol = crate::strategy::optimal_first_retention(cfg, t, y)?;
            Ok(crate::strategy::first_line_objective(cfg, t, y, sol.retention)?)
        }
        LineId::Catastrophic => {
            let sol = crate::strategy::optimal_second_line(cfg, t, y)?;
            Ok(crate::strategy::second_line_objective(
                cfg,
                t,
                y,
                sol.retention,
                sol.investment,
            )?)
        }
    }
}

/// Solves the ψ equation of `line` with the optimal reaction
/// [`min_generator_term`].
pub fn solve_psi_pde(
    cfg: &ModelConfig,
    line: LineId,
    opts: &SolverOptions,
) -> Result<PdeSolution, PdeError> {
    let g = move |t: f64, y: f64| min_generator_term(cfg, line, t, y);
    solve_with_reaction(cfg, line, &g, opts)
}

/// Solves the ψ equation of `line` with an arbitrary reaction g(t, y).
///
/// Exposed for oracle cross-checks (e.g. reactions with closed-form ψ) and
/// comparison-principle tests.
pub fn solve_with_reaction(
    cfg: &ModelConfig,
    line: LineId,
    g: &(dyn Fn(f64, f64) -> Result<f64, SolveError> + Sync),
    opts: &SolverOptions,
) -> Result<PdeSolution, PdeError> {
    if opts.n_time < 2 {
        return Err(PdeError::Precondition(format!(
            "need at least 2 time steps, got {}",
            opts.n_time
        )));
    }
    if opts.rannacher_half_steps % 2 != 0 {
        return Err(PdeError::Precondition(format!(
            "rannacher_half_steps must be even, got {}",
            opts.rannacher_half_steps
        )));
    }
    let pairs = opts.rannacher_half_steps / 2;
    if pairs > opts.n_time {
        return Err(PdeError::Precondition(
            "more Rannacher half-step pairs than time steps".into(),
        ));
    }
    let horizon = cfg.horizon();
    let (y_min, y_max) = opts
        .domain
        .unwrap_or_else(|| default_span(cfg, line, opts.domain_width));
    let grid = Grid1D::new(y_min, y_max, opts.n_space)?;
    let ys = grid.nodes();
    let h = grid.spacing();
    let n = ys.len();
    let times = linspace(0.0, horizon, opts.n_time + 1);
    let tau = horizon / opts.n_time as f64;
    let coeffs = cfg.line(line);

    // Tabulate the reaction at every needed level: the main levels plus one
    // half level per Rannacher pair, counted down from T.
    let tabulate_row = |t: f64| -> Result<Vec<f64>, SolveError> {
        ys.par_iter().map(|&y| g(t, y)).collect()
    };
    let mut reaction = Vec::with_capacity((opts.n_time + 1) * n);
    for &t in &times {
        reaction.extend(tabulate_row(t)?);
    }
    let mut half_reaction = Vec::with_capacity(pairs * n);
    for p in 0..pairs {
        let t = times[opts.n_time - 1 - p] + 0.5 * tau;
        half_reaction.extend(tabulate_row(t)?);
    }

    // Row assembly: L v|_j = α_j v_{j−1} + β_j v_j + δ_j v_{j+1}, with
    // zero-curvature ghost rows at both ends.
    let assemble = |t: f64, g_row: &[f64], alpha: &mut [f64], beta: &mut [f64], delta: &mut [f64]| {
        let b = coeffs.factor_drift.eval(t);
        let a2 = {
            let a = coeffs.factor_volatility.eval(t);
            a * a
        };
        let diff = a2 / (2.0 * h * h);
        let adv = b / (2.0 * h);
        for j in 1..n - 1 {
            alpha[j] = diff - adv;
            beta[j] = -2.0 * diff + g_row[j];
            delta[j] = diff + adv;
        }
        alpha[0] = 0.0;
        beta[0] = -b / h + g_row[0];
        delta[0] = b / h;
        alpha[n - 1] = -b / h;
        beta[n - 1] = b / h + g_row[n - 1];
        delta[n - 1] = 0.0;
    };

    let mut alpha = vec![0.0; n];
    let mut beta = vec![0.0; n];
    let mut delta = vec![0.0; n];
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut scratch = vec![0.0; n];

    let mut values = vec![0.0; (opts.n_time + 1) * n];
    let mut v = vec![1.0; n];
    values[opts.n_time * n..].copy_from_slice(&v);

    // One implicit solve of (I − s·L(t_target)) v_new = rhs_vec.
    let implicit = |s: f64,
                    alpha: &[f64],
                    beta: &[f64],
                    delta: &[f64],
                    lower: &mut [f64],
                    diag: &mut [f64],
                    upper: &mut [f64],
                    rhs: &mut [f64],
                    scratch: &mut [f64]|
     -> Result<(), PdeError> {
        for j in 0..n {
            lower[j] = -s * alpha[j];
            diag[j] = 1.0 - s * beta[j];
            upper[j] = -s * delta[j];
        }
        solve_tridiagonal(lower, diag, upper, rhs, scratch)
    };

    for m in (0..opts.n_time).rev() {
        let interval_from_end = opts.n_time - 1 - m;
        if interval_from_end < pairs {
            // Rannacher: two implicit-Euler half steps through the mid level.
            let t_half = times[m] + 0.5 * tau;
            let g_half = &half_reaction[interval_from_end * n..(interval_from_end + 1) * n];
            assemble(t_half, g_half, &mut alpha, &mut beta, &mut delta);
            rhs.copy_from_slice(&v);
            implicit(
                0.5 * tau, &alpha, &beta, &delta, &mut lower, &mut diag, &mut upper, &mut rhs,
                &mut scratch,
            )?;
            v.copy_from_slice(&rhs);

            let g_row = &reaction[m * n..(m + 1) * n];
            assemble(times[m], g_row, &mut alpha, &mut beta, &mut delta);
            rhs.copy_from_slice(&v);
            implicit(
                0.5 * tau, &alpha, &beta, &delta, &mut lower, &mut diag, &mut upper, &mut rhs,
                &mut scratch,
            )?;
            v.copy_from_slice(&rhs);
        } else {
            // Crank–Nicolson: explicit half at t_{m+1}, implicit half at t_m.
            let g_up = &reaction[(m + 1) * n..(m + 2) * n];
            assemble(times[m + 1], g_up, &mut alpha, &mut beta, &mut delta);
            let s = 0.5 * tau;
            rhs[0] = v[0] + s * (beta[0] * v[0] + delta[0] * v[1]);
            for j in 1..n - 1 {
                rhs[j] = v[j] + s * (alpha[j] * v[j - 1] + beta[j] * v[j] + delta[j] * v[j + 1]);
            }
            rhs[n - 1] = v[n - 1] + s * (alpha[n - 1] * v[n - 2] + beta[n - 1] * v[n - 1]);

            let g_row = &reaction[m * n..(m + 1) * n];
            assemble(times[m], g_row, &mut alpha, &mut beta, &mut delta);
            implicit(
                s, &alpha, &beta, &delta, &mut lower, &mut diag, &mut upper, &mut rhs,
                &mut scratch,
            )?;
            v.copy_from_slice(&rhs);
        }

        let (mut min_v, mut argmin) = (f64::INFINITY, 0);
        for (j, &vj) in v.iter().enumerate() {
            if vj < min_v {
                min_v = vj;
                argmin = j;
            }
        }
        if !(min_v > 0.0) {
            return Err(PdeError::PositivityViolation {
                min_value: min_v,
                t: times[m],
                y: ys[argmin],
            });
        }
        values[m * n..(m + 1) * n].copy_from_slice(&v);
    }

    Ok(PdeSolution {
        line,
        times,
        ys,
        values,
        reaction,
    })
}
