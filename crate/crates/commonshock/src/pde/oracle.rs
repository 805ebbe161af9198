//! Monte Carlo Feynman–Kac oracle for the ψ equations.
//!
//! Because the reaction–diffusion equation is linear, its solution has the
//! stochastic representation
//!
//! ```text
//! ψ(t, y) = E[ exp( ∫_t^T g(s, Y_s) ds ) ],   dY_s = b(s) ds + a(s) dW_s,
//! ```
//!
//! with Y_t = y. The oracle simulates Y with exact Gaussian increments (the
//! coefficients are deterministic in time, so each increment is Normal with
//! mean ∫b and variance ∫a²), accumulates ∫g by the trapezoidal rule along
//! the path, and averages. It shares no code with the PDE marcher beyond the
//! reaction itself, which makes it an independent check of the
//! discretization.
//!
//! The reaction is pre-tabulated on a [`ReactionTable`] and interpolated
//! bilinearly along paths; pointwise optimal-control solves inside the
//! per-step loop would dominate the cost otherwise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PdeError, SolveError};
use crate::model::{LineId, ModelConfig};
use crate::pde::grid::default_span;
use crate::pde::solver::min_generator_term;
use crate::util::{linspace, locate, mean_stderr};

/// The reaction g(t, y) tabulated on a rectangular grid for fast bilinear
/// lookup (clamped outside the grid).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReactionTable {
    pub line: LineId,
    pub times: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major over times × ys.
    pub values: Vec<f64>,
}

impl ReactionTable {
    /// Tabulates the optimal reaction [`min_generator_term`] on an
    /// `n_time × n_space` grid over the line's default span.
    pub fn tabulate(
        cfg: &ModelConfig,
        line: LineId,
        n_time: usize,
        n_space: usize,
    ) -> Result<Self, SolveError> {
        let g = move |t: f64, y: f64| min_generator_term(cfg, line, t, y);
        let (lo, hi) = default_span(cfg, line, 6.0);
        Self::from_fn(
            line,
            &g,
            linspace(0.0, cfg.horizon(), n_time),
            linspace(lo, hi, n_space),
        )
    }

    /// Tabulates an arbitrary reaction on explicit grids.
    pub fn from_fn(
        line: LineId,
        g: &(dyn Fn(f64, f64) -> Result<f64, SolveError> + Sync),
        times: Vec<f64>,
        ys: Vec<f64>,
    ) -> Result<Self, SolveError> {
        assert!(times.len() >= 2 && ys.len() >= 2);
        let n = ys.len();
        let values: Vec<f64> = (0..times.len() * n)
            .into_par_iter()
            .map(|idx| g(times[idx / n], ys[idx % n]))
            .collect::<Result<_, _>>()?;
        Ok(ReactionTable {
            line,
            times,
            ys,
            values,
        })
    }

    /// Bilinear interpolation, clamped to the grid.
    pub fn eval(&self, t: f64, y: f64) -> f64 {
        let (i, ft) = locate(&self.times, t);
        let (j, fy) = locate(&self.ys, y);
        let n = self.ys.len();
        let v00 = self.values[i * n + j];
        let v01 = self.values[i * n + j + 1];
        let v10 = self.values[(i + 1) * n + j];
        let v11 = self.values[(i + 1) * n + j + 1];
        let lo = v00 + fy * (v01 - v00);
        let hi = v10 + fy * (v11 - v10);
        lo + ft * (hi - lo)
    }
}

/// Monte Carlo estimate of ψ(t, y).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FkEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_paths: usize,
    pub n_steps: usize,
}

/// Feynman–Kac estimate of ψ(t, y) with the optimal reaction, building a
/// 65 × 129 reaction table internally. For repeated queries tabulate once
/// and call [`feynman_kac_with_table`].
pub fn feynman_kac_oracle(
    cfg: &ModelConfig,
    line: LineId,
    t: f64,
    y: f64,
    n_paths: usize,
    seed: u64,
) -> Result<FkEstimate, PdeError> {
    let table = ReactionTable::tabulate(cfg, line, 65, 129)?;
    feynman_kac_with_table(cfg, &table, t, y, n_paths, 128, seed)
}

/// Feynman–Kac estimate of ψ(t, y) for a pre-tabulated reaction.
///
/// Preconditions: `n_paths` ≥ 100 (the standard error is meaningless below
/// that), `n_steps` ≥ 8, and t ∈ [0, T].
pub fn feynman_kac_with_table(
    cfg: &ModelConfig,
    table: &ReactionTable,
    t: f64,
    y: f64,
    n_paths: usize,
    n_steps: usize,
    seed: u64,
) -> Result<FkEstimate, PdeError> {
    if n_paths < 100 {
        return Err(PdeError::Precondition(format!(
            "Feynman-Kac oracle needs >= 100 paths, got {n_paths}"
        )));
    }
    if n_steps < 8 {
        return Err(PdeError::Precondition(format!(
            "Feynman-Kac oracle needs >= 8 time steps, got {n_steps}"
        )));
    }
    let horizon = cfg.horizon();
    if !(0.0..=horizon * (1.0 + 1e-12)).contains(&t) {
        return Err(PdeError::Precondition(format!(
            "start time {t} outside [0, {horizon}]"
        )));
    }
    if horizon - t < 1e-14 {
        return Ok(FkEstimate {
            mean: 1.0,
            stderr: 0.0,
            n_paths,
            n_steps,
        });
    }
    let line = cfg.line(table.line);
    let dt = (horizon - t) / n_steps as f64;
    // Exact per-step Gaussian moments of the factor increment.
    let mut drifts = Vec::with_capacity(n_steps);
    let mut sds = Vec::with_capacity(n_steps);
    let mut step_times = Vec::with_capacity(n_steps + 1);
    for i in 0..=n_steps {
        step_times.push(t + i as f64 * dt);
    }
    for i in 0..n_steps {
        drifts.push(line.factor_drift.integral(step_times[i], step_times[i + 1]));
        sds.push(
            line.factor_volatility
                .square_integral(step_times[i], step_times[i + 1])
                .sqrt(),
        );
    }

    // Fixed-size path blocks with block-indexed substreams keep the result
    // deterministic regardless of thread count.
    const BLOCK: usize = 64;
    let n_blocks = n_paths.div_ceil(BLOCK);
    let values: Vec<f64> = (0..n_blocks)
        .into_par_iter()
        .flat_map_iter(|blk| {
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed ^ (blk as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15),
            );
            let count = BLOCK.min(n_paths - blk * BLOCK);
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let mut y_cur = y;
                let mut g_prev = table.eval(step_times[0], y_cur);
                let mut integral = 0.0;
                for i in 0..n_steps {
                    let xi: f64 = rng.sample(StandardNormal);
                    y_cur += drifts[i] + sds[i] * xi;
                    let g_next = table.eval(step_times[i + 1], y_cur);
                    integral += 0.5 * dt * (g_prev + g_next);
                    g_prev = g_next;
                }
                out.push(integral.exp());
            }
            out
        })
        .collect();

    let (mean, stderr) = mean_stderr(&values);
    Ok(FkEstimate {
        mean,
        stderr,
        n_paths,
        n_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::presets;
    use crate::pde::solver::{solve_psi_pde, solve_with_reaction, SolverOptions};

    #[test]
    fn table_reproduces_bilinear_functions_exactly() {
        let g = |t: f64, y: f64| Ok(0.3 + 0.2 * t - 0.1 * y);
        let table = ReactionTable::from_fn(
            LineId::Ordinary,
            &g,
            linspace(0.0, 1.0, 5),
            linspace(-2.0, 2.0, 7),
        )
        .unwrap();
        for &(t, y) in &[(0.13, -1.4), (0.77, 0.33), (0.5, 2.0)] {
            assert!((table.eval(t, y) - (0.3 + 0.2 * t - 0.1 * y)).abs() < 1e-14);
        }
        // Clamped outside.
        assert_eq!(table.eval(0.5, 10.0), table.eval(0.5, 2.0));
    }

    #[test]
    fn deterministic_reaction_integrates_exactly() {
        // [DERIVED] y-independent linear reaction: every path carries the
        // same trapezoid-exact integral, so mean = e^{0.4} and stderr = 0.
        let cfg = presets::evp_comparison();
        let g = |t: f64, _: f64| Ok(0.3 + 0.2 * t);
        let table = ReactionTable::from_fn(
            LineId::Catastrophic,
            &g,
            linspace(0.0, 1.0, 3),
            linspace(-2.0, 2.0, 3),
        )
        .unwrap();
        let est = feynman_kac_with_table(&cfg, &table, 0.0, 0.0, 128, 16, 7).unwrap();
        assert!((est.mean - (0.4f64).exp()).abs() < 1e-12);
        assert!(est.stderr < 1e-13);
    }

    #[test]
    fn oracle_agrees_with_pde_on_synthetic_reaction() {
        let cfg = presets::evp_comparison();
        let g = |_: f64, y: f64| Ok(0.5 / (1.0 + (-y).exp()) - 0.2);
        let (lo, hi) = default_span(&cfg, LineId::Catastrophic, 6.0);
        let table = ReactionTable::from_fn(
            LineId::Catastrophic,
            &g,
            linspace(0.0, cfg.horizon(), 33),
            linspace(lo, hi, 65),
        )
        .unwrap();
        let opts = SolverOptions {
            n_time: 120,
            n_space: 241,
            ..SolverOptions::default()
        };
        let pde = solve_with_reaction(&cfg, LineId::Catastrophic, &g, &opts).unwrap();
        let y0 = cfg.catastrophic.initial_factor;
        for (i, &(t, y)) in [(0.0, y0), (0.3, y0 + 0.5), (0.6, y0 - 0.4)].iter().enumerate() {
            let est = feynman_kac_with_table(&cfg, &table, t, y, 4000, 128, 11 + i as u64).unwrap();
            let psi = pde.eval(t, y).unwrap();
            let tol = (3.0 * est.stderr).max(5e-4 * psi);
            assert!(
                (est.mean - psi).abs() <= tol,
                "({t}, {y}): mc {} vs pde {psi}, stderr {}",
                est.mean,
                est.stderr
            );
        }
    }

    #[test]
    fn oracle_agrees_with_pde_on_optimal_reaction() {
        let cfg = presets::evp_comparison();
        let table = ReactionTable::tabulate(&cfg, LineId::Catastrophic, 33, 65).unwrap();
        let pde = solve_psi_pde(
            &cfg,
            LineId::Catastrophic,
            &SolverOptions {
                n_time: 80,
                n_space: 161,
                ..SolverOptions::default()
            },
        )
        .unwrap();
        let y0 = cfg.catastrophic.initial_factor;
        let est = feynman_kac_with_table(&cfg, &table, 0.0, y0, 4000, 128, 23).unwrap();
        let psi = pde.eval(0.0, y0).unwrap();
        let tol = (3.0 * est.stderr).max(1.5e-3 * psi);
        assert!(
            (est.mean - psi).abs() <= tol,
            "mc {} (se {}) vs pde {psi}",
            est.mean,
            est.stderr
        );
    }

    #[test]
    fn oracle_preconditions() {
        let cfg = presets::evp_comparison();
        let table = ReactionTable::from_fn(
            LineId::Catastrophic,
            &|_, _| Ok(0.0),
            linspace(0.0, 1.0, 3),
            linspace(-1.0, 1.0, 3),
        )
        .unwrap();
        assert!(matches!(
            feynman_kac_with_table(&cfg, &table, 0.0, 0.0, 50, 16, 1),
            Err(PdeError::Precondition(_))
        ));
        assert!(matches!(
            feynman_kac_with_table(&cfg, &table, 0.0, 0.0, 200, 4, 1),
            Err(PdeError::Precondition(_))
        ));
        assert!(matches!(
            feynman_kac_with_table(&cfg, &table, 2.0, 0.0, 200, 16, 1),
            Err(PdeError::Precondition(_))
        ));
        // At t = T the value is exactly 1.
        let est = feynman_kac_with_table(&cfg, &table, 1.0, 0.0, 200, 16, 1).unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn results_are_seed_deterministic() {
        let cfg = presets::evp_comparison();
        let g = |_: f64, y: f64| Ok(0.1 * y);
        let table = ReactionTable::from_fn(
            LineId::Catastrophic,
            &g,
            linspace(0.0, 1.0, 3),
            linspace(-3.0, 3.0, 5),
        )
        .unwrap();
        let a = feynman_kac_with_table(&cfg, &table, 0.0, -0.2, 500, 32, 99).unwrap();
        let b = feynman_kac_with_table(&cfg, &table, 0.0, -0.2, 500, 32, 99).unwrap();
        assert_eq!(a.mean, b.mean);
        assert_eq!(a.stderr, b.stderr);
        let c = feynman_kac_with_table(&cfg, &table, 0.0, -0.2, 500, 32, 100).unwrap();
        assert_ne!(a.mean, c.mean);
    }
}
