//! Uniform one-dimensional grids and the tridiagonal (Thomas) solver.

use crate::error::PdeError;
use crate::model::{LineId, ModelConfig};
use crate::util::linspace;

/// A uniform grid on [y_min, y_max] with n nodes (n ≥ 2).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    pub y_min: f64,
    pub y_max: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(y_min: f64, y_max: f64, n: usize) -> Result<Self, PdeError> {
        if !(y_min.is_finite() && y_max.is_finite() && y_min < y_max) {
            return Err(PdeError::Precondition(format!(
                "grid needs finite y_min < y_max, got [{y_min}, {y_max}]"
            )));
        }
        if n < 5 {
            return Err(PdeError::Precondition(format!(
                "grid needs at least 5 nodes, got {n}"
            )));
        }
        Ok(Grid1D { y_min, y_max, n })
    }

    pub fn nodes(&self) -> Vec<f64> {
        linspace(self.y_min, self.y_max, self.n)
    }

    pub fn spacing(&self) -> f64 {
        (self.y_max - self.y_min) / (self.n - 1) as f64
    }
}

/// Default spatial span for a line's factor: y₀ ± (width·max a(t)·√T + the
/// drift reach max_t |∫₀^t b|), at least ±0.5. With `width` = 6 the
/// truncated Gaussian mass is ≈ 2·10⁻⁹, so the artificial boundary condition
/// is invisible at the states the solvers are queried on.
pub(crate) fn default_span(cfg: &ModelConfig, line: LineId, width: f64) -> (f64, f64) {
    let l = cfg.line(line);
    let horizon = cfg.horizon();
    let a_max = l.factor_volatility.abs_max_on(0.0, horizon);
    let mut drift_reach = 0.0f64;
    for i in 0..=200 {
        let t = horizon * i as f64 / 200.0;
        drift_reach = drift_reach.max(l.factor_drift.integral(0.0, t).abs());
    }
    let half = (width * a_max * horizon.sqrt() + drift_reach).max(0.5);
    (l.initial_factor - half, l.initial_factor + half)
}

/// Solves the tridiagonal system with subdiagonal `lower[1..]`, diagonal
/// `diag`, superdiagonal `upper[..n−1]`, and right-hand side `rhs` (answer
/// overwrites `rhs`). `scratch` must have length n.
///
/// Plain Thomas elimination without pivoting; the Crank–Nicolson matrices
/// built here are strictly diagonally dominant for admissible step sizes, so
/// a vanishing pivot is reported as a precondition failure rather than
/// repaired.
pub(crate) fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
    scratch: &mut [f64],
) -> Result<(), PdeError> {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n && scratch.len() == n);
    let mut pivot = diag[0];
    if pivot.abs() < 1e-300 {
        return Err(PdeError::Precondition("tridiagonal pivot vanished".into()));
    }
    scratch[0] = upper[0] / pivot;
    rhs[0] /= pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * scratch[i - 1];
        if pivot.abs() < 1e-300 {
            return Err(PdeError::Precondition("tridiagonal pivot vanished".into()));
        }
        scratch[i] = upper[i] / pivot;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_recovers_known_solution() {
        // [DERIVED] fix x, form b = A x for a 6x6 tridiagonal A, solve, compare.
        let n = 6;
        let lower: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else { -0.3 + 0.05 * i as f64 }).collect();
        let diag: Vec<f64> = (0..n).map(|i| 2.0 + 0.1 * i as f64).collect();
        let upper: Vec<f64> = (0..n).map(|i| if i == n - 1 { 0.0 } else { 0.4 - 0.02 * i as f64 }).collect();
        let x: Vec<f64> = (0..n).map(|i| (-1.0f64).powi(i as i32) * (1.0 + i as f64)).collect();
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            rhs[i] = diag[i] * x[i];
            if i > 0 {
                rhs[i] += lower[i] * x[i - 1];
            }
            if i < n - 1 {
                rhs[i] += upper[i] * x[i + 1];
            }
        }
        let mut scratch = vec![0.0; n];
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs, &mut scratch).unwrap();
        for i in 0..n {
            assert!((rhs[i] - x[i]).abs() < 1e-12, "{} vs {}", rhs[i], x[i]);
        }
    }

    #[test]
    fn grid_rejects_degenerate_inputs() {
        assert!(Grid1D::new(1.0, 1.0, 10).is_err());
        assert!(Grid1D::new(0.0, 1.0, 3).is_err());
        assert!(Grid1D::new(f64::NAN, 1.0, 10).is_err());
        let g = Grid1D::new(-1.0, 1.0, 5).unwrap();
        assert_eq!(g.nodes(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!((g.spacing() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn default_span_covers_diffusive_reach() {
        let cfg = crate::cli::presets::evp_comparison();
        let (lo, hi) = default_span(&cfg, LineId::Catastrophic, 6.0);
        let y0 = cfg.catastrophic.initial_factor;
        // a = 0.3, T = 1: half-width 1.8.
        assert!((lo - (y0 - 1.8)).abs() < 1e-12);
        assert!((hi - (y0 + 1.8)).abs() < 1e-12);
    }
}
