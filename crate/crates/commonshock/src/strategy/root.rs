//! Safeguarded Newton–bisection for increasing scalar functions.
//!
//! Every first-order condition in this crate (retention FOCs, investment
//! FOCs, the expected-value tilt equation) is strictly increasing in its
//! argument, with one wrinkle: for unbounded claim support the function
//! diverges to +∞ at a finite tilt, and evaluations beyond that wall raise
//! [`ModelError::DivergentMoment`]/[`ModelError::MomentOverflow`]. The solver
//! treats those errors as "+∞ on the upper side": legitimate bracket
//! information, never a failure.

use crate::error::{ModelError, SolveError};

/// Solver knobs. The defaults drive residuals to ~1e-13 of the problem
/// scale, well inside the 1e-10 acceptance requirement.
#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Absolute residual tolerance (callers scale it to the FOC magnitude).
    pub tol: f64,
    /// Iteration cap for the Newton/bisection loop.
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            tol: 1e-12,
            max_iter: 200,
        }
    }
}

/// Converged root with its achieved residual.
#[derive(Debug, Clone, Copy)]
pub struct RootResult {
    pub root: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Evaluation outcome: finite value or +∞ (divergent moment).
#[derive(Debug, Clone, Copy)]
pub enum Val {
    Finite(f64),
    PlusInf,
}

/// Maps a moment evaluation to [`Val`], keeping genuine errors.
pub fn as_val(r: Result<f64, ModelError>) -> Result<Val, SolveError> {
    match r {
        Ok(v) if v.is_finite() => Ok(Val::Finite(v)),
        Ok(_) | Err(ModelError::DivergentMoment { .. }) | Err(ModelError::MomentOverflow { .. }) => {
            Ok(Val::PlusInf)
        }
        Err(e) => Err(SolveError::Model(e)),
    }
}

/// Walks down from `start` in doubling steps until f ≤ 0, returning the
/// bracket endpoint and its value. `start_val` is f(start), already known.
pub fn bracket_below(
    ctx: &str,
    f: &mut dyn FnMut(f64) -> Result<Val, SolveError>,
    start: f64,
    start_val: Val,
    initial_step: f64,
) -> Result<(f64, f64), SolveError> {
    if let Val::Finite(v) = start_val {
        if v <= 0.0 {
            return Ok((start, v));
        }
    }
    let mut step = initial_step.abs().max(1e-8);
    let mut x = start;
    for _ in 0..60 {
        x -= step;
        if let Val::Finite(v) = f(x)? {
            if v <= 0.0 {
                return Ok((x, v));
            }
        }
        step *= 2.0;
    }
    Err(SolveError::BracketFailure {
        context: ctx.into(),
        lo: x,
        hi: start,
        expansions: 60,
    })
}

/// Walks up from `start` in doubling steps until f ≥ 0 or +∞.
pub fn bracket_above(
    ctx: &str,
    f: &mut dyn FnMut(f64) -> Result<Val, SolveError>,
    start: f64,
    start_val: Val,
    initial_step: f64,
) -> Result<(f64, Val), SolveError> {
    match start_val {
        Val::PlusInf => return Ok((start, Val::PlusInf)),
        Val::Finite(v) if v >= 0.0 => return Ok((start, start_val)),
        _ => {}
    }
    let mut step = initial_step.abs().max(1e-8);
    let mut x = start;
    for _ in 0..60 {
        x += step;
        match f(x)? {
            Val::PlusInf => return Ok((x, Val::PlusInf)),
            Val::Finite(v) if v >= 0.0 => return Ok((x, Val::Finite(v))),
            _ => {}
        }
        step *= 2.0;
    }
    Err(SolveError::BracketFailure {
        context: ctx.into(),
        lo: start,
        hi: x,
        expansions: 60,
    })
}

/// Finds the root of an increasing function on a bracket [lo, hi] with
/// f(lo) ≤ 0 and f(hi) ≥ 0 (possibly +∞). Newton steps from the endpoint
/// with the smaller finite residual, guarded by bisection whenever the step
/// leaves the bracket or the derivative is unusable.
pub fn solve_increasing(
    ctx: &str,
    f: &mut dyn FnMut(f64) -> Result<Val, SolveError>,
    df: &mut dyn FnMut(f64) -> Result<Val, SolveError>,
    mut lo: f64,
    mut flo: f64,
    mut hi: f64,
    mut fhi: Val,
    opts: &RootOptions,
) -> Result<RootResult, SolveError> {
    debug_assert!(lo <= hi, "bracket must be ordered");
    debug_assert!(flo <= 0.0, "lower bracket value must be <= 0");
    if flo.abs() <= opts.tol {
        return Ok(RootResult {
            root: lo,
            residual: flo.abs(),
            iterations: 0,
        });
    }
    if let Val::Finite(v) = fhi {
        debug_assert!(v >= 0.0, "upper bracket value must be >= 0");
        if v.abs() <= opts.tol {
            return Ok(RootResult {
                root: hi,
                residual: v.abs(),
                iterations: 0,
            });
        }
    }

    for iter in 1..=opts.max_iter {
        // Best finite endpoint for the Newton step.
        let (xb, fb) = match fhi {
            Val::Finite(v) if v.abs() < flo.abs() => (hi, v),
            _ => (lo, flo),
        };
        let mut candidate = 0.5 * (lo + hi);
        if let Val::Finite(d) = df(xb)? {
            if d > 0.0 {
                let newton = xb - fb / d;
                if newton > lo && newton < hi {
                    candidate = newton;
                }
            }
        }
        match f(candidate)? {
            Val::PlusInf => hi = candidate,
            Val::Finite(v) => {
                if v.abs() <= opts.tol {
                    return Ok(RootResult {
                        root: candidate,
                        residual: v.abs(),
                        iterations: iter,
                    });
                }
                if v > 0.0 {
                    hi = candidate;
                    fhi = Val::Finite(v);
                } else {
                    lo = candidate;
                    flo = v;
                }
            }
        }
        if hi - lo <= 1e-15 * hi.abs().max(lo.abs()).max(1.0) {
            // Machine-width bracket: report the better endpoint honestly.
            let (root, residual) = match fhi {
                Val::Finite(v) if v.abs() < flo.abs() => (hi, v.abs()),
                _ => (lo, flo.abs()),
            };
            if residual <= opts.tol.max(1e-9 * flo.abs().max(1.0)) {
                return Ok(RootResult {
                    root,
                    residual,
                    iterations: iter,
                });
            }
            return Err(SolveError::NonConvergence {
                context: ctx.into(),
                residual,
                iterations: iter,
            });
        }
    }
    Err(SolveError::NonConvergence {
        context: ctx.into(),
        residual: flo.abs(),
        iterations: opts.max_iter,
    })
}
