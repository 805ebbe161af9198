//! Deterministic per-step quantities shared by every simulated path.
//!
//! Wealth is accumulated in T-forward units: a cash flow dC at time s
//! contributes B(s, T) dC to the terminal value, where B(t₁, t₂) =
//! exp(∫_{t₁}^{t₂} r(s) ds). With piecewise-linear coefficients the step
//! integrals below are smooth, so the composite Simpson values on a single
//! step are accurate to O(Δt⁴) and the Gaussian step moments are exact.

use crate::error::ModelError;
use crate::model::{LineId, ModelConfig};
use crate::util::linspace;

pub(crate) fn line_idx(line: LineId) -> usize {
    match line {
        LineId::Ordinary => 0,
        LineId::Catastrophic => 1,
    }
}

/// Exact and Simpson step integrals on the uniform simulation grid.
pub(crate) struct SimGridCache {
    /// Grid nodes t_0 = 0 < … < t_n = T.
    pub(crate) times: Vec<f64>,
    pub(crate) dt: f64,
    /// B(t_k, T) at every node (length n + 1).
    pub(crate) bleft: Vec<f64>,
    /// ∫_{t_k}^{t_{k+1}} B(s, T) ds per step.
    pub(crate) bmid: Vec<f64>,
    /// ∫_{t_k}^{t_{k+1}} (μ(s) − r(s)) B(s, T) ds per step.
    pub(crate) excess_b: Vec<f64>,
    /// √(∫_{t_k}^{t_{k+1}} σ²(s) ds) per step.
    pub(crate) sig_sd: Vec<f64>,
    /// ∫_{t_k}^{t_{k+1}} (μ(s) − σ²(s)/2) ds per step.
    pub(crate) gbm_mean: Vec<f64>,
    /// Per line: exact factor drift ∫ b and standard deviation √(∫ a²) per step.
    pub(crate) fdrift: [Vec<f64>; 2],
    pub(crate) fsd: [Vec<f64>; 2],
    /// Per line: sup of the dominating intensity bound δ over [0, T].
    pub(crate) delta_max: [f64; 2],
}

impl SimGridCache {
    pub(crate) fn new(cfg: &ModelConfig, n_steps: usize) -> Result<Self, ModelError> {
        let horizon = cfg.horizon();
        let times = linspace(0.0, horizon, n_steps + 1);
        let dt = horizon / n_steps as f64;
        let market = &cfg.market;

        let accum = |t: f64| market.rate.integral(t, horizon).exp();
        let bleft: Vec<f64> = times.iter().map(|&t| accum(t)).collect();

        let mut bmid = Vec::with_capacity(n_steps);
        let mut excess_b = Vec::with_capacity(n_steps);
        let mut sig_sd = Vec::with_capacity(n_steps);
        let mut gbm_mean = Vec::with_capacity(n_steps);
        for k in 0..n_steps {
            let (t0, t1) = (times[k], times[k + 1]);
            let tm = 0.5 * (t0 + t1);
            let b_mid = accum(tm);
            let excess =
                |t: f64, b: f64| (market.drift.eval(t) - market.rate.eval(t)) * b;
            bmid.push(dt / 6.0 * (bleft[k] + 4.0 * b_mid + bleft[k + 1]));
            excess_b.push(
                dt / 6.0
                    * (excess(t0, bleft[k])
                        + 4.0 * excess(tm, b_mid)
                        + excess(t1, bleft[k + 1])),
            );
            let var = market.volatility.square_integral(t0, t1);
            sig_sd.push(var.sqrt());
            gbm_mean.push(market.drift.integral(t0, t1) - 0.5 * var);
        }

        let mut fdrift = [Vec::new(), Vec::new()];
        let mut fsd = [Vec::new(), Vec::new()];
        let mut delta_max = [0.0_f64; 2];
        for line in [LineId::Ordinary, LineId::Catastrophic] {
            let i = line_idx(line);
            let spec = cfg.line(line);
            fdrift[i] = (0..n_steps)
                .map(|k| spec.factor_drift.integral(times[k], times[k + 1]))
                .collect();
            fsd[i] = (0..n_steps)
                .map(|k| {
                    spec.factor_volatility
                        .square_integral(times[k], times[k + 1])
                        .sqrt()
                })
                .collect();
            delta_max[i] = spec.intensity_bound.max_on(0.0, horizon);
            if !(delta_max[i] > 0.0) {
                return Err(ModelError::InvalidConfig(format!(
                    "intensity bound for the {} line must be positive somewhere on [0, T]",
                    line.label()
                )));
            }
        }

        Ok(SimGridCache {
            times,
            dt,
            bleft,
            bmid,
            excess_b,
            sig_sd,
            gbm_mean,
            fdrift,
            fsd,
            delta_max,
        })
    }

    pub(crate) fn n_steps(&self) -> usize {
        self.times.len() - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::presets;

    /// [DERIVED] With constant rate r the step integral of B has the closed
    /// form ∫_{t_k}^{t_{k+1}} e^{r(T−s)} ds = (e^{r(T−t_k)} − e^{r(T−t_{k+1})})/r.
    #[test]
    fn step_integrals_match_closed_forms() {
        let cfg = presets::evp_comparison();
        let cache = SimGridCache::new(&cfg, 16).expect("cache");
        let horizon = cfg.horizon();
        let r = 0.02;
        for k in 0..16 {
            let (t0, t1) = (cache.times[k], cache.times[k + 1]);
            let exact = ((r * (horizon - t0)).exp() - (r * (horizon - t1)).exp()) / r;
            assert!((cache.bmid[k] - exact).abs() < 1e-12, "bmid step {k}");
            // μ, σ constant: excess_b = (μ−r)·bmid, gbm_mean = (μ−σ²/2)Δt.
            assert!((cache.excess_b[k] - (0.05 - r) * exact).abs() < 1e-12);
            assert!((cache.gbm_mean[k] - (0.05 - 0.5 * 0.15 * 0.15) * cache.dt).abs() < 1e-15);
            assert!((cache.sig_sd[k] - 0.15 * cache.dt.sqrt()).abs() < 1e-15);
        }
        assert!((cache.bleft[0] - (r * horizon).exp()).abs() < 1e-14);
        assert_eq!(cache.n_steps(), 16);
        // evp preset: ordinary δ = 6, catastrophic δ = 7, both constant.
        assert_eq!(cache.delta_max, [6.0, 7.0]);
    }
}
