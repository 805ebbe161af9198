//! Exact-law market path generation.
//!
//! One path is built in three stages, each on its own random substream:
//!
//! 1. **Factors.** Y^i has time-only coefficients, so node increments are
//!    Gaussian with exact moments ∫b dt and ∫a² dt per step.
//! 2. **Claims.** Two-stage Ogata thinning per line: homogeneous proposals at
//!    rate sup δ are first thinned to the deterministic envelope δ(t), then to
//!    λ(t, Y_t). The factor at a proposal time is drawn from the exact
//!    Brownian-bridge law between the last revealed in-step point and the step's
//!    right node, so accepted arrivals follow the Cox law without time-stepping
//!    bias. A proposal that observes λ(t, Y_t) > δ(t) aborts the path with
//!    [`SimError::DominanceViolation`].
//! 3. **Asset.** The price is advanced multiplicatively with the exact
//!    log-normal step moments ∫(μ − σ²/2) dt and ∫σ² dt, then scaled by
//!    1 − K(τ, Z) at every catastrophic arrival. The Gaussian gains √(∫σ²)·ξ
//!    are recorded per step because the wealth dynamics reuse the same
//!    Brownian increments.

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::model::{LineId, ModelConfig};
use crate::sim::cache::{line_idx, SimGridCache};
use crate::sim::rng::{Draws, Sub};
use crate::sim::SimConfig;

/// A single claim arrival with its mark and the factor level that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClaimEvent {
    pub line: LineId,
    /// Arrival time τ ∈ (0, T).
    pub t: f64,
    /// Index k of the grid step [t_k, t_{k+1}) containing τ.
    pub step: usize,
    /// Claim size Z > 0.
    pub size: f64,
    /// Y^i(τ) for the line's own factor, drawn on the bridge.
    pub factor: f64,
}

/// One simulated market scenario on the uniform grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarketPath {
    /// Grid nodes t_0 = 0 < … < t_n = T.
    pub times: Vec<f64>,
    /// Y¹ at the nodes.
    pub factor_ordinary: Vec<f64>,
    /// Y² at the nodes.
    pub factor_catastrophic: Vec<f64>,
    /// Risky-asset price at the nodes (jumps applied within their step).
    pub prices: Vec<f64>,
    /// Brownian gain √(∫_{t_k}^{t_{k+1}} σ² ds) · ξ_k per step; the same
    /// increments drive both the price and the invested wealth.
    pub brownian_gain: Vec<f64>,
    /// All claim arrivals of both lines, sorted by time.
    pub events: Vec<ClaimEvent>,
}

impl MarketPath {
    /// Node values of the requested line's factor.
    pub fn factor(&self, line: LineId) -> &[f64] {
        match line {
            LineId::Ordinary => &self.factor_ordinary,
            LineId::Catastrophic => &self.factor_catastrophic,
        }
    }

    /// Number of arrivals on one line.
    pub fn count(&self, line: LineId) -> usize {
        self.events.iter().filter(|e| e.line == line).count()
    }
}

fn simulate_factor_nodes(
    cache: &SimGridCache,
    line: LineId,
    y0: f64,
    draws: &mut Draws,
) -> Vec<f64> {
    let i = line_idx(line);
    let n = cache.n_steps();
    let mut nodes = Vec::with_capacity(n + 1);
    nodes.push(y0);
    for k in 0..n {
        let next = nodes[k] + cache.fdrift[i][k] + cache.fsd[i][k] * draws.normal();
        nodes.push(next);
    }
    nodes
}

/// Thin one line's arrivals against its pre-simulated factor nodes.
fn simulate_line_claims(
    cfg: &ModelConfig,
    cache: &SimGridCache,
    line: LineId,
    nodes: &[f64],
    draws: &mut Draws,
    events: &mut Vec<ClaimEvent>,
) -> Result<(), SimError> {
    let spec = cfg.line(line);
    let i = line_idx(line);
    let horizon = cfg.horizon();
    let n = cache.n_steps();
    let dmax = cache.delta_max[i];

    let mut s = 0.0;
    // Last revealed point of the factor path inside the current step.
    let mut anchor_step = 0usize;
    let mut anchor_t = 0.0;
    let mut anchor_y = nodes[0];
    loop {
        s += draws.exponential(dmax);
        if s >= horizon {
            return Ok(());
        }
        let delta_s = spec.intensity_bound.eval(s);
        // Stage 1: homogeneous sup δ proposals → inhomogeneous envelope δ(t).
        if draws.uniform() * dmax > delta_s {
            continue;
        }
        let k = ((s / cache.dt) as usize).min(n - 1);
        if k != anchor_step {
            anchor_step = k;
            anchor_t = cache.times[k];
            anchor_y = nodes[k];
        }
        // Bridge from the anchor to the step's right node; coefficients are
        // time-only, so the conditional law is Gaussian with these moments.
        let tb = cache.times[k + 1];
        let yb = nodes[k + 1];
        let m_part = spec.factor_drift.integral(anchor_t, s);
        let m_total = spec.factor_drift.integral(anchor_t, tb);
        let v_part = spec.factor_volatility.square_integral(anchor_t, s);
        let v_total = spec.factor_volatility.square_integral(anchor_t, tb);
        let (frac, var) = if v_total > 0.0 {
            (v_part / v_total, (v_part * (v_total - v_part) / v_total).max(0.0))
        } else {
            // Degenerate diffusion on the sub-step: deterministic transport.
            (((s - anchor_t) / (tb - anchor_t)).clamp(0.0, 1.0), 0.0)
        };
        let mean = anchor_y + m_part + (yb - anchor_y - m_total) * frac;
        let ys = mean + var.sqrt() * draws.normal();

        let lambda = spec.intensity_at(s, ys);
        if lambda > delta_s * (1.0 + 1e-9) {
            return Err(SimError::DominanceViolation {
                line: line.label(),
                t: s,
                factor: ys,
                intensity: lambda,
                bound: delta_s,
            });
        }
        // Stage 2: envelope δ(t) → state intensity λ(t, Y_t).
        if draws.uniform() * delta_s <= lambda {
            let size = spec.claims.sample_from_uniform(draws.uniform());
            events.push(ClaimEvent {
                line,
                t: s,
                step: k,
                size,
                factor: ys,
            });
        }
        // Y(s) is revealed either way; later bridges must condition on it.
        anchor_t = s;
        anchor_y = ys;
    }
}

/// Generate path `path_index` of the experiment described by `sim`.
pub(crate) fn market_path(
    cfg: &ModelConfig,
    cache: &SimGridCache,
    sim: &SimConfig,
    path_index: usize,
) -> Result<MarketPath, SimError> {
    let (key, mirror) = if sim.antithetic {
        ((path_index / 2) as u64, path_index % 2 == 1)
    } else {
        (path_index as u64, false)
    };
    let stream = |sub| Draws::new(sim.seed, sim.crn_stream, key, sub, mirror);
    let n = cache.n_steps();

    let factor_ordinary = simulate_factor_nodes(
        cache,
        LineId::Ordinary,
        cfg.ordinary.initial_factor,
        &mut stream(Sub::FactorOrdinary),
    );
    let factor_catastrophic = simulate_factor_nodes(
        cache,
        LineId::Catastrophic,
        cfg.catastrophic.initial_factor,
        &mut stream(Sub::FactorCatastrophic),
    );

    let mut events = Vec::new();
    let mut claim_draws = stream(Sub::Claims);
    simulate_line_claims(
        cfg,
        cache,
        LineId::Ordinary,
        &factor_ordinary,
        &mut claim_draws,
        &mut events,
    )?;
    simulate_line_claims(
        cfg,
        cache,
        LineId::Catastrophic,
        &factor_catastrophic,
        &mut claim_draws,
        &mut events,
    )?;
    events.sort_by(|a, b| a.t.partial_cmp(&b.t).expect("finite event times"));

    let mut asset_draws = stream(Sub::AssetBrownian);
    let mut brownian_gain = Vec::with_capacity(n);
    for k in 0..n {
        brownian_gain.push(cache.sig_sd[k] * asset_draws.normal());
    }
    let mut jump_mult = vec![1.0_f64; n];
    if !cfg.market.jump.is_none() {
        for e in events.iter().filter(|e| e.line == LineId::Catastrophic) {
            let factor = 1.0 - cfg.market.jump.eval(e.t, e.size);
            if factor <= 0.0 {
                return Err(SimError::PriceNotPositive { t: e.t, factor });
            }
            jump_mult[e.step] *= factor;
        }
    }
    let mut prices = Vec::with_capacity(n + 1);
    prices.push(cfg.market.initial_price);
    for k in 0..n {
        prices.push(prices[k] * (cache.gbm_mean[k] + brownian_gain[k]).exp() * jump_mult[k]);
    }

    Ok(MarketPath {
        times: cache.times.clone(),
        factor_ordinary,
        factor_catastrophic,
        prices,
        brownian_gain,
        events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::presets;
    use crate::model::{IntensityModel, TimeCoefficient};
    use crate::util::mean_stderr;

    fn cache_for(cfg: &ModelConfig, n_steps: usize) -> SimGridCache {
        SimGridCache::new(cfg, n_steps).expect("cache")
    }

    #[test]
    fn paths_are_seed_deterministic_and_mirror_consistent() {
        let cfg = presets::evp_comparison();
        let cache = cache_for(&cfg, 16);
        let sim = SimConfig {
            n_paths: 4,
            n_steps: 16,
            seed: 99,
            antithetic: true,
            crn_stream: 0,
        };
        let a = market_path(&cfg, &cache, &sim, 0).expect("path");
        let b = market_path(&cfg, &cache, &sim, 0).expect("path");
        assert_eq!(a.prices, b.prices);
        assert_eq!(a.events.len(), b.events.len());

        // Mirror path: Gaussian increments negate, so node deviations from the
        // deterministic drift path are exact reflections.
        let m = market_path(&cfg, &cache, &sim, 1).expect("mirror");
        let y0 = cfg.ordinary.initial_factor;
        let mut drift_acc = y0;
        for k in 0..=16 {
            if k > 0 {
                drift_acc += cache.fdrift[0][k - 1];
            }
            let sum = a.factor_ordinary[k] + m.factor_ordinary[k];
            assert!(
                (sum - 2.0 * drift_acc).abs() < 1e-12,
                "bridge of mirrored nodes at k = {k}"
            );
        }
        for k in 0..16 {
            assert!((a.brownian_gain[k] + m.brownian_gain[k]).abs() < 1e-15);
        }
    }

    /// [DERIVED] Y_T ~ N(y₀ + ∫b, ∫a²): for the evp preset's ordinary line
    /// y₀ = 0.1, b ≡ 0, a ≡ 0.25, so E[Y_T] = 0.1 and Var = 0.0625.
    #[test]
    fn factor_terminal_moments_match_gaussian_law() {
        let cfg = presets::evp_comparison();
        let cache = cache_for(&cfg, 8);
        let sim = SimConfig {
            n_paths: 4000,
            n_steps: 8,
            seed: 21,
            antithetic: false,
            crn_stream: 0,
        };
        let terminal: Vec<f64> = (0..sim.n_paths)
            .map(|i| {
                market_path(&cfg, &cache, &sim, i).expect("path").factor_ordinary[8]
            })
            .collect();
        let (mean, se) = mean_stderr(&terminal);
        assert!(
            (mean - 0.1).abs() < 3.5 * se,
            "terminal factor mean {mean} vs 0.1 (se {se})"
        );
        let var = terminal.iter().map(|y| (y - mean).powi(2)).sum::<f64>()
            / (terminal.len() - 1) as f64;
        let expected = 0.25_f64.powi(2);
        // Var of the sample variance of a Gaussian is 2σ⁴/(n−1).
        let var_se = (2.0 * expected * expected / (terminal.len() - 1) as f64).sqrt();
        assert!(
            (var - expected).abs() < 4.0 * var_se,
            "terminal factor variance {var} vs {expected}"
        );
    }

    /// [DERIVED] With a constant intensity the count is Poisson(λT): the evp
    /// ordinary line modified to λ ≡ 3 on [0, 1] gives mean 3 and variance 3.
    #[test]
    fn constant_intensity_counts_are_poisson()
    {
        let mut cfg = presets::evp_comparison();
        cfg.ordinary.intensity = IntensityModel::Constant {
            rate: TimeCoefficient::constant(3.0),
        };
        cfg.ordinary.intensity_bound = TimeCoefficient::constant(3.0);
        let cache = cache_for(&cfg, 8);
        let sim = SimConfig {
            n_paths: 6000,
            n_steps: 8,
            seed: 5,
            antithetic: false,
            crn_stream: 0,
        };
        let counts: Vec<f64> = (0..sim.n_paths)
            .map(|i| market_path(&cfg, &cache, &sim, i).expect("path").count(LineId::Ordinary) as f64)
            .collect();
        let (mean, se) = mean_stderr(&counts);
        assert!((mean - 3.0).abs() < 3.5 * se, "Poisson mean {mean} (se {se})");
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>()
            / (counts.len() - 1) as f64;
        assert!((var - 3.0).abs() < 0.25, "Poisson variance {var}");
    }

    /// [DERIVED] Cox count mean E[N_T] = ∫₀ᵀ E[λ(t, Y_t)] dt with
    /// Y_t ~ N(y₀, a²t); the oracle evaluates the double integral by Simpson
    /// over the Gaussian density and time.
    #[test]
    fn cox_count_mean_matches_quadrature_oracle() {
        let cfg = presets::evp_comparison();
        let spec = &cfg.catastrophic;
        let horizon = cfg.horizon();
        let y0 = spec.initial_factor;
        let a = 0.3_f64;

        let mean_lambda_at = |t: f64| -> f64 {
            if t < 1e-12 {
                return spec.intensity_at(0.0, y0);
            }
            let sd = a * t.sqrt();
            let m = 801;
            let lo = y0 - 8.0 * sd;
            let hi = y0 + 8.0 * sd;
            let h = (hi - lo) / (m - 1) as f64;
            let f = |y: f64| {
                let z = (y - y0) / sd;
                spec.intensity_at(t, y) * (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
            };
            let mut acc = f(lo) + f(hi);
            for j in 1..m - 1 {
                acc += f(lo + j as f64 * h) * if j % 2 == 1 { 4.0 } else { 2.0 };
            }
            acc * h / 3.0
        };
        let nt = 33;
        let ht = horizon / (nt - 1) as f64;
        let mut expected = mean_lambda_at(0.0) + mean_lambda_at(horizon);
        for j in 1..nt - 1 {
            expected += mean_lambda_at(j as f64 * ht) * if j % 2 == 1 { 4.0 } else { 2.0 };
        }
        expected *= ht / 3.0;

        let cache = cache_for(&cfg, 8);
        let sim = SimConfig {
            n_paths: 6000,
            n_steps: 8,
            seed: 13,
            antithetic: false,
            crn_stream: 0,
        };
        let counts: Vec<f64> = (0..sim.n_paths)
            .map(|i| {
                market_path(&cfg, &cache, &sim, i).expect("path").count(LineId::Catastrophic)
                    as f64
            })
            .collect();
        let (mean, se) = mean_stderr(&counts);
        assert!(
            (mean - expected).abs() < 3.0 * se + 1e-3,
            "Cox mean {mean} vs oracle {expected} (se {se})"
        );
    }

    /// [DERIVED] Compound-Poisson price factor: with constant λ and
    /// K(t, z) = kz, E[∏(1 − kZ_i)] = exp(−λT·kE[Z]), so
    /// E[P_T] = p₀ exp(∫μ − λT·kE[Z]).
    #[test]
    fn price_mean_matches_compound_poisson_formula() {
        let mut cfg = presets::evp_comparison();
        cfg.catastrophic.intensity = IntensityModel::Constant {
            rate: TimeCoefficient::constant(2.0),
        };
        cfg.catastrophic.intensity_bound = TimeCoefficient::constant(2.0);
        let horizon = cfg.horizon();
        let k = cfg.market.jump.slope_at(0.0);
        let mean_z = cfg.catastrophic.claims.mean();
        let expected = cfg.market.initial_price
            * (cfg.market.drift.integral(0.0, horizon) - 2.0 * horizon * k * mean_z).exp();

        let cache = cache_for(&cfg, 8);
        let sim = SimConfig {
            n_paths: 8000,
            n_steps: 8,
            seed: 31,
            antithetic: false,
            crn_stream: 0,
        };
        let terminal: Vec<f64> = (0..sim.n_paths)
            .map(|i| *market_path(&cfg, &cache, &sim, i).expect("path").prices.last().unwrap())
            .collect();
        let (mean, se) = mean_stderr(&terminal);
        assert!(
            (mean - expected).abs() < 3.5 * se,
            "price mean {mean} vs closed form {expected} (se {se})"
        );
    }

    #[test]
    fn dominance_violation_is_detected() {
        let mut cfg = presets::evp_comparison();
        // Envelope far below the actual logistic intensity (≈ 1.8 at y₀).
        cfg.catastrophic.intensity_bound = TimeCoefficient::constant(0.5);
        let cache = cache_for(&cfg, 8);
        let sim = SimConfig {
            n_paths: 400,
            n_steps: 8,
            seed: 77,
            antithetic: false,
            crn_stream: 0,
        };
        let mut seen = false;
        for i in 0..400 {
            match market_path(&cfg, &cache, &sim, i) {
                Err(SimError::DominanceViolation { line, intensity, bound, .. }) => {
                    assert_eq!(line, "catastrophic");
                    assert!(intensity > bound);
                    seen = true;
                    break;
                }
                Err(other) => panic!("unexpected error: {other}"),
                Ok(_) => {}
            }
        }
        assert!(seen, "no dominance violation raised in 400 paths");
    }

    #[test]
    fn cross_line_counts_are_uncorrelated() {
        let cfg = presets::evp_comparison();
        let cache = cache_for(&cfg, 8);
        let sim = SimConfig {
            n_paths: 4000,
            n_steps: 8,
            seed: 51,
            antithetic: false,
            crn_stream: 0,
        };
        let pairs: Vec<(f64, f64)> = (0..sim.n_paths)
            .map(|i| {
                let p = market_path(&cfg, &cache, &sim, i).expect("path");
                (p.count(LineId::Ordinary) as f64, p.count(LineId::Catastrophic) as f64)
            })
            .collect();
        let n = pairs.len() as f64;
        let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
        let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
        for (x, y) in &pairs {
            sxx += (x - mx) * (x - mx);
            syy += (y - my) * (y - my);
            sxy += (x - mx) * (y - my);
        }
        let corr = sxy / (sxx * syy).sqrt();
        // Null distribution of the sample correlation is ~N(0, 1/√n).
        assert!(
            corr.abs() < 3.5 / n.sqrt(),
            "cross-line count correlation {corr}"
        );
    }
}
