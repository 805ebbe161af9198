//! Path simulation of the joint insurance and financial market.
//!
//! The simulator realises the model under the physical measure:
//!
//! ```text
//! dY⁽ⁱ⁾(t) = bᵢ(t) dt + aᵢ(t) dBᵢ(t)                       (stochastic factors)
//! N⁽ⁱ⁾     ~ Cox process with intensity λᵢ(t, Y⁽ⁱ⁾(t))       (claim arrivals)
//! dP(t)    = P(t⁻)[ μ(t) dt + σ(t) dW(t) − K(t, Z) dN⁽²⁾ ]   (risky asset)
//! ```
//!
//! and accumulates the wealth of a reinsurance and investment strategy in
//! T-forward units (see [`estimate`]). Catastrophic arrivals hit the asset
//! and the second line simultaneously; that common shock is the object of
//! study, so arrival times are simulated exactly by two-stage thinning with
//! Brownian-bridge evaluation of the factor rather than on the time grid.
//!
//! Reproducibility guarantees:
//!
//! - a fixed `(seed, crn_stream, path_index)` triple always produces the same
//!   path, independent of thread count and of how many paths are simulated;
//! - `crn_stream` selects a common-random-numbers universe: estimates of two
//!   strategies on the same stream share every market scenario;
//! - `antithetic` pairs consecutive paths by mirroring all driving noise, and
//!   the estimators collapse each pair into one sampling unit.

mod cache;
mod estimate;
mod path;
mod rng;

pub use estimate::{
    estimate_utility, estimate_utility_paired, simulate_terminal_wealth, wealth_on_path,
    PairedEstimate, PathRecord, SimulationOutput, UtilityEstimate,
};
pub use path::{ClaimEvent, MarketPath};

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::model::ModelConfig;

/// Monte Carlo run parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Number of simulated paths (an antithetic run needs an even count).
    pub n_paths: usize,
    /// Number of uniform wealth-accumulation steps on [0, T].
    pub n_steps: usize,
    /// Master seed of the experiment.
    pub seed: u64,
    /// Mirror consecutive paths for variance reduction.
    pub antithetic: bool,
    /// Common-random-numbers universe; estimates on the same stream see the
    /// same scenarios.
    pub crn_stream: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_paths: 10_000,
            n_steps: 200,
            seed: 42,
            antithetic: false,
            crn_stream: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.n_paths < 2 {
            return Err(SimError::InvalidConfig(format!(
                "need at least 2 paths, got {}",
                self.n_paths
            )));
        }
        if self.antithetic && self.n_paths % 2 != 0 {
            return Err(SimError::InvalidConfig(format!(
                "antithetic runs need an even path count, got {}",
                self.n_paths
            )));
        }
        if self.n_steps == 0 {
            return Err(SimError::InvalidConfig("need at least one step".into()));
        }
        Ok(())
    }
}

/// Generate a single market scenario. Convenience wrapper that rebuilds the
/// deterministic step cache on every call; the bulk estimators share it.
pub fn simulate_market_path(
    cfg: &ModelConfig,
    sim: &SimConfig,
    path_index: usize,
) -> Result<MarketPath, SimError> {
    sim.validate()?;
    let cache = cache::SimGridCache::new(cfg, sim.n_steps)?;
    path::market_path(cfg, &cache, sim, path_index)
}
