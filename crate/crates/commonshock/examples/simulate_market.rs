//! Simulating the market and estimating expected utility under a strategy.
//!
//! A market path consists of the two factor diffusions, the claim arrivals
//! of both lines (thinned against their dominating bounds, with the factor
//! revealed at candidate times by exact Brownian bridging), and the asset
//! price, which drops by the factor 1 − K(τ, Z) at every catastrophic
//! claim. Wealth then accrues premiums, reinsurance costs, investment gains
//! and claim payments under the chosen feedback strategy, and the utility
//! estimate averages 1 − e^(−γX_T) over paths.
//!
//! Everything is deterministic given (seed, path index): paths are
//! reproducible one at a time, independent of thread count, and antithetic
//! pairing mirrors the Gaussian draws while preserving every marginal law.
//!
//! The example prints one path's event log, then compares the optimal
//! strategy against full retention with no investment, using common random
//! numbers so the difference has a tight standard error.
//!
//! Run with:
//!
//! ```text
//! cargo run --release --example simulate_market
//! ```

use commonshock::cli::presets;
use commonshock::sim::{estimate_utility, estimate_utility_paired, simulate_market_path, SimConfig};
use commonshock::strategy::{ConstantStrategy, StrategyField};

fn main() {
    let cfg = presets::evp_comparison();
    let sim = SimConfig {
        n_paths: 40_000,
        n_steps: 100,
        seed: 20260815,
        antithetic: true,
        crn_stream: 0,
    };

    println!("== one path, reproduced in isolation ==");
    let path = simulate_market_path(&cfg, &sim, 7).expect("path");
    println!(
        "path 7: {} ordinary + {} catastrophic claims, terminal price {:.6}",
        path.count(commonshock::model::LineId::Ordinary),
        path.count(commonshock::model::LineId::Catastrophic),
        path.prices.last().unwrap()
    );
    for event in &path.events {
        println!(
            "  t = {:.4}  {}  size = {:.4}  factor level Y = {:.6}",
            event.t,
            event.line.label(),
            event.size,
            event.factor
        );
    }

    println!("\n== utility under the optimal feedback strategy ==");
    let (times, first, second) = StrategyField::default_grids(&cfg, 40, 81);
    let field = StrategyField::tabulate(&cfg, times, first, second).expect("tabulate");
    let est = estimate_utility(&cfg, &sim, &field).expect("estimate");
    println!(
        "E[U(X_T)] = {:.6} +/- {:.6}   E[e^(-gamma X_T)] = {:.6}   ({} paths, {} excluded)",
        est.expected_utility, est.utility_stderr, est.exponential_moment, est.n_paths, est.n_excluded
    );

    println!("\n== paired comparison vs full retention, no investment ==");
    let naive = ConstantStrategy {
        first_retention: 1.0,
        second_retention: 1.0,
        investment: 0.0,
    };
    let paired = estimate_utility_paired(&cfg, &sim, &field, &naive).expect("paired");
    println!(
        "optimal:  E[U] = {:.6} +/- {:.6}",
        paired.first.expected_utility, paired.first.utility_stderr
    );
    println!(
        "naive:    E[U] = {:.6} +/- {:.6}",
        paired.second.expected_utility, paired.second.utility_stderr
    );
    println!(
        "utility difference (optimal - naive) = {:.6} +/- {:.6}",
        paired.utility_difference, paired.difference_stderr
    );

    println!("\n== paired comparison vs a small perturbation of the optimum ==");
    let perturbed = commonshock::strategy::PerturbedStrategy {
        base: &field,
        investment_scale: 1.1,
        first_shift: 0.0,
        second_shift: 0.0,
    };
    let close = estimate_utility_paired(&cfg, &sim, &field, &perturbed).expect("paired");
    println!(
        "utility difference (optimal - 1.1w) = {:.3e} +/- {:.3e}",
        close.utility_difference, close.difference_stderr
    );
    println!(
        "for nearby strategies the common random numbers cancel almost all the\n\
         market noise, so a difference of order 1e-4 is resolvable; against the\n\
         naive strategy the payoffs differ too much for that cancellation, but\n\
         the utility gain is still {:.1} standard errors wide.",
        paired.utility_difference / paired.difference_stderr
    );
}
