//! Optimal reinsurance for the ordinary line, where it decouples from the
//! market.
//!
//! The first-line retention minimizes
//!
//! ```text
//! Ψ₁(u) = γB(t)·(q⁽¹⁾(t, y, u) − c⁽¹⁾(t, y)) + λ⁽¹⁾(t, y)·(E[e^(γB(t) u Z)] − 1)
//! ```
//!
//! over u ∈ [0, 1]. The minimizer is the unconstrained root of the first
//! order condition projected onto [0, 1]: cheap reinsurance (small loading)
//! or strong risk aversion pushes u* to 0, expensive reinsurance pushes it
//! to 1, and under the expected-value principle with exponential claims the
//! interior root has the closed form
//!
//! ```text
//! ū = a·(1 − (1 + θ_R)^(−1/2)) / (γB(t))          (claims rate a)
//! ```
//!
//! The example sweeps the risk aversion γ through the three regimes and
//! cross-checks the interior roots against the closed form.
//!
//! Run with:
//!
//! ```text
//! cargo run --example first_line_retention
//! ```

use commonshock::cli::presets;
use commonshock::model::{ClaimDistribution, PremiumPrinciple};
use commonshock::strategy::optimal_first_retention;

fn main() {
    let base = presets::evp_comparison();
    let (t, y) = (0.0, base.ordinary.initial_factor);

    let (rate, theta_r) = match (&base.ordinary.claims, &base.ordinary.premium) {
        (
            ClaimDistribution::Exponential { rate },
            PremiumPrinciple::ExpectedValue {
                reinsurer_loading, ..
            },
        ) => (*rate, *reinsurer_loading),
        _ => unreachable!("the preset uses exponential claims under EVP"),
    };

    println!("ordinary line: exponential claims (rate {rate}), EVP loading {theta_r}");
    println!(
        "{:>6} {:>12} {:>14} {:>12} {:>12} {:>10}",
        "gamma", "u1*", "region", "closed form", "|gap|", "|FOC|"
    );
    for gamma in [0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 12.0] {
        let cfg = base.with_risk_aversion(gamma);
        let sol = optimal_first_retention(&cfg, t, y).expect("solver");
        let closed = rate * (1.0 - (1.0 + theta_r).powf(-0.5)) / cfg.gamma_b(t);
        let projected = closed.clamp(0.0, 1.0);
        println!(
            "{:>6.2} {:>12.8} {:>14} {:>12.8} {:>12.2e} {:>10.2e}",
            gamma,
            sol.retention,
            format!("{:?}", sol.region),
            projected,
            (sol.retention - projected).abs(),
            sol.residual
        );
    }

    println!();
    println!("small gamma: reinsurance is not worth its loading, u1* sticks at 1 (full retention);");
    println!("large gamma: the exponential penalty dominates and u1* slides toward 0.");
}
