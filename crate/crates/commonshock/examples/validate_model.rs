//! Builds a model configuration in code and runs every validator on it.
//!
//! Three layers of checking guard a configuration:
//!
//! 1. [`ModelConfig::validate`]: structural invariants (positive rates,
//!    K(t, z) < 1 on the claim support, loading order θ < θ_R, ...). These
//!    are hard errors; nothing downstream accepts an invalid config.
//! 2. [`validate_premium`]: the ×2 premium comparison c(t, y) ≤ 2 λ(t, y)
//!    E[Z] and net-profit checks, sampled on a (t, y, u) grid per line.
//! 3. [`validate_admissibility`] and [`check_existence_preconditions`]:
//!    integrability of the exponential moments E[e^{2γB̄Z}], dominance of the
//!    thinning bound δ(t) over λ(t, y), and boundedness of the HJB reaction
//!    term on a doubled factor range.
//!
//! Layers 2 and 3 are soft: a report lists each check with its measured
//! margin so a caller can decide which failures matter for their use. The
//! example first validates a hand-built config, then shows how a broken one
//! (reinsurer loading below the insurer's) is rejected at layer 1.
//!
//! Run with:
//!
//! ```text
//! cargo run --example validate_model
//! ```

use commonshock::cli::presets;
use commonshock::model::{
    validate_admissibility, validate_premium, ClaimDistribution, FinancialMarket, InsuranceLine,
    IntensityModel, JumpFunction, LineId, ModelConfig, Preferences, PremiumPrinciple,
    SamplingGrid, TimeCoefficient,
};
use commonshock::pde::check_existence_preconditions;

fn constant(value: f64) -> TimeCoefficient {
    TimeCoefficient::constant(value)
}

fn build_config() -> ModelConfig {
    ModelConfig {
        preferences: Preferences {
            risk_aversion: 0.8,
            horizon: 2.0,
            initial_wealth: 1.5,
        },
        market: FinancialMarket {
            rate: constant(0.03),
            drift: constant(0.07),
            volatility: constant(0.2),
            jump: JumpFunction::Multiplicative {
                slope: constant(0.05),
            },
            initial_price: 1.0,
        },
        ordinary: InsuranceLine {
            intensity: IntensityModel::OnePlusLogistic {
                scale: constant(1.5),
            },
            intensity_bound: constant(4.0),
            factor_drift: constant(0.0),
            factor_volatility: constant(0.2),
            initial_factor: 0.0,
            claims: ClaimDistribution::Exponential { rate: 4.0 },
            premium: PremiumPrinciple::ExpectedValue {
                insurer_loading: 0.15,
                reinsurer_loading: 0.35,
            },
        },
        catastrophic: InsuranceLine {
            intensity: IntensityModel::Logistic {
                scale: constant(3.0),
            },
            intensity_bound: constant(5.0),
            factor_drift: constant(0.0),
            factor_volatility: constant(0.25),
            initial_factor: -0.1,
            claims: ClaimDistribution::TruncatedExponential {
                rate: 1.5,
                cap: 10.0,
            },
            premium: PremiumPrinciple::ExpectedValue {
                insurer_loading: 0.1,
                reinsurer_loading: 0.3,
            },
        },
    }
}

fn print_report(report: &commonshock::model::ValidationReport) {
    println!("{}: {}", report.subject, if report.passed() { "pass" } else { "FAIL" });
    for check in &report.checks {
        println!(
            "  [{}] {}: {}",
            if check.passed { "ok" } else { "!!" },
            check.name,
            check.detail
        );
    }
}

fn main() {
    let cfg = build_config();

    println!("== layer 1: structural validation ==");
    match cfg.validate() {
        Ok(()) => println!("hand-built config: pass"),
        Err(e) => println!("hand-built config: FAIL ({e})"),
    }

    println!("\n== layer 2: premium sanity per line ==");
    for id in [LineId::Ordinary, LineId::Catastrophic] {
        let grid = SamplingGrid::for_line(&cfg, id);
        print_report(&validate_premium(cfg.line(id), &grid));
    }

    println!("\n== layer 3: admissibility and existence ==");
    print_report(&validate_admissibility(&cfg));
    print_report(&check_existence_preconditions(&cfg));

    println!("\n== a structurally broken config is rejected outright ==");
    let mut broken = cfg.clone();
    broken.ordinary.premium = PremiumPrinciple::ExpectedValue {
        insurer_loading: 0.4,
        reinsurer_loading: 0.2,
    };
    match broken.validate() {
        Ok(()) => println!("unexpected: broken config accepted"),
        Err(e) => println!("rejected as expected: {e}"),
    }

    println!("\n== the fig1 preset fails admissibility by design ==");
    let fig1 = presets::fig1();
    let report = validate_admissibility(&fig1);
    println!(
        "fig1 admissibility: {} failing check(s)",
        report.failures().count()
    );
    for check in report.failures() {
        println!("  !! {}: {}", check.name, check.detail);
    }
}
