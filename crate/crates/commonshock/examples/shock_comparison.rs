//! What the common shock does to the optimal controls.
//!
//! Removing the market jump (K ≡ 0) decouples the problem: the investment
//! becomes the Merton ratio (μ − r)/(γBσ²) and the retention solves the same
//! scalar equation as the first line. Comparing the coupled optimum against
//! this counterfactual isolates the shock's effect. The theory predicts,
//! state by state:
//!
//! - w* < w_no-shock whenever λkE[Z] > 0 (the asset doubles as a claim
//!   hedge, so the insurer holds less of it, possibly short);
//! - under the expected-value principle, |u2* − u2_no-shock| ≤ k·|w̄| (the
//!   retention shifts only through the pinned tilt u + wk);
//! - scaling up the jump slope k or the intensity λ monotonically deepens
//!   the hedge.
//!
//! [`compare_shock_effect`] runs these checks over a batch of states and
//! reports any violations; the example then sweeps k and λ scales.
//!
//! Run with:
//!
//! ```text
//! cargo run --example shock_comparison
//! ```

use commonshock::cli::presets;
use commonshock::model::LineId;
use commonshock::strategy::{compare_shock_effect, optimal_second_line};

fn main() {
    let cfg = presets::evp_comparison();
    let states: Vec<(f64, f64)> = {
        let mut v = Vec::new();
        for i in 0..5 {
            let t = 0.9 * i as f64 / 4.0;
            for j in 0..5 {
                let y = -1.5 + 3.0 * j as f64 / 4.0;
                v.push((t, y));
            }
        }
        v
    };

    let report = compare_shock_effect(&cfg, &states).expect("comparison");
    println!(
        "checked {} states: {}",
        report.rows.len(),
        if report.passed() { "all predictions hold" } else { "VIOLATIONS FOUND" }
    );
    for v in &report.violations {
        println!("  !! {v}");
    }
    println!("\nsample rows (full CSV available via ComparisonReport::to_csv):");
    println!(
        "{:>5} {:>6} {:>10} {:>10} {:>11} {:>11} {:>10}",
        "t", "y", "u2*", "u2_no", "w*", "w_no", "w gap"
    );
    for row in report.rows.iter().step_by(6) {
        println!(
            "{:>5.2} {:>6.2} {:>10.6} {:>10.6} {:>11.6} {:>11.6} {:>10.6}",
            row.t,
            row.y,
            row.retention,
            row.retention_no_shock,
            row.investment,
            row.investment_no_shock,
            row.investment_no_shock - row.investment
        );
    }

    println!("\njump-slope sweep at (t, y) = (0, -0.2): w* falls as k grows");
    println!("{:>8} {:>12} {:>12}", "k scale", "u2*", "w*");
    for i in 0..=8 {
        let scale = 0.2 * i as f64;
        let scaled = cfg.with_jump_slope_scaled(scale);
        let sol = optimal_second_line(&scaled, 0.0, -0.2).expect("solver");
        println!("{:>8.2} {:>12.6} {:>12.6}", scale, sol.retention, sol.investment);
    }

    println!("\nintensity sweep at the same state: more frequent shocks, deeper hedge");
    println!("{:>8} {:>12} {:>12}", "l scale", "u2*", "w*");
    for i in 0..=6 {
        let scale = 0.5 + 0.25 * i as f64;
        let scaled = cfg.with_intensity_scaled(LineId::Catastrophic, scale);
        let sol = optimal_second_line(&scaled, 0.0, -0.2).expect("solver");
        println!("{:>8.2} {:>12.6} {:>12.6}", scale, sol.retention, sol.investment);
    }
}
