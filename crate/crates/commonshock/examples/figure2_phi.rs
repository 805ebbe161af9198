//! The scalar tilt equation behind the expected-value closed form.
//!
//! Under the expected-value principle the coupled second-line system
//! collapses to one scalar equation in the tilt φ = u + wk:
//!
//! ```text
//! h(t, φ) = E[Z·e^(γB(t) φ Z)] = (1 + θ_R)·E[Z]
//! ```
//!
//! h is strictly increasing in φ (its derivative is E[Z²e^(γBφZ)] > 0), so
//! the equation has exactly one root φ*. From φ* the controls follow in
//! closed form:
//!
//! ```text
//! w̄ = (μ − r)/(γBσ²) − λk(1 + θ_R)E[Z]/(γBσ²),      ū = φ* − w̄k.
//! ```
//!
//! This example tabulates h against the premium level, brackets the single
//! crossing, and verifies a bisection root agrees with the closed-form φ*.
//!
//! Run with:
//!
//! ```text
//! cargo run --example figure2_phi
//! ```

use commonshock::cli::presets;
use commonshock::model::LineId;
use commonshock::strategy::evp_closed_form;

fn main() {
    let cfg = presets::fig2();
    let (t, y) = (0.0, cfg.catastrophic.initial_factor);
    let line = cfg.line(LineId::Catastrophic);
    let theta_r = match line.premium {
        commonshock::model::PremiumPrinciple::ExpectedValue {
            reinsurer_loading, ..
        } => reinsurer_loading,
        _ => unreachable!("fig2 uses the expected-value principle"),
    };
    let gamma_b = cfg.gamma_b(t);
    let level = (1.0 + theta_r) * line.claims.mean();
    let h = |phi: f64| line.claims.tilted_moment(gamma_b * phi, 1).expect("moment");

    let evp = evp_closed_form(&cfg, t, y).expect("closed form");
    println!("premium level (1 + theta_R) E[Z] = {level:.9}");
    println!("closed-form tilt phi* = {:.9}", evp.phi_star);
    println!("h(phi*) - level       = {:.3e}", h(evp.phi_star) - level);

    println!("\n{:>8} {:>14} {:>10}", "phi", "h(0, phi)", "side");
    for i in 0..=12 {
        let phi = evp.phi_star * 2.0 * i as f64 / 12.0;
        let v = h(phi);
        println!(
            "{:>8.4} {:>14.9} {:>10}",
            phi,
            v,
            if v < level { "below" } else { "above" }
        );
    }

    let mut lo = 0.0f64;
    let mut hi = 2.0 * evp.phi_star;
    assert!(h(lo) < level && h(hi) > level, "crossing must be bracketed");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let bisected = 0.5 * (lo + hi);
    println!("\nbisection root        = {bisected:.12}");
    println!("|bisected - phi*|     = {:.3e}", (bisected - evp.phi_star).abs());
    println!(
        "controls: u2* = {:.6}, w* = {:.6} (region {:?})",
        evp.retention, evp.investment, evp.region
    );
}
