//! Investment first order condition as a function of w, for fixed retentions.
//!
//! For a fixed retention u the optimal investment solves H̃(w; u) = 0 with
//!
//! ```text
//! H̃(w; u) = γBσ²w − (μ − r) + λ(t, y)·E[K(t, Z)·e^(γB(uZ + wK(t, Z)))]
//! ```
//!
//! The first two terms are the Merton trade-off; the last is the marginal
//! cost of holding the asset through a catastrophic claim. Because the
//! common-shock term grows with u (a higher retained share makes the claim
//! states more expensive), the roots are ordered
//!
//! ```text
//! w̃(1) < w̃(0.5) < w̃(0),
//! ```
//!
//! and every root sits strictly below the Merton ratio. This example
//! evaluates the three curves on the configuration with unbounded intensity
//! λ(y) = 10·e^(−y) and exponential claims, prints the roots with their
//! residuals, and samples H̃ on a bracket around them.
//!
//! Run with:
//!
//! ```text
//! cargo run --example figure1_roots
//! ```

use commonshock::cli::presets;
use commonshock::strategy::{investment_foc, investment_root};

fn main() {
    let cfg = presets::fig1();
    let (t, y) = (0.0, cfg.catastrophic.initial_factor);
    let merton = {
        let excess = cfg.market.drift.eval(t) - cfg.market.rate.eval(t);
        let sigma = cfg.market.volatility.eval(t);
        excess / (cfg.gamma_b(t) * sigma * sigma)
    };
    println!(
        "state (t, y) = ({t}, {y}), lambda = {:.4}, merton ratio = {:.6}",
        cfg.catastrophic.intensity.eval(t, y),
        merton
    );

    let mut roots = Vec::new();
    for u in [0.0, 0.5, 1.0] {
        let w = investment_root(&cfg, t, y, u).expect("root");
        let res = investment_foc(&cfg, t, y, u, w).expect("foc");
        println!("u = {u:<4}  w-tilde = {w:>12.8}  |H-tilde(root)| = {:.2e}", res.abs());
        roots.push((u, w));
    }

    let ordered = roots[2].1 < roots[1].1 && roots[1].1 < roots[0].1;
    println!("ordering w(1) < w(0.5) < w(0): {ordered}");
    println!("all roots below Merton: {}", roots.iter().all(|&(_, w)| w < merton));

    println!("\nH-tilde(w; u) on a bracket around the roots:");
    let lo = roots[2].1 - 0.5;
    let hi = roots[0].1 + 0.5;
    println!("{:>10} {:>14} {:>14} {:>14}", "w", "u = 0", "u = 0.5", "u = 1");
    for i in 0..=10 {
        let w = lo + (hi - lo) * i as f64 / 10.0;
        let row: Vec<String> = [0.0, 0.5, 1.0]
            .iter()
            .map(|&u| match investment_foc(&cfg, t, y, u, w) {
                Ok(v) => format!("{v:>14.6}"),
                Err(_) => format!("{:>14}", "divergent"),
            })
            .collect();
        println!("{:>10.4} {}", w, row.join(" "));
    }
}
