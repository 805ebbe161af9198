//! Tabulating the optimal feedback strategy on a (t, y) grid.
//!
//! The pointwise solvers give the optimal controls at one state;
//! [`StrategyField`] tabulates them on rectangular grids and interpolates
//! bilinearly, which is what the simulator consumes as its feedback policy.
//! The surfaces are smooth except at the regime boundaries where a control
//! leaves the interior and sticks to 0 or 1.
//!
//! This example renders w*(0, y₂) and u⁽²⁾*(0, y₂) as text profiles, shows
//! the interpolated values between grid nodes, and prints a CSV-head excerpt
//! of the serialized field.
//!
//! Run with:
//!
//! ```text
//! cargo run --example strategy_surface
//! ```

use commonshock::cli::presets;
use commonshock::strategy::{optimal_second_line, Strategy, StrategyField};

fn bar(value: f64, lo: f64, hi: f64, width: usize) -> String {
    let frac = ((value - lo) / (hi - lo)).clamp(0.0, 1.0);
    let filled = (frac * width as f64).round() as usize;
    let mut s = String::new();
    for i in 0..width {
        s.push(if i < filled { '#' } else { '.' });
    }
    s
}

fn main() {
    let cfg = presets::evp_comparison();
    let (times, first, second) = StrategyField::default_grids(&cfg, 25, 41);
    let field = StrategyField::tabulate(&cfg, times, first, second).expect("tabulate");

    println!("w*(t = 0, y2) profile on the tabulation range:");
    let ys: Vec<f64> = (0..=16).map(|i| -2.0 + 4.0 * i as f64 / 16.0).collect();
    let ws: Vec<f64> = ys.iter().map(|&y| field.point(0.0, 0.1, y).investment).collect();
    let (lo, hi) = ws
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &w| {
            (a.min(w), b.max(w))
        });
    for (y, w) in ys.iter().zip(&ws) {
        println!("  y2 = {:>5.2}  w* = {:>10.6}  {}", y, w, bar(*w, lo, hi, 40));
    }

    println!("\nu2*(t = 0, y2) profile:");
    for &y in &ys {
        let u = field.point(0.0, 0.1, y).second_retention;
        println!("  y2 = {:>5.2}  u2* = {:>9.6}  {}", y, u, bar(u, 0.0, 1.0, 40));
    }

    println!("\ninterpolation error between nodes (bilinear vs pointwise solver):");
    for &(t, y) in &[(0.13, -0.37), (0.61, 0.42), (0.97, 1.13)] {
        let interp = field.point(t, 0.1, y);
        let exact = optimal_second_line(&cfg, t, y).expect("solver");
        println!(
            "  (t = {t:.2}, y2 = {y:.2}): interp w = {:>10.6}, exact w = {:>10.6}, gap = {:.2e}",
            interp.investment,
            exact.investment,
            (interp.investment - exact.investment).abs()
        );
    }

    println!("\nserialized field (CSV head):");
    for line in field.to_csv().lines().take(5) {
        println!("  {line}");
    }
}
