//! Checking the solved strategy against simulation, end to end.
//!
//! Two independent pillars support the solver's claim of optimality:
//!
//! 1. **Value consistency.** The PDE value 1 − e^(−γxB)ψ₁ψ₂ at the initial
//!    state must agree with the Monte Carlo estimate of E[1 − e^(−γX_T)]
//!    under the tabulated optimal feedback strategy, within Monte Carlo
//!    error. Solver and simulator share only the model config, so agreement
//!    cross-validates both.
//! 2. **No profitable perturbation.** For any perturbed strategy α' the
//!    estimated utility difference E[U(α*)] − E[U(α')] must be
//!    nonnegative up to two paired standard errors. Common random numbers
//!    make these comparisons sharp at moderate path counts.
//!
//! The example runs both pillars on the evp-comparison preset with eight
//! perturbations: scaled investment, shifted retentions, and a joint shift.
//!
//! Run with:
//!
//! ```text
//! cargo run --release --example verify_optimality
//! ```

use commonshock::cli::presets;
use commonshock::pde::{value_function, SolverOptions};
use commonshock::sim::{estimate_utility, estimate_utility_paired, SimConfig};
use commonshock::strategy::{PerturbedStrategy, StrategyField};

fn main() {
    let cfg = presets::evp_comparison();
    let y1 = cfg.ordinary.initial_factor;
    let y2 = cfg.catastrophic.initial_factor;

    let (times, first, second) = StrategyField::default_grids(&cfg, 40, 81);
    let field = StrategyField::tabulate(&cfg, times, first, second).expect("tabulate");
    let sim = SimConfig {
        n_paths: 60_000,
        n_steps: 200,
        seed: 11,
        antithetic: false,
        crn_stream: 0,
    };

    println!("== pillar 1: PDE value vs simulated utility ==");
    let opts = SolverOptions {
        n_time: 160,
        n_space: 321,
        ..SolverOptions::default()
    };
    let vf = value_function(&cfg, &opts).expect("solve");
    let pde_value = vf
        .evaluate(0.0, cfg.preferences.initial_wealth, y1, y2)
        .expect("evaluate");
    let est = estimate_utility(&cfg, &sim, &field).expect("estimate");
    let gap = (pde_value - est.expected_utility).abs();
    println!("  pde value   = {:.6}", pde_value);
    println!("  simulation  = {:.6} +/- {:.6}", est.expected_utility, est.utility_stderr);
    println!(
        "  gap = {:.2e} ({:.2} stderr): {}",
        gap,
        gap / est.utility_stderr,
        if gap <= 3.0 * est.utility_stderr { "consistent" } else { "INCONSISTENT" }
    );

    println!("\n== pillar 2: no perturbation beats the candidate ==");
    let perturbations: Vec<(&str, PerturbedStrategy<StrategyField>)> = vec![
        ("w x 1.10", PerturbedStrategy { base: &field, investment_scale: 1.10, first_shift: 0.0, second_shift: 0.0 }),
        ("w x 0.90", PerturbedStrategy { base: &field, investment_scale: 0.90, first_shift: 0.0, second_shift: 0.0 }),
        ("u1 + 0.10", PerturbedStrategy { base: &field, investment_scale: 1.0, first_shift: 0.10, second_shift: 0.0 }),
        ("u1 - 0.10", PerturbedStrategy { base: &field, investment_scale: 1.0, first_shift: -0.10, second_shift: 0.0 }),
        ("u2 + 0.10", PerturbedStrategy { base: &field, investment_scale: 1.0, first_shift: 0.0, second_shift: 0.10 }),
        ("u2 - 0.10", PerturbedStrategy { base: &field, investment_scale: 1.0, first_shift: 0.0, second_shift: -0.10 }),
        ("both + 0.10", PerturbedStrategy { base: &field, investment_scale: 1.0, first_shift: 0.10, second_shift: 0.10 }),
        ("both - 0.10", PerturbedStrategy { base: &field, investment_scale: 1.0, first_shift: -0.10, second_shift: -0.10 }),
    ];

    let mut worst = f64::INFINITY;
    for (label, perturbed) in &perturbations {
        let paired = estimate_utility_paired(&cfg, &sim, &field, perturbed).expect("paired");
        let margin = paired.utility_difference + 2.0 * paired.difference_stderr;
        worst = worst.min(margin);
        println!(
            "  {:<12} gain = {:>10.3e} +/- {:>9.3e}  margin = {:>10.3e}  {}",
            label,
            paired.utility_difference,
            paired.difference_stderr,
            margin,
            if margin >= 0.0 { "ok" } else { "VIOLATION" }
        );
    }
    println!(
        "\nworst margin = {:.3e}: {}",
        worst,
        if worst >= 0.0 {
            "no perturbation profitably beats the strategy"
        } else {
            "a perturbation beat the strategy beyond noise"
        }
    );
}
