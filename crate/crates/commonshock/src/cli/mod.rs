//! Experiment runner behind the `commonshock` binary.
//!
//! The runner turns an [`ExperimentSpec`] into plot-ready artifacts:
//!
//! | subcommand | artifacts |
//! |------------|-----------|
//! | `solve`    | strategy field CSV/JSON, ψ PDE grids, value function, preset figure data |
//! | `simulate` | utility estimate JSON, sample path and event CSVs |
//! | `verify`   | paired-optimality and PDE-vs-Monte-Carlo consistency report |
//! | `compare`  | shock vs. no-shock comparison CSV/JSON |
//! | `sweep`    | one-parameter sweep CSV with a monotonicity summary |
//!
//! Every run also writes `model.json` (the resolved configuration),
//! `validation.json` (soft validation batteries), and `manifest.json`
//! (version, config hash, seed, wall time). CSV and JSON artifacts are
//! byte-deterministic for a fixed spec and seed; only the manifest varies.
//!
//! [`presets`] bundles the example parameter sets used throughout the test
//! suite and documentation.

pub mod presets;
pub mod run;

pub use run::{
    run, thread_count_from_env, ExperimentSpec, GridSpec, RunOutcome, StrategyChoice, Subcommand,
    SweepParameter, SweepSpec,
};
