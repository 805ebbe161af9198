//! Experiment specification and the artifact-producing runner.
//!
//! A run is described by an [`ExperimentSpec`] (model, grids, simulation
//! parameters, subcommand) and executed by [`run`], which writes plot-ready
//! CSV files, JSON reports, and a `manifest.json` into the output directory.
//!
//! Determinism contract: identical spec and seed produce byte-identical CSV
//! and JSON artifacts, independent of the worker thread count. The manifest
//! is the one exception (it records wall-clock time).
//!
//! Validation policy: the model's hard validators always run and abort on
//! failure. The soft batteries (premium principle, admissibility of constant
//! strategies, PDE existence preconditions) are written to `validation.json`
//! on every run; `simulate` and `verify` refuse to proceed when admissibility
//! or premium checks fail, because utility estimates are not trustworthy
//! there, while `solve`, `compare`, and `sweep` proceed with a warning (the
//! pointwise control problem is still well defined on the truncated domain).

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cli::presets;
use crate::error::{CliError, SimError};
use crate::model::validate::{validate_admissibility, validate_premium, SamplingGrid, ValidationReport};
use crate::model::{LineId, ModelConfig};
use crate::pde::{
    check_existence_preconditions, feynman_kac_oracle, solve_psi_pde, value_function,
    SolverOptions,
};
use crate::sim::{estimate_utility, estimate_utility_paired, simulate_terminal_wealth, SimConfig};
use crate::strategy::{
    compare_shock_effect, evp_closed_form, investment_foc, investment_root,
    optimal_first_retention, optimal_second_line, ConstantStrategy, PerturbedStrategy, Strategy,
    StrategyField,
};
use crate::util::linspace;

/// Time × space resolution, parsed from the `--grid MxN` flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_time: usize,
    pub n_space: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n_time: 60,
            n_space: 161,
        }
    }
}

impl GridSpec {
    /// Parse `"MxN"` (e.g. `"200x401"`).
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Validation(format!("grid must look like 200x401, got '{s}'"));
        let (m, n) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let n_time: usize = m.trim().parse().map_err(|_| bad())?;
        let n_space: usize = n.trim().parse().map_err(|_| bad())?;
        if n_time < 2 || n_space < 5 {
            return Err(CliError::Validation(format!(
                "grid {n_time}x{n_space} is too coarse (need at least 2x5)"
            )));
        }
        Ok(GridSpec { n_time, n_space })
    }
}

/// What the run computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    /// Optimal strategy field, ψ PDEs, value function, preset figure data.
    Solve,
    /// Monte Carlo utility estimate under a named strategy.
    Simulate,
    /// Paired optimality and PDE-vs-simulation consistency checks.
    Verify,
    /// Shock vs. no-shock comparison report.
    Compare,
    /// One-parameter sweep of the optimal second-line controls.
    Sweep,
}

impl Subcommand {
    pub fn label(self) -> &'static str {
        match self {
            Subcommand::Solve => "solve",
            Subcommand::Simulate => "simulate",
            Subcommand::Verify => "verify",
            Subcommand::Compare => "compare",
            Subcommand::Sweep => "sweep",
        }
    }
}

/// Strategy simulated by the `simulate` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StrategyChoice {
    /// Optimal controls tabulated on the experiment grid.
    Optimal,
    /// Controls optimal for the K ≡ 0 counterfactual, applied in the true
    /// (shocked) market.
    NoShock,
    /// A fixed (u⁽¹⁾, u⁽²⁾, w).
    Constant {
        first_retention: f64,
        second_retention: f64,
        investment: f64,
    },
}

impl Default for StrategyChoice {
    fn default() -> Self {
        StrategyChoice::Optimal
    }
}

/// Model dimension swept by the `sweep` subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParameter {
    /// Multiplier on the common-shock slope k(t).
    JumpSlope,
    /// Multiplier on the catastrophic intensity (scale and bound together).
    IntensityScale,
    /// Absolute reinsurer loading θ_R on the catastrophic line.
    ReinsurerLoading,
    /// Absolute risk aversion γ.
    RiskAversion,
}

impl SweepParameter {
    pub fn label(self) -> &'static str {
        match self {
            SweepParameter::JumpSlope => "jump-slope",
            SweepParameter::IntensityScale => "intensity-scale",
            SweepParameter::ReinsurerLoading => "reinsurer-loading",
            SweepParameter::RiskAversion => "risk-aversion",
        }
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "jump-slope" | "k" => Ok(SweepParameter::JumpSlope),
            "intensity-scale" | "lambda0" => Ok(SweepParameter::IntensityScale),
            "reinsurer-loading" | "theta-r" => Ok(SweepParameter::ReinsurerLoading),
            "risk-aversion" | "gamma" => Ok(SweepParameter::RiskAversion),
            other => Err(CliError::Validation(format!(
                "unknown sweep parameter '{other}' (expected jump-slope, intensity-scale, \
                 reinsurer-loading, or risk-aversion)"
            ))),
        }
    }

    fn apply(self, cfg: &ModelConfig, value: f64) -> ModelConfig {
        match self {
            SweepParameter::JumpSlope => cfg.with_jump_slope_scaled(value),
            SweepParameter::IntensityScale => {
                cfg.with_intensity_scaled(LineId::Catastrophic, value)
            }
            SweepParameter::ReinsurerLoading => {
                cfg.with_reinsurer_loading(LineId::Catastrophic, value)
            }
            SweepParameter::RiskAversion => cfg.with_risk_aversion(value),
        }
    }
}

/// Sweep description: the parameter and the values it takes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        // The slope multiplier stops at 1.6: scaling further can push
        // K(t, z) past 1 on bounded-support claim laws, which the model
        // validator rejects.
        SweepSpec {
            parameter: SweepParameter::JumpSlope,
            values: (0..=8).map(|i| 0.2 * i as f64).collect(),
        }
    }
}

/// A complete, reproducible description of one experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub command: Subcommand,
    /// Preset tag recorded in the manifest (`custom` for loaded configs).
    pub preset: String,
    pub model: ModelConfig,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub strategy: StrategyChoice,
    #[serde(default)]
    pub sweep: SweepSpec,
    /// Number of full path records exported by `simulate`.
    #[serde(default = "default_keep_paths")]
    pub keep_paths: usize,
}

fn default_keep_paths() -> usize {
    8
}

impl ExperimentSpec {
    /// Spec for a bundled preset with default grids and simulation settings.
    pub fn for_preset(command: Subcommand, tag: &str) -> Result<Self, CliError> {
        let model = presets::by_name(tag).ok_or_else(|| {
            CliError::Validation(format!(
                "unknown preset '{tag}' (available: {})",
                presets::names().join(", ")
            ))
        })?;
        Ok(ExperimentSpec {
            command,
            preset: tag.to_string(),
            model,
            grid: GridSpec::default(),
            sim: SimConfig::default(),
            strategy: StrategyChoice::default(),
            sweep: SweepSpec::default(),
            keep_paths: default_keep_paths(),
        })
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self, CliError> {
        Ok(serde_json::from_str(s)?)
    }
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// Files written, relative to the output directory.
    pub files: Vec<String>,
    /// Human-readable result lines (printed by the binary).
    pub summary: Vec<String>,
    /// False when `verify` or `compare` recorded property violations.
    pub checks_passed: bool,
}

/// Map simulation errors onto exit-code classes: configuration problems are
/// validation failures, everything else is numerical.
fn sim_err(e: SimError) -> CliError {
    match e {
        SimError::InvalidConfig(_) | SimError::Model(_) => CliError::Validation(e.to_string()),
        other => CliError::Numerical(other.to_string()),
    }
}

struct ArtifactWriter {
    dir: PathBuf,
    files: Vec<String>,
}

impl ArtifactWriter {
    fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(ArtifactWriter {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        fs::write(self.dir.join(name), contents)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

fn config_sha256(cfg: &ModelConfig) -> Result<String, CliError> {
    let canonical = cfg.to_json_string()?;
    let digest = Sha256::digest(canonical.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Run one experiment, writing all artifacts into `out_dir`.
///
/// Errors map to process exit codes through [`CliError::exit_code`]:
/// validation failures (2), numerical failures (3), and property violations
/// found by `verify` (4). The manifest and all artifacts produced up to the
/// point of a property violation are still written.
pub fn run(spec: &ExperimentSpec, out_dir: &Path) -> Result<RunOutcome, CliError> {
    let started = Instant::now();
    let cfg = &spec.model;
    cfg.validate()?;
    spec.sim.validate().map_err(sim_err)?;

    let mut writer = ArtifactWriter::new(out_dir)?;
    writer.write("model.json", &cfg.to_json_string()?)?;

    // Soft validation batteries: always recorded, fatal only where estimates
    // would be untrustworthy.
    let reports = vec![
        validate_premium(
            &cfg.ordinary,
            &SamplingGrid::for_line(cfg, LineId::Ordinary),
        ),
        validate_premium(
            &cfg.catastrophic,
            &SamplingGrid::for_line(cfg, LineId::Catastrophic),
        ),
        validate_admissibility(cfg),
        check_existence_preconditions(cfg),
    ];
    writer.write(
        "validation.json",
        &serde_json::to_string_pretty(&reports)?,
    )?;
    let soft_failures: Vec<String> = reports
        .iter()
        .flat_map(|r| {
            r.failures()
                .map(move |c| format!("[{}] {}: {}", r.subject, c.name, c.detail))
        })
        .collect();
    let mut summary = Vec::new();
    if !soft_failures.is_empty() {
        if matches!(spec.command, Subcommand::Simulate | Subcommand::Verify) {
            return Err(CliError::Validation(format!(
                "{} refuses to run: {}",
                spec.command.label(),
                soft_failures.join("; ")
            )));
        }
        for f in &soft_failures {
            summary.push(format!("warning: {f}"));
        }
    }

    let (mut lines, checks_passed, property_report) = match spec.command {
        Subcommand::Solve => (run_solve(spec, cfg, &mut writer)?, true, None),
        Subcommand::Simulate => (run_simulate(spec, cfg, &mut writer)?, true, None),
        Subcommand::Verify => {
            let (lines, passed, report) = run_verify(spec, cfg, &mut writer)?;
            (lines, passed, report)
        }
        Subcommand::Compare => {
            let (lines, passed) = run_compare(spec, cfg, &mut writer)?;
            (lines, passed, None)
        }
        Subcommand::Sweep => {
            let (lines, passed) = run_sweep(spec, cfg, &mut writer)?;
            (lines, passed, None)
        }
    };
    summary.append(&mut lines);

    let wall_ms = started.elapsed().as_millis() as u64;
    let created_unix_ms = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0);
    let manifest = serde_json::json!({
        "tool": "commonshock",
        "version": env!("CARGO_PKG_VERSION"),
        "command": spec.command.label(),
        "preset": spec.preset,
        "seed": spec.sim.seed,
        "n_paths": spec.sim.n_paths,
        "n_steps": spec.sim.n_steps,
        "grid": { "n_time": spec.grid.n_time, "n_space": spec.grid.n_space },
        "config_sha256": config_sha256(cfg)?,
        "checks_passed": checks_passed,
        "created_unix_ms": created_unix_ms,
        "wall_ms": wall_ms,
        "files": writer.files,
    });
    fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    let mut files = manifest["files"]
        .as_array()
        .expect("files array")
        .iter()
        .map(|v| v.as_str().expect("file name").to_string())
        .collect::<Vec<_>>();
    files.push("manifest.json".to_string());

    if let Some(body) = property_report {
        return Err(CliError::PropertyViolation(body));
    }
    Ok(RunOutcome {
        files,
        summary,
        checks_passed,
    })
}

fn solver_options(grid: GridSpec) -> SolverOptions {
    SolverOptions {
        n_time: grid.n_time.max(8),
        n_space: grid.n_space.max(21),
        ..SolverOptions::default()
    }
}

fn run_solve(
    spec: &ExperimentSpec,
    cfg: &ModelConfig,
    writer: &mut ArtifactWriter,
) -> Result<Vec<String>, CliError> {
    let mut summary = Vec::new();
    let (times, first, second) =
        StrategyField::default_grids(cfg, spec.grid.n_time.max(2), spec.grid.n_space.max(5));
    let field = StrategyField::tabulate(cfg, times.clone(), first.clone(), second.clone())?;
    writer.write("strategy_field.csv", &field.to_csv())?;
    writer.write("strategy_field.json", &field.to_json())?;
    let no_shock = StrategyField::tabulate_no_shock(cfg, times, first, second)?;
    writer.write("strategy_field_no_shock.csv", &no_shock.to_csv())?;

    let opts = solver_options(spec.grid);
    let value = value_function(cfg, &opts)?;
    writer.write("psi_ordinary.csv", &value.psi(LineId::Ordinary).to_csv())?;
    writer.write(
        "psi_catastrophic.csv",
        &value.psi(LineId::Catastrophic).to_csv(),
    )?;
    writer.write("value_function.json", &value.to_json()?)?;

    let (y1, y2) = (
        cfg.ordinary.initial_factor,
        cfg.catastrophic.initial_factor,
    );
    let first_sol = optimal_first_retention(cfg, 0.0, y1)?;
    let second_sol = optimal_second_line(cfg, 0.0, y2)?;
    let v0 = value.initial_value()?;
    let ce0 = value.certainty_equivalent(0.0, cfg.preferences.initial_wealth, y1, y2)?;
    let evp = if cfg.catastrophic.premium.is_expected_value() {
        Some(evp_closed_form(cfg, 0.0, y2)?)
    } else {
        None
    };
    let solve_summary = serde_json::json!({
        "state": { "t": 0.0, "y1": y1, "y2": y2, "wealth": cfg.preferences.initial_wealth },
        "first_line": {
            "retention": first_sol.retention,
            "region": first_sol.region.label(),
            "residual": first_sol.residual,
        },
        "second_line": {
            "retention": second_sol.retention,
            "investment": second_sol.investment,
            "region": second_sol.region.label(),
            "sign": second_sol.sign.label(),
        },
        "evp_closed_form": evp.as_ref().map(|e| serde_json::json!({
            "phi_star": e.phi_star,
            "unconstrained_retention": e.unconstrained_retention,
            "unconstrained_investment": e.unconstrained_investment,
        })),
        "value": v0,
        "certainty_equivalent": ce0,
        "psi_range": {
            "ordinary": [value.psi(LineId::Ordinary).min_value(), value.psi(LineId::Ordinary).max_value()],
            "catastrophic": [value.psi(LineId::Catastrophic).min_value(), value.psi(LineId::Catastrophic).max_value()],
        },
    });
    writer.write(
        "solve_summary.json",
        &serde_json::to_string_pretty(&solve_summary)?,
    )?;
    summary.push(format!(
        "optimal controls at t=0: u1 = {:.6}, u2 = {:.6}, w = {:.6} ({})",
        first_sol.retention,
        second_sol.retention,
        second_sol.investment,
        second_sol.sign.label()
    ));
    summary.push(format!(
        "value V(0, x0, y0) = {v0:.9}, certainty equivalent = {ce0:.9}"
    ));

    match spec.preset.as_str() {
        "fig1" => summary.extend(write_figure1(cfg, writer)?),
        "fig2" => summary.extend(write_figure2(cfg, writer)?),
        _ => {}
    }
    Ok(summary)
}

/// Figure 1 data: the investment first-order condition w ↦ H̃(0, y₀², u, w)
/// for u ∈ {0, ½, 1} with the three roots annotated.
fn write_figure1(
    cfg: &ModelConfig,
    writer: &mut ArtifactWriter,
) -> Result<Vec<String>, CliError> {
    let y = cfg.catastrophic.initial_factor;
    let retentions = [0.0, 0.5, 1.0];
    let mut roots = Vec::new();
    for &u in &retentions {
        let w = investment_root(cfg, 0.0, y, u)?;
        let residual = investment_foc(cfg, 0.0, y, u, w)?;
        roots.push((u, w, residual));
    }
    let lo = roots.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let hi = roots.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let margin = (hi - lo).max(1.0);
    let grid = linspace(lo - margin, hi + margin, 401);

    let mut csv = String::from("w,htilde_u0,htilde_u05,htilde_u1\n");
    for &w in &grid {
        let vals: Vec<Option<f64>> = retentions
            .iter()
            .map(|&u| investment_foc(cfg, 0.0, y, u, w).ok())
            .collect();
        if vals.iter().any(|v| v.is_none()) {
            continue; // tilted moment diverges at this w: outside the domain
        }
        csv.push_str(&format!(
            "{w},{},{},{}\n",
            vals[0].unwrap(),
            vals[1].unwrap(),
            vals[2].unwrap()
        ));
    }
    writer.write("figure1_curves.csv", &csv)?;

    let ordered = roots[2].1 < roots[1].1 && roots[1].1 < roots[0].1;
    let json = serde_json::json!({
        "state": { "t": 0.0, "y2": y, "lambda": cfg.catastrophic.intensity_at(0.0, y) },
        "roots": roots.iter().map(|(u, w, res)| serde_json::json!({
            "retention": u, "root": w, "foc_residual": res,
        })).collect::<Vec<_>>(),
        "ordering_w1_lt_w05_lt_w0": ordered,
    });
    writer.write("figure1_roots.json", &serde_json::to_string_pretty(&json)?)?;
    Ok(vec![format!(
        "figure 1 roots: w(u=1) = {:.6} < w(u=1/2) = {:.6} < w(u=0) = {:.6} ({})",
        roots[2].1,
        roots[1].1,
        roots[0].1,
        if ordered { "ordered" } else { "ORDER VIOLATION" }
    )])
}

/// Figure 2 data: φ ↦ h(0, φ) = E[Z e^(γB φ Z)] with the reinsurance level
/// (1 + θ_R)E[Z] and the crossing φ* annotated.
fn write_figure2(
    cfg: &ModelConfig,
    writer: &mut ArtifactWriter,
) -> Result<Vec<String>, CliError> {
    let y = cfg.catastrophic.initial_factor;
    let evp = evp_closed_form(cfg, 0.0, y)?;
    let claims = &cfg.catastrophic.claims;
    let (_, theta_r) = cfg
        .catastrophic
        .premium
        .loadings()
        .ok_or_else(|| CliError::Validation("figure 2 needs a built-in premium principle".into()))?;
    let level = (1.0 + theta_r) * claims.mean();
    let gamma_b = cfg.gamma_b(0.0);

    let phi_max = (2.2 * evp.phi_star).max(1e-3);
    let mut csv = String::from("phi,h,level\n");
    let mut prev_h = f64::NEG_INFINITY;
    let mut increasing = true;
    let mut crossings = 0usize;
    let mut prev_sign = -1.0_f64; // h(0) − level = −θ_R E[Z] < 0
    for &phi in linspace(0.0, phi_max, 301).iter() {
        let Ok(h) = claims.tilted_moment(gamma_b * phi, 1) else {
            break; // divergent tilt: stop the grid there
        };
        if h < prev_h {
            increasing = false;
        }
        let sign = (h - level).signum();
        if sign != prev_sign && phi > 0.0 {
            crossings += 1;
            prev_sign = sign;
        }
        prev_h = h;
        csv.push_str(&format!("{phi},{h},{level}\n"));
    }
    writer.write("figure2_h.csv", &csv)?;

    let h_at_star = claims.tilted_moment(gamma_b * evp.phi_star, 1)?;
    let json = serde_json::json!({
        "phi_star": evp.phi_star,
        "level": level,
        "h_at_phi_star": h_at_star,
        "crossing_residual": h_at_star - level,
        "strictly_increasing": increasing,
        "crossings": crossings,
        "unconstrained_retention": evp.unconstrained_retention,
        "unconstrained_investment": evp.unconstrained_investment,
    });
    writer.write("figure2_phi.json", &serde_json::to_string_pretty(&json)?)?;
    Ok(vec![format!(
        "figure 2: phi* = {:.9}, h(phi*) - (1+theta_R)E[Z] = {:.3e}, {} crossing(s)",
        evp.phi_star,
        h_at_star - level,
        crossings
    )])
}

/// Materialize the strategy a run simulates.
fn build_strategy(
    spec: &ExperimentSpec,
    cfg: &ModelConfig,
) -> Result<Box<dyn Strategy>, CliError> {
    let nt = spec.grid.n_time.clamp(2, 200);
    let ny = spec.grid.n_space.clamp(5, 401);
    Ok(match &spec.strategy {
        StrategyChoice::Optimal => {
            let (times, first, second) = StrategyField::default_grids(cfg, nt, ny);
            Box::new(StrategyField::tabulate(cfg, times, first, second)?)
        }
        StrategyChoice::NoShock => {
            let (times, first, second) = StrategyField::default_grids(cfg, nt, ny);
            Box::new(StrategyField::tabulate_no_shock(cfg, times, first, second)?)
        }
        StrategyChoice::Constant {
            first_retention,
            second_retention,
            investment,
        } => Box::new(ConstantStrategy {
            first_retention: *first_retention,
            second_retention: *second_retention,
            investment: *investment,
        }),
    })
}

fn run_simulate(
    spec: &ExperimentSpec,
    cfg: &ModelConfig,
    writer: &mut ArtifactWriter,
) -> Result<Vec<String>, CliError> {
    let strategy = build_strategy(spec, cfg)?;
    let estimate = estimate_utility(cfg, &spec.sim, strategy.as_ref()).map_err(sim_err)?;
    writer.write("utility.json", &serde_json::to_string_pretty(&estimate)?)?;

    if spec.keep_paths > 0 {
        let sample_sim = SimConfig {
            n_paths: spec
                .keep_paths
                .max(2)
                .next_multiple_of(if spec.sim.antithetic { 2 } else { 1 }),
            ..spec.sim.clone()
        };
        let out = simulate_terminal_wealth(cfg, &sample_sim, strategy.as_ref(), spec.keep_paths)
            .map_err(sim_err)?;
        let mut paths_csv =
            String::from("path,t,factor_ordinary,factor_catastrophic,price,wealth\n");
        let mut events_csv = String::from("path,line,t,size,factor\n");
        for rec in &out.records {
            for (k, &t) in rec.market.times.iter().enumerate() {
                paths_csv.push_str(&format!(
                    "{},{t},{},{},{},{}\n",
                    rec.path_index,
                    rec.market.factor_ordinary[k],
                    rec.market.factor_catastrophic[k],
                    rec.market.prices[k],
                    rec.wealth[k]
                ));
            }
            for e in &rec.market.events {
                events_csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    rec.path_index,
                    e.line.label(),
                    e.t,
                    e.size,
                    e.factor
                ));
            }
        }
        writer.write("paths.csv", &paths_csv)?;
        writer.write("events.csv", &events_csv)?;
    }

    Ok(vec![
        format!(
            "strategy '{}': E[U] = {:.6} +/- {:.6} over {} paths ({} excluded)",
            estimate.strategy,
            estimate.expected_utility,
            estimate.utility_stderr,
            estimate.n_paths,
            estimate.n_excluded
        ),
        format!(
            "exponential moment E[e^(-gamma X_T)] = {:.6} +/- {:.6}, mean X_T = {:.6}",
            estimate.exponential_moment, estimate.exponential_stderr, estimate.mean_terminal_wealth
        ),
    ])
}

fn run_verify(
    spec: &ExperimentSpec,
    cfg: &ModelConfig,
    writer: &mut ArtifactWriter,
) -> Result<(Vec<String>, bool, Option<String>), CliError> {
    use crate::model::validate::CheckResult;

    let mut report = ValidationReport::new("verification");
    let mut summary = Vec::new();
    let opts = solver_options(spec.grid);

    // 1. ψ from the PDE vs. the Feynman-Kac oracle at the initial state.
    let fk_paths = spec.sim.n_paths.clamp(1_000, 50_000);
    for line in [LineId::Ordinary, LineId::Catastrophic] {
        let psi = solve_psi_pde(cfg, line, &opts)?;
        let y0 = cfg.line(line).initial_factor;
        let pde_value = psi.eval(0.0, y0)?;
        let fk = feynman_kac_oracle(cfg, line, 0.0, y0, fk_paths, spec.sim.seed ^ 0xFEED)?;
        let tol = 3.0 * fk.stderr + 1e-3 * pde_value.abs();
        let gap = (pde_value - fk.mean).abs();
        let name = format!("pde-vs-feynman-kac-{}", line.label());
        let detail = format!(
            "psi(0, y0) PDE {pde_value:.6} vs MC {:.6} +/- {:.6} (gap {gap:.2e}, tol {tol:.2e})",
            fk.mean, fk.stderr
        );
        report.push(if gap <= tol {
            CheckResult::pass(name.as_str(), detail)
        } else {
            CheckResult::fail(name.as_str(), detail)
        });
    }

    // 2. Value function vs. simulated exponential moment under the optimal
    //    tabulated strategy (the cross-module consistency check).
    let value = value_function(cfg, &opts)?;
    let strategy = build_strategy(
        &ExperimentSpec {
            strategy: StrategyChoice::Optimal,
            ..spec.clone()
        },
        cfg,
    )?;
    let estimate = estimate_utility(cfg, &spec.sim, strategy.as_ref()).map_err(sim_err)?;
    let pde_moment = value.exponential_moment(
        0.0,
        cfg.preferences.initial_wealth,
        cfg.ordinary.initial_factor,
        cfg.catastrophic.initial_factor,
    )?;
    {
        let tol = 3.0 * estimate.exponential_stderr + 2e-3 * pde_moment;
        let gap = (pde_moment - estimate.exponential_moment).abs();
        let detail = format!(
            "E[e^(-gamma X_T)] PDE {pde_moment:.6} vs MC {:.6} +/- {:.6} (gap {gap:.2e}, tol {tol:.2e}, {} excluded paths)",
            estimate.exponential_moment, estimate.exponential_stderr, estimate.n_excluded
        );
        report.push(if gap <= tol && estimate.n_excluded == 0 {
            CheckResult::pass("value-vs-simulation", detail)
        } else {
            CheckResult::fail("value-vs-simulation", detail)
        });
    }

    // 3. Paired optimality: the tabulated optimal strategy must beat the 8
    //    standard perturbations within two paired standard errors.
    let perturbations: [(f64, f64, f64, &str); 8] = [
        (1.1, 0.0, 0.0, "w x 1.1"),
        (0.9, 0.0, 0.0, "w x 0.9"),
        (1.0, 0.1, 0.0, "u1 + 0.1"),
        (1.0, -0.1, 0.0, "u1 - 0.1"),
        (1.0, 0.0, 0.1, "u2 + 0.1"),
        (1.0, 0.0, -0.1, "u2 - 0.1"),
        (1.0, 0.1, 0.1, "u1 + 0.1, u2 + 0.1"),
        (1.0, -0.1, -0.1, "u1 - 0.1, u2 - 0.1"),
    ];
    for (scale, du1, du2, label) in perturbations {
        let perturbed = PerturbedStrategy {
            base: strategy.as_ref(),
            investment_scale: scale,
            first_shift: du1,
            second_shift: du2,
        };
        let paired = estimate_utility_paired(cfg, &spec.sim, strategy.as_ref(), &perturbed)
            .map_err(sim_err)?;
        let margin = paired.utility_difference + 2.0 * paired.difference_stderr;
        let name = format!("optimality-vs-{}", label.replace([' ', ','], "").replace('.', "p"));
        let detail = format!(
            "E[U*] - E[U({label})] = {:.3e} +/- {:.3e}",
            paired.utility_difference, paired.difference_stderr
        );
        report.push(if margin >= 0.0 {
            CheckResult::pass(name.as_str(), detail)
        } else {
            CheckResult::fail(name.as_str(), detail)
        });
    }

    writer.write("verify.json", &report.to_json())?;
    for check in &report.checks {
        summary.push(format!(
            "{} {}: {}",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.detail
        ));
    }
    let passed = report.passed();
    summary.push(if passed {
        "verification: all checks passed".to_string()
    } else {
        "verification: FAILED".to_string()
    });
    let property_report = if passed {
        None
    } else {
        Some(
            report
                .failures()
                .map(|c| format!("{}: {}", c.name, c.detail))
                .collect::<Vec<_>>()
                .join("\n"),
        )
    };
    Ok((summary, passed, property_report))
}

fn run_compare(
    spec: &ExperimentSpec,
    cfg: &ModelConfig,
    writer: &mut ArtifactWriter,
) -> Result<(Vec<String>, bool), CliError> {
    let horizon = cfg.horizon();
    let ny = spec.grid.n_space.clamp(5, 21);
    let (_, _, second) = StrategyField::default_grids(cfg, 2, ny);
    let mut states = Vec::new();
    for &t in &[0.0, 0.5 * horizon, 0.9 * horizon] {
        for &y in &second {
            states.push((t, y));
        }
    }
    let comparison = compare_shock_effect(cfg, &states)?;
    writer.write("comparison.csv", &comparison.to_csv())?;
    writer.write("comparison.json", &comparison.to_json())?;

    let passed = comparison.passed();
    let mut summary = vec![format!(
        "compared {} states ({} degenerate): {}",
        comparison.rows.len(),
        comparison.degenerate_states,
        if passed {
            "all shock predictions hold".to_string()
        } else {
            format!("{} violation(s)", comparison.violations.len())
        }
    )];
    for v in comparison.violations.iter().take(5) {
        summary.push(format!("violation: {v}"));
    }
    Ok((summary, passed))
}

fn run_sweep(
    spec: &ExperimentSpec,
    cfg: &ModelConfig,
    writer: &mut ArtifactWriter,
) -> Result<(Vec<String>, bool), CliError> {
    let sweep = &spec.sweep;
    if sweep.values.len() < 2 {
        return Err(CliError::Validation(
            "a sweep needs at least two parameter values".into(),
        ));
    }
    let (y1, y2) = (
        cfg.ordinary.initial_factor,
        cfg.catastrophic.initial_factor,
    );
    let mut csv = String::from(
        "parameter,value,first_retention,second_retention,investment,sign,region\n",
    );
    let mut investments = Vec::new();
    let mut retentions = Vec::new();
    for &v in &sweep.values {
        let swept = sweep.parameter.apply(cfg, v);
        swept.validate()?;
        let first = optimal_first_retention(&swept, 0.0, y1)?;
        let second = optimal_second_line(&swept, 0.0, y2)?;
        csv.push_str(&format!(
            "{},{v},{},{},{},{},{}\n",
            sweep.parameter.label(),
            first.retention,
            second.retention,
            second.investment,
            second.sign.label(),
            second.region.label()
        ));
        investments.push(second.investment);
        retentions.push(second.retention);
    }
    writer.write("sweep.csv", &csv)?;

    // Monotonicity prediction: w* decreases pointwise as the common shock
    // grows (jump slope or catastrophic intensity scaled up).
    let decreasing = investments.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let monotone_expected = matches!(
        sweep.parameter,
        SweepParameter::JumpSlope | SweepParameter::IntensityScale
    );
    let passed = !monotone_expected || decreasing;
    let json = serde_json::json!({
        "parameter": sweep.parameter.label(),
        "values": sweep.values,
        "investment": investments,
        "second_retention": retentions,
        "investment_monotone_decreasing": decreasing,
        "monotonicity_expected": monotone_expected,
        "passed": passed,
    });
    writer.write("sweep_summary.json", &serde_json::to_string_pretty(&json)?)?;
    let summary = vec![format!(
        "sweep over {} ({} values): w* from {:.6} to {:.6}{}",
        sweep.parameter.label(),
        sweep.values.len(),
        investments.first().copied().unwrap_or(f64::NAN),
        investments.last().copied().unwrap_or(f64::NAN),
        if monotone_expected {
            if decreasing {
                ", monotone decreasing as predicted"
            } else {
                ", MONOTONICITY VIOLATION"
            }
        } else {
            ""
        }
    )];
    Ok((summary, passed))
}

/// Parse a thread-count override (the `COMMONSHOCK_THREADS` variable).
/// Zero, empty, or unparsable values mean "use the rayon default".
pub(crate) fn parse_thread_count(raw: Option<&str>) -> Option<usize> {
    let s = raw?.trim();
    match s.parse::<usize>() {
        Ok(0) | Err(_) => None,
        Ok(n) => Some(n),
    }
}

/// Thread count requested through the `COMMONSHOCK_THREADS` environment
/// variable, if any.
pub fn thread_count_from_env() -> Option<usize> {
    parse_thread_count(std::env::var("COMMONSHOCK_THREADS").ok().as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn small_spec(command: Subcommand, preset: &str) -> ExperimentSpec {
        let mut spec = ExperimentSpec::for_preset(command, preset).expect("preset");
        spec.grid = GridSpec {
            n_time: 8,
            n_space: 33,
        };
        spec.sim = SimConfig {
            n_paths: 400,
            n_steps: 16,
            seed: 7,
            antithetic: false,
            crn_stream: 0,
        };
        spec.keep_paths = 3;
        spec
    }

    #[test]
    fn grid_spec_parsing() {
        assert_eq!(
            GridSpec::parse("200x401").unwrap(),
            GridSpec {
                n_time: 200,
                n_space: 401
            }
        );
        assert_eq!(
            GridSpec::parse("12X25").unwrap(),
            GridSpec {
                n_time: 12,
                n_space: 25
            }
        );
        assert!(GridSpec::parse("1x4").is_err());
        assert!(GridSpec::parse("foo").is_err());
        assert!(GridSpec::parse("3x").is_err());
    }

    #[test]
    fn experiment_spec_round_trips() {
        let spec = small_spec(Subcommand::Sweep, "evp-comparison");
        let json = spec.to_json().expect("json");
        let back = ExperimentSpec::from_json(&json).expect("parse");
        assert_eq!(back.command, Subcommand::Sweep);
        assert_eq!(back.grid, spec.grid);
        assert_eq!(back.sim, spec.sim);
        assert_eq!(back.sweep, spec.sweep);
    }

    #[test]
    fn unknown_preset_is_a_validation_error() {
        let err = ExperimentSpec::for_preset(Subcommand::Solve, "fig9").unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn solve_writes_deterministic_artifacts() {
        let spec = small_spec(Subcommand::Solve, "evp-comparison");
        let (d1, d2) = (tempdir().unwrap(), tempdir().unwrap());
        let out1 = run(&spec, d1.path()).expect("first run");
        run(&spec, d2.path()).expect("second run");
        for name in [
            "strategy_field.csv",
            "strategy_field_no_shock.csv",
            "psi_ordinary.csv",
            "psi_catastrophic.csv",
            "solve_summary.json",
        ] {
            let a = fs::read(d1.path().join(name)).expect(name);
            let b = fs::read(d2.path().join(name)).expect(name);
            assert_eq!(a, b, "{name} not byte-identical across reruns");
        }
        assert!(out1.files.contains(&"manifest.json".to_string()));
        let manifest: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(d1.path().join("manifest.json")).unwrap())
                .unwrap();
        assert_eq!(manifest["command"], "solve");
        assert_eq!(manifest["preset"], "evp-comparison");
        assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
        assert!(out1.summary.iter().any(|l| l.contains("optimal controls")));
    }

    #[test]
    fn simulate_writes_estimate_and_paths() {
        let mut spec = small_spec(Subcommand::Simulate, "evp-comparison");
        spec.strategy = StrategyChoice::Constant {
            first_retention: 0.8,
            second_retention: 0.8,
            investment: 0.3,
        };
        let dir = tempdir().unwrap();
        let out = run(&spec, dir.path()).expect("simulate");
        let est: crate::sim::UtilityEstimate = serde_json::from_str(
            &fs::read_to_string(dir.path().join("utility.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(est.n_paths, 400);
        assert!(est.expected_utility.is_finite());
        let paths = fs::read_to_string(dir.path().join("paths.csv")).unwrap();
        // header + 3 paths x 17 nodes
        assert_eq!(paths.lines().count(), 1 + 3 * 17);
        assert!(out.checks_passed);
    }

    #[test]
    fn verify_passes_on_no_shock_preset() {
        let mut spec = small_spec(Subcommand::Verify, "no-shock-baseline");
        spec.grid = GridSpec {
            n_time: 48,
            n_space: 97,
        };
        spec.sim.n_paths = 2000;
        spec.sim.n_steps = 25;
        let dir = tempdir().unwrap();
        let out = run(&spec, dir.path()).expect("verify");
        assert!(out.checks_passed, "summary: {:?}", out.summary);
        let report: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("verify.json")).unwrap())
                .unwrap();
        let checks = report["checks"].as_array().unwrap();
        // 2 PDE-vs-MC + 1 value-vs-simulation + 8 perturbations.
        assert_eq!(checks.len(), 11);
    }

    #[test]
    fn simulate_refuses_inadmissible_preset() {
        // fig1 uses unbounded intensity and a claim law whose exponential
        // moment diverges at 2 gamma B-bar; simulation estimates would be
        // untrustworthy, so the runner must refuse.
        let spec = small_spec(Subcommand::Simulate, "fig1");
        let dir = tempdir().unwrap();
        let err = run(&spec, dir.path()).unwrap_err();
        assert_eq!(err.exit_code(), 2, "got: {err}");
        // The validation report is still written for inspection.
        assert!(dir.path().join("validation.json").exists());
    }

    #[test]
    fn solve_on_fig1_warns_but_writes_figure_data() {
        let mut spec = small_spec(Subcommand::Solve, "fig1");
        // fig1's intensity grows like 10e^(-y) across the truncated domain,
        // so the reaction is large and the PDE needs a non-toy time grid to
        // stay positive.
        spec.grid = GridSpec {
            n_time: 60,
            n_space: 121,
        };
        let dir = tempdir().unwrap();
        let out = run(&spec, dir.path()).expect("solve fig1");
        assert!(out.summary.iter().any(|l| l.starts_with("warning:")));
        let roots: serde_json::Value = serde_json::from_str(
            &fs::read_to_string(dir.path().join("figure1_roots.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(roots["ordering_w1_lt_w05_lt_w0"], true);
        let curves = fs::read_to_string(dir.path().join("figure1_curves.csv")).unwrap();
        assert!(curves.lines().count() > 100);
    }

    #[test]
    fn solve_on_fig2_annotates_crossing() {
        let spec = small_spec(Subcommand::Solve, "fig2");
        let dir = tempdir().unwrap();
        run(&spec, dir.path()).expect("solve fig2");
        let phi: serde_json::Value = serde_json::from_str(
            &fs::read_to_string(dir.path().join("figure2_phi.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(phi["strictly_increasing"], true);
        assert_eq!(phi["crossings"], 1);
        let residual = phi["crossing_residual"].as_f64().unwrap();
        assert!(residual.abs() < 1e-6, "crossing residual {residual}");
    }

    #[test]
    fn compare_reports_pass_on_evp_preset() {
        let spec = small_spec(Subcommand::Compare, "evp-comparison");
        let dir = tempdir().unwrap();
        let out = run(&spec, dir.path()).expect("compare");
        assert!(out.checks_passed);
        let csv = fs::read_to_string(dir.path().join("comparison.csv")).unwrap();
        assert!(csv.lines().count() > 10);
    }

    #[test]
    fn sweep_shows_monotone_investment_in_jump_slope() {
        let mut spec = small_spec(Subcommand::Sweep, "evp-comparison");
        spec.sweep = SweepSpec {
            parameter: SweepParameter::JumpSlope,
            values: vec![0.0, 0.5, 1.0, 1.5],
        };
        let dir = tempdir().unwrap();
        let out = run(&spec, dir.path()).expect("sweep");
        assert!(out.checks_passed);
        let summary: serde_json::Value = serde_json::from_str(
            &fs::read_to_string(dir.path().join("sweep_summary.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(summary["investment_monotone_decreasing"], true);
        let w = summary["investment"].as_array().unwrap();
        assert_eq!(w.len(), 4);
        // k = 0 must reproduce the no-shock (Merton-capped) investment: the
        // largest value of the sweep.
        assert!(w[0].as_f64().unwrap() > w[3].as_f64().unwrap());
    }

    #[test]
    fn thread_count_parsing() {
        assert_eq!(parse_thread_count(None), None);
        assert_eq!(parse_thread_count(Some("")), None);
        assert_eq!(parse_thread_count(Some("0")), None);
        assert_eq!(parse_thread_count(Some("8")), Some(8));
        assert_eq!(parse_thread_count(Some(" 3 ")), Some(3));
        assert_eq!(parse_thread_count(Some("lots")), None);
    }
}
