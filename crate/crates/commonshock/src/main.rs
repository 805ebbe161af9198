//! `commonshock`: batch experiment runner.
//!
//! ```text
//! commonshock <solve|simulate|verify|compare|sweep>
//!     [--preset <tag> | --config <model.json>]
//!     [--out <dir>] [--seed <u64>] [--paths <n>] [--grid <MxN>]
//!     [--steps <n>] [--antithetic] [--strategy <name>]
//!     [--sweep-parameter <name>] [--sweep-values <v1,v2,...>]
//! ```
//!
//! Exit codes: 0 success, 2 validation failure, 3 numerical failure,
//! 4 property violation. `COMMONSHOCK_THREADS` caps the worker pool.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand as ClapSubcommand};

use commonshock::cli::{
    self, ExperimentSpec, GridSpec, StrategyChoice, Subcommand, SweepParameter, SweepSpec,
};
use commonshock::model::ModelConfig;
use commonshock::CliError;

#[derive(Parser)]
#[command(
    name = "commonshock",
    version,
    about = "Optimal reinsurance and investment under common-shock dependence"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Tabulate the optimal strategy, solve the value PDEs, export figure data
    Solve(CommonArgs),
    /// Estimate expected utility of a strategy by Monte Carlo
    Simulate(CommonArgs),
    /// Run paired-optimality and PDE-vs-simulation consistency checks
    Verify(CommonArgs),
    /// Compare optimal controls with and without the common shock
    Compare(CommonArgs),
    /// Sweep one model parameter and track the optimal controls
    Sweep(CommonArgs),
}

impl Command {
    fn split(&self) -> (Subcommand, &CommonArgs) {
        match self {
            Command::Solve(a) => (Subcommand::Solve, a),
            Command::Simulate(a) => (Subcommand::Simulate, a),
            Command::Verify(a) => (Subcommand::Verify, a),
            Command::Compare(a) => (Subcommand::Compare, a),
            Command::Sweep(a) => (Subcommand::Sweep, a),
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Bundled parameter set (fig1, fig2, evp-comparison, no-shock-baseline,
    /// variance-shock); mutually exclusive with --config
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,

    /// Path to a model configuration JSON file
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory for artifacts (default: ./out/<command>-<preset>)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Master seed of the experiment
    #[arg(long)]
    seed: Option<u64>,

    /// Number of Monte Carlo paths
    #[arg(long)]
    paths: Option<usize>,

    /// Number of wealth-accumulation steps per path
    #[arg(long)]
    steps: Option<usize>,

    /// Time x space resolution, e.g. 200x401
    #[arg(long, value_name = "MxN")]
    grid: Option<String>,

    /// Mirror consecutive paths for variance reduction
    #[arg(long)]
    antithetic: bool,

    /// Strategy for `simulate`: optimal, no-shock, or constant:<u1>,<u2>,<w>
    #[arg(long)]
    strategy: Option<String>,

    /// Parameter swept by `sweep`: jump-slope, intensity-scale,
    /// reinsurer-loading, or risk-aversion
    #[arg(long)]
    sweep_parameter: Option<String>,

    /// Comma-separated values for the swept parameter
    #[arg(long)]
    sweep_values: Option<String>,
}

fn parse_strategy(raw: &str) -> Result<StrategyChoice, CliError> {
    let s = raw.trim();
    match s.to_ascii_lowercase().as_str() {
        "optimal" => return Ok(StrategyChoice::Optimal),
        "no-shock" | "no_shock" => return Ok(StrategyChoice::NoShock),
        _ => {}
    }
    if let Some(rest) = s.strip_prefix("constant:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() == 3 {
            let nums: Result<Vec<f64>, _> = parts.iter().map(|p| p.trim().parse()).collect();
            if let Ok(v) = nums {
                return Ok(StrategyChoice::Constant {
                    first_retention: v[0],
                    second_retention: v[1],
                    investment: v[2],
                });
            }
        }
    }
    Err(CliError::Validation(format!(
        "unknown strategy '{raw}' (expected optimal, no-shock, or constant:<u1>,<u2>,<w>)"
    )))
}

fn build_spec(command: Subcommand, args: &CommonArgs) -> Result<ExperimentSpec, CliError> {
    let mut spec = match (&args.preset, &args.config) {
        (_, Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            let model = ModelConfig::from_json_str(&text)?;
            ExperimentSpec {
                model,
                preset: "custom".to_string(),
                ..ExperimentSpec::for_preset(command, "evp-comparison")?
            }
        }
        (preset, None) => {
            let tag = preset.as_deref().unwrap_or("evp-comparison");
            ExperimentSpec::for_preset(command, tag)?
        }
    };
    spec.command = command;
    if let Some(seed) = args.seed {
        spec.sim.seed = seed;
    }
    if let Some(paths) = args.paths {
        spec.sim.n_paths = paths;
    }
    if let Some(steps) = args.steps {
        spec.sim.n_steps = steps;
    }
    if args.antithetic {
        spec.sim.antithetic = true;
    }
    if let Some(grid) = &args.grid {
        spec.grid = GridSpec::parse(grid)?;
    }
    if let Some(strategy) = &args.strategy {
        spec.strategy = parse_strategy(strategy)?;
    }
    if args.sweep_parameter.is_some() || args.sweep_values.is_some() {
        let parameter = match &args.sweep_parameter {
            Some(p) => SweepParameter::parse(p)?,
            None => SweepSpec::default().parameter,
        };
        let values = match &args.sweep_values {
            Some(list) => list
                .split(',')
                .map(|v| {
                    v.trim().parse::<f64>().map_err(|_| {
                        CliError::Validation(format!("bad sweep value '{}'", v.trim()))
                    })
                })
                .collect::<Result<Vec<f64>, _>>()?,
            None => SweepSpec::default().values,
        };
        spec.sweep = SweepSpec { parameter, values };
    }
    Ok(spec)
}

fn execute() -> Result<(), CliError> {
    if let Some(threads) = cli::thread_count_from_env() {
        // A second initialization (e.g. in tests) is harmless: rayon keeps
        // the first pool and returns an error we can ignore.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let parsed = Cli::parse();
    let (command, args) = parsed.command.split();
    let spec = build_spec(command, args)?;
    let out_dir = args.out.clone().unwrap_or_else(|| {
        PathBuf::from("out").join(format!("{}-{}", command.label(), spec.preset))
    });

    let outcome = cli::run(&spec, &out_dir)?;
    for line in &outcome.summary {
        println!("{line}");
    }
    println!(
        "wrote {} file(s) to {}",
        outcome.files.len(),
        out_dir.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    match execute() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
