//! `negat` — run noisy random-circuit simulations, sweep (N, p) grids, and
//! extract the entanglement-transition parameters from the results.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime failure.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use negat_core::circuit::{CircuitSpec, EarlyStop};
use negat_core::experiment::{
    read_emax_csv, read_traces_csv, run_sweep, validate_dataset, SweepConfig,
};
use negat_core::gates::GateSet;
use negat_core::negativity::{negativity_measures, Bipartition};
use negat_core::scaling::{
    bootstrap_collapse, collapse_fit, collapse_points, estimate_pc_crossing, filter_by_parity,
    CollapseOptions, SizeParity,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

mod fixtures;

#[derive(Parser)]
#[command(name = "negat", version, about = "Mixed-state entanglement in noisy random circuits")]
struct Cli {
    /// Worker threads for sample-level parallelism (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one circuit sample and print its per-depth log negativity.
    Run(RunArgs),
    /// Run a full (N, p) sweep from a JSON config.
    Sweep(SweepArgs),
    /// Fit the entanglement transition from a sweep's emax.csv.
    Collapse(CollapseArgs),
    /// Evaluate analytic negativity fixtures (bell, werner, product).
    Negativity(NegativityArgs),
    /// Re-check a persisted dataset against its manifest.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Number of qubits (even).
    #[arg(short = 'n', long)]
    num_qubits: usize,
    /// Two-qubit gate error rate.
    #[arg(short = 'p', long, default_value_t = 0.0)]
    error_rate: f64,
    /// Circuit depth (default 4N).
    #[arg(long)]
    d_max: Option<usize>,
    #[arg(long, default_value = "haar")]
    gate_set: GateSet,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    record_every: usize,
    /// Stop once the negativity has decayed well past its peak.
    #[arg(long)]
    early_stop: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's output directory.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct CollapseArgs {
    /// Input emax.csv produced by `sweep`.
    #[arg(long)]
    input: PathBuf,
    /// Matching traces.csv; enables bootstrap intervals.
    #[arg(long)]
    traces: Option<PathBuf>,
    /// Output directory for collapse.json and collapse_points.csv
    /// (default: alongside the input).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Restrict sizes to one parity class: all | mod4-0 | mod4-2.
    #[arg(long, default_value = "all")]
    parity: SizeParity,
    /// Search the critical point jointly with the exponent instead of the
    /// default two-stage flow (crossing first, then the exponent).
    #[arg(long)]
    joint: bool,
    #[arg(long, default_value_t = 0.02)]
    pc_min: f64,
    #[arg(long, default_value_t = 0.10)]
    pc_max: f64,
    #[arg(long, default_value_t = 0.5)]
    nu_min: f64,
    #[arg(long, default_value_t = 2.5)]
    nu_max: f64,
    /// Bootstrap resamples over raw traces (0 disables).
    #[arg(long, default_value_t = 200)]
    bootstrap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct NegativityArgs {
    /// Fixture name: bell | werner | product.
    #[arg(long)]
    fixture: String,
    /// Werner mixing weight.
    #[arg(long, default_value_t = 0.5)]
    werner_w: f64,
}

#[derive(Args)]
struct ValidateArgs {
    /// Dataset directory containing manifest.json, traces.csv, emax.csv.
    #[arg(long)]
    input: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                return ExitCode::SUCCESS;
            }
            eprint!("{err}");
            return ExitCode::from(1);
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(err) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: cannot size thread pool: {err}");
            return ExitCode::from(2);
        }
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<negat_core::Error> for CliError {
    fn from(err: negat_core::Error) -> Self {
        CliError::Runtime(err.to_string())
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run(args) => run_one(args),
        Command::Sweep(args) => sweep(args),
        Command::Collapse(args) => collapse(args),
        Command::Negativity(args) => fixture(args),
        Command::Validate(args) => validate(args),
    }
}

fn run_one(args: RunArgs) -> Result<(), CliError> {
    let spec = CircuitSpec {
        num_qubits: args.num_qubits,
        max_depth: args.d_max.unwrap_or(4 * args.num_qubits),
        error_rate: args.error_rate,
        gate_set: args.gate_set,
        seed: args.seed,
        rng_stream: 0,
        record_every: args.record_every,
        early_stop: args.early_stop.then(EarlyStop::default),
        noisy_single_qubit_gates: false,
    };
    let trace = negat_core::circuit::run_circuit(&spec)?;
    println!(
        "# N={} p={} gate_set={:?} seed={}",
        spec.num_qubits, spec.error_rate, spec.gate_set, spec.seed
    );
    println!("# depth  log_negativity");
    for (d, e) in trace.depths.iter().zip(&trace.log_negativity) {
        println!("{d:>7}  {e:.10}");
    }
    if let Some((depth, emax)) = trace.max() {
        println!("# peak {emax:.10} at depth {depth}");
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|err| {
        CliError::Usage(format!("missing config {}: {err}", args.config.display()))
    })?;
    let mut config: SweepConfig = serde_json::from_str(&text)
        .map_err(|err| CliError::Usage(format!("bad config {}: {err}", args.config.display())))?;
    if let Some(output) = args.output {
        config.output_dir = output;
    }
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    let dataset = run_sweep(&config)?;
    println!(
        "swept {} points into {}",
        dataset.emax.len(),
        config.output_dir.display()
    );
    for summary in &dataset.emax {
        println!(
            "N={:>2} p={:<6} emax={:.6} at depth {}{}",
            summary.num_qubits,
            summary.error_rate,
            summary.emax,
            summary.depth_at_max,
            if summary.peak_at_boundary {
                "  (peak at depth boundary)"
            } else {
                ""
            }
        );
    }
    Ok(())
}

fn collapse(args: CollapseArgs) -> Result<(), CliError> {
    if !args.input.exists() {
        return Err(CliError::Runtime(format!(
            "input {} does not exist",
            args.input.display()
        )));
    }
    let summaries = filter_by_parity(&read_emax_csv(&args.input)?, args.parity);
    let out_dir = args
        .output
        .clone()
        .or_else(|| args.input.parent().map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir).map_err(|e| CliError::Runtime(e.to_string()))?;

    let mut options = CollapseOptions {
        pc_range: (args.pc_min, args.pc_max),
        nu_range: (args.nu_min, args.nu_max),
        ..CollapseOptions::default()
    };
    let crossing = estimate_pc_crossing(&summaries);
    if !args.joint {
        let crossing = crossing.as_ref().map_err(|e| {
            CliError::Runtime(format!("two-stage collapse needs a crossing estimate: {e}"))
        })?;
        options.fixed_pc = Some(crossing.p_c);
    }
    let fit = collapse_fit(&summaries, &options)?;

    let bootstrap = match (&args.traces, args.bootstrap) {
        (Some(path), resamples) if resamples > 0 => {
            let traces = read_traces_csv(path)?;
            let traces = traces
                .into_iter()
                .filter(|t| summaries.iter().any(|s| s.num_qubits == t.num_qubits))
                .collect::<Vec<_>>();
            Some(bootstrap_collapse(&traces, &options, resamples, args.seed)?)
        }
        _ => None,
    };

    let points = collapse_points(&summaries, fit.p_c, fit.nu);
    let mut csv = String::from("N,p,x_scaled,y_scaled\n");
    for p in &points {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            p.num_qubits, p.error_rate, p.x_scaled, p.y_scaled
        ));
    }
    std::fs::write(out_dir.join("collapse_points.csv"), csv)
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    let report = serde_json::json!({
        "p_c": fit.p_c,
        "nu": fit.nu,
        "quality": fit.quality,
        "mode": if args.joint { "joint" } else { "two-stage" },
        "parity": format!("{:?}", args.parity),
        "grid": fit.grid,
        "pc_on_boundary": fit.pc_on_boundary,
        "nu_on_boundary": fit.nu_on_boundary,
        "crossing": crossing.ok(),
        "bootstrap": bootstrap,
    });
    std::fs::write(
        out_dir.join("collapse.json"),
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?,
    )
    .map_err(|e| CliError::Runtime(e.to_string()))?;

    println!("p_c = {:.4}", fit.p_c);
    println!("nu  = {:.3}", fit.nu);
    println!("quality = {:.3e}", fit.quality);
    println!("wrote {}", out_dir.join("collapse.json").display());
    Ok(())
}

fn fixture(args: NegativityArgs) -> Result<(), CliError> {
    let (state, cut, label) = match args.fixture.as_str() {
        "bell" => (fixtures::bell_pair(), Bipartition::half_chain(2)?, "bell pair".to_string()),
        "werner" => (
            fixtures::werner(args.werner_w),
            Bipartition::half_chain(2)?,
            format!("werner w={}", args.werner_w),
        ),
        "product" => (
            fixtures::product_state(),
            Bipartition::half_chain(4)?,
            "pure product state".to_string(),
        ),
        other => {
            return Err(CliError::Usage(format!(
                "unknown fixture {other:?}; expected bell, werner, or product"
            )))
        }
    };
    let res = negativity_measures(&state, &cut)?;
    println!("fixture: {label}");
    println!("negativity N = {:.10}", res.negativity);
    println!("log negativity E = {:.10}", res.log_negativity);
    println!("smallest PT eigenvalue = {:.3e}", res.pt_min_eigenvalue);
    Ok(())
}

fn validate(args: ValidateArgs) -> Result<(), CliError> {
    let points = validate_dataset(&args.input)?;
    println!(
        "dataset {} is consistent ({points} sweep points)",
        args.input.display()
    );
    Ok(())
}
