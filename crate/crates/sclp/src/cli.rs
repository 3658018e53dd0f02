//! Command-line interface of the `sclp` binary.
//!
//! Thin dispatch over the library: every subcommand reads JSON files via
//! [`crate::io`], calls one solver entry point, prints a human summary to
//! stdout, and — when it writes an output file — drops a
//! [`RunManifest`](crate::io::RunManifest) next to it recording the inputs,
//! parameters, seed, and tolerance table of the run.
//!
//! Exit codes are part of the interface and scripts may rely on them:
//!
//! | code | meaning                                                    |
//! |------|------------------------------------------------------------|
//! | 0    | success (for `verify`/`audit`: the check passed)           |
//! | 1    | solver failure, or a verification/audit that did not pass  |
//! | 2    | input error: unreadable/unparsable file, invalid network, bad flag |
//! | 3    | degenerate instance: tied collision the sweep cannot order |
//! | 4    | robustly infeasible: no rates survive the worst case       |

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Deserialize;

use crate::bench::{generate_random, reduction_experiment, rows_to_csv, ExperimentConfig};
use crate::io::{self, IoError, OracleFile, ReductionFile, RunManifest};
use crate::model::{build_matrices, FluidNetwork, ModelError, SclpData};
use crate::oracle::{audit_feasibility, discretize, OracleError};
use crate::rc::dimension_report;
use crate::robust::{reduce, robust_sclp_simplex, RobustError};
use crate::sclp::{sclp_simplex, verify_optimality, SclpError, SclpSolution};
use crate::tolerances;

// ---------------------------------------------------------------------
// Argument grammar
// ---------------------------------------------------------------------

#[derive(Parser)]
#[command(name = "sclp", version, about = "Exact solver for fluid network scheduling problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a network exactly over its horizon.
    Solve {
        /// Network JSON file.
        network: PathBuf,
        /// Override the horizon stored in the network file.
        #[arg(long)]
        horizon: Option<f64>,
        /// Write the solution (and its manifest) here.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Solve a network robustly against its degradation budgets.
    SolveRobust {
        /// Network JSON file.
        network: PathBuf,
        /// Override the horizon stored in the network file.
        #[arg(long)]
        horizon: Option<f64>,
        /// Write the solution (and its manifest) here.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Absorb budget-covered uncertainty and report certificate dimensions.
    Reduce {
        /// Network JSON file.
        network: PathBuf,
        /// Write the reduction report here.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Re-solve a network and check a stored solution against the result.
    Verify {
        /// Network JSON file.
        network: PathBuf,
        /// Solution file to verify.
        solution: PathBuf,
        /// Override the horizon stored in the network file.
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Solve a time-discretized approximation (an exact lower bound).
    Oracle {
        /// Network JSON file.
        network: PathBuf,
        /// Number of uniform grid steps.
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// Override the horizon stored in the network file.
        #[arg(long)]
        horizon: Option<f64>,
        /// Write the oracle record here.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Solve, then stress the plan against sampled degradations.
    Audit {
        /// Network JSON file.
        network: PathBuf,
        /// Number of degradation samples.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Seed for the sampler.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Solve nominally even when the network carries uncertainty.
        #[arg(long)]
        nominal: bool,
        /// Override the horizon stored in the network file.
        #[arg(long)]
        horizon: Option<f64>,
        /// Write the audit report here.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Measure certificate-dimension reduction over a random-network grid.
    BenchReduction {
        /// Experiment configuration JSON; flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Replications per grid cell.
        #[arg(long)]
        reps: Option<usize>,
        /// Master seed of the generator.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the result table here as CSV.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Generate a random network.
    Generate {
        /// Number of buffers (at least 2).
        #[arg(long, default_value_t = 4)]
        buffers: usize,
        /// Number of servers (between 1 and the buffer count).
        #[arg(long, default_value_t = 2)]
        servers: usize,
        /// Routing density in (0, 1].
        #[arg(long, default_value_t = 0.5)]
        theta: f64,
        /// Budget scale in [0, 1]: budgets are this fraction of each
        /// server's flow count.
        #[arg(long, default_value_t = 0.5)]
        kappa: f64,
        /// Seed for the generator.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the network here; stdout when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

// ---------------------------------------------------------------------
// Failure plumbing
// ---------------------------------------------------------------------

/// A command failure: the message goes to stderr, the code to the shell.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    fn check(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::input(e.to_string())
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::input(e.to_string())
    }
}

impl From<SclpError> for Failure {
    fn from(e: SclpError) -> Self {
        let code = match &e {
            SclpError::Degenerate { .. } => 3,
            SclpError::Robust(RobustError::Infeasible { .. }) => 4,
            SclpError::Unsupported(_) => 2,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        let code = match &e {
            OracleError::TooLarge { .. }
            | OracleError::Unsupported(_)
            | OracleError::EnumerationTooBig { .. } => 2,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

// ---------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------

/// Parse the process arguments, run, and return the exit code.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

/// Like [`run`], from explicit arguments. First argument is the program
/// name, as in `argv`.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version surface as "errors" with successful intent.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Solve { network, horizon, out } => {
            cmd_solve(&network, horizon, out.as_deref(), false)
        }
        Command::SolveRobust { network, horizon, out } => {
            cmd_solve(&network, horizon, out.as_deref(), true)
        }
        Command::Reduce { network, out } => cmd_reduce(&network, out.as_deref()),
        Command::Verify { network, solution, horizon } => cmd_verify(&network, &solution, horizon),
        Command::Oracle { network, steps, horizon, out } => {
            cmd_oracle(&network, steps, horizon, out.as_deref())
        }
        Command::Audit { network, samples, seed, nominal, horizon, out } => {
            cmd_audit(&network, samples, seed, nominal, horizon, out.as_deref())
        }
        Command::BenchReduction { config, reps, seed, out } => {
            cmd_bench_reduction(config.as_deref(), reps, seed, &out)
        }
        Command::Generate { buffers, servers, theta, kappa, seed, out } => {
            cmd_generate(buffers, servers, theta, kappa, seed, out.as_deref())
        }
    }
}

// ---------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------

/// Read and validate a network, returning it with its matrix form.
fn load(network: &Path) -> Result<(FluidNetwork, SclpData), Failure> {
    let net = io::read_network(network)?;
    let data = build_matrices(&net)?;
    Ok((net, data))
}

/// Resolve the horizon: the flag wins over the network file.
fn resolve_horizon(data: &SclpData, flag: Option<f64>) -> Result<f64, Failure> {
    let horizon = flag.unwrap_or(data.horizon);
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Failure::input(format!("horizon must be positive and finite, got {horizon}")));
    }
    Ok(horizon)
}

/// Whether the instance carries any uncertainty worth solving against.
fn has_uncertainty(data: &SclpData) -> bool {
    data.budgets.iter().any(|&g| g > 0.0)
        && (data.g_tilde.iter().any(|&v| v != 0.0) || data.c_tilde.iter().any(|&v| v != 0.0))
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

// ---------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------

fn cmd_solve(
    network: &Path,
    horizon_flag: Option<f64>,
    out: Option<&Path>,
    robust: bool,
) -> Result<(), Failure> {
    let (_, data) = load(network)?;
    let horizon = resolve_horizon(&data, horizon_flag)?;
    let solution = if robust {
        robust_sclp_simplex(&data, horizon)?
    } else {
        sclp_simplex(&data, horizon)?
    };
    print_solution_summary(&solution, robust);

    if let Some(out) = out {
        io::write_solution(out, &data, &solution)?;
        let command = if robust { "solve-robust" } else { "solve" };
        let mut manifest = RunManifest::new(command);
        manifest.inputs.push(display(network));
        manifest.params.insert("horizon".to_string(), horizon.to_string());
        manifest.outputs.push(display(out));
        io::write_manifest_for(out, &manifest)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn print_solution_summary(solution: &SclpSolution, robust: bool) {
    let kind = if robust { "robust objective" } else { "objective" };
    println!("{kind}: {:.12}", solution.objective);
    println!("dual objective: {:.12}", solution.dual_objective);
    let breakpoints: Vec<String> =
        solution.breakpoints.iter().map(|t| format!("{t:.9}")).collect();
    println!("breakpoints: [{}]", breakpoints.join(", "));
    println!("intervals: {}", solution.sequence.intervals.len());
    println!("sweep iterations: {}", solution.trace.iterations);
    if robust {
        let cuts: usize = solution
            .sequence
            .intervals
            .iter()
            .filter_map(|iv| iv.robust.as_ref())
            .map(|info| info.realizations.len())
            .sum();
        println!("binding degradation patterns: {cuts}");
    }
}

fn cmd_reduce(network: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let (_, data) = load(network)?;
    let reduced = reduce(&data);
    let report = dimension_report(&data, Some(&reduced));
    let file = ReductionFile {
        monolithic_certificates: report.monolithic_certificates,
        rates_certificates: report.rates_certificates,
        before: report.before,
        after: report.after,
        reduction_percent: report.reduction_percent,
        residual_rows: reduced
            .residual_rows
            .iter()
            .map(|set| set.iter().copied().collect())
            .collect(),
        residual_cost: reduced.residual_cost.iter().copied().collect(),
    };
    println!("monolithic counterpart certificates: {}", file.monolithic_certificates);
    println!("interval counterpart certificates:   {}", file.rates_certificates);
    println!("threat certificates before reduction: {}", file.before);
    println!("threat certificates after reduction:  {}", file.after);
    println!("reduction: {:.2}%", file.reduction_percent);
    let residual: usize = file.residual_rows.iter().map(Vec::len).sum::<usize>()
        + file.residual_cost.len();
    println!("flows still uncertain after absorption: {residual}");

    if let Some(out) = out {
        io::write_reduction(out, &file)?;
        let mut manifest = RunManifest::new("reduce");
        manifest.inputs.push(display(network));
        manifest.outputs.push(display(out));
        io::write_manifest_for(out, &manifest)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn cmd_verify(network: &Path, solution: &Path, horizon_flag: Option<f64>) -> Result<(), Failure> {
    let (_, data) = load(network)?;
    let horizon = resolve_horizon(&data, horizon_flag)?;
    let stored = io::read_solution(solution)?;
    if (stored.horizon - horizon).abs() > tolerances::TIME * (1.0 + horizon) {
        return Err(Failure::input(format!(
            "solution was computed over horizon {}, but this run uses {horizon}; \
             pass --horizon to match",
            stored.horizon
        )));
    }

    let robust = stored.intervals.iter().any(|iv| iv.robust.is_some());
    let fresh = if robust {
        robust_sclp_simplex(&data, horizon)?
    } else {
        sclp_simplex(&data, horizon)?
    };

    let mut all_passed = true;
    let mut line = |name: &str, passed: bool, residual: f64| {
        let verdict = if passed { "PASS" } else { "FAIL" };
        println!("[{verdict}] {name} (residual {residual:.3e})");
        all_passed &= passed;
    };

    let obj_gap = (stored.objective - fresh.objective).abs() / (1.0 + fresh.objective.abs());
    line("objective matches the re-solve", obj_gap <= tolerances::DUALITY_GAP, obj_gap);

    let bp_gap = if stored.breakpoints.len() == fresh.breakpoints.len() {
        stored
            .breakpoints
            .iter()
            .zip(&fresh.breakpoints)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    line(
        "breakpoints match the re-solve",
        bp_gap <= tolerances::RESIDUAL * (1.0 + horizon),
        bp_gap,
    );

    let report = verify_optimality(&data, &fresh);
    for check in &report.checks {
        line(check.name, check.passed, check.margin);
    }

    if all_passed {
        println!("verified: the stored solution is optimal for this network");
        Ok(())
    } else {
        Err(Failure::check("verification failed; see the report above".to_string()))
    }
}

fn cmd_oracle(
    network: &Path,
    steps: usize,
    horizon_flag: Option<f64>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let (_, mut data) = load(network)?;
    data.horizon = resolve_horizon(&data, horizon_flag)?;
    let grid = discretize(&data, steps)?;
    let solution = grid.solve()?;
    let file = OracleFile {
        objective: solution.objective,
        n_steps: grid.n_steps,
        dt: grid.dt,
        horizon: grid.horizon,
        iterations: solution.iterations,
        primal_residual: solution.primal_residual,
        dual_residual: solution.dual_residual,
        gap: solution.gap,
    };
    println!("discretized objective: {:.12}", file.objective);
    println!("grid: {} steps of {:.6}", file.n_steps, file.dt);
    println!(
        "interior point: {} iterations, residuals {:.3e}/{:.3e}, gap {:.3e}",
        file.iterations, file.primal_residual, file.dual_residual, file.gap
    );

    if let Some(out) = out {
        io::write_oracle(out, &file)?;
        let mut manifest = RunManifest::new("oracle");
        manifest.inputs.push(display(network));
        manifest.params.insert("steps".to_string(), steps.to_string());
        manifest.params.insert("horizon".to_string(), grid.horizon.to_string());
        manifest.outputs.push(display(out));
        io::write_manifest_for(out, &manifest)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn cmd_audit(
    network: &Path,
    samples: usize,
    seed: u64,
    nominal: bool,
    horizon_flag: Option<f64>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let (_, data) = load(network)?;
    let horizon = resolve_horizon(&data, horizon_flag)?;
    let robust = has_uncertainty(&data) && !nominal;
    let solution = if robust {
        robust_sclp_simplex(&data, horizon)?
    } else {
        sclp_simplex(&data, horizon)?
    };
    let report = audit_feasibility(&data, &solution, samples, seed);

    let plan = if robust { "robust plan" } else { "nominal plan" };
    println!("audited {plan}: {} samples, seed {seed}", report.n_samples);
    println!("max state violation:    {:.3e}", report.max_state_violation);
    println!("max capacity violation: {:.3e}", report.max_capacity_violation);
    println!("nominal replay deviation: {:.3e}", report.nominal_deviation);
    println!("guarantee violation:     {:.3e}", report.guarantee_violation);
    if let Some(worst) = &report.worst {
        println!(
            "worst sample: index {} drives state {} to -{:.6} at t = {:.6}",
            worst.index, worst.state, worst.violation, worst.time
        );
    }
    println!("verdict: {}", if report.passed { "PASS" } else { "FAIL" });

    if let Some(out) = out {
        io::write_audit(out, &report)?;
        let mut manifest = RunManifest::new("audit");
        manifest.inputs.push(display(network));
        manifest.params.insert("samples".to_string(), samples.to_string());
        manifest.params.insert("nominal".to_string(), nominal.to_string());
        manifest.params.insert("horizon".to_string(), horizon.to_string());
        manifest.seed = Some(seed);
        manifest.outputs.push(display(out));
        io::write_manifest_for(out, &manifest)?;
        println!("wrote {}", out.display());
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure::check(format!(
            "the {plan} violates feasibility under sampled degradations"
        )))
    }
}

/// Experiment configuration file: any subset of the grid may be given;
/// missing fields fall back to the defaults, flags override both.
#[derive(Debug, Default, Deserialize)]
struct ExperimentConfigFile {
    scales: Option<Vec<usize>>,
    servers: Option<Vec<usize>>,
    thetas: Option<Vec<f64>>,
    kappas: Option<Vec<f64>>,
    reps: Option<usize>,
    seed: Option<u64>,
}

fn cmd_bench_reduction(
    config_path: Option<&Path>,
    reps: Option<usize>,
    seed: Option<u64>,
    out: &Path,
) -> Result<(), Failure> {
    // Precedence: flags over config file over defaults.
    let file: ExperimentConfigFile = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|source| IoError::Read { path: path.to_path_buf(), source })?;
            serde_json::from_str(&text)
                .map_err(|source| IoError::Parse { path: path.to_path_buf(), source })?
        }
        None => ExperimentConfigFile::default(),
    };
    let defaults = ExperimentConfig::default();
    let config = ExperimentConfig {
        scales: file.scales.unwrap_or(defaults.scales),
        servers: file.servers.unwrap_or(defaults.servers),
        thetas: file.thetas.unwrap_or(defaults.thetas),
        kappas: file.kappas.unwrap_or(defaults.kappas),
        reps: reps.or(file.reps).unwrap_or(defaults.reps),
        seed: seed.or(file.seed).unwrap_or(defaults.seed),
    };
    if config.reps == 0 {
        return Err(Failure::input("reps must be positive"));
    }

    let rows = reduction_experiment(&config);
    let csv = rows_to_csv(&rows);
    std::fs::write(out, &csv)
        .map_err(|source| IoError::Write { path: out.to_path_buf(), source })?;

    let grand_mean =
        rows.iter().map(|r| r.mean_reduction).sum::<f64>() / rows.len().max(1) as f64;
    println!("grid cells: {}", rows.len());
    println!("replications per cell: {}", config.reps);
    println!("grand mean reduction: {grand_mean:.2}%");

    let mut manifest = RunManifest::new("bench-reduction");
    let mut params = BTreeMap::new();
    params.insert("scales".to_string(), format!("{:?}", config.scales));
    params.insert("servers".to_string(), format!("{:?}", config.servers));
    params.insert("thetas".to_string(), format!("{:?}", config.thetas));
    params.insert("kappas".to_string(), format!("{:?}", config.kappas));
    params.insert("reps".to_string(), config.reps.to_string());
    manifest.params = params;
    manifest.seed = Some(config.seed);
    if let Some(path) = config_path {
        manifest.inputs.push(display(path));
    }
    manifest.outputs.push(display(out));
    io::write_manifest_for(out, &manifest)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_generate(
    buffers: usize,
    servers: usize,
    theta: f64,
    kappa: f64,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), Failure> {
    if buffers < 2 {
        return Err(Failure::input("at least 2 buffers are required"));
    }
    if servers == 0 || servers > buffers {
        return Err(Failure::input(format!(
            "servers must lie between 1 and the buffer count, got {servers}"
        )));
    }
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Failure::input(format!("theta must lie in (0, 1], got {theta}")));
    }
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Failure::input(format!("kappa must lie in [0, 1], got {kappa}")));
    }
    let net = generate_random(buffers, servers, theta, kappa, seed);
    match out {
        Some(out) => {
            io::write_network(out, &net)?;
            let mut manifest = RunManifest::new("generate");
            manifest.params.insert("buffers".to_string(), buffers.to_string());
            manifest.params.insert("servers".to_string(), servers.to_string());
            manifest.params.insert("theta".to_string(), theta.to_string());
            manifest.params.insert("kappa".to_string(), kappa.to_string());
            manifest.seed = Some(seed);
            manifest.outputs.push(display(out));
            io::write_manifest_for(out, &manifest)?;
            println!("wrote {}", out.display());
        }
        None => print!("{}", io::to_json_string(&net)?),
    }
    Ok(())
}
