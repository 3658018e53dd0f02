//! File formats: networks, solutions, audit reports, run manifests.
//!
//! Everything on disk is JSON. Floats are written in scientific notation
//! with 17 significant digits, the shortest count that round-trips every
//! f64 exactly, so a written solution re-reads bit-for-bit and two runs can
//! be diffed textually. Network files are the serde image of
//! [`FluidNetwork`]; solution files flatten [`SclpSolution`] into plain
//! arrays (no basis bookkeeping) so other tools can consume them; robust
//! solution files additionally carry, per interval, the binding degradation
//! patterns and the explicit-counterpart certificates rebuilt — and
//! re-verified — from the stored duals. Every command of the bundled binary
//! drops a [`RunManifest`] next to each file it writes, freezing the
//! command line, the inputs, the seed, and the tolerance table the run was
//! produced under.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::model::{FluidNetwork, SclpData};
use crate::oracle::AuditReport;
use crate::robust::map_dual;
use crate::sclp::{SclpSolution, SweepTrace};
use crate::tolerances;

// ---------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------

/// An I/O or format failure, carrying the offending path.
#[derive(Debug)]
pub enum IoError {
    /// Reading the file failed.
    Read {
        /// Path that could not be read.
        path: PathBuf,
        /// Underlying error.
        source: std::io::Error,
    },
    /// Writing the file failed.
    Write {
        /// Path that could not be written.
        path: PathBuf,
        /// Underlying error.
        source: std::io::Error,
    },
    /// The file's contents did not parse as the expected format.
    Parse {
        /// Path whose contents were malformed.
        path: PathBuf,
        /// Underlying error.
        source: serde_json::Error,
    },
    /// A value could not be serialized (non-finite float, broken writer).
    Serialize(String),
    /// A solution could not be converted to its file form.
    Convert(String),
}

impl std::fmt::Display for IoError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IoError::Read { path, source } => {
                write!(f, "cannot read {}: {source}", path.display())
            }
            IoError::Write { path, source } => {
                write!(f, "cannot write {}: {source}", path.display())
            }
            IoError::Parse { path, source } => {
                write!(f, "cannot parse {}: {source}", path.display())
            }
            IoError::Serialize(msg) => write!(f, "cannot serialize: {msg}"),
            IoError::Convert(msg) => write!(f, "cannot convert solution: {msg}"),
        }
    }
}

impl std::error::Error for IoError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            IoError::Read { source, .. } | IoError::Write { source, .. } => Some(source),
            IoError::Parse { source, .. } => Some(source),
            IoError::Serialize(_) | IoError::Convert(_) => None,
        }
    }
}

// ---------------------------------------------------------------------
// JSON encoding with exact floats
// ---------------------------------------------------------------------

/// Pretty JSON formatter that prints every float as `{:.16e}`: 17
/// significant digits, enough to reproduce any f64 exactly on re-read.
struct ExactFloats {
    inner: serde_json::ser::PrettyFormatter<'static>,
}

impl ExactFloats {
    fn new() -> Self {
        ExactFloats { inner: serde_json::ser::PrettyFormatter::new() }
    }
}

impl serde_json::ser::Formatter for ExactFloats {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.begin_array(writer)
    }

    fn end_array<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W>(&mut self, writer: &mut W, first: bool) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.begin_object(writer)
    }

    fn end_object<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W>(&mut self, writer: &mut W, first: bool) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.end_object_value(writer)
    }
}

/// Serialize a value to pretty JSON with exact floats.
///
/// Non-finite floats have no JSON form and come out as `null` (the
/// serializer's convention); they never occur in solver output — every
/// path that could produce one fails earlier — and a `null` fails loudly
/// on re-read, so nothing silently degrades.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String, IoError> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, ExactFloats::new());
    value.serialize(&mut ser).map_err(|e| IoError::Serialize(e.to_string()))?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| IoError::Serialize(e.to_string()))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| IoError::Read { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|source| IoError::Parse { path: path.to_path_buf(), source })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let text = to_json_string(value)?;
    std::fs::write(path, text).map_err(|source| IoError::Write { path: path.to_path_buf(), source })
}

// ---------------------------------------------------------------------
// Network files
// ---------------------------------------------------------------------

/// Read a network description from a JSON file.
///
/// The file is the serde image of [`FluidNetwork`]. No validation happens
/// here; [`crate::model::build_matrices`] is the validating step.
pub fn read_network(path: &Path) -> Result<FluidNetwork, IoError> {
    read_json(path)
}

/// Write a network description as JSON.
pub fn write_network(path: &Path, network: &FluidNetwork) -> Result<(), IoError> {
    write_json(path, network)
}

// ---------------------------------------------------------------------
// Solution files
// ---------------------------------------------------------------------

/// A solved problem in file form: plain arrays, no solver bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    /// Primal objective value.
    pub objective: f64,
    /// Dual objective value (equals the primal at optimality).
    pub dual_objective: f64,
    /// Time horizon the problem was solved over.
    pub horizon: f64,
    /// Breakpoints `0 = t₀ < … < t_N = T`.
    pub breakpoints: Vec<f64>,
    /// States at breakpoints, outer index over breakpoints.
    pub x: Vec<Vec<f64>>,
    /// Time duals at breakpoints, outer index over breakpoints.
    pub q: Vec<Vec<f64>>,
    /// Per-interval rates and duals, first interval first.
    pub intervals: Vec<IntervalFile>,
    /// What the parametric sweep did.
    pub trace: TraceFile,
}

/// One interval of a solution file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalFile {
    /// Interval start time.
    pub start: f64,
    /// Interval end time.
    pub end: f64,
    /// Control rates (flows, then capacity slacks).
    pub u: Vec<f64>,
    /// State slopes.
    pub x_dot: Vec<f64>,
    /// State duals.
    pub p: Vec<f64>,
    /// Control dual slopes.
    pub q_dot: Vec<f64>,
    /// Robust bookkeeping; absent for nominal solves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub robust: Option<RobustIntervalFile>,
}

/// Robust per-interval record: the uncertainty that shaped the rates and
/// the explicit-counterpart certificates proving the worst case is priced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustIntervalFile {
    /// Objective degradation applied to the nominal rates (length J).
    pub cost_adjustment: Vec<f64>,
    /// The degradation selection attaining it (length J).
    pub objective_xi: Vec<f64>,
    /// Binding worst-case degradations of the state constraints.
    pub cuts: Vec<CutFile>,
    /// Explicit robust-counterpart certificates, re-verified on export.
    pub rc_certificates: CertificateFile,
}

/// One binding degradation pattern and its dual weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutFile {
    /// State row the pattern degrades.
    pub state: usize,
    /// Degradation per flow (length J, entries in [0,1]).
    pub xi: Vec<f64>,
    /// Dual multiplier of the cut in the interval LP.
    pub dual: f64,
}

/// Explicit robust-counterpart certificate values for one interval.
///
/// `beta[k][i]` prices server `i`'s budget against state row `k` and
/// `gamma[k][j]` prices flow `j`'s overflow above it; together they
/// dominate the row's worst-case degradation exactly. The `_objective`
/// pair does the same for the objective row. `p_prime` and
/// `delta_dot_prime` are the counterpart's dual variables assembled from
/// the cut duals: aggregate state prices and per-flow degradation prices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    /// Budget certificates, one row per state, one entry per server.
    pub beta: Vec<Vec<f64>>,
    /// Overflow certificates, one row per state, one entry per flow.
    pub gamma: Vec<Vec<f64>>,
    /// Budget certificates of the objective row (length I).
    pub beta_objective: Vec<f64>,
    /// Overflow certificates of the objective row (length J).
    pub gamma_objective: Vec<f64>,
    /// Aggregate state duals of the counterpart (length K).
    pub p_prime: Vec<f64>,
    /// Degradation prices, one row per state, one entry per flow.
    pub delta_dot_prime: Vec<Vec<f64>>,
    /// Largest residual of the export-time re-verification.
    pub max_residual: f64,
}

/// Sweep trace in file form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    /// Parametric iterations performed.
    pub iterations: usize,
    /// Horizon values at which the structure changed.
    pub collision_thetas: Vec<f64>,
    /// One log line per structure change.
    pub events: Vec<String>,
}

impl From<&SweepTrace> for TraceFile {
    fn from(trace: &SweepTrace) -> Self {
        TraceFile {
            iterations: trace.iterations,
            collision_thetas: trace.collision_thetas.clone(),
            events: trace.events.clone(),
        }
    }
}

fn chunk_rows(flat: &[f64], row_len: usize) -> Vec<Vec<f64>> {
    if row_len == 0 {
        return Vec::new();
    }
    flat.chunks(row_len).map(<[f64]>::to_vec).collect()
}

/// Flatten a solution into its file form.
///
/// Robust intervals re-run the dual mapping onto the explicit counterpart
/// from the stored cut duals, so the certificates written to disk are
/// verified at export time rather than trusted from the solve; a mapping
/// residual above the verification tolerance fails the conversion.
pub fn solution_to_file(data: &SclpData, solution: &SclpSolution) -> Result<SolutionFile, IoError> {
    let num_flows = data.num_flows;
    let num_servers = data.num_servers;
    let mut intervals = Vec::with_capacity(solution.sequence.intervals.len());
    for (n, basis) in solution.sequence.intervals.iter().enumerate() {
        let robust = match &basis.robust {
            None => None,
            Some(info) => {
                // The interval's master objective, recomputed from the dual
                // side: free states price at zero (their slope column is
                // basic with zero cost), so the stored duals suffice.
                let objective: f64 = (0..data.num_buffers)
                    .map(|k| data.input_rate[k] * basis.state_duals[k])
                    .sum::<f64>()
                    + (0..num_servers)
                        .map(|i| data.b[i] * basis.control_duals[num_flows + i])
                        .sum::<f64>();
                let mapping = map_dual(
                    data,
                    &basis.pinned_controls,
                    &basis.controls,
                    &info.realizations,
                    &info.objective_xi,
                    &basis.control_duals,
                    objective,
                )
                .map_err(|e| {
                    IoError::Convert(format!("certificates of interval {n} failed: {e}"))
                })?;
                Some(RobustIntervalFile {
                    cost_adjustment: info.cost_adjustment.clone(),
                    objective_xi: info.objective_xi.clone(),
                    cuts: info
                        .realizations
                        .iter()
                        .map(|r| CutFile { state: r.state, xi: r.xi.clone(), dual: r.dual })
                        .collect(),
                    rc_certificates: CertificateFile {
                        beta: chunk_rows(&mapping.beta, num_servers),
                        gamma: chunk_rows(&mapping.gamma, num_flows),
                        beta_objective: mapping.beta_objective.clone(),
                        gamma_objective: mapping.gamma_objective.clone(),
                        p_prime: mapping.state_duals.clone(),
                        delta_dot_prime: chunk_rows(&mapping.scenario_weights, num_flows),
                        max_residual: mapping.max_residual,
                    },
                })
            }
        };
        intervals.push(IntervalFile {
            start: solution.breakpoints[n],
            end: solution.breakpoints[n + 1],
            u: basis.controls.clone(),
            x_dot: basis.state_slopes.clone(),
            p: basis.state_duals.clone(),
            q_dot: basis.control_duals.clone(),
            robust,
        });
    }
    Ok(SolutionFile {
        objective: solution.objective,
        dual_objective: solution.dual_objective,
        horizon: *solution.breakpoints.last().expect("solutions have breakpoints"),
        breakpoints: solution.breakpoints.clone(),
        x: solution.states.clone(),
        q: solution.dual_states.clone(),
        intervals,
        trace: TraceFile::from(&solution.trace),
    })
}

/// Read a solution file.
pub fn read_solution(path: &Path) -> Result<SolutionFile, IoError> {
    read_json(path)
}

/// Convert and write a solution in one step.
pub fn write_solution(
    path: &Path,
    data: &SclpData,
    solution: &SclpSolution,
) -> Result<SolutionFile, IoError> {
    let file = solution_to_file(data, solution)?;
    write_json(path, &file)?;
    Ok(file)
}

// ---------------------------------------------------------------------
// Audit files
// ---------------------------------------------------------------------

/// A feasibility audit in file form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditFile {
    /// Number of degradation samples drawn.
    pub n_samples: usize,
    /// Seed the samples were drawn from.
    pub seed: u64,
    /// Whether every check stayed within tolerance.
    pub passed: bool,
    /// Largest state-negativity across all samples and times.
    pub max_state_violation: f64,
    /// Largest capacity violation of the stored controls.
    pub max_capacity_violation: f64,
    /// Largest state-negativity per state.
    pub per_state_violation: Vec<f64>,
    /// Distance between stored and replayed degradation-free trajectories.
    pub nominal_deviation: f64,
    /// How far the stored trajectory overstates the guaranteed one.
    pub guarantee_violation: f64,
    /// The worst offending sample, if any violation was recorded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worst: Option<WorstSampleFile>,
}

/// Identifies the worst sample of an audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstSampleFile {
    /// Sample index (also identifies the sampling class).
    pub index: usize,
    /// Time at which the violation peaked.
    pub time: f64,
    /// State that went negative.
    pub state: usize,
    /// Magnitude of the violation.
    pub violation: f64,
}

/// Flatten an audit report into its file form.
pub fn audit_to_file(report: &AuditReport) -> AuditFile {
    AuditFile {
        n_samples: report.n_samples,
        seed: report.seed,
        passed: report.passed,
        max_state_violation: report.max_state_violation,
        max_capacity_violation: report.max_capacity_violation,
        per_state_violation: report.per_state_violation.clone(),
        nominal_deviation: report.nominal_deviation,
        guarantee_violation: report.guarantee_violation,
        worst: report.worst.as_ref().map(|w| WorstSampleFile {
            index: w.index,
            time: w.time,
            state: w.state,
            violation: w.violation,
        }),
    }
}

/// Write an audit report as JSON.
pub fn write_audit(path: &Path, report: &AuditReport) -> Result<AuditFile, IoError> {
    let file = audit_to_file(report);
    write_json(path, &file)?;
    Ok(file)
}

/// Read an audit file.
pub fn read_audit(path: &Path) -> Result<AuditFile, IoError> {
    read_json(path)
}

// ---------------------------------------------------------------------
// Reduction and oracle files
// ---------------------------------------------------------------------

/// Outcome of an uncertainty-set reduction in file form: certificate
/// dimensions of the explicit counterparts, the threat counts before and
/// after absorption, and the flows whose degradation stayed uncertain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionFile {
    /// Certificate variables of the monolithic counterpart, `(K+1)(J+I)+1`.
    pub monolithic_certificates: usize,
    /// Certificate variables of the interval counterparts, `K(J+I)`.
    pub rates_certificates: usize,
    /// Threat-based certificate count before reduction.
    pub before: usize,
    /// Threat-based certificate count after reduction.
    pub after: usize,
    /// Relative shrinkage `100·(1 − after/before)`; 0 when nothing was
    /// there to reduce.
    pub reduction_percent: f64,
    /// Per state row, the flows whose degradation remains uncertain.
    pub residual_rows: Vec<Vec<usize>>,
    /// Flows whose objective degradation remains uncertain.
    pub residual_cost: Vec<usize>,
}

/// Write a reduction report as JSON.
pub fn write_reduction(path: &Path, file: &ReductionFile) -> Result<(), IoError> {
    write_json(path, file)
}

/// Read a reduction report.
pub fn read_reduction(path: &Path) -> Result<ReductionFile, IoError> {
    read_json(path)
}

/// A discretization-oracle run in file form: the grid, the bound it
/// produced, and the interior-point diagnostics behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleFile {
    /// Objective of the discretized problem (a lower bound on the exact
    /// value; equal to it when every breakpoint lies on the grid).
    pub objective: f64,
    /// Number of grid steps.
    pub n_steps: usize,
    /// Step length.
    pub dt: f64,
    /// Horizon the grid covers.
    pub horizon: f64,
    /// Interior-point iterations performed.
    pub iterations: usize,
    /// Relative primal residual at termination.
    pub primal_residual: f64,
    /// Relative dual residual at termination.
    pub dual_residual: f64,
    /// Relative duality gap at termination.
    pub gap: f64,
}

/// Write an oracle record as JSON.
pub fn write_oracle(path: &Path, file: &OracleFile) -> Result<(), IoError> {
    write_json(path, file)
}

/// Read an oracle record.
pub fn read_oracle(path: &Path) -> Result<OracleFile, IoError> {
    read_json(path)
}

// ---------------------------------------------------------------------
// Run manifests
// ---------------------------------------------------------------------

/// Provenance record written next to every file the CLI produces: what ran,
/// on which inputs, with which parameters and seed, producing which
/// outputs, under which tolerance table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Subcommand that ran.
    pub command: String,
    /// Input file paths.
    pub inputs: Vec<String>,
    /// Resolved parameters, flag name to value, after precedence.
    pub params: BTreeMap<String, String>,
    /// Random seed, for commands that draw randomness.
    pub seed: Option<u64>,
    /// Output file paths, the manifest itself excluded.
    pub outputs: Vec<String>,
    /// Version of the solver that produced the outputs.
    pub version: String,
    /// Numeric tolerances the run was performed under.
    pub tolerances: BTreeMap<String, f64>,
}

impl RunManifest {
    /// A manifest for the named command under this build's version and
    /// tolerance table; inputs, params, seed, and outputs start empty.
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            inputs: Vec::new(),
            params: BTreeMap::new(),
            seed: None,
            outputs: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            tolerances: tolerance_snapshot(),
        }
    }
}

/// The crate's tolerance table as name-value pairs.
pub fn tolerance_snapshot() -> BTreeMap<String, f64> {
    let mut map = BTreeMap::new();
    map.insert("feasibility".to_string(), tolerances::FEAS);
    map.insert("optimality".to_string(), tolerances::OPT);
    map.insert("pivot".to_string(), tolerances::PIVOT);
    map.insert("time".to_string(), tolerances::TIME);
    map.insert("duality_gap".to_string(), tolerances::DUALITY_GAP);
    map.insert("residual".to_string(), tolerances::RESIDUAL);
    map.insert("cut_violation".to_string(), tolerances::CUT_VIOLATION);
    map.insert("audit".to_string(), tolerances::AUDIT);
    map.insert("mapping".to_string(), tolerances::MAPPING);
    map.insert("ipm".to_string(), tolerances::IPM);
    map.insert("tie_rel".to_string(), tolerances::TIE_REL);
    map.insert("subproblem_horizon_rel".to_string(), tolerances::SUBPROBLEM_HORIZON_REL);
    map
}

/// Where the manifest for an output file lives: `<output>.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map_or_else(Default::default, |n| n.to_os_string());
    name.push(".manifest.json");
    output.with_file_name(name)
}

/// Write a manifest next to the named output file.
pub fn write_manifest_for(output: &Path, manifest: &RunManifest) -> Result<PathBuf, IoError> {
    let path = manifest_path(output);
    write_json(&path, manifest)?;
    Ok(path)
}

/// Read a manifest file.
pub fn read_manifest(path: &Path) -> Result<RunManifest, IoError> {
    read_json(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_matrices, Buffer, Flow, FluidNetwork, Route, Server};
    use crate::robust::robust_sclp_simplex;
    use crate::sclp::sclp_simplex;

    fn drain() -> FluidNetwork {
        FluidNetwork {
            servers: vec![Server { id: 1, budget: 0.0 }],
            buffers: vec![Buffer { id: 1, alpha: 1.0, input_rate: 0.0, holding_cost: 1.0 }],
            flows: vec![Flow {
                id: 1,
                server: 1,
                buffer: 1,
                mu_bar: 2.0,
                mu_tilde: 0.0,
                processing_cost: 0.0,
                routing: vec![],
            }],
            horizon: 1.0,
        }
    }

    fn uncertain_drain() -> FluidNetwork {
        let mut net = drain();
        net.servers[0].budget = 1.0;
        net.flows[0].mu_tilde = 1.0;
        net
    }

    #[test]
    fn network_files_round_trip() {
        let mut net = drain();
        net.flows[0].routing = vec![Route { to: 1, p: 0.25 }];
        net.buffers[0].input_rate = 0.1;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        write_network(&path, &net).unwrap();
        let back = read_network(&path).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn floats_are_written_with_seventeen_digits() {
        let text = to_json_string(&vec![0.1f64, 0.75, -2.0]).unwrap();
        assert!(text.contains("1.0000000000000001e-1"), "got: {text}");
        assert!(text.contains("7.5000000000000000e-1"), "got: {text}");
        assert!(text.contains("-2.0000000000000000e0"), "got: {text}");
    }

    #[test]
    fn non_finite_floats_become_null_and_fail_re_reading() {
        let text = to_json_string(&vec![f64::NAN]).unwrap();
        assert!(text.contains("null"), "got: {text}");
        assert!(serde_json::from_str::<Vec<f64>>(&text).is_err());
    }

    #[test]
    fn solution_files_round_trip_exactly() {
        let net = drain();
        let data = build_matrices(&net).unwrap();
        let sol = sclp_simplex(&data, data.horizon).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sol.json");
        let file = write_solution(&path, &data, &sol).unwrap();
        assert_eq!(file.objective, sol.objective);
        assert_eq!(file.breakpoints, sol.breakpoints);
        assert_eq!(file.intervals.len(), 2);
        assert!(file.intervals.iter().all(|iv| iv.robust.is_none()));
        // Bit-exact after the disk round trip, not merely close.
        let back = read_solution(&path).unwrap();
        assert_eq!(back, file);
    }

    #[test]
    fn robust_solutions_carry_verified_certificates() {
        let net = uncertain_drain();
        let data = build_matrices(&net).unwrap();
        let sol = robust_sclp_simplex(&data, data.horizon).unwrap();
        let file = solution_to_file(&data, &sol).unwrap();
        assert_eq!(file.objective, sol.objective);
        // Cuts appear once the buffer empties and its row binds; while the
        // state is free there is nothing to price. The drain empties at
        // t = 0.5, so the last interval must carry cuts.
        assert!(!file.intervals.last().unwrap().robust.as_ref().unwrap().cuts.is_empty());
        for interval in &file.intervals {
            let robust = interval.robust.as_ref().expect("robust solve marks every interval");
            let certs = &robust.rc_certificates;
            assert_eq!(certs.beta.len(), data.num_buffers);
            assert_eq!(certs.gamma[0].len(), data.num_flows);
            assert_eq!(certs.p_prime.len(), data.num_buffers);
            assert!(certs.max_residual <= tolerances::MAPPING);
            // The drain's single row: budget 1 covers the only threat, so
            // the budget certificate prices the whole worst case and no
            // overflow is left.
            assert!(certs.gamma.iter().flatten().all(|&g| g.abs() < 1e-12));
        }
        let text = to_json_string(&file).unwrap();
        let back: SolutionFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, file);
    }

    #[test]
    fn audit_files_round_trip() {
        let net = drain();
        let data = build_matrices(&net).unwrap();
        let sol = sclp_simplex(&data, data.horizon).unwrap();
        let report = crate::oracle::audit_feasibility(&data, &sol, 50, 7);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("audit.json");
        let file = write_audit(&path, &report).unwrap();
        assert!(file.passed);
        assert_eq!(file.seed, 7);
        let back = read_audit(&path).unwrap();
        assert_eq!(back, file);
    }

    #[test]
    fn manifests_land_next_to_their_output() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run").join("sol.json");
        std::fs::create_dir_all(out.parent().unwrap()).unwrap();
        let mut manifest = RunManifest::new("solve");
        manifest.inputs.push("net.json".to_string());
        manifest.outputs.push(out.display().to_string());
        manifest.seed = Some(0);
        let written = write_manifest_for(&out, &manifest).unwrap();
        assert_eq!(written, dir.path().join("run").join("sol.json.manifest.json"));
        let back = read_manifest(&written).unwrap();
        assert_eq!(back, manifest);
        assert_eq!(back.version, env!("CARGO_PKG_VERSION"));
        assert_eq!(back.tolerances["audit"], tolerances::AUDIT);
    }

    #[test]
    fn read_errors_carry_the_path() {
        let err = read_network(Path::new("/nonexistent/net.json")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/net.json"), "got: {err}");
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{not json").unwrap();
        let err = read_network(&path).unwrap_err();
        assert!(matches!(err, IoError::Parse { .. }), "got: {err:?}");
        assert!(err.to_string().contains("bad.json"));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // The exact-float convention is load-bearing for diffability:
            // any finite f64 must survive the write-parse cycle unchanged.
            #[test]
            fn formatted_floats_reparse_bit_identically(bits in any::<u64>()) {
                let value = f64::from_bits(bits);
                prop_assume!(value.is_finite());
                let text = to_json_string(&vec![value]).unwrap();
                let back: Vec<f64> = serde_json::from_str(&text).unwrap();
                prop_assert_eq!(back[0].to_bits(), value.to_bits());
            }
        }
    }
}
