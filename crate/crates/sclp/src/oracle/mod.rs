//! Independent cross-checks for the structured solvers: a time-stepping
//! discretization with an interior-point backend, exact enumeration of the
//! worst-case degradation, and a randomized feasibility audit that replays
//! solutions under sampled degradations.
//!
//! Everything here deliberately avoids the machinery it is checking. The
//! discretization restricts controls to a uniform grid and solves the
//! resulting staircase LP by an interior-point method ([`ipm`]), so its
//! value is a lower bound converging to the true optimum from below as the
//! grid refines — no breakpoints, no parametric sweep, no shared code
//! paths. The enumeration maximizes over the degradation polytope by brute
//! force, checking the closed-form greedy selection. The audit integrates
//! realized trajectories forward under many admissible degradations,
//! which is what "robust" has to mean operationally.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::lp::{self, LpError, LpProblem, Sense, VarSign};
use crate::model::SclpData;
use crate::robust::worst_case_xi;
use crate::sclp::SclpSolution;
use crate::tolerances;

mod ipm;

use ipm::StaircaseLp;

/// Hard cap on discretized variables; past this the staircase no longer
/// fits comfortably in memory with its factors.
const MAX_DISCRETE_VARIABLES: usize = 5_000_000;

/// Failure of an oracle computation.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    /// The requested discretization exceeds [`MAX_DISCRETE_VARIABLES`].
    TooLarge {
        /// Variables the discretization would create.
        variables: usize,
        /// The cap.
        limit: usize,
    },
    /// The instance is outside the oracle's scope.
    Unsupported(String),
    /// The interior-point iteration hit its cap without converging.
    IterationLimit {
        /// Iterations performed.
        iterations: usize,
    },
    /// Linear algebra failed beyond recovery.
    Numerical(String),
    /// A server has too many eligible flows to enumerate exactly.
    EnumerationTooBig {
        /// The offending server.
        server: usize,
        /// Its eligible flow count.
        eligible: usize,
    },
    /// The dense LP kernel failed on a reference subproblem.
    Kernel(LpError),
}

impl std::fmt::Display for OracleError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OracleError::TooLarge { variables, limit } => {
                write!(f, "discretization needs {variables} variables, cap is {limit}")
            }
            OracleError::Unsupported(msg) => write!(f, "unsupported problem: {msg}"),
            OracleError::IterationLimit { iterations } => {
                write!(f, "interior point did not converge in {iterations} iterations")
            }
            OracleError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            OracleError::EnumerationTooBig { server, eligible } => write!(
                f,
                "server {server} has {eligible} eligible flows, enumeration caps at 20"
            ),
            OracleError::Kernel(e) => write!(f, "kernel failure: {e}"),
        }
    }
}

impl std::error::Error for OracleError {}

// ---------------------------------------------------------------------
// Discretization
// ---------------------------------------------------------------------

/// A uniform-grid restriction of a problem: controls constant on each of
/// `n_steps` equal steps, states carried between steps as explicit
/// nonnegative variables. Controls constant per step make the states
/// piecewise linear, so grid-point nonnegativity is nonnegativity
/// everywhere and the discretized value is a true lower bound.
#[derive(Debug, Clone)]
pub struct DiscretizedSclp {
    data: SclpData,
    /// Steps in the grid.
    pub n_steps: usize,
    /// Step length.
    pub dt: f64,
    /// Horizon covered (`n_steps · dt`).
    pub horizon: f64,
}

/// Optimal grid solution of a [`DiscretizedSclp`].
#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    /// Objective value (maximization sense).
    pub objective: f64,
    /// Flow rates per step (`n_steps` rows of `J`).
    pub controls: Vec<Vec<f64>>,
    /// States at the grid points `t_1..t_N` (`n_steps` rows of `K`).
    pub states: Vec<Vec<f64>>,
    /// Interior-point iterations used.
    pub iterations: usize,
    /// Final primal residual.
    pub primal_residual: f64,
    /// Final dual residual.
    pub dual_residual: f64,
    /// Final relative duality gap.
    pub gap: f64,
}

/// Restrict a problem to a uniform grid of `n_steps` steps over its
/// horizon.
///
/// The discretization uses the nominal data only (`g_bar`, `c_bar`,
/// `gamma`); degradation-aware reference values come from discretizing the
/// explicit robust counterpart instead. The step objective integrates the
/// time weight exactly: a constant control on step `n` earns
/// `Δt·(T − midpointₙ)` per unit of `c_bar` plus `Δt` per unit of `gamma`.
pub fn discretize(data: &SclpData, n_steps: usize) -> Result<DiscretizedSclp, OracleError> {
    if data.num_extra_states > 0 {
        return Err(OracleError::Unsupported(
            "discretization covers pure network states only".to_string(),
        ));
    }
    if n_steps == 0 {
        return Err(OracleError::Unsupported("discretization needs at least one step".to_string()));
    }
    let horizon = data.horizon;
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(OracleError::Unsupported(format!(
            "horizon must be positive and finite, got {horizon}"
        )));
    }
    let block_vars = data.num_flows + data.num_servers + data.num_buffers;
    let variables = n_steps * block_vars;
    if variables > MAX_DISCRETE_VARIABLES {
        return Err(OracleError::TooLarge { variables, limit: MAX_DISCRETE_VARIABLES });
    }
    Ok(DiscretizedSclp {
        data: data.clone(),
        n_steps,
        dt: horizon / n_steps as f64,
        horizon,
    })
}

impl DiscretizedSclp {
    /// Variables in the staircase LP.
    pub fn num_variables(&self) -> usize {
        self.n_steps * (self.data.num_flows + self.data.num_servers + self.data.num_buffers)
    }

    /// Rows in the staircase LP.
    pub fn num_constraints(&self) -> usize {
        self.n_steps * (self.data.num_buffers + self.data.num_servers)
    }

    /// The step's objective weight on the time-scaled rates: the exact
    /// integral of `(T − t)` across step `n` (0-based).
    pub fn time_weight(&self, n: usize) -> f64 {
        self.dt * (self.horizon - (n as f64 + 0.5) * self.dt)
    }

    fn staircase(&self) -> StaircaseLp {
        let data = &self.data;
        let (kk, ii, jj) = (data.num_buffers, data.num_servers, data.num_flows);
        let bv = jj + ii + kk;
        let br = kk + ii;
        let mut rhs = vec![0.0; self.n_steps * br];
        let mut cost = vec![0.0; self.n_steps * bv];
        for n in 0..self.n_steps {
            for k in 0..kk {
                rhs[n * br + k] =
                    data.input_rate[k] * self.dt + if n == 0 { data.alpha[k] } else { 0.0 };
            }
            for i in 0..ii {
                rhs[n * br + kk + i] = data.b[i];
            }
            let w = self.time_weight(n);
            for j in 0..jj {
                cost[n * bv + j] = -(data.c_bar[j] * w + data.gamma[j] * self.dt);
            }
        }
        StaircaseLp {
            n_steps: self.n_steps,
            num_state: kk,
            num_cap: ii,
            num_flow: jj,
            g_dt: data.g_bar.iter().map(|v| v * self.dt).collect(),
            h: data.h.clone(),
            rhs,
            cost,
        }
    }

    /// Solve the staircase LP by the interior-point backend.
    pub fn solve(&self) -> Result<DiscreteSolution, OracleError> {
        let lp = self.staircase();
        let sol = ipm::solve_staircase(&lp)?;
        let (kk, ii, jj) = (self.data.num_buffers, self.data.num_servers, self.data.num_flows);
        let bv = jj + ii + kk;
        let controls = (0..self.n_steps)
            .map(|n| sol.z[n * bv..n * bv + jj].to_vec())
            .collect();
        let states = (0..self.n_steps)
            .map(|n| sol.z[n * bv + jj + ii..(n + 1) * bv].to_vec())
            .collect();
        Ok(DiscreteSolution {
            objective: -sol.objective_min,
            controls,
            states,
            iterations: sol.iterations,
            primal_residual: sol.primal_residual,
            dual_residual: sol.dual_residual,
            gap: sol.gap,
        })
    }

    /// The same staircase as a dense kernel problem, for cross-validating
    /// the block-structured path on instances small enough to afford it.
    pub fn to_dense_lp(&self) -> LpProblem {
        let lp = self.staircase();
        let bv = lp.block_vars();
        let br = lp.block_rows();
        let (kk, ii, jj) = (lp.num_state, lp.num_cap, lp.num_flow);
        let mut problem = LpProblem::new(self.n_steps * br, Sense::Min);
        problem.rhs = lp.rhs.clone();
        for n in 0..self.n_steps {
            for j in 0..jj {
                let mut entries: Vec<(usize, f64)> = Vec::new();
                for k in 0..kk {
                    if lp.g_dt[k * jj + j] != 0.0 {
                        entries.push((n * br + k, lp.g_dt[k * jj + j]));
                    }
                }
                for i in 0..ii {
                    if lp.h[i * jj + j] != 0.0 {
                        entries.push((n * br + kk + i, lp.h[i * jj + j]));
                    }
                }
                problem.add_col(VarSign::Nonneg, lp.cost[n * bv + j], entries);
            }
            for i in 0..ii {
                problem.add_col(VarSign::Nonneg, 0.0, vec![(n * br + kk + i, 1.0)]);
            }
            for k in 0..kk {
                let mut entries = vec![(n * br + k, 1.0)];
                if n + 1 < self.n_steps {
                    entries.push(((n + 1) * br + k, -1.0));
                }
                problem.add_col(VarSign::Nonneg, 0.0, entries);
            }
        }
        problem
    }
}

// ---------------------------------------------------------------------
// Exact worst-case references
// ---------------------------------------------------------------------

/// Worst-case degradation damage by exhaustive vertex enumeration.
///
/// The budget polytope is a product over servers, so each server is
/// enumerated independently: every subset of its eligible flows fully
/// degraded (within budget), plus the best single fractional extension of
/// the leftover budget. Servers with more than 20 eligible flows error out
/// rather than taking 2²⁰⁺ steps.
pub fn enumerate_inner_max(
    row: &[f64],
    eta: &[f64],
    budgets: &[f64],
    server_of_flow: &[usize],
) -> Result<f64, OracleError> {
    let num_flows = server_of_flow.len();
    let mut total = 0.0;
    for (i, &budget) in budgets.iter().enumerate() {
        if budget <= 0.0 {
            continue;
        }
        let values: Vec<f64> = (0..num_flows)
            .filter(|&j| server_of_flow[j] == i && row[j] * eta[j] > 0.0)
            .map(|j| row[j] * eta[j])
            .collect();
        if values.len() > 20 {
            return Err(OracleError::EnumerationTooBig { server: i, eligible: values.len() });
        }
        let mut best = 0.0f64;
        for mask in 0u32..(1u32 << values.len()) {
            let count = mask.count_ones() as f64;
            if count > budget {
                continue;
            }
            let base: f64 = values
                .iter()
                .enumerate()
                .filter(|(idx, _)| mask & (1 << idx) != 0)
                .map(|(_, v)| v)
                .sum();
            let mut value = base;
            let leftover = (budget - count).min(1.0);
            if leftover > 0.0 {
                let extension = values
                    .iter()
                    .enumerate()
                    .filter(|(idx, _)| mask & (1 << idx) == 0)
                    .map(|(_, &v)| v)
                    .fold(0.0f64, f64::max);
                value += leftover * extension;
            }
            best = best.max(value);
        }
        total += best;
    }
    Ok(total)
}

/// Worst-case degradation damage as a dense LP over the budget polytope.
pub fn inner_max_lp(
    row: &[f64],
    eta: &[f64],
    budgets: &[f64],
    server_of_flow: &[usize],
) -> Result<f64, OracleError> {
    let num_flows = server_of_flow.len();
    let num_servers = budgets.len();
    let mut problem = LpProblem::new(num_flows + num_servers, Sense::Max);
    for j in 0..num_flows {
        problem.rhs[j] = 1.0;
    }
    for i in 0..num_servers {
        problem.rhs[num_flows + i] = budgets[i];
    }
    for j in 0..num_flows {
        problem.add_col(
            VarSign::Nonneg,
            row[j] * eta[j],
            vec![(j, 1.0), (num_flows + server_of_flow[j], 1.0)],
        );
    }
    for j in 0..num_flows {
        problem.add_col(VarSign::Nonneg, 0.0, vec![(j, 1.0)]);
    }
    for i in 0..num_servers {
        problem.add_col(VarSign::Nonneg, 0.0, vec![(num_flows + i, 1.0)]);
    }
    let sol = lp::solve(&problem).map_err(OracleError::Kernel)?;
    Ok(sol.objective)
}

// ---------------------------------------------------------------------
// Feasibility audit
// ---------------------------------------------------------------------

/// Where and how badly a replayed solution went infeasible.
#[derive(Debug, Clone, PartialEq)]
pub struct WorstSample {
    /// Sample index (determines its degradation deterministically).
    pub index: usize,
    /// Time of the violation.
    pub time: f64,
    /// Buffer that went negative.
    pub state: usize,
    /// Depth of the violation.
    pub violation: f64,
}

/// Outcome of replaying a solution under sampled degradations.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    /// Samples drawn.
    pub n_samples: usize,
    /// Seed that reproduces the draw.
    pub seed: u64,
    /// Deepest buffer-negativity across all samples and times.
    pub max_state_violation: f64,
    /// Deepest capacity overrun of the control plan (degradation-free).
    pub max_capacity_violation: f64,
    /// Deepest negativity per buffer.
    pub per_state_violation: Vec<f64>,
    /// The worst offending sample, if any violation occurred.
    pub worst: Option<WorstSample>,
    /// Degradation-free replay against the stored trajectory: for a
    /// nominal solution the largest absolute mismatch, for a
    /// degradation-aware solution the largest breach of the stored
    /// guarantee (stored value above the replayed one).
    pub nominal_deviation: f64,
    /// Largest breach of the stored guarantee across all samples — a
    /// degradation-aware solution's stored states must lower-bound every
    /// admissible replay. Zero for nominal solutions.
    pub guarantee_violation: f64,
    /// Whether every check stayed within tolerance.
    pub passed: bool,
}

/// Replay a solution's controls under sampled admissible degradations and
/// measure feasibility.
///
/// Degradations are piecewise constant on the solution's own intervals.
/// Per sample index `s`, `s % 10` picks the class: 0–4 draw a random
/// vertex of each server's budget polytope per interval, 5 injects the
/// closed-form worst case against one buffer's balance row (the buffer
/// rotating with `s / 10`), and 6–9 draw box-uniform points rescaled into
/// the budgets. Replayed states evolve by
/// `ẋ = a − (Ḡ + G̃∘Ξ)u`, linear per interval, so checking grid points is
/// exact. The degradation-free replay must reproduce a nominal solution's
/// stored trajectory to working precision, and stay above a
/// degradation-aware solution's stored guarantee everywhere — as must
/// every sampled replay.
pub fn audit_feasibility(
    data: &SclpData,
    solution: &SclpSolution,
    n_samples: usize,
    seed: u64,
) -> AuditReport {
    let kk = data.num_buffers;
    let jj = data.num_flows;
    let intervals = solution.sequence.intervals.len();
    let robust = solution.sequence.intervals.iter().any(|b| b.robust.is_some());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Capacity is degradation-free: check the control plan once.
    let mut max_capacity_violation = 0.0f64;
    for basis in &solution.sequence.intervals {
        for i in 0..data.num_servers {
            let load: f64 = (0..jj).map(|j| data.h_at(i, j) * basis.controls[j]).sum();
            max_capacity_violation = max_capacity_violation.max(load - data.b[i]);
        }
    }

    // Degradation-free replay against the stored trajectory.
    let mut nominal_deviation = 0.0f64;
    {
        let zeros = vec![vec![0.0; jj]; intervals];
        let replay = integrate(data, solution, &zeros);
        for n in 0..=intervals {
            for k in 0..kk {
                let err = solution.states[n][k] - replay[n][k];
                nominal_deviation = nominal_deviation.max(if robust { err } else { err.abs() });
            }
        }
    }

    let mut max_state_violation = 0.0f64;
    let mut guarantee_violation = 0.0f64;
    let mut per_state_violation = vec![0.0f64; kk];
    let mut worst: Option<WorstSample> = None;

    for index in 0..n_samples {
        let xi = sample_degradation(data, solution, index, &mut rng);
        let replay = integrate(data, solution, &xi);
        for n in 0..=intervals {
            for k in 0..kk {
                let violation = -replay[n][k];
                if violation > per_state_violation[k] {
                    per_state_violation[k] = violation;
                }
                if violation > max_state_violation {
                    max_state_violation = violation;
                    worst = Some(WorstSample {
                        index,
                        time: solution.breakpoints[n],
                        state: k,
                        violation,
                    });
                }
                if robust {
                    guarantee_violation =
                        guarantee_violation.max(solution.states[n][k] - replay[n][k]);
                }
            }
        }
    }

    let passed = max_state_violation <= tolerances::AUDIT
        && max_capacity_violation <= tolerances::AUDIT
        && guarantee_violation <= tolerances::AUDIT
        && nominal_deviation <= if robust { tolerances::AUDIT } else { tolerances::RESIDUAL };
    AuditReport {
        n_samples,
        seed,
        max_state_violation,
        max_capacity_violation,
        per_state_violation,
        worst,
        nominal_deviation,
        guarantee_violation,
        passed,
    }
}

/// States at every breakpoint under a per-interval degradation.
fn integrate(data: &SclpData, solution: &SclpSolution, xi: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let kk = data.num_buffers;
    let jj = data.num_flows;
    let mut states = Vec::with_capacity(solution.lengths.len() + 1);
    let mut current = data.alpha.clone();
    states.push(current.clone());
    for (n, basis) in solution.sequence.intervals.iter().enumerate() {
        let tau = solution.lengths[n];
        for k in 0..kk {
            let mut slope = data.input_rate[k];
            for j in 0..jj {
                slope -= data.g_realized_at(k, j, xi[n][j]) * basis.controls[j];
            }
            current[k] += slope * tau;
        }
        states.push(current.clone());
    }
    states
}

/// One sample's degradation, per interval, by sample class.
fn sample_degradation(
    data: &SclpData,
    solution: &SclpSolution,
    index: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<f64>> {
    let jj = data.num_flows;
    let kk = data.num_buffers;
    let intervals = solution.sequence.intervals.len();
    let mut xi = vec![vec![0.0; jj]; intervals];
    match index % 10 {
        0..=4 => {
            // Random vertex of each server's budget polytope per interval.
            for step in xi.iter_mut() {
                for i in 0..data.num_servers {
                    let mut flows = data.flows_on_server(i);
                    flows.shuffle(rng);
                    let budget = data.budgets[i];
                    let whole = budget.floor() as usize;
                    let fraction = budget - budget.floor();
                    for (rank, &j) in flows.iter().enumerate() {
                        if rank < whole {
                            step[j] = 1.0;
                        } else if rank == whole && fraction > 0.0 {
                            step[j] = fraction;
                        }
                    }
                }
            }
        }
        5 => {
            // The adversary the solver claims to guard against: the
            // closed-form worst case for one buffer's balance row.
            let target = (index / 10) % kk;
            let row = &data.g_tilde[target * jj..(target + 1) * jj];
            for (step, basis) in xi.iter_mut().zip(&solution.sequence.intervals) {
                *step = worst_case_xi(row, &basis.controls[..jj], data);
            }
        }
        _ => {
            // Box-uniform, rescaled into each server's budget.
            for step in xi.iter_mut() {
                for v in step.iter_mut() {
                    *v = rng.gen_range(0.0..1.0);
                }
                for i in 0..data.num_servers {
                    let flows = data.flows_on_server(i);
                    let total: f64 = flows.iter().map(|&j| step[j]).sum();
                    if total > data.budgets[i] {
                        let scale = if total > 0.0 { data.budgets[i] / total } else { 0.0 };
                        for &j in &flows {
                            step[j] *= scale;
                        }
                    }
                }
            }
        }
    }
    xi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_matrices, Buffer, Flow, FluidNetwork, Route, Server};
    use crate::robust::{robust_sclp_simplex, worst_case_selection, degradation_value};
    use crate::sclp::sclp_simplex;

    fn drain(horizon: f64) -> SclpData {
        let network = FluidNetwork {
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
            horizon,
        };
        build_matrices(&network).expect("fixture is valid")
    }

    fn uncertain_drain(budget: f64) -> SclpData {
        let mut data = drain(1.0);
        data.mu_tilde = vec![1.0];
        data.g_tilde = vec![-1.0];
        data.c_tilde = vec![1.0];
        data.budgets = vec![budget];
        data
    }

    fn uncertain_tandem() -> SclpData {
        let network = FluidNetwork {
            servers: vec![Server { id: 1, budget: 1.0 }, Server { id: 2, budget: 0.0 }],
            buffers: vec![
                Buffer { id: 1, alpha: 1.0, input_rate: 0.0, holding_cost: 2.0 },
                Buffer { id: 2, alpha: 0.0, input_rate: 0.0, holding_cost: 1.0 },
            ],
            flows: vec![
                Flow {
                    id: 1,
                    server: 1,
                    buffer: 1,
                    mu_bar: 2.0,
                    mu_tilde: 1.0,
                    processing_cost: 0.0,
                    routing: vec![Route { to: 2, p: 1.0 }],
                },
                Flow {
                    id: 2,
                    server: 2,
                    buffer: 2,
                    mu_bar: 2.0,
                    mu_tilde: 0.0,
                    processing_cost: 0.0,
                    routing: vec![],
                },
            ],
            horizon: 1.0,
        };
        build_matrices(&network).expect("fixture is valid")
    }

    #[test]
    fn drain_grid_hits_the_breakpoint_exactly() {
        // The optimal switch at t = 0.5 lies on every even grid, so the
        // restriction is exact up to solver tolerance.
        let value = discretize(&drain(1.0), 10).unwrap().solve().unwrap().objective;
        assert!((value - 0.75).abs() < 1e-7, "{value}");
    }

    #[test]
    fn single_step_short_horizon_is_exact() {
        // One step over [0, 0.5]: weight = 0.5·(0.5 − 0.25), drain at the
        // capacity bound u = 1 earns 2·0.125 = 0.25 — the sweep's value.
        let disc = discretize(&drain(0.5), 1).unwrap();
        let value = disc.solve().unwrap().objective;
        assert!((value - 0.25).abs() < 1e-8, "{value}");
    }

    #[test]
    fn grid_values_increase_under_refinement_toward_the_sweep() {
        let data = drain(1.0);
        let exact = sclp_simplex(&data, 1.0).unwrap().objective;
        let mut previous = f64::NEG_INFINITY;
        for steps in [5, 10, 20, 40] {
            let value = discretize(&data, steps).unwrap().solve().unwrap().objective;
            assert!(value >= previous - 1e-9, "refinement lost value: {value} < {previous}");
            assert!(value <= exact + 1e-7, "restriction above the optimum: {value} > {exact}");
            previous = value;
        }
        assert!((previous - exact).abs() < 1e-6);
    }

    #[test]
    fn staircase_matches_the_dense_kernel() {
        let data = drain(1.0);
        for steps in [1, 3, 7] {
            let disc = discretize(&data, steps).unwrap();
            let block = disc.solve().unwrap().objective;
            let dense = lp::solve(&disc.to_dense_lp()).expect("dense solves");
            assert!(
                (block + dense.objective).abs() < 1e-7,
                "steps {steps}: block {block} vs dense {}",
                -dense.objective
            );
        }
    }

    #[test]
    fn tandem_discretization_tracks_the_sweep() {
        let network = FluidNetwork {
            servers: vec![Server { id: 1, budget: 0.0 }, Server { id: 2, budget: 0.0 }],
            buffers: vec![
                Buffer { id: 1, alpha: 1.0, input_rate: 0.0, holding_cost: 2.0 },
                Buffer { id: 2, alpha: 0.0, input_rate: 0.0, holding_cost: 1.0 },
            ],
            flows: vec![
                Flow {
                    id: 1,
                    server: 1,
                    buffer: 1,
                    mu_bar: 2.0,
                    mu_tilde: 0.0,
                    processing_cost: 0.0,
                    routing: vec![Route { to: 2, p: 1.0 }],
                },
                Flow {
                    id: 2,
                    server: 2,
                    buffer: 2,
                    mu_bar: 2.0,
                    mu_tilde: 0.0,
                    processing_cost: 0.0,
                    routing: vec![],
                },
            ],
            horizon: 1.0,
        };
        let data = build_matrices(&network).unwrap();
        let exact = sclp_simplex(&data, 1.0).unwrap().objective;
        let value = discretize(&data, 1000).unwrap().solve().unwrap().objective;
        assert!((value - exact).abs() <= 1e-3 * exact.abs(), "grid {value} vs sweep {exact}");
    }

    #[test]
    fn dimension_guard_rejects_oversized_grids() {
        match discretize(&drain(1.0), 2_000_000) {
            Err(OracleError::TooLarge { variables, .. }) => assert_eq!(variables, 6_000_000),
            other => panic!("expected TooLarge, got {other:?}"),
        }
    }

    #[test]
    fn enumeration_greedy_and_lp_agree() {
        use rand::prelude::*;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..200 {
            let num_servers = rng.gen_range(1..=3usize);
            let num_flows = rng.gen_range(1..=8usize);
            let server_of_flow: Vec<usize> =
                (0..num_flows).map(|_| rng.gen_range(0..num_servers)).collect();
            let budgets: Vec<f64> = (0..num_servers)
                .map(|_| match rng.gen_range(0..4) {
                    0 => 0.0,
                    1 => rng.gen_range(0..=num_flows) as f64,
                    _ => rng.gen_range(0.0..num_flows as f64),
                })
                .collect();
            let row: Vec<f64> = (0..num_flows).map(|_| rng.gen_range(-2.0..3.0)).collect();
            let eta: Vec<f64> = (0..num_flows).map(|_| rng.gen_range(0.0..2.0)).collect();
            let xi = worst_case_selection(&row, &eta, &budgets, &server_of_flow);
            let greedy = degradation_value(&row, &eta, &xi);
            let enumerated = enumerate_inner_max(&row, &eta, &budgets, &server_of_flow).unwrap();
            let lp_value = inner_max_lp(&row, &eta, &budgets, &server_of_flow).unwrap();
            assert!(
                (greedy - enumerated).abs() < 1e-12,
                "trial {trial}: greedy {greedy} vs enumeration {enumerated}"
            );
            assert!(
                (greedy - lp_value).abs() < 1e-9,
                "trial {trial}: greedy {greedy} vs LP {lp_value}"
            );
        }
    }

    #[test]
    fn enumeration_caps_eligible_flows() {
        let row = vec![1.0; 21];
        let eta = vec![1.0; 21];
        let server_of_flow = vec![0usize; 21];
        match enumerate_inner_max(&row, &eta, &[3.0], &server_of_flow) {
            Err(OracleError::EnumerationTooBig { server: 0, eligible: 21 }) => {}
            other => panic!("expected the enumeration cap, got {other:?}"),
        }
    }

    #[test]
    fn enumeration_edge_budgets() {
        // Budget covering everything degrades everything; zero budget
        // degrades nothing.
        let row = [2.0, 1.0];
        let eta = [1.0, 1.0];
        let all = enumerate_inner_max(&row, &eta, &[2.0], &[0, 0]).unwrap();
        assert!((all - 3.0).abs() < 1e-12);
        let none = enumerate_inner_max(&row, &eta, &[0.0], &[0, 0]).unwrap();
        assert_eq!(none, 0.0);
    }

    #[test]
    fn audit_accepts_a_certain_solution() {
        let data = drain(1.0);
        let solution = sclp_simplex(&data, 1.0).unwrap();
        let report = audit_feasibility(&data, &solution, 200, 42);
        assert!(report.passed, "{report:?}");
        assert!(report.max_state_violation <= 1e-12);
        assert!(report.nominal_deviation <= 1e-12);
        assert!(report.worst.is_none());
    }

    #[test]
    fn audit_accepts_a_robust_solution() {
        let data = uncertain_drain(1.0);
        let solution = robust_sclp_simplex(&data, 1.0).unwrap();
        let report = audit_feasibility(&data, &solution, 500, 7);
        assert!(report.passed, "{report:?}");
        assert!(report.guarantee_violation <= tolerances::AUDIT);
    }

    #[test]
    fn audit_flags_a_nominal_plan_under_real_uncertainty() {
        // Solving the uncertain tandem nominally drains upstream at full
        // rate and schedules downstream against the nominal inflow; the
        // worst admissible degradation starves the downstream buffer to
        // −0.5 by the first breakpoint, and the injected-worst sample
        // class finds exactly that.
        let data = uncertain_tandem();
        let solution = sclp_simplex(&data, 1.0).unwrap();
        let report = audit_feasibility(&data, &solution, 100, 3);
        assert!(!report.passed);
        assert!(
            (report.max_state_violation - 0.5).abs() < 1e-9,
            "expected the half-unit shortfall, got {}",
            report.max_state_violation
        );
        let worst = report.worst.expect("a violation was recorded");
        assert_eq!(worst.state, 1);
        assert!((worst.time - 0.5).abs() < 1e-9);
    }

    #[test]
    fn audit_is_reproducible() {
        let data = uncertain_tandem();
        let solution = sclp_simplex(&data, 1.0).unwrap();
        let a = audit_feasibility(&data, &solution, 50, 9);
        let b = audit_feasibility(&data, &solution, 50, 9);
        assert_eq!(a, b);
        let c = audit_feasibility(&data, &solution, 50, 10);
        assert_eq!(a.max_state_violation, c.max_state_violation); // class 5 is seed-free
    }
}
