//! The revised simplex method over [`BasisFactors`]: two-phase primal
//! simplex, a dual simplex for re-optimizing after row addition, warm
//! starts from caller bases, and explicit basis exchange.
//!
//! Everything is solved internally as a maximization; `Min` problems are
//! negated on the way in and their duals negated on the way out. Nonbasic
//! variables always sit at zero (there are no finite bounds other than
//! sign restrictions), free variables may enter in either direction, and
//! `Zero`-sign variables never enter at all.

use super::dense::BasisFactors;
use super::{Basis, KernelTolerances, LpError, LpProblem, LpSolution, Sense, VarSign};

/// Degenerate-step run length (relative to row count) after which pricing
/// switches to Bland's rule until a nondegenerate step occurs.
const BLAND_TRIGGER_FACTOR: usize = 3;

/// A simplex solver that owns its problem and keeps factorized state
/// between calls, so cutting-plane loops can add rows and re-optimize
/// without starting over.
#[derive(Debug)]
pub struct SimplexSolver {
    problem: LpProblem,
    tol: KernelTolerances,
    /// Internal (maximization) objective for structural columns.
    obj: Vec<f64>,
    state: Option<State>,
}

#[derive(Debug)]
struct State {
    /// Basic column per row position. Indices at or above
    /// `problem.num_cols()` denote artificials (phase 1 only).
    basic: Vec<usize>,
    /// Column → row position, structural columns then artificials.
    position: Vec<Option<usize>>,
    /// Signs of artificial columns (±1), empty outside phase 1.
    art_sign: Vec<f64>,
    factors: BasisFactors,
    /// Basic variable values per row position.
    x_basic: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    /// Maximize minus the sum of artificials.
    Feasibility,
    /// Maximize the internal objective.
    Optimality,
}

impl SimplexSolver {
    /// Wrap a problem; fails fast on structurally invalid input.
    pub fn new(problem: LpProblem) -> Result<Self, LpError> {
        problem.validate()?;
        let obj = match problem.sense {
            Sense::Max => problem.objective.clone(),
            Sense::Min => problem.objective.iter().map(|c| -c).collect(),
        };
        Ok(Self { problem, tol: KernelTolerances::default(), obj, state: None })
    }

    /// The owned problem (reflecting any rows added so far).
    pub fn problem(&self) -> &LpProblem {
        &self.problem
    }

    /// Kernel tolerances in effect.
    pub fn tolerances(&self) -> KernelTolerances {
        self.tol
    }

    /// Solve to optimality, reusing factorized state when present.
    ///
    /// A fresh solver runs the two-phase method; after [`Self::add_row`]
    /// the dual simplex repairs primal feasibility; a stale or absent
    /// state falls back to a cold start automatically.
    pub fn solve(&mut self) -> Result<LpSolution, LpError> {
        if self.state.is_none() {
            self.cold_start()?;
        } else if !self.reoptimize()? {
            self.cold_start()?;
        }
        self.run_primal(Phase::Optimality)?;
        self.extract()
    }

    /// Solve starting from a caller-supplied basis, falling back to a cold
    /// start when the basis is unusable (wrong size, singular, or too far
    /// from feasibility in both primal and dual).
    pub fn solve_from(&mut self, basis: &Basis) -> Result<LpSolution, LpError> {
        if !self.try_install(basis) {
            self.state = None;
        }
        self.solve()
    }

    /// Append the inequality `row·x ≤ rhs` as an equality with a fresh
    /// nonnegative slack, extending the current basis with that slack.
    /// Returns the slack's column index. Call [`Self::solve`] afterwards to
    /// re-optimize (the dual simplex path).
    pub fn add_row(&mut self, entries: &[(usize, f64)], rhs: f64) -> usize {
        let new_row = self.problem.num_rows;
        self.problem.num_rows += 1;
        self.problem.rhs.push(rhs);
        for &(col, val) in entries {
            assert!(col < self.problem.num_cols(), "cut references unknown column {col}");
            assert!(val.is_finite(), "cut coefficient must be finite");
            self.problem.cols[col].push((new_row, val));
        }
        let slack = self.problem.add_col(VarSign::Nonneg, 0.0, vec![(new_row, 1.0)]);
        self.obj.push(0.0);
        if let Some(state) = &mut self.state {
            // The slack occupies the new row; its dual starts at zero so
            // existing reduced costs (hence dual feasibility) are preserved.
            state.basic.push(slack);
            state.position.push(None); // slot for the slack column
            state.position[slack] = Some(new_row);
            state.x_basic.push(0.0);
        }
        // Dimensions changed: force a refactorization on next use.
        if let Some(state) = &mut self.state {
            if Self::refactor_state(&self.problem, state).is_err() {
                self.state = None;
            }
        }
        slack
    }

    /// Perform one explicit basis exchange: `entering` replaces `leaving`.
    ///
    /// Returns the resulting *basic* solution (duals included) without any
    /// optimality claim; fails if the exchange is singular. This is the
    /// primitive used to verify adjacency of neighboring interval bases.
    pub fn pivot_exchange(&mut self, entering: usize, leaving: usize) -> Result<LpSolution, LpError> {
        if self.state.is_none() {
            self.cold_start()?;
            self.run_primal(Phase::Optimality)?;
        }
        let n = self.problem.num_cols();
        assert!(entering < n, "entering column out of range");
        assert!(
            self.problem.signs[entering] != VarSign::Zero,
            "a zero-sign variable cannot enter the basis"
        );
        let state = self.state.as_mut().expect("state installed above");
        let Some(r) = state.position[leaving] else {
            return Err(LpError::InvalidProblem(format!("leaving column {leaving} is not basic")));
        };
        if state.position[entering].is_some() {
            return Err(LpError::InvalidProblem(format!("entering column {entering} is already basic")));
        }
        let mut d = vec![0.0; self.problem.num_rows];
        self.problem.scatter_col(entering, 1.0, &mut d);
        state.factors.ftran(&mut d);
        if d[r].abs() < self.tol.pivot {
            return Err(LpError::Singular(super::SingularBasis { step: r }));
        }
        state.position[leaving] = None;
        state.position[entering] = Some(r);
        state.basic[r] = entering;
        Self::refactor_state(&self.problem, state)?;
        self.extract()
    }

    /// The current basis, if a solve has established one.
    pub fn basis(&self) -> Option<Basis> {
        self.state.as_ref().map(|s| Basis { basic: s.basic.clone() })
    }

    // ------------------------------------------------------------------
    // State management
    // ------------------------------------------------------------------

    /// Rebuild factors and basic values for the current basis.
    fn refactor_state(problem: &LpProblem, state: &mut State) -> Result<(), LpError> {
        let m = problem.num_rows;
        let n = problem.num_cols();
        let mut columns = Vec::with_capacity(m);
        for &col in &state.basic {
            let mut dense = vec![0.0; m];
            if col < n {
                problem.scatter_col(col, 1.0, &mut dense);
            } else {
                dense[col - n] = state.art_sign[col - n];
            }
            columns.push(dense);
        }
        state.factors = BasisFactors::factor(m, &columns)?;
        let mut x = problem.rhs.clone();
        state.factors.ftran(&mut x);
        state.x_basic = x;
        Ok(())
    }

    /// Try to adopt a caller basis; false means "fall back to cold start".
    fn try_install(&mut self, basis: &Basis) -> bool {
        let m = self.problem.num_rows;
        let n = self.problem.num_cols();
        if basis.basic.len() != m {
            return false;
        }
        let mut position = vec![None; n];
        for (i, &col) in basis.basic.iter().enumerate() {
            if col >= n || position[col].is_some() {
                return false;
            }
            position[col] = Some(i);
        }
        let mut state = State {
            basic: basis.basic.clone(),
            position,
            art_sign: Vec::new(),
            factors: match BasisFactors::factor(1, &[vec![1.0]]) {
                Ok(f) => f,
                Err(_) => unreachable!("1x1 identity factors"),
            },
            x_basic: Vec::new(),
        };
        if Self::refactor_state(&self.problem, &mut state).is_err() {
            return false;
        }
        self.state = Some(state);
        // Zero-sign columns may not stay basic; pivot them out at value zero
        // or give up on the warm start.
        self.force_out_zero_basics()
    }

    /// Prepare existing state for re-optimization. Returns false when the
    /// state is unusable and the caller should cold start.
    fn reoptimize(&mut self) -> Result<bool, LpError> {
        {
            let Some(state) = &mut self.state else { return Ok(false) };
            if !state.art_sign.is_empty() || state.basic.len() != self.problem.num_rows {
                return Ok(false);
            }
            if Self::refactor_state(&self.problem, state).is_err() {
                return Ok(false);
            }
        }
        if !self.force_out_zero_basics() {
            return Ok(false);
        }
        let state = self.state.as_ref().expect("state checked above");
        let primal_ok = self.primal_feasible(state);
        if primal_ok {
            return Ok(true);
        }
        if self.dual_feasible(state) {
            match self.run_dual() {
                Ok(()) => Ok(true),
                // Infeasibility proven by the dual simplex is a real answer,
                // not a stale-state artifact; propagate it.
                Err(LpError::Infeasible) => Err(LpError::Infeasible),
                Err(_) => Ok(false),
            }
        } else {
            Ok(false)
        }
    }

    fn primal_feasible(&self, state: &State) -> bool {
        let scale = 1.0 + self.problem.rhs.iter().map(|v| v.abs()).sum::<f64>();
        state.basic.iter().zip(&state.x_basic).all(|(&col, &value)| {
            match self.sign_of(col, state) {
                VarSign::Nonneg => value >= -self.tol.feas * scale,
                VarSign::Zero => value.abs() <= self.tol.feas * scale,
                VarSign::Free => true,
            }
        })
    }

    fn dual_feasible(&self, state: &State) -> bool {
        let y = self.duals_internal(state, Phase::Optimality);
        let n = self.problem.num_cols();
        for j in 0..n {
            if state.position[j].is_some() {
                continue;
            }
            let rc = self.obj[j] - self.problem.col_dot(j, &y);
            match self.problem.signs[j] {
                VarSign::Nonneg => {
                    if rc > self.tol.opt {
                        return false;
                    }
                }
                VarSign::Free => {
                    if rc.abs() > self.tol.opt {
                        return false;
                    }
                }
                VarSign::Zero => {}
            }
        }
        true
    }

    fn sign_of(&self, col: usize, state: &State) -> VarSign {
        if col < self.problem.num_cols() {
            self.problem.signs[col]
        } else {
            // Artificials act as zero-pinned once feasibility is reached;
            // during phase 1 they are ordinary nonnegative columns.
            if state.art_sign.is_empty() {
                VarSign::Zero
            } else {
                VarSign::Nonneg
            }
        }
    }

    /// Row duals for the given phase objective: `y = B⁻ᵀ c_B`.
    fn duals_internal(&self, state: &State, phase: Phase) -> Vec<f64> {
        let mut y: Vec<f64> = state.basic.iter().map(|&col| self.phase_obj(col, phase)).collect();
        state.factors.btran(&mut y);
        y
    }

    fn phase_obj(&self, col: usize, phase: Phase) -> f64 {
        let n = self.problem.num_cols();
        match phase {
            Phase::Feasibility => {
                if col < n {
                    0.0
                } else {
                    -1.0
                }
            }
            Phase::Optimality => {
                if col < n {
                    self.obj[col]
                } else {
                    0.0
                }
            }
        }
    }

    /// FTRAN of (virtual) column `col` through the current factors.
    fn ftran_col(&self, state: &State, col: usize) -> Vec<f64> {
        let m = self.problem.num_rows;
        let n = self.problem.num_cols();
        let mut d = vec![0.0; m];
        if col < n {
            self.problem.scatter_col(col, 1.0, &mut d);
        } else {
            d[col - n] = state.art_sign[col - n];
        }
        state.factors.ftran(&mut d);
        d
    }

    fn col_dot_virtual(&self, state: &State, col: usize, y: &[f64]) -> f64 {
        let n = self.problem.num_cols();
        if col < n {
            self.problem.col_dot(col, y)
        } else {
            state.art_sign[col - n] * y[col - n]
        }
    }

    // ------------------------------------------------------------------
    // Cold start (two-phase)
    // ------------------------------------------------------------------

    fn cold_start(&mut self) -> Result<(), LpError> {
        let m = self.problem.num_rows;
        let n = self.problem.num_cols();
        let art_sign: Vec<f64> =
            self.problem.rhs.iter().map(|&b| if b >= 0.0 { 1.0 } else { -1.0 }).collect();
        let basic: Vec<usize> = (n..n + m).collect();
        let mut position = vec![None; n + m];
        for (i, &col) in basic.iter().enumerate() {
            position[col] = Some(i);
        }
        let mut state = State {
            basic,
            position,
            art_sign,
            factors: BasisFactors::factor(1, &[vec![1.0]]).expect("identity factors"),
            x_basic: Vec::new(),
        };
        Self::refactor_state(&self.problem, &mut state)?;
        self.state = Some(state);

        self.run_primal(Phase::Feasibility)?;

        // Reject if artificial mass remains.
        let state = self.state.as_ref().expect("state set above");
        let scale = 1.0 + self.problem.rhs.iter().map(|v| v.abs()).sum::<f64>();
        let art_total: f64 = state
            .basic
            .iter()
            .zip(&state.x_basic)
            .filter(|(&col, _)| col >= n)
            .map(|(_, &v)| v.abs())
            .sum();
        if art_total > self.tol.feas * scale {
            return Err(LpError::Infeasible);
        }

        self.evict_artificials()?;
        Ok(())
    }

    /// Pivot every remaining basic artificial out at value zero, then drop
    /// the artificial block entirely.
    fn evict_artificials(&mut self) -> Result<(), LpError> {
        let n = self.problem.num_cols();
        loop {
            let state = self.state.as_ref().expect("solver state");
            let Some(r) = state.basic.iter().position(|&col| col >= n) else { break };
            // Row r of B⁻¹A: btran of the unit vector, dotted with columns.
            let mut rho = vec![0.0; self.problem.num_rows];
            rho[r] = 1.0;
            state.factors.btran(&mut rho);
            // Prefer sign-restricted structural columns; accept Zero-sign
            // ones (they stay pinned at value zero) before declaring the
            // row redundant.
            let mut choice: Option<usize> = None;
            let mut choice_zero: Option<usize> = None;
            for j in 0..n {
                if state.position[j].is_some() {
                    continue;
                }
                let alpha = self.problem.col_dot(j, &rho);
                if alpha.abs() < self.tol.pivot {
                    continue;
                }
                if self.problem.signs[j] == VarSign::Zero {
                    if choice_zero.is_none() {
                        choice_zero = Some(j);
                    }
                } else if choice.is_none() {
                    choice = Some(j);
                }
            }
            let Some(entering) = choice.or(choice_zero) else {
                return Err(LpError::RankDeficient { row: r });
            };
            let state = self.state.as_mut().expect("solver state");
            let leaving = state.basic[r];
            let d = {
                let s = &*state;
                let mut dense = vec![0.0; self.problem.num_rows];
                self.problem.scatter_col(entering, 1.0, &mut dense);
                s.factors.ftran(&mut dense);
                dense
            };
            if d[r].abs() < self.tol.pivot {
                return Err(LpError::RankDeficient { row: r });
            }
            state.position[leaving] = None;
            state.position[entering] = Some(r);
            state.basic[r] = entering;
            state.factors.push_update(r, d)?;
        }
        // Drop the artificial block and renormalize state.
        let state = self.state.as_mut().expect("solver state");
        state.art_sign.clear();
        state.position.truncate(n);
        Self::refactor_state(&self.problem, state)?;
        Ok(())
    }

    /// Pivot Zero-sign basic columns out (at value zero). Returns false if
    /// any such column admits no exchange, meaning the basis is unusable.
    fn force_out_zero_basics(&mut self) -> bool {
        let n = self.problem.num_cols();
        loop {
            let state = self.state.as_ref().expect("solver state");
            let Some(r) = state
                .basic
                .iter()
                .position(|&col| col < n && self.problem.signs[col] == VarSign::Zero)
            else {
                return true;
            };
            // The column must currently sit (numerically) at zero,
            // otherwise the basis does not satisfy the pin at all.
            let scale = 1.0 + self.problem.rhs.iter().map(|v| v.abs()).sum::<f64>();
            if state.x_basic[r].abs() > self.tol.feas * scale {
                return false;
            }
            let mut rho = vec![0.0; self.problem.num_rows];
            rho[r] = 1.0;
            state.factors.btran(&mut rho);
            let mut entering = None;
            for j in 0..n {
                if state.position[j].is_some() || self.problem.signs[j] == VarSign::Zero {
                    continue;
                }
                if self.problem.col_dot(j, &rho).abs() >= self.tol.pivot {
                    entering = Some(j);
                    break;
                }
            }
            let Some(entering) = entering else { return false };
            let state = self.state.as_mut().expect("solver state");
            let leaving = state.basic[r];
            let mut d = vec![0.0; self.problem.num_rows];
            self.problem.scatter_col(entering, 1.0, &mut d);
            state.factors.ftran(&mut d);
            if d[r].abs() < self.tol.pivot {
                return false;
            }
            state.position[leaving] = None;
            state.position[entering] = Some(r);
            state.basic[r] = entering;
            if state.factors.push_update(r, d).is_err() {
                return false;
            }
            // The exchange happens at step length zero, so x_basic is
            // unchanged up to the entering slot.
            state.x_basic[r] = 0.0;
        }
    }

    // ------------------------------------------------------------------
    // Primal simplex
    // ------------------------------------------------------------------

    fn iteration_cap(&self) -> usize {
        10_000 + 200 * (self.problem.num_rows + self.problem.num_cols())
    }

    fn run_primal(&mut self, phase: Phase) -> Result<(), LpError> {
        let m = self.problem.num_rows;
        let cap = self.iteration_cap();
        let mut iterations = 0usize;
        let mut degenerate_run = 0usize;
        let mut bland = false;
        loop {
            iterations += 1;
            if iterations > cap {
                return Err(LpError::IterationLimit { iterations });
            }
            self.maybe_refactor()?;
            let state = self.state.as_ref().expect("solver state");
            let y = self.duals_internal(state, phase);

            // Pricing: most positive |rc| among admissible columns
            // (Dantzig), or lowest index when Bland's rule is active.
            let n_total = self.problem.num_cols() + state.art_sign.len();
            let mut entering: Option<(usize, f64, f64)> = None; // (col, |rc|, direction)
            for j in 0..n_total {
                if state.position[j].is_some() {
                    continue;
                }
                // Artificials never re-enter; Zero columns never enter.
                if j >= self.problem.num_cols() {
                    continue;
                }
                if self.problem.signs[j] == VarSign::Zero {
                    continue;
                }
                if phase == Phase::Feasibility && self.problem.signs[j] == VarSign::Free {
                    // Free columns are admissible in both directions.
                }
                let rc = self.phase_obj(j, phase) - self.col_dot_virtual(state, j, &y);
                let direction = match self.problem.signs[j] {
                    VarSign::Nonneg => {
                        if rc > self.tol.opt {
                            1.0
                        } else {
                            continue;
                        }
                    }
                    VarSign::Free => {
                        if rc > self.tol.opt {
                            1.0
                        } else if rc < -self.tol.opt {
                            -1.0
                        } else {
                            continue;
                        }
                    }
                    VarSign::Zero => continue,
                };
                if bland {
                    entering = Some((j, rc.abs(), direction));
                    break;
                }
                match entering {
                    Some((_, best, _)) if rc.abs() <= best => {}
                    _ => entering = Some((j, rc.abs(), direction)),
                }
            }
            let Some((e, _, dir)) = entering else {
                return Ok(()); // optimal for this phase
            };

            let d = self.ftran_col(state, e);

            // Ratio test: basic values move by −t·dir·d; sign-restricted
            // basic variables block at zero.
            let mut leaving: Option<(usize, f64, f64)> = None; // (position, ratio, |pivot|)
            for i in 0..m {
                let col = state.basic[i];
                let delta = dir * d[i];
                let blocks = match self.sign_of(col, state) {
                    VarSign::Free => false,
                    VarSign::Nonneg => delta > self.tol.pivot,
                    VarSign::Zero => delta.abs() > self.tol.pivot,
                };
                if !blocks {
                    continue;
                }
                let ratio = match self.sign_of(col, state) {
                    // A pinned column blocks immediately in either direction.
                    VarSign::Zero => 0.0,
                    _ => (state.x_basic[i] / delta).max(0.0),
                };
                let better = match leaving {
                    None => true,
                    Some((pos, best, best_pivot)) => {
                        if ratio < best - 1e-12 {
                            true
                        } else if ratio > best + 1e-12 {
                            false
                        } else if bland {
                            state.basic[i] < state.basic[pos]
                        } else {
                            delta.abs() > best_pivot
                        }
                    }
                };
                if better {
                    leaving = Some((i, ratio, delta.abs()));
                }
            }
            let Some((r, step, _)) = leaving else {
                return match phase {
                    Phase::Feasibility => Err(LpError::IterationLimit { iterations }),
                    Phase::Optimality => Err(LpError::Unbounded),
                };
            };

            // Apply the exchange.
            let state = self.state.as_mut().expect("solver state");
            for i in 0..m {
                state.x_basic[i] -= step * dir * d[i];
            }
            state.x_basic[r] = dir * step;
            let leaving_col = state.basic[r];
            state.position[leaving_col] = None;
            state.position[e] = Some(r);
            state.basic[r] = e;
            state.factors.push_update(r, d)?;

            if step <= 1e-12 {
                degenerate_run += 1;
                if degenerate_run > BLAND_TRIGGER_FACTOR * m.max(4) {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }
        }
    }

    // ------------------------------------------------------------------
    // Dual simplex
    // ------------------------------------------------------------------

    /// Restore primal feasibility from a dual-feasible basis (the add_row
    /// path). `Err(Infeasible)` here is a proof that the constraint system
    /// became empty.
    fn run_dual(&mut self) -> Result<(), LpError> {
        let m = self.problem.num_rows;
        let n = self.problem.num_cols();
        let cap = self.iteration_cap();
        let mut iterations = 0usize;
        let mut degenerate_run = 0usize;
        let mut bland = false;
        let scale = 1.0 + self.problem.rhs.iter().map(|v| v.abs()).sum::<f64>();
        loop {
            iterations += 1;
            if iterations > cap {
                return Err(LpError::IterationLimit { iterations });
            }
            self.maybe_refactor()?;
            let state = self.state.as_ref().expect("solver state");

            // Leaving: most negative basic value among sign-restricted rows.
            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..m {
                let col = state.basic[i];
                if self.sign_of(col, state) == VarSign::Free {
                    continue;
                }
                let v = state.x_basic[i];
                if v < -self.tol.feas * scale {
                    match leaving {
                        Some((_, worst)) if v >= worst => {}
                        _ => leaving = Some((i, v)),
                    }
                }
            }
            let Some((r, _)) = leaving else {
                return Ok(()); // primal feasible
            };

            let mut rho = vec![0.0; m];
            rho[r] = 1.0;
            state.factors.btran(&mut rho);
            let y = self.duals_internal(state, Phase::Optimality);

            // Entering: minimize the dual ratio rc/α over admissible
            // columns (α < 0 for nonnegative columns, α ≠ 0 for free).
            let mut entering: Option<(usize, f64, f64)> = None; // (col, ratio, |alpha|)
            for j in 0..n {
                if state.position[j].is_some() || self.problem.signs[j] == VarSign::Zero {
                    continue;
                }
                let alpha = self.problem.col_dot(j, &rho);
                let admissible = match self.problem.signs[j] {
                    VarSign::Nonneg => alpha < -self.tol.pivot,
                    VarSign::Free => alpha.abs() > self.tol.pivot,
                    VarSign::Zero => false,
                };
                if !admissible {
                    continue;
                }
                let rc = self.obj[j] - self.problem.col_dot(j, &y);
                let ratio = (rc / alpha).max(0.0);
                let better = match entering {
                    None => true,
                    Some((best_col, best, best_alpha)) => {
                        if ratio < best - 1e-12 {
                            true
                        } else if ratio > best + 1e-12 {
                            false
                        } else if bland {
                            j < best_col
                        } else {
                            alpha.abs() > best_alpha
                        }
                    }
                };
                if better {
                    entering = Some((j, ratio, alpha.abs()));
                }
            }
            let Some((e, theta, _)) = entering else {
                // The dual is unbounded in the direction that repairs row r,
                // so no feasible point satisfies the row system.
                return Err(LpError::Infeasible);
            };

            let d = self.ftran_col(state, e);
            if d[r].abs() < self.tol.pivot {
                return Err(LpError::Singular(super::SingularBasis { step: r }));
            }
            let state = self.state.as_mut().expect("solver state");
            let t = state.x_basic[r] / d[r];
            for i in 0..m {
                state.x_basic[i] -= t * d[i];
            }
            state.x_basic[r] = t;
            let leaving_col = state.basic[r];
            state.position[leaving_col] = None;
            state.position[e] = Some(r);
            state.basic[r] = e;
            state.factors.push_update(r, d)?;

            if theta <= 1e-12 {
                degenerate_run += 1;
                if degenerate_run > BLAND_TRIGGER_FACTOR * m.max(4) {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }
        }
    }

    fn maybe_refactor(&mut self) -> Result<(), LpError> {
        let needs = {
            let state = self.state.as_ref().expect("solver state");
            state.factors.num_updates() >= self.tol.refactor_every
        };
        if needs {
            let state = self.state.as_mut().expect("solver state");
            Self::refactor_state(&self.problem, state)?;
        }
        Ok(())
    }

    // ------------------------------------------------------------------
    // Extraction
    // ------------------------------------------------------------------

    fn extract(&self) -> Result<LpSolution, LpError> {
        let state = self.state.as_ref().expect("extract requires solver state");
        debug_assert!(state.art_sign.is_empty(), "artificials must be evicted before extraction");
        let n = self.problem.num_cols();
        let m = self.problem.num_rows;

        let mut x = vec![0.0; n];
        for (i, &col) in state.basic.iter().enumerate() {
            if col < n {
                x[col] = state.x_basic[i];
            }
        }

        let y_internal = self.duals_internal(state, Phase::Optimality);
        let flip = match self.problem.sense {
            Sense::Max => 1.0,
            Sense::Min => -1.0,
        };
        let duals: Vec<f64> = y_internal.iter().map(|v| flip * v).collect();
        let reduced_costs: Vec<f64> = (0..n)
            .map(|j| self.problem.objective[j] - self.problem.col_dot(j, &duals))
            .collect();
        let objective: f64 = (0..n).map(|j| self.problem.objective[j] * x[j]).sum();

        // Post-solve residual check: the factored system must reproduce the
        // right-hand side.
        let mut residual = vec![0.0; m];
        for (j, &xv) in x.iter().enumerate() {
            if xv != 0.0 {
                self.problem.scatter_col(j, xv, &mut residual);
            }
        }
        let scale = 1.0 + self.problem.rhs.iter().map(|v| v.abs()).sum::<f64>();
        for (i, &b) in self.problem.rhs.iter().enumerate() {
            if (residual[i] - b).abs() > 1e4 * self.tol.feas * scale {
                return Err(LpError::Singular(super::SingularBasis { step: i }));
            }
        }

        Ok(LpSolution {
            x,
            duals,
            reduced_costs,
            objective,
            basis: Basis { basic: state.basic.clone() },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{solve, Basis, LpError, LpProblem, Sense, VarSign};

    /// max 2x + 3y s.t. x + 2y ≤ 4, x + y ≤ 3 → x = 2, y = 1, obj = 7.
    fn production_lp() -> LpProblem {
        let mut p = LpProblem::new(2, Sense::Max);
        p.add_col(VarSign::Nonneg, 2.0, vec![(0, 1.0), (1, 1.0)]); // x
        p.add_col(VarSign::Nonneg, 3.0, vec![(0, 2.0), (1, 1.0)]); // y
        p.add_col(VarSign::Nonneg, 0.0, vec![(0, 1.0)]); // slack 0
        p.add_col(VarSign::Nonneg, 0.0, vec![(1, 1.0)]); // slack 1
        p.rhs = vec![4.0, 3.0];
        p
    }

    #[test]
    fn maximization_with_slacks() {
        let sol = solve(&production_lp()).unwrap();
        assert!((sol.objective - 7.0).abs() < 1e-9);
        assert!((sol.x[0] - 2.0).abs() < 1e-9);
        assert!((sol.x[1] - 1.0).abs() < 1e-9);
        // Strong duality on equality form: cᵀx = bᵀy.
        let by: f64 = sol.duals[0] * 4.0 + sol.duals[1] * 3.0;
        assert!((by - sol.objective).abs() < 1e-9);
    }

    #[test]
    fn minimization_reports_min_sense_duals() {
        // min x + y s.t. x + y − s = 2 → obj 2, dual of the row = 1.
        let mut p = LpProblem::new(1, Sense::Min);
        p.add_col(VarSign::Nonneg, 1.0, vec![(0, 1.0)]);
        p.add_col(VarSign::Nonneg, 1.0, vec![(0, 1.0)]);
        p.add_col(VarSign::Nonneg, 0.0, vec![(0, -1.0)]);
        p.rhs = vec![2.0];
        let sol = solve(&p).unwrap();
        assert!((sol.objective - 2.0).abs() < 1e-9);
        assert!((sol.duals[0] - 1.0).abs() < 1e-9);
        // Min-sense dual feasibility: reduced costs of nonnegative columns
        // are nonnegative at optimality.
        for rc in &sol.reduced_costs {
            assert!(*rc >= -1e-9, "reduced costs {:?}", sol.reduced_costs);
        }
    }

    #[test]
    fn free_variable_enters_in_both_directions() {
        // max f s.t. f + s = 3 → f = 3.
        let mut p = LpProblem::new(1, Sense::Max);
        p.add_col(VarSign::Free, 1.0, vec![(0, 1.0)]);
        p.add_col(VarSign::Nonneg, 0.0, vec![(0, 1.0)]);
        p.rhs = vec![3.0];
        let sol = solve(&p).unwrap();
        assert!((sol.x[0] - 3.0).abs() < 1e-9);

        // min f with the same row is unbounded: f = 3 − s, s unbounded.
        let mut p = LpProblem::new(1, Sense::Min);
        p.add_col(VarSign::Free, 1.0, vec![(0, 1.0)]);
        p.add_col(VarSign::Nonneg, 0.0, vec![(0, 1.0)]);
        p.rhs = vec![3.0];
        assert_eq!(solve(&p).unwrap_err(), LpError::Unbounded);

        // Free variable forced negative: f = −5 − s₁ with s₁ ≤ 10, so
        // max −f drives s₁ to its cap and f to −15.
        let mut p = LpProblem::new(2, Sense::Max);
        p.add_col(VarSign::Free, -1.0, vec![(0, 1.0)]);
        p.add_col(VarSign::Nonneg, 0.0, vec![(0, 1.0), (1, 1.0)]);
        p.add_col(VarSign::Nonneg, 0.0, vec![(1, 1.0)]);
        p.rhs = vec![-5.0, 10.0];
        let sol = solve(&p).unwrap();
        assert!((sol.x[0] + 15.0).abs() < 1e-9, "f = {}", sol.x[0]);
    }

    #[test]
    fn zero_variable_never_moves_but_reports_reduced_cost() {
        // max 100z + x s.t. z + x + s = 1: z is pinned, so x = 1, obj = 1.
        let mut p = LpProblem::new(1, Sense::Max);
        p.add_col(VarSign::Zero, 100.0, vec![(0, 1.0)]);
        p.add_col(VarSign::Nonneg, 1.0, vec![(0, 1.0)]);
        p.add_col(VarSign::Nonneg, 0.0, vec![(0, 1.0)]);
        p.rhs = vec![1.0];
        let sol = solve(&p).unwrap();
        assert_eq!(sol.x[0], 0.0);
        assert!((sol.objective - 1.0).abs() < 1e-9);
        // rc_z = 100 − y·1 with y = 1.
        assert!((sol.reduced_costs[0] - 99.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_system_is_detected() {
        let mut p = LpProblem::new(1, Sense::Max);
        p.add_col(VarSign::Nonneg, 1.0, vec![(0, 1.0)]);
        p.add_col(VarSign::Nonneg, 0.0, vec![(0, 1.0)]);
        p.rhs = vec![-1.0];
        assert_eq!(solve(&p).unwrap_err(), LpError::Infeasible);
    }

    #[test]
    fn unbounded_direction_is_detected() {
        // max x s.t. x − s = 0: x = s can grow without bound.
        let mut p = LpProblem::new(1, Sense::Max);
        p.add_col(VarSign::Nonneg, 1.0, vec![(0, 1.0)]);
        p.add_col(VarSign::Nonneg, 0.0, vec![(0, -1.0)]);
        p.rhs = vec![0.0];
        assert_eq!(solve(&p).unwrap_err(), LpError::Unbounded);
    }

    #[test]
    fn rank_deficient_rows_are_reported() {
        // Two identical rows: consistent but rank 1.
        let mut p = LpProblem::new(2, Sense::Max);
        p.add_col(VarSign::Nonneg, 1.0, vec![(0, 1.0), (1, 1.0)]);
        p.add_col(VarSign::Nonneg, 0.5, vec![(0, 1.0), (1, 1.0)]);
        p.rhs = vec![1.0, 1.0];
        assert!(matches!(solve(&p).unwrap_err(), LpError::RankDeficient { .. }));
    }

    #[test]
    fn add_row_reoptimizes_via_dual_simplex() {
        let mut solver = SimplexSolver::new(production_lp()).unwrap();
        let first = solver.solve().unwrap();
        assert!((first.objective - 7.0).abs() < 1e-9);

        // Binding cut: x ≤ 1 tightens the optimum to x=1, y=1.5, obj=6.5.
        solver.add_row(&[(0, 1.0)], 1.0);
        let cut = solver.solve().unwrap();
        assert!((cut.objective - 6.5).abs() < 1e-9, "objective {}", cut.objective);
        assert!((cut.x[0] - 1.0).abs() < 1e-9);
        assert!((cut.x[1] - 1.5).abs() < 1e-9);

        // The same problem solved cold gives the same answer.
        let cold = solve(solver.problem()).unwrap();
        assert!((cold.objective - cut.objective).abs() < 1e-9);

        // Redundant cut: x + y ≤ 100 changes nothing.
        solver.add_row(&[(0, 1.0), (1, 1.0)], 100.0);
        let redundant = solver.solve().unwrap();
        assert!((redundant.objective - 6.5).abs() < 1e-9);
    }

    #[test]
    fn add_row_can_prove_infeasibility() {
        let mut solver = SimplexSolver::new(production_lp()).unwrap();
        solver.solve().unwrap();
        // x + y ≤ −1 contradicts nonnegativity.
        solver.add_row(&[(0, 1.0), (1, 1.0)], -1.0);
        assert_eq!(solver.solve().unwrap_err(), LpError::Infeasible);
    }

    #[test]
    fn warm_start_from_optimal_basis_matches_cold_solve() {
        let base = production_lp();
        let optimal = solve(&base).unwrap();

        // Perturb the rhs: the old basis stays optimal structure-wise.
        let mut perturbed = base.clone();
        perturbed.rhs = vec![4.2, 3.1];
        let cold = solve(&perturbed).unwrap();
        let mut warm_solver = SimplexSolver::new(perturbed).unwrap();
        let warm = warm_solver.solve_from(&optimal.basis).unwrap();
        assert!((warm.objective - cold.objective).abs() < 1e-9);

        // A nonsense basis silently falls back to a cold start.
        let mut solver = SimplexSolver::new(production_lp()).unwrap();
        let junk = Basis { basic: vec![0, 0] };
        let sol = solver.solve_from(&junk).unwrap();
        assert!((sol.objective - 7.0).abs() < 1e-9);
    }

    #[test]
    fn explicit_pivot_exchanges_one_pair() {
        let mut solver = SimplexSolver::new(production_lp()).unwrap();
        let sol = solver.solve().unwrap();
        // x (col 0) and y (col 1) are basic; bring in slack 0 (col 2) for y.
        assert!(sol.basis.contains(0) && sol.basis.contains(1));
        let pivoted = solver.pivot_exchange(2, 1).unwrap();
        assert!(pivoted.basis.contains(2));
        assert!(!pivoted.basis.contains(1));
        // Still a basic solution of the same system: x + 2y + s0 = 4 etc.
        let x = &pivoted.x;
        assert!((x[0] + 2.0 * x[1] + x[2] - 4.0).abs() < 1e-9);
        assert!((x[0] + x[1] + x[3] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_vertices_do_not_cycle() {
        // A classic degenerate configuration: three planes through one
        // vertex; Dantzig pricing visits zero-length steps.
        let mut p = LpProblem::new(3, Sense::Max);
        p.add_col(VarSign::Nonneg, 0.75, vec![(0, 0.25), (1, 0.5), (2, 0.0)]);
        p.add_col(VarSign::Nonneg, -150.0, vec![(0, -60.0), (1, -90.0), (2, 0.0)]);
        p.add_col(VarSign::Nonneg, 0.02, vec![(0, -0.04), (1, -0.02), (2, 1.0)]);
        p.add_col(VarSign::Nonneg, -6.0, vec![(0, 9.0), (1, 3.0), (2, 0.0)]);
        p.add_col(VarSign::Nonneg, 0.0, vec![(0, 1.0)]);
        p.add_col(VarSign::Nonneg, 0.0, vec![(1, 1.0)]);
        p.add_col(VarSign::Nonneg, 0.0, vec![(2, 1.0)]);
        p.rhs = vec![0.0, 0.0, 1.0];
        // Beale's cycling example: the kernel must terminate with the known
        // optimum 1/20 at x = (1/25, 0, 1, 0).
        let sol = solve(&p).unwrap();
        assert!((sol.objective - 0.05).abs() < 1e-9, "objective {}", sol.objective);
    }
}
