//! A small dense simplex kernel with the exact features the parametric
//! solver needs: sign-restricted variables (nonnegative, free, fixed at
//! zero) without column splitting, primal and dual simplex, explicit basis
//! exchange, warm starts from a caller-supplied basis, and in-place row
//! addition for cutting planes.
//!
//! All problems are equality-constrained:
//!
//! ```text
//! max/min  objectiveᵀ·x    s.t.  A·x = rhs,   x_j sign-restricted
//! ```
//!
//! Inequalities are modeled by explicit slack columns (see
//! [`SimplexSolver::add_row`], which appends `row·x ≤ rhs` as
//! `row·x + s = rhs` with a fresh nonnegative slack).
//!
//! The kernel is deliberately dense and deterministic: desk-scale interval
//! problems have at most a few hundred rows, ties are broken by lowest
//! index, and identical inputs always produce identical bases.

mod dense;
mod simplex;

pub use dense::{BasisFactors, LuFactors, SingularBasis};
pub use simplex::SimplexSolver;

use crate::tolerances;

/// Sign restriction of one variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarSign {
    /// `x ≥ 0`.
    Nonneg,
    /// `x` unrestricted.
    Free,
    /// `x = 0`: the variable participates in the problem (its reduced cost
    /// is still reported) but may never leave zero.
    Zero,
}

/// Optimization direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    /// Maximize the objective.
    Max,
    /// Minimize the objective.
    Min,
}

/// An equality-constrained LP with sign-restricted variables and sparse
/// columns.
#[derive(Debug, Clone)]
pub struct LpProblem {
    /// Number of equality rows.
    pub num_rows: usize,
    /// Sparse columns: `cols[j]` lists `(row, coefficient)` pairs.
    pub cols: Vec<Vec<(usize, f64)>>,
    /// Right-hand side, one entry per row.
    pub rhs: Vec<f64>,
    /// Objective coefficient per column.
    pub objective: Vec<f64>,
    /// Optimization direction.
    pub sense: Sense,
    /// Sign restriction per column.
    pub signs: Vec<VarSign>,
}

impl LpProblem {
    /// Create an empty problem with `num_rows` equality rows.
    pub fn new(num_rows: usize, sense: Sense) -> Self {
        Self {
            num_rows,
            cols: Vec::new(),
            rhs: vec![0.0; num_rows],
            objective: Vec::new(),
            sense,
            signs: Vec::new(),
        }
    }

    /// Append a column; returns its index.
    pub fn add_col(&mut self, sign: VarSign, objective: f64, entries: Vec<(usize, f64)>) -> usize {
        for &(row, val) in &entries {
            assert!(row < self.num_rows, "column entry row {row} out of range");
            assert!(val.is_finite(), "column entry must be finite");
        }
        assert!(objective.is_finite(), "objective coefficient must be finite");
        self.cols.push(entries);
        self.objective.push(objective);
        self.signs.push(sign);
        self.cols.len() - 1
    }

    /// Number of columns.
    pub fn num_cols(&self) -> usize {
        self.cols.len()
    }

    /// Dense value of `A_j · factor` accumulated into `out` (length
    /// `num_rows`).
    pub(crate) fn scatter_col(&self, j: usize, factor: f64, out: &mut [f64]) {
        for &(row, val) in &self.cols[j] {
            out[row] += factor * val;
        }
    }

    /// Dot product of column `j` with a dense row vector.
    pub(crate) fn col_dot(&self, j: usize, y: &[f64]) -> f64 {
        self.cols[j].iter().map(|&(row, val)| val * y[row]).sum()
    }

    /// Structural sanity checks (finite data, consistent lengths).
    pub fn validate(&self) -> Result<(), LpError> {
        if self.num_rows == 0 || self.cols.is_empty() {
            return Err(LpError::InvalidProblem("problem must have at least one row and one column".into()));
        }
        if self.rhs.len() != self.num_rows {
            return Err(LpError::InvalidProblem("rhs length does not match row count".into()));
        }
        if self.objective.len() != self.cols.len() || self.signs.len() != self.cols.len() {
            return Err(LpError::InvalidProblem("objective/sign length does not match column count".into()));
        }
        if self.rhs.iter().any(|v| !v.is_finite()) {
            return Err(LpError::InvalidProblem("rhs must be finite".into()));
        }
        Ok(())
    }
}

/// A simplex basis: `basic[i]` is the column occupying row position `i`.
///
/// Every column not listed is nonbasic at value zero (free variables
/// included). Bases are exchanged between solver runs to warm-start
/// neighboring interval problems.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    /// Basic column per row position.
    pub basic: Vec<usize>,
}

impl Basis {
    /// Set-membership test, ignoring row positions.
    pub fn contains(&self, col: usize) -> bool {
        self.basic.contains(&col)
    }
}

/// Result of a successful solve: an optimal basic solution with duals.
#[derive(Debug, Clone)]
pub struct LpSolution {
    /// Primal values, one per column (nonbasic columns are exactly zero).
    pub x: Vec<f64>,
    /// Row duals `y` in the problem's own sense.
    pub duals: Vec<f64>,
    /// Reduced costs `objective_j − yᵀA_j`, reported for every column
    /// including `Zero`-sign ones.
    pub reduced_costs: Vec<f64>,
    /// Optimal objective value in the problem's own sense.
    pub objective: f64,
    /// The optimal basis.
    pub basis: Basis,
}

/// Errors reported by the simplex kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum LpError {
    /// No feasible point exists (phase 1 ended with nonzero artificials, or
    /// the dual simplex proved a cut system empty).
    Infeasible,
    /// The objective is unbounded in the optimization direction.
    Unbounded,
    /// The equality rows are rank deficient: a redundant row could not be
    /// assigned a structural basic column.
    RankDeficient {
        /// Row that could not be covered.
        row: usize,
    },
    /// A basis matrix was numerically singular.
    Singular(SingularBasis),
    /// The iteration cap was hit; the instance is reported rather than
    /// silently truncated.
    IterationLimit {
        /// Iterations performed before giving up.
        iterations: usize,
    },
    /// The problem failed structural validation.
    InvalidProblem(String),
}

impl std::fmt::Display for LpError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LpError::Infeasible => write!(f, "LP is infeasible"),
            LpError::Unbounded => write!(f, "LP is unbounded"),
            LpError::RankDeficient { row } => {
                write!(f, "equality rows are rank deficient (row {row} is redundant)")
            }
            LpError::Singular(s) => write!(f, "{s}"),
            LpError::IterationLimit { iterations } => {
                write!(f, "simplex iteration limit reached after {iterations} iterations")
            }
            LpError::InvalidProblem(msg) => write!(f, "invalid LP: {msg}"),
        }
    }
}

impl std::error::Error for LpError {}

impl From<SingularBasis> for LpError {
    fn from(s: SingularBasis) -> Self {
        LpError::Singular(s)
    }
}

/// Numeric thresholds used by the kernel, snapshotted into run manifests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelTolerances {
    /// Primal feasibility threshold.
    pub feas: f64,
    /// Dual feasibility / optimality threshold.
    pub opt: f64,
    /// Minimum admissible pivot magnitude.
    pub pivot: f64,
    /// Eta updates between full refactorizations.
    pub refactor_every: usize,
}

impl Default for KernelTolerances {
    fn default() -> Self {
        Self {
            feas: tolerances::FEAS,
            opt: tolerances::OPT,
            pivot: tolerances::PIVOT,
            refactor_every: tolerances::REFACTOR_EVERY,
        }
    }
}

/// Solve an LP from scratch (convenience wrapper over [`SimplexSolver`]).
pub fn solve(problem: &LpProblem) -> Result<LpSolution, LpError> {
    SimplexSolver::new(problem.clone())?.solve()
}
