//! Central numeric tolerances.
//!
//! Every comparison against zero in the crate routes through one of these
//! constants so that the accuracy contract lives in a single place. The
//! values are calibrated for desk-scale problems (tens of rows/columns in
//! the interval LPs, thousands of steps in the discretization oracle) in
//! f64 arithmetic; they are deliberately not configurable per call site.

/// Primal feasibility: a basic solution is accepted when every component is
/// above `-FEAS` and every row residual is below `FEAS * (1 + ‖rhs‖)`.
///
/// LU-factored solves on well-scaled desk-size bases lose at most ~6 digits,
/// so 1e-9 leaves three orders of headroom above f64 noise while staying far
/// below any structurally meaningful value in the test corpus.
pub const FEAS: f64 = 1e-9;

/// Dual feasibility / optimality: reduced costs within `-OPT` of zero are
/// treated as non-improving.
pub const OPT: f64 = 1e-9;

/// Pivot admissibility: an elimination or ratio-test pivot smaller than this
/// in magnitude is treated as zero. Chosen one order below FEAS so that a
/// column that passes the feasibility screen is never rejected as a pivot.
pub const PIVOT: f64 = 1e-10;

/// Interval lengths and time-collision derivatives below this magnitude are
/// treated as zero when classifying breakpoint collisions.
pub const TIME: f64 = 1e-10;

/// Relative tolerance for cross-validating two independently computed
/// objective values (strong duality, solver vs. certificate).
pub const DUALITY_GAP: f64 = 1e-8;

/// Absolute residual allowed when a stored solution is replayed through the
/// equations that defined it (breakpoint system, trajectory recursion).
/// One order looser than FEAS: the replay accumulates over intervals.
pub const RESIDUAL: f64 = 1e-8;

/// Absolute violation allowed when a cutting-plane oracle checks whether a
/// candidate control violates a robust state constraint.
pub const CUT_VIOLATION: f64 = 1e-9;

/// Absolute slack below which a state trajectory sample counts as binding
/// in the feasibility audit.
pub const AUDIT: f64 = 1e-7;

/// Largest residual tolerated when the cut-LP duals are mapped onto the
/// explicit robust-counterpart dual and re-checked constraint by
/// constraint. Looser than RESIDUAL because the mapping sums scenario
/// duals, compounding the kernel's own tolerance.
pub const MAPPING: f64 = 1e-7;

/// Convergence tolerance of the interior-point oracle: primal and dual
/// residuals and the duality gap, each relative to the problem data. At
/// 10⁴-step staircases the normal-equation scaling matrix spans ~25 decades
/// near the optimum, so 1e-8 is the practical f64 limit; the oracle's
/// discretization error dominates anything below this anyway.
pub const IPM: f64 = 1e-8;

/// Number of eta-file updates after which the simplex refactors its basis
/// from scratch. Product-form updates drift; 50 keeps the drift well under
/// FEAS for desk-scale bases while amortizing factorization cost.
pub const REFACTOR_EVERY: usize = 50;

/// Relative width of the window in which two collision candidates at the
/// same parametric step count as tied (and therefore degenerate unless they
/// form one of the recognized joint patterns). Scaled by `1 + step` so long
/// steps do not flag unrelated events as simultaneous.
pub const TIE_REL: f64 = 1e-9;

/// Horizon of a recursive repair solve, relative to `1 + T`. Small enough
/// that no unrelated state or dual can cross zero inside it, large enough to
/// stay meaningful after subtraction from breakpoint times.
pub const SUBPROBLEM_HORIZON_REL: f64 = 1e-6;

/// Maximum nesting depth of recursive repair solves before giving up; the
/// structure at a single collision point cannot meaningfully need more.
pub const MAX_SUBPROBLEM_DEPTH: usize = 8;

/// Iteration budget of the parametric sweep per problem dimension
/// (states + controls); a correct sweep performs O(number of breakpoints)
/// iterations, far below this.
pub const SWEEP_ITERATIONS_PER_DIM: usize = 1000;
