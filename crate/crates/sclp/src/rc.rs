//! Explicit robust counterparts: the certificate-variable reformulations
//! that the cutting-plane solver avoids ever materializing, built here as
//! independent references.
//!
//! For a one-sided budget uncertainty set, the worst case of each
//! constraint row dualizes into a budget price per server plus an overflow
//! price per flow, turning the robust program into one larger certain LP.
//! This module builds that LP three ways:
//!
//! - [`build_rates_rc`] — the counterpart of a single rates subproblem,
//!   solvable by the dense kernel and compared value-for-value against
//!   [`crate::robust::cutting_planes_rates`];
//! - [`explicit_dual`] — its dual polyhedron, spelled out so mapped duals
//!   from the cutting-plane solver can be checked point-in-polyhedron;
//! - [`build_sclp_rc`] — the counterpart of the whole time-dependent
//!   problem as a *certain* instance (certificates become extra controls,
//!   certificate constraints become extra capacity-type rows), which only
//!   the discretization oracle solves; the sweep never sees it.
//!
//! [`dimension_report`] counts the certificate variables each formulation
//! carries, which is the honest measure of what uncertainty-set reduction
//! buys: every absorbed threat deletes its overflow column, and every
//! fully absorbed (buffer, server) pair deletes its budget column.

use std::collections::BTreeSet;

use crate::lp::{self, LpError, LpProblem, Sense, VarSign};
use crate::model::SclpData;
use crate::robust::{DualMapping, ReducedProblem};

/// An LP paired with human-readable row and column names.
///
/// Rows are named after their shadow prices (`p[k]`, `deltadot[k,j]`,
/// `delta0[j]`, `qdot[i]`) so the same label identifies the constraint in
/// the primal and the variable in [`explicit_dual`].
#[derive(Debug, Clone)]
pub struct RcProblem {
    /// The kernel-form LP (equality rows, signed columns).
    pub problem: LpProblem,
    /// One name per column.
    pub column_names: Vec<String>,
    /// One name per row.
    pub row_names: Vec<String>,
}

impl RcProblem {
    fn new(row_names: Vec<String>, sense: Sense) -> RcProblem {
        RcProblem {
            problem: LpProblem::new(row_names.len(), sense),
            column_names: Vec::new(),
            row_names,
        }
    }

    fn add_col(&mut self, name: String, sign: VarSign, obj: f64, entries: Vec<(usize, f64)>) {
        self.problem.add_col(sign, obj, entries);
        self.column_names.push(name);
    }

    /// Solve with the dense kernel.
    pub fn solve(&self) -> Result<lp::LpSolution, LpError> {
        lp::solve(&self.problem)
    }

    /// The full matrix as aligned text: one row per constraint with its
    /// right-hand side, plus objective and sign footers. A debugging aid
    /// for small instances; cost grows with rows × columns.
    pub fn matrix_text(&self) -> String {
        let cols = self.column_names.len();
        let width = self
            .column_names
            .iter()
            .chain(self.row_names.iter())
            .map(|n| n.len())
            .max()
            .unwrap_or(4)
            .max(9);
        let mut dense = vec![0.0; self.problem.num_rows * cols];
        for (j, col) in self.problem.cols.iter().enumerate() {
            for &(r, v) in col {
                dense[r * cols + j] = v;
            }
        }
        let mut out = String::new();
        let pad = |s: &str| format!("{s:>width$}");
        out.push_str(&pad(""));
        for name in &self.column_names {
            out.push_str(&pad(name));
        }
        out.push_str(&pad("rhs"));
        out.push('\n');
        for r in 0..self.problem.num_rows {
            out.push_str(&pad(&self.row_names[r]));
            for j in 0..cols {
                out.push_str(&pad(&format!("{:.4}", dense[r * cols + j])));
            }
            out.push_str(&pad(&format!("{:.4}", self.problem.rhs[r])));
            out.push('\n');
        }
        out.push_str(&pad("objective"));
        for j in 0..cols {
            out.push_str(&pad(&format!("{:.4}", self.problem.objective[j])));
        }
        out.push('\n');
        out.push_str(&pad("sign"));
        for sign in &self.problem.signs {
            out.push_str(&pad(match sign {
                VarSign::Nonneg => ">=0",
                VarSign::Free => "free",
                VarSign::Zero => "=0",
            }));
        }
        out.push('\n');
        out
    }
}

/// Build the explicit robust counterpart of a rates subproblem.
///
/// Variables: the flow rates and capacity slacks of the nominal rates LP
/// (pinned ones fixed at zero), the state slopes (free exactly for
/// `free_states`), then per buffer a budget certificate per server and an
/// overflow certificate per flow, and the same pair for the uncertain
/// objective. Each buffer's balance row carries its certificates' worth of
/// worst-case damage; a certificate row per (buffer, flow) forces the
/// certificates to dominate that flow's damage; the objective pays for its
/// own certificates directly.
///
/// Certificate blocks are built for every (buffer, flow) pair — rows where
/// a flow helps rather than hurts get vacuous certificates that settle at
/// zero — so the counterpart's size is the closed-form worst case that
/// [`dimension_report`] quotes, independent of sparsity.
pub fn build_rates_rc(
    data: &SclpData,
    free_states: &BTreeSet<usize>,
    pinned_controls: &BTreeSet<usize>,
) -> RcProblem {
    assert_eq!(data.num_extra_states, 0, "counterparts cover pure network states only");
    let kk = data.num_buffers;
    let jj = data.num_flows;
    let ii = data.num_servers;

    // Row order: balances, damage certificates (buffer-major), objective
    // certificates, capacities.
    let mut row_names: Vec<String> = (0..kk).map(|k| format!("p[{k}]")).collect();
    for k in 0..kk {
        for j in 0..jj {
            row_names.push(format!("deltadot[{k},{j}]"));
        }
    }
    for j in 0..jj {
        row_names.push(format!("delta0[{j}]"));
    }
    for i in 0..ii {
        row_names.push(format!("qdot[{i}]"));
    }
    let cert_row = |k: usize, j: usize| kk + k * jj + j;
    let obj_row = |j: usize| kk + kk * jj + j;
    let cap_row = |i: usize| kk + kk * jj + jj + i;

    let mut rc = RcProblem::new(row_names, Sense::Max);
    for k in 0..kk {
        rc.problem.rhs[k] = data.input_rate[k];
    }
    for i in 0..ii {
        rc.problem.rhs[cap_row(i)] = data.b[i];
    }

    for j in 0..jj {
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for k in 0..kk {
            let v = data.g_bar_at(k, j);
            if v != 0.0 {
                entries.push((k, v));
            }
            let t = data.g_tilde_at(k, j);
            if t != 0.0 {
                entries.push((cert_row(k, j), -t));
            }
        }
        if data.c_tilde[j] != 0.0 {
            entries.push((obj_row(j), -data.c_tilde[j]));
        }
        entries.push((cap_row(data.server_of_flow[j]), 1.0));
        let sign = if pinned_controls.contains(&j) { VarSign::Zero } else { VarSign::Nonneg };
        rc.add_col(format!("eta[{j}]"), sign, data.c_bar[j], entries);
    }
    for i in 0..ii {
        let sign =
            if pinned_controls.contains(&(jj + i)) { VarSign::Zero } else { VarSign::Nonneg };
        rc.add_col(format!("slack[{i}]"), sign, 0.0, vec![(cap_row(i), 1.0)]);
    }
    for k in 0..kk {
        let sign = if free_states.contains(&k) { VarSign::Free } else { VarSign::Nonneg };
        rc.add_col(format!("xdot[{k}]"), sign, 0.0, vec![(k, 1.0)]);
    }
    for k in 0..kk {
        for i in 0..ii {
            let mut entries = vec![(k, data.budgets[i])];
            for j in data.flows_on_server(i) {
                entries.push((cert_row(k, j), 1.0));
            }
            rc.add_col(format!("beta[{k},{i}]"), VarSign::Nonneg, 0.0, entries);
        }
        for j in 0..jj {
            let i = data.server_of_flow[j];
            rc.add_col(
                format!("gamma[{k},{i},{j}]"),
                VarSign::Nonneg,
                0.0,
                vec![(k, 1.0), (cert_row(k, j), 1.0)],
            );
        }
        for j in 0..jj {
            rc.add_col(format!("v[{k},{j}]"), VarSign::Nonneg, 0.0, vec![(cert_row(k, j), -1.0)]);
        }
    }
    for i in 0..ii {
        let entries = data.flows_on_server(i).into_iter().map(|j| (obj_row(j), 1.0)).collect();
        rc.add_col(format!("beta0[{i}]"), VarSign::Nonneg, -data.budgets[i], entries);
    }
    for j in 0..jj {
        rc.add_col(format!("gamma0[{j}]"), VarSign::Nonneg, -1.0, vec![(obj_row(j), 1.0)]);
    }
    for j in 0..jj {
        rc.add_col(format!("r[{j}]"), VarSign::Nonneg, 0.0, vec![(obj_row(j), -1.0)]);
    }
    rc
}

/// Transpose a maximization problem into its explicit dual: one free
/// variable per primal row, one constraint per primal column (an
/// inequality, carried by a surplus column, for sign-restricted columns;
/// an equality for free ones), minimizing the primal right-hand sides.
pub fn explicit_dual(primal: &RcProblem) -> RcProblem {
    assert_eq!(primal.problem.sense, Sense::Max, "the transposition below prices a maximization");
    let mut dual_row_of: Vec<Option<usize>> = Vec::with_capacity(primal.problem.cols.len());
    let mut row_names = Vec::new();
    for (j, sign) in primal.problem.signs.iter().enumerate() {
        if *sign == VarSign::Zero {
            dual_row_of.push(None);
        } else {
            dual_row_of.push(Some(row_names.len()));
            row_names.push(format!("price[{}]", primal.column_names[j]));
        }
    }
    let mut dual = RcProblem::new(row_names, Sense::Min);
    for (j, row) in dual_row_of.iter().enumerate() {
        if let Some(r) = row {
            dual.problem.rhs[*r] = primal.problem.objective[j];
        }
    }
    for r in 0..primal.problem.num_rows {
        let entries: Vec<(usize, f64)> = primal
            .problem
            .cols
            .iter()
            .enumerate()
            .filter_map(|(j, col)| {
                let dual_row = dual_row_of[j]?;
                let coeff: f64 =
                    col.iter().filter(|(row, _)| *row == r).map(|(_, v)| v).sum();
                (coeff != 0.0).then_some((dual_row, coeff))
            })
            .collect();
        dual.add_col(primal.row_names[r].clone(), VarSign::Free, primal.problem.rhs[r], entries);
    }
    for (j, row) in dual_row_of.iter().enumerate() {
        if primal.problem.signs[j] == VarSign::Nonneg {
            let r = row.expect("non-zero columns got a dual row");
            dual.add_col(
                format!("surplus[{}]", primal.column_names[j]),
                VarSign::Nonneg,
                0.0,
                vec![(r, -1.0)],
            );
        }
    }
    dual
}

/// How far a candidate dual point is from the dual polyhedron of a
/// maximization problem.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPointCheck {
    /// Largest constraint violation: for a nonnegative primal column the
    /// shortfall of its dual row below the objective coefficient, for a
    /// free column the absolute mismatch.
    pub max_violation: f64,
    /// The point's dual objective (primal right-hand sides priced out).
    pub objective: f64,
}

/// Check a dual point `y` (one entry per row of `rc`) against the dual
/// polyhedron of the maximization problem `rc`, without building
/// [`explicit_dual`].
pub fn check_dual_point(rc: &RcProblem, y: &[f64]) -> DualPointCheck {
    assert_eq!(rc.problem.sense, Sense::Max);
    assert_eq!(y.len(), rc.problem.num_rows);
    let mut max_violation = 0.0f64;
    for (j, col) in rc.problem.cols.iter().enumerate() {
        let priced: f64 = col.iter().map(|&(r, v)| v * y[r]).sum();
        let gap = rc.problem.objective[j] - priced;
        match rc.problem.signs[j] {
            VarSign::Nonneg => max_violation = max_violation.max(gap),
            VarSign::Free => max_violation = max_violation.max(gap.abs()),
            VarSign::Zero => {}
        }
    }
    let objective = rc.problem.rhs.iter().zip(y).map(|(r, p)| r * p).sum();
    DualPointCheck { max_violation, objective }
}

/// Arrange a cutting-plane solve's mapped duals as a point in the dual
/// space of [`build_rates_rc`], in that problem's row order: state prices,
/// then the (negated) degradation prices per certificate row, the
/// (negated) objective degradation per objective-certificate row, then
/// capacity prices.
///
/// The negations carry the orientation of the certificate rows: their
/// surplus columns make the rows' shadow prices nonpositive, while the
/// mapping stores the prices as nonnegative weights.
pub fn dual_point_from_mapping(data: &SclpData, mapping: &DualMapping) -> Vec<f64> {
    let kk = data.num_buffers;
    let jj = data.num_flows;
    let mut y = Vec::with_capacity(kk + kk * jj + jj + data.num_servers);
    y.extend_from_slice(&mapping.state_duals);
    y.extend(mapping.scenario_weights.iter().map(|w| -w));
    y.extend(mapping.objective_weights.iter().map(|w| -w));
    y.extend((0..data.num_servers).map(|i| mapping.control_duals[jj + i]));
    y
}

/// Build the robust counterpart of the whole time-dependent problem as a
/// *certain* instance.
///
/// Certificates become additional controls: per (buffer, server) pair with
/// at least one threatened flow a budget control entering that buffer's
/// balance row at the budget, plus an overflow control per threatened flow
/// entering at one; the uncertain objective gets the same pair, paying
/// (budget, one) per unit directly in the objective rates. Certificate
/// constraints are pointwise-in-time, so they join the capacity block as
/// extra rows with zero capacity. The result has no uncertainty left and
/// is sized by the threat structure — handing it a [`ReducedProblem`]'s
/// data builds certificates only for what reduction could not absorb.
///
/// The instance is meant for the discretization oracle; its value is the
/// robust optimum the structured solver must reproduce.
pub fn build_sclp_rc(data: &SclpData, reduced: Option<&ReducedProblem>) -> SclpData {
    let src = reduced.map(|r| &r.data).unwrap_or(data);
    assert_eq!(src.num_extra_states, 0, "counterparts cover pure network states only");
    let kk = src.num_buffers;
    let jj = src.num_flows;
    let ii = src.num_servers;

    // Threatened flows per (buffer, server) pair and for the objective.
    let threats = |k: usize, i: usize| -> Vec<usize> {
        src.flows_on_server(i).into_iter().filter(|&j| src.g_tilde_at(k, j) > 0.0).collect()
    };
    let obj_threats =
        |i: usize| -> Vec<usize> { src.flows_on_server(i).into_iter().filter(|&j| src.c_tilde[j] > 0.0).collect() };

    // Column layout: flows, then per nonempty (k,i) its budget control and
    // overflow controls, then the objective's pairs.
    let mut num_cols = jj;
    let mut cert_rows = 0usize;
    for k in 0..kk {
        for i in 0..ii {
            let t = threats(k, i);
            if !t.is_empty() {
                num_cols += 1 + t.len();
                cert_rows += t.len();
            }
        }
    }
    for i in 0..ii {
        let t = obj_threats(i);
        if !t.is_empty() {
            num_cols += 1 + t.len();
            cert_rows += t.len();
        }
    }
    let num_rows = ii + cert_rows;

    let mut g_bar = vec![0.0; kk * num_cols];
    let mut h = vec![0.0; num_rows * num_cols];
    let mut c_bar = vec![0.0; num_cols];
    let mut gamma = vec![0.0; num_cols];
    for j in 0..jj {
        for k in 0..kk {
            g_bar[k * num_cols + j] = src.g_bar_at(k, j);
        }
        for i in 0..ii {
            h[i * num_cols + j] = src.h_at(i, j);
        }
        c_bar[j] = src.c_bar[j];
        gamma[j] = src.gamma[j];
    }

    let mut col = jj;
    let mut row = ii;
    for k in 0..kk {
        for i in 0..ii {
            let t = threats(k, i);
            if t.is_empty() {
                continue;
            }
            let budget_col = col;
            g_bar[k * num_cols + budget_col] = src.budgets[i];
            col += 1;
            for j in t {
                // Certificate row: the flow's damage must be covered by
                // the budget control plus this overflow control.
                h[row * num_cols + j] = src.g_tilde_at(k, j);
                h[row * num_cols + budget_col] = -1.0;
                h[row * num_cols + col] = -1.0;
                g_bar[k * num_cols + col] = 1.0;
                col += 1;
                row += 1;
            }
        }
    }
    for i in 0..ii {
        let t = obj_threats(i);
        if t.is_empty() {
            continue;
        }
        let budget_col = col;
        c_bar[budget_col] = -src.budgets[i];
        col += 1;
        for j in t {
            h[row * num_cols + j] = src.c_tilde[j];
            h[row * num_cols + budget_col] = -1.0;
            h[row * num_cols + col] = -1.0;
            c_bar[col] = -1.0;
            col += 1;
            row += 1;
        }
    }
    debug_assert_eq!(col, num_cols);
    debug_assert_eq!(row, num_rows);

    let mut b = vec![0.0; num_rows];
    b[..ii].copy_from_slice(&src.b);
    let mut rc = SclpData::deterministic(
        g_bar,
        h,
        b,
        src.alpha.clone(),
        src.input_rate.clone(),
        c_bar,
        src.horizon,
    );
    rc.gamma = gamma;
    rc
}

/// Certificate-variable counts of the counterpart formulations, and what
/// reduction removed.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionReport {
    /// Certificates a monolithic time-dependent counterpart carries if
    /// every row certifies against every control: `(K+1)(J+I)+1` — budget
    /// and overflow certificates for `K` balance rows and the objective,
    /// plus the objective's epigraph variable.
    pub monolithic_certificates: usize,
    /// Certificates of one rates-subproblem counterpart on the same
    /// worst-case convention: `K(J+I)`.
    pub rates_certificates: usize,
    /// Threat-sized certificate count before reduction: per (buffer,
    /// server) pair with threats, one budget certificate plus one overflow
    /// per threatened flow; same for the objective.
    pub before: usize,
    /// The same count on what reduction left residual.
    pub after: usize,
    /// `100·(1 − after/before)`; zero when there was nothing to reduce.
    pub reduction_percent: f64,
}

fn certificate_count(src: &SclpData) -> usize {
    let mut count = 0;
    for k in 0..src.num_buffers {
        for i in 0..src.num_servers {
            let t = src
                .flows_on_server(i)
                .into_iter()
                .filter(|&j| src.g_tilde_at(k, j) > 0.0)
                .count();
            if t > 0 {
                count += 1 + t;
            }
        }
    }
    for i in 0..src.num_servers {
        let t =
            src.flows_on_server(i).into_iter().filter(|&j| src.c_tilde[j] > 0.0).count();
        if t > 0 {
            count += 1 + t;
        }
    }
    count
}

/// Count certificate variables before and after reduction.
///
/// With `reduced` absent the report is a pure dimension statement
/// (`after == before`, zero reduction).
pub fn dimension_report(data: &SclpData, reduced: Option<&ReducedProblem>) -> DimensionReport {
    let kk = data.num_buffers;
    let jj = data.num_flows;
    let ii = data.num_servers;
    let before = certificate_count(data);
    let after = reduced.map(|r| certificate_count(&r.data)).unwrap_or(before);
    let reduction_percent =
        if before == 0 { 0.0 } else { 100.0 * (1.0 - after as f64 / before as f64) };
    DimensionReport {
        monolithic_certificates: (kk + 1) * (jj + ii) + 1,
        rates_certificates: kk * (jj + ii),
        before,
        after,
        reduction_percent,
    }
}
