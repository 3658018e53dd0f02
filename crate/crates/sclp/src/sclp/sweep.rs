//! The parametric horizon sweep: breakpoint system, collision detection,
//! and the single-pivot structure updates.
//!
//! At a fixed horizon θ the base sequence determines everything linearly:
//! interval lengths τ solve a square system whose rows pin each leaving
//! variable to zero at its breakpoint (a state reaching zero going forward,
//! a control's dual reaching zero going backward) plus one row `Στ = θ`.
//! Differentiating the same system with respect to θ gives the drift of
//! every length, state, and dual. The sweep grows θ until the first value
//! that is drifting negative reaches zero, updates the base sequence with a
//! single pivot (insert, append, prepend, or remove), and repeats; the
//! update rules come from reading the collision off the breakpoint system.
//! Ties between collision candidates outside the recognized patterns are
//! reported as degeneracy rather than resolved arbitrarily.

use std::collections::BTreeSet;

use super::{
    dual_objective_value, primal_objective_value, BaseSequence, BoundarySolution, CollisionItem,
    RatesProvider, SclpError, SclpSolution, SweepTrace,
};
use crate::lp::{Basis, LuFactors};
use crate::model::SclpData;
use crate::tolerances;

/// The variable leaving the structural basis between two adjacent
/// intervals; its zero crossing defines the breakpoint between them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitVariable {
    /// A state's slope column leaves: the state reaches zero at the
    /// breakpoint and stays pinned there.
    State(usize),
    /// A control's column leaves: the control's time dual reaches zero at
    /// the breakpoint.
    Control(usize),
}

/// Lengths, trajectories, and their drifts for a base sequence at horizon θ.
///
/// Outer indices: `lengths` over the N intervals, `states` and `duals` over
/// the N+1 breakpoints. `*_deltas` hold derivatives with respect to θ.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalProfile {
    /// Interval lengths τ.
    pub lengths: Vec<f64>,
    /// dτ/dθ.
    pub length_deltas: Vec<f64>,
    /// States at breakpoints.
    pub states: Vec<Vec<f64>>,
    /// d(state)/dθ at breakpoints.
    pub state_deltas: Vec<Vec<f64>>,
    /// Time duals at breakpoints.
    pub duals: Vec<Vec<f64>>,
    /// d(dual)/dθ at breakpoints.
    pub dual_deltas: Vec<Vec<f64>>,
    /// Leaving variable between consecutive intervals (length N−1).
    pub exits: Vec<ExitVariable>,
}

/// Solve the breakpoint system of a base sequence at horizon `theta`.
///
/// Fails with [`SclpError::Structure`] when consecutive bases do not differ
/// by exactly one variable or the system is singular.
pub fn compute_intervals(
    data: &SclpData,
    sequence: &BaseSequence,
    boundary: &BoundarySolution,
    theta: f64,
) -> Result<IntervalProfile, SclpError> {
    let intervals = &sequence.intervals;
    let n = intervals.len();
    if n == 0 {
        return Err(SclpError::Structure("empty base sequence".to_string()));
    }
    let num_controls = data.control_count();

    // Leaving variables between neighbours, read off the structural bases.
    let mut exits = Vec::with_capacity(n.saturating_sub(1));
    for m in 0..n - 1 {
        let a = intervals[m].structural_basis(data);
        let b = intervals[m + 1].structural_basis(data);
        let mut leaving = a.difference(&b);
        let (first, extra) = (leaving.next(), leaving.next());
        let entering = b.difference(&a).count();
        match (first, extra, entering) {
            (Some(&e), None, 1) => exits.push(if e < num_controls {
                ExitVariable::Control(e)
            } else {
                ExitVariable::State(e - num_controls)
            }),
            _ => {
                return Err(SclpError::Structure(format!(
                    "bases of intervals {m} and {} differ by more than one pivot",
                    m + 1
                )))
            }
        }
    }

    // Row r < N−1 pins exit r to zero at breakpoint r+1; the last row is
    // Στ = θ. Built column-wise for the factorization.
    let mut columns = vec![vec![0.0; n]; n];
    let mut rhs = vec![0.0; n];
    let mut delta_rhs = vec![0.0; n];
    for (r, exit) in exits.iter().enumerate() {
        match *exit {
            ExitVariable::State(s) => {
                // x_s(t_{r+1}) = x⁰_s + Σ_{m≤r} ẋ_s^m τ_m = 0.
                for (m, column) in columns.iter_mut().enumerate().take(r + 1) {
                    column[r] = intervals[m].state_slopes[s];
                }
                rhs[r] = -boundary.initial_states[s];
            }
            ExitVariable::Control(c) => {
                // q_c(t_{r+1}) = qᴺ_c + Σ_{m≥r+1} q̇_c^m τ_m = 0.
                for (m, column) in columns.iter_mut().enumerate().skip(r + 1) {
                    column[r] = intervals[m].control_duals[c];
                }
                rhs[r] = -boundary.terminal_duals[c];
            }
        }
    }
    for column in columns.iter_mut() {
        column[n - 1] = 1.0;
    }
    rhs[n - 1] = theta;
    delta_rhs[n - 1] = 1.0;

    let factors = LuFactors::factor(n, &columns).map_err(|s| {
        SclpError::Structure(format!("breakpoint system is singular ({s})"))
    })?;
    let mut lengths = rhs;
    factors.solve(&mut lengths);
    let mut length_deltas = delta_rhs;
    factors.solve(&mut length_deltas);

    // States forward from x⁰, duals backward from qᴺ; both piecewise linear
    // so the breakpoint values determine the trajectories.
    let num_states = data.state_count();
    let mut states = vec![boundary.initial_states.clone()];
    let mut state_deltas = vec![vec![0.0; num_states]];
    for m in 0..n {
        let prev = states.last().unwrap().clone();
        let prev_delta = state_deltas.last().unwrap().clone();
        let slopes = &intervals[m].state_slopes;
        states.push((0..num_states).map(|s| prev[s] + slopes[s] * lengths[m]).collect());
        state_deltas
            .push((0..num_states).map(|s| prev_delta[s] + slopes[s] * length_deltas[m]).collect());
    }
    let mut duals = vec![boundary.terminal_duals.clone()];
    let mut dual_deltas = vec![vec![0.0; num_controls]];
    for m in (0..n).rev() {
        let prev = duals.last().unwrap().clone();
        let prev_delta = dual_deltas.last().unwrap().clone();
        let slopes = &intervals[m].control_duals;
        duals.push((0..num_controls).map(|c| prev[c] + slopes[c] * lengths[m]).collect());
        dual_deltas
            .push((0..num_controls).map(|c| prev_delta[c] + slopes[c] * length_deltas[m]).collect());
    }
    duals.reverse();
    dual_deltas.reverse();

    Ok(IntervalProfile { lengths, length_deltas, states, state_deltas, duals, dual_deltas, exits })
}

/// One collision candidate: what reaches zero, and after how much more
/// horizon growth.
#[derive(Debug, Clone)]
struct Candidate {
    item: CollisionItem,
    ratio: f64,
}

/// Run the parametric sweep with the given interval solver and assemble the
/// full solution at the requested horizon.
pub(crate) fn solve_with_provider<P: RatesProvider + ?Sized>(
    data: &SclpData,
    provider: &mut P,
    boundary: &BoundarySolution,
    horizon: f64,
) -> Result<SclpSolution, SclpError> {
    let (sequence, trace) = solve_parametric(data, provider, boundary, horizon, 0)?;
    let profile = compute_intervals(data, &sequence, boundary, horizon)?;
    let mut breakpoints = Vec::with_capacity(sequence.intervals.len() + 1);
    breakpoints.push(0.0);
    let mut t = 0.0;
    for &tau in &profile.lengths {
        t += tau;
        breakpoints.push(t);
    }
    let objective =
        primal_objective_value(data, &sequence.intervals, &profile.lengths, horizon);
    let dual_objective = dual_objective_value(
        data,
        &sequence.intervals,
        &profile.lengths,
        &profile.duals,
        &boundary.initial_states,
    );
    Ok(SclpSolution {
        breakpoints,
        lengths: profile.lengths,
        sequence,
        states: profile.states,
        dual_states: profile.duals,
        objective,
        dual_objective,
        trace,
    })
}

/// Grow the horizon from 0 to `horizon`, updating the base sequence at
/// every collision. Returns the final sequence and the event trace.
pub(crate) fn solve_parametric<P: RatesProvider + ?Sized>(
    data: &SclpData,
    provider: &mut P,
    boundary: &BoundarySolution,
    horizon: f64,
    depth: usize,
) -> Result<(BaseSequence, SweepTrace), SclpError> {
    let first =
        provider.solve_interval(&boundary.positive_states, &boundary.terminal_pins, None)?;
    let mut sequence = BaseSequence { intervals: vec![first] };
    let mut trace = SweepTrace::default();
    let mut theta = 0.0;
    let budget =
        tolerances::SWEEP_ITERATIONS_PER_DIM * (data.state_count() + data.control_count());

    loop {
        trace.iterations += 1;
        if trace.iterations > budget {
            return Err(SclpError::IterationLimit { iterations: trace.iterations });
        }
        let profile = compute_intervals(data, &sequence, boundary, theta)?;
        let n = sequence.intervals.len();
        if let Some(bad) =
            profile.lengths.iter().find(|&&tau| tau < -tolerances::FEAS * (1.0 + theta))
        {
            return Err(SclpError::Structure(format!(
                "negative interval length {bad} at horizon {theta}"
            )));
        }

        // Collision candidates: anything drifting toward zero from above.
        let mut candidates = Vec::new();
        for m in 0..n {
            if profile.length_deltas[m] < -tolerances::TIME {
                candidates.push(Candidate {
                    item: CollisionItem::Time { interval: m },
                    ratio: (-profile.lengths[m] / profile.length_deltas[m]).max(0.0),
                });
            }
        }
        for bp in 1..=n {
            for s in 0..data.state_count() {
                if profile.state_deltas[bp][s] < -tolerances::TIME {
                    candidates.push(Candidate {
                        item: CollisionItem::State { index: s, breakpoint: bp },
                        ratio: (-profile.states[bp][s] / profile.state_deltas[bp][s]).max(0.0),
                    });
                }
            }
        }
        for bp in 0..n {
            for c in 0..data.control_count() {
                if profile.dual_deltas[bp][c] < -tolerances::TIME {
                    candidates.push(Candidate {
                        item: CollisionItem::Dual { index: c, breakpoint: bp },
                        ratio: (-profile.duals[bp][c] / profile.dual_deltas[bp][c]).max(0.0),
                    });
                }
            }
        }
        let step = candidates.iter().map(|c| c.ratio).fold(f64::INFINITY, f64::min);

        // The horizon check comes first: a collision exactly at T needs no
        // structure change.
        if theta + step >= horizon - tolerances::TIME {
            return Ok((sequence, trace));
        }
        let tie_window = tolerances::TIE_REL * (1.0 + step);
        let tied: Vec<Candidate> =
            candidates.iter().filter(|c| c.ratio <= step + tie_window).cloned().collect();
        let collided_at = theta + step;
        if step <= tolerances::TIME {
            // The previous update did not open the path: simultaneous
            // structure changes are degenerate.
            return Err(SclpError::Degenerate {
                theta: collided_at,
                tied: tied.into_iter().map(|c| c.item).collect(),
            });
        }
        theta = collided_at;
        trace.collision_thetas.push(theta);

        apply_collision(
            data, provider, &mut sequence, boundary, &profile, step, tied, theta, horizon,
            depth, &mut trace,
        )?;
    }
}

/// Classify a tied candidate set and update the base sequence accordingly.
#[allow(clippy::too_many_arguments)]
fn apply_collision<P: RatesProvider + ?Sized>(
    data: &SclpData,
    provider: &mut P,
    sequence: &mut BaseSequence,
    boundary: &BoundarySolution,
    profile: &IntervalProfile,
    step: f64,
    tied: Vec<Candidate>,
    theta: f64,
    horizon: f64,
    depth: usize,
    trace: &mut SweepTrace,
) -> Result<(), SclpError> {
    let mut vanishing: Vec<usize> = Vec::new();
    let mut state_hits: Vec<(usize, usize)> = Vec::new();
    let mut dual_hits: Vec<(usize, usize)> = Vec::new();
    for candidate in &tied {
        match candidate.item {
            CollisionItem::Time { interval } => vanishing.push(interval),
            CollisionItem::State { index, breakpoint } => state_hits.push((index, breakpoint)),
            CollisionItem::Dual { index, breakpoint } => dual_hits.push((index, breakpoint)),
        }
    }
    vanishing.sort_unstable();

    let degenerate = |tied: Vec<Candidate>| SclpError::Degenerate {
        theta,
        tied: tied.into_iter().map(|c| c.item).collect(),
    };

    if !vanishing.is_empty() && state_hits.is_empty() && dual_hits.is_empty() {
        if vanishing.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(degenerate(tied));
        }
        apply_time_collision(
            data, provider, sequence, profile, step, vanishing[0],
            *vanishing.last().unwrap(), theta, horizon, depth, trace,
        )
    } else if vanishing.is_empty() && !state_hits.is_empty() && dual_hits.is_empty() {
        // One state with a zero slope over later intervals touches zero at
        // several consecutive breakpoints at once; that is a single
        // collision at the earliest of them. Anything else is degenerate.
        let index = state_hits[0].0;
        let mut bps: Vec<usize> = state_hits.iter().map(|&(_, bp)| bp).collect();
        bps.sort_unstable();
        if state_hits.iter().any(|&(s, _)| s != index)
            || bps.windows(2).any(|w| w[1] != w[0] + 1)
        {
            return Err(degenerate(tied));
        }
        apply_state_collision(
            data, provider, sequence, boundary, profile, step, index, bps[0], theta,
            horizon, depth, trace,
        )
    } else if vanishing.is_empty() && state_hits.is_empty() && !dual_hits.is_empty() {
        // Time-reversed mirror: a flat dual span collides at its latest
        // breakpoint, where the dual first touches zero going backward.
        let index = dual_hits[0].0;
        let mut bps: Vec<usize> = dual_hits.iter().map(|&(_, bp)| bp).collect();
        bps.sort_unstable();
        if dual_hits.iter().any(|&(c, _)| c != index)
            || bps.windows(2).any(|w| w[1] != w[0] + 1)
        {
            return Err(degenerate(tied));
        }
        apply_dual_collision(
            data, provider, sequence, boundary, profile, step, index, *bps.last().unwrap(),
            theta, horizon, depth, trace,
        )
    } else {
        Err(degenerate(tied))
    }
}

/// Values of a breakpoint quantity at the collision horizon.
fn advanced(values: &[f64], deltas: &[f64], step: f64) -> Vec<f64> {
    values.iter().zip(deltas).map(|(v, d)| v + d * step).collect()
}

fn adjacent_sets(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> bool {
    a.difference(b).count() == 1 && b.difference(a).count() == 1
}

/// A contiguous run of intervals shrank to zero length: remove it, bridging
/// with a fresh base when the surviving neighbours are not adjacent.
#[allow(clippy::too_many_arguments)]
fn apply_time_collision<P: RatesProvider + ?Sized>(
    data: &SclpData,
    provider: &mut P,
    sequence: &mut BaseSequence,
    profile: &IntervalProfile,
    step: f64,
    run_start: usize,
    run_end: usize,
    theta: f64,
    horizon: f64,
    depth: usize,
    trace: &mut SweepTrace,
) -> Result<(), SclpError> {
    let n = sequence.intervals.len();
    if run_start == 0 && run_end == n - 1 {
        return Err(SclpError::Structure(format!(
            "every interval collapsed at horizon {theta}"
        )));
    }
    if run_start == 0 || run_end == n - 1 {
        // Edge runs disappear outright; the boundary conditions take over.
        sequence.intervals.drain(run_start..=run_end);
        trace.events.push(format!(
            "theta={theta:.6}: intervals {run_start}..={run_end} collapsed at the edge; removed"
        ));
        return Ok(());
    }
    let left = &sequence.intervals[run_start - 1];
    let right = &sequence.intervals[run_end + 1];
    if adjacent_sets(&left.structural_basis(data), &right.structural_basis(data)) {
        sequence.intervals.drain(run_start..=run_end);
        trace.events.push(format!(
            "theta={theta:.6}: intervals {run_start}..={run_end} collapsed; neighbours adjacent, removed"
        ));
        return Ok(());
    }
    // The survivors are more than one pivot apart: bridge with the base
    // from the left neighbour's free states and the right's pins.
    let free = left.free_states.clone();
    let pins = right.pinned_controls.clone();
    let warm = left.basis.clone();
    let x_hat = advanced(&profile.states[run_start], &profile.state_deltas[run_start], step);
    let q_hat = advanced(&profile.duals[run_end + 1], &profile.dual_deltas[run_end + 1], step);
    place_new_interval(
        data, provider, sequence, free, pins, run_start, run_end - run_start + 1, warm, x_hat,
        q_hat, theta, horizon, depth, trace,
        &format!("intervals {run_start}..={run_end} collapsed between non-adjacent neighbours"),
    )
}

/// A state reached zero at a breakpoint: pivot its slope out of the earlier
/// basis.
#[allow(clippy::too_many_arguments)]
fn apply_state_collision<P: RatesProvider + ?Sized>(
    data: &SclpData,
    provider: &mut P,
    sequence: &mut BaseSequence,
    boundary: &BoundarySolution,
    profile: &IntervalProfile,
    step: f64,
    state: usize,
    breakpoint: usize,
    theta: f64,
    horizon: f64,
    depth: usize,
    trace: &mut SweepTrace,
) -> Result<(), SclpError> {
    let n = sequence.intervals.len();
    let x_hat = advanced(&profile.states[breakpoint], &profile.state_deltas[breakpoint], step);
    let q_hat = advanced(&profile.duals[breakpoint], &profile.dual_deltas[breakpoint], step);
    if breakpoint == n {
        // The state empties exactly at the horizon: append a base that
        // keeps it at zero from here on.
        let last = &sequence.intervals[n - 1];
        let mut free = last.free_states.clone();
        free.remove(&state);
        let pins = boundary.terminal_pins.clone();
        let warm = last.basis.clone();
        place_new_interval(
            data, provider, sequence, free, pins, n, 0, warm, x_hat, q_hat, theta, horizon,
            depth, trace, &format!("state {state} empties at the horizon"),
        )
    } else {
        // Interior: a new base slots in between; it keeps the left
        // neighbour's free states minus the collided one and relaxes the
        // right neighbour's pins by the variable that used to leave here.
        let left = &sequence.intervals[breakpoint - 1];
        let right = &sequence.intervals[breakpoint];
        let mut free = left.free_states.clone();
        free.remove(&state);
        let mut pins = right.pinned_controls.clone();
        if let ExitVariable::Control(c) = profile.exits[breakpoint - 1] {
            pins.remove(&c);
        }
        let warm = left.basis.clone();
        place_new_interval(
            data, provider, sequence, free, pins, breakpoint, 0, warm, x_hat, q_hat, theta,
            horizon, depth, trace,
            &format!("state {state} hits zero at breakpoint {breakpoint}"),
        )
    }
}

/// A control's dual reached zero at a breakpoint: pivot the control into
/// the later basis (time-reversed mirror of the state case).
#[allow(clippy::too_many_arguments)]
fn apply_dual_collision<P: RatesProvider + ?Sized>(
    data: &SclpData,
    provider: &mut P,
    sequence: &mut BaseSequence,
    boundary: &BoundarySolution,
    profile: &IntervalProfile,
    step: f64,
    control: usize,
    breakpoint: usize,
    theta: f64,
    horizon: f64,
    depth: usize,
    trace: &mut SweepTrace,
) -> Result<(), SclpError> {
    let x_hat = advanced(&profile.states[breakpoint], &profile.state_deltas[breakpoint], step);
    let q_hat = advanced(&profile.duals[breakpoint], &profile.dual_deltas[breakpoint], step);
    if breakpoint == 0 {
        // The dual empties at time zero: prepend a base with the control
        // unpinned from the first interval's pins.
        let first = &sequence.intervals[0];
        let free = boundary.positive_states.clone();
        let mut pins = first.pinned_controls.clone();
        pins.remove(&control);
        let warm = first.basis.clone();
        place_new_interval(
            data, provider, sequence, free, pins, 0, 0, warm, x_hat, q_hat, theta, horizon,
            depth, trace, &format!("dual of control {control} hits zero at time zero"),
        )
    } else {
        let left = &sequence.intervals[breakpoint - 1];
        let right = &sequence.intervals[breakpoint];
        let mut free = left.free_states.clone();
        if let ExitVariable::State(s) = profile.exits[breakpoint - 1] {
            free.remove(&s);
        }
        let mut pins = right.pinned_controls.clone();
        pins.remove(&control);
        let warm = right.basis.clone();
        place_new_interval(
            data, provider, sequence, free, pins, breakpoint, 0, warm, x_hat, q_hat, theta,
            horizon, depth, trace,
            &format!("dual of control {control} hits zero at breakpoint {breakpoint}"),
        )
    }
}

/// Solve the base for the given index sets and splice it into the sequence,
/// falling back to a short recursive solve when the single base does not
/// restore pairwise adjacency.
#[allow(clippy::too_many_arguments)]
fn place_new_interval<P: RatesProvider + ?Sized>(
    data: &SclpData,
    provider: &mut P,
    sequence: &mut BaseSequence,
    free: BTreeSet<usize>,
    pins: BTreeSet<usize>,
    insert_at: usize,
    replace: usize,
    warm: Basis,
    x_hat: Vec<f64>,
    q_hat: Vec<f64>,
    theta: f64,
    horizon: f64,
    depth: usize,
    trace: &mut SweepTrace,
    what: &str,
) -> Result<(), SclpError> {
    let left_set = insert_at
        .checked_sub(1)
        .map(|i| sequence.intervals[i].structural_basis(data));
    let right_idx = insert_at + replace;
    let right_set = (right_idx < sequence.intervals.len())
        .then(|| sequence.intervals[right_idx].structural_basis(data));

    let candidate = provider.solve_interval(&free, &pins, Some(&warm))?;
    let candidate_set = candidate.structural_basis(data);
    let fits = left_set.as_ref().is_none_or(|l| adjacent_sets(l, &candidate_set))
        && right_set.as_ref().is_none_or(|r| adjacent_sets(&candidate_set, r));
    if fits {
        sequence.intervals.splice(insert_at..right_idx, [candidate]);
        trace.events.push(format!("theta={theta:.6}: {what}; spliced one base"));
        return Ok(());
    }

    // Single-pivot repair failed: anchor a short recursive solve at the
    // collision values and splice in whatever structure it finds.
    if depth >= tolerances::MAX_SUBPROBLEM_DEPTH {
        return Err(SclpError::SubproblemDepth { depth: depth + 1, theta });
    }
    let sub_boundary = BoundarySolution {
        initial_states: x_hat.iter().map(|v| v.max(0.0)).collect(),
        terminal_duals: q_hat.iter().map(|v| v.max(0.0)).collect(),
        positive_states: free,
        terminal_pins: pins,
    };
    let eps = tolerances::SUBPROBLEM_HORIZON_REL * (1.0 + horizon);
    let (sub_sequence, sub_trace) =
        solve_parametric(data, provider, &sub_boundary, eps, depth + 1)?;
    let mut pieces = sub_sequence.intervals;
    // Drop pieces equal to the splice's neighbours: the repair may rediscover
    // them at its own boundaries.
    while let (Some(l), Some(first)) = (left_set.as_ref(), pieces.first()) {
        if &first.structural_basis(data) == l {
            pieces.remove(0);
        } else {
            break;
        }
    }
    while let (Some(r), Some(last)) = (right_set.as_ref(), pieces.last()) {
        if &last.structural_basis(data) == r {
            pieces.pop();
        } else {
            break;
        }
    }
    if pieces.is_empty() && replace == 0 {
        return Err(SclpError::Structure(format!(
            "repair solve found no new bases at horizon {theta} ({what})"
        )));
    }
    let spliced = pieces.len();
    sequence.intervals.splice(insert_at..right_idx, pieces);
    for (m, pair) in sequence.intervals.windows(2).enumerate() {
        if !adjacent_sets(&pair[0].structural_basis(data), &pair[1].structural_basis(data)) {
            return Err(SclpError::Structure(format!(
                "bases {m} and {} are not adjacent after the repair splice at horizon {theta}",
                m + 1
            )));
        }
    }
    trace.events.push(format!(
        "theta={theta:.6}: {what}; repair solve spliced {spliced} bases \
         ({} iterations)",
        sub_trace.iterations
    ));
    Ok(())
}
