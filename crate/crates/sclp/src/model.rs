//! Fluid multiclass processing networks and their translation into the
//! separated continuous linear program solved by [`crate::sclp`].
//!
//! A network is a set of *servers* (capacity 1 each), *buffers* (holding
//! fluid with linear holding costs), and *flows*: a flow `j` runs on server
//! `s(j)`, drains buffer `f(j)` at a nominal service rate `μ̄_j`, and routes
//! fixed fractions of the drained fluid into downstream buffers. Service
//! rates may be uncertain: the realized rate is `μ̄_j − μ̃_j·Ξ_j(t)` with
//! `Ξ_j(t) ∈ [0, 1]` and a per-server budget `Σ_{s(j)=i} Ξ_j(t) ≤ Γ_i` at
//! every time instant.
//!
//! [`build_matrices`] produces the constraint data in the separated form
//!
//! ```text
//! max  ∫₀ᵀ (γ + (T−t)·c̄)ᵀu(t) dt
//! s.t. ∫₀ᵗ Ḡ u(s) ds + x(t) = α + a·t      (buffer balance)
//!      H u(t) = b,  u ≥ 0,  x ≥ 0           (server capacity)
//! ```
//!
//! where `u_j = fraction of server s(j) allocated to flow j`. The rate
//! pattern is split into a unit part and magnitudes: `G` carries `+1` on the
//! drained buffer's row and `−p` on each routed row, `Ḡ = G∘μ̄` columnwise,
//! and the uncertain part is `G̃ = −G∘μ̃` (negative on the drained row, where
//! a slower rate *raises* the level, positive on inflow rows, where it can
//! push the receiving buffer down). Objective rates follow the same split:
//! `c = gᵀG` prices a unit of service by the holding cost it relieves,
//! `c̄ = c∘μ̄`, `c̃ = c∘μ̃`, and `γ = −h` carries flat processing costs.
//!
//! The translation also carries empty placeholders (`F`, `d`, extra states)
//! so the boundary and rates subproblems can be written against the general
//! separated form; networks always produce the pure-buffer special case.

use serde::{Deserialize, Serialize};

/// A server with unit capacity and an uncertainty budget.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Server {
    /// External identifier (1-based in files, arbitrary but unique).
    pub id: u32,
    /// Uncertainty budget Γ: at every instant, at most this much total
    /// degradation (in [0,1] units per flow) across the server's flows.
    /// Must satisfy `0 ≤ Γ ≤ number of flows on the server`.
    pub budget: f64,
}

/// A buffer holding fluid.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Buffer {
    /// External identifier.
    pub id: u32,
    /// Initial fluid level α ≥ 0.
    pub alpha: f64,
    /// Exogenous inflow rate a (may be negative for scheduled outflow).
    pub input_rate: f64,
    /// Linear holding cost g ≥ 0 per unit of fluid per unit of time.
    pub holding_cost: f64,
}

/// Routing of a fixed fraction of a flow's output into a buffer.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Route {
    /// Destination buffer id.
    pub to: u32,
    /// Fraction p ∈ [0, 1]; fractions of one flow sum to at most 1, the
    /// remainder leaves the network.
    pub p: f64,
}

/// A flow: one (server, buffer) processing activity.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Flow {
    /// External identifier.
    pub id: u32,
    /// Server the flow runs on.
    pub server: u32,
    /// Buffer the flow drains.
    pub buffer: u32,
    /// Nominal service rate μ̄ > 0.
    pub mu_bar: f64,
    /// Maximum rate degradation μ̃ ∈ [0, μ̄].
    pub mu_tilde: f64,
    /// Flat processing cost h ≥ 0 per unit of allocation per unit of time.
    #[serde(default)]
    pub processing_cost: f64,
    /// Downstream routing fractions.
    #[serde(default)]
    pub routing: Vec<Route>,
}

/// A fluid processing network over a finite horizon.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FluidNetwork {
    /// Servers, each with unit capacity.
    pub servers: Vec<Server>,
    /// Buffers.
    pub buffers: Vec<Buffer>,
    /// Flows.
    pub flows: Vec<Flow>,
    /// Time horizon T > 0.
    pub horizon: f64,
}

/// Validation failure for a network description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelError {
    /// Human-readable diagnostics, one per problem found.
    pub problems: Vec<String>,
}

impl std::fmt::Display for ModelError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid network: {}", self.problems.join("; "))
    }
}

impl std::error::Error for ModelError {}

/// Matrix-form problem data consumed by the solvers.
///
/// Dimensions: `K` buffers plus `L` extra states (always 0 for networks),
/// `J` flows (controls), `I` servers (capacity rows). Controls are indexed
/// `0..J+I` throughout the crate: flow allocations first, then the capacity
/// slack of each server. States are indexed `0..K+L`.
#[derive(Debug, Clone, PartialEq)]
pub struct SclpData {
    /// Number of buffers K.
    pub num_buffers: usize,
    /// Number of flows J.
    pub num_flows: usize,
    /// Number of servers I.
    pub num_servers: usize,
    /// Number of extra (non-buffer) states L; 0 for networks.
    pub num_extra_states: usize,
    /// Unit balance pattern G (K×J, row-major): +1 on the drained buffer's
    /// row, −p on each routed row.
    pub g_unit: Vec<f64>,
    /// Nominal balance matrix Ḡ = G∘μ̄ columnwise (K×J, row-major).
    pub g_bar: Vec<f64>,
    /// Uncertain balance part G̃ = −G∘μ̃ columnwise (K×J, row-major, signed:
    /// −μ̃ on the drained row, +p·μ̃ on routed rows).
    pub g_tilde: Vec<f64>,
    /// Extra-state coupling F (K×L, row-major); empty for networks.
    pub f_mat: Vec<f64>,
    /// Server-assignment matrix H (I×J, row-major, 0/1).
    pub h: Vec<f64>,
    /// Server capacities b (all ones for unit-capacity servers).
    pub b: Vec<f64>,
    /// Initial buffer levels α (length K).
    pub alpha: Vec<f64>,
    /// Exogenous input rates a (length K).
    pub input_rate: Vec<f64>,
    /// Unit objective rates c = gᵀG (length J).
    pub c_unit: Vec<f64>,
    /// Nominal objective rates c̄ = c∘μ̄ (length J).
    pub c_bar: Vec<f64>,
    /// Uncertain objective part c̃ = c∘μ̃ (length J, signed).
    pub c_tilde: Vec<f64>,
    /// Flat objective rates γ = −processing cost (length J).
    pub gamma: Vec<f64>,
    /// Terminal value d of the extra states (length L); empty for networks.
    pub d_cost: Vec<f64>,
    /// Uncertainty budgets Γ per server (length I).
    pub budgets: Vec<f64>,
    /// Horizon T.
    pub horizon: f64,
    /// Server index (0-based) of each flow.
    pub server_of_flow: Vec<usize>,
    /// Buffer index (0-based) drained by each flow.
    pub buffer_of_flow: Vec<usize>,
    /// Nominal service rate μ̄ per flow (length J).
    pub mu_bar: Vec<f64>,
    /// Maximum degradation μ̃ per flow (length J).
    pub mu_tilde: Vec<f64>,
}

impl SclpData {
    /// Entry G[k][j] of the unit balance pattern.
    pub fn g_unit_at(&self, k: usize, j: usize) -> f64 {
        self.g_unit[k * self.num_flows + j]
    }

    /// Entry Ḡ[k][j].
    pub fn g_bar_at(&self, k: usize, j: usize) -> f64 {
        self.g_bar[k * self.num_flows + j]
    }

    /// Entry G̃[k][j].
    pub fn g_tilde_at(&self, k: usize, j: usize) -> f64 {
        self.g_tilde[k * self.num_flows + j]
    }

    /// Entry H[i][j].
    pub fn h_at(&self, i: usize, j: usize) -> f64 {
        self.h[i * self.num_flows + j]
    }

    /// Entry F[k][l] of the extra-state coupling.
    pub fn f_at(&self, k: usize, l: usize) -> f64 {
        self.f_mat[k * self.num_extra_states + l]
    }

    /// Number of states K+L.
    pub fn state_count(&self) -> usize {
        self.num_buffers + self.num_extra_states
    }

    /// Number of controls J+I (flow allocations, then capacity slacks).
    pub fn control_count(&self) -> usize {
        self.num_flows + self.num_servers
    }

    /// Flows assigned to server `i`, in index order.
    pub fn flows_on_server(&self, i: usize) -> Vec<usize> {
        (0..self.num_flows).filter(|&j| self.server_of_flow[j] == i).collect()
    }

    /// Realized balance-matrix entry under degradation `ξ ∈ [0,1]` of flow
    /// `j`: `Ḡ[k][j] + ξ·G̃[k][j]`, the signed ground truth used by the
    /// feasibility audit. (Equivalently the whole column scales with the
    /// realized rate `μ̄ − μ̃·ξ`.)
    pub fn g_realized_at(&self, k: usize, j: usize, xi: f64) -> f64 {
        self.g_bar_at(k, j) + xi * self.g_tilde_at(k, j)
    }

    /// True if any flow has a nonzero uncertain rate.
    pub fn has_uncertainty(&self) -> bool {
        self.mu_tilde.iter().any(|&m| m != 0.0)
    }

    /// A deterministic instance built directly from matrices, for synthetic
    /// test problems outside the network translation. Unit rates (μ̄ = 1,
    /// μ̃ = 0), zero budgets, no flat costs, no extra states.
    pub fn deterministic(
        g_bar: Vec<f64>,
        h: Vec<f64>,
        b: Vec<f64>,
        alpha: Vec<f64>,
        input_rate: Vec<f64>,
        c_bar: Vec<f64>,
        horizon: f64,
    ) -> SclpData {
        let num_servers = b.len();
        let num_buffers = alpha.len();
        let num_flows = c_bar.len();
        assert_eq!(g_bar.len(), num_buffers * num_flows);
        assert_eq!(h.len(), num_servers * num_flows);
        assert_eq!(input_rate.len(), num_buffers);
        let server_of_flow = (0..num_flows)
            .map(|j| (0..num_servers).find(|&i| h[i * num_flows + j] != 0.0).unwrap_or(0))
            .collect();
        let buffer_of_flow = (0..num_flows)
            .map(|j| (0..num_buffers).find(|&k| g_bar[k * num_flows + j] > 0.0).unwrap_or(0))
            .collect();
        SclpData {
            num_buffers,
            num_flows,
            num_servers,
            num_extra_states: 0,
            g_unit: g_bar.clone(),
            g_bar,
            g_tilde: vec![0.0; num_buffers * num_flows],
            f_mat: Vec::new(),
            h,
            b,
            alpha,
            input_rate,
            c_unit: c_bar.clone(),
            c_bar: c_bar.clone(),
            c_tilde: vec![0.0; num_flows],
            gamma: vec![0.0; num_flows],
            d_cost: Vec::new(),
            budgets: vec![0.0; num_servers],
            horizon,
            server_of_flow,
            buffer_of_flow,
            mu_bar: vec![1.0; num_flows],
            mu_tilde: vec![0.0; num_flows],
        }
    }

    /// Attach extra states with coupling F (K×L, row-major) and terminal
    /// values d (length L) to a synthetic instance.
    pub fn with_extra_states(mut self, f_mat: Vec<f64>, d_cost: Vec<f64>) -> SclpData {
        assert_eq!(f_mat.len(), self.num_buffers * d_cost.len());
        self.num_extra_states = d_cost.len();
        self.f_mat = f_mat;
        self.d_cost = d_cost;
        self
    }
}

/// Check a network description for structural and numeric problems,
/// reporting all of them at once.
pub fn validate(net: &FluidNetwork) -> Result<(), ModelError> {
    let mut problems = Vec::new();
    if net.servers.is_empty() {
        problems.push("network has no servers".to_string());
    }
    if net.buffers.is_empty() {
        problems.push("network has no buffers".to_string());
    }
    if net.flows.is_empty() {
        problems.push("network has no flows".to_string());
    }
    if !(net.horizon > 0.0) || !net.horizon.is_finite() {
        problems.push(format!("horizon must be positive and finite, got {}", net.horizon));
    }

    let mut server_ids = std::collections::BTreeSet::new();
    for s in &net.servers {
        if !server_ids.insert(s.id) {
            problems.push(format!("duplicate server id {}", s.id));
        }
        if !(s.budget >= 0.0) || !s.budget.is_finite() {
            problems.push(format!("server {} budget must be finite and ≥ 0, got {}", s.id, s.budget));
        }
    }
    let mut buffer_ids = std::collections::BTreeSet::new();
    for b in &net.buffers {
        if !buffer_ids.insert(b.id) {
            problems.push(format!("duplicate buffer id {}", b.id));
        }
        if !(b.alpha >= 0.0) || !b.alpha.is_finite() {
            problems.push(format!("buffer {} initial level must be finite and ≥ 0, got {}", b.id, b.alpha));
        }
        if !b.input_rate.is_finite() {
            problems.push(format!("buffer {} input rate must be finite", b.id));
        }
        if !(b.holding_cost >= 0.0) || !b.holding_cost.is_finite() {
            problems.push(format!("buffer {} holding cost must be finite and ≥ 0, got {}", b.id, b.holding_cost));
        }
    }
    let mut flow_ids = std::collections::BTreeSet::new();
    for fl in &net.flows {
        if !flow_ids.insert(fl.id) {
            problems.push(format!("duplicate flow id {}", fl.id));
        }
        if !server_ids.contains(&fl.server) {
            problems.push(format!("flow {} references unknown server {}", fl.id, fl.server));
        }
        if !buffer_ids.contains(&fl.buffer) {
            problems.push(format!("flow {} references unknown buffer {}", fl.id, fl.buffer));
        }
        if !(fl.mu_bar > 0.0) || !fl.mu_bar.is_finite() {
            problems.push(format!("flow {} service rate must be positive and finite, got {}", fl.id, fl.mu_bar));
        }
        if !(fl.mu_tilde >= 0.0) || !fl.mu_tilde.is_finite() || fl.mu_tilde > fl.mu_bar {
            problems.push(format!(
                "flow {} rate degradation must lie in [0, μ̄] = [0, {}], got {}",
                fl.id, fl.mu_bar, fl.mu_tilde
            ));
        }
        if !(fl.processing_cost >= 0.0) || !fl.processing_cost.is_finite() {
            problems.push(format!(
                "flow {} processing cost must be finite and ≥ 0, got {}",
                fl.id, fl.processing_cost
            ));
        }
        let mut total = 0.0;
        let mut seen = std::collections::BTreeSet::new();
        for r in &fl.routing {
            if !buffer_ids.contains(&r.to) {
                problems.push(format!("flow {} routes to unknown buffer {}", fl.id, r.to));
            }
            if r.to == fl.buffer {
                problems.push(format!("flow {} routes back into the buffer it drains", fl.id));
            }
            if !seen.insert(r.to) {
                problems.push(format!("flow {} routes twice to buffer {}", fl.id, r.to));
            }
            if !(r.p >= 0.0) || !r.p.is_finite() {
                problems.push(format!("flow {} routing fraction to buffer {} must be ≥ 0", fl.id, r.to));
            }
            total += r.p;
        }
        if total > 1.0 + 1e-12 {
            problems.push(format!("flow {} routing fractions sum to {total} > 1", fl.id));
        }
    }
    // Budgets are only meaningful up to the number of flows that share the
    // server, and an idle server would make a zero row in H.
    for s in &net.servers {
        let count = net.flows.iter().filter(|fl| fl.server == s.id).count();
        if count == 0 {
            problems.push(format!("server {} serves no flow", s.id));
        }
        if s.budget > count as f64 {
            problems.push(format!(
                "server {} budget Γ = {} exceeds its flow count {}",
                s.id, s.budget, count
            ));
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(ModelError { problems })
    }
}

/// Translate a validated network into matrix form.
///
/// Index conventions: buffers, flows, and servers are numbered 0-based in
/// the order they appear in the network description; external ids appear
/// only in file I/O.
pub fn build_matrices(net: &FluidNetwork) -> Result<SclpData, ModelError> {
    validate(net)?;
    let k = net.buffers.len();
    let j = net.flows.len();
    let i = net.servers.len();

    let buffer_index = |id: u32| net.buffers.iter().position(|b| b.id == id).expect("validated id");
    let server_index = |id: u32| net.servers.iter().position(|s| s.id == id).expect("validated id");

    let mut g_unit = vec![0.0; k * j];
    let mut h = vec![0.0; i * j];
    let mut server_of_flow = Vec::with_capacity(j);
    let mut buffer_of_flow = Vec::with_capacity(j);

    for (jj, fl) in net.flows.iter().enumerate() {
        let kf = buffer_index(fl.buffer);
        let si = server_index(fl.server);
        server_of_flow.push(si);
        buffer_of_flow.push(kf);
        h[si * j + jj] = 1.0;

        // Unit pattern: one unit of service removes one unit of fluid from
        // the drained buffer and delivers p into each routed buffer.
        g_unit[kf * j + jj] += 1.0;
        for r in &fl.routing {
            g_unit[buffer_index(r.to) * j + jj] -= r.p;
        }
    }

    // Scale the pattern by the rate magnitudes: Ḡ = G∘μ̄ and G̃ = −G∘μ̃, so
    // the realized matrix under degradation ξ_j ∈ [0,1] is Ḡ + G̃∘ξ.
    let mut g_bar = vec![0.0; k * j];
    let mut g_tilde = vec![0.0; k * j];
    for kk in 0..k {
        for (jj, fl) in net.flows.iter().enumerate() {
            g_bar[kk * j + jj] = g_unit[kk * j + jj] * fl.mu_bar;
            g_tilde[kk * j + jj] = -g_unit[kk * j + jj] * fl.mu_tilde;
        }
    }

    // Objective rates: c = gᵀG prices a unit of service by the net holding
    // cost it relieves; the magnitudes split the same way as the balance.
    let holding: Vec<f64> = net.buffers.iter().map(|b| b.holding_cost).collect();
    let mut c_unit = vec![0.0; j];
    for jj in 0..j {
        for kk in 0..k {
            c_unit[jj] += holding[kk] * g_unit[kk * j + jj];
        }
    }
    let c_bar: Vec<f64> = (0..j).map(|jj| c_unit[jj] * net.flows[jj].mu_bar).collect();
    let c_tilde: Vec<f64> = (0..j).map(|jj| c_unit[jj] * net.flows[jj].mu_tilde).collect();

    Ok(SclpData {
        num_buffers: k,
        num_flows: j,
        num_servers: i,
        num_extra_states: 0,
        g_unit,
        g_bar,
        g_tilde,
        f_mat: Vec::new(),
        h,
        b: vec![1.0; i],
        alpha: net.buffers.iter().map(|b| b.alpha).collect(),
        input_rate: net.buffers.iter().map(|b| b.input_rate).collect(),
        c_unit,
        c_bar,
        c_tilde,
        gamma: net.flows.iter().map(|f| -f.processing_cost).collect(),
        d_cost: Vec::new(),
        budgets: net.servers.iter().map(|s| s.budget).collect(),
        horizon: net.horizon,
        server_of_flow,
        buffer_of_flow,
        mu_bar: net.flows.iter().map(|f| f.mu_bar).collect(),
        mu_tilde: net.flows.iter().map(|f| f.mu_tilde).collect(),
    })
}
