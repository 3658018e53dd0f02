//! Separated continuous linear programming (SCLP) for fluid multiclass
//! processing networks, with robust counterparts under one-sided budgeted
//! uncertainty.
//!
//! The crate solves problems of the form
//!
//! ```text
//! max  ∫₀ᵀ (γ + (T−t)c)ᵀ u(t) dt
//! s.t. ∫₀ᵗ G u(s) ds + [I F] x(t) = α + a·t
//!      H u(t) ≤ b,   u(t) ≥ 0,  x(t) ≥ 0
//! ```
//!
//! exactly, by a parametric simplex sweep over the time horizon: optimal
//! controls are piecewise constant, states are continuous piecewise linear,
//! and the solver returns the full breakpoint structure together with the
//! dual trajectory and a machine-checkable optimality certificate.
//!
//! On top of the nominal solver sits a robust layer for service-rate
//! uncertainty `μ_j = μ̄_j − μ̃_j·Ξ_j(t)` with per-server budgets
//! `Σ_{s(j)=i} Ξ_j ≤ Γ_i`: an uncertainty-set reduction that absorbs
//! non-binding budgets, a cutting-plane solver for the robust interval
//! problems, and the explicit robust-counterpart builders used to
//! cross-check everything.
//!
//! # Quick start
//!
//! ```
//! use sclp::model::{Buffer, Flow, FluidNetwork, Server};
//!
//! // One buffer holding 1 unit of fluid, drained at rate 2 by one flow.
//! let net = FluidNetwork {
//!     servers: vec![Server { id: 1, budget: 0.0 }],
//!     buffers: vec![Buffer { id: 1, alpha: 1.0, input_rate: 0.0, holding_cost: 1.0 }],
//!     flows: vec![Flow {
//!         id: 1,
//!         server: 1,
//!         buffer: 1,
//!         mu_bar: 2.0,
//!         mu_tilde: 0.0,
//!         processing_cost: 0.0,
//!         routing: vec![],
//!     }],
//!     horizon: 1.0,
//! };
//! let data = sclp::model::build_matrices(&net).unwrap();
//! let sol = sclp::sclp::sclp_simplex(&data, data.horizon).unwrap();
//! assert!((sol.objective - 0.75).abs() < 1e-10);
//! assert!((sol.breakpoints[1] - 0.5).abs() < 1e-10);
//! ```

#![deny(missing_debug_implementations)]
#![warn(missing_docs)]

pub mod bench;
pub mod cli;
pub mod io;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod rc;
pub mod robust;
pub mod sclp;
pub mod tolerances;
