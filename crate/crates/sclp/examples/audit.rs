//! Stress a plan against sampled degradations — and watch one fail.
//!
//! The audit replays a stored plan's controls against random admissible
//! degradation paths (budget-polytope vertices, an injected closed-form
//! worst case, box samples) and integrates the true states. A robust plan
//! must keep every sampled trajectory nonnegative and never promise more
//! than the replay delivers; a nominal plan on an uncertain network gets
//! caught overcommitting.
//!
//! Run with: `cargo run --example audit`

use sclp::model::{build_matrices, Buffer, Flow, FluidNetwork, Route, Server};
use sclp::oracle::audit_feasibility;
use sclp::robust::robust_sclp_simplex;
use sclp::sclp::sclp_simplex;

fn main() {
    // Uncertain upstream flow refills the downstream buffer: if the rate
    // degrades, a plan that counted on full speed starves the refill.
    let net = FluidNetwork {
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
    let data = build_matrices(&net).expect("valid network");

    let robust = robust_sclp_simplex(&data, data.horizon).expect("robust solve");
    let nominal = sclp_simplex(&data, data.horizon).expect("nominal solve");

    println!("robust plan guarantees {:.6}; nominal plan promises {:.6}", robust.objective, nominal.objective);
    println!();

    let report = audit_feasibility(&data, &robust, 2000, 42);
    println!("robust plan under 2000 sampled degradations:");
    println!("  max state violation:    {:.3e}", report.max_state_violation);
    println!("  max capacity violation: {:.3e}", report.max_capacity_violation);
    println!("  guarantee violation:    {:.3e}", report.guarantee_violation);
    println!("  verdict: {}", if report.passed { "PASS" } else { "FAIL" });
    assert!(report.passed, "the robust plan must survive every sample");

    let report = audit_feasibility(&data, &nominal, 2000, 42);
    println!();
    println!("nominal plan under the same 2000 degradations:");
    println!("  max state violation:    {:.3e}", report.max_state_violation);
    if let Some(worst) = &report.worst {
        println!(
            "  worst sample {} drives state {} to -{:.4} at t = {:.4}",
            worst.index, worst.state, worst.violation, worst.time
        );
    }
    println!("  verdict: {}", if report.passed { "PASS" } else { "FAIL" });
    assert!(!report.passed, "the nominal plan must get caught");
    assert!(report.max_state_violation > 0.1);

    println!("\nthe nominal plan overcommits the downstream refill; the robust one does not");
}
