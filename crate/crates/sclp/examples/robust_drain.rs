//! Price service-rate uncertainty into a plan and inspect the certificates.
//!
//! The drain's service rate is no longer a fixed 2: an adversary may degrade
//! it by up to μ̃ = 1 (to rate 1), subject to the server's budget Γ = 1.
//! The robust solver guarantees its objective against every admissible
//! degradation path by solving each interval's rates problem with cutting
//! planes, and maps the cut duals onto the explicit robust counterpart so
//! the worst case is certified, not just sampled.
//!
//! Run with: `cargo run --example robust_drain`

use sclp::model::{build_matrices, Buffer, Flow, FluidNetwork, Server};
use sclp::robust::robust_sclp_simplex;
use sclp::sclp::sclp_simplex;

fn main() {
    let net = FluidNetwork {
        servers: vec![Server { id: 1, budget: 1.0 }],
        buffers: vec![Buffer { id: 1, alpha: 1.0, input_rate: 0.0, holding_cost: 1.0 }],
        flows: vec![Flow {
            id: 1,
            server: 1,
            buffer: 1,
            mu_bar: 2.0,
            mu_tilde: 1.0,
            processing_cost: 0.0,
            routing: vec![],
        }],
        horizon: 1.0,
    };
    let data = build_matrices(&net).expect("valid network");

    // The nominal plan pretends the degradation away; the robust plan
    // guarantees its value. The difference is the price of robustness.
    let nominal = sclp_simplex(&data, data.horizon).expect("nominal solve");
    let robust = robust_sclp_simplex(&data, data.horizon).expect("robust solve");
    println!("nominal objective: {:.12}", nominal.objective);
    println!("robust objective:  {:.12}  (hand value: 0.375)", robust.objective);
    println!(
        "price of robustness: {:.12}",
        nominal.objective - robust.objective
    );

    // Each robust interval records which degradation patterns bind and how
    // the objective row was degraded.
    println!();
    for (n, basis) in robust.sequence.intervals.iter().enumerate() {
        let info = basis.robust.as_ref().expect("robust solve marks every interval");
        println!(
            "interval [{:.3}, {:.3}]: u = {:.4}, objective degradation {:?}",
            robust.breakpoints[n],
            robust.breakpoints[n + 1],
            basis.controls[0],
            info.cost_adjustment,
        );
        for cut in &info.realizations {
            println!(
                "  binding pattern on state {}: xi = {:?}, dual weight {:.4}",
                cut.state, cut.xi, cut.dual
            );
        }
    }

    assert!((robust.objective - 0.375).abs() < 1e-10);
    assert!(robust.objective <= nominal.objective + 1e-12);
    println!("\nrobust <= nominal, as a guarantee must be");
}
