//! Map cutting-plane duals onto the explicit robust counterpart.
//!
//! The cutting-plane solver prices whole degradation patterns; the explicit
//! counterpart prices budgets and per-flow overflows. This example solves a
//! robust rates problem both ways, folds the pattern duals onto counterpart
//! variables, and verifies they are feasible for the counterpart's explicit
//! dual with the same objective — the two formulations certify each other.
//!
//! Run with: `cargo run --example counterpart_duals`

use std::collections::BTreeSet;

use sclp::model::{build_matrices, Buffer, Flow, FluidNetwork, Route, Server};
use sclp::rc::{build_rates_rc, check_dual_point, dual_point_from_mapping, explicit_dual};
use sclp::robust::{cutting_planes_rates, CutPool};

fn main() {
    let net = FluidNetwork {
        servers: vec![Server { id: 1, budget: 0.7 }, Server { id: 2, budget: 0.0 }],
        buffers: vec![
            Buffer { id: 1, alpha: 1.0, input_rate: 0.1, holding_cost: 2.0 },
            Buffer { id: 2, alpha: 0.0, input_rate: 0.0, holding_cost: 1.0 },
        ],
        flows: vec![
            Flow {
                id: 1,
                server: 1,
                buffer: 1,
                mu_bar: 2.0,
                mu_tilde: 0.8,
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
    let free = BTreeSet::from([0]);
    let pinned = BTreeSet::new();

    // Route one: cutting planes, with the dual mapping built in.
    let cut_solution = cutting_planes_rates(&data, &free, &pinned, &mut CutPool::new(&data), None)
        .expect("cutting planes converge");
    println!("cutting-plane value: {:.12}", cut_solution.objective);
    println!("mapping residual:    {:.3e}", cut_solution.mapping.max_residual);

    // Route two: the explicit counterpart and its explicit dual.
    let counterpart = build_rates_rc(&data, &free, &pinned);
    let primal = counterpart.solve().expect("counterpart solves");
    println!("counterpart value:   {:.12}", primal.objective);

    let dual = explicit_dual(&counterpart);
    let dual_value = dual.solve().expect("explicit dual solves").objective;
    println!("explicit dual value: {:.12}", dual_value);

    // The mapped point must sit inside the explicit dual's polyhedron and
    // attain the same value.
    let point = dual_point_from_mapping(&data, &cut_solution.mapping);
    let check = check_dual_point(&counterpart, &point);
    println!();
    println!("mapped dual point: worst constraint violation {:.3e}", check.max_violation);
    println!("mapped dual objective: {:.12}", check.objective);

    assert!((cut_solution.objective - primal.objective).abs() < 1e-9);
    assert!((primal.objective - dual_value).abs() < 1e-9);
    assert!(check.max_violation < 1e-7);
    assert!((check.objective - primal.objective).abs() < 1e-8);
    println!("\nthe pattern duals fold exactly onto the counterpart's certificates");
}
