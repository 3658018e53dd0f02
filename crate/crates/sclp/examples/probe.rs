//! Scratch probe for the acceptance failures (deleted before commit).

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use sclp::model::{build_matrices, Buffer, Flow, FluidNetwork, Route, Server};
use sclp::oracle::discretize;
use sclp::rc::build_sclp_rc;
use sclp::robust::robust_sclp_simplex;
use sclp::sclp::sclp_simplex;

fn random_network(
    seed: u64,
    max_buffers: usize,
    max_servers: usize,
    uncertain: bool,
) -> FluidNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let buffers = rng.gen_range(2..=max_buffers);
    let servers = rng.gen_range(1..=max_servers.min(buffers));

    let mut flows = Vec::with_capacity(buffers);
    for j in 0..buffers {
        let server = if j < servers { j } else { rng.gen_range(0..servers) };
        let mu_bar = rng.gen_range(1.0..3.0);
        let mu_tilde = if uncertain { mu_bar * rng.gen_range(0.2..0.8) } else { 0.0 };
        let processing_cost = if rng.gen_bool(0.3) { rng.gen_range(0.0..0.3) } else { 0.0 };
        let mut routing = Vec::new();
        if rng.gen_bool(0.6) {
            let mut target = rng.gen_range(0..buffers - 1);
            if target >= j {
                target += 1;
            }
            routing.push(Route { to: target as u32 + 1, p: rng.gen_range(0.2..0.8) });
        }
        flows.push(Flow {
            id: j as u32 + 1,
            server: server as u32 + 1,
            buffer: j as u32 + 1,
            mu_bar,
            mu_tilde,
            processing_cost,
            routing,
        });
    }

    let server_list = (0..servers)
        .map(|i| {
            let flow_count = flows.iter().filter(|f| f.server == i as u32 + 1).count();
            let budget = if uncertain { rng.gen_range(0.3..1.0) * flow_count as f64 } else { 0.0 };
            Server { id: i as u32 + 1, budget }
        })
        .collect();

    let buffer_list = (0..buffers)
        .map(|k| Buffer {
            id: k as u32 + 1,
            alpha: rng.gen_range(0.3..2.0),
            input_rate: rng.gen_range(0.0..0.3),
            holding_cost: rng.gen_range(0.5..2.0),
        })
        .collect();

    FluidNetwork { servers: server_list, buffers: buffer_list, flows, horizon: 1.0 }
}

fn main() {
    let net = random_network(5019, 3, 2, true);
    println!("{net:#?}");
    let data = build_matrices(&net).unwrap();

    let robust = robust_sclp_simplex(&data, data.horizon).unwrap();
    println!("\nrobust sweep: objective {:+.12}", robust.objective);
    println!("  breakpoints {:?}", robust.breakpoints);
    for (n, basis) in robust.sequence.intervals.iter().enumerate() {
        println!(
            "  interval {n}: controls {:?} slopes {:?} free {:?} pins {:?}",
            basis.controls, basis.state_slopes, basis.free_states, basis.pinned_controls
        );
        if let Some(info) = &basis.robust {
            println!(
                "    cost_adjustment {:?} objective_xi {:?} cuts {}",
                info.cost_adjustment,
                info.objective_xi,
                info.realizations.len()
            );
        }
    }
    println!("  states at breakpoints: {:?}", robust.states);

    let counterpart = build_sclp_rc(&data, None);
    for steps in [1_000usize, 10_000] {
        let sol = discretize(&counterpart, steps).unwrap().solve().unwrap();
        println!("counterpart grid {steps:>6}: {:+.12}", sol.objective);
        if steps == 1_000 {
            println!("  step  t      u1      u2      x1      x2");
            let dt = counterpart.horizon / steps as f64;
            for n in (0..steps).step_by(25) {
                let u = &sol.controls[n];
                let x = &sol.states[n];
                println!(
                    "  {n:>4}  {:.3}  {:.4}  {:.4}  {:.4}  {:.4}",
                    (n as f64 + 0.5) * dt,
                    u[0],
                    u[1],
                    x[0],
                    x[1]
                );
            }
        }
    }

    match sclp_simplex(&counterpart, counterpart.horizon) {
        Ok(exact) => {
            println!("counterpart exact sweep: {:+.12}", exact.objective);
            println!("  breakpoints {:?}", exact.breakpoints);
            for (n, basis) in exact.sequence.intervals.iter().enumerate() {
                println!(
                    "  interval {n}: controls {:?}\n    slopes {:?}",
                    basis.controls, basis.state_slopes
                );
            }
        }
        Err(e) => println!("counterpart exact sweep FAILED: {e}"),
    }
}
