//! Measure how much uncertainty folds away across random networks.
//!
//! Sweeps a grid of random instances varying routing density (theta) and
//! budget scale (kappa), reduces each one, and reports the mean percentage
//! of counterpart certificates removed. Budgets that cover more threats
//! absorb more (kappa trend up); denser routing spreads threats across more
//! rows than the budgets cover (theta trend down). Common random numbers
//! across cells make the trends visible without thousands of replications.
//!
//! Run with: `cargo run --release --example reduction_experiment`

use sclp::bench::{reduction_experiment, rows_to_csv, ExperimentConfig};

fn main() {
    // A trimmed grid so the example runs in seconds; the bundled binary's
    // `bench-reduction` subcommand runs the full default grid.
    let config = ExperimentConfig {
        scales: vec![1],
        servers: vec![1, 2],
        thetas: vec![0.1, 0.5, 0.9],
        kappas: vec![0.1, 0.5, 1.0],
        reps: 5,
        seed: 0,
    };
    let rows = reduction_experiment(&config);

    println!("{}", rows_to_csv(&rows).trim_end());
    println!();

    // The kappa trend within each (servers, theta) block: more budget, more
    // absorption, and full budgets absorb everything.
    for servers in &config.servers {
        for theta in &config.thetas {
            let block: Vec<f64> = rows
                .iter()
                .filter(|r| r.servers == *servers && (r.theta - theta).abs() < 1e-12)
                .map(|r| r.mean_reduction)
                .collect();
            assert!(
                block.windows(2).all(|w| w[1] >= w[0] - 1e-9),
                "kappa trend broken at servers={servers}, theta={theta}: {block:?}"
            );
            let full = block.last().copied().unwrap_or(0.0);
            assert!((full - 100.0).abs() < 1e-9, "full budgets must absorb everything");
            println!(
                "servers={servers} theta={theta:.1}: reduction climbs {:?} -> 100%",
                block.iter().map(|v| format!("{v:.1}")).collect::<Vec<_>>()
            );
        }
    }
    println!("\nkappa trend holds on every block; kappa = 1 rows absorb completely");
}
