//! Randomized networks and the uncertainty-set reduction experiment:
//! how many certificate variables does reduction remove, as a function of
//! routing density and budget tightness?
//!
//! The experiment sweeps a grid of (scale, servers, density, tightness)
//! cells, generates seeded random networks per cell, reduces each, and
//! reports the mean and sample standard deviation of the percentage of
//! certificate variables removed (see [`crate::rc::dimension_report`]).
//!
//! Draws use common random numbers across the grid: a network's structure
//! is a function of (master seed, scale, servers, repetition) alone, with
//! the density knob consuming the *same* underlying uniforms to pick
//! more routing targets (nested as density grows) and the tightness knob
//! scaling budgets after the fact. Reduction percentages are therefore
//! monotone in both knobs draw-by-draw, not merely in expectation, and the
//! experiment's trends carry no Monte-Carlo noise — the standard
//! common-random-numbers variance reduction for comparative studies.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::model::{build_matrices, Buffer, Flow, FluidNetwork, Route, Server};
use crate::rc::dimension_report;
use crate::robust::reduce;

/// Grid definition for [`reduction_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Size multipliers ι; a cell with multiplier ι has `10·ι` buffers and
    /// one flow per buffer.
    pub scales: Vec<usize>,
    /// Server counts m; flows are spread round-robin then uniformly.
    pub servers: Vec<usize>,
    /// Routing densities θ ∈ (0, 1]: each flow routes to up to ⌈θK⌉
    /// distinct other buffers.
    pub thetas: Vec<f64>,
    /// Budget tightnesses κ ∈ [0, 1]: each server's budget is κ times its
    /// flow count.
    pub kappas: Vec<f64>,
    /// Networks per cell.
    pub reps: usize,
    /// Master seed; every draw derives from it deterministically.
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> ExperimentConfig {
        ExperimentConfig {
            scales: vec![1],
            servers: vec![1, 2],
            thetas: vec![0.1, 0.3, 0.5, 0.7, 0.9],
            kappas: vec![0.1, 0.25, 0.5, 0.75, 1.0],
            reps: 10,
            seed: 0,
        }
    }
}

/// One cell of the experiment grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    /// Size multiplier ι.
    pub scale: usize,
    /// Server count m.
    pub servers: usize,
    /// Routing density θ.
    pub theta: f64,
    /// Budget tightness κ.
    pub kappa: f64,
    /// Networks drawn.
    pub reps: usize,
    /// Mean reduction percentage across the cell's draws.
    pub mean_reduction: f64,
    /// Sample standard deviation (n−1 in the denominator; zero for a
    /// single draw).
    pub std_reduction: f64,
}

/// Draw a random uncertain network.
///
/// Structure: `buffers` buffers, one flow per buffer (flow `j` drains
/// buffer `j`), `servers` servers with the first `servers` flows assigned
/// round-robin (so no server idles) and the rest uniformly. Each flow
/// routes to `n ~ Unif{1..⌈θK⌉}` distinct other buffers (capped at K−1)
/// with equal fractions `1/n`, carries a positive rate degradation, and
/// each server's budget is `κ` times its flow count.
///
/// Identical `(buffers, servers, seed)` triples reuse the same underlying
/// draws: raising `theta` only extends each flow's target list (the lists
/// are nested) and `kappa` only scales budgets, which is what makes
/// experiment trends exact rather than statistical.
pub fn generate_random(
    buffers: usize,
    servers: usize,
    theta: f64,
    kappa: f64,
    seed: u64,
) -> FluidNetwork {
    assert!(buffers >= 2, "routing needs somewhere to go");
    assert!(servers >= 1 && servers <= buffers);
    assert!(theta > 0.0 && theta <= 1.0);
    assert!((0.0..=1.0).contains(&kappa));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = buffers;

    let assignment: Vec<usize> = (0..k)
        .map(|j| if j < servers { j } else { rng.gen_range(0..servers) })
        .collect();

    let mut flows = Vec::with_capacity(k);
    for j in 0..k {
        // Shuffle the candidate targets and draw the count through a
        // shared uniform; both consume the generator identically for every
        // theta, and the first-n prefix makes target sets nested in theta.
        let mut targets: Vec<usize> = (0..k).filter(|&t| t != j).collect();
        targets.shuffle(&mut rng);
        let max_targets = ((theta * k as f64).ceil() as usize).clamp(1, k - 1);
        let count = 1 + (rng.gen_range(0.0..1.0) * max_targets as f64).floor() as usize;
        let count = count.min(max_targets);
        let fraction = 1.0 / count as f64;
        let mu_bar = rng.gen_range(1.0..3.0);
        let mu_tilde = mu_bar * rng.gen_range(0.1..0.9);
        flows.push(Flow {
            id: (j + 1) as u32,
            server: (assignment[j] + 1) as u32,
            buffer: (j + 1) as u32,
            mu_bar,
            mu_tilde,
            processing_cost: 0.0,
            routing: targets[..count]
                .iter()
                .map(|&t| Route { to: (t + 1) as u32, p: fraction })
                .collect(),
        });
    }

    // Uniform holding costs with fully routed flows cancel the objective
    // rates exactly, so generated networks carry no objective uncertainty:
    // the experiment then measures the structural (balance-row)
    // certificates alone. An objective block would have a density-
    // independent certificate count — cost signs do not care how many
    // targets a flow has — and inflating the denominator with density
    // would bend the reduction ratio upward for no structural reason.
    let buffers: Vec<Buffer> = (0..k)
        .map(|b| Buffer {
            id: (b + 1) as u32,
            alpha: rng.gen_range(0.5..2.0),
            input_rate: rng.gen_range(0.0..0.5),
            holding_cost: 1.0,
        })
        .collect();

    let servers: Vec<Server> = (0..servers)
        .map(|i| {
            let count = assignment.iter().filter(|&&s| s == i).count();
            Server { id: (i + 1) as u32, budget: kappa * count as f64 }
        })
        .collect();

    FluidNetwork { servers, buffers, flows, horizon: 1.0 }
}

/// Run the reduction experiment over the whole grid.
pub fn reduction_experiment(config: &ExperimentConfig) -> Vec<ExperimentRow> {
    let mut rows = Vec::new();
    for &scale in &config.scales {
        for &servers in &config.servers {
            for &theta in &config.thetas {
                for &kappa in &config.kappas {
                    let reductions: Vec<f64> = (0..config.reps)
                        .map(|rep| {
                            let seed = derive_seed(config.seed, scale, servers, rep);
                            let net =
                                generate_random(10 * scale, servers, theta, kappa, seed);
                            let data = build_matrices(&net)
                                .expect("generated networks always validate");
                            let reduced = reduce(&data);
                            dimension_report(&data, Some(&reduced)).reduction_percent
                        })
                        .collect();
                    rows.push(ExperimentRow {
                        scale,
                        servers,
                        theta,
                        kappa,
                        reps: config.reps,
                        mean_reduction: mean(&reductions),
                        std_reduction: sample_std(&reductions),
                    });
                }
            }
        }
    }
    rows
}

/// Render experiment rows as CSV (header included).
pub fn rows_to_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from("iota,m,theta,kappa,rep_count,mean_R,std_R\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{:.6},{:.6}\n",
            row.scale,
            row.servers,
            row.theta,
            row.kappa,
            row.reps,
            row.mean_reduction,
            row.std_reduction
        ));
    }
    out
}

/// Mix the per-draw seed from the cell coordinates that define structure.
/// Density and tightness are deliberately absent — see the module docs.
fn derive_seed(master: u64, scale: usize, servers: usize, rep: usize) -> u64 {
    let mut x = master
        ^ (scale as u64).wrapping_mul(0x9e3779b97f4a7c15)
        ^ (servers as u64).wrapping_mul(0xbf58476d1ce4e5b9)
        ^ (rep as u64).wrapping_mul(0x94d049bb133111eb);
    // splitmix64 finalizer: spreads structured inputs over the seed space.
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}
