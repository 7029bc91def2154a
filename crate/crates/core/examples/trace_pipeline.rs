//! From a raw trace file to a ranking: parse, infer who follows whom from
//! re-posts, estimate rates, solve, and compare with the ranking measured
//! directly by the emulator.

use std::fs;

use psirank::emulator::replay;
use psirank::graph::erdos_renyi;
use psirank::ingest::{estimate_rates, infer_star_graph, parse_trace, restrict_to_active, ParseOptions};
use psirank::io::write_trace;
use psirank::metrics::{common_users_proportion, rank, score_all};
use psirank::model::SolverOptions;
use psirank::simulator::{simulate, Eviction, PolicyConfig, Selection, SimConfig};
use psirank::{ActivityRates, PropagationSystem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 200;
    let g = erdos_renyi(n, 6.0, 9)?;
    let rates = ActivityRates::new(
        (0..n).map(|u| 0.1 + (u % 7) as f64 * 0.1).collect(),
        (0..n).map(|u| 0.2 + (u % 5) as f64 * 0.2).collect(),
    )?;
    let cfg = SimConfig {
        policy: PolicyConfig::new(Selection::Random, Eviction::Fifo),
        wall_size: 1,
        n_events: 300_000,
        seed: 1,
        warmup_fraction: 0.0,
        record_trace: true,
        ..SimConfig::default()
    };
    let sim = simulate(&g, &rates, &cfg)?;

    let dir = std::env::temp_dir().join(format!("psirank-pipeline-{}", std::process::id()));
    fs::create_dir_all(&dir)?;
    let path = dir.join("trace.csv");
    write_trace(&path, sim.trace.as_deref().unwrap_or_default())?;

    let parsed = parse_trace(&path, &ParseOptions::default())?;
    let users = parsed.n_users();
    let (star, stats) = infer_star_graph(&parsed.events, users)?;
    let est = estimate_rates(&parsed.events, users, None)?;
    let (active, active_rates, keep) = restrict_to_active(&star, &est)?;
    let system = PropagationSystem::build(&active, &active_rates)?;
    let scores = score_all(&system, &SolverOptions::with_tol(1e-10), 4)?;
    let model_rank: Vec<usize> = scores.rank.iter().map(|&k| keep[k]).collect();

    let emu = replay(&parsed.events, users, None)?;
    let emu_rank = rank(&emu.psi)?;

    println!(
        "{} events, {users} users, {} inferred edges (true graph {}), {} unresolved re-posts",
        parsed.events.len(),
        star.n_edges(),
        g.n_edges(),
        stats.unresolved
    );
    let depths = [10, 20, 50, 100];
    let common = common_users_proportion(&model_rank, &emu_rank, &depths)?;
    for (d, c) in depths.iter().zip(&common) {
        println!("top {d:>3}: {:.0}% common users between model and emulator", 100.0 * c);
    }
    fs::remove_dir_all(&dir)?;
    Ok(())
}
