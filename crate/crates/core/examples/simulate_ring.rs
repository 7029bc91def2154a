//! Event-driven simulation on a small ring with random rates, checked against
//! the model's Newsfeed and Wall probabilities.
//!
//! Usage: `simulate_ring [events]` (default 1000000).

use psirank::graph::ring_with_chords;
use psirank::model::{DenseSolver, InfluenceVectors};
use psirank::simulator::{simulate, SimConfig};
use psirank::{ActivityRates, PropagationSystem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> psirank::Result<()> {
    let events: u64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1_000_000);
    let n = 8;
    let g = ring_with_chords(n, 4.0, 17)?;
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let lambda: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    let mu: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    let rates = ActivityRates::new(lambda, mu)?;

    let system = PropagationSystem::build(&g, &rates)?;
    let dense = DenseSolver::new(&system)?;
    let model: Vec<InfluenceVectors> = (0..n).map(|l| dense.solve(l)).collect::<Result<_, _>>()?;

    let cfg = SimConfig {
        n_events: events,
        seed: 7,
        ..SimConfig::default()
    };
    let out = simulate(&g, &rates, &cfg)?;
    let (mut num, mut den) = (0.0, 0.0);
    for (l, v) in model.iter().enumerate() {
        for (est, exact) in [(out.influence.p_dense(l), &v.p), (out.influence.q_dense(l), &v.q)] {
            for (a, b) in est.iter().zip(exact.iter()) {
                num += (a - b).powi(2);
                den += b * b;
            }
        }
    }
    println!(
        "{} events ({} posts, {} re-posts)",
        out.summary.events, out.summary.posts, out.summary.reposts
    );
    println!("relative L2 error of (p, q): {:.2}%", 100.0 * (num / den).sqrt());
    println!("\nlabel 0 Wall shares, simulated vs model");
    for (u, (a, b)) in out.influence.q_dense(0).iter().zip(&model[0].q).enumerate() {
        println!("  user {u}: {a:.4} {b:.4}");
    }
    let broken = out.state.check_all_conservation();
    println!("conservation violations: {}", broken.len());
    Ok(())
}
