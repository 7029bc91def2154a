//! Selection and eviction policies on a complete graph. The usual policies
//! give the same influence, while picking the most popular post concentrates
//! it.

use psirank::graph::complete;
use psirank::metrics::psi_scores;
use psirank::simulator::{simulate, Eviction, PolicyConfig, Selection, SimConfig};
use psirank::ActivityRates;

fn main() -> psirank::Result<()> {
    let n = 8;
    let g = complete(n)?;
    let rates = ActivityRates::homogeneous(n, 10.0, 5.0)?;
    let policies = [
        ("random/random", Selection::Random, Eviction::Random),
        ("newest/random", Selection::Newest, Eviction::Random),
        ("random/fifo", Selection::Random, Eviction::Fifo),
        ("newest/fifo", Selection::Newest, Eviction::Fifo),
        ("most_popular/random", Selection::MostPopular, Eviction::Random),
    ];
    println!("{:<20} {:>9} {:>9}", "policy", "mean psi", "max psi");
    for (name, selection, eviction) in policies {
        let (mut mean, mut max) = (0.0, 0.0f64);
        let seeds = 5;
        for seed in 0..seeds {
            let cfg = SimConfig {
                policy: PolicyConfig::new(selection, eviction),
                n_events: 200_000,
                seed,
                ..SimConfig::default()
            };
            let out = simulate(&g, &rates, &cfg)?;
            let walls: Vec<Vec<f64>> = (0..n).map(|l| out.influence.q_dense(l)).collect();
            let t = psi_scores(walls.iter().enumerate().map(|(l, q)| (l, &q[..])), n, true)?;
            mean += t.psi.iter().sum::<f64>() / n as f64;
            max = max.max(t.psi.iter().copied().fold(0.0, f64::max));
        }
        println!("{name:<20} {:>9.4} {max:>9.4}", mean / seeds as f64);
    }
    Ok(())
}
