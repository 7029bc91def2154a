//! Raising one hub's posting rate in a scale-free graph: the hub gains, its
//! degree-1 neighbour loses, distant users barely move.
//!
//! Usage: `scale_free_target [n_users]` (default 10000).

use psirank::graph::{hop_distances, scale_free};
use psirank::metrics::ScoreAccumulator;
use psirank::model::{solve_labels, SolverOptions};
use psirank::{ActivityRates, PropagationSystem, SocialGraph, UserId};

fn psi_of(g: &SocialGraph, r: &ActivityRates, labels: &[UserId]) -> psirank::Result<Vec<f64>> {
    let system = PropagationSystem::build(g, r)?;
    let mut acc = ScoreAccumulator::new(g.n_users());
    solve_labels(&system, labels, &SolverOptions::with_tol(1e-12), 4, |s| {
        acc.add(s.vectors.label, &s.vectors.q)
    })?;
    let t = acc.finish(false)?;
    Ok(labels.iter().map(|&l| t.psi[l]).collect())
}

fn main() -> psirank::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(10_000);
    let (g, target, neighbour) = (0..100)
        .find_map(|seed| {
            let g = scale_free(n, 2.5, seed).ok()?;
            let t = (0..g.n_users())
                .find(|&v| g.n_leaders(v) == 20 && g.leaders(v).iter().any(|&u| g.n_leaders(u) == 1))?;
            let nb = *g.leaders(t).iter().find(|&&u| g.n_leaders(u) == 1)?;
            Some((g, t, nb))
        })
        .expect("no degree-20 user with a degree-1 neighbour");
    let dist = hop_distances(&g, target);
    let far = (0..g.n_users())
        .find(|&v| g.n_leaders(v) == 1 && dist[v] >= 3 && dist[v] != usize::MAX)
        .expect("no distant degree-1 user");
    let labels = [target, neighbour, far];

    let base = ActivityRates::homogeneous(g.n_users(), 0.25, 1.0)?;
    println!("lambda_target  target     neighbour  far (distance {})", dist[far]);
    for lambda in [0.25, 0.5, 1.0, 1.5, 2.0, 2.5] {
        let psi = psi_of(&g, &base.with_user(target, lambda, 1.0)?, &labels)?;
        println!("{lambda:>13}  {:.3e}  {:.3e}  {:.3e}", psi[0], psi[1], psi[2]);
    }
    Ok(())
}
