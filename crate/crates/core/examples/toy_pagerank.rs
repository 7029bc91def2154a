//! Four users with identical activity: the all-label Ψ̃ equals PageRank at
//! damping `mu / (lambda + mu)`.

use psirank::graph::four_user_example;
use psirank::metrics::score_all;
use psirank::model::{pagerank, SolverOptions};
use psirank::{ActivityRates, PropagationSystem};

fn main() -> psirank::Result<()> {
    let g = four_user_example();
    let (lambda, mu) = (0.105, 2.0);
    let rates = ActivityRates::homogeneous(g.n_users(), lambda, mu)?;
    let system = PropagationSystem::build(&g, &rates)?;
    let scores = score_all(&system, &SolverOptions::with_tol(1e-12), 1)?;
    let pr = pagerank(&g, mu / (lambda + mu), 1e-12, 10_000)?;

    println!("user  psi_tilde  pagerank  psi");
    for (u, name) in ["A", "B", "C", "D"].iter().enumerate() {
        println!(
            "{name:>4}  {:.4}     {:.4}    {:.4}",
            scores.psi_tilde[u], pr.scores[u], scores.psi[u]
        );
    }
    Ok(())
}
