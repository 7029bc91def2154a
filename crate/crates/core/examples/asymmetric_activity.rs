//! Changing one user's activity on the four-user graph reorders the ranking.

use psirank::graph::four_user_example;
use psirank::metrics::score_all;
use psirank::model::SolverOptions;
use psirank::{ActivityRates, PropagationSystem};

const NAMES: [&str; 4] = ["A", "B", "C", "D"];

fn report(title: &str, rates: &ActivityRates) -> psirank::Result<()> {
    let g = four_user_example();
    let system = PropagationSystem::build(&g, rates)?;
    let t = score_all(&system, &SolverOptions::with_tol(1e-12), 1)?;
    let order: Vec<&str> = t.rank.iter().map(|&u| NAMES[u]).collect();
    println!("{title}");
    println!("  psi_tilde {:.3?}", t.psi_tilde);
    println!("  ranking   {}", order.join(" > "));
    Ok(())
}

fn main() -> psirank::Result<()> {
    let (lambda, mu) = (0.105, 2.0);
    let base = ActivityRates::homogeneous(4, lambda, mu)?;
    report("homogeneous", &base)?;
    report("C posts three times as often", &base.with_user(2, 3.0 * lambda, mu)?)?;
    report("C never re-posts", &base.with_user(2, lambda, 0.0)?)?;
    Ok(())
}
