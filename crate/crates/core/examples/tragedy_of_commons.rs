//! Listeners `(0.25, 1)` turn into influencers `(1, 0.25)` one batch at a
//! time on an Erdős–Rényi graph. Each group's mean Ψ falls as influencers
//! spread.
//!
//! Usage: `tragedy_of_commons [n_users]` (default 2000).

use psirank::graph::erdos_renyi;
use psirank::metrics::score_all;
use psirank::model::SolverOptions;
use psirank::{ActivityRates, PropagationSystem};

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, c) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if c == 0 {
        f64::NAN
    } else {
        s / c as f64
    }
}

fn main() -> psirank::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2000);
    let g = erdos_renyi(n, 3.0, 12)?;
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    println!("influencers  listener psi  influencer psi");
    for tenth in 0..=10 {
        let k = n * tenth / 10;
        let lambda: Vec<f64> = (0..n).map(|u| if u < k { 1.0 } else { 0.25 }).collect();
        let mu: Vec<f64> = (0..n).map(|u| if u < k { 0.25 } else { 1.0 }).collect();
        let rates = ActivityRates::new(lambda, mu)?;
        let t = score_all(&PropagationSystem::build(&g, &rates)?, &SolverOptions::with_tol(1e-10), workers)?;
        let listeners = mean(t.psi[k..].iter().copied());
        let influencers = mean(t.psi[..k].iter().copied());
        println!("{k:>11}  {listeners:.3e}     {influencers:.3e}");
    }
    Ok(())
}
