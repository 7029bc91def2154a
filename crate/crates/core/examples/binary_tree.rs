//! Ψ by level of a binary tree, then one leaf starts posting more than its
//! parent.

use psirank::graph::{binary_tree, tree_level};
use psirank::metrics::score_all;
use psirank::model::SolverOptions;
use psirank::{ActivityRates, PropagationSystem};

fn main() -> psirank::Result<()> {
    let depth = 9;
    let g = binary_tree(depth)?;
    let n = g.n_users();
    let opts = SolverOptions::with_tol(1e-10);
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());

    let base = ActivityRates::homogeneous(n, 0.25, 1.0)?;
    let t = score_all(&PropagationSystem::build(&g, &base)?, &opts, workers)?;
    let mut sums = vec![(0.0, 0); depth as usize + 1];
    for (v, s) in t.psi.iter().enumerate() {
        let e = &mut sums[tree_level(v) as usize];
        e.0 += s;
        e.1 += 1;
    }
    println!("level  users  mean psi");
    for (l, (s, c)) in sums.iter().enumerate() {
        println!("{l:>5}  {c:>5}  {:.3e}", s / *c as f64);
    }

    let leaf = n - 1;
    let parent = (leaf - 1) / 2;
    println!("\nlambda_leaf  psi_leaf   psi_parent");
    for lambda in [0.25, 0.5, 1.0, 1.5, 2.5] {
        let r = base.with_user(leaf, lambda, 1.0)?;
        let t = score_all(&PropagationSystem::build(&g, &r)?, &opts, workers)?;
        println!("{lambda:>11}  {:.3e}  {:.3e}", t.psi[leaf], t.psi[parent]);
    }
    Ok(())
}
