use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::SocialGraph;

#[derive(Debug, Clone, Serialize)]
pub struct PageRank {
    pub scores: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Power iteration for `pi = beta W pi + (1 - beta) e / N`, where `W` moves
/// score from each follower evenly onto its leaders. Users without leaders
/// (dangling columns of `W`) spread their score uniformly.
pub fn pagerank(graph: &SocialGraph, beta: f64, tol: f64, max_iter: usize) -> Result<PageRank> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::invalid("damping factor beta must lie in (0, 1)"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let n = graph.n_users();
    if n == 0 {
        return Ok(PageRank {
            scores: Vec::new(),
            iterations: 0,
            residual: 0.0,
        });
    }
    let nf = n as f64;
    let mut pi = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        let dangling: f64 = graph.leaderless().map(|j| pi[j]).sum();
        let base = (1.0 - beta) / nf + beta * dangling / nf;
        for (i, out) in next.iter_mut().enumerate() {
            let inflow: f64 = graph
                .followers(i)
                .iter()
                .map(|&j| pi[j] / graph.n_leaders(j) as f64)
                .sum();
            *out = base + beta * inflow;
        }
        residual = pi.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut pi, &mut next);
        if residual <= tol {
            return Ok(PageRank {
                scores: pi,
                iterations: it,
                residual,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual,
    })
}
