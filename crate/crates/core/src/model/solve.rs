//! Per-label solvers: sparse fixed-point iteration and dense LU.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::system::PropagationSystem;
use crate::error::{Error, Result};
use crate::graph::UserId;

/// Newsfeed (`p`) and Wall (`q`) probabilities of one label across all users.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceVectors {
    pub label: UserId,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl InfluenceVectors {
    /// Wall vector from a Newsfeed vector: `q = C p + d_i`.
    pub fn from_newsfeed(system: &PropagationSystem<'_>, label: UserId, p: Vec<f64>) -> Self {
        let mut q: Vec<f64> = p.iter().zip(system.c_diag()).map(|(p, c)| c * p).collect();
        let (i, d) = system.d(label);
        q[i] += d;
        InfluenceVectors { label, p, q }
    }
}

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_ITER_CAP: usize = 100_000;
pub const DEFAULT_DENSE_CAP: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Stop when the sup-norm of successive iterates is at most `tol` and,
    /// if the max row sum `r` of `A` is below 1, the distance to the fixed
    /// point (at most `step * r / (1 - r)`) is also at most `tol`.
    pub tol: f64,
    /// `None` derives the cap from the row-sum bound.
    pub max_iter: Option<usize>,
    /// Keep the per-iteration step norms in the returned solution.
    pub record_steps: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: DEFAULT_TOL,
            max_iter: None,
            record_steps: false,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolverOptions {
            tol,
            ..Default::default()
        }
    }

    /// Iteration budget `10 * ceil(log(tol) / log(max r))`, capped at 10^5.
    pub fn iteration_budget(&self, max_row_sum: f64) -> usize {
        if let Some(m) = self.max_iter {
            return m;
        }
        if max_row_sum <= 0.0 {
            return 2;
        }
        if max_row_sum >= 1.0 {
            return MAX_ITER_CAP;
        }
        let k = (self.tol.ln() / max_row_sum.ln()).ceil();
        ((10.0 * k) as usize).clamp(2, MAX_ITER_CAP)
    }
}

/// Result of one iterative solve.
#[derive(Debug, Clone)]
pub struct Solution {
    pub vectors: InfluenceVectors,
    pub iterations: usize,
    /// Sup-norm of the final step `p(t) - p(t-1)`.
    pub residual: f64,
    /// Sup-norm of every step, when requested.
    pub steps: Vec<f64>,
}

/// Fixed-point iteration `p(t) = A p(t-1) + b_i` from `p(0) = 0`.
pub fn solve_iterative(
    system: &PropagationSystem<'_>,
    label: UserId,
    opts: &SolverOptions,
) -> Result<Solution> {
    let n = system.n_users();
    if label >= n {
        return Err(Error::IdOutOfRange { id: label, n_users: n });
    }
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let bounds = system.spectral_bounds();
    if bounds.upper >= 1.0 {
        log::warn!(
            "max row sum of A is {}; convergence is not guaranteed by the row-sum bound",
            bounds.upper
        );
    }
    let budget = opts.iteration_budget(bounds.upper);
    let r = bounds.upper;
    let error_factor = if r < 1.0 { r / (1.0 - r) } else { 0.0 };
    let b = system.b(label);
    let mut p = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut steps = Vec::new();
    let mut residual = f64::INFINITY;
    for it in 1..=budget {
        system.apply(&p, &mut next);
        for (&j, &v) in b.indices.iter().zip(&b.values) {
            next[j] += v;
        }
        residual = p
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut p, &mut next);
        if opts.record_steps {
            steps.push(residual);
        }
        if residual <= opts.tol && residual * error_factor <= opts.tol {
            return Ok(Solution {
                vectors: InfluenceVectors::from_newsfeed(system, label, p),
                iterations: it,
                residual,
                steps,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: budget,
        residual,
    })
}

/// LU factorization of `I - A`, computed once and reused across labels.
pub struct DenseSolver<'s, 'a> {
    system: &'s PropagationSystem<'a>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl<'s, 'a> DenseSolver<'s, 'a> {
    pub fn new(system: &'s PropagationSystem<'a>) -> Result<Self> {
        Self::with_cap(system, DEFAULT_DENSE_CAP)
    }

    pub fn with_cap(system: &'s PropagationSystem<'a>, cap: usize) -> Result<Self> {
        let n = system.n_users();
        if n > cap {
            return Err(Error::TooLargeForDense { n, cap });
        }
        let mut m = DMatrix::<f64>::identity(n, n);
        for j in 0..n {
            for (k, a) in system.row(j) {
                m[(j, k)] -= a;
            }
        }
        let lu = m.lu();
        if !lu.is_invertible() {
            return Err(Error::Singular);
        }
        Ok(DenseSolver { system, lu })
    }

    pub fn solve(&self, label: UserId) -> Result<InfluenceVectors> {
        let n = self.system.n_users();
        if label >= n {
            return Err(Error::IdOutOfRange { id: label, n_users: n });
        }
        let b = DVector::from_vec(self.system.b(label).to_dense(n));
        let p = self.lu.solve(&b).ok_or(Error::Singular)?;
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular);
        }
        Ok(InfluenceVectors::from_newsfeed(
            self.system,
            label,
            p.iter().copied().collect(),
        ))
    }
}

/// For every user `j` with leaders, the gap `|p_i^(j) - tau_j / (1 + tau_j)|`
/// where `tau_j` is the birth-death ratio of `j`'s Newsfeed chain evaluated at
/// the leaders' solved probabilities. `None` for leaderless users.
pub fn birth_death_check(system: &PropagationSystem<'_>, sol: &InfluenceVectors) -> Vec<Option<f64>> {
    let graph = system.graph();
    let rates = system.rates();
    let i = sol.label;
    (0..system.n_users())
        .map(|j| {
            let leaders = graph.leaders(j);
            if leaders.is_empty() {
                return None;
            }
            let mut up = 0.0;
            let mut down = 0.0;
            for &k in leaders {
                let pk = sol.p[k];
                up += rates.mu(k) * pk;
                down += rates.mu(k) * (1.0 - pk);
                if k == i {
                    up += rates.lambda(k);
                } else {
                    down += rates.lambda(k);
                }
            }
            // tau / (1 + tau) written without dividing by a possibly-zero denominator
            let predicted = if up + down > 0.0 { up / (up + down) } else { 0.0 };
            Some((sol.p[j] - predicted).abs())
        })
        .collect()
}

/// Solves a set of labels, `workers` at a time, and hands each solution to
/// `sink` in the order the labels were given. Output is independent of the
/// worker count.
pub fn solve_labels<F>(
    system: &PropagationSystem<'_>,
    labels: &[UserId],
    opts: &SolverOptions,
    workers: usize,
    mut sink: F,
) -> Result<()>
where
    F: FnMut(Solution) -> Result<()>,
{
    let workers = workers.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let chunk = (workers * 8).max(1);
    for batch in labels.chunks(chunk) {
        let solved: Vec<Result<Solution>> = pool.install(|| {
            batch
                .par_iter()
                .map(|&label| solve_iterative(system, label, opts))
                .collect()
        });
        for s in solved {
            sink(s?)?;
        }
    }
    Ok(())
}
