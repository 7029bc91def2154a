//! Influence scores, rankings and ranking comparisons.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::UserId;
use crate::model::{solve_labels, PropagationSystem, SolverOptions};

/// Per-user influence scores.
///
/// `psi[i]` averages `q_i^(n)` over the other users `n != i`; `psi_tilde[i]`
/// averages over everybody, self included. `rank` orders users by descending
/// `psi` with ascending id breaking ties.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreTable {
    pub psi: Vec<f64>,
    pub psi_tilde: Vec<f64>,
    pub rank: Vec<UserId>,
    /// False when only a subset of labels was scored; the unscored users
    /// carry zeros and the sums are not normalized.
    pub normalized: bool,
}

impl ScoreTable {
    /// 1-based rank position of every user.
    pub fn positions(&self) -> Vec<usize> {
        positions(&self.rank)
    }
}

/// Streaming accumulator: feed it one Wall vector per label.
#[derive(Debug, Clone)]
pub struct ScoreAccumulator {
    n: usize,
    psi: Vec<f64>,
    psi_tilde: Vec<f64>,
    seen: Vec<bool>,
    wall_sums: Vec<f64>,
}

impl ScoreAccumulator {
    pub fn new(n_users: usize) -> Self {
        ScoreAccumulator {
            n: n_users,
            psi: vec![0.0; n_users],
            psi_tilde: vec![0.0; n_users],
            seen: vec![false; n_users],
            wall_sums: vec![0.0; n_users],
        }
    }

    pub fn add(&mut self, label: UserId, q: &[f64]) -> Result<()> {
        if label >= self.n {
            return Err(Error::IdOutOfRange { id: label, n_users: self.n });
        }
        if q.len() != self.n {
            return Err(Error::invalid(format!(
                "wall vector for label {label} has {} entries, expected {}",
                q.len(),
                self.n
            )));
        }
        let total: f64 = q.iter().sum();
        let own = q[label];
        let n = self.n as f64;
        self.psi[label] = if self.n > 1 { (total - own) / (n - 1.0) } else { 0.0 };
        self.psi_tilde[label] = total / n;
        self.seen[label] = true;
        for (s, v) in self.wall_sums.iter_mut().zip(q) {
            *s += v;
        }
        Ok(())
    }

    /// Per-user `sum_i q_i^(n)` over the labels added so far.
    pub fn wall_sums(&self) -> &[f64] {
        &self.wall_sums
    }

    /// With `require_all`, every label must have been added.
    pub fn finish(self, require_all: bool) -> Result<ScoreTable> {
        let complete = self.seen.iter().all(|&s| s);
        if require_all && !complete {
            let missing = self.seen.iter().position(|&s| !s).expect("not complete");
            return Err(Error::MissingLabel(missing));
        }
        let rank = rank(&self.psi)?;
        Ok(ScoreTable {
            psi: self.psi,
            psi_tilde: self.psi_tilde,
            rank,
            normalized: complete,
        })
    }
}

/// Scores from `(label, q_label)` pairs. Unlisted labels score zero and the
/// table is flagged as not normalized.
pub fn psi_scores<'a, I>(walls: I, n_users: usize, require_all: bool) -> Result<ScoreTable>
where
    I: IntoIterator<Item = (UserId, &'a [f64])>,
{
    let mut acc = ScoreAccumulator::new(n_users);
    for (label, q) in walls {
        acc.add(label, q)?;
    }
    acc.finish(require_all)
}

/// Solves every label of `system` on `workers` threads and scores the result.
pub fn score_all(system: &PropagationSystem<'_>, opts: &SolverOptions, workers: usize) -> Result<ScoreTable> {
    let n = system.n_users();
    let labels: Vec<UserId> = (0..n).collect();
    let mut acc = ScoreAccumulator::new(n);
    solve_labels(system, &labels, opts, workers, |sol| acc.add(sol.vectors.label, &sol.vectors.q))?;
    acc.finish(true)
}

/// Users by descending score; ties go to the smaller id.
pub fn rank(scores: &[f64]) -> Result<Vec<UserId>> {
    if let Some(bad) = scores.iter().position(|s| s.is_nan()) {
        return Err(Error::NanScore(bad));
    }
    let mut order: Vec<UserId> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    Ok(order)
}

/// Inverse of a ranking: `positions(r)[user]` is the 1-based position of `user`.
pub fn positions(ranking: &[UserId]) -> Vec<usize> {
    let mut pos = vec![0; ranking.len()];
    for (p, &u) in ranking.iter().enumerate() {
        pos[u] = p + 1;
    }
    pos
}

fn same_user_set(a: &[UserId], b: &[UserId]) -> bool {
    a.len() == b.len() && {
        let sa: HashSet<_> = a.iter().collect();
        sa.len() == a.len() && b.iter().all(|u| sa.contains(u))
    }
}

/// Overlap of the top-`X` prefixes of two rankings, for each requested depth.
pub fn common_users_proportion(a: &[UserId], b: &[UserId], depths: &[usize]) -> Result<Vec<f64>> {
    if !same_user_set(a, b) {
        return Err(Error::UserSetMismatch);
    }
    let n = a.len();
    depths
        .iter()
        .map(|&x| {
            if x > n {
                return Err(Error::DepthTooLarge { depth: x, n });
            }
            if x == 0 {
                return Err(Error::invalid("depth must be at least 1"));
            }
            let top: HashSet<_> = a[..x].iter().collect();
            let common = b[..x].iter().filter(|u| top.contains(u)).count();
            Ok(common as f64 / x as f64)
        })
        .collect()
}

/// `(user, rank_in_a, rank_in_b)` for every user, 1-based, ordered by user id.
pub fn rank_scatter(a: &[UserId], b: &[UserId]) -> Result<Vec<(UserId, usize, usize)>> {
    if !same_user_set(a, b) {
        return Err(Error::UserSetMismatch);
    }
    // user ids need not be dense here, so go through a map
    let pos_b: std::collections::HashMap<UserId, usize> =
        b.iter().enumerate().map(|(p, &u)| (u, p + 1)).collect();
    let mut out: Vec<_> = a
        .iter()
        .enumerate()
        .map(|(p, &u)| (u, p + 1, pos_b[&u]))
        .collect();
    out.sort_unstable();
    Ok(out)
}

/// Pearson correlation coefficient, single pass with Welford-style updates.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::invalid("pearson needs two equal-length samples of size >= 2"));
    }
    let (mut mx, mut my, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (k, (&a, &b)) in x.iter().zip(y).enumerate() {
        let n = (k + 1) as f64;
        let dx = a - mx;
        let dy = b - my;
        mx += dx / n;
        my += dy / n;
        sxx += dx * (a - mx);
        syy += dy * (b - my);
        sxy += dx * (b - my);
    }
    Ok(sxy / (sxx * syy).sqrt())
}
