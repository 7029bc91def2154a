//! Sparse form of the per-label linear system `p = A p + b_i`, `q = C p + d_i`.

use serde::Serialize;

use super::rates::ActivityRates;
use crate::error::{Error, Result};
use crate::graph::{SocialGraph, UserId};

/// Sparse column vector as parallel index/value arrays, indices ascending.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVec {
    pub indices: Vec<UserId>,
    pub values: Vec<f64>,
}

impl SparseVec {
    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            out[i] = v;
        }
        out
    }
}

/// Row-sum bounds on the spectral radius of `A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralBounds {
    pub lower: f64,
    pub upper: f64,
}

/// The propagation matrix `A` (CSR, one row per Newsfeed) together with the
/// diagonal `C` and factories for the label-dependent `b_i` and `d_i`.
///
/// Row `j` holds `a[j][k] = mu_k / inflow_j` for each leader `k` of `j` with
/// `mu_k > 0`, where `inflow_j` is the total post arrival rate into `j`'s
/// Newsfeed. Leaderless users have an empty row and zero inflow.
#[derive(Debug, Clone)]
pub struct PropagationSystem<'a> {
    graph: &'a SocialGraph,
    rates: &'a ActivityRates,
    row_offsets: Vec<usize>,
    cols: Vec<UserId>,
    vals: Vec<f64>,
    row_sums: Vec<f64>,
    inflow: Vec<f64>,
    c_diag: Vec<f64>,
}

impl<'a> PropagationSystem<'a> {
    pub fn build(graph: &'a SocialGraph, rates: &'a ActivityRates) -> Result<Self> {
        let n = graph.n_users();
        if rates.len() != n {
            return Err(Error::DimensionMismatch {
                graph: n,
                rates: rates.len(),
            });
        }
        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(graph.n_edges());
        let mut vals = Vec::with_capacity(graph.n_edges());
        let mut row_sums = vec![0.0; n];
        let mut inflow = vec![0.0; n];
        row_offsets.push(0);
        for j in 0..n {
            let leaders = graph.leaders(j);
            let total: f64 = leaders.iter().map(|&k| rates.activity(k)).sum();
            inflow[j] = total;
            if total > 0.0 {
                let mut r = 0.0;
                for &k in leaders {
                    let mu = rates.mu(k);
                    if mu > 0.0 {
                        let a = mu / total;
                        cols.push(k);
                        vals.push(a);
                        r += a;
                    }
                }
                row_sums[j] = r;
            }
            row_offsets.push(cols.len());
        }
        let c_diag = (0..n).map(|j| rates.mu(j) / rates.activity(j)).collect();
        Ok(PropagationSystem {
            graph,
            rates,
            row_offsets,
            cols,
            vals,
            row_sums,
            inflow,
            c_diag,
        })
    }

    pub fn n_users(&self) -> usize {
        self.graph.n_users()
    }

    pub fn graph(&self) -> &'a SocialGraph {
        self.graph
    }

    pub fn rates(&self) -> &'a ActivityRates {
        self.rates
    }

    /// Nonzero entries `(k, a[j][k])` of row `j`.
    pub fn row(&self, j: UserId) -> impl Iterator<Item = (UserId, f64)> + '_ {
        let range = self.row_offsets[j]..self.row_offsets[j + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.vals[range].iter().copied())
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row_sum(&self, j: UserId) -> f64 {
        self.row_sums[j]
    }

    pub fn row_sums(&self) -> &[f64] {
        &self.row_sums
    }

    /// Total arrival rate into `j`'s Newsfeed, zero when `j` has no leaders.
    pub fn inflow(&self, j: UserId) -> f64 {
        self.inflow[j]
    }

    /// Diagonal of `C`: `mu_j / (lambda_j + mu_j)`.
    pub fn c_diag(&self) -> &[f64] {
        &self.c_diag
    }

    /// `b_i`: nonzero only at followers `j` of `i`, value `lambda_i / inflow_j`.
    pub fn b(&self, label: UserId) -> SparseVec {
        let lambda = self.rates.lambda(label);
        let mut out = SparseVec::default();
        if lambda > 0.0 {
            for &j in self.graph.followers(label) {
                out.indices.push(j);
                out.values.push(lambda / self.inflow[j]);
            }
        }
        out
    }

    /// The single nonzero of `d_i`, at row `i`: `lambda_i / (lambda_i + mu_i)`.
    pub fn d(&self, label: UserId) -> (UserId, f64) {
        (label, self.rates.lambda(label) / self.rates.activity(label))
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (j, out) in y.iter_mut().enumerate() {
            let range = self.row_offsets[j]..self.row_offsets[j + 1];
            *out = self.cols[range.clone()]
                .iter()
                .zip(&self.vals[range])
                .map(|(&k, &a)| a * x[k])
                .sum();
        }
    }

    /// Min and max row sums over users that have at least one leader; these
    /// bracket the spectral radius of `A`.
    pub fn spectral_bounds(&self) -> SpectralBounds {
        let mut lower = f64::INFINITY;
        let mut upper = f64::NEG_INFINITY;
        for j in 0..self.n_users() {
            if !self.graph.leaders(j).is_empty() {
                lower = lower.min(self.row_sums[j]);
                upper = upper.max(self.row_sums[j]);
            }
        }
        if upper == f64::NEG_INFINITY {
            SpectralBounds {
                lower: 0.0,
                upper: 0.0,
            }
        } else {
            SpectralBounds { lower, upper }
        }
    }

    /// Number of users whose Newsfeed equation is undefined (no leaders).
    pub fn n_leaderless(&self) -> usize {
        self.graph.leaderless().count()
    }

    /// Dense copy of `A`, row-major. Intended for small instances and tests.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.n_users();
        let mut m = vec![vec![0.0; n]; n];
        for (j, row) in m.iter_mut().enumerate() {
            for (k, a) in self.row(j) {
                row[k] = a;
            }
        }
        m
    }
}
