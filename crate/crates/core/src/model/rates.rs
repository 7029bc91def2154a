use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::UserId;

/// Per-user self-posting rate `lambda` and re-posting rate `mu` (posts per unit time).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityRates {
    lambda: Vec<f64>,
    mu: Vec<f64>,
}

impl ActivityRates {
    /// Validates that both rates are finite and non-negative and that every user is active.
    pub fn new(lambda: Vec<f64>, mu: Vec<f64>) -> Result<Self> {
        if lambda.len() != mu.len() {
            return Err(Error::invalid(format!(
                "lambda has {} entries but mu has {}",
                lambda.len(),
                mu.len()
            )));
        }
        for (n, (&l, &m)) in lambda.iter().zip(&mu).enumerate() {
            if !(l.is_finite() && m.is_finite() && l >= 0.0 && m >= 0.0) {
                return Err(Error::invalid(format!(
                    "user {n} has invalid rates (lambda={l}, mu={m})"
                )));
            }
            if l + m <= 0.0 {
                return Err(Error::InactiveUser(n));
            }
        }
        Ok(ActivityRates { lambda, mu })
    }

    pub fn homogeneous(n_users: usize, lambda: f64, mu: f64) -> Result<Self> {
        Self::new(vec![lambda; n_users], vec![mu; n_users])
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn lambda(&self, n: UserId) -> f64 {
        self.lambda[n]
    }

    pub fn mu(&self, n: UserId) -> f64 {
        self.mu[n]
    }

    /// Total Wall arrival rate `lambda + mu`.
    pub fn activity(&self, n: UserId) -> f64 {
        self.lambda[n] + self.mu[n]
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambda
    }

    pub fn mus(&self) -> &[f64] {
        &self.mu
    }

    /// Returns a copy with one user's rates replaced.
    pub fn with_user(&self, n: UserId, lambda: f64, mu: f64) -> Result<Self> {
        let mut l = self.lambda.clone();
        let mut m = self.mu.clone();
        l[n] = lambda;
        m[n] = mu;
        Self::new(l, m)
    }
}
