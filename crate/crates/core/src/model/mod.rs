//! Balance-equation model of post propagation.
//!
//! For a fixed label `i`, the Newsfeed probabilities satisfy `p_i = A p_i + b_i`
//! and the Wall probabilities follow as `q_i = C p_i + d_i`. `A` and `C` do not
//! depend on `i`, so one [`PropagationSystem`] serves every label. Neither the
//! Newsfeed size nor the Wall size enters the system.

mod pagerank;
mod rates;
mod solve;
mod system;

pub use pagerank::{pagerank, PageRank};
pub use rates::ActivityRates;
pub use solve::{
    birth_death_check, solve_iterative, solve_labels, DenseSolver, InfluenceVectors, Solution,
    SolverOptions, DEFAULT_DENSE_CAP, DEFAULT_TOL, MAX_ITER_CAP,
};
pub use system::{PropagationSystem, SparseVec, SpectralBounds};
