//! Directed follower graph in compressed sparse row form.
//!
//! An edge `(follower, leader)` means `follower` reads the Wall of `leader`:
//! posts flow from the leader's Wall into the follower's Newsfeed. Both
//! orientations are stored so the solver can walk leaders of a user and the
//! `b_i` factory can walk followers of a label.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Dense user index `0..n_users`.
pub type UserId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
struct Csr {
    offsets: Vec<usize>,
    targets: Vec<UserId>,
}

impl Csr {
    /// Builds rows from `(row, target)` pairs that are already sorted and deduplicated.
    fn from_sorted_pairs(n: usize, pairs: &[(UserId, UserId)]) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for &(row, _) in pairs {
            offsets[row + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let targets = pairs.iter().map(|&(_, t)| t).collect();
        Csr { offsets, targets }
    }

    fn row(&self, i: UserId) -> &[UserId] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }
}

/// Immutable follower/leader graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialGraph {
    n_users: usize,
    leaders: Csr,
    followers: Csr,
}

impl SocialGraph {
    /// Builds a graph from `(follower, leader)` pairs. Duplicates are dropped.
    pub fn from_edges<I>(n_users: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (UserId, UserId)>,
    {
        let mut pairs = Vec::new();
        for (follower, leader) in edges {
            for id in [follower, leader] {
                if id >= n_users {
                    return Err(Error::IdOutOfRange { id, n_users });
                }
            }
            if follower == leader {
                return Err(Error::SelfLoop(follower));
            }
            pairs.push((follower, leader));
        }
        Ok(Self::from_validated(n_users, pairs))
    }

    fn from_validated(n_users: usize, mut pairs: Vec<(UserId, UserId)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        let leaders = Csr::from_sorted_pairs(n_users, &pairs);
        let mut reversed: Vec<_> = pairs.iter().map(|&(f, l)| (l, f)).collect();
        reversed.sort_unstable();
        let followers = Csr::from_sorted_pairs(n_users, &reversed);
        SocialGraph {
            n_users,
            leaders,
            followers,
        }
    }

    /// Every undirected pair `{a, b}` becomes two follow edges.
    pub fn from_undirected<I>(n_users: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (UserId, UserId)>,
    {
        Self::from_edges(
            n_users,
            edges.into_iter().flat_map(|(a, b)| [(a, b), (b, a)]),
        )
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    /// Number of distinct directed follow edges.
    pub fn n_edges(&self) -> usize {
        self.leaders.targets.len()
    }

    /// Sorted leaders `L(j)` of user `j`.
    pub fn leaders(&self, j: UserId) -> &[UserId] {
        self.leaders.row(j)
    }

    /// Sorted followers `F(i)` of user `i`.
    pub fn followers(&self, i: UserId) -> &[UserId] {
        self.followers.row(i)
    }

    pub fn has_edge(&self, follower: UserId, leader: UserId) -> bool {
        self.leaders(follower).binary_search(&leader).is_ok()
    }

    /// Iterates `(follower, leader)` pairs in row order.
    pub fn edges(&self) -> impl Iterator<Item = (UserId, UserId)> + '_ {
        (0..self.n_users).flat_map(move |j| self.leaders(j).iter().map(move |&k| (j, k)))
    }

    /// Out-degree in the follower graph, i.e. number of leaders.
    pub fn n_leaders(&self, j: UserId) -> usize {
        self.leaders(j).len()
    }

    pub fn n_followers(&self, i: UserId) -> usize {
        self.followers(i).len()
    }

    /// Users with no leaders (their Newsfeed never receives anything).
    pub fn leaderless(&self) -> impl Iterator<Item = UserId> + '_ {
        (0..self.n_users).filter(move |&j| self.leaders(j).is_empty())
    }

    /// True when every follow relation is reciprocated.
    pub fn is_symmetric(&self) -> bool {
        (0..self.n_users).all(|j| self.leaders(j) == self.followers(j))
    }

    /// Full scan of the structural invariants. Returns the first violation found.
    pub fn validate(&self) -> Result<()> {
        let mut forward = 0usize;
        for j in 0..self.n_users {
            let row = self.leaders(j);
            for w in row.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::invalid(format!("leader list of {j} not strictly sorted")));
                }
            }
            for &k in row {
                if k >= self.n_users {
                    return Err(Error::IdOutOfRange { id: k, n_users: self.n_users });
                }
                if k == j {
                    return Err(Error::SelfLoop(j));
                }
                if self.followers(k).binary_search(&j).is_err() {
                    return Err(Error::invalid(format!(
                        "{j} lists {k} as leader but {k} does not list {j} as follower"
                    )));
                }
                forward += 1;
            }
        }
        let backward: usize = (0..self.n_users).map(|i| self.followers(i).len()).sum();
        if forward != backward {
            return Err(Error::invalid(format!(
                "edge count mismatch: {forward} leader entries, {backward} follower entries"
            )));
        }
        Ok(())
    }
}

/// Perfect binary tree of the given depth; node 0 is the root and node `c`
/// has parent `(c - 1) / 2`. Each tree edge is a mutual follow.
pub fn binary_tree(depth: u32) -> Result<SocialGraph> {
    if depth < 1 {
        return Err(Error::invalid("binary tree depth must be at least 1"));
    }
    if depth > 30 {
        return Err(Error::invalid("binary tree depth above 30 is not supported"));
    }
    let n = (1usize << (depth + 1)) - 1;
    SocialGraph::from_undirected(n, (1..n).map(|c| (c, (c - 1) / 2)))
}

/// Depth of node `v` in the layout produced by [`binary_tree`].
pub fn tree_level(v: UserId) -> u32 {
    usize::BITS - 1 - (v + 1).leading_zeros()
}

/// Degree sequence drawn from a discrete power law with `P(K >= k) = k^-(exponent - 1)`,
/// truncated to `n - 1`.
fn power_law_degrees(n: usize, exponent: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let tail = exponent - 1.0;
    (0..n)
        .map(|_| {
            // floor of a Pareto(x_min = 1) variate has exactly the target CCDF
            let u: f64 = 1.0 - rng.random::<f64>();
            let x = u.powf(-1.0 / tail);
            (x.floor() as usize).clamp(1, n - 1)
        })
        .collect()
}

/// Undirected configuration-model graph with power-law degrees.
///
/// Stubs are matched uniformly at random; self-loops and repeated pairs are
/// dropped afterwards. An odd stub total is repaired by giving one extra stub
/// to the lowest-id node with the smallest degree.
pub fn scale_free(n: usize, exponent: f64, seed: u64) -> Result<SocialGraph> {
    if n < 2 {
        return Err(Error::invalid("scale-free graph needs n >= 2"));
    }
    if !(exponent > 2.0) {
        return Err(Error::invalid("power-law exponent must exceed 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut degrees = power_law_degrees(n, exponent, &mut rng);
    if degrees.iter().sum::<usize>() % 2 == 1 {
        let min = *degrees.iter().min().expect("n >= 2");
        let v = degrees.iter().position(|&d| d == min).expect("min exists");
        degrees[v] += 1;
    }
    let mut stubs: Vec<UserId> = degrees
        .iter()
        .enumerate()
        .flat_map(|(v, &d)| std::iter::repeat_n(v, d))
        .collect();
    stubs.shuffle(&mut rng);
    let pairs = stubs
        .chunks_exact(2)
        .filter(|c| c[0] != c[1])
        .flat_map(|c| [(c[0], c[1]), (c[1], c[0])])
        .collect();
    Ok(SocialGraph::from_validated(n, pairs))
}

/// Undirected `G(n, p)` with `p = mean_degree / (n - 1)`, sampled by geometric
/// skipping over the upper triangle.
pub fn erdos_renyi(n: usize, mean_degree: f64, seed: u64) -> Result<SocialGraph> {
    if n < 2 {
        return Err(Error::invalid("Erdos-Renyi graph needs n >= 2"));
    }
    if !(mean_degree >= 0.0 && mean_degree < (n - 1) as f64) {
        return Err(Error::invalid("mean degree must lie in [0, n - 1)"));
    }
    let p = mean_degree / (n - 1) as f64;
    let mut pairs = Vec::new();
    if p > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let log_q = (1.0 - p).ln();
        // (v, w) walks the strict lower triangle w < v row by row
        let mut v: usize = 1;
        let mut w: i64 = -1;
        while v < n {
            let r: f64 = 1.0 - rng.random::<f64>();
            w += 1 + (r.ln() / log_q).floor() as i64;
            while v < n && w >= v as i64 {
                w -= v as i64;
                v += 1;
            }
            if v < n {
                let w = w as usize;
                pairs.push((v, w));
                pairs.push((w, v));
            }
        }
    }
    Ok(SocialGraph::from_validated(n, pairs))
}

/// Directed ring `0 -> 1 -> ... -> n-1 -> 0` (each user follows the next one)
/// plus random extra follow edges until the mean number of leaders reaches
/// `mean_leaders`. The ring keeps the graph strongly connected.
pub fn ring_with_chords(n: usize, mean_leaders: f64, seed: u64) -> Result<SocialGraph> {
    if n < 2 {
        return Err(Error::invalid("ring needs n >= 2"));
    }
    let max_edges = n * (n - 1);
    let target = ((mean_leaders * n as f64).round() as usize).clamp(n, max_edges);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut present = vec![false; n * n];
    let mut pairs = Vec::with_capacity(target);
    for j in 0..n {
        let k = (j + 1) % n;
        present[j * n + k] = true;
        pairs.push((j, k));
    }
    while pairs.len() < target {
        let j = rng.random_range(0..n);
        let k = rng.random_range(0..n);
        if j != k && !present[j * n + k] {
            present[j * n + k] = true;
            pairs.push((j, k));
        }
    }
    Ok(SocialGraph::from_validated(n, pairs))
}

/// Complete directed graph: everybody follows everybody else.
pub fn complete(n: usize) -> Result<SocialGraph> {
    SocialGraph::from_edges(
        n,
        (0..n).flat_map(|j| (0..n).filter(move |&k| k != j).map(move |k| (j, k))),
    )
}

/// The four-user example network: users A..D are ids 0..3; A follows B, C
/// and D, B follows A and D, C follows A, D follows B and C.
pub fn four_user_example() -> SocialGraph {
    SocialGraph::from_validated(
        4,
        vec![(0, 1), (0, 2), (0, 3), (1, 0), (1, 3), (2, 0), (3, 1), (3, 2)],
    )
}

/// Breadth-first hop distances from `source` over undirected adjacency
/// (leaders and followers). Unreachable users get `usize::MAX`.
pub fn hop_distances(graph: &SocialGraph, source: UserId) -> Vec<usize> {
    let mut dist = vec![usize::MAX; graph.n_users()];
    let mut queue = std::collections::VecDeque::new();
    dist[source] = 0;
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        let next = dist[v] + 1;
        for &w in graph.leaders(v).iter().chain(graph.followers(v)) {
            if dist[w] == usize::MAX {
                dist[w] = next;
                queue.push_back(w);
            }
        }
    }
    dist
}
