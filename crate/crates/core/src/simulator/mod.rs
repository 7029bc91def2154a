//! Event-driven simulation of Walls and Newsfeeds.
//!
//! Every user runs two independent streams: self-posts at rate `lambda` and
//! re-posts at rate `mu`. A post lands on its author's Wall and on the
//! Newsfeed of every follower; a re-post copies an entry of the user's
//! Newsfeed onto their Wall, from where it travels on in the same way.
//! Occupancy of each (origin, user) pair is integrated over time and turned
//! into empirical `p` and `q` estimates.

mod policy;
mod state;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use policy::{Arrivals, Eviction, PolicyConfig, Selection, DEFAULT_HYPER_CV2};
pub use state::{ConservationViolation, FlowCounters, PlatformState, Post};

use crate::error::{Error, Result};
use crate::graph::{SocialGraph, UserId};
use crate::model::ActivityRates;
use crate::trace::TraceEvent;

pub const DEFAULT_WARMUP_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub policy: PolicyConfig,
    /// `M`; ignored under TTL eviction where Newsfeeds are unbounded.
    pub newsfeed_size: usize,
    /// `K`.
    pub wall_size: usize,
    /// Post and re-post events to execute, warm-up included.
    pub n_events: u64,
    pub seed: u64,
    /// Leading share of events excluded from the occupancy averages.
    pub warmup_fraction: f64,
    pub record_trace: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            policy: PolicyConfig::default(),
            newsfeed_size: 20,
            wall_size: 10,
            n_events: 300_000,
            seed: 0,
            warmup_fraction: DEFAULT_WARMUP_FRACTION,
            record_trace: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.policy.validate()?;
        if self.wall_size == 0 {
            return Err(Error::invalid("wall size K must be at least 1"));
        }
        if self.newsfeed_size == 0 && !matches!(self.policy.eviction, Eviction::Ttl(_)) {
            return Err(Error::invalid("newsfeed size M must be at least 1"));
        }
        if self.n_events == 0 {
            return Err(Error::invalid("n_events must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(Error::invalid("warm-up fraction must lie in [0, 1)"));
        }
        Ok(())
    }

    fn warmup_events(&self) -> u64 {
        (self.n_events as f64 * self.warmup_fraction).floor() as u64
    }
}

/// Empirical occupancy fractions as sorted `(origin, user, value)` triplets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalInfluence {
    pub n_users: usize,
    /// Newsfeed occupancy `p_hat`, sorted by (origin, user), zeros omitted.
    pub p: Vec<(UserId, UserId, f64)>,
    /// Wall occupancy `q_hat`, same layout.
    pub q: Vec<(UserId, UserId, f64)>,
}

impl EmpiricalInfluence {
    fn dense(triplets: &[(UserId, UserId, f64)], n: usize, label: UserId) -> Vec<f64> {
        let mut out = vec![0.0; n];
        let start = triplets.partition_point(|t| t.0 < label);
        for &(o, u, v) in &triplets[start..] {
            if o != label {
                break;
            }
            out[u] = v;
        }
        out
    }

    /// `p_hat_label^(n)` for every user `n`.
    pub fn p_dense(&self, label: UserId) -> Vec<f64> {
        Self::dense(&self.p, self.n_users, label)
    }

    /// `q_hat_label^(n)` for every user `n`.
    pub fn q_dense(&self, label: UserId) -> Vec<f64> {
        Self::dense(&self.q, self.n_users, label)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSummary {
    pub config: SimConfig,
    pub events: u64,
    pub warmup_events: u64,
    pub posts: u64,
    pub reposts: u64,
    /// Re-post firings that found an empty Newsfeed; not counted as events.
    pub skipped_reposts: u64,
    pub warmup_end: f64,
    pub end_time: f64,
    /// Time-averaged Newsfeed length of each user after warm-up.
    pub mean_newsfeed_len: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub influence: EmpiricalInfluence,
    pub summary: SimSummary,
    pub state: PlatformState,
    /// Every executed event in order, when requested. Originals carry the id
    /// of the new post; re-posts get a fresh id and point at the original.
    pub trace: Option<Vec<TraceEvent>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Post,
    Repost,
    Expire,
}

#[derive(Debug, Clone, Copy)]
struct Timer {
    time: f64,
    order: u64,
    kind: Kind,
    user: u32,
}

impl PartialEq for Timer {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Timer {}
impl PartialOrd for Timer {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Timer {
    // reversed so that BinaryHeap pops the earliest timer
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.order.cmp(&self.order))
    }
}

struct Engine<'a> {
    graph: &'a SocialGraph,
    rates: &'a ActivityRates,
    cfg: SimConfig,
    rng: ChaCha8Rng,
    heap: BinaryHeap<Timer>,
    order: u64,
    state: PlatformState,
    next_post_id: u64,
    trace: Option<Vec<TraceEvent>>,
}

impl<'a> Engine<'a> {
    fn schedule(&mut self, time: f64, kind: Kind, user: UserId) {
        self.heap.push(Timer {
            time,
            order: self.order,
            kind,
            user: user as u32,
        });
        self.order += 1;
    }

    fn rearm(&mut self, t: &Timer) {
        let u = t.user as usize;
        let rate = match t.kind {
            Kind::Post => self.rates.lambda(u),
            Kind::Repost => self.rates.mu(u),
            Kind::Expire => return,
        };
        let dt = self.cfg.policy.arrivals.sample(rate, &mut self.rng);
        self.schedule(t.time + dt, t.kind, u);
    }

    fn ttl(&self) -> Option<f64> {
        match self.cfg.policy.eviction {
            Eviction::Ttl(t) => Some(t),
            _ => None,
        }
    }

    fn pick_newsfeed(&mut self, user: UserId) -> Option<usize> {
        let feed = &self.state.feeds[user];
        if feed.is_empty() {
            return None;
        }
        let idx = match self.cfg.policy.selection {
            Selection::Random => self.rng.random_range(0..feed.len()),
            Selection::Newest => argmax(feed.iter().map(|e| (e.seq, 0))),
            Selection::MostPopular => {
                argmax(feed.iter().map(|e| (self.state.reposts_of(e), e.seq)))
            }
            Selection::LeastPopular => argmax(
                feed.iter()
                    .map(|e| (u64::MAX - self.state.reposts_of(e), e.seq)),
            ),
        };
        Some(idx)
    }

    fn place_on_wall(&mut self, user: UserId, slot: u32) {
        let e = self.state.new_entry(slot);
        self.state.record_wall_arrival(user, &e);
        let k = self.cfg.wall_size;
        match self.cfg.policy.eviction {
            Eviction::Random => {
                if self.state.walls[user].len() < k {
                    self.state.walls[user].push_back(e);
                } else {
                    let i = self.rng.random_range(0..k);
                    let old = std::mem::replace(&mut self.state.walls[user][i], e);
                    self.state.record_wall_departure(user, old);
                }
            }
            Eviction::Fifo | Eviction::Ttl(_) => {
                self.state.walls[user].push_front(e);
                if self.state.walls[user].len() > k {
                    let old = self.state.walls[user].pop_back().expect("non-empty wall");
                    self.state.record_wall_departure(user, old);
                }
            }
        }
    }

    fn place_in_newsfeed(&mut self, user: UserId, slot: u32) {
        let e = self.state.new_entry(slot);
        self.state.record_feed_arrival(user, &e);
        let m = self.cfg.newsfeed_size;
        match self.cfg.policy.eviction {
            Eviction::Random => {
                if self.state.feeds[user].len() < m {
                    self.state.feeds[user].push_back(e);
                } else {
                    let i = self.rng.random_range(0..m);
                    let old = std::mem::replace(&mut self.state.feeds[user][i], e);
                    self.state.record_feed_departure(user, old);
                }
            }
            Eviction::Fifo => {
                self.state.feeds[user].push_front(e);
                if self.state.feeds[user].len() > m {
                    let old = self.state.feeds[user].pop_back().expect("non-empty feed");
                    self.state.record_feed_departure(user, old);
                }
            }
            Eviction::Ttl(t) => {
                // entries of one feed expire in insertion order
                self.state.feeds[user].push_back(e);
                self.schedule(self.state.clock + t, Kind::Expire, user);
            }
        }
    }

    /// Puts `slot` on the Wall of `user` and in all their followers' Newsfeeds.
    fn publish(&mut self, user: UserId, slot: u32) {
        self.place_on_wall(user, slot);
        for &f in self.graph.followers(user) {
            self.place_in_newsfeed(f, slot);
        }
    }

    fn record(&mut self, ev: TraceEvent) {
        if let Some(tr) = self.trace.as_mut() {
            tr.push(ev);
        }
    }

    fn run(mut self) -> Result<SimOutcome> {
        let n = self.graph.n_users();
        for u in 0..n {
            let (l, m) = (self.rates.lambda(u), self.rates.mu(u));
            if l > 0.0 {
                let t = self.cfg.policy.arrivals.first(l, &mut self.rng);
                self.schedule(t, Kind::Post, u);
            }
            if m > 0.0 {
                let t = self.cfg.policy.arrivals.first(m, &mut self.rng);
                self.schedule(t, Kind::Repost, u);
            }
        }

        let warmup_events = self.cfg.warmup_events();
        let (mut events, mut posts, mut reposts, mut skipped) = (0u64, 0u64, 0u64, 0u64);
        let mut warmup_end = 0.0;
        if warmup_events == 0 {
            self.state.reset_occupancy();
        }

        while events < self.cfg.n_events {
            let timer = self.heap.pop().expect("a user with positive lambda keeps the queue alive");
            self.state.clock = timer.time;
            let user = timer.user as usize;
            match timer.kind {
                Kind::Expire => {
                    let e = self.state.feeds[user]
                        .pop_front()
                        .expect("expiry for an empty feed");
                    self.state.record_feed_departure(user, e);
                    continue;
                }
                Kind::Post => {
                    let post_id = self.next_post_id;
                    self.next_post_id += 1;
                    let slot = self.state.create_post(Post {
                        post_id,
                        origin: user,
                        created_at: timer.time,
                    });
                    self.publish(user, slot);
                    self.state.release_if_unused(slot);
                    self.record(TraceEvent::original(post_id, timer.time, user));
                    posts += 1;
                }
                Kind::Repost => match self.pick_newsfeed(user) {
                    None => {
                        skipped += 1;
                        self.rearm(&timer);
                        continue;
                    }
                    Some(idx) => {
                        let slot = self.state.feeds[user][idx].slot;
                        self.state.posts[slot as usize].reposts += 1;
                        let of = self.state.posts[slot as usize].post.post_id;
                        self.publish(user, slot);
                        let id = self.next_post_id;
                        self.next_post_id += 1;
                        self.record(TraceEvent::repost(id, timer.time, user, of));
                        reposts += 1;
                    }
                },
            }
            self.rearm(&timer);
            events += 1;
            if events == warmup_events {
                warmup_end = self.state.clock;
                self.state.reset_occupancy();
            }
        }
        self.state.flush();

        let end_time = self.state.clock;
        let horizon = end_time - warmup_end;
        if horizon <= 0.0 {
            return Err(Error::invalid(
                "no simulated time elapsed after warm-up; raise n_events",
            ));
        }

        let mut mean_len = vec![0.0; n];
        for (u, _, v) in self.state.feed_integrals() {
            mean_len[u] += v / horizon;
        }
        let ttl = self.ttl().is_some();
        let m = self.cfg.newsfeed_size as f64;
        let k = self.cfg.wall_size as f64;
        let mut p: Vec<_> = self
            .state
            .feed_integrals()
            .filter(|t| t.2 > 0.0)
            .map(|(u, o, v)| {
                let denom = if ttl { mean_len[u] * horizon } else { m * horizon };
                (o, u, v / denom)
            })
            .collect();
        let mut q: Vec<_> = self
            .state
            .wall_integrals()
            .filter(|t| t.2 > 0.0)
            .map(|(u, o, v)| (o, u, v / (k * horizon)))
            .collect();
        p.sort_unstable_by_key(|a| (a.0, a.1));
        q.sort_unstable_by_key(|a| (a.0, a.1));

        let summary = SimSummary {
            config: self.cfg,
            events,
            warmup_events,
            posts,
            reposts,
            skipped_reposts: skipped,
            warmup_end,
            end_time,
            mean_newsfeed_len: mean_len,
        };
        Ok(SimOutcome {
            influence: EmpiricalInfluence { n_users: n, p, q },
            summary,
            state: self.state,
            trace: self.trace,
        })
    }
}

/// Index of the largest key; the first one wins ties.
fn argmax<I: Iterator<Item = (u64, u64)>>(keys: I) -> usize {
    let mut best = 0;
    let mut best_key = None;
    for (i, k) in keys.enumerate() {
        if best_key.is_none_or(|b| k > b) {
            best = i;
            best_key = Some(k);
        }
    }
    best
}

/// Runs one simulation. Deterministic for a given seed.
pub fn simulate(graph: &SocialGraph, rates: &ActivityRates, cfg: &SimConfig) -> Result<SimOutcome> {
    cfg.validate()?;
    if rates.len() != graph.n_users() {
        return Err(Error::DimensionMismatch {
            graph: graph.n_users(),
            rates: rates.len(),
        });
    }
    if rates.lambdas().iter().all(|&l| l == 0.0) {
        return Err(Error::invalid("no user posts: every lambda is zero"));
    }
    if graph.n_users() > u32::MAX as usize {
        return Err(Error::invalid("too many users for the simulator"));
    }
    let engine = Engine {
        graph,
        rates,
        cfg: *cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        heap: BinaryHeap::with_capacity(2 * graph.n_users()),
        order: 0,
        state: PlatformState::new(graph.n_users()),
        next_post_id: 0,
        trace: cfg.record_trace.then(Vec::new),
    };
    engine.run()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cycle() -> SocialGraph {
        SocialGraph::from_edges(2, [(0, 1), (1, 0)]).unwrap()
    }

    fn cfg(n_events: u64, seed: u64) -> SimConfig {
        SimConfig {
            n_events,
            seed,
            ..SimConfig::default()
        }
    }

    #[test]
    fn two_cycle_self_share() {
        let g = two_cycle();
        let r = ActivityRates::homogeneous(2, 1.0, 1.0).unwrap();
        let out = simulate(&g, &r, &cfg(300_000, 3)).unwrap();
        let q = out.influence.q_dense(0);
        assert!((q[0] - 2.0 / 3.0).abs() / (2.0 / 3.0) < 0.05, "{q:?}");
        assert!(out.state.check_all_conservation().is_empty());
    }

    #[test]
    fn no_reposting_keeps_walls_own() {
        let g = two_cycle();
        let r = ActivityRates::homogeneous(2, 1.0, 0.0).unwrap();
        let out = simulate(&g, &r, &cfg(10_000, 1)).unwrap();
        for u in 0..2 {
            assert!((out.influence.q_dense(u)[u] - 1.0).abs() < 1e-12);
            assert_eq!(out.influence.q_dense(u)[1 - u], 0.0);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let g = two_cycle();
        let r = ActivityRates::new(vec![0.3, 1.0], vec![0.5, 0.2]).unwrap();
        let a = simulate(&g, &r, &cfg(20_000, 11)).unwrap();
        let b = simulate(&g, &r, &cfg(20_000, 11)).unwrap();
        let c = simulate(&g, &r, &cfg(20_000, 12)).unwrap();
        assert_eq!(a.influence, b.influence);
        assert_ne!(a.influence, c.influence);
    }

    #[test]
    fn single_post_hand_trace() {
        // user 0 posts once; user 1 follows 0 and never acts
        let g = SocialGraph::from_edges(2, [(1, 0)]).unwrap();
        let r = ActivityRates::new(vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
        let mut c = cfg(1, 0);
        c.warmup_fraction = 0.0;
        let out = simulate(&g, &r, &c).unwrap();
        let f = out.state.check_conservation(0, 1).unwrap();
        assert_eq!(
            f,
            FlowCounters {
                initial: 0,
                arrivals: 1,
                departures: 0,
                current: 1
            }
        );
    }

    #[test]
    fn empty_state_conserves() {
        let s = PlatformState::new(3);
        assert!(s.check_conservation(0, 1).is_ok());
        assert!(s.check_all_conservation().is_empty());
    }

    #[test]
    fn list_bounds_hold_for_all_policies() {
        let g = crate::graph::complete(6).unwrap();
        let r = ActivityRates::homogeneous(6, 1.0, 2.0).unwrap();
        for sel in [Selection::Random, Selection::Newest, Selection::MostPopular, Selection::LeastPopular] {
            for ev in [Eviction::Random, Eviction::Fifo] {
                let c = SimConfig {
                    policy: PolicyConfig::new(sel, ev),
                    newsfeed_size: 4,
                    wall_size: 3,
                    ..cfg(5_000, 5)
                };
                let out = simulate(&g, &r, &c).unwrap();
                for u in 0..6 {
                    assert!(out.state.wall_len(u) <= 3);
                    assert!(out.state.newsfeed_len(u) <= 4);
                }
                assert!(out.state.check_all_conservation().is_empty());
                assert_eq!(out.summary.events, 5_000);
            }
        }
    }

    #[test]
    fn ttl_mean_newsfeed_size() {
        let g = crate::graph::complete(5).unwrap();
        let r = ActivityRates::new(vec![0.5, 1.0, 0.2, 0.7, 0.4], vec![1.0, 0.3, 0.8, 0.5, 0.6]).unwrap();
        let ttl = 2.0;
        let c = SimConfig {
            policy: PolicyConfig::new(Selection::Random, Eviction::Ttl(ttl)),
            ..cfg(400_000, 9)
        };
        let out = simulate(&g, &r, &c).unwrap();
        for j in 0..5 {
            let inflow: f64 = g.leaders(j).iter().map(|&k| r.activity(k)).sum();
            let expect = ttl * inflow;
            let got = out.summary.mean_newsfeed_len[j];
            assert!((got - expect).abs() / expect < 0.03, "user {j}: {got} vs {expect}");
        }
        assert!(out.state.check_all_conservation().is_empty());
    }

    #[test]
    fn rejects_silent_platform() {
        let g = two_cycle();
        let r = ActivityRates::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(simulate(&g, &r, &cfg(10, 0)).is_err());
    }

    #[test]
    fn trace_ids_are_consistent() {
        let g = two_cycle();
        let r = ActivityRates::homogeneous(2, 1.0, 1.0).unwrap();
        let mut c = cfg(2_000, 4);
        c.record_trace = true;
        let out = simulate(&g, &r, &c).unwrap();
        let tr = out.trace.unwrap();
        assert_eq!(tr.len(), 2_000);
        let originals: std::collections::HashSet<u64> =
            tr.iter().filter(|e| e.is_original()).map(|e| e.post_id).collect();
        for e in tr.iter().filter(|e| !e.is_original()) {
            assert!(originals.contains(&e.repost_id.unwrap()));
        }
        assert!(tr.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
    }
}
