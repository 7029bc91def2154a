use std::collections::VecDeque;

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::graph::UserId;

/// A post as it circulates: its origin never changes, re-posts share the record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Post {
    pub post_id: u64,
    pub origin: UserId,
    pub created_at: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct PostRecord {
    pub(crate) post: Post,
    pub(crate) reposts: u64,
    /// Number of list slots currently holding the post; the slot is recycled at zero.
    refs: u32,
}

/// A slot in a Wall or Newsfeed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Entry {
    pub(crate) slot: u32,
    /// Global insertion counter, larger is newer.
    pub(crate) seq: u64,
}

/// Time-integral and flow bookkeeping for one (list owner, origin) pair.
#[derive(Debug, Clone, Copy, Default)]
struct Cell {
    count: u32,
    last: f64,
    integral: f64,
    arrivals: u64,
    departures: u64,
}

#[derive(Debug, Clone, Default)]
struct PairTable {
    cells: FxHashMap<u64, Cell>,
}

#[inline]
fn key(owner: UserId, origin: UserId) -> u64 {
    ((owner as u64) << 32) | origin as u64
}

impl PairTable {
    fn arrive(&mut self, owner: UserId, origin: UserId, t: f64) {
        let c = self.cells.entry(key(owner, origin)).or_default();
        c.integral += c.count as f64 * (t - c.last);
        c.last = t;
        c.count += 1;
        c.arrivals += 1;
    }

    fn depart(&mut self, owner: UserId, origin: UserId, t: f64) {
        let c = self
            .cells
            .get_mut(&key(owner, origin))
            .expect("departure from a pair that never received a post");
        c.integral += c.count as f64 * (t - c.last);
        c.last = t;
        c.count -= 1;
        c.departures += 1;
    }

    /// Brings every integral up to `t`.
    fn flush(&mut self, t: f64) {
        for c in self.cells.values_mut() {
            c.integral += c.count as f64 * (t - c.last);
            c.last = t;
        }
    }

    fn reset_integrals(&mut self, t: f64) {
        self.flush(t);
        for c in self.cells.values_mut() {
            c.integral = 0.0;
        }
    }

    fn get(&self, owner: UserId, origin: UserId) -> Option<&Cell> {
        self.cells.get(&key(owner, origin))
    }

    /// `(owner, origin, integral)` for all pairs, unsorted.
    fn integrals(&self) -> impl Iterator<Item = (UserId, UserId, f64)> + '_ {
        self.cells
            .iter()
            .map(|(&k, c)| ((k >> 32) as UserId, (k & 0xffff_ffff) as UserId, c.integral))
    }
}

/// Flow counters of one (origin, Newsfeed) pair since the start of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FlowCounters {
    pub initial: u64,
    pub arrivals: u64,
    pub departures: u64,
    pub current: u64,
}

/// A violated conservation identity `initial + arrivals = departures + current`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConservationViolation {
    pub origin: UserId,
    pub user: UserId,
    pub counters: FlowCounters,
}

/// Lists, clock, post store and occupancy accumulators of a simulated platform.
#[derive(Debug, Clone)]
pub struct PlatformState {
    pub(crate) walls: Vec<VecDeque<Entry>>,
    pub(crate) feeds: Vec<VecDeque<Entry>>,
    pub(crate) clock: f64,
    pub(crate) posts: Vec<PostRecord>,
    free_slots: Vec<u32>,
    next_seq: u64,
    feed_cells: PairTable,
    wall_cells: PairTable,
}

impl PlatformState {
    /// Empty Walls and Newsfeeds at time zero.
    pub fn new(n_users: usize) -> Self {
        PlatformState {
            walls: vec![VecDeque::new(); n_users],
            feeds: vec![VecDeque::new(); n_users],
            clock: 0.0,
            posts: Vec::new(),
            free_slots: Vec::new(),
            next_seq: 0,
            feed_cells: PairTable::default(),
            wall_cells: PairTable::default(),
        }
    }

    pub fn n_users(&self) -> usize {
        self.walls.len()
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn wall(&self, user: UserId) -> Vec<Post> {
        self.walls[user].iter().map(|e| self.post_of(e)).collect()
    }

    pub fn newsfeed(&self, user: UserId) -> Vec<Post> {
        self.feeds[user].iter().map(|e| self.post_of(e)).collect()
    }

    pub fn wall_len(&self, user: UserId) -> usize {
        self.walls[user].len()
    }

    pub fn newsfeed_len(&self, user: UserId) -> usize {
        self.feeds[user].len()
    }

    pub(crate) fn post_of(&self, e: &Entry) -> Post {
        self.posts[e.slot as usize].post
    }

    pub(crate) fn origin_of(&self, e: &Entry) -> UserId {
        self.posts[e.slot as usize].post.origin
    }

    pub(crate) fn reposts_of(&self, e: &Entry) -> u64 {
        self.posts[e.slot as usize].reposts
    }

    pub(crate) fn create_post(&mut self, post: Post) -> u32 {
        let rec = PostRecord {
            post,
            reposts: 0,
            refs: 0,
        };
        match self.free_slots.pop() {
            Some(s) => {
                self.posts[s as usize] = rec;
                s
            }
            None => {
                self.posts.push(rec);
                (self.posts.len() - 1) as u32
            }
        }
    }

    /// Drops a post that never made it into any list.
    pub(crate) fn release_if_unused(&mut self, slot: u32) {
        if self.posts[slot as usize].refs == 0 {
            self.free_slots.push(slot);
        }
    }

    pub(crate) fn new_entry(&mut self, slot: u32) -> Entry {
        self.posts[slot as usize].refs += 1;
        let seq = self.next_seq;
        self.next_seq += 1;
        Entry { slot, seq }
    }

    fn drop_entry(&mut self, e: Entry) {
        let rec = &mut self.posts[e.slot as usize];
        rec.refs -= 1;
        if rec.refs == 0 {
            self.free_slots.push(e.slot);
        }
    }

    pub(crate) fn record_feed_arrival(&mut self, user: UserId, e: &Entry) {
        let origin = self.origin_of(e);
        self.feed_cells.arrive(user, origin, self.clock);
    }

    pub(crate) fn record_feed_departure(&mut self, user: UserId, e: Entry) {
        let origin = self.origin_of(&e);
        self.feed_cells.depart(user, origin, self.clock);
        self.drop_entry(e);
    }

    pub(crate) fn record_wall_arrival(&mut self, user: UserId, e: &Entry) {
        let origin = self.origin_of(e);
        self.wall_cells.arrive(user, origin, self.clock);
    }

    pub(crate) fn record_wall_departure(&mut self, user: UserId, e: Entry) {
        let origin = self.origin_of(&e);
        self.wall_cells.depart(user, origin, self.clock);
        self.drop_entry(e);
    }

    /// Restarts the occupancy integrals at the current clock (end of warm-up).
    /// Flow counters are untouched.
    pub(crate) fn reset_occupancy(&mut self) {
        self.feed_cells.reset_integrals(self.clock);
        self.wall_cells.reset_integrals(self.clock);
    }

    pub(crate) fn flush(&mut self) {
        self.feed_cells.flush(self.clock);
        self.wall_cells.flush(self.clock);
    }

    pub(crate) fn feed_integrals(&self) -> impl Iterator<Item = (UserId, UserId, f64)> + '_ {
        self.feed_cells.integrals()
    }

    pub(crate) fn wall_integrals(&self) -> impl Iterator<Item = (UserId, UserId, f64)> + '_ {
        self.wall_cells.integrals()
    }

    /// Counters for posts of `origin` entering and leaving `user`'s Newsfeed.
    pub fn newsfeed_counters(&self, origin: UserId, user: UserId) -> FlowCounters {
        let current = self.feeds[user]
            .iter()
            .filter(|e| self.origin_of(e) == origin)
            .count() as u64;
        let (arrivals, departures) = self
            .feed_cells
            .get(user, origin)
            .map_or((0, 0), |c| (c.arrivals, c.departures));
        FlowCounters {
            initial: 0,
            arrivals,
            departures,
            current,
        }
    }

    /// Checks `X(0) + N_in = N_out + X(T)` for posts of `origin` in `user`'s Newsfeed.
    pub fn check_conservation(
        &self,
        origin: UserId,
        user: UserId,
    ) -> Result<FlowCounters, ConservationViolation> {
        let c = self.newsfeed_counters(origin, user);
        if c.initial + c.arrivals == c.departures + c.current {
            Ok(c)
        } else {
            Err(ConservationViolation {
                origin,
                user,
                counters: c,
            })
        }
    }

    /// Every (origin, Newsfeed) pair; returns all violations.
    pub fn check_all_conservation(&self) -> Vec<ConservationViolation> {
        let n = self.n_users();
        let mut current: FxHashMap<u64, u64> = FxHashMap::default();
        for (user, feed) in self.feeds.iter().enumerate() {
            for e in feed {
                *current.entry(key(user, self.origin_of(e))).or_default() += 1;
            }
        }
        let mut out = Vec::new();
        for (&k, c) in &self.feed_cells.cells {
            let x = current.remove(&k).unwrap_or(0);
            if c.arrivals != c.departures + x {
                out.push(ConservationViolation {
                    origin: (k & 0xffff_ffff) as UserId,
                    user: (k >> 32) as UserId,
                    counters: FlowCounters {
                        initial: 0,
                        arrivals: c.arrivals,
                        departures: c.departures,
                        current: x,
                    },
                });
            }
        }
        // posts present in a feed without any recorded arrival
        for (k, x) in current {
            out.push(ConservationViolation {
                origin: (k & 0xffff_ffff) as UserId,
                user: (k >> 32) as UserId,
                counters: FlowCounters {
                    initial: 0,
                    arrivals: 0,
                    departures: 0,
                    current: x,
                },
            });
        }
        debug_assert!(out.iter().all(|v| v.user < n));
        out.sort_by_key(|v| (v.origin, v.user));
        out
    }
}
