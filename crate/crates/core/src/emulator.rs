//! Trace replay with single-slot FIFO Walls.
//!
//! Each event by user `j` replaces the content of `j`'s Wall with a post of
//! the event's origin. `q_emu[i][j]` is the share of the window during which
//! `j`'s Wall held content of origin `i`.

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::UserId;
use crate::trace::{trace_order, TraceEvent};

/// `post_id -> (author, repost_id)` with origin resolution.
#[derive(Debug, Clone, Default)]
pub struct PostIndex {
    posts: FxHashMap<u64, (UserId, Option<u64>)>,
}

impl PostIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, post_id: u64, author: UserId, repost_id: Option<u64>) {
        self.posts.insert(post_id, (author, repost_id));
    }

    pub fn from_events<'a, I: IntoIterator<Item = &'a TraceEvent>>(events: I) -> Self {
        let mut idx = PostIndex::new();
        for e in events {
            idx.insert(e.post_id, e.user_id, e.repost_id);
        }
        idx
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn contains(&self, post_id: u64) -> bool {
        self.posts.contains_key(&post_id)
    }

    /// Author of the original post at the root of `post_id`'s repost chain.
    pub fn resolve_origin(&self, post_id: u64) -> Result<UserId> {
        let mut cur = post_id;
        let mut hops = 0usize;
        loop {
            let &(author, parent) = self.posts.get(&cur).ok_or(Error::UnknownPost(cur))?;
            match parent {
                None => return Ok(author),
                Some(next) => {
                    hops += 1;
                    // a chain longer than the index must revisit a post
                    if next == post_id || hops > self.posts.len() {
                        return Err(Error::RepostCycle {
                            start: post_id,
                            at: next,
                        });
                    }
                    cur = next;
                }
            }
        }
    }
}

/// Origin of one trace event.
pub fn resolve_origin(event: &TraceEvent, index: &PostIndex) -> Result<UserId> {
    match event.repost_id {
        None => Ok(event.user_id),
        Some(of) if of == event.post_id => Err(Error::RepostCycle {
            start: event.post_id,
            at: of,
        }),
        Some(of) => index.resolve_origin(of),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmulatorOutput {
    pub n_users: usize,
    pub window: (f64, f64),
    /// `(origin, user, q_emu)` sorted by (origin, user), zeros omitted.
    pub q: Vec<(UserId, UserId, f64)>,
    /// Average of `q_emu[i][j]` over `j != i`.
    pub psi: Vec<f64>,
    pub events: u64,
    /// Reposts of unknown posts, skipped.
    pub dropped: u64,
}

impl EmulatorOutput {
    /// `q_emu[origin][j]` for every user `j`.
    pub fn q_dense(&self, origin: UserId) -> Vec<f64> {
        let mut out = vec![0.0; self.n_users];
        let start = self.q.partition_point(|t| t.0 < origin);
        for &(o, u, v) in &self.q[start..] {
            if o != origin {
                break;
            }
            out[u] = v;
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    origin: UserId,
    since: f64,
}

/// Streaming replayer. Feed events in `(timestamp, post_id)` order, then
/// call [`Replayer::finish`].
#[derive(Debug, Clone)]
pub struct Replayer {
    n_users: usize,
    start: f64,
    end: f64,
    walls: Vec<Option<Slot>>,
    occupancy: FxHashMap<u64, f64>,
    origins: FxHashMap<u64, UserId>,
    last: Option<TraceEvent>,
    seen: usize,
    events: u64,
    dropped: u64,
}

impl Replayer {
    pub fn new(n_users: usize, window: (f64, f64)) -> Result<Self> {
        let (start, end) = window;
        if !(end > start) || !start.is_finite() || !end.is_finite() {
            return Err(Error::EmptyWindow { start, end });
        }
        Ok(Replayer {
            n_users,
            start,
            end,
            walls: vec![None; n_users],
            occupancy: FxHashMap::default(),
            origins: FxHashMap::default(),
            last: None,
            seen: 0,
            events: 0,
            dropped: 0,
        })
    }

    fn close(&mut self, user: UserId, t: f64) {
        if let Some(s) = self.walls[user] {
            let from = s.since.max(self.start);
            let to = t.min(self.end);
            if to > from {
                *self
                    .occupancy
                    .entry(((s.origin as u64) << 32) | user as u64)
                    .or_default() += to - from;
            }
        }
    }

    pub fn push(&mut self, e: &TraceEvent) -> Result<()> {
        let idx = self.seen;
        self.seen += 1;
        if let Some(prev) = &self.last {
            if trace_order(prev, e).is_gt() {
                return Err(Error::UnsortedTrace(idx));
            }
        }
        self.last = Some(*e);
        if e.user_id >= self.n_users {
            return Err(Error::IdOutOfRange {
                id: e.user_id,
                n_users: self.n_users,
            });
        }
        // origins are resolved once on arrival, which makes chains transitive
        let origin = match e.repost_id {
            None => e.user_id,
            Some(of) if of == e.post_id => {
                return Err(Error::RepostCycle {
                    start: e.post_id,
                    at: of,
                })
            }
            Some(of) => match self.origins.get(&of) {
                Some(&o) => o,
                None => {
                    self.dropped += 1;
                    return Ok(());
                }
            },
        };
        self.origins.insert(e.post_id, origin);
        self.events += 1;
        if e.timestamp > self.end {
            return Ok(());
        }
        self.close(e.user_id, e.timestamp);
        self.walls[e.user_id] = Some(Slot {
            origin,
            since: e.timestamp,
        });
        Ok(())
    }

    pub fn finish(mut self) -> EmulatorOutput {
        for u in 0..self.n_users {
            self.close(u, self.end);
        }
        let len = self.end - self.start;
        let mut q: Vec<(UserId, UserId, f64)> = self
            .occupancy
            .iter()
            .map(|(&k, &v)| ((k >> 32) as UserId, (k & 0xffff_ffff) as UserId, v / len))
            .collect();
        q.sort_unstable_by_key(|a| (a.0, a.1));
        let n = self.n_users;
        let mut psi = vec![0.0; n];
        if n > 1 {
            for &(o, u, v) in &q {
                if o != u {
                    psi[o] += v;
                }
            }
            for s in &mut psi {
                *s /= (n - 1) as f64;
            }
        }
        EmulatorOutput {
            n_users: n,
            window: (self.start, self.end),
            q,
            psi,
            events: self.events,
            dropped: self.dropped,
        }
    }
}

/// First and last timestamp of a non-empty trace.
pub fn default_window(events: &[TraceEvent]) -> Option<(f64, f64)> {
    Some((events.first()?.timestamp, events.last()?.timestamp))
}

/// Replays a sorted trace over `window` (default: first to last timestamp).
/// `n_users` must exceed every user id in the trace.
pub fn replay(
    events: &[TraceEvent],
    n_users: usize,
    window: Option<(f64, f64)>,
) -> Result<EmulatorOutput> {
    let window = match window.or_else(|| default_window(events)) {
        Some(w) => w,
        None => return Err(Error::EmptyWindow { start: 0.0, end: 0.0 }),
    };
    let mut r = Replayer::new(n_users, window)?;
    for e in events {
        r.push(e)?;
    }
    Ok(r.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_post_half_window() {
        let ev = [TraceEvent::original(1, 5.0, 0)];
        let out = replay(&ev, 1, Some((0.0, 10.0))).unwrap();
        assert_eq!(out.q, vec![(0, 0, 0.5)]);
    }

    #[test]
    fn own_then_repost() {
        let ev = [
            TraceEvent::original(1, 0.0, 0),
            TraceEvent::original(2, 0.0, 1),
            TraceEvent::repost(3, 5.0, 1, 1),
        ];
        let out = replay(&ev, 2, Some((0.0, 10.0))).unwrap();
        let q1 = out.q_dense(1);
        let q0 = out.q_dense(0);
        assert_eq!(q1[1], 0.5);
        assert_eq!(q0[1], 0.5);
        assert_eq!(q0[0], 1.0);
        assert_eq!(out.psi, vec![0.5, 0.0]);
    }

    #[test]
    fn unknown_reference_is_dropped() {
        let ev = [
            TraceEvent::original(1, 0.0, 0),
            TraceEvent::repost(2, 1.0, 1, 99),
        ];
        let out = replay(&ev, 2, Some((0.0, 2.0))).unwrap();
        assert_eq!(out.dropped, 1);
        assert_eq!(out.events, 1);
        assert!(out.q_dense(0)[1] == 0.0);
    }

    #[test]
    fn unsorted_and_empty_window_rejected() {
        let ev = [TraceEvent::original(2, 1.0, 0), TraceEvent::original(1, 1.0, 0)];
        assert!(matches!(replay(&ev, 1, Some((0.0, 2.0))), Err(Error::UnsortedTrace(1))));
        assert!(matches!(
            replay(&ev[..1], 1, Some((3.0, 3.0))),
            Err(Error::EmptyWindow { .. })
        ));
    }

    #[test]
    fn origin_resolution() {
        let ev = [
            TraceEvent::original(10, 0.0, 4),
            TraceEvent::repost(11, 1.0, 5, 10),
            TraceEvent::repost(12, 2.0, 6, 11),
        ];
        let idx = PostIndex::from_events(&ev);
        assert_eq!(resolve_origin(&ev[0], &idx).unwrap(), 4);
        assert_eq!(resolve_origin(&ev[1], &idx).unwrap(), 4);
        assert_eq!(resolve_origin(&ev[2], &idx).unwrap(), 4);

        let mut cyc = PostIndex::new();
        cyc.insert(1, 0, Some(2));
        cyc.insert(2, 1, Some(3));
        cyc.insert(3, 2, Some(1));
        assert!(matches!(cyc.resolve_origin(1), Err(Error::RepostCycle { .. })));
        assert!(matches!(cyc.resolve_origin(7), Err(Error::UnknownPost(7))));
    }

    #[test]
    fn row_sums_bounded_by_one() {
        let ev = [
            TraceEvent::original(1, 0.0, 0),
            TraceEvent::original(2, 1.0, 1),
            TraceEvent::repost(3, 2.0, 0, 2),
            TraceEvent::repost(4, 3.0, 2, 3),
            TraceEvent::repost(5, 4.0, 1, 1),
        ];
        let out = replay(&ev, 3, Some((0.0, 5.0))).unwrap();
        let mut rows = [0.0; 3];
        for &(_, u, v) in &out.q {
            rows[u] += v;
        }
        assert!((rows[0] - 1.0).abs() < 1e-15);
        assert!((rows[1] - 0.8).abs() < 1e-15);
        assert!((rows[2] - 0.4).abs() < 1e-15);
    }
}
