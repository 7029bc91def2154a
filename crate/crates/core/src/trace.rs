use serde::{Deserialize, Serialize};

use crate::graph::UserId;

/// One post or re-post record of a trace.
///
/// `repost_id` is `None` for an original post (written as `-1` on disk) and
/// otherwise the `post_id` of the post being re-shared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub post_id: u64,
    pub timestamp: f64,
    pub user_id: UserId,
    pub repost_id: Option<u64>,
}

impl TraceEvent {
    pub fn original(post_id: u64, timestamp: f64, user_id: UserId) -> Self {
        TraceEvent {
            post_id,
            timestamp,
            user_id,
            repost_id: None,
        }
    }

    pub fn repost(post_id: u64, timestamp: f64, user_id: UserId, of: u64) -> Self {
        TraceEvent {
            post_id,
            timestamp,
            user_id,
            repost_id: Some(of),
        }
    }

    pub fn is_original(&self) -> bool {
        self.repost_id.is_none()
    }
}

/// Sort key used everywhere a trace is ordered: timestamp, then post id.
pub(crate) fn trace_order(a: &TraceEvent, b: &TraceEvent) -> std::cmp::Ordering {
    a.timestamp
        .total_cmp(&b.timestamp)
        .then(a.post_id.cmp(&b.post_id))
}
