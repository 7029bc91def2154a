//! Trace parsing, rate estimation and Star-graph inference.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime};
use serde::Serialize;

use crate::emulator::PostIndex;
use crate::error::{Error, Result};
use crate::graph::{SocialGraph, UserId};
use crate::model::ActivityRates;
use crate::trace::{trace_order, TraceEvent};

pub const DEFAULT_ERROR_BUDGET: usize = 100;

/// Dense internal ids for external user names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdMap {
    external: Vec<String>,
    lookup: HashMap<String, UserId>,
}

impl IdMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, name: &str) -> UserId {
        if let Some(&id) = self.lookup.get(name) {
            return id;
        }
        let id = self.external.len();
        self.external.push(name.to_owned());
        self.lookup.insert(name.to_owned(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<UserId> {
        self.lookup.get(name).copied()
    }

    pub fn external(&self, id: UserId) -> &str {
        &self.external[id]
    }

    pub fn len(&self) -> usize {
        self.external.len()
    }

    pub fn is_empty(&self) -> bool {
        self.external.is_empty()
    }

    /// `(internal, external)` pairs in id order.
    pub fn iter(&self) -> impl Iterator<Item = (UserId, &str)> {
        self.external.iter().enumerate().map(|(i, s)| (i, s.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct ParsedTrace {
    /// Sorted by (timestamp, post_id).
    pub events: Vec<TraceEvent>,
    pub users: IdMap,
    /// Skipped malformed lines.
    pub diagnostics: Vec<Diagnostic>,
}

impl ParsedTrace {
    pub fn n_users(&self) -> usize {
        self.users.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    /// Malformed lines tolerated before parsing aborts.
    pub error_budget: usize,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            error_budget: DEFAULT_ERROR_BUDGET,
        }
    }
}

/// Seconds from an integer, a float or an ISO-8601 / RFC 3339 timestamp.
pub fn parse_timestamp(s: &str) -> Option<f64> {
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.timestamp() as f64 + t.timestamp_subsec_nanos() as f64 * 1e-9);
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            let t = t.and_utc();
            return Some(t.timestamp() as f64 + t.timestamp_subsec_nanos() as f64 * 1e-9);
        }
    }
    None
}

struct Raw {
    post_id: u64,
    timestamp: f64,
    user: String,
    repost_id: Option<u64>,
}

fn parse_record(rec: &csv::StringRecord) -> std::result::Result<Raw, String> {
    if rec.len() != 4 {
        return Err(format!("expected 4 fields, found {}", rec.len()));
    }
    let post_id = rec[0]
        .parse::<u64>()
        .map_err(|_| format!("bad post_id '{}'", &rec[0]))?;
    let timestamp =
        parse_timestamp(&rec[1]).ok_or_else(|| format!("bad timestamp '{}'", &rec[1]))?;
    if rec[2].is_empty() {
        return Err("empty user_id".into());
    }
    let repost_id = match &rec[3] {
        "-1" => None,
        r => {
            let id = r.parse::<u64>().map_err(|_| format!("bad repost_id '{r}'"))?;
            if id == post_id {
                return Err("post re-posts itself".into());
            }
            Some(id)
        }
    };
    Ok(Raw {
        post_id,
        timestamp,
        user: rec[2].to_owned(),
        repost_id,
    })
}

fn check_budget(diagnostics: &[Diagnostic], budget: usize) -> Result<()> {
    if diagnostics.len() <= budget {
        return Ok(());
    }
    let first = &diagnostics[0];
    Err(Error::TooManyMalformed {
        count: diagnostics.len(),
        budget,
        first: format!("line {}: {}", first.line, first.message),
    })
}

/// Parses `post_id,timestamp,user_id,repost_id` records from any reader. The
/// separator is a tab if the first data line contains one, otherwise a comma;
/// `#` lines are comments and a header starting with `post_id` is skipped. `name` only labels errors.
pub fn parse_trace_from<R: Read>(reader: R, name: &Path, opts: &ParseOptions) -> Result<ParsedTrace> {
    let mut reader = BufReader::new(reader);
    let head = reader.fill_buf().map_err(|e| Error::io(name, e))?;
    let first_line = head
        .split(|&b| b == b'\n')
        .find(|l| !l.trim_ascii().is_empty() && !l.starts_with(b"#"))
        .unwrap_or(&[]);
    let sep = if first_line.contains(&b'\t') { b'\t' } else { b',' };
    let mut csv = csv::ReaderBuilder::new()
        .delimiter(sep)
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut raws = Vec::new();
    let mut diagnostics = Vec::new();
    let mut seen_posts = HashMap::new();
    let mut rec = csv::StringRecord::new();
    let mut first = true;
    loop {
        let more = match csv.read_record(&mut rec) {
            Ok(m) => m,
            Err(e) => match e.kind() {
                csv::ErrorKind::Io(_) => {
                    let csv::ErrorKind::Io(io) = e.into_kind() else { unreachable!() };
                    return Err(Error::io(name, io));
                }
                _ => {
                    let line = e.position().map_or(0, |p| p.line() as usize);
                    diagnostics.push(Diagnostic {
                        line,
                        message: e.to_string(),
                    });
                    check_budget(&diagnostics, opts.error_budget)?;
                    continue;
                }
            },
        };
        if !more {
            break;
        }
        let lineno = rec.position().map_or(0, |p| p.line() as usize);
        if first && rec.get(0) == Some("post_id") {
            first = false;
            continue;
        }
        first = false;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let parsed = parse_record(&rec).and_then(|r| match seen_posts.insert(r.post_id, lineno) {
            Some(first) => Err(format!("duplicate post_id {} (first on line {first})", r.post_id)),
            None => Ok(r),
        });
        match parsed {
            Ok(r) => raws.push(r),
            Err(message) => {
                log::warn!("{}:{lineno}: {message}", name.display());
                diagnostics.push(Diagnostic {
                    line: lineno,
                    message,
                });
            }
        }
        check_budget(&diagnostics, opts.error_budget)?;
    }
    raws.sort_by(|a, b| {
        a.timestamp
            .total_cmp(&b.timestamp)
            .then(a.post_id.cmp(&b.post_id))
    });
    // ids follow the external order (numeric when every id is a number) so
    // that traces already using 0..N keep their numbering
    let mut names: Vec<&str> = raws.iter().map(|r| r.user.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    if names.iter().all(|n| n.parse::<u64>().is_ok()) {
        names.sort_by_key(|n| n.parse::<u64>().expect("checked numeric"));
    }
    let mut users = IdMap::new();
    for n in names {
        users.intern(n);
    }
    let events = raws
        .into_iter()
        .map(|r| TraceEvent {
            post_id: r.post_id,
            timestamp: r.timestamp,
            user_id: users.intern(&r.user),
            repost_id: r.repost_id,
        })
        .collect();
    Ok(ParsedTrace {
        events,
        users,
        diagnostics,
    })
}

/// Reads a trace file; see [`parse_trace_from`].
pub fn parse_trace(path: &Path, opts: &ParseOptions) -> Result<ParsedTrace> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_trace_from(f, path, opts)
}

/// Raw per-user rate estimates; users with no events keep zeros.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateEstimate {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub window: (f64, f64),
    /// Users with `lambda + mu = 0`.
    pub inactive: Vec<UserId>,
}

impl RateEstimate {
    /// Fails with [`Error::InactiveUser`] if any user is inactive; see
    /// [`restrict_to_active`].
    pub fn to_rates(&self) -> Result<ActivityRates> {
        ActivityRates::new(self.lambda.clone(), self.mu.clone())
    }
}

/// `lambda_u = originals / window`, `mu_u = reposts / window` over the events
/// inside the window (default: first to last timestamp).
pub fn estimate_rates(
    events: &[TraceEvent],
    n_users: usize,
    window: Option<(f64, f64)>,
) -> Result<RateEstimate> {
    let (start, end) = window
        .or_else(|| crate::emulator::default_window(events))
        .unwrap_or((0.0, 0.0));
    if !(end > start) {
        return Err(Error::EmptyWindow { start, end });
    }
    let len = end - start;
    let mut lambda = vec![0.0; n_users];
    let mut mu = vec![0.0; n_users];
    for e in events {
        if e.timestamp < start || e.timestamp > end {
            continue;
        }
        if e.user_id >= n_users {
            return Err(Error::IdOutOfRange {
                id: e.user_id,
                n_users,
            });
        }
        if e.is_original() {
            lambda[e.user_id] += 1.0;
        } else {
            mu[e.user_id] += 1.0;
        }
    }
    for v in lambda.iter_mut().chain(mu.iter_mut()) {
        *v /= len;
    }
    let inactive = (0..n_users).filter(|&u| lambda[u] + mu[u] == 0.0).collect();
    Ok(RateEstimate {
        lambda,
        mu,
        window: (start, end),
        inactive,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StarStats {
    /// Distinct (reposter, origin) pairs, self-pairs included.
    pub repost_pairs: usize,
    /// Reposts whose chain could not be resolved.
    pub unresolved: usize,
}

/// Follower graph where `i` follows `j` iff `i` re-posted content of origin
/// `j` at least once. Chains are resolved transitively.
pub fn infer_star_graph(events: &[TraceEvent], n_users: usize) -> Result<(SocialGraph, StarStats)> {
    let index = PostIndex::from_events(events);
    let mut pairs = Vec::new();
    let mut unresolved = 0;
    for e in events.iter().filter(|e| !e.is_original()) {
        match crate::emulator::resolve_origin(e, &index) {
            Ok(origin) => pairs.push((e.user_id, origin)),
            Err(Error::UnknownPost(_)) | Err(Error::RepostCycle { .. }) => unresolved += 1,
            Err(other) => return Err(other),
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    let stats = StarStats {
        repost_pairs: pairs.len(),
        unresolved,
    };
    let g = SocialGraph::from_edges(n_users, pairs.into_iter().filter(|(a, b)| a != b))?;
    Ok((g, stats))
}

/// Drops inactive users. Returns the induced graph, its rates and, for each
/// new id, the original id.
pub fn restrict_to_active(
    graph: &SocialGraph,
    est: &RateEstimate,
) -> Result<(SocialGraph, ActivityRates, Vec<UserId>)> {
    let n = graph.n_users();
    if est.lambda.len() != n {
        return Err(Error::DimensionMismatch {
            graph: n,
            rates: est.lambda.len(),
        });
    }
    let keep: Vec<UserId> = (0..n).filter(|&u| est.lambda[u] + est.mu[u] > 0.0).collect();
    let mut new_id = vec![usize::MAX; n];
    for (k, &u) in keep.iter().enumerate() {
        new_id[u] = k;
    }
    let edges = graph
        .edges()
        .filter(|&(f, l)| new_id[f] != usize::MAX && new_id[l] != usize::MAX)
        .map(|(f, l)| (new_id[f], new_id[l]));
    let g = SocialGraph::from_edges(keep.len(), edges)?;
    let rates = ActivityRates::new(
        keep.iter().map(|&u| est.lambda[u]).collect(),
        keep.iter().map(|&u| est.mu[u]).collect(),
    )?;
    Ok((g, rates, keep))
}

/// Checks that `events` are sorted the way the emulator expects.
pub fn is_sorted(events: &[TraceEvent]) -> bool {
    events.windows(2).all(|w| trace_order(&w[0], &w[1]).is_le())
}
