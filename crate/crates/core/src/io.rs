//! Plain-text file formats.
//!
//! Every writer goes through [`AtomicFile`]: output is written next to its
//! destination with a `.partial` suffix and renamed into place on commit, so
//! an interrupted run never leaves a file that looks complete.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{SocialGraph, UserId};
use crate::ingest::IdMap;
use crate::metrics::ScoreTable;
use crate::model::{ActivityRates, InfluenceVectors};
use crate::trace::TraceEvent;

pub struct AtomicFile {
    tmp: PathBuf,
    dest: PathBuf,
    out: BufWriter<File>,
}

impl AtomicFile {
    pub fn create(dest: impl AsRef<Path>) -> Result<Self> {
        let dest = dest.as_ref().to_path_buf();
        let mut name = dest.file_name().unwrap_or_default().to_os_string();
        name.push(".partial");
        let tmp = dest.with_file_name(name);
        let f = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        Ok(AtomicFile {
            tmp,
            dest,
            out: BufWriter::new(f),
        })
    }

    pub fn writer(&mut self) -> &mut impl Write {
        &mut self.out
    }

    pub fn line(&mut self, args: std::fmt::Arguments<'_>) -> Result<()> {
        self.out
            .write_fmt(args)
            .and_then(|_| self.out.write_all(b"\n"))
            .map_err(|e| Error::io(&self.tmp, e))
    }

    pub fn commit(self) -> Result<()> {
        let AtomicFile { tmp, dest, out } = self;
        let f = out
            .into_inner()
            .map_err(|e| Error::io(&tmp, e.into_error()))?;
        f.sync_all().map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, &dest).map_err(|e| Error::io(&dest, e))
    }
}

macro_rules! wline {
    ($f:expr, $($arg:tt)*) => { $f.line(format_args!($($arg)*)) };
}

fn lines(path: &Path) -> Result<impl Iterator<Item = Result<(usize, String)>>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let p = path.to_path_buf();
    Ok(BufReader::new(f)
        .lines()
        .enumerate()
        .map(move |(i, l)| l.map(|l| (i + 1, l)).map_err(|e| Error::io(&p, e)))
        .filter(|r| {
            r.as_ref()
                .map(|(_, l)| !l.trim().is_empty())
                .unwrap_or(true)
        }))
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn fields(l: &str) -> Vec<&str> {
    l.split([',', '\t', ' '])
        .filter(|s| !s.is_empty())
        .collect()
}

fn num<T: std::str::FromStr>(path: &Path, line: usize, s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| parse_err(path, line, format!("bad {what} '{s}'")))
}

/// Edge list of `follower leader` pairs, one per line. A `# n_users N`
/// comment fixes the user count; otherwise it is one more than the largest id.
pub fn read_graph(path: &Path) -> Result<SocialGraph> {
    let mut n_users = None;
    let mut edges = Vec::new();
    for r in lines(path)? {
        let (ln, l) = r?;
        let t = l.trim();
        if let Some(c) = t.strip_prefix('#') {
            if let Some(n) = c.trim().strip_prefix("n_users") {
                n_users = Some(num::<usize>(path, ln, n.trim(), "user count")?);
            }
            continue;
        }
        let f = fields(t);
        if f.len() != 2 {
            return Err(parse_err(path, ln, "expected 'follower leader'"));
        }
        let a: UserId = num(path, ln, f[0], "follower id")?;
        let b: UserId = num(path, ln, f[1], "leader id")?;
        edges.push((a, b));
    }
    let n = n_users.unwrap_or_else(|| edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0));
    SocialGraph::from_edges(n, edges)
}

pub fn write_graph(path: &Path, g: &SocialGraph) -> Result<()> {
    let mut f = AtomicFile::create(path)?;
    wline!(f, "# n_users {}", g.n_users())?;
    wline!(f, "# follower\tleader")?;
    for (a, b) in g.edges() {
        wline!(f, "{a}\t{b}")?;
    }
    f.commit()
}

/// `internal_id<TAB>external_id` sidecar.
pub fn write_id_map(path: &Path, ids: &IdMap) -> Result<()> {
    let mut f = AtomicFile::create(path)?;
    for (i, ext) in ids.iter() {
        wline!(f, "{i}\t{ext}")?;
    }
    f.commit()
}

/// `user lambda mu` rows, header optional. Users must be listed as `0..N`.
/// Zero-activity users are kept; see [`read_rates`] for the validated form.
pub fn read_rate_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rows: Vec<(UserId, f64, f64)> = Vec::new();
    for r in lines(path)? {
        let (ln, l) = r?;
        let t = l.trim();
        if t.starts_with('#') || t.starts_with("user") {
            continue;
        }
        let f = fields(t);
        if f.len() != 3 {
            return Err(parse_err(path, ln, "expected 'user lambda mu'"));
        }
        rows.push((
            num(path, ln, f[0], "user id")?,
            num(path, ln, f[1], "lambda")?,
            num(path, ln, f[2], "mu")?,
        ));
    }
    rows.sort_by_key(|r| r.0);
    if rows.iter().enumerate().any(|(i, r)| r.0 != i) {
        return Err(Error::invalid(format!(
            "{}: rates must list every user 0..N exactly once",
            path.display()
        )));
    }
    Ok(rows.into_iter().map(|r| (r.1, r.2)).unzip())
}

pub fn read_rates(path: &Path) -> Result<ActivityRates> {
    let (lambda, mu) = read_rate_table(path)?;
    ActivityRates::new(lambda, mu)
}

pub fn write_rates(path: &Path, lambda: &[f64], mu: &[f64]) -> Result<()> {
    let mut f = AtomicFile::create(path)?;
    wline!(f, "user\tlambda\tmu")?;
    for (u, (l, m)) in lambda.iter().zip(mu).enumerate() {
        wline!(f, "{u}\t{l}\t{m}")?;
    }
    f.commit()
}

/// Streaming writer for `label,user,p,q` rows; all-zero rows are skipped.
pub struct InfluenceWriter {
    file: AtomicFile,
}

impl InfluenceWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut file = AtomicFile::create(path)?;
        wline!(file, "label,user,p,q")?;
        Ok(InfluenceWriter { file })
    }

    pub fn write(&mut self, v: &InfluenceVectors) -> Result<()> {
        for (u, (p, q)) in v.p.iter().zip(&v.q).enumerate() {
            if *p != 0.0 || *q != 0.0 {
                wline!(self.file, "{},{u},{p},{q}", v.label)?;
            }
        }
        Ok(())
    }

    /// Rows from sorted `(origin, user, value)` triplets for `p` and `q`.
    pub fn write_triplets(
        &mut self,
        p: &[(UserId, UserId, f64)],
        q: &[(UserId, UserId, f64)],
    ) -> Result<()> {
        let (mut i, mut j) = (0, 0);
        while i < p.len() || j < q.len() {
            let kp = p.get(i).map(|t| (t.0, t.1));
            let kq = q.get(j).map(|t| (t.0, t.1));
            let (key, pv, qv) = match (kp, kq) {
                (Some(a), Some(b)) if a == b => {
                    i += 1;
                    j += 1;
                    (a, p[i - 1].2, q[j - 1].2)
                }
                (Some(a), Some(b)) if a < b => {
                    i += 1;
                    (a, p[i - 1].2, 0.0)
                }
                (Some(a), None) => {
                    i += 1;
                    (a, p[i - 1].2, 0.0)
                }
                (_, Some(b)) => {
                    j += 1;
                    (b, 0.0, q[j - 1].2)
                }
                (None, None) => unreachable!(),
            };
            wline!(self.file, "{},{},{pv},{qv}", key.0, key.1)?;
        }
        Ok(())
    }

    pub fn commit(self) -> Result<()> {
        self.file.commit()
    }
}

/// Rows `(label, user, p, q)` of an influence file.
pub fn read_influence(path: &Path) -> Result<Vec<(UserId, UserId, f64, f64)>> {
    let mut out = Vec::new();
    for r in lines(path)? {
        let (ln, l) = r?;
        let t = l.trim();
        if t.starts_with("label") || t.starts_with('#') {
            continue;
        }
        let f = fields(t);
        if f.len() != 4 {
            return Err(parse_err(path, ln, "expected 'label,user,p,q'"));
        }
        out.push((
            num(path, ln, f[0], "label")?,
            num(path, ln, f[1], "user")?,
            num(path, ln, f[2], "p")?,
            num(path, ln, f[3], "q")?,
        ));
    }
    Ok(out)
}

/// `user_id,psi,psi_tilde,rank` with 1-based rank positions.
pub fn write_scores(path: &Path, t: &ScoreTable) -> Result<()> {
    let pos = t.positions();
    let mut f = AtomicFile::create(path)?;
    wline!(f, "user_id,psi,psi_tilde,rank")?;
    for u in 0..t.psi.len() {
        wline!(f, "{u},{},{},{}", t.psi[u], t.psi_tilde[u], pos[u])?;
    }
    f.commit()
}

/// `user_id,score,rank` for single-score tables such as PageRank.
pub fn write_single_scores(path: &Path, header: &str, scores: &[f64], ranking: &[UserId]) -> Result<()> {
    let pos = crate::metrics::positions(ranking);
    let mut f = AtomicFile::create(path)?;
    wline!(f, "user_id,{header},rank")?;
    for (u, s) in scores.iter().enumerate() {
        wline!(f, "{u},{s},{}", pos[u])?;
    }
    f.commit()
}

/// Reads the ranking stored in a scores file: the `rank` column if present,
/// otherwise the second column ranked descending.
pub fn read_ranking(path: &Path) -> Result<Vec<UserId>> {
    let mut header: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<String>> = Vec::new();
    for r in lines(path)? {
        let (_, l) = r?;
        let f: Vec<String> = fields(l.trim()).into_iter().map(str::to_owned).collect();
        if header.is_none() {
            header = Some(f);
            continue;
        }
        rows.push(f);
    }
    let header = header.ok_or_else(|| Error::invalid(format!("{}: empty scores file", path.display())))?;
    let users: Vec<UserId> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| num(path, i + 2, &r[0], "user id"))
        .collect::<Result<_>>()?;
    if let Some(c) = header.iter().position(|h| h == "rank") {
        let mut by_pos: Vec<(usize, UserId)> = rows
            .iter()
            .zip(&users)
            .enumerate()
            .map(|(i, (r, &u))| Ok((num(path, i + 2, &r[c], "rank")?, u)))
            .collect::<Result<_>>()?;
        by_pos.sort_unstable();
        return Ok(by_pos.into_iter().map(|(_, u)| u).collect());
    }
    let scores: Vec<f64> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| num(path, i + 2, &r[1], "score"))
        .collect::<Result<_>>()?;
    let order = crate::metrics::rank(&scores)?;
    Ok(order.into_iter().map(|k| users[k]).collect())
}

pub fn write_common_proportion(path: &Path, depths: &[usize], values: &[f64]) -> Result<()> {
    let mut f = AtomicFile::create(path)?;
    wline!(f, "X,common_proportion")?;
    for (x, v) in depths.iter().zip(values) {
        wline!(f, "{x},{v}")?;
    }
    f.commit()
}

pub fn write_rank_scatter(path: &Path, rows: &[(UserId, usize, usize)]) -> Result<()> {
    let mut f = AtomicFile::create(path)?;
    wline!(f, "user,rank_a,rank_b")?;
    for (u, a, b) in rows {
        wline!(f, "{u},{a},{b}")?;
    }
    f.commit()
}

pub fn write_emulator_q(path: &Path, q: &[(UserId, UserId, f64)]) -> Result<()> {
    let mut f = AtomicFile::create(path)?;
    wline!(f, "origin,user,q_emu")?;
    for (o, u, v) in q {
        wline!(f, "{o},{u},{v}")?;
    }
    f.commit()
}

/// `post_id,timestamp,user_id,repost_id`, `-1` marking originals.
pub fn write_trace(path: &Path, events: &[TraceEvent]) -> Result<()> {
    let mut f = AtomicFile::create(path)?;
    wline!(f, "post_id,timestamp,user_id,repost_id")?;
    for e in events {
        match e.repost_id {
            None => wline!(f, "{},{},{},-1", e.post_id, e.timestamp, e.user_id)?,
            Some(r) => wline!(f, "{},{},{},{r}", e.post_id, e.timestamp, e.user_id)?,
        }
    }
    f.commit()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = AtomicFile::create(path)?;
    serde_json::to_writer_pretty(f.writer(), value)?;
    wline!(f, "")?;
    f.commit()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_round_trip_keeps_isolated_users() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.tsv");
        let g = SocialGraph::from_edges(5, [(0, 1), (1, 0), (2, 1)]).unwrap();
        write_graph(&p, &g).unwrap();
        assert_eq!(read_graph(&p).unwrap(), g);
        assert!(!dir.path().join("g.tsv.partial").exists());
    }

    #[test]
    fn rates_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.tsv");
        write_rates(&p, &[0.1, 0.25], &[2.0, 0.0]).unwrap();
        let r = read_rates(&p).unwrap();
        assert_eq!(r.lambdas(), &[0.1, 0.25]);
        assert_eq!(r.mus(), &[2.0, 0.0]);
    }

    #[test]
    fn ranking_from_scores_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        let t = crate::metrics::psi_scores(
            [(0, &[0.5, 0.5, 0.0][..]), (1, &[0.1, 0.2, 0.9][..]), (2, &[0.4, 0.3, 0.1][..])],
            3,
            true,
        )
        .unwrap();
        write_scores(&p, &t).unwrap();
        assert_eq!(read_ranking(&p).unwrap(), t.rank);
    }

    #[test]
    fn uncommitted_output_stays_partial() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        {
            let mut f = AtomicFile::create(&p).unwrap();
            wline!(f, "half").unwrap();
        }
        assert!(!p.exists());
        assert!(dir.path().join("x.csv.partial").exists());
    }
}
