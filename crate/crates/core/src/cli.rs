//! Command-line front end. Every command reads its inputs, writes CSV files
//! and a `manifest.json` into `--out-dir`, and depends only on its inputs,
//! flags and seed.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::emulator;
use crate::error::{Error, Result};
use crate::graph::{self, UserId};
use crate::ingest::{self, ParseOptions, RateEstimate};
use crate::io;
use crate::metrics::{self, ScoreAccumulator};
use crate::model::{
    pagerank, solve_labels, ActivityRates, DenseSolver, PropagationSystem, SolverOptions,
};
use crate::simulator::{self, Arrivals, Eviction, PolicyConfig, Selection, SimConfig};

#[derive(Debug, Parser)]
#[command(name = "psirank", version, about = "Influence ranking on social platforms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic follower graph and optionally a rate file.
    Generate(GenerateArgs),
    /// Solve the model for all or some labels and score users.
    Solve(SolveArgs),
    /// Score users from a `label,user,p,q` file.
    Rank(RankArgs),
    /// PageRank of the follower graph.
    Pagerank(PagerankArgs),
    /// Run the platform simulator.
    Simulate(SimulateArgs),
    /// Replay a trace with single-slot Walls.
    Emulate(EmulateArgs),
    /// Star follower graph from a trace.
    InferGraph(TraceArgs),
    /// Per-user posting and re-posting rates from a trace.
    EstimateRates(TraceArgs),
    /// Compare two rankings.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutArgs {
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphKind {
    FourUser,
    Tree,
    ScaleFree,
    ErdosRenyi,
    Ring,
    Complete,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: GraphKind,
    /// Number of users (ignored by tree and four-user).
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 9)]
    pub depth: u32,
    /// Mean degree (Erdos-Renyi) or mean leaders per user (ring).
    #[arg(long, default_value_t = 3.0)]
    pub degree: f64,
    #[arg(long, default_value_t = 2.5)]
    pub exponent: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Homogeneous posting rate; writes rates.tsv together with --mu.
    #[arg(long, requires = "mu")]
    pub lambda: Option<f64>,
    #[arg(long, requires = "lambda")]
    pub mu: Option<f64>,
    /// Uniform random rates in [0, hi] for both lambda and mu.
    #[arg(long, conflicts_with = "lambda")]
    pub random_rates: Option<f64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolveArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub rates: PathBuf,
    /// Solve every label (the default when --labels is absent).
    #[arg(long, conflicts_with = "labels")]
    pub all_labels: bool,
    /// Comma-separated subset of labels; scores are then not normalized.
    #[arg(long, value_delimiter = ',')]
    pub labels: Option<Vec<UserId>>,
    #[arg(long, default_value_t = crate::model::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Use the dense LU solver instead of iteration.
    #[arg(long)]
    pub dense: bool,
    /// Also write every p and q vector to influence.csv.
    #[arg(long)]
    pub vectors: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RankArgs {
    /// A `label,user,p,q` file from `solve --vectors` or `simulate`.
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to one more than the largest id seen.
    #[arg(long)]
    pub n_users: Option<usize>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PagerankArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value_t = 0.85)]
    pub beta: f64,
    #[arg(long, default_value_t = crate::model::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub rates: PathBuf,
    #[arg(long, default_value_t = 300_000)]
    pub events: u64,
    #[arg(long = "M", default_value_t = 20)]
    pub newsfeed_size: usize,
    #[arg(long = "K", default_value_t = 10)]
    pub wall_size: usize,
    /// random, newest, most_popular or least_popular.
    #[arg(long, default_value = "random")]
    pub selection: String,
    /// random, fifo or ttl:<lifetime>.
    #[arg(long, default_value = "random")]
    pub eviction: String,
    /// poisson, deterministic, hyperexp or hyperexp:<cv2>.
    #[arg(long, default_value = "poisson")]
    pub arrivals: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = simulator::DEFAULT_WARMUP_FRACTION)]
    pub warmup: f64,
    /// Also write the executed events to trace.csv.
    #[arg(long)]
    pub record_trace: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct WindowArgs {
    #[arg(long)]
    pub start: Option<f64>,
    #[arg(long)]
    pub end: Option<f64>,
}

impl WindowArgs {
    fn resolve(&self, events: &[crate::TraceEvent]) -> Option<(f64, f64)> {
        let d = emulator::default_window(events);
        match (self.start, self.end, d) {
            (Some(s), Some(e), _) => Some((s, e)),
            (s, e, Some((ds, de))) => Some((s.unwrap_or(ds), e.unwrap_or(de))),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EmulateArgs {
    #[arg(long)]
    pub trace: PathBuf,
    #[command(flatten)]
    pub window: WindowArgs,
    #[arg(long, default_value_t = ingest::DEFAULT_ERROR_BUDGET)]
    pub error_budget: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TraceArgs {
    #[arg(long)]
    pub trace: PathBuf,
    #[command(flatten)]
    pub window: WindowArgs,
    #[arg(long, default_value_t = ingest::DEFAULT_ERROR_BUDGET)]
    pub error_budget: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompareArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "10,100,1000")]
    pub depths: Vec<usize>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Serialize)]
struct Manifest<'a, A: Serialize> {
    command: &'a str,
    version: &'static str,
    args: &'a A,
    outputs: Vec<String>,
    details: serde_json::Value,
}

fn finish<A: Serialize>(
    command: &str,
    args: &A,
    out_dir: &Path,
    outputs: &[&str],
    details: serde_json::Value,
) -> Result<()> {
    let m = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        args,
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
        details,
    };
    io::write_json(&out_dir.join("manifest.json"), &m)
}

fn prepare(out: &OutArgs) -> Result<&Path> {
    std::fs::create_dir_all(&out.out_dir).map_err(|e| Error::io(&out.out_dir, e))?;
    Ok(&out.out_dir)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => generate(&a),
        Command::Solve(a) => solve(&a),
        Command::Rank(a) => rank(&a),
        Command::Pagerank(a) => run_pagerank(&a),
        Command::Simulate(a) => simulate(&a),
        Command::Emulate(a) => emulate(&a),
        Command::InferGraph(a) => infer_graph(&a),
        Command::EstimateRates(a) => estimate_rates(&a),
        Command::Compare(a) => compare(&a),
    }
}

fn generate(a: &GenerateArgs) -> Result<()> {
    let dir = prepare(&a.out)?;
    let g = match a.kind {
        GraphKind::FourUser => graph::four_user_example(),
        GraphKind::Tree => graph::binary_tree(a.depth)?,
        GraphKind::ScaleFree => graph::scale_free(a.n, a.exponent, a.seed)?,
        GraphKind::ErdosRenyi => graph::erdos_renyi(a.n, a.degree, a.seed)?,
        GraphKind::Ring => graph::ring_with_chords(a.n, a.degree, a.seed)?,
        GraphKind::Complete => graph::complete(a.n)?,
    };
    io::write_graph(&dir.join("graph.tsv"), &g)?;
    let mut outputs = vec!["graph.tsv"];
    let n = g.n_users();
    let rates = match (a.lambda, a.mu, a.random_rates) {
        (Some(l), Some(m), _) => Some(ActivityRates::homogeneous(n, l, m)?),
        (_, _, Some(hi)) => {
            // separate stream so the graph does not depend on whether rates are drawn
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed ^ 0x5eed_0f_4a7e5);
            let lambda: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * hi).collect();
            let mu: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * hi).collect();
            Some(ActivityRates::new(lambda, mu)?)
        }
        _ => None,
    };
    if let Some(r) = &rates {
        io::write_rates(&dir.join("rates.tsv"), r.lambdas(), r.mus())?;
        outputs.push("rates.tsv");
    }
    let details = json!({
        "n_users": n,
        "n_edges": g.n_edges(),
        "symmetric": g.is_symmetric(),
    });
    finish("generate", a, dir, &outputs, details)
}

fn solve(a: &SolveArgs) -> Result<()> {
    let dir = prepare(&a.out)?;
    let full_graph = io::read_graph(&a.graph)?;
    let (lambda, mu) = io::read_rate_table(&a.rates)?;
    if lambda.len() != full_graph.n_users() {
        return Err(Error::DimensionMismatch {
            graph: full_graph.n_users(),
            rates: lambda.len(),
        });
    }
    let n_full = full_graph.n_users();
    let inactive: Vec<UserId> = (0..n_full).filter(|&u| lambda[u] + mu[u] <= 0.0).collect();
    let est = RateEstimate {
        lambda,
        mu,
        window: (0.0, 1.0),
        inactive: inactive.clone(),
    };
    if !inactive.is_empty() {
        log::warn!("{} users have no activity and are left out of the solve", inactive.len());
    }
    let (g, rates, keep) = ingest::restrict_to_active(&full_graph, &est)?;
    let mut to_local = vec![usize::MAX; n_full];
    for (k, &u) in keep.iter().enumerate() {
        to_local[u] = k;
    }

    let subset = a.labels.is_some();
    let labels: Vec<UserId> = match &a.labels {
        Some(ls) => {
            let mut out = Vec::with_capacity(ls.len());
            for &l in ls {
                if l >= n_full {
                    return Err(Error::IdOutOfRange { id: l, n_users: n_full });
                }
                match to_local[l] {
                    usize::MAX => log::warn!("label {l} is inactive; its scores are zero"),
                    k => out.push(k),
                }
            }
            out
        }
        None => (0..g.n_users()).collect(),
    };

    let system = PropagationSystem::build(&g, &rates)?;
    let bounds = system.spectral_bounds();
    let opts = SolverOptions {
        tol: a.tol,
        max_iter: a.max_iter,
        record_steps: false,
    };
    let workers = a
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let mut acc = ScoreAccumulator::new(g.n_users());
    let mut writer = if a.vectors {
        Some(io::InfluenceWriter::create(&dir.join("influence.csv"))?)
    } else {
        None
    };
    let mut max_iters = 0usize;
    let mut max_residual = 0.0f64;
    let mut record = |v: crate::InfluenceVectors| -> Result<()> {
        acc.add(v.label, &v.q)?;
        if let Some(w) = writer.as_mut() {
            let mut global = crate::InfluenceVectors {
                label: keep[v.label],
                p: vec![0.0; n_full],
                q: vec![0.0; n_full],
            };
            for (k, &u) in keep.iter().enumerate() {
                global.p[u] = v.p[k];
                global.q[u] = v.q[k];
            }
            w.write(&global)?;
        }
        Ok(())
    };
    if a.dense {
        let lu = DenseSolver::new(&system)?;
        for &l in &labels {
            record(lu.solve(l)?)?;
        }
    } else {
        solve_labels(&system, &labels, &opts, workers, |s| {
            max_iters = max_iters.max(s.iterations);
            max_residual = max_residual.max(s.residual);
            record(s.vectors)
        })?;
    }
    let local = acc.finish(false)?;
    let mut psi = vec![0.0; n_full];
    let mut psi_tilde = vec![0.0; n_full];
    for (k, &u) in keep.iter().enumerate() {
        psi[u] = local.psi[k];
        psi_tilde[u] = local.psi_tilde[k];
    }
    let table = metrics::ScoreTable {
        rank: metrics::rank(&psi)?,
        psi,
        psi_tilde,
        normalized: local.normalized && inactive.is_empty() && !subset,
    };
    io::write_scores(&dir.join("scores.csv"), &table)?;
    let mut outputs = vec!["scores.csv"];
    if let Some(w) = writer {
        w.commit()?;
        outputs.push("influence.csv");
    }
    let details = json!({
        "n_users": n_full,
        "labels_solved": labels.len(),
        "normalized": table.normalized,
        "inactive_users": inactive,
        "solver": if a.dense { "dense" } else { "iterative" },
        "workers": workers,
        "max_iterations": max_iters,
        "max_residual": max_residual,
        "row_sum_bounds": [bounds.lower, bounds.upper],
        "leaderless_users": system.n_leaderless(),
    });
    finish("solve", a, dir, &outputs, details)
}

fn rank(a: &RankArgs) -> Result<()> {
    let dir = prepare(&a.out)?;
    let rows = io::read_influence(&a.input)?;
    let max_id = rows.iter().map(|r| r.0.max(r.1) + 1).max().unwrap_or(0);
    let n = a.n_users.unwrap_or(max_id);
    if n < max_id {
        return Err(Error::IdOutOfRange { id: max_id - 1, n_users: n });
    }
    let mut by_label: BTreeMap<UserId, Vec<f64>> = BTreeMap::new();
    for (label, user, _p, q) in rows {
        by_label.entry(label).or_insert_with(|| vec![0.0; n])[user] = q;
    }
    let table = metrics::psi_scores(by_label.iter().map(|(&l, q)| (l, &q[..])), n, false)?;
    io::write_scores(&dir.join("scores.csv"), &table)?;
    let details = json!({ "n_users": n, "labels": by_label.len(), "normalized": table.normalized });
    finish("rank", a, dir, &["scores.csv"], details)
}

fn run_pagerank(a: &PagerankArgs) -> Result<()> {
    let dir = prepare(&a.out)?;
    let g = io::read_graph(&a.graph)?;
    let pr = pagerank(&g, a.beta, a.tol, a.max_iter)?;
    let order = metrics::rank(&pr.scores)?;
    io::write_single_scores(&dir.join("pagerank.csv"), "pagerank", &pr.scores, &order)?;
    let details = json!({ "iterations": pr.iterations, "residual": pr.residual });
    finish("pagerank", a, dir, &["pagerank.csv"], details)
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let dir = prepare(&a.out)?;
    let g = io::read_graph(&a.graph)?;
    let rates = io::read_rates(&a.rates)?;
    let policy = PolicyConfig {
        selection: a.selection.parse::<Selection>()?,
        eviction: a.eviction.parse::<Eviction>()?,
        arrivals: a.arrivals.parse::<Arrivals>()?,
    };
    let cfg = SimConfig {
        policy,
        newsfeed_size: a.newsfeed_size,
        wall_size: a.wall_size,
        n_events: a.events,
        seed: a.seed,
        warmup_fraction: a.warmup,
        record_trace: a.record_trace,
    };
    let out = simulator::simulate(&g, &rates, &cfg)?;
    let violations = out.state.check_all_conservation();
    if !violations.is_empty() {
        return Err(Error::invalid(format!(
            "simulator broke flow conservation for {} pairs, first {:?}",
            violations.len(),
            violations[0]
        )));
    }
    let n = g.n_users();
    let mut w = io::InfluenceWriter::create(&dir.join("influence.csv"))?;
    w.write_triplets(&out.influence.p, &out.influence.q)?;
    w.commit()?;
    let mut acc = ScoreAccumulator::new(n);
    for l in 0..n {
        acc.add(l, &out.influence.q_dense(l))?;
    }
    io::write_scores(&dir.join("scores.csv"), &acc.finish(true)?)?;
    io::write_json(&dir.join("summary.json"), &out.summary)?;
    let mut outputs = vec!["influence.csv", "scores.csv", "summary.json"];
    if let Some(tr) = &out.trace {
        io::write_trace(&dir.join("trace.csv"), tr)?;
        outputs.push("trace.csv");
    }
    let details = json!({
        "events": out.summary.events,
        "skipped_reposts": out.summary.skipped_reposts,
        "end_time": out.summary.end_time,
        "conservation_violations": 0,
    });
    finish("simulate", a, dir, &outputs, details)
}

fn load_trace(path: &Path, budget: usize) -> Result<ingest::ParsedTrace> {
    let t = ingest::parse_trace(path, &ParseOptions { error_budget: budget })?;
    if t.events.is_empty() {
        return Err(Error::invalid(format!("{}: no events", path.display())));
    }
    Ok(t)
}

fn emulate(a: &EmulateArgs) -> Result<()> {
    let dir = prepare(&a.out)?;
    let t = load_trace(&a.trace, a.error_budget)?;
    let window = a.window.resolve(&t.events);
    let out = emulator::replay(&t.events, t.n_users(), window)?;
    io::write_emulator_q(&dir.join("q_emu.csv"), &out.q)?;
    let order = metrics::rank(&out.psi)?;
    io::write_single_scores(&dir.join("scores.csv"), "psi", &out.psi, &order)?;
    io::write_id_map(&dir.join("id_map.tsv"), &t.users)?;
    let details = json!({
        "n_users": t.n_users(),
        "events": out.events,
        "dropped_reposts": out.dropped,
        "malformed_lines": t.diagnostics,
        "window": [out.window.0, out.window.1],
    });
    finish("emulate", a, dir, &["q_emu.csv", "scores.csv", "id_map.tsv"], details)
}

fn infer_graph(a: &TraceArgs) -> Result<()> {
    let dir = prepare(&a.out)?;
    let t = load_trace(&a.trace, a.error_budget)?;
    let (g, stats) = ingest::infer_star_graph(&t.events, t.n_users())?;
    io::write_graph(&dir.join("graph.tsv"), &g)?;
    io::write_id_map(&dir.join("id_map.tsv"), &t.users)?;
    let details = json!({
        "n_users": g.n_users(),
        "n_edges": g.n_edges(),
        "stats": stats,
        "malformed_lines": t.diagnostics,
    });
    finish("infer-graph", a, dir, &["graph.tsv", "id_map.tsv"], details)
}

fn estimate_rates(a: &TraceArgs) -> Result<()> {
    let dir = prepare(&a.out)?;
    let t = load_trace(&a.trace, a.error_budget)?;
    let window = a.window.resolve(&t.events);
    let est = ingest::estimate_rates(&t.events, t.n_users(), window)?;
    io::write_rates(&dir.join("rates.tsv"), &est.lambda, &est.mu)?;
    io::write_id_map(&dir.join("id_map.tsv"), &t.users)?;
    let details = json!({
        "n_users": t.n_users(),
        "window": [est.window.0, est.window.1],
        "inactive_users": est.inactive,
        "malformed_lines": t.diagnostics,
    });
    finish("estimate-rates", a, dir, &["rates.tsv", "id_map.tsv"], details)
}

fn compare(a: &CompareArgs) -> Result<()> {
    let dir = prepare(&a.out)?;
    let ra = io::read_ranking(&a.a)?;
    let rb = io::read_ranking(&a.b)?;
    let n = ra.len();
    let depths: Vec<usize> = a.depths.iter().copied().filter(|&x| x <= n).collect();
    if depths.len() < a.depths.len() {
        log::warn!("depths above {n} users dropped");
    }
    let cx = metrics::common_users_proportion(&ra, &rb, &depths)?;
    let scatter = metrics::rank_scatter(&ra, &rb)?;
    io::write_common_proportion(&dir.join("common.csv"), &depths, &cx)?;
    io::write_rank_scatter(&dir.join("scatter.csv"), &scatter)?;
    let xs: Vec<f64> = scatter.iter().map(|r| r.1 as f64).collect();
    let ys: Vec<f64> = scatter.iter().map(|r| r.2 as f64).collect();
    let rho = if n >= 2 { Some(metrics::pearson(&xs, &ys)?) } else { None };
    let details = json!({ "n_users": n, "rank_correlation": rho });
    finish("compare", a, dir, &["common.csv", "scatter.csv"], details)
}

/// Entry point used by the binary.
pub fn main() -> std::process::ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::FAILURE
        }
    }
}
