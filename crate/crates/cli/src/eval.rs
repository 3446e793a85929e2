//! Batch evaluation: how similar are the routes each engine returns?
//!
//! Only queries for which an engine returns exactly `k` routes count towards
//! that engine's figures; the others are reported as exclusions.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use altroute_core::engines::{run_engine, EngineKind, EngineSettings};
use altroute_core::metrics::set_similarity;
use altroute_core::study::{categorize, mean_sd, CategoryBoundaries, LengthCategory};
use altroute_core::{build_tree, GeoPoint, Orientation, RoadNetwork};
use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{load_net, parse_boundaries, CliError, CliResult, EngineArgs};

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub net: PathBuf,
    /// One `lat,lon lat,lon` pair per line; `#` starts a comment.
    #[arg(long, conflicts_with = "sample", required_unless_present = "sample")]
    pub queries: Option<PathBuf>,
    /// Draw this many queries, spread evenly over the length categories.
    #[arg(long)]
    pub sample: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Category boundaries in minutes, `small,medium,long`.
    #[arg(long, value_parser = parse_boundaries)]
    pub categories: Option<CategoryBoundaries>,
    /// Also write the full report as JSON here.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    pub engines: EngineArgs,
}

pub type Query = (GeoPoint, GeoPoint);

pub fn parse_queries(text: &str) -> CliResult<Vec<Query>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [a, b] = fields[..] else {
            return Err(CliError::Data(format!(
                "line {}: expected `lat,lon lat,lon`",
                i + 1
            )));
        };
        let parse = |s: &str| {
            s.parse::<GeoPoint>()
                .map_err(|e| CliError::Data(format!("line {}: {e}", i + 1)))
        };
        out.push((parse(a)?, parse(b)?));
    }
    Ok(out)
}

/// Seeded sampler that fills each length category with an equal share of
/// `n` queries. Categories the network cannot supply stay short.
pub fn sample_queries(
    net: &RoadNetwork,
    n: usize,
    seed: u64,
    bounds: &CategoryBoundaries,
) -> Vec<Query> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cats = LengthCategory::ALL;
    let mut want: Vec<usize> = (0..cats.len())
        .map(|i| n / cats.len() + usize::from(i < n % cats.len()))
        .collect();
    let mut out = Vec::with_capacity(n);
    if net.vertex_count() < 2 {
        return out;
    }
    let max_sources = 50 * n.max(1);
    for _ in 0..max_sources {
        if want.iter().all(|&w| w == 0) {
            break;
        }
        let s = rng.random_range(0..net.vertex_count());
        let Ok(tree) = build_tree(net, s, Orientation::Forward) else {
            continue;
        };
        for (ci, &c) in cats.iter().enumerate() {
            if want[ci] == 0 {
                continue;
            }
            let targets: Vec<usize> = tree
                .settle_order()
                .iter()
                .copied()
                .filter(|&v| {
                    v != s && tree.dist(v).and_then(|d| categorize(d, bounds).ok()) == Some(c)
                })
                .collect();
            if targets.is_empty() {
                continue;
            }
            let t = targets[rng.random_range(0..targets.len())];
            out.push((net.point(s), net.point(t)));
            want[ci] -= 1;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineOutcome {
    pub routes: usize,
    /// Present only for complete sets of `k` routes.
    pub sim: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryOutcome {
    pub source: GeoPoint,
    pub target: GeoPoint,
    pub fastest_time: Option<f64>,
    pub category: Option<LengthCategory>,
    /// Why the query was skipped entirely, if it was.
    pub skipped: Option<String>,
    pub engines: BTreeMap<String, EngineOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub engine: String,
    /// `all` or a category name.
    pub category: String,
    /// Queries with exactly `k` routes.
    pub sets: usize,
    pub excluded: usize,
    pub avg: Option<f64>,
    pub sd: Option<f64>,
    pub max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub k: usize,
    pub queries: usize,
    pub skipped: usize,
    pub rows: Vec<SummaryRow>,
    pub outcomes: Vec<QueryOutcome>,
}

fn evaluate_one(
    net: &RoadNetwork,
    (from, to): Query,
    settings: &EngineSettings,
    bounds: &CategoryBoundaries,
) -> QueryOutcome {
    let mut outcome = QueryOutcome {
        source: from,
        target: to,
        fastest_time: None,
        category: None,
        skipped: None,
        engines: BTreeMap::new(),
    };
    if !net.rect().contains(&from) || !net.rect().contains(&to) {
        outcome.skipped = Some("outside the network area".into());
        return outcome;
    }
    let (Ok(s), Ok(t)) = (net.snap_to_vertex(&from), net.snap_to_vertex(&to)) else {
        outcome.skipped = Some("empty network".into());
        return outcome;
    };
    if s == t {
        outcome.skipped = Some("both points snap to the same intersection".into());
        return outcome;
    }
    let (Ok(forward), Ok(backward)) = (
        build_tree(net, s, Orientation::Forward),
        build_tree(net, t, Orientation::Backward),
    ) else {
        outcome.skipped = Some("search failed".into());
        return outcome;
    };
    let Some(fastest) = forward.dist(t) else {
        outcome.skipped = Some("no route".into());
        return outcome;
    };
    outcome.fastest_time = Some(fastest);
    outcome.category = categorize(fastest, bounds).ok();
    for kind in EngineKind::ALL {
        let e = match run_engine(kind, &forward, &backward, settings) {
            Ok(set) => EngineOutcome {
                routes: set.routes.len(),
                sim: (set.routes.len() == settings.k)
                    .then(|| set_similarity(&set.routes).ok().map(|r| r.sim))
                    .flatten(),
                error: None,
            },
            Err(err) => EngineOutcome {
                routes: 0,
                sim: None,
                error: Some(err.to_string()),
            },
        };
        outcome.engines.insert(kind.id().to_string(), e);
    }
    outcome
}

fn summarise(engine: &str, category: &str, outcomes: &[&QueryOutcome]) -> SummaryRow {
    let sims: Vec<f64> = outcomes
        .iter()
        .filter_map(|o| o.engines.get(engine).and_then(|e| e.sim))
        .collect();
    let stats = mean_sd(&sims);
    SummaryRow {
        engine: engine.to_string(),
        category: category.to_string(),
        sets: sims.len(),
        excluded: outcomes.len() - sims.len(),
        avg: stats.map(|(m, _)| m),
        sd: stats.and_then(|(_, sd)| sd),
        max: sims.iter().copied().reduce(f64::max),
    }
}

/// Runs every engine on every query. Work is spread over threads; outcomes
/// keep the input order.
pub fn evaluate(
    net: &RoadNetwork,
    queries: &[Query],
    settings: &EngineSettings,
    bounds: &CategoryBoundaries,
) -> EvalReport {
    let outcomes: Vec<QueryOutcome> = queries
        .par_iter()
        .map(|&q| evaluate_one(net, q, settings, bounds))
        .collect();
    let routed: Vec<&QueryOutcome> = outcomes.iter().filter(|o| o.skipped.is_none()).collect();
    let mut rows = Vec::new();
    for kind in EngineKind::ALL {
        rows.push(summarise(kind.id(), "all", &routed));
        for c in LengthCategory::ALL {
            let subset: Vec<&QueryOutcome> = routed
                .iter()
                .copied()
                .filter(|o| o.category == Some(c))
                .collect();
            rows.push(summarise(kind.id(), c.name(), &subset));
        }
    }
    EvalReport {
        k: settings.k,
        queries: outcomes.len(),
        skipped: outcomes.len() - routed.len(),
        rows,
        outcomes,
    }
}

fn num(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.3}"))
}

pub fn render_table(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "k = {}, {} queries ({} skipped)",
        report.k, report.queries, report.skipped
    );
    let _ = writeln!(
        out,
        "{:<14} {:<8} {:>6} {:>9}  {:<16} {:>6}",
        "engine", "category", "sets", "excluded", "AVG (sd)", "MAX"
    );
    for r in &report.rows {
        let avg = match (r.avg, r.sd) {
            (Some(a), Some(sd)) => format!("{a:.3} ({sd:.3})"),
            (Some(a), None) => format!("{a:.3} (-)"),
            _ => "-".into(),
        };
        let _ = writeln!(
            out,
            "{:<14} {:<8} {:>6} {:>9}  {:<16} {:>6}",
            r.engine,
            r.category,
            r.sets,
            r.excluded,
            avg,
            num(r.max)
        );
    }
    out
}

pub fn run(args: &EvalArgs) -> CliResult {
    let settings = args.engines.settings()?;
    if settings.k < 2 {
        return Err(CliError::Usage("similarity needs --k of at least 2".into()));
    }
    let bounds = args.categories.unwrap_or_default();
    let net = load_net(&args.net)?;
    let queries = match (&args.queries, args.sample) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            parse_queries(&text)?
        }
        (None, Some(n)) => sample_queries(&net, n, args.seed, &bounds),
        (None, None) => return Err(CliError::Usage("give --queries or --sample".into())),
    };
    if queries.is_empty() {
        return Err(CliError::Usage("no queries to evaluate".into()));
    }
    let report = evaluate(&net, &queries, &settings, &bounds);
    print!("{}", render_table(&report));
    if let Some(path) = &args.json {
        let text =
            serde_json::to_string_pretty(&report).map_err(|e| CliError::Data(e.to_string()))?;
        fs::write(path, text + "\n")?;
    }
    Ok(())
}
