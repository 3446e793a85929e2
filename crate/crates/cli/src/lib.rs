//! `altroute` command-line tool.

pub mod eval;
pub mod stats;

use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use altroute_core::engines::{run_engine, EngineKind, EngineSettings};
use altroute_core::netfile::{load_network, save_network};
use altroute_core::osm::{parse_extract, SpeedTable};
use altroute_core::study::CategoryBoundaries;
use altroute_core::synth::synthetic_city;
use altroute_core::{build_tree, BoundingRect, GeoPoint, Orientation, RoadNetwork};
use altroute_service::{RouteService, ServiceConfig};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 1,
            Self::Data(_) => 2,
        }
    }
}

impl From<altroute_core::Error> for CliError {
    fn from(e: altroute_core::Error) -> Self {
        Self::Data(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::Data(e.to_string())
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "altroute",
    version,
    about = "Alternative route planning and evaluation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a network file from an OSM XML extract.
    Extract {
        /// OSM XML file.
        #[arg(long)]
        osm: PathBuf,
        /// Clip rectangle `minlat,minlon,maxlat,maxlon`.
        #[arg(long)]
        rect: BoundingRect,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Write a seeded synthetic city as OSM XML.
    Synth {
        #[arg(long, default_value_t = 60)]
        rows: usize,
        #[arg(long, default_value_t = 60)]
        cols: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Print alternative routes for one query as GeoJSON.
    Route {
        #[arg(long)]
        net: PathBuf,
        /// `lat,lon`
        #[arg(long, allow_hyphen_values = true)]
        from: GeoPoint,
        /// `lat,lon`
        #[arg(long, allow_hyphen_values = true)]
        to: GeoPoint,
        /// One engine; all three when omitted.
        #[arg(long)]
        engine: Option<EngineKind>,
        #[command(flatten)]
        engines: EngineArgs,
    },
    /// Similarity of the route sets each engine produces over many queries.
    Eval(eval::EvalArgs),
    /// Rating statistics from a service rating log.
    Stats(stats::StatsArgs),
    /// Run the HTTP service.
    Serve {
        /// TOML config file; environment variables override it.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    /// Routes per engine.
    #[arg(long, short, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = altroute_core::engines::penalty::DEFAULT_PENALTY_FACTOR)]
    pub penalty_factor: f64,
    #[arg(long, default_value_t = altroute_core::engines::DEFAULT_STRETCH_BOUND)]
    pub stretch: f64,
    #[arg(long, default_value_t = altroute_core::engines::dissimilarity::DEFAULT_THETA)]
    pub theta: f64,
}

impl EngineArgs {
    pub fn settings(&self) -> CliResult<EngineSettings> {
        if self.k == 0 {
            return Err(CliError::Usage("--k must be at least 1".into()));
        }
        if !(self.penalty_factor > 1.0) {
            return Err(CliError::Usage("--penalty-factor must exceed 1".into()));
        }
        if !(self.stretch >= 1.0) {
            return Err(CliError::Usage("--stretch must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(CliError::Usage("--theta must lie in [0, 1]".into()));
        }
        Ok(EngineSettings {
            k: self.k,
            penalty_factor: self.penalty_factor,
            stretch_bound: self.stretch,
            theta: self.theta,
        })
    }
}

/// Parses `small,medium,long` minute boundaries.
pub fn parse_boundaries(s: &str) -> Result<CategoryBoundaries, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [a, b, c] => CategoryBoundaries::new(a, b, c).map_err(|e| e.to_string()),
        _ => Err("expected three minute boundaries, e.g. 10,25,80".into()),
    }
}

pub fn load_net(path: &Path) -> CliResult<RoadNetwork> {
    load_network(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn extract(osm: &Path, rect: &BoundingRect, out: &Path) -> CliResult {
    let file = File::open(osm).map_err(|e| CliError::Data(format!("{}: {e}", osm.display())))?;
    let net = parse_extract(BufReader::new(file), rect, &SpeedTable::default())
        .map_err(|e| CliError::Data(format!("{}: {e}", osm.display())))?;
    save_network(&net, out)?;
    eprintln!(
        "wrote {} vertices, {} edges to {}",
        net.vertex_count(),
        net.edge_count(),
        out.display()
    );
    Ok(())
}

fn synth(rows: usize, cols: usize, seed: u64, out: &Path) -> CliResult {
    if rows < 2 || cols < 2 {
        return Err(CliError::Usage(
            "--rows and --cols must be at least 2".into(),
        ));
    }
    let city = synthetic_city(rows, cols, seed);
    fs::write(out, &city.xml)?;
    let r = city.rect;
    println!(
        "{},{},{},{}",
        r.min_corner.lat, r.min_corner.lon, r.max_corner.lat, r.max_corner.lon
    );
    Ok(())
}

/// GeoJSON FeatureCollection with one LineString feature per route.
pub fn route_geojson(
    net: &RoadNetwork,
    from: GeoPoint,
    to: GeoPoint,
    engines: &[EngineKind],
    settings: &EngineSettings,
) -> CliResult<serde_json::Value> {
    for (p, which) in [(from, "--from"), (to, "--to")] {
        if !net.rect().contains(&p) {
            return Err(CliError::Data(format!(
                "{which} lies outside the network area"
            )));
        }
    }
    let s = net.snap_to_vertex(&from)?;
    let t = net.snap_to_vertex(&to)?;
    if s == t {
        return Err(CliError::Data(
            "both points snap to the same intersection".into(),
        ));
    }
    let forward = build_tree(net, s, Orientation::Forward)?;
    let backward = build_tree(net, t, Orientation::Backward)?;
    let mut features = Vec::new();
    for &kind in engines {
        let set = run_engine(kind, &forward, &backward, settings)?;
        for (rank, p) in set.routes.iter().enumerate() {
            let coords: Vec<[f64; 2]> = p.geometry(net).iter().map(|g| [g.lon, g.lat]).collect();
            features.push(json!({
                "type": "Feature",
                "geometry": {"type": "LineString", "coordinates": coords},
                "properties": {
                    "engine": kind.id(),
                    "rank": rank,
                    "travel_time": p.travel_time,
                    "length": p.length,
                },
            }));
        }
    }
    Ok(json!({"type": "FeatureCollection", "features": features}))
}

fn serve(config: Option<&Path>) -> CliResult {
    let cfg =
        ServiceConfig::load_from_process(config).map_err(|e| CliError::Usage(e.to_string()))?;
    let _ = tracing_subscriber::fmt().with_writer(io::stderr).try_init();
    let service = RouteService::from_config(&cfg).map_err(|e| CliError::Data(e.to_string()))?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime
        .block_on(altroute_service::http::serve(
            Arc::new(service),
            &cfg.listen,
            cfg.static_dir.as_deref(),
        ))
        .map_err(|e| CliError::Data(e.to_string()))
}

pub fn execute(cli: Cli) -> CliResult {
    match cli.command {
        Command::Extract { osm, rect, out } => extract(&osm, &rect, &out),
        Command::Synth {
            rows,
            cols,
            seed,
            out,
        } => synth(rows, cols, seed, &out),
        Command::Route {
            net,
            from,
            to,
            engine,
            engines,
        } => {
            let settings = engines.settings()?;
            let net = load_net(&net)?;
            let kinds = match engine {
                Some(k) => vec![k],
                None => EngineKind::ALL.to_vec(),
            };
            let doc = route_geojson(&net, from, to, &kinds, &settings)?;
            let mut out = io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, &doc)
                .map_err(|e| CliError::Data(e.to_string()))?;
            writeln!(out)?;
            Ok(())
        }
        Command::Eval(args) => eval::run(&args),
        Command::Stats(args) => stats::run(&args),
        Command::Serve { config } => serve(config.as_deref()),
    }
}

/// Parses `args`, runs the command and maps failures to exit codes
/// (0 success, 1 usage, 2 data).
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
