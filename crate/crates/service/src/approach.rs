//! The route sources the service fans a query out to.

use std::collections::HashMap;
use std::fs;
use std::path::Path as FsPath;

use altroute_core::engines::dissimilarity::{dissimilar_routes_with_trees, DissimilarityConfig};
use altroute_core::engines::penalty::{penalty_routes, PenaltyConfig};
use altroute_core::engines::plateaus::{plateau_routes_with_trees, PlateauConfig};
use altroute_core::metrics::OverlapMode;
use altroute_core::{shortest_path, Edge, GeoPoint, Path, RoadNetwork, ShortestPathTree, VertexId};
use serde::{Deserialize, Serialize};

use crate::config::EngineParams;
use crate::error::ServiceError;

/// Everything an approach may need for one query. The trees are built once
/// and shared.
pub struct QueryContext<'a> {
    pub net: &'a RoadNetwork,
    pub source: VertexId,
    pub target: VertexId,
    pub source_point: GeoPoint,
    pub target_point: GeoPoint,
    pub forward: ShortestPathTree<'a>,
    pub backward: ShortestPathTree<'a>,
    pub k: usize,
}

pub trait Approach: Send + Sync {
    /// Server-side identifier; never sent to participants.
    fn id(&self) -> &str;

    /// Up to `ctx.k` routes over the network, fastest first.
    fn routes(&self, ctx: &QueryContext<'_>) -> Result<Vec<Path>, String>;
}

pub struct PenaltyApproach {
    pub penalty_factor: f64,
}

impl Approach for PenaltyApproach {
    fn id(&self) -> &str {
        "penalty"
    }

    fn routes(&self, ctx: &QueryContext<'_>) -> Result<Vec<Path>, String> {
        let cfg = PenaltyConfig {
            penalty_factor: self.penalty_factor,
            ..PenaltyConfig::new(ctx.k)
        };
        penalty_routes(ctx.net, ctx.source, ctx.target, &cfg)
            .map(|set| set.routes)
            .map_err(|e| e.to_string())
    }
}

pub struct PlateauApproach {
    pub stretch_bound: f64,
}

impl Approach for PlateauApproach {
    fn id(&self) -> &str {
        "plateaus"
    }

    fn routes(&self, ctx: &QueryContext<'_>) -> Result<Vec<Path>, String> {
        let cfg = PlateauConfig {
            k: ctx.k,
            stretch_bound: self.stretch_bound,
        };
        plateau_routes_with_trees(&ctx.forward, &ctx.backward, &cfg)
            .map(|set| set.routes)
            .map_err(|e| e.to_string())
    }
}

pub struct DissimilarityApproach {
    pub theta: f64,
    pub stretch_bound: f64,
}

impl Approach for DissimilarityApproach {
    fn id(&self) -> &str {
        "dissimilarity"
    }

    fn routes(&self, ctx: &QueryContext<'_>) -> Result<Vec<Path>, String> {
        let cfg = DissimilarityConfig {
            k: ctx.k,
            theta: self.theta,
            stretch_bound: self.stretch_bound,
            overlap: OverlapMode::Directed,
        };
        dissimilar_routes_with_trees(&ctx.forward, &ctx.backward, &cfg)
            .map(|set| set.routes)
            .map_err(|e| e.to_string())
    }
}

/// The three network engines with the configured parameters.
pub fn builtin_approaches(params: &EngineParams) -> Vec<Box<dyn Approach>> {
    vec![
        Box::new(PlateauApproach {
            stretch_bound: params.stretch_bound,
        }),
        Box::new(DissimilarityApproach {
            theta: params.theta,
            stretch_bound: params.stretch_bound,
        }),
        Box::new(PenaltyApproach {
            penalty_factor: params.penalty_factor,
        }),
    ]
}

/// An external routing source that returns polylines.
pub trait ProviderAdapter: Send + Sync {
    fn name(&self) -> &str;
    fn available(&self) -> bool;
    fn fetch(
        &self,
        source: GeoPoint,
        target: GeoPoint,
        k: usize,
    ) -> Result<Vec<Vec<GeoPoint>>, String>;
}

/// Lays a polyline onto the network: every point snaps to its nearest
/// vertex and consecutive vertices are joined by fastest paths, so travel
/// times come from the network rather than the provider.
pub fn map_match(net: &RoadNetwork, polyline: &[GeoPoint]) -> Result<Path, String> {
    let mut vertices: Vec<VertexId> = Vec::with_capacity(polyline.len());
    for p in polyline {
        let v = net.snap_to_vertex(p).map_err(|e| e.to_string())?;
        if vertices.last() != Some(&v) {
            vertices.push(v);
        }
    }
    if vertices.len() < 2 {
        return Err("polyline collapses onto a single intersection".into());
    }
    let mut edges: Vec<Edge> = Vec::new();
    for pair in vertices.windows(2) {
        let leg = shortest_path(net, pair[0], pair[1]).map_err(|e| e.to_string())?;
        edges.extend(leg.edges);
    }
    Path::from_edges(edges).map_err(|e| e.to_string())
}

/// Wraps a provider so that its routes are network paths like everyone else's.
pub struct ProviderApproach {
    pub adapter: Box<dyn ProviderAdapter>,
}

impl Approach for ProviderApproach {
    fn id(&self) -> &str {
        "external"
    }

    fn routes(&self, ctx: &QueryContext<'_>) -> Result<Vec<Path>, String> {
        if !self.adapter.available() {
            return Err(format!("{} is unavailable", self.adapter.name()));
        }
        let lines = self
            .adapter
            .fetch(ctx.source_point, ctx.target_point, ctx.k)?;
        let mut routes: Vec<Path> = Vec::new();
        for line in lines.iter().take(ctx.k) {
            let p = map_match(ctx.net, line)?;
            if p.source != ctx.source || p.target != ctx.target {
                return Err("provider route does not join the snapped endpoints".into());
            }
            if !routes.iter().any(|r| r.same_edges(&p)) {
                routes.push(p);
            }
        }
        if routes.is_empty() {
            return Err("provider returned no routes".into());
        }
        Ok(routes)
    }
}

/// Canned provider answers, looked up by the grid cells of source and target.
///
/// Fixture file:
///
/// ```json
/// {
///   "cell_size": 0.005,
///   "entries": [
///     {"source": {"lat": 0, "lon": 0}, "target": {"lat": 0, "lon": 0},
///      "routes": [[{"lat": 0, "lon": 0}, {"lat": 0, "lon": 0}]]}
///   ]
/// }
/// ```
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplayFixtures {
    /// Cell edge in degrees.
    pub cell_size: f64,
    pub entries: Vec<ReplayEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplayEntry {
    pub source: GeoPoint,
    pub target: GeoPoint,
    pub routes: Vec<Vec<GeoPoint>>,
}

type CellKey = (i64, i64, i64, i64);

pub struct ReplayProvider {
    cell_size: f64,
    table: HashMap<CellKey, Vec<Vec<GeoPoint>>>,
}

impl ReplayProvider {
    pub fn new(fixtures: ReplayFixtures) -> Result<Self, ServiceError> {
        if !(fixtures.cell_size > 0.0) {
            return Err(ServiceError::Config(
                "replay cell_size must be positive".into(),
            ));
        }
        let mut provider = Self {
            cell_size: fixtures.cell_size,
            table: HashMap::new(),
        };
        for e in fixtures.entries {
            let key = provider.key(e.source, e.target);
            provider.table.insert(key, e.routes);
        }
        Ok(provider)
    }

    pub fn load(path: &FsPath) -> Result<Self, ServiceError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        let fixtures: ReplayFixtures = serde_json::from_str(&text)
            .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        Self::new(fixtures)
    }

    fn key(&self, s: GeoPoint, t: GeoPoint) -> CellKey {
        let cell = |x: f64| (x / self.cell_size).floor() as i64;
        (cell(s.lat), cell(s.lon), cell(t.lat), cell(t.lon))
    }
}

impl ProviderAdapter for ReplayProvider {
    fn name(&self) -> &str {
        "replay"
    }

    fn available(&self) -> bool {
        true
    }

    fn fetch(
        &self,
        source: GeoPoint,
        target: GeoPoint,
        k: usize,
    ) -> Result<Vec<Vec<GeoPoint>>, String> {
        self.table
            .get(&self.key(source, target))
            .map(|routes| routes.iter().take(k).cloned().collect())
            .ok_or_else(|| "no recorded answer for this query".into())
    }
}
