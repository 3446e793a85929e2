//! Alternatives from plateaus: maximal chains of edges that belong to both the
//! forward shortest-path tree of the source and the backward tree of the target.

use serde::{Deserialize, Serialize};

use super::{
    check_k, check_stretch, AlternativeSet, Diagnostics, EngineKind, DEFAULT_STRETCH_BOUND,
};
use crate::error::{Error, Result};
use crate::network::{EdgeId, RoadNetwork, VertexId};
use crate::path::Path;
use crate::search::{build_tree, check_tree_pair, path_from_trees, Orientation, ShortestPathTree};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateauConfig {
    pub k: usize,
    pub stretch_bound: f64,
}

impl PlateauConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            stretch_bound: DEFAULT_STRETCH_BOUND,
        }
    }
}

impl Default for PlateauConfig {
    fn default() -> Self {
        Self::new(3)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    /// `u ... v`, `u` nearer the source.
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
    /// Seconds.
    pub plateau_length: f64,
}

impl Plateau {
    pub fn first(&self) -> VertexId {
        self.vertices[0]
    }

    pub fn last(&self) -> VertexId {
        self.vertices[self.vertices.len() - 1]
    }
}

/// All maximal plateaus, longest first (ties by first vertex id).
pub fn find_plateaus(
    forward: &ShortestPathTree<'_>,
    backward: &ShortestPathTree<'_>,
) -> Result<Vec<Plateau>> {
    find_plateaus_counted(forward, backward).map(|(p, _)| p)
}

/// Like [`find_plateaus`], also returning the number of elementary steps the
/// join took (one per settled vertex per pass plus one per chain edge).
pub fn find_plateaus_counted(
    forward: &ShortestPathTree<'_>,
    backward: &ShortestPathTree<'_>,
) -> Result<(Vec<Plateau>, u64)> {
    check_tree_pair(forward, backward)?;
    let net = forward.network();
    let n = net.vertex_count();
    let mut next: Vec<Option<EdgeId>> = vec![None; n];
    let mut has_incoming = vec![false; n];
    let mut ops = 0u64;

    for &y in forward.settle_order() {
        ops += 1;
        if let Some(e) = forward.parent_edge(y) {
            let x = net.edge(e).from;
            if backward.parent_edge(x) == Some(e) {
                next[x] = Some(e);
                has_incoming[y] = true;
            }
        }
    }

    let mut plateaus = Vec::new();
    for &x in forward.settle_order() {
        ops += 1;
        if next[x].is_none() || has_incoming[x] {
            continue;
        }
        let mut vertices = vec![x];
        let mut edges = Vec::new();
        let mut plateau_length = 0.0;
        let mut cur = x;
        while let Some(e) = next[cur] {
            ops += 1;
            let edge = net.edge(e);
            edges.push(e);
            plateau_length += edge.travel_time;
            cur = edge.to;
            vertices.push(cur);
        }
        plateaus.push(Plateau {
            vertices,
            edges,
            plateau_length,
        });
    }

    plateaus.sort_by(|a, b| {
        b.plateau_length
            .total_cmp(&a.plateau_length)
            .then_with(|| a.first().cmp(&b.first()))
    });
    Ok((plateaus, ops))
}

pub fn plateau_routes(
    net: &RoadNetwork,
    s: VertexId,
    t: VertexId,
    cfg: &PlateauConfig,
) -> Result<AlternativeSet> {
    let forward = build_tree(net, s, Orientation::Forward)?;
    let backward = build_tree(net, t, Orientation::Backward)?;
    plateau_routes_with_trees(&forward, &backward, cfg)
}

/// Runs the engine on trees the caller already built (forward at `s`,
/// backward at `t`).
pub fn plateau_routes_with_trees(
    forward: &ShortestPathTree<'_>,
    backward: &ShortestPathTree<'_>,
    cfg: &PlateauConfig,
) -> Result<AlternativeSet> {
    check_k(cfg.k)?;
    check_stretch(cfg.stretch_bound)?;
    check_tree_pair(forward, backward)?;
    let (s, t) = (forward.root(), backward.root());
    if !forward.is_reachable(t) {
        return Err(Error::NoRoute {
            source_vertex: s,
            target: t,
        });
    }
    let (plateaus, ops) = find_plateaus_counted(forward, backward)?;
    let mut diagnostics = Diagnostics {
        join_operations: Some(ops),
        ..Diagnostics::default()
    };

    // The plateau running from s to t is the fastest route itself. When equal
    // cost ties make the two trees disagree it does not exist and the forward
    // tree's path stands in.
    let spanning = plateaus
        .iter()
        .position(|p| p.first() == s && p.last() == t);
    let fastest = forward.path(t)?;
    let first = match spanning {
        Some(i) => Path::from_edge_ids(forward.network(), s, &plateaus[i].edges)?,
        None => fastest,
    };
    let limit = cfg.stretch_bound * first.travel_time;
    let mut routes = vec![first];

    for (i, plateau) in plateaus.iter().enumerate() {
        if routes.len() >= cfg.k {
            break;
        }
        if Some(i) == spanning {
            continue;
        }
        diagnostics.iterations += 1;
        let candidate = path_from_trees(forward, backward, plateau.first())?;
        let acceptable = candidate.simple
            && candidate.path.travel_time <= limit
            && !routes.iter().any(|r| r.same_edges(&candidate.path));
        if acceptable {
            routes.push(candidate.path);
        } else {
            diagnostics.rejected += 1;
        }
    }

    diagnostics.partial = routes.len() < cfg.k;
    Ok(AlternativeSet {
        engine: EngineKind::Plateaus,
        routes,
        diagnostics,
    })
}
