//! Via-node sweep: every vertex `u` defines the via-path `sp(s,u) ⧺ sp(u,t)`.
//! Via-paths are visited by increasing length and kept when they are
//! sufficiently dissimilar to every route kept so far.

use serde::{Deserialize, Serialize};

use super::{
    check_k, check_stretch, AlternativeSet, Diagnostics, EngineKind, DEFAULT_STRETCH_BOUND,
};
use crate::error::{Error, Result};
use crate::metrics::{dis_with, OverlapMode};
use crate::network::{RoadNetwork, VertexId};
use crate::path::Path;
use crate::search::{build_tree, check_tree_pair, path_from_trees, Orientation, ShortestPathTree};

pub const DEFAULT_THETA: f64 = 0.5;

/// Slack for the incremental overlap estimate, which sums edges in a
/// different order than the exact check.
const PREFILTER_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissimilarityConfig {
    pub k: usize,
    pub theta: f64,
    pub stretch_bound: f64,
    #[serde(default)]
    pub overlap: OverlapMode,
}

impl DissimilarityConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            theta: DEFAULT_THETA,
            stretch_bound: DEFAULT_STRETCH_BOUND,
            overlap: OverlapMode::Directed,
        }
    }
}

impl Default for DissimilarityConfig {
    fn default() -> Self {
        Self::new(3)
    }
}

/// Vertices whose via-path fits within `stretch_bound` times the fastest
/// travel time, ordered by via-path length then vertex id.
pub fn via_candidates(
    forward: &ShortestPathTree<'_>,
    backward: &ShortestPathTree<'_>,
    stretch_bound: f64,
) -> Vec<(VertexId, f64)> {
    let Some(fastest) = forward.dist(backward.root()) else {
        return Vec::new();
    };
    let budget = stretch_bound * fastest;
    let mut out: Vec<(VertexId, f64)> = forward
        .settle_order()
        .iter()
        .filter_map(|&u| {
            let via = forward.dist(u)? + backward.dist(u)?;
            (via <= budget).then_some((u, via))
        })
        .collect();
    out.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    out
}

/// Overlap of every tree path with one kept route, accumulated down both trees.
struct TreeOverlap {
    forward: Vec<f64>,
    backward: Vec<f64>,
    route_length: f64,
}

struct TreeLengths {
    forward: Vec<f64>,
    backward: Vec<f64>,
}

fn accumulate(tree: &ShortestPathTree<'_>, n: usize, weight: impl Fn(usize) -> f64) -> Vec<f64> {
    let net = tree.network();
    let mut acc = vec![0.0; n];
    for &v in tree.settle_order() {
        if let Some(e) = tree.parent_edge(v) {
            let edge = net.edge(e);
            let up = match tree.orientation() {
                Orientation::Forward => edge.from,
                Orientation::Backward => edge.to,
            };
            acc[v] = acc[up] + weight(e);
        }
    }
    acc
}

impl TreeOverlap {
    fn new(
        forward: &ShortestPathTree<'_>,
        backward: &ShortestPathTree<'_>,
        route: &Path,
        mode: OverlapMode,
    ) -> Self {
        let net = forward.network();
        let n = net.vertex_count();
        let mut on_route = vec![false; net.edge_count()];
        for e in &route.edges {
            on_route[e.id] = true;
            if mode == OverlapMode::Undirected {
                for twin in net.out_edges(e.to).filter(|x| x.to == e.from) {
                    on_route[twin.id] = true;
                }
            }
        }
        let weight = |e: usize| if on_route[e] { net.edge(e).length } else { 0.0 };
        Self {
            forward: accumulate(forward, n, weight),
            backward: accumulate(backward, n, weight),
            route_length: route.length,
        }
    }

    fn jaccard(&self, lengths: &TreeLengths, u: VertexId) -> f64 {
        let shared = self.forward[u] + self.backward[u];
        let union = lengths.forward[u] + lengths.backward[u] + self.route_length - shared;
        if union <= 0.0 {
            1.0
        } else {
            shared / union
        }
    }
}

pub fn dissimilar_routes(
    net: &RoadNetwork,
    s: VertexId,
    t: VertexId,
    cfg: &DissimilarityConfig,
) -> Result<AlternativeSet> {
    let forward = build_tree(net, s, Orientation::Forward)?;
    let backward = build_tree(net, t, Orientation::Backward)?;
    dissimilar_routes_with_trees(&forward, &backward, cfg)
}

/// Runs the engine on trees the caller already built (forward at `s`,
/// backward at `t`).
pub fn dissimilar_routes_with_trees(
    forward: &ShortestPathTree<'_>,
    backward: &ShortestPathTree<'_>,
    cfg: &DissimilarityConfig,
) -> Result<AlternativeSet> {
    check_k(cfg.k)?;
    check_stretch(cfg.stretch_bound)?;
    if !(0.0..=1.0).contains(&cfg.theta) {
        return Err(Error::InvalidInput(format!(
            "dissimilarity threshold must lie in [0, 1], got {}",
            cfg.theta
        )));
    }
    check_tree_pair(forward, backward)?;
    let (s, t) = (forward.root(), backward.root());
    if !forward.is_reachable(t) {
        return Err(Error::NoRoute {
            source_vertex: s,
            target: t,
        });
    }

    let net = forward.network();
    let n = net.vertex_count();
    let fastest = forward.path(t)?;
    let limit = cfg.stretch_bound * fastest.travel_time;
    let lengths = TreeLengths {
        forward: accumulate(forward, n, |e| net.edge(e).length),
        backward: accumulate(backward, n, |e| net.edge(e).length),
    };
    let mut overlaps = vec![TreeOverlap::new(forward, backward, &fastest, cfg.overlap)];
    let mut routes = vec![fastest];
    let mut diagnostics = Diagnostics::default();

    for (u, _) in via_candidates(forward, backward, cfg.stretch_bound) {
        if routes.len() >= cfg.k {
            break;
        }
        diagnostics.iterations += 1;
        let estimate = overlaps
            .iter()
            .map(|o| o.jaccard(&lengths, u))
            .fold(0.0, f64::max);
        if 1.0 - estimate <= cfg.theta - PREFILTER_SLACK {
            diagnostics.rejected += 1;
            continue;
        }
        let candidate = path_from_trees(forward, backward, u)?;
        let accepted = candidate.simple
            && candidate.path.travel_time <= limit
            && !routes.iter().any(|r| r.same_edges(&candidate.path))
            && dis_with(&candidate.path, &routes, cfg.overlap) > cfg.theta;
        if accepted {
            overlaps.push(TreeOverlap::new(
                forward,
                backward,
                &candidate.path,
                cfg.overlap,
            ));
            routes.push(candidate.path);
        } else {
            diagnostics.rejected += 1;
        }
    }

    diagnostics.partial = routes.len() < cfg.k;
    Ok(AlternativeSet {
        engine: EngineKind::Dissimilarity,
        routes,
        diagnostics,
    })
}
