//! Single-source Dijkstra trees in both orientations, point-to-point queries
//! and via-path concatenation.
//!
//! Every search is deterministic: the queue pops by `(distance, vertex id)`
//! and among equally short parent edges the one with the smallest
//! `(from, to, edge id)` key wins.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Edge, EdgeId, RoadNetwork, VertexId};
use crate::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    /// Distances from the root along out-edges.
    Forward,
    /// Distances to the root along in-edges.
    Backward,
}

/// Distance and parent-edge labelling rooted at one vertex.
///
/// For a backward tree the parent edge of `v` is the first edge of the
/// shortest path from `v` to the root.
#[derive(Debug, Clone)]
pub struct ShortestPathTree<'a> {
    net: &'a RoadNetwork,
    root: VertexId,
    orientation: Orientation,
    dist: Vec<f64>,
    parent: Vec<Option<EdgeId>>,
    settled: Vec<VertexId>,
}

impl<'a> ShortestPathTree<'a> {
    pub fn network(&self) -> &'a RoadNetwork {
        self.net
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn dist(&self, v: VertexId) -> Option<f64> {
        self.dist.get(v).copied().filter(|d| d.is_finite())
    }

    pub fn is_reachable(&self, v: VertexId) -> bool {
        self.dist(v).is_some()
    }

    pub fn parent_edge(&self, v: VertexId) -> Option<EdgeId> {
        self.parent.get(v).copied().flatten()
    }

    /// Reachable vertices in the order they were settled (non-decreasing distance).
    pub fn settle_order(&self) -> &[VertexId] {
        &self.settled
    }

    /// Parent edge ids walking from `v` towards the root.
    fn chain(&self, v: VertexId) -> Vec<EdgeId> {
        let mut out = Vec::new();
        let mut cur = v;
        while let Some(e) = self.parent_edge(cur) {
            out.push(e);
            let edge = self.net.edge(e);
            cur = match self.orientation {
                Orientation::Forward => edge.from,
                Orientation::Backward => edge.to,
            };
        }
        out
    }

    /// Tree path between the root and `v`, in travel direction: root to `v`
    /// for forward trees, `v` to root for backward trees.
    pub fn path(&self, v: VertexId) -> Result<Path> {
        if !self.is_reachable(v) {
            return Err(match self.orientation {
                Orientation::Forward => Error::NoRoute {
                    source_vertex: self.root,
                    target: v,
                },
                Orientation::Backward => Error::NoRoute {
                    source_vertex: v,
                    target: self.root,
                },
            });
        }
        let mut ids = self.chain(v);
        if self.orientation == Orientation::Forward {
            ids.reverse();
        }
        let start = match self.orientation {
            Orientation::Forward => self.root,
            Orientation::Backward => v,
        };
        Path::from_edge_ids(self.net, start, &ids)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct QueueEntry {
    dist: f64,
    vertex: VertexId,
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn search<'a>(
    net: &'a RoadNetwork,
    root: VertexId,
    orientation: Orientation,
    weights: &[f64],
    stop_at: Option<VertexId>,
) -> Result<ShortestPathTree<'a>> {
    if !net.contains_vertex(root) {
        return Err(Error::UnknownVertex(root));
    }
    debug_assert_eq!(weights.len(), net.edge_count());
    let n = net.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent: Vec<Option<EdgeId>> = vec![None; n];
    let mut done = vec![false; n];
    let mut settled = Vec::new();
    let mut heap = BinaryHeap::new();
    dist[root] = 0.0;
    heap.push(QueueEntry {
        dist: 0.0,
        vertex: root,
    });

    while let Some(QueueEntry { dist: d, vertex: u }) = heap.pop() {
        if done[u] || d > dist[u] {
            continue;
        }
        done[u] = true;
        settled.push(u);
        if stop_at == Some(u) {
            break;
        }
        let adjacent = match orientation {
            Orientation::Forward => net.out_edge_ids(u),
            Orientation::Backward => net.in_edge_ids(u),
        };
        for &eid in adjacent {
            let edge: &Edge = net.edge(eid);
            let v = match orientation {
                Orientation::Forward => edge.to,
                Orientation::Backward => edge.from,
            };
            if done[v] {
                continue;
            }
            let nd = d + weights[eid];
            if nd < dist[v] {
                dist[v] = nd;
                parent[v] = Some(eid);
                heap.push(QueueEntry {
                    dist: nd,
                    vertex: v,
                });
            } else if nd == dist[v] {
                let better = parent[v].is_none_or(|p| edge.key() < net.edge(p).key());
                if better {
                    parent[v] = Some(eid);
                }
            }
        }
    }

    Ok(ShortestPathTree {
        net,
        root,
        orientation,
        dist,
        parent,
        settled,
    })
}

/// Full shortest-path tree over the network's travel times.
pub fn build_tree(
    net: &RoadNetwork,
    root: VertexId,
    orientation: Orientation,
) -> Result<ShortestPathTree<'_>> {
    search(net, root, orientation, &net.travel_times(), None)
}

/// Full shortest-path tree over caller-supplied weights (indexed by edge id).
pub fn build_tree_with_weights<'a>(
    net: &'a RoadNetwork,
    root: VertexId,
    orientation: Orientation,
    weights: &[f64],
) -> Result<ShortestPathTree<'a>> {
    check_weights(net, weights)?;
    search(net, root, orientation, weights, None)
}

fn check_weights(net: &RoadNetwork, weights: &[f64]) -> Result<()> {
    if weights.len() != net.edge_count() {
        return Err(Error::InvalidInput(format!(
            "{} weights supplied for {} edges",
            weights.len(),
            net.edge_count()
        )));
    }
    if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidInput("edge weights must be positive".into()));
    }
    Ok(())
}

/// Fastest path from `s` to `t`.
pub fn shortest_path(net: &RoadNetwork, s: VertexId, t: VertexId) -> Result<Path> {
    shortest_path_with_weights(net, s, t, &net.travel_times())
}

/// Cheapest path under `weights`; the returned path still carries the
/// network's own travel times and lengths.
pub fn shortest_path_with_weights(
    net: &RoadNetwork,
    s: VertexId,
    t: VertexId,
    weights: &[f64],
) -> Result<Path> {
    if !net.contains_vertex(t) {
        return Err(Error::UnknownVertex(t));
    }
    check_weights(net, weights)?;
    let tree = search(net, s, Orientation::Forward, weights, Some(t))?;
    tree.path(t)
}

/// `sp(s, u)` followed by `sp(u, t)`, read off a forward tree at `s` and a
/// backward tree at `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ViaPath {
    pub via: VertexId,
    pub path: Path,
    /// False when the two halves share a vertex other than `via`.
    pub simple: bool,
}

pub fn path_from_trees(
    forward: &ShortestPathTree<'_>,
    backward: &ShortestPathTree<'_>,
    via: VertexId,
) -> Result<ViaPath> {
    check_tree_pair(forward, backward)?;
    if !forward.is_reachable(via) || !backward.is_reachable(via) {
        return Err(Error::NotInTrees(via));
    }
    let mut ids = forward.chain(via);
    ids.reverse();
    ids.extend(backward.chain(via));
    let path = Path::from_edge_ids(forward.net, forward.root, &ids)?;
    let simple = path.is_simple();
    Ok(ViaPath { via, path, simple })
}

pub(crate) fn check_tree_pair(
    forward: &ShortestPathTree<'_>,
    backward: &ShortestPathTree<'_>,
) -> Result<()> {
    if forward.orientation != Orientation::Forward || backward.orientation != Orientation::Backward
    {
        return Err(Error::TreeMismatch(
            "expected a forward tree and a backward tree".into(),
        ));
    }
    if !std::ptr::eq(forward.net, backward.net) {
        return Err(Error::TreeMismatch(
            "trees were built on different networks".into(),
        ));
    }
    Ok(())
}
