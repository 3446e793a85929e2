use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::GeoPoint;
use crate::network::{Edge, EdgeId, RoadNetwork, VertexId};

/// A contiguous edge sequence from `source` to `target`.
///
/// Edges are stored by value so overlap arithmetic does not need the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub source: VertexId,
    pub target: VertexId,
    pub edges: Vec<Edge>,
    /// Seconds, summed in edge order.
    pub travel_time: f64,
    /// Meters, summed in edge order.
    pub length: f64,
}

impl Path {
    /// The zero-edge path at `v`.
    pub fn empty(v: VertexId) -> Self {
        Self {
            source: v,
            target: v,
            edges: Vec::new(),
            travel_time: 0.0,
            length: 0.0,
        }
    }

    /// Builds a path from contiguous edges. `edges` must not be empty.
    pub fn from_edges(edges: Vec<Edge>) -> Result<Self> {
        let first = edges
            .first()
            .ok_or_else(|| Error::InvalidInput("use Path::empty for zero-edge paths".into()))?;
        if let Some(w) = edges.windows(2).find(|w| w[0].to != w[1].from) {
            return Err(Error::InvalidInput(format!(
                "edges {} and {} are not contiguous",
                w[0].id, w[1].id
            )));
        }
        let source = first.from;
        let target = edges[edges.len() - 1].to;
        let (travel_time, length) = sums(&edges);
        Ok(Self {
            source,
            target,
            edges,
            travel_time,
            length,
        })
    }

    /// Resolves edge ids against `net`.
    pub fn from_edge_ids(net: &RoadNetwork, source: VertexId, ids: &[EdgeId]) -> Result<Self> {
        if ids.is_empty() {
            return Ok(Self::empty(source));
        }
        Self::from_edges(ids.iter().map(|&e| *net.edge(e)).collect())
    }

    pub fn edge_ids(&self) -> Vec<EdgeId> {
        self.edges.iter().map(|e| e.id).collect()
    }

    pub fn same_edges(&self, other: &Path) -> bool {
        self.edges.len() == other.edges.len()
            && self
                .edges
                .iter()
                .zip(&other.edges)
                .all(|(a, b)| a.id == b.id)
    }

    /// Vertex sequence from source to target.
    pub fn vertices(&self) -> Vec<VertexId> {
        let mut vs = Vec::with_capacity(self.edges.len() + 1);
        vs.push(self.source);
        vs.extend(self.edges.iter().map(|e| e.to));
        vs
    }

    pub fn is_simple(&self) -> bool {
        let mut seen = HashSet::with_capacity(self.edges.len() + 1);
        self.vertices().into_iter().all(|v| seen.insert(v))
    }

    pub fn geometry(&self, net: &RoadNetwork) -> Vec<GeoPoint> {
        self.vertices().into_iter().map(|v| net.point(v)).collect()
    }

    /// Travel time recomputed from the network's own (unpenalised) weights.
    pub fn network_travel_time(&self, net: &RoadNetwork) -> f64 {
        self.edges.iter().map(|e| net.edge(e.id).travel_time).sum()
    }
}

pub(crate) fn sums(edges: &[Edge]) -> (f64, f64) {
    edges
        .iter()
        .fold((0.0, 0.0), |(t, l), e| (t + e.travel_time, l + e.length))
}
