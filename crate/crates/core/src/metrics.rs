//! Route overlap arithmetic.
//!
//! Overlap and union are measured in meters with set semantics: an edge that
//! appears in both routes counts once. The Jaccard ratio of two routes is
//! `|X ∩ Y| / |X ∪ Y|` and the similarity of a route set is the largest
//! pairwise ratio.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Edge, RoadNetwork, VertexId};
use crate::path::Path;

/// How edges are identified when comparing routes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OverlapMode {
    /// A directed edge and its reverse twin are different edges.
    #[default]
    Directed,
    /// An edge and any edge between the same two vertices in the opposite
    /// direction are the same road.
    Undirected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum EdgeKey {
    Id(usize),
    Pair(VertexId, VertexId),
}

fn key(e: &Edge, mode: OverlapMode) -> EdgeKey {
    match mode {
        OverlapMode::Directed => EdgeKey::Id(e.id),
        OverlapMode::Undirected => EdgeKey::Pair(e.from.min(e.to), e.from.max(e.to)),
    }
}

fn edge_set(p: &Path, mode: OverlapMode) -> BTreeMap<EdgeKey, f64> {
    let mut set = BTreeMap::new();
    for e in &p.edges {
        set.entry(key(e, mode)).or_insert(e.length);
    }
    set
}

/// (shared, only in x, only in y), each summed in key order.
fn partition(x: &Path, y: &Path, mode: OverlapMode) -> (f64, f64, f64) {
    let xs = edge_set(x, mode);
    let ys = edge_set(y, mode);
    let mut shared = 0.0;
    let mut only_x = 0.0;
    for (k, lx) in &xs {
        match ys.get(k) {
            Some(ly) => shared += (lx + ly) / 2.0,
            None => only_x += lx,
        }
    }
    let only_y = ys
        .iter()
        .filter(|(k, _)| !xs.contains_key(k))
        .map(|(_, l)| l)
        .sum();
    (shared, only_x, only_y)
}

/// Total length of the edges the two routes have in common.
pub fn overlap_length(x: &Path, y: &Path) -> f64 {
    overlap_length_with(x, y, OverlapMode::Directed)
}

pub fn overlap_length_with(x: &Path, y: &Path, mode: OverlapMode) -> f64 {
    partition(x, y, mode).0
}

/// Length-weighted Jaccard ratio; 1 for two empty routes.
pub fn jaccard(x: &Path, y: &Path) -> f64 {
    jaccard_with(x, y, OverlapMode::Directed)
}

pub fn jaccard_with(x: &Path, y: &Path, mode: OverlapMode) -> f64 {
    let (shared, only_x, only_y) = partition(x, y, mode);
    // grouped so that swapping x and y gives bit-identical results
    let union = shared + (only_x + only_y);
    if union == 0.0 {
        return 1.0;
    }
    shared / union
}

/// `1 - max_q jaccard(p, q)`; 1 when `kept` is empty.
pub fn dis(p: &Path, kept: &[Path]) -> f64 {
    dis_with(p, kept, OverlapMode::Directed)
}

pub fn dis_with(p: &Path, kept: &[Path], mode: OverlapMode) -> f64 {
    1.0 - kept
        .iter()
        .map(|q| jaccard_with(p, q, mode))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub sim: f64,
    pub argmax_pair: (usize, usize),
    /// Symmetric, unit diagonal.
    pub pairwise: Vec<Vec<f64>>,
}

pub fn set_similarity(routes: &[Path]) -> Result<SimilarityReport> {
    set_similarity_with(routes, OverlapMode::Directed)
}

pub fn set_similarity_with(routes: &[Path], mode: OverlapMode) -> Result<SimilarityReport> {
    let n = routes.len();
    if n < 2 {
        return Err(Error::UndefinedSimilarity(n));
    }
    let mut pairwise = vec![vec![1.0; n]; n];
    let mut best = (f64::NEG_INFINITY, (0, 1));
    for i in 0..n {
        for j in i + 1..n {
            let v = jaccard_with(&routes[i], &routes[j], mode);
            pairwise[i][j] = v;
            pairwise[j][i] = v;
            if v > best.0 {
                best = (v, (i, j));
            }
        }
    }
    Ok(SimilarityReport {
        sim: best.0,
        argmax_pair: best.1,
        pairwise,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    NotContiguous { index: usize },
    UnknownEdge { id: usize },
    EdgeMismatch { id: usize },
    EndpointMismatch,
    RepeatedVertex { vertex: VertexId },
    TravelTimeMismatch { cached: f64, recomputed: f64 },
    LengthMismatch { cached: f64, recomputed: f64 },
}

const SUM_TOLERANCE: f64 = 1e-6;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= SUM_TOLERANCE * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Checks a route against the network it claims to run on.
pub fn validate_route(p: &Path, net: &RoadNetwork) -> std::result::Result<(), Vec<Violation>> {
    let mut problems = Vec::new();
    for (i, w) in p.edges.windows(2).enumerate() {
        if w[0].to != w[1].from {
            problems.push(Violation::NotContiguous { index: i + 1 });
        }
    }
    for e in &p.edges {
        if e.id >= net.edge_count() {
            problems.push(Violation::UnknownEdge { id: e.id });
        } else if net.edge(e.id) != e {
            problems.push(Violation::EdgeMismatch { id: e.id });
        }
    }
    let starts_ok = p.edges.first().is_none_or(|e| e.from == p.source);
    let ends_ok = p
        .edges
        .last()
        .map_or(p.source == p.target, |e| e.to == p.target);
    if !starts_ok || !ends_ok {
        problems.push(Violation::EndpointMismatch);
    }
    let mut seen = HashSet::new();
    for v in p.vertices() {
        if !seen.insert(v) {
            problems.push(Violation::RepeatedVertex { vertex: v });
        }
    }
    let recomputed_time: f64 = p
        .edges
        .iter()
        .filter(|e| e.id < net.edge_count())
        .map(|e| net.edge(e.id).travel_time)
        .sum();
    let recomputed_len: f64 = p
        .edges
        .iter()
        .filter(|e| e.id < net.edge_count())
        .map(|e| net.edge(e.id).length)
        .sum();
    if !close(p.travel_time, recomputed_time) {
        problems.push(Violation::TravelTimeMismatch {
            cached: p.travel_time,
            recomputed: recomputed_time,
        });
    }
    if !close(p.length, recomputed_len) {
        problems.push(Violation::LengthMismatch {
            cached: p.length,
            recomputed: recomputed_len,
        });
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(problems)
    }
}
