//! The immutable travel-time weighted road graph.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{BoundingRect, GeoPoint};

pub type VertexId = usize;
pub type EdgeId = usize;

/// Multiplier applied to the free-flow travel time of every non-motorway segment
/// to account for intersections, signals and turns.
pub const NON_MOTORWAY_SLOWDOWN: f64 = 1.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoadClass {
    Motorway,
    Other,
}

impl RoadClass {
    /// Maps an OSM `highway=*` value. Only motorway tags count as freeway.
    pub fn from_highway(tag: &str) -> Self {
        match tag {
            "motorway" | "motorway_link" => RoadClass::Motorway,
            _ => RoadClass::Other,
        }
    }

    fn multiplier(self) -> f64 {
        match self {
            RoadClass::Motorway => 1.0,
            RoadClass::Other => NON_MOTORWAY_SLOWDOWN,
        }
    }
}

/// Seconds needed to traverse `length_m` meters at `max_speed_kmh`, slowed
/// down by [`NON_MOTORWAY_SLOWDOWN`] unless the road is a motorway.
pub fn edge_travel_time(length_m: f64, max_speed_kmh: f64, class: RoadClass) -> Result<f64> {
    if !(length_m > 0.0 && length_m.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "edge length must be positive, got {length_m}"
        )));
    }
    if !(max_speed_kmh > 0.0 && max_speed_kmh.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "maximum speed must be positive, got {max_speed_kmh}"
        )));
    }
    Ok(length_m * 3.6 / max_speed_kmh * class.multiplier())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: EdgeId,
    pub from: VertexId,
    pub to: VertexId,
    /// Meters.
    pub length: f64,
    /// km/h.
    pub max_speed: f64,
    pub road_class: RoadClass,
    /// Seconds.
    pub travel_time: f64,
}

impl Edge {
    /// Deterministic tie-break key used by every search.
    #[inline]
    pub fn key(&self) -> (VertexId, VertexId, EdgeId) {
        (self.from, self.to, self.id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadNetwork {
    vertices: Vec<GeoPoint>,
    osm_ids: Vec<i64>,
    edges: Vec<Edge>,
    out_edges: Vec<Vec<EdgeId>>,
    in_edges: Vec<Vec<EdgeId>>,
    rect: BoundingRect,
}

impl RoadNetwork {
    /// Assembles a network from raw parts, checking every structural invariant.
    pub fn from_parts(
        vertices: Vec<GeoPoint>,
        osm_ids: Vec<i64>,
        edges: Vec<Edge>,
        rect: BoundingRect,
    ) -> Result<Self> {
        if osm_ids.len() != vertices.len() {
            return Err(Error::InvalidInput("one OSM id per vertex required".into()));
        }
        if let Some(p) = vertices.iter().find(|p| !rect.contains(p)) {
            return Err(Error::InvalidInput(format!(
                "vertex ({}, {}) lies outside the network rectangle",
                p.lat, p.lon
            )));
        }
        let n = vertices.len();
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            if e.id != i {
                return Err(Error::InvalidInput(format!("edge {i} carries id {}", e.id)));
            }
            if e.from >= n || e.to >= n {
                return Err(Error::InvalidInput(format!(
                    "edge {i} references a missing vertex ({} -> {})",
                    e.from, e.to
                )));
            }
            let expected = edge_travel_time(e.length, e.max_speed, e.road_class)?;
            if expected.to_bits() != e.travel_time.to_bits() {
                return Err(Error::InvalidInput(format!(
                    "edge {i} travel time {} does not match {expected}",
                    e.travel_time
                )));
            }
            out_edges[e.from].push(i);
            in_edges[e.to].push(i);
        }
        Ok(Self {
            vertices,
            osm_ids,
            edges,
            out_edges,
            in_edges,
            rect,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn rect(&self) -> &BoundingRect {
        &self.rect
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        v < self.vertices.len()
    }

    pub fn point(&self, v: VertexId) -> GeoPoint {
        self.vertices[v]
    }

    pub fn points(&self) -> &[GeoPoint] {
        &self.vertices
    }

    pub fn osm_id(&self, v: VertexId) -> i64 {
        self.osm_ids[v]
    }

    pub fn osm_ids(&self) -> &[i64] {
        &self.osm_ids
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn out_edges(&self, v: VertexId) -> impl Iterator<Item = &Edge> + '_ {
        self.out_edges[v].iter().map(move |&e| &self.edges[e])
    }

    pub fn in_edges(&self, v: VertexId) -> impl Iterator<Item = &Edge> + '_ {
        self.in_edges[v].iter().map(move |&e| &self.edges[e])
    }

    pub fn out_edge_ids(&self, v: VertexId) -> &[EdgeId] {
        &self.out_edges[v]
    }

    pub fn in_edge_ids(&self, v: VertexId) -> &[EdgeId] {
        &self.in_edges[v]
    }

    /// Edge weights as a flat slice indexed by edge id.
    pub fn travel_times(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.travel_time).collect()
    }

    /// Nearest vertex by great-circle distance, smallest id on ties.
    pub fn snap_to_vertex(&self, p: &GeoPoint) -> Result<VertexId> {
        let mut best: Option<(f64, VertexId)> = None;
        for (v, q) in self.vertices.iter().enumerate() {
            let d = p.distance_m(q);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, v));
            }
        }
        best.map(|(_, v)| v).ok_or(Error::EmptyNetwork)
    }
}

/// Incremental construction helper, mostly for fixtures and tests.
#[derive(Debug, Default)]
pub struct NetworkBuilder {
    vertices: Vec<GeoPoint>,
    osm_ids: Vec<i64>,
    edges: Vec<Edge>,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, p: GeoPoint) -> VertexId {
        let id = self.vertices.len();
        self.vertices.push(p);
        self.osm_ids.push(id as i64);
        id
    }

    pub fn add_vertex_with_osm_id(&mut self, p: GeoPoint, osm_id: i64) -> VertexId {
        let id = self.add_vertex(p);
        self.osm_ids[id] = osm_id;
        id
    }

    pub fn add_edge(
        &mut self,
        from: VertexId,
        to: VertexId,
        length: f64,
        max_speed: f64,
        road_class: RoadClass,
    ) -> Result<EdgeId> {
        let travel_time = edge_travel_time(length, max_speed, road_class)?;
        let id = self.edges.len();
        self.edges.push(Edge {
            id,
            from,
            to,
            length,
            max_speed,
            road_class,
            travel_time,
        });
        Ok(id)
    }

    /// Adds a motorway-class edge whose travel time equals `seconds`, using
    /// `length` meters. Handy for hand-built test graphs.
    pub fn add_timed_edge(
        &mut self,
        from: VertexId,
        to: VertexId,
        seconds: f64,
        length: f64,
    ) -> Result<EdgeId> {
        self.add_edge(
            from,
            to,
            length,
            length * 3.6 / seconds,
            RoadClass::Motorway,
        )
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn build(self, rect: BoundingRect) -> Result<RoadNetwork> {
        RoadNetwork::from_parts(self.vertices, self.osm_ids, self.edges, rect)
    }

    /// Builds with the smallest rectangle covering all vertices.
    pub fn build_tight(self) -> Result<RoadNetwork> {
        let rect = if self.vertices.is_empty() {
            BoundingRect::world()
        } else {
            let fold = |f: fn(f64, f64) -> f64, g: fn(&GeoPoint) -> f64, init: f64| {
                self.vertices.iter().map(g).fold(init, f)
            };
            BoundingRect {
                min_corner: GeoPoint {
                    lat: fold(f64::min, |p| p.lat, f64::INFINITY),
                    lon: fold(f64::min, |p| p.lon, f64::INFINITY),
                },
                max_corner: GeoPoint {
                    lat: fold(f64::max, |p| p.lat, f64::NEG_INFINITY),
                    lon: fold(f64::max, |p| p.lon, f64::NEG_INFINITY),
                },
            }
        };
        self.build(rect)
    }
}
