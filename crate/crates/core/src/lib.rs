//! Alternative route planning on road networks.
//!
//! The crate ingests OSM extracts into a travel-time weighted graph, builds
//! shortest-path trees, and offers three alternative-route engines:
//!
//! * [`engines::penalty`] repeatedly searches while inflating the weights of
//!   edges already used,
//! * [`engines::plateaus`] joins the forward and backward trees and turns the
//!   longest shared chains into routes,
//! * [`engines::dissimilarity`] sweeps via-nodes by path length and keeps
//!   routes that overlap little with those already chosen.
//!
//! [`metrics`] measures how much a set of routes overlaps and [`study`]
//! analyses participant ratings of the engines.

pub mod engines;
pub mod error;
pub mod fixtures;
pub mod geo;
pub mod metrics;
pub mod netfile;
pub mod network;
pub mod osm;
pub mod path;
pub mod search;
pub mod study;
pub mod synth;

pub use engines::{AlternativeSet, Diagnostics, EngineKind};
pub use error::{Error, Result};
pub use geo::{BoundingRect, GeoPoint};
pub use network::{edge_travel_time, Edge, EdgeId, RoadClass, RoadNetwork, VertexId};
pub use path::Path;
pub use search::{build_tree, path_from_trees, shortest_path, Orientation, ShortestPathTree};
