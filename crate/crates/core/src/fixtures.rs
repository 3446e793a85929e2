//! Small hand-built networks shared by unit tests, integration tests and the service.

use crate::geo::GeoPoint;
use crate::network::{EdgeId, NetworkBuilder, RoadNetwork, VertexId};

/// Four vertices, five one-way edges:
///
/// ```text
///   s -> a (2)   a -> t (2)
///   s -> b (3)   b -> t (2)
///   a -> b (1)
/// ```
///
/// Weights are multiplied by `scale` seconds; each edge is `100 m` per weight unit.
#[derive(Debug, Clone)]
pub struct Diamond {
    pub net: RoadNetwork,
    pub s: VertexId,
    pub a: VertexId,
    pub b: VertexId,
    pub t: VertexId,
    pub sa: EdgeId,
    pub at: EdgeId,
    pub sb: EdgeId,
    pub bt: EdgeId,
    pub ab: EdgeId,
}

pub fn diamond(scale: f64) -> Diamond {
    let mut nb = NetworkBuilder::new();
    let s = nb.add_vertex(GeoPoint {
        lat: -37.80,
        lon: 144.90,
    });
    let a = nb.add_vertex(GeoPoint {
        lat: -37.79,
        lon: 144.91,
    });
    let b = nb.add_vertex(GeoPoint {
        lat: -37.81,
        lon: 144.91,
    });
    let t = nb.add_vertex(GeoPoint {
        lat: -37.80,
        lon: 144.92,
    });
    let mut edge = |from, to, w: f64| {
        nb.add_timed_edge(from, to, w * scale, w * 100.0)
            .expect("positive fixture weights")
    };
    let sa = edge(s, a, 2.0);
    let at = edge(a, t, 2.0);
    let sb = edge(s, b, 3.0);
    let bt = edge(b, t, 2.0);
    let ab = edge(a, b, 1.0);
    let net = nb.build_tight().expect("valid fixture");
    Diamond {
        net,
        s,
        a,
        b,
        t,
        sa,
        at,
        sb,
        bt,
        ab,
    }
}

/// A simple chain `0 -> 1 -> ... -> n-1`, one second per edge.
pub fn chain(n: usize) -> RoadNetwork {
    let mut nb = NetworkBuilder::new();
    for i in 0..n {
        nb.add_vertex(GeoPoint {
            lat: 0.0,
            lon: i as f64 * 0.001,
        });
    }
    for i in 1..n {
        nb.add_timed_edge(i - 1, i, 1.0, 100.0)
            .expect("positive weight");
    }
    nb.build_tight().expect("valid chain")
}
