//! Seeded synthetic city extracts in OSM XML, used for load tests, the
//! acceptance suite and demos when no real extract is at hand.
//!
//! The city is a jittered street grid: arterials every eighth row and column,
//! a motorway along the middle row, a share of one-way residential streets
//! and a few missing blocks.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geo::BoundingRect;

const ORIGIN_LAT: f64 = 52.0;
const ORIGIN_LON: f64 = 13.0;
const SPACING_M: f64 = 150.0;

#[derive(Debug, Clone)]
pub struct SyntheticCity {
    pub xml: String,
    pub rect: BoundingRect,
    pub rows: usize,
    pub cols: usize,
}

fn node_id(rows: usize, r: usize, c: usize) -> i64 {
    1_000 + (c * rows + r) as i64
}

pub fn synthetic_city(rows: usize, cols: usize, seed: u64) -> SyntheticCity {
    assert!(rows >= 2 && cols >= 2, "a city needs at least a 2 x 2 grid");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dlat = SPACING_M / 111_195.0;
    let dlon = dlat / ORIGIN_LAT.to_radians().cos();

    let mut xml = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<osm version=\"0.6\" generator=\"altroute-synth\">\n");
    let (mut min_lat, mut min_lon) = (f64::INFINITY, f64::INFINITY);
    let (mut max_lat, mut max_lon) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for c in 0..cols {
        for r in 0..rows {
            let lat = ORIGIN_LAT + (r as f64 + rng.random_range(-0.25..0.25)) * dlat;
            let lon = ORIGIN_LON + (c as f64 + rng.random_range(-0.25..0.25)) * dlon;
            min_lat = min_lat.min(lat);
            max_lat = max_lat.max(lat);
            min_lon = min_lon.min(lon);
            max_lon = max_lon.max(lon);
            let _ = writeln!(
                xml,
                "  <node id=\"{}\" lat=\"{lat:.7}\" lon=\"{lon:.7}\"/>",
                node_id(rows, r, c)
            );
        }
    }

    let mut way_id = 1u64;
    let mut emit = |xml: &mut String, refs: &[i64], tags: &[(&str, String)]| {
        if refs.len() < 2 {
            return;
        }
        let _ = writeln!(xml, "  <way id=\"{way_id}\">");
        for r in refs {
            let _ = writeln!(xml, "    <nd ref=\"{r}\"/>");
        }
        for (k, v) in tags {
            let _ = writeln!(xml, "    <tag k=\"{k}\" v=\"{v}\"/>");
        }
        xml.push_str("  </way>\n");
        way_id += 1;
    };

    let motorway_row = rows / 2;
    // streets along rows (index 0) and columns (index 1)
    for axis in 0..2 {
        let (lines, len) = if axis == 0 {
            (rows, cols)
        } else {
            (cols, rows)
        };
        for line in 0..lines {
            let at = |i: usize| {
                if axis == 0 {
                    node_id(rows, line, i)
                } else {
                    node_id(rows, i, line)
                }
            };
            let mut tags: Vec<(&str, String)> = Vec::new();
            let arterial = line % 8 == 0;
            if axis == 0 && line == motorway_row && rows >= 8 {
                tags.push(("highway", "motorway".into()));
                tags.push(("maxspeed", "100".into()));
                tags.push(("oneway", "no".into()));
            } else if arterial {
                tags.push(("highway", "primary".into()));
                tags.push(("maxspeed", "60".into()));
            } else {
                let kind = if rng.random_bool(0.2) {
                    "tertiary"
                } else {
                    "residential"
                };
                tags.push(("highway", kind.into()));
                if rng.random_bool(0.3) {
                    tags.push(("maxspeed", "40".into()));
                }
                if rng.random_bool(0.15) {
                    let dir = if rng.random_bool(0.5) { "yes" } else { "-1" };
                    tags.push(("oneway", dir.into()));
                }
            }
            let mut refs = vec![at(0)];
            for i in 1..len {
                if !arterial && rng.random_bool(0.04) {
                    emit(&mut xml, &refs, &tags);
                    refs.clear();
                }
                refs.push(at(i));
            }
            emit(&mut xml, &refs, &tags);
        }
    }
    // a footpath that must be ignored
    emit(
        &mut xml,
        &[node_id(rows, 0, 0), node_id(rows, 1, 1)],
        &[("highway", "footway".into())],
    );
    xml.push_str("</osm>\n");

    let rect = BoundingRect::from_bounds(min_lat, min_lon, max_lat, max_lon)
        .expect("generated coordinates are ordered");
    SyntheticCity {
        xml,
        rect,
        rows,
        cols,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::osm::{parse_extract_str, SpeedTable};

    #[test]
    fn deterministic_and_parseable() {
        let a = synthetic_city(12, 10, 7);
        let b = synthetic_city(12, 10, 7);
        assert_eq!(a.xml, b.xml);
        let net = parse_extract_str(&a.xml, &a.rect, &SpeedTable::default()).unwrap();
        // a node can drop out when both of its streets are broken around it
        assert!(net.vertex_count() > 110 && net.vertex_count() <= 120);
        assert!(net.edge_count() > 300);
        assert!(net
            .edges()
            .iter()
            .any(|e| e.road_class == crate::network::RoadClass::Motorway));
    }
}
