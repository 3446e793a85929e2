//! OSM XML extract ingestion.
//!
//! Every drivable way is split into one segment per consecutive node pair.
//! A segment is kept only when both of its nodes lie inside the clipping
//! rectangle; one-way segments yield a single directed edge, others two.
//! Vertex ids are assigned in order of first reference by a drivable way.
//! Way references to nodes absent from the extract are treated like nodes
//! outside the rectangle.

use std::collections::HashMap;
use std::io::Read;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{BoundingRect, GeoPoint};
use crate::network::{NetworkBuilder, RoadClass, RoadNetwork, VertexId};

/// Maximum speed (km/h) assumed per `highway=*` value when a way carries no
/// usable `maxspeed` tag. Highway values missing from the table are not drivable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedTable {
    pub speeds: HashMap<String, f64>,
}

impl Default for SpeedTable {
    fn default() -> Self {
        let speeds = [
            ("motorway", 100.0),
            ("motorway_link", 60.0),
            ("trunk", 80.0),
            ("trunk_link", 50.0),
            ("primary", 60.0),
            ("primary_link", 50.0),
            ("secondary", 50.0),
            ("secondary_link", 50.0),
            ("tertiary", 50.0),
            ("tertiary_link", 40.0),
            ("unclassified", 40.0),
            ("residential", 50.0),
            ("living_street", 10.0),
            ("service", 20.0),
            ("road", 40.0),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        Self { speeds }
    }
}

impl SpeedTable {
    pub fn default_speed(&self, highway: &str) -> Option<f64> {
        self.speeds.get(highway).copied()
    }
}

/// Parses `maxspeed` values such as `50`, `50 km/h` or `30 mph`.
pub fn parse_maxspeed(value: &str) -> Option<f64> {
    let v = value.trim();
    let (number, factor) = if let Some(n) = v.strip_suffix("mph") {
        (n, 1.609_344)
    } else if let Some(n) = v.strip_suffix("km/h").or_else(|| v.strip_suffix("kmh")) {
        (n, 1.0)
    } else {
        (v, 1.0)
    };
    let speed = number.trim().parse::<f64>().ok()? * factor;
    (speed > 0.0 && speed.is_finite()).then_some(speed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Both,
    Forward,
    Backward,
}

#[derive(Debug, Default)]
struct RawWay {
    id: i64,
    line: usize,
    refs: Vec<i64>,
    tags: HashMap<String, String>,
}

impl RawWay {
    fn direction(&self, class: RoadClass) -> Direction {
        match self.tags.get("oneway").map(String::as_str) {
            Some("yes" | "true" | "1") => Direction::Forward,
            Some("-1" | "reverse") => Direction::Backward,
            Some("no" | "false" | "0") => Direction::Both,
            _ if class == RoadClass::Motorway
                || self.tags.get("junction").is_some_and(|j| j == "roundabout") =>
            {
                Direction::Forward
            }
            _ => Direction::Both,
        }
    }
}

struct Scanner<'a> {
    text: &'a str,
    reader: Reader<&'a [u8]>,
}

impl<'a> Scanner<'a> {
    fn line(&self) -> usize {
        let pos = (self.reader.buffer_position() as usize).min(self.text.len());
        self.text.as_bytes()[..pos]
            .iter()
            .filter(|&&b| b == b'\n')
            .count()
            + 1
    }

    fn error(&self, element: impl Into<String>, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line(),
            element: element.into(),
            message: message.into(),
        }
    }

    fn attrs(&self, e: &BytesStart<'_>, element: &str) -> Result<HashMap<String, String>> {
        let mut out = HashMap::new();
        for attr in e.attributes() {
            let attr = attr.map_err(|err| self.error(element, err.to_string()))?;
            let key = String::from_utf8_lossy(attr.key.as_ref()).into_owned();
            let value = attr
                .unescape_value()
                .map_err(|err| self.error(element, err.to_string()))?
                .into_owned();
            out.insert(key, value);
        }
        Ok(out)
    }

    fn number<T: std::str::FromStr>(
        &self,
        attrs: &HashMap<String, String>,
        key: &str,
        element: &str,
    ) -> Result<T> {
        let raw = attrs
            .get(key)
            .ok_or_else(|| self.error(element, format!("missing attribute {key:?}")))?;
        raw.parse()
            .map_err(|_| self.error(element, format!("attribute {key}={raw:?} is not a number")))
    }
}

/// Reads an OSM XML document into a network clipped to `rect`.
pub fn parse_extract<R: Read>(
    mut source: R,
    rect: &BoundingRect,
    speeds: &SpeedTable,
) -> Result<RoadNetwork> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    parse_extract_str(&text, rect, speeds)
}

pub fn parse_extract_str(
    text: &str,
    rect: &BoundingRect,
    speeds: &SpeedTable,
) -> Result<RoadNetwork> {
    let mut scanner = Scanner {
        text,
        reader: Reader::from_str(text),
    };
    scanner.reader.config_mut().trim_text(true);

    let mut nodes: HashMap<i64, GeoPoint> = HashMap::new();
    let mut ways: Vec<RawWay> = Vec::new();
    let mut current: Option<RawWay> = None;

    loop {
        let event = scanner
            .reader
            .read_event()
            .map_err(|err| scanner.error("document", err.to_string()))?;
        let (e, is_empty) = match event {
            Event::Eof => break,
            Event::Start(e) => (e, false),
            Event::Empty(e) => (e, true),
            Event::End(e) => {
                if e.name().as_ref() == b"way" {
                    if let Some(w) = current.take() {
                        ways.push(w);
                    }
                }
                continue;
            }
            _ => continue,
        };
        match e.name().as_ref() {
            b"node" => {
                let attrs = scanner.attrs(&e, "node")?;
                let label = format!("node {}", attrs.get("id").map_or("?", String::as_str));
                let id: i64 = scanner.number(&attrs, "id", &label)?;
                let lat: f64 = scanner.number(&attrs, "lat", &label)?;
                let lon: f64 = scanner.number(&attrs, "lon", &label)?;
                let p =
                    GeoPoint::new(lat, lon).map_err(|err| scanner.error(label, err.to_string()))?;
                nodes.insert(id, p);
            }
            b"way" => {
                let attrs = scanner.attrs(&e, "way")?;
                let label = format!("way {}", attrs.get("id").map_or("?", String::as_str));
                let id: i64 = scanner.number(&attrs, "id", &label)?;
                let way = RawWay {
                    id,
                    line: scanner.line(),
                    ..RawWay::default()
                };
                if is_empty {
                    ways.push(way);
                } else {
                    current = Some(way);
                }
            }
            b"nd" => {
                if let Some(w) = current.as_mut() {
                    let label = format!("nd in way {}", w.id);
                    let attrs = scanner.attrs(&e, &label)?;
                    let r: i64 = scanner.number(&attrs, "ref", &label)?;
                    w.refs.push(r);
                }
            }
            b"tag" => {
                if let Some(w) = current.as_mut() {
                    let label = format!("tag in way {}", w.id);
                    let mut attrs = scanner.attrs(&e, &label)?;
                    match (attrs.remove("k"), attrs.remove("v")) {
                        (Some(k), Some(v)) => {
                            w.tags.insert(k, v);
                        }
                        _ => return Err(scanner.error(label, "tag needs k and v")),
                    }
                }
            }
            _ => {}
        }
    }
    if current.is_some() {
        return Err(scanner.error("document", "unterminated way element"));
    }

    let mut builder = NetworkBuilder::new();
    let mut vertex_of: HashMap<i64, VertexId> = HashMap::new();
    for way in &ways {
        let Some(highway) = way.tags.get("highway") else {
            continue;
        };
        let Some(default_speed) = speeds.default_speed(highway) else {
            continue;
        };
        let class = RoadClass::from_highway(highway);
        let speed = way
            .tags
            .get("maxspeed")
            .and_then(|v| parse_maxspeed(v))
            .unwrap_or(default_speed);
        let direction = way.direction(class);

        let mut inside: Vec<Option<VertexId>> = Vec::with_capacity(way.refs.len());
        for r in &way.refs {
            let v = match nodes.get(r) {
                Some(p) if rect.contains(p) => Some(
                    *vertex_of
                        .entry(*r)
                        .or_insert_with(|| builder.add_vertex_with_osm_id(*p, *r)),
                ),
                _ => None,
            };
            inside.push(v);
        }
        for (pair, refs) in inside.windows(2).zip(way.refs.windows(2)) {
            let (Some(a), Some(b)) = (pair[0], pair[1]) else {
                continue;
            };
            if a == b {
                continue;
            }
            let length = nodes[&refs[0]].distance_m(&nodes[&refs[1]]);
            if length <= 0.0 {
                continue;
            }
            let add = |builder: &mut NetworkBuilder, from, to| {
                builder
                    .add_edge(from, to, length, speed, class)
                    .map_err(|err| Error::Parse {
                        line: way.line,
                        element: format!("way {}", way.id),
                        message: err.to_string(),
                    })
            };
            if direction != Direction::Backward {
                add(&mut builder, a, b)?;
            }
            if direction != Direction::Forward {
                add(&mut builder, b, a)?;
            }
        }
    }

    if builder.vertex_count() == 0 {
        return Err(Error::EmptyNetwork);
    }
    builder.build(*rect)
}
