//! Compact binary network file.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! header   magic "ALTRNET\0" (8 bytes)
//!          version u32
//!          vertex count u64, edge count u64
//!          rect min_lat, min_lon, max_lat, max_lon (4 x f64)
//! vertex   osm id i64, lat f64, lon f64                          (24 bytes each)
//! edge     from u32, to u32, length f64, max_speed f64,
//!          travel_time f64, road class u8 (0 motorway, 1 other),
//!          7 zero bytes                                           (40 bytes each)
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::geo::{BoundingRect, GeoPoint};
use crate::network::{Edge, RoadClass, RoadNetwork};

pub const MAGIC: &[u8; 8] = b"ALTRNET\0";
pub const VERSION: u32 = 1;

pub fn write_network<W: Write>(net: &RoadNetwork, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(VERSION)?;
    w.write_u64::<LittleEndian>(net.vertex_count() as u64)?;
    w.write_u64::<LittleEndian>(net.edge_count() as u64)?;
    let r = net.rect();
    for x in [
        r.min_corner.lat,
        r.min_corner.lon,
        r.max_corner.lat,
        r.max_corner.lon,
    ] {
        w.write_f64::<LittleEndian>(x)?;
    }
    for (p, id) in net.points().iter().zip(net.osm_ids()) {
        w.write_i64::<LittleEndian>(*id)?;
        w.write_f64::<LittleEndian>(p.lat)?;
        w.write_f64::<LittleEndian>(p.lon)?;
    }
    for e in net.edges() {
        w.write_u32::<LittleEndian>(e.from as u32)?;
        w.write_u32::<LittleEndian>(e.to as u32)?;
        w.write_f64::<LittleEndian>(e.length)?;
        w.write_f64::<LittleEndian>(e.max_speed)?;
        w.write_f64::<LittleEndian>(e.travel_time)?;
        w.write_u8(match e.road_class {
            RoadClass::Motorway => 0,
            RoadClass::Other => 1,
        })?;
        w.write_all(&[0u8; 7])?;
    }
    w.flush()?;
    Ok(())
}

fn truncated(err: std::io::Error) -> Error {
    if err.kind() == ErrorKind::UnexpectedEof {
        Error::Corrupt("file is truncated".into())
    } else {
        Error::Io(err)
    }
}

pub fn read_network<R: Read>(mut r: R) -> Result<RoadNetwork> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(truncated)?;
    if &magic != MAGIC {
        return Err(Error::Corrupt("bad magic bytes".into()));
    }
    let version = r.read_u32::<LittleEndian>().map_err(truncated)?;
    if version != VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: VERSION,
        });
    }
    let n = r.read_u64::<LittleEndian>().map_err(truncated)?;
    let m = r.read_u64::<LittleEndian>().map_err(truncated)?;
    if n > u32::MAX as u64 || m > u32::MAX as u64 {
        return Err(Error::Corrupt(format!(
            "implausible counts {n} vertices, {m} edges"
        )));
    }
    let mut corners = [0.0; 4];
    for c in &mut corners {
        *c = r.read_f64::<LittleEndian>().map_err(truncated)?;
    }
    let rect = BoundingRect::from_bounds(corners[0], corners[1], corners[2], corners[3])
        .map_err(|e| Error::Corrupt(e.to_string()))?;

    let mut points = Vec::with_capacity(n as usize);
    let mut osm_ids = Vec::with_capacity(n as usize);
    for _ in 0..n {
        osm_ids.push(r.read_i64::<LittleEndian>().map_err(truncated)?);
        let lat = r.read_f64::<LittleEndian>().map_err(truncated)?;
        let lon = r.read_f64::<LittleEndian>().map_err(truncated)?;
        points.push(GeoPoint::new(lat, lon).map_err(|e| Error::Corrupt(e.to_string()))?);
    }
    let mut edges = Vec::with_capacity(m as usize);
    for id in 0..m as usize {
        let from = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
        let to = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
        let length = r.read_f64::<LittleEndian>().map_err(truncated)?;
        let max_speed = r.read_f64::<LittleEndian>().map_err(truncated)?;
        let travel_time = r.read_f64::<LittleEndian>().map_err(truncated)?;
        let road_class = match r.read_u8().map_err(truncated)? {
            0 => RoadClass::Motorway,
            1 => RoadClass::Other,
            c => {
                return Err(Error::Corrupt(format!(
                    "edge {id} has unknown road class {c}"
                )))
            }
        };
        let mut pad = [0u8; 7];
        r.read_exact(&mut pad).map_err(truncated)?;
        edges.push(Edge {
            id,
            from,
            to,
            length,
            max_speed,
            road_class,
            travel_time,
        });
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Corrupt("trailing bytes after the last edge".into()));
    }
    RoadNetwork::from_parts(points, osm_ids, edges, rect).map_err(|e| Error::Corrupt(e.to_string()))
}

pub fn save_network(net: &RoadNetwork, path: impl AsRef<Path>) -> Result<()> {
    write_network(net, BufWriter::new(File::create(path)?))
}

pub fn load_network(path: impl AsRef<Path>) -> Result<RoadNetwork> {
    read_network(BufReader::new(File::open(path)?))
}
