//! WGS84 coordinates, rectangles and great-circle distance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(Error::InvalidInput(format!(
                "coordinate ({lat}, {lon}) is outside WGS84 bounds"
            )));
        }
        Ok(Self { lat, lon })
    }

    /// Haversine distance in meters.
    pub fn distance_m(&self, other: &GeoPoint) -> f64 {
        let (p1, p2) = (self.lat.to_radians(), other.lat.to_radians());
        let dp = p2 - p1;
        let dl = (other.lon - self.lon).to_radians();
        let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
        2.0 * EARTH_RADIUS_M * a.sqrt().min(1.0).asin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingRect {
    pub min_corner: GeoPoint,
    pub max_corner: GeoPoint,
}

impl BoundingRect {
    pub fn new(min_corner: GeoPoint, max_corner: GeoPoint) -> Result<Self> {
        if min_corner.lat > max_corner.lat || min_corner.lon > max_corner.lon {
            return Err(Error::InvalidInput(
                "rectangle min corner must not exceed max corner".into(),
            ));
        }
        Ok(Self {
            min_corner,
            max_corner,
        })
    }

    pub fn from_bounds(min_lat: f64, min_lon: f64, max_lat: f64, max_lon: f64) -> Result<Self> {
        Self::new(
            GeoPoint::new(min_lat, min_lon)?,
            GeoPoint::new(max_lat, max_lon)?,
        )
    }

    /// The whole globe.
    pub fn world() -> Self {
        Self {
            min_corner: GeoPoint {
                lat: -90.0,
                lon: -180.0,
            },
            max_corner: GeoPoint {
                lat: 90.0,
                lon: 180.0,
            },
        }
    }

    /// Closed containment test.
    pub fn contains(&self, p: &GeoPoint) -> bool {
        p.lat >= self.min_corner.lat
            && p.lat <= self.max_corner.lat
            && p.lon >= self.min_corner.lon
            && p.lon <= self.max_corner.lon
    }

    pub fn centre(&self) -> GeoPoint {
        GeoPoint {
            lat: (self.min_corner.lat + self.max_corner.lat) / 2.0,
            lon: (self.min_corner.lon + self.max_corner.lon) / 2.0,
        }
    }
}

impl std::str::FromStr for BoundingRect {
    type Err = Error;

    /// Parses `minlat,minlon,maxlat,maxlon`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidInput(format!("bad rectangle {s:?}: {e}")))?;
        match parts.as_slice() {
            &[a, b, c, d] => Self::from_bounds(a, b, c, d),
            _ => Err(Error::InvalidInput(format!(
                "rectangle needs 4 comma-separated numbers, got {s:?}"
            ))),
        }
    }
}

impl std::str::FromStr for GeoPoint {
    type Err = Error;

    /// Parses `lat,lon`.
    fn from_str(s: &str) -> Result<Self> {
        let (lat, lon) = s
            .split_once(',')
            .ok_or_else(|| Error::InvalidInput(format!("expected lat,lon, got {s:?}")))?;
        let lat = lat
            .trim()
            .parse()
            .map_err(|e| Error::InvalidInput(format!("bad latitude in {s:?}: {e}")))?;
        let lon = lon
            .trim()
            .parse()
            .map_err(|e| Error::InvalidInput(format!("bad longitude in {s:?}: {e}")))?;
        Self::new(lat, lon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(GeoPoint::new(91.0, 0.0).is_err());
        assert!(GeoPoint::new(0.0, -180.5).is_err());
        assert!(GeoPoint::new(-90.0, 180.0).is_ok());
    }

    #[test]
    fn rect_corner_order() {
        assert!(BoundingRect::from_bounds(1.0, 0.0, 0.0, 1.0).is_err());
        let r: BoundingRect = "52.5, 13.4, 52.52, 13.42".parse().unwrap();
        assert!(r.contains(&GeoPoint {
            lat: 52.5,
            lon: 13.42
        }));
        assert!(!r.contains(&GeoPoint {
            lat: 52.53,
            lon: 13.41
        }));
    }

    #[test]
    fn one_degree_of_latitude() {
        let a = GeoPoint { lat: 0.0, lon: 0.0 };
        let b = GeoPoint { lat: 1.0, lon: 0.0 };
        let d = a.distance_m(&b);
        assert!((d - 111_195.08).abs() < 1.0, "{d}");
        assert_eq!(a.distance_m(&a), 0.0);
    }
}
