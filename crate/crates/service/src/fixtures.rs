//! A deterministic service over the diamond test network, shared by the
//! service's own tests and the workspace acceptance suite.

use std::path::Path;
use std::sync::Arc;

use altroute_core::fixtures::{diamond, Diamond};
use altroute_core::GeoPoint;

use crate::clock::ManualClock;
use crate::config::ServiceConfig;
use crate::error::ServiceError;
use crate::service::RouteService;
use crate::store::RatingStore;

pub const FIXTURE_NOW: u64 = 1_700_000_000;
pub const FIXTURE_ID_SEED: u64 = 7;

pub struct DiamondService {
    pub service: Arc<RouteService>,
    pub clock: Arc<ManualClock>,
    pub diamond: Diamond,
}

impl DiamondService {
    pub fn point(&self, v: usize) -> GeoPoint {
        self.diamond.net.point(v)
    }
}

/// Minute-scale diamond (s -> a -> t takes 4 min) with a fixed clock and id
/// seed, rating log at `store`.
pub fn diamond_service(store: &Path, cfg: &ServiceConfig) -> Result<DiamondService, ServiceError> {
    let d = diamond(60.0);
    let clock = Arc::new(ManualClock::new(FIXTURE_NOW));
    let service = RouteService::new(Arc::new(d.net.clone()), cfg, RatingStore::open(store)?)
        .with_clock(clock.clone())
        .with_id_seed(FIXTURE_ID_SEED);
    Ok(DiamondService {
        service: Arc::new(service),
        clock,
        diamond: d,
    })
}
