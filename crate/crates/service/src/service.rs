//! Query handling, blinding and rating capture, independent of HTTP.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{Arc, Mutex, MutexGuard};

use altroute_core::netfile::load_network;
use altroute_core::study::{
    aggregate, AggregateRow, CategoryBoundaries, CohortFilter, QueryPoints, RatingRecord,
};
use altroute_core::{build_tree, GeoPoint, Orientation, Path, RoadNetwork, VertexId};
use serde::{Deserialize, Serialize};

use crate::approach::{
    builtin_approaches, Approach, ProviderAdapter, ProviderApproach, QueryContext, ReplayProvider,
};
use crate::clock::{Clock, IdGenerator, SystemClock};
use crate::config::{PolicyKind, ServiceConfig};
use crate::error::ServiceError;
use crate::labels::{assign_labels, LabelPolicy};
use crate::store::{RatingStore, StoredQuery};

pub const MAX_K: usize = 5;

/// Shown in place of a group that could not be computed; deliberately says
/// nothing about which approach failed.
pub const OMITTED_NOTE: &str = "routes from one approach are unavailable for this query";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRequest {
    pub source: GeoPoint,
    pub target: GeoPoint,
    #[serde(default = "default_k")]
    pub k: usize,
    /// Subset of approach ids to run; all when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engines: Option<Vec<String>>,
}

fn default_k() -> usize {
    3
}

/// GeoJSON `LineString`; coordinates are `[lon, lat]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineString {
    #[serde(rename = "type")]
    pub kind: String,
    pub coordinates: Vec<[f64; 2]>,
}

impl LineString {
    pub fn from_points(points: &[GeoPoint]) -> Self {
        Self {
            kind: "LineString".into(),
            coordinates: points.iter().map(|p| [p.lon, p.lat]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteView {
    pub minutes: u64,
    pub geometry: LineString,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteGroup {
    pub label: String,
    pub routes: Vec<RouteView>,
}

/// What a participant sees. Carries no approach identifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub query_id: String,
    /// Seconds.
    pub fastest_time: f64,
    pub groups: Vec<RouteGroup>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingRequest {
    pub query_id: String,
    /// Label -> score.
    pub scores: BTreeMap<String, i64>,
    pub resident: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingReceipt {
    pub query_id: String,
    pub response_id: String,
}

/// Travel time as shown to participants: minutes, halves rounded up.
pub fn display_minutes(seconds: f64) -> u64 {
    (seconds / 60.0 + 0.5).floor().max(0.0) as u64
}

pub struct RouteService {
    net: Arc<RoadNetwork>,
    city: String,
    policy: LabelPolicy,
    ttl_secs: u64,
    bounds: CategoryBoundaries,
    approaches: Vec<Box<dyn Approach>>,
    store: Mutex<RatingStore>,
    clock: Arc<dyn Clock>,
    ids: IdGenerator,
}

impl RouteService {
    pub fn new(net: Arc<RoadNetwork>, cfg: &ServiceConfig, store: RatingStore) -> Self {
        let clock: Arc<dyn Clock> = Arc::new(SystemClock);
        let seed = cfg.id_seed.unwrap_or_else(|| clock.now());
        Self {
            net,
            city: cfg.city.clone(),
            policy: match cfg.labels.policy {
                PolicyKind::Fixed => LabelPolicy::Fixed,
                PolicyKind::Shuffle => LabelPolicy::PerQueryShuffle {
                    seed: cfg.labels.seed,
                },
            },
            ttl_secs: cfg.cache_ttl_secs,
            bounds: CategoryBoundaries::default(),
            approaches: builtin_approaches(&cfg.engines),
            store: Mutex::new(store),
            clock,
            ids: IdGenerator::new(seed),
        }
    }

    /// Loads the network, rating store and optional provider fixtures named
    /// in the config.
    pub fn from_config(cfg: &ServiceConfig) -> Result<Self, ServiceError> {
        let net = load_network(&cfg.network)?;
        let store = RatingStore::open(&cfg.store)?;
        let mut service = Self::new(Arc::new(net), cfg, store);
        if let Some(path) = &cfg.provider_fixtures {
            service = service.with_provider(Box::new(ReplayProvider::load(path)?));
        }
        Ok(service)
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn with_id_seed(mut self, seed: u64) -> Self {
        self.ids = IdGenerator::new(seed);
        self
    }

    pub fn with_label_policy(mut self, policy: LabelPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_category_boundaries(mut self, bounds: CategoryBoundaries) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn with_approach(mut self, approach: Box<dyn Approach>) -> Self {
        self.approaches.push(approach);
        self
    }

    pub fn with_provider(self, adapter: Box<dyn ProviderAdapter>) -> Self {
        self.with_approach(Box::new(ProviderApproach { adapter }))
    }

    pub fn network(&self) -> &RoadNetwork {
        &self.net
    }

    pub fn approach_ids(&self) -> Vec<String> {
        self.approaches.iter().map(|a| a.id().to_string()).collect()
    }

    fn store(&self) -> MutexGuard<'_, RatingStore> {
        // a panic while holding the lock cannot leave the store half-written:
        // every write is a single append
        self.store.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn snap(&self, p: GeoPoint, which: &'static str) -> Result<VertexId, ServiceError> {
        GeoPoint::new(p.lat, p.lon).map_err(|e| ServiceError::InvalidRequest(e.to_string()))?;
        if !self.net.rect().contains(&p) {
            return Err(ServiceError::OutOfArea(which));
        }
        Ok(self.net.snap_to_vertex(&p)?)
    }

    fn selected(&self, wanted: Option<&[String]>) -> Result<Vec<&dyn Approach>, ServiceError> {
        let Some(wanted) = wanted else {
            return Ok(self.approaches.iter().map(|a| a.as_ref()).collect());
        };
        if wanted.is_empty() {
            return Err(ServiceError::InvalidRequest(
                "engines must not be empty".into(),
            ));
        }
        let wanted: BTreeSet<&str> = wanted.iter().map(String::as_str).collect();
        if let Some(bad) = wanted
            .iter()
            .find(|w| !self.approaches.iter().any(|a| a.id() == **w))
        {
            return Err(ServiceError::InvalidRequest(format!(
                "unknown engine {bad:?}"
            )));
        }
        Ok(self
            .approaches
            .iter()
            .filter(|a| wanted.contains(a.id()))
            .map(|a| a.as_ref())
            .collect())
    }

    pub fn handle_query(&self, req: &QueryRequest) -> Result<QueryResult, ServiceError> {
        if !(1..=MAX_K).contains(&req.k) {
            return Err(ServiceError::InvalidRequest(format!(
                "k must lie in 1..={MAX_K}"
            )));
        }
        let approaches = self.selected(req.engines.as_deref())?;
        let s = self.snap(req.source, "source")?;
        let t = self.snap(req.target, "target")?;
        if s == t {
            return Err(ServiceError::SameVertex);
        }
        let net: &RoadNetwork = &self.net;
        let forward = build_tree(net, s, Orientation::Forward)?;
        let Some(fastest_time) = forward.dist(t) else {
            return Err(ServiceError::NoRoute);
        };
        let backward = build_tree(net, t, Orientation::Backward)?;
        let ctx = QueryContext {
            net,
            source: s,
            target: t,
            source_point: req.source,
            target_point: req.target,
            forward,
            backward,
            k: req.k,
        };

        let mut produced: BTreeMap<String, Vec<Path>> = BTreeMap::new();
        let mut notes = Vec::new();
        for a in approaches {
            let outcome = catch_unwind(AssertUnwindSafe(|| a.routes(&ctx)))
                .unwrap_or_else(|_| Err("approach panicked".into()));
            match outcome {
                Ok(routes) if !routes.is_empty() => {
                    produced.insert(a.id().to_string(), routes);
                }
                Ok(_) => notes.push(OMITTED_NOTE.to_string()),
                Err(reason) => {
                    tracing::warn!(approach = a.id(), %reason, "approach failed");
                    notes.push(OMITTED_NOTE.to_string());
                }
            }
        }

        let (query_id, sequence) = self.ids.next();
        let ids: Vec<String> = produced.keys().cloned().collect();
        let assignment = assign_labels(&ids, self.policy, sequence);
        let groups = assignment
            .iter()
            .map(|(label, approach)| RouteGroup {
                label: label.clone(),
                routes: produced[approach]
                    .iter()
                    .map(|p| RouteView {
                        minutes: display_minutes(p.travel_time),
                        geometry: LineString::from_points(&p.geometry(net)),
                    })
                    .collect(),
            })
            .collect();

        self.store().put_query(StoredQuery {
            query_id: query_id.clone(),
            sequence,
            created: self.clock.now(),
            city: self.city.clone(),
            query: QueryPoints {
                source: req.source,
                target: req.target,
            },
            fastest_time,
            labels: assignment.into_iter().collect(),
        })?;

        Ok(QueryResult {
            query_id,
            fastest_time,
            groups,
            notes,
        })
    }

    /// Un-blinds and stores a rating. Resubmitting for the same query
    /// replaces the earlier rating.
    pub fn record_rating(&self, req: &RatingRequest) -> Result<RatingRecord, ServiceError> {
        let mut store = self.store();
        let q = store
            .query(&req.query_id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownQuery(req.query_id.clone()))?;
        let now = self.clock.now();
        if now > q.created.saturating_add(self.ttl_secs) {
            return Err(ServiceError::Expired(req.query_id.clone()));
        }
        let shown: BTreeSet<&String> = q.labels.keys().collect();
        let given: BTreeSet<&String> = req.scores.keys().collect();
        if let Some(missing) = shown.difference(&given).next() {
            return Err(ServiceError::IncompleteRating(format!(
                "label {missing} has no score"
            )));
        }
        if let Some(extra) = given.difference(&shown).next() {
            return Err(ServiceError::IncompleteRating(format!(
                "label {extra} was not shown"
            )));
        }
        let mut scores = BTreeMap::new();
        let mut labels = BTreeMap::new();
        for (label, &score) in &req.scores {
            let score = u8::try_from(score)
                .ok()
                .filter(|s| (1..=5).contains(s))
                .ok_or_else(|| {
                    ServiceError::InvalidRequest(format!(
                        "score {score} for {label} is outside 1..=5"
                    ))
                })?;
            let approach = q.labels[label].clone();
            scores.insert(approach.clone(), score);
            labels.insert(approach, label.clone());
        }
        let record = RatingRecord {
            response_id: format!("r-{}", q.query_id),
            query_id: q.query_id.clone(),
            city: q.city.clone(),
            query: q.query,
            fastest_time: q.fastest_time,
            resident: req.resident,
            scores,
            labels,
            timestamp: now,
        };
        record.validate()?;
        store.put_rating(record.clone())?;
        Ok(record)
    }

    pub fn stats(&self, filter: &CohortFilter) -> Result<AggregateRow, ServiceError> {
        let ratings = self.store().ratings();
        aggregate(&ratings, filter, &self.bounds).map_err(|e| match e {
            altroute_core::Error::EmptyCohort => ServiceError::EmptyCohort,
            other => ServiceError::Core(other),
        })
    }

    pub fn ratings(&self) -> Vec<RatingRecord> {
        self.store().ratings()
    }

    pub fn stored_query(&self, id: &str) -> Option<StoredQuery> {
        self.store().query(id).cloned()
    }

    /// Rewrites the rating log, forgetting unrated queries past their TTL.
    pub fn compact(&self) -> Result<(), ServiceError> {
        let cutoff = self.clock.now().saturating_sub(self.ttl_secs);
        self.store().compact(Some(cutoff))
    }
}
