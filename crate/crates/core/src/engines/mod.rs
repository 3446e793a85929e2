//! The three alternative-route engines.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::path::Path;

pub mod dissimilarity;
pub mod penalty;
pub mod plateaus;

pub use dissimilarity::{dissimilar_routes, via_candidates, DissimilarityConfig};
pub use penalty::{penalty_routes, PenaltyConfig};
pub use plateaus::{find_plateaus, plateau_routes, Plateau, PlateauConfig};

/// Default stretch bound shared by the plateau and dissimilarity engines.
pub const DEFAULT_STRETCH_BOUND: f64 = 1.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Penalty,
    Plateaus,
    Dissimilarity,
}

impl EngineKind {
    pub const ALL: [EngineKind; 3] = [
        EngineKind::Penalty,
        EngineKind::Plateaus,
        EngineKind::Dissimilarity,
    ];

    pub fn id(self) -> &'static str {
        match self {
            EngineKind::Penalty => "penalty",
            EngineKind::Plateaus => "plateaus",
            EngineKind::Dissimilarity => "dissimilarity",
        }
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for EngineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        EngineKind::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown engine {s:?}")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Searches run (penalty) or candidates examined (plateaus, dissimilarity).
    pub iterations: usize,
    /// Candidates discarded as duplicates, lassos, too slow or too similar.
    pub rejected: usize,
    /// Fewer than `k` routes were found.
    pub partial: bool,
    /// Penalty only: for every penalised edge, how many explored paths used it.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub penalty_exponents: Vec<(usize, u32)>,
    /// Plateaus only: work done joining the two trees.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub join_operations: Option<u64>,
}

/// Routes produced by one engine for one query, fastest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternativeSet {
    pub engine: EngineKind,
    pub routes: Vec<Path>,
    pub diagnostics: Diagnostics,
}

impl AlternativeSet {
    pub fn fastest(&self) -> Option<&Path> {
        self.routes.first()
    }
}

pub(crate) fn check_k(k: usize) -> Result<(), Error> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    Ok(())
}

pub(crate) fn check_stretch(bound: f64) -> Result<(), Error> {
    if !(bound >= 1.0 && bound.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "stretch bound must be at least 1, got {bound}"
        )));
    }
    Ok(())
}

/// Parameters for every engine, for callers that pick the engine at runtime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineSettings {
    pub k: usize,
    pub penalty_factor: f64,
    pub stretch_bound: f64,
    pub theta: f64,
}

impl EngineSettings {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            penalty_factor: penalty::DEFAULT_PENALTY_FACTOR,
            stretch_bound: DEFAULT_STRETCH_BOUND,
            theta: dissimilarity::DEFAULT_THETA,
        }
    }
}

/// Runs `kind` for the query the two trees describe (forward tree at the
/// source, backward tree at the target).
pub fn run_engine(
    kind: EngineKind,
    forward: &crate::search::ShortestPathTree<'_>,
    backward: &crate::search::ShortestPathTree<'_>,
    settings: &EngineSettings,
) -> crate::error::Result<AlternativeSet> {
    match kind {
        EngineKind::Penalty => {
            crate::search::check_tree_pair(forward, backward)?;
            let cfg = PenaltyConfig {
                penalty_factor: settings.penalty_factor,
                ..PenaltyConfig::new(settings.k)
            };
            penalty_routes(forward.network(), forward.root(), backward.root(), &cfg)
        }
        EngineKind::Plateaus => plateaus::plateau_routes_with_trees(
            forward,
            backward,
            &PlateauConfig {
                k: settings.k,
                stretch_bound: settings.stretch_bound,
            },
        ),
        EngineKind::Dissimilarity => dissimilarity::dissimilar_routes_with_trees(
            forward,
            backward,
            &DissimilarityConfig {
                theta: settings.theta,
                stretch_bound: settings.stretch_bound,
                ..DissimilarityConfig::new(settings.k)
            },
        ),
    }
}
