//! Iterated shortest paths with multiplicative penalties on the edges of
//! every path found so far.

use serde::{Deserialize, Serialize};

use super::{check_k, AlternativeSet, Diagnostics, EngineKind};
use crate::error::{Error, Result};
use crate::network::{RoadNetwork, VertexId};
use crate::path::Path;
use crate::search::shortest_path_with_weights;

pub const DEFAULT_PENALTY_FACTOR: f64 = 1.4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    pub k: usize,
    pub penalty_factor: f64,
    pub max_iterations: usize,
}

impl PenaltyConfig {
    /// Factor 1.4 and an iteration cap of `4k`.
    pub fn new(k: usize) -> Self {
        Self {
            k,
            penalty_factor: DEFAULT_PENALTY_FACTOR,
            max_iterations: 4 * k,
        }
    }

    fn validate(&self) -> Result<()> {
        check_k(self.k)?;
        if !(self.penalty_factor > 1.0 && self.penalty_factor.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "penalty factor must exceed 1, got {}",
                self.penalty_factor
            )));
        }
        if self.max_iterations < self.k {
            return Err(Error::InvalidInput(format!(
                "max_iterations ({}) must be at least k ({})",
                self.max_iterations, self.k
            )));
        }
        Ok(())
    }
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self::new(3)
    }
}

/// Per-query working weights. The shared network is never touched.
struct PenalisedWeights {
    weights: Vec<f64>,
    exponents: Vec<u32>,
    factor: f64,
}

impl PenalisedWeights {
    fn new(net: &RoadNetwork, factor: f64) -> Self {
        Self {
            weights: net.travel_times(),
            exponents: vec![0; net.edge_count()],
            factor,
        }
    }

    fn penalise(&mut self, path: &Path) {
        for e in &path.edges {
            self.weights[e.id] *= self.factor;
            self.exponents[e.id] += 1;
        }
    }

    fn exponents(&self) -> Vec<(usize, u32)> {
        self.exponents
            .iter()
            .enumerate()
            .filter(|(_, m)| **m > 0)
            .map(|(e, m)| (e, *m))
            .collect()
    }
}

pub fn penalty_routes(
    net: &RoadNetwork,
    s: VertexId,
    t: VertexId,
    cfg: &PenaltyConfig,
) -> Result<AlternativeSet> {
    cfg.validate()?;
    let mut work = PenalisedWeights::new(net, cfg.penalty_factor);
    let mut routes: Vec<Path> = Vec::with_capacity(cfg.k);
    let mut diagnostics = Diagnostics::default();

    while routes.len() < cfg.k && diagnostics.iterations < cfg.max_iterations {
        let found = shortest_path_with_weights(net, s, t, &work.weights)?;
        diagnostics.iterations += 1;
        if routes.iter().any(|r| r.same_edges(&found)) {
            diagnostics.rejected += 1;
        } else {
            routes.push(found.clone());
        }
        if routes.len() < cfg.k && diagnostics.iterations < cfg.max_iterations {
            work.penalise(&found);
        }
    }

    diagnostics.partial = routes.len() < cfg.k;
    diagnostics.penalty_exponents = work.exponents();
    Ok(AlternativeSet {
        engine: EngineKind::Penalty,
        routes,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{chain, diamond};
    use crate::search::shortest_path;

    #[test]
    fn diamond_two_routes() {
        let d = diamond(1.0);
        let set = penalty_routes(&d.net, d.s, d.t, &PenaltyConfig::new(2)).unwrap();
        let vs: Vec<_> = set.routes.iter().map(|r| r.vertices()).collect();
        assert_eq!(vs, vec![vec![d.s, d.a, d.t], vec![d.s, d.b, d.t]]);
        assert_eq!(set.routes[0].travel_time, 4.0);
        assert_eq!(set.routes[1].travel_time, 5.0);
        assert!(!set.diagnostics.partial);
        assert_eq!(
            set.diagnostics.penalty_exponents,
            vec![(d.sa, 1), (d.at, 1)]
        );
    }

    #[test]
    fn k_one_is_plain_shortest_path() {
        let d = diamond(1.0);
        let set = penalty_routes(&d.net, d.s, d.t, &PenaltyConfig::new(1)).unwrap();
        assert_eq!(set.routes, vec![shortest_path(&d.net, d.s, d.t).unwrap()]);
        assert!(set.diagnostics.penalty_exponents.is_empty());
        assert_eq!(set.diagnostics.iterations, 1);
    }

    #[test]
    fn single_path_network_is_partial() {
        let net = chain(4);
        let set = penalty_routes(&net, 0, 3, &PenaltyConfig::new(3)).unwrap();
        assert_eq!(set.routes.len(), 1);
        assert!(set.diagnostics.partial);
        assert_eq!(set.diagnostics.iterations, 12);
        assert_eq!(set.diagnostics.rejected, 11);
    }

    #[test]
    fn unreachable_is_an_error() {
        let net = chain(3);
        assert!(matches!(
            penalty_routes(&net, 2, 0, &PenaltyConfig::new(2)),
            Err(Error::NoRoute { .. })
        ));
    }

    #[test]
    fn penalties_compound() {
        let d = diamond(1.0);
        let mut w = PenalisedWeights::new(&d.net, 1.4);
        let p = shortest_path(&d.net, d.s, d.t).unwrap();
        w.penalise(&p);
        w.penalise(&p);
        assert!((w.weights[d.sa] - 2.0 * 1.4f64.powi(2)).abs() < 1e-12);
        assert_eq!(w.weights[d.sb], 3.0);
        assert_eq!(w.exponents(), vec![(d.sa, 2), (d.at, 2)]);
    }

    #[test]
    fn rejects_bad_config() {
        let d = diamond(1.0);
        let mut cfg = PenaltyConfig::new(2);
        cfg.penalty_factor = 1.0;
        assert!(penalty_routes(&d.net, d.s, d.t, &cfg).is_err());
        cfg = PenaltyConfig::new(3);
        cfg.max_iterations = 2;
        assert!(penalty_routes(&d.net, d.s, d.t, &cfg).is_err());
        assert!(penalty_routes(&d.net, d.s, d.t, &PenaltyConfig::new(0)).is_err());
    }
}
