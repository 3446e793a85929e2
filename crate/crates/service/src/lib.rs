//! Query and rating service: snaps endpoints to the network, fans a query out
//! to every route source, hides which source produced which group behind
//! letter labels, and records participant ratings in an append-only log.

pub mod approach;
pub mod clock;
pub mod config;
pub mod error;
pub mod fixtures;
pub mod http;
pub mod labels;
pub mod service;
pub mod store;

pub use config::ServiceConfig;
pub use error::ServiceError;
pub use labels::{assign_labels, LabelPolicy};
pub use service::{display_minutes, QueryRequest, QueryResult, RatingRequest, RouteService};
pub use store::RatingStore;
