use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("{0} lies outside the served area")]
    OutOfArea(&'static str),
    #[error("source and target snap to the same intersection")]
    SameVertex,
    #[error("no route connects the chosen points")]
    NoRoute,
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("unknown query id {0}")]
    UnknownQuery(String),
    #[error("query {0} has expired")]
    Expired(String),
    #[error("incomplete rating: {0}")]
    IncompleteRating(String),
    #[error("no ratings match the filter")]
    EmptyCohort,
    #[error("configuration: {0}")]
    Config(String),
    #[error("rating store: {0}")]
    Store(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] altroute_core::Error),
}

impl ServiceError {
    /// Short machine-readable code used in HTTP error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            Self::OutOfArea(_) => "out_of_area",
            Self::SameVertex => "same_vertex",
            Self::NoRoute => "no_route",
            Self::InvalidRequest(_) => "invalid_request",
            Self::UnknownQuery(_) => "unknown_query",
            Self::Expired(_) => "expired",
            Self::IncompleteRating(_) => "incomplete_rating",
            Self::EmptyCohort => "empty_cohort",
            Self::Config(_) => "config",
            Self::Store(_) | Self::Io(_) => "storage",
            Self::Core(_) => "internal",
        }
    }
}
