use thiserror::Error;

/// Errors raised by the clustering and evaluation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty cluster")]
    EmptyCluster,
    #[error("empty catalog")]
    EmptyCatalog,
    #[error("invalid dimension {value} for {field}: must be finite and > 0")]
    InvalidDimension { field: &'static str, value: f64 },
    #[error("invalid velocity {value} for product {id}: must be finite and >= 0")]
    InvalidVelocity { id: String, value: f64 },
    #[error("duplicate product id {0}")]
    DuplicateId(String),
    #[error("unknown product id {0}")]
    UnknownProduct(String),
    #[error("solution is not a partition of the catalog: {0}")]
    InvalidSolution(String),
    #[error("no splittable cluster")]
    NoSplittableCluster,
    #[error("nothing to merge")]
    NothingToMerge,
    #[error("at least two clusters are required, found {0}")]
    TooFewClusters(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no boxes supplied")]
    NoBoxes,
    #[error("no fitted shipments")]
    NoFittedShipments,
    #[error("shipment count for {0} must be >= 1")]
    ZeroCount(String),
    #[error("empty validation set")]
    EmptyValidation,
    #[error("curve needs at least {needed} consecutive points, got {got}")]
    CurveTooShort { needed: usize, got: usize },
    #[error("curve K values must be consecutive and ascending")]
    CurveNotConsecutive,
    #[error("requested {k} groups but only {n} products are available")]
    TooManyGroups { k: usize, n: usize },
    #[error("exhaustive search guard rail: {0}")]
    GuardRail(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
