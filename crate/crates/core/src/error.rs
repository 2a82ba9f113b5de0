use alloc::string::String;

use crate::time::Timestamp;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    // system model
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("self-loop line `{0}`")]
    SelfLoopLine(String),
    #[error("dangling reference: {0}")]
    DanglingReference(String),
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("no forecast registered for {0}")]
    NoForecast(String),
    #[error("issue time {time} not found for {series}")]
    IssueTimeNotFound { series: String, time: Timestamp },
    #[error("horizon overrun: requested {requested} steps, {stored} stored")]
    HorizonOverrun { requested: usize, stored: usize },
    #[error("no series registered for {0}")]
    NoSeries(String),
    #[error("timestamp {0} out of range")]
    OutOfRange(Timestamp),
    #[error("off-grid timestamp {0}")]
    OffGridTimestamp(Timestamp),

    // optimization container
    #[error("duplicate variable {0}")]
    DuplicateVariable(String),
    #[error("inverted bounds on {0}")]
    InvertedBounds(String),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("nonfinite value in {0}")]
    NonFinite(String),
    #[error("unknown parameter {0}")]
    UnknownParameter(String),
    #[error("unknown constraint {0}")]
    UnknownConstraint(String),

    // formulations
    #[error("template does not cover component type {0}")]
    UncoveredComponentType(String),
    #[error("empty balance")]
    EmptyBalance,
    #[error("missing initial condition for {0}")]
    MissingInitialCondition(String),
    #[error("missing forecast parameter for {0}")]
    MissingForecastParam(String),
    #[error("disconnected network: {0}")]
    DisconnectedNetwork(String),
    #[error("fatal sanity finding: {0}")]
    FatalSanity(String),
    #[error("build error: {0}")]
    Build(String),

    // problems and sequencing
    #[error("timing violation: {0}")]
    Timing(String),
    #[error("missing forecast: {0}")]
    MissingForecast(String),
    #[error("sequence violation: {0}")]
    Sequence(String),
    #[error("stale state: {0}")]
    StaleState(String),
    #[error("state gap: {0}")]
    StateGap(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("solver limit: {0}")]
    SolverLimit(String),
    #[error("unbounded: {0}")]
    Unbounded(String),

    // results store
    #[error("layout frozen")]
    LayoutFrozen,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("unknown key {0}")]
    UnknownKey(String),
    #[error("store format: {0}")]
    StoreFormat(String),
    #[error("io: {0}")]
    Io(String),

    // simulation
    #[error("invalid simulation status: {0}")]
    Status(String),
}
