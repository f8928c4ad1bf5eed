use alloc::string::String;

/// Errors raised by the model, mechanisms, and metrics.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("number of active graders {n_active} exceeds population size {population}")]
    ActiveCountOutOfRange { n_active: usize, population: usize },
    #[error("no simple {degree}-regular graph on {n} vertices found after {attempts} attempts")]
    GraphGeneration { n: usize, degree: usize, attempts: usize },
    #[error("{n} agents cannot be partitioned into grading clusters of 4")]
    ClusterSize { n: usize },
    #[error("grading graph has no cluster structure")]
    NotClustered,
    #[error("{0} is outside the domain of the function")]
    Domain(f64),
    #[error("every submission needs {expected} reports, found {found}")]
    MissingReports { expected: usize, found: usize },
    #[error("not enough grading tasks for penalty selection")]
    InsufficientTasks,
    #[error("agent {agent} did not grade submission {submission}")]
    NotAGrader { agent: usize, submission: usize },
    #[error("metric is undefined: {0}")]
    Degenerate(&'static str),
    #[error("mechanism `{0}` needs parameter estimates")]
    MissingEstimate(String),
    #[error("unknown mechanism `{0}`")]
    UnknownMechanism(String),
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
    #[error("unknown divergence `{0}`")]
    UnknownDivergence(String),
}

pub type Result<T> = core::result::Result<T, Error>;
