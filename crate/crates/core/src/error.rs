use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("{what}: expected length {expected}, found {found}")]
    Dimension {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("variable {var} has lower bound {lo} above upper bound {hi}")]
    InvertedBounds { var: usize, lo: f64, hi: f64 },
    #[error("simplex did not terminate after {0} iterations")]
    IterationLimit(usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("variable name `{0}` is already in use")]
    DuplicateName(String),
    #[error("variable handle {index} does not belong to this model")]
    StaleHandle { index: usize },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("variable `{name}` has invalid bounds [{lo}, {hi}]")]
    InvalidBounds { name: String, lo: f64, hi: f64 },
    #[error("warm start assignment has length {found}, model has {expected} variables")]
    WarmStartLength { expected: usize, found: usize },
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("sample period must be positive and finite, got {0}")]
    SamplePeriod(f64),
    #[error("system matrices contain non-finite entries")]
    NonFinite,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix exponential series did not converge")]
    NoConvergence,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormulationError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("initial state {0:?} lies outside the workspace")]
    OutsideWorkspace([f64; 4]),
    #[error("initial position ({x}, {y}) lies inside obstacle {obstacle}")]
    InsideObstacle { x: f64, y: f64, obstacle: usize },
    #[error("initial state contains non-finite values")]
    NonFiniteState,
    #[error("clustered formulation needs at least one cluster")]
    NoClusters,
    #[error("solver returned no incumbent to decode")]
    NoIncumbent,
    #[error("solution vector has length {found}, model has {expected} variables")]
    SolutionLength { expected: usize, found: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing required field `{0}`")]
    MissingField(String),
    #[error("field `{field}`: {message}")]
    BadField { field: String, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("trace row {row}: {message}")]
    TraceRow { row: usize, message: String },
    #[error("snapshot step {step} out of range (trace has {len} steps)")]
    StepOutOfRange { step: usize, len: usize },
}
