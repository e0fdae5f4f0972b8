use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid bounds at coordinate {index}: lower = {lower}, upper = {upper}")]
    InvalidBounds { index: usize, lower: f64, upper: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("column {0} of the design matrix is zero")]
    ZeroColumn(usize),

    #[error("row {0} of the design matrix is zero")]
    ZeroRow(usize),

    #[error("primal point violates the box at coordinate {0}")]
    InfeasiblePoint(usize),

    #[error("dual scaling needs finite upper bounds on every coordinate")]
    WrongVariant,

    #[error("translation vector is not interior: a_{index}^T t = {value}")]
    NotInterior { index: usize, value: f64 },

    #[error("no interior translation vector: a_{index}^T t = {value} is not below {threshold}")]
    NoInteriorPoint { index: usize, value: f64, threshold: f64 },

    #[error("Gram matrix A^T A is singular or rank deficient")]
    SingularGram,

    #[error("dual point is not feasible")]
    DualInfeasible,

    #[error("negative duality gap {0}")]
    NegativeGap(f64),

    #[error("duality gap {0} is below the round-off floor; primal or dual point inconsistent")]
    InconsistentGap(f64),

    #[error("coordinate {0} is not in the preserved set")]
    IndexOutOfPreserved(usize),

    #[error("step size too large: objective went from {before} to {after}")]
    StepSizeTooLarge { before: f64, after: f64 },

    #[error("restricted least-squares subproblem is numerically singular ({0} passive columns)")]
    SingularSubproblem(usize),

    #[error("solver stopped after {rounds} rounds with gap {gap}")]
    NotConverged { rounds: usize, gap: f64 },

    #[error("bad generator spec: {0}")]
    BadSpec(String),

    #[error("bad solver config: {0}")]
    BadConfig(String),

    #[error("parse error in {file} at line {line}, column {column}: {message}")]
    Parse {
        file: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Failures of the numerics, as opposed to bad input or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularGram
                | Error::NoInteriorPoint { .. }
                | Error::NotInterior { .. }
                | Error::DualInfeasible
                | Error::NegativeGap(_)
                | Error::InconsistentGap(_)
                | Error::StepSizeTooLarge { .. }
                | Error::SingularSubproblem(_)
                | Error::NotConverged { .. }
        )
    }
}
