use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("sample space is empty")]
    EmptySpace,

    #[error("outcome labels must be unique and nonempty (offending label {0:?})")]
    BadLabel(String),

    #[error("events belong to different sample spaces (sizes {left} and {right})")]
    MixedSpaces { left: usize, right: usize },

    #[error("not a partition: {0}")]
    NotAPartition(String),

    #[error("family of events is not a sigma-algebra: {0}")]
    NotASigmaAlgebra(String),

    #[error("explicit enumeration of 2^{atoms} events exceeds the bound of {bound} atoms")]
    TooManyAtoms { atoms: usize, bound: usize },

    #[error("time {0} is not on the time axis")]
    TimeNotOnAxis(String),

    #[error("invalid time axis: {0}")]
    InvalidAxis(String),

    #[error("invalid filtration: {0}")]
    InvalidFiltration(String),

    #[error("not a stopping time: {{tau <= {time}}} splits block {block}")]
    NotAStoppingTime { time: String, block: String },

    #[error("bad generator configuration: {0}")]
    BadConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
