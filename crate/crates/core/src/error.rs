use crate::bvp::UnsolvableReport;
use crate::eigenbasis::MultiIndex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("root refinement did not converge in [{lo}, {hi}] after {iterations} iterations")]
    Convergence { lo: f64, hi: f64, iterations: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("multi-index {0} is not in the table")]
    NotInTable(MultiIndex),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("boundary value problem is not solvable (Fredholm defect {})", .0.fredholm_defect)]
    Unsolvable(Box<UnsolvableReport>),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
