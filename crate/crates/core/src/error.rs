use thiserror::Error;

use crate::transforms::Space;

#[derive(Debug, Error)]
pub enum Error {
    #[error("algebra carries no involution")]
    MissingInvolution,
    #[error("algebra carries no cocycle")]
    MissingCocycle,
    #[error("no clear singular-value gap: ratio {ratio:.3} below {required}")]
    RankAmbiguous { ratio: f64, required: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("length mismatch: expected {expected}, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("expected {expected:?} data, got {found:?}")]
    WrongSpaceTag { expected: Space, found: Space },
    #[error("boundary mass {mass:.3e} of peak exceeds {threshold:.1e}; enlarge the domain or narrow the window")]
    BoundaryMass { mass: f64, threshold: f64 },
    #[error("grids differ")]
    GridMismatch,
    #[error("cochain is not skew-symmetric (residual {0:.3e})")]
    NotSkewSymmetric(f64),
    #[error("Borel schedule too aggressive: order {order} Taylor mismatch {error:.3e}")]
    ScheduleTooAggressive { order: usize, error: f64 },
    #[error("kernel quadrature needs ~{work:.2e} operations, limit is {limit:.2e}")]
    CostLimit { work: f64, limit: f64 },
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
