use thiserror::Error;

use crate::lie::GroupKind;

#[derive(Debug, Error)]
pub enum Error {
    #[error("context mismatch: {left} vs {right}")]
    ContextMismatch { left: GroupKind, right: GroupKind },

    #[error("matrix is not in the Lie algebra (residual {residual:.3e})")]
    NotInAlgebra { residual: f64 },

    #[error("matrix is not in the group: {0}")]
    NotInGroup(String),

    #[error("singular matrix: {0}")]
    Singular(&'static str),

    #[error("bilinear form is degenerate on the basis")]
    DegenerateForm,

    #[error("invalid involution: {0}")]
    InvalidInvolution(String),

    #[error("point outside the domain I: {0}")]
    OutsideDomain(String),

    #[error("finite-difference step {0:e} is below 1e-12")]
    StepTooSmall(f64),

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("rank-0 point: the bivector vanishes and there is no leaf to trace")]
    RankZero,

    #[error("{what}: the two computation routes disagree by {residual:.3e}")]
    InternalMismatch { what: &'static str, residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
