use alloc::string::String;
use thiserror::Error;

use crate::partition::AtomId;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("unknown atom {0}")]
    UnknownAtom(AtomId),
    #[error("atom {0} has already been split")]
    NotALeaf(AtomId),
    #[error("cut {cut} is outside the open interval ({lo}, {hi}) on axis {axis}")]
    CutOutside { axis: usize, cut: f64, lo: f64, hi: f64 },
    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("fraction {0} is not in (0, 1)")]
    FractionOutOfRange(f64),
    #[error("operation requires a {0} filtration")]
    ModeMismatch(&'static str),
    #[error("the root atom has no parent")]
    RootHasNoParent,
    #[error("atoms {0} -> {1} do not form a full chain")]
    NotAChain(AtomId, AtomId),
    #[error("degenerate ring: {0}")]
    DegenerateRing(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("space/filtration mismatch: {0}")]
    SpaceMismatch(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = core::result::Result<T, Error>;
