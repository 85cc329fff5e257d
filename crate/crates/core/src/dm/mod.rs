//! Exact information measures for finite-alphabet channels.
//!
//! A [`DmChannelSpec`] fixes the product input distribution, the relay's
//! test channel and both slot transition laws. The slot joints built from it
//! are dense [`JointPmf`] tensors; every entropy and mutual information is
//! evaluated by brute-force marginalization.

mod channel;
mod pmf;

pub use channel::{Alphabets, DmChannelSpec, SLOT1_VARS, SLOT2_VARS};
pub use pmf::{JointPmf, VarId, MAX_ENTRIES, PMF_TOL};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DmError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("variable {0} is not part of this pmf")]
    UnknownVariable(VarId),
    #[error("unknown variable name {0:?}")]
    UnknownVariableName(String),
    #[error("variable {0} appears twice")]
    DuplicateVariable(VarId),
    #[error("variable {0} appears in more than one argument set")]
    OverlappingSets(VarId),
    #[error("variable {0} has an empty alphabet")]
    EmptyAlphabet(VarId),
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),
    #[error("product alphabet exceeds {limit} entries")]
    TooLarge { limit: usize },
    #[error("no active destination: every destination has singleton outputs in both slots")]
    NoDestination,
    #[error("invalid channel document: {0}")]
    Json(String),
}
