//! Independent re-derivations used to cross-check the rate formulas.
//!
//! * [`logdet`]: jointly Gaussian mutual information straight from the
//!   covariance of the linear channel model, plus the mapping from every
//!   closed-form bracket of [`crate::gaussian`] to the MI it stands for.
//! * [`ru_sweep`]: the six-inequality system of the GQF error analysis,
//!   with the relay index rate eliminated numerically.
//!
//! Nothing here calls the formula code it checks.

pub mod logdet;
pub mod ru_sweep;

use thiserror::Error;

use crate::dm::DmError;
use crate::gaussian::GaussianError;

pub use logdet::{
    build_covariance, cf_binning_sides, gaussian_mi, oracle_brackets, GaussVar, GaussianVectorModel, OracleBrackets,
    Slot,
};
pub use ru_sweep::{
    gqf_cmacr_region_via_ru_sweep, gqf_region_via_ru_sweep, region_at_ru, ru_inequalities, ru_minimum, RuInequality,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("covariance of {{{0}}} is singular")]
    SingularCovariance(String),
    #[error("variable {0} is not part of the model")]
    UnknownVariable(GaussVar),
    #[error("variable sets must be disjoint")]
    OverlappingSets,
    #[error("covariance is not symmetric positive semidefinite: {0}")]
    NotPsd(String),
    #[error(transparent)]
    Dm(#[from] DmError),
    #[error(transparent)]
    Gaussian(#[from] GaussianError),
}
