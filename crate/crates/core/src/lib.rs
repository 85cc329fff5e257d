//! Achievable rate regions of the half-duplex multiple-access relay channel
//! (two sources, one relay, one destination) and of the compound MAC with a
//! relay (two destinations), under generalized quantize-and-forward (GQF)
//! and a single-block compress-and-forward (CF) with Wyner-Ziv binning.
//!
//! * [`dm`] and [`dm_regions`] evaluate discrete memoryless channels exactly.
//! * [`gaussian`] holds the closed-form Gaussian rates and the σ_Q² / β optimizers.
//! * [`oracle`] re-derives both from first principles (log-det Gaussian MI and
//!   the quantization-rate elimination of the error analysis).
//! * [`sweep`] and [`verify`] drive the command-line reproductions.
//!
//! All rates are in bits per channel use.

pub mod dm;
pub mod dm_regions;
pub mod gaussian;
pub mod oracle;
pub mod random;
pub mod sweep;
pub mod types;
pub mod verify;

pub use types::{clamp_region, validate_beta, ParamError, RateRegion, SchemeId, SlotFraction};
