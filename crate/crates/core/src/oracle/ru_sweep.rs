//! GQF bounds from the raw error-analysis inequality system.
//!
//! For destination `k` the decoder succeeds when
//!
//! ```text
//! R1        < β I(X11; X21,Yk1,ŶR)                   + (1-β) I(X12; X22,XR,Yk2)
//! R1 + RU   < β[I(X11,ŶR; X21,Yk1) + I(X11;ŶR)]      + (1-β) I(X12,XR; X22,Yk2)
//! R2        < β I(X21; X11,Yk1,ŶR)                   + (1-β) I(X22; X12,XR,Yk2)
//! R2 + RU   < β[I(X21,ŶR; X11,Yk1) + I(X21;ŶR)]      + (1-β) I(X22,XR; X12,Yk2)
//! R1+R2     < β[I(X11,X21; Yk1,ŶR) + I(X11;X21)]     + (1-β) I(X12,X22; XR,Yk2)
//! R1+R2+RU  < β[I(X11,X21,ŶR; Yk1) + I(X11,X21;ŶR)]  + (1-β)[I(X12,X22,XR; Yk2) + I(X12,X22;XR)]
//! ```
//!
//! while the relay's quantization succeeds for `RU > β I(YR;ŶR)`. The
//! independence terms are evaluated, not dropped. Every admissible `RU` is
//! tried on a grid starting at the covering minimum and the union of the
//! resulting (R1, R2, sum) boxes is reported.

use crate::dm::{DmChannelSpec, JointPmf, VarId};
use crate::types::{clamp_region, RateRegion, SlotFraction};

use super::OracleError;

/// `r1·R1 + r2·R2 + ru·RU < rhs`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuInequality {
    pub r1: u8,
    pub r2: u8,
    pub ru: u8,
    pub rhs: f64,
}

fn mi(p: &JointPmf, a: &[VarId], b: &[VarId]) -> Result<f64, OracleError> {
    Ok(p.mutual_information(a, b, &[])?)
}

/// The six inequalities decoded at destination `k`.
pub fn ru_inequalities(spec: &DmChannelSpec, beta: SlotFraction, k: usize) -> Result<Vec<RuInequality>, OracleError> {
    use VarId::*;
    let (y1, y2) = match k {
        1 => (Y11, Y12),
        2 => (Y21, Y22),
        _ => return Err(OracleError::InvalidParams(format!("destination {k}"))),
    };
    let s1 = spec.build_slot1_joint()?;
    let s2 = spec.build_slot2_joint()?;
    let (b1, b2) = (beta.get(), 1.0 - beta.get());
    let weighted = |x: f64, y: f64| b1 * x + b2 * y;
    let ineq = |r1, r2, ru, rhs| RuInequality { r1, r2, ru, rhs };
    Ok(vec![
        ineq(1, 0, 0, weighted(mi(&s1, &[X11], &[X21, y1, YhR])?, mi(&s2, &[X12], &[X22, XR, y2])?)),
        ineq(
            1,
            0,
            1,
            weighted(
                mi(&s1, &[X11, YhR], &[X21, y1])? + mi(&s1, &[X11], &[YhR])?,
                mi(&s2, &[X12, XR], &[X22, y2])?,
            ),
        ),
        ineq(0, 1, 0, weighted(mi(&s1, &[X21], &[X11, y1, YhR])?, mi(&s2, &[X22], &[X12, XR, y2])?)),
        ineq(
            0,
            1,
            1,
            weighted(
                mi(&s1, &[X21, YhR], &[X11, y1])? + mi(&s1, &[X21], &[YhR])?,
                mi(&s2, &[X22, XR], &[X12, y2])?,
            ),
        ),
        ineq(
            1,
            1,
            0,
            weighted(
                mi(&s1, &[X11, X21], &[y1, YhR])? + mi(&s1, &[X11], &[X21])?,
                mi(&s2, &[X12, X22], &[XR, y2])?,
            ),
        ),
        ineq(
            1,
            1,
            1,
            weighted(
                mi(&s1, &[X11, X21, YhR], &[y1])? + mi(&s1, &[X11, X21], &[YhR])?,
                mi(&s2, &[X12, X22, XR], &[y2])? + mi(&s2, &[X12, X22], &[XR])?,
            ),
        ),
    ])
}

/// Smallest index rate the relay's quantizer can use: `β I(YR;ŶR)`.
pub fn ru_minimum(spec: &DmChannelSpec, beta: SlotFraction) -> Result<f64, OracleError> {
    let s1 = spec.build_slot1_joint()?;
    Ok(beta.get() * mi(&s1, &[VarId::YR], &[VarId::YhR])?)
}

/// (R1, R2, sum) box implied by the system at a fixed index rate.
pub fn region_at_ru(system: &[RuInequality], ru: f64) -> RateRegion {
    let mut bound = [f64::INFINITY; 3];
    for q in system {
        let slot = match (q.r1, q.r2) {
            (1, 0) => 0,
            (0, 1) => 1,
            _ => 2,
        };
        bound[slot] = bound[slot].min(q.rhs - f64::from(q.ru) * ru);
    }
    clamp_region(bound[0], bound[1], bound[2])
}

const RU_GRID: usize = 9;

fn union_over_ru(system: &[RuInequality], ru_min: f64) -> RateRegion {
    let step = 0.25 * ru_min.max(1e-3);
    let mut best = region_at_ru(system, ru_min);
    for n in 1..RU_GRID {
        let r = region_at_ru(system, ru_min + step * n as f64);
        best.r1_max = best.r1_max.max(r.r1_max);
        best.r2_max = best.r2_max.max(r.r2_max);
        best.sum_max = best.sum_max.max(r.sum_max);
    }
    best.with_terms([("R_U".to_string(), ru_min)])
}

/// GQF region of the MARC (destination 1) via index-rate elimination.
pub fn gqf_region_via_ru_sweep(spec: &DmChannelSpec, beta: SlotFraction) -> Result<RateRegion, OracleError> {
    let system = ru_inequalities(spec, beta, 1)?;
    Ok(union_over_ru(&system, ru_minimum(spec, beta)?))
}

/// GQF region of the compound MAC: both destinations' systems must hold.
/// A destination whose outputs are constant in both slots is skipped.
pub fn gqf_cmacr_region_via_ru_sweep(spec: &DmChannelSpec, beta: SlotFraction) -> Result<RateRegion, OracleError> {
    let a = spec.alphabets();
    let mut system = Vec::new();
    for (k, n1, n2) in [(1, a.y11, a.y12), (2, a.y21, a.y22)] {
        if n1 * n2 > 1 {
            system.extend(ru_inequalities(spec, beta, k)?);
        }
    }
    if system.is_empty() {
        return Err(OracleError::Dm(crate::dm::DmError::NoDestination));
    }
    Ok(union_over_ru(&system, ru_minimum(spec, beta)?))
}
