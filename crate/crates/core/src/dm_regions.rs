//! GQF and modified-CF rate regions of discrete memoryless channels.
//!
//! For destination `k` and source `i` (with `j` the other source) the GQF
//! building blocks are
//!
//! ```text
//! a_k(i) = β I(Xi1; Xj1,Yk1,ŶR) + (1-β) I(Xi2; Xj2,XR,Yk2)
//! b_k(i) = β [I(Xi1; Xj1,Yk1) - I(ŶR; YR | Xi1,Xj1,Yk1)] + (1-β) I(Xi2,XR; Xj2,Yk2)
//! c_k    = β I(X11,X21; Yk1,ŶR) + (1-β) I(X12,X22; XR,Yk2)
//! d_k    = β [I(X11,X21,ŶR; Yk1) + I(X11,X21; ŶR) - I(YR; ŶR)] + (1-β) I(X12,X22,XR; Yk2)
//! ```
//!
//! A destination whose outputs are singleton in both slots is treated as
//! absent by the compound-MAC evaluators, so a compound channel with an
//! empty second destination reduces to the single-destination MARC.

use crate::dm::{DmChannelSpec, DmError, JointPmf, VarId};
use crate::types::{clamp_region, RateRegion, SlotFraction};

use VarId::*;

/// Boundary margin for the binning constraint: `rhs - lhs` must exceed it.
pub const CF_MARGIN: f64 = 1e-12;

/// The a/b/c/d terms for one destination, indexed by source (`a[0]` is `a_k(1)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DestinationTerms {
    pub k: usize,
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub c: f64,
    pub d: f64,
}

impl DestinationTerms {
    pub fn named(&self) -> Vec<(String, f64)> {
        let k = self.k;
        vec![
            (format!("a{k}(1)"), self.a[0]),
            (format!("a{k}(2)"), self.a[1]),
            (format!("b{k}(1)"), self.b[0]),
            (format!("b{k}(2)"), self.b[1]),
            (format!("c{k}"), self.c),
            (format!("d{k}"), self.d),
        ]
    }
}

pub(crate) struct Joints {
    pub slot1: JointPmf,
    pub slot2: JointPmf,
}

impl Joints {
    pub fn new(spec: &DmChannelSpec) -> Result<Self, DmError> {
        Ok(Joints {
            slot1: spec.build_slot1_joint()?,
            slot2: spec.build_slot2_joint()?,
        })
    }

    fn i1(&self, a: &[VarId], b: &[VarId], c: &[VarId]) -> Result<f64, DmError> {
        self.slot1.mutual_information(a, b, c)
    }

    fn i2(&self, a: &[VarId], b: &[VarId], c: &[VarId]) -> Result<f64, DmError> {
        self.slot2.mutual_information(a, b, c)
    }
}

/// `(Xi1, Xj1, Xi2, Xj2)` for source `i`.
fn source_vars(i: usize) -> (VarId, VarId, VarId, VarId) {
    if i == 1 {
        (X11, X21, X12, X22)
    } else {
        (X21, X11, X22, X12)
    }
}

/// `(Yk1, Yk2)` for destination `k`.
fn destination_vars(k: usize) -> Result<(VarId, VarId), DmError> {
    match k {
        1 => Ok((Y11, Y12)),
        2 => Ok((Y21, Y22)),
        _ => Err(DmError::DimensionMismatch(format!("destination index {k} (expected 1 or 2)"))),
    }
}

pub(crate) fn terms_from_joints(j: &Joints, beta: SlotFraction, k: usize) -> Result<DestinationTerms, DmError> {
    let (w1, w2) = (beta.listen(), beta.transmit());
    let (yk1, yk2) = destination_vars(k)?;
    let mut a = [0.0; 2];
    let mut b = [0.0; 2];
    for i in 1..=2 {
        let (xi1, xj1, xi2, xj2) = source_vars(i);
        a[i - 1] = w1 * j.i1(&[xi1], &[xj1, yk1, YhR], &[])? + w2 * j.i2(&[xi2], &[xj2, XR, yk2], &[])?;
        b[i - 1] = w1 * (j.i1(&[xi1], &[xj1, yk1], &[])? - j.i1(&[YhR], &[YR], &[xi1, xj1, yk1])?)
            + w2 * j.i2(&[xi2, XR], &[xj2, yk2], &[])?;
    }
    let c = w1 * j.i1(&[X11, X21], &[yk1, YhR], &[])? + w2 * j.i2(&[X12, X22], &[XR, yk2], &[])?;
    let d = w1 * (j.i1(&[X11, X21, YhR], &[yk1], &[])? + j.i1(&[X11, X21], &[YhR], &[])? - j.i1(&[YR], &[YhR], &[])?)
        + w2 * j.i2(&[X12, X22, XR], &[yk2], &[])?;
    Ok(DestinationTerms { k, a, b, c, d })
}

/// GQF terms for destination `k` (1 or 2).
pub fn gqf_terms(spec: &DmChannelSpec, beta: SlotFraction, k: usize) -> Result<DestinationTerms, DmError> {
    terms_from_joints(&Joints::new(spec)?, beta, k)
}

/// Destinations that observe anything: a destination with singleton
/// outputs in both slots is absent.
pub fn active_destinations(spec: &DmChannelSpec) -> Vec<usize> {
    [(1, Y11, Y12), (2, Y21, Y22)]
        .into_iter()
        .filter(|&(_, y1, y2)| !(spec.is_singleton(y1) && spec.is_singleton(y2)))
        .map(|(k, _, _)| k)
        .collect()
}

fn gqf_from_terms(terms: &[DestinationTerms]) -> RateRegion {
    let min_of = |f: &dyn Fn(&DestinationTerms) -> f64| terms.iter().map(f).fold(f64::INFINITY, f64::min);
    let r1 = min_of(&|t| t.a[0]).min(min_of(&|t| t.b[0]));
    let r2 = min_of(&|t| t.a[1]).min(min_of(&|t| t.b[1]));
    let sum = min_of(&|t| t.c).min(min_of(&|t| t.d));
    clamp_region(r1, r2, sum).with_terms(terms.iter().flat_map(|t| t.named()))
}

/// GQF region of the MARC (destination 1 only).
pub fn gqf_region_marc(spec: &DmChannelSpec, beta: SlotFraction) -> Result<RateRegion, DmError> {
    let t = gqf_terms(spec, beta, 1)?;
    Ok(gqf_from_terms(&[t]))
}

/// GQF region of the compound MAC: every bound is the minimum over the
/// active destinations.
pub fn gqf_region_cmacr(spec: &DmChannelSpec, beta: SlotFraction) -> Result<RateRegion, DmError> {
    let ks = active_destinations(spec);
    if ks.is_empty() {
        return Err(DmError::NoDestination);
    }
    let j = Joints::new(spec)?;
    let terms = ks
        .iter()
        .map(|&k| terms_from_joints(&j, beta, k))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(gqf_from_terms(&terms))
}

/// Both sides of the binning constraint for destination `k`:
/// `β [I(YR;ŶR) - I(Yk1;ŶR)]` and `(1-β) I(XR;Yk2)`.
fn binning_sides(j: &Joints, beta: SlotFraction, k: usize) -> Result<(f64, f64), DmError> {
    let (yk1, yk2) = destination_vars(k)?;
    let lhs = beta.listen() * (j.i1(&[YR], &[YhR], &[])? - j.i1(&[yk1], &[YhR], &[])?);
    let rhs = beta.transmit() * j.i2(&[XR], &[yk2], &[])?;
    Ok((lhs, rhs))
}

fn no_relay_from(spec: &DmChannelSpec, beta: SlotFraction, ks: &[usize]) -> Result<RateRegion, DmError> {
    let j = Joints::new(&spec.without_relay())?;
    let terms = ks
        .iter()
        .map(|&k| terms_from_joints(&j, beta, k))
        .collect::<Result<Vec<_>, _>>()?;
    let min_of = |f: &dyn Fn(&DestinationTerms) -> f64| terms.iter().map(f).fold(f64::INFINITY, f64::min);
    Ok(clamp_region(min_of(&|t| t.a[0]), min_of(&|t| t.a[1]), min_of(&|t| t.c)))
}

/// Region with the relay switched off (constant quantizer output, relay
/// pinned to symbol 0), decoded at destination 1.
pub fn no_relay_region_marc(spec: &DmChannelSpec, beta: SlotFraction) -> Result<RateRegion, DmError> {
    no_relay_from(spec, beta, &[1])
}

/// No-relay region decoded at every active destination.
pub fn no_relay_region_cmacr(spec: &DmChannelSpec, beta: SlotFraction) -> Result<RateRegion, DmError> {
    let ks = active_destinations(spec);
    if ks.is_empty() {
        return Err(DmError::NoDestination);
    }
    no_relay_from(spec, beta, &ks)
}

fn cf_region(spec: &DmChannelSpec, beta: SlotFraction, ks: &[usize]) -> Result<RateRegion, DmError> {
    let j = Joints::new(spec)?;
    let mut lhs = f64::NEG_INFINITY;
    let mut rhs = f64::INFINITY;
    let mut r = [f64::INFINITY; 2];
    let mut sum = f64::INFINITY;
    let mut named = Vec::new();
    for &k in ks {
        let t = terms_from_joints(&j, beta, k)?;
        r[0] = r[0].min(t.a[0]);
        r[1] = r[1].min(t.a[1]);
        sum = sum.min(t.c);
        named.extend([
            (format!("a{k}(1)"), t.a[0]),
            (format!("a{k}(2)"), t.a[1]),
            (format!("c{k}"), t.c),
        ]);
        let (l, h) = binning_sides(&j, beta, k)?;
        lhs = lhs.max(l);
        rhs = rhs.min(h);
    }
    named.push(("binning_lhs".to_string(), lhs));
    named.push(("binning_rhs".to_string(), rhs));
    let feasible = rhs - lhs > CF_MARGIN;
    let region = if feasible {
        clamp_region(r[0], r[1], sum)
    } else {
        RateRegion {
            feasible: false,
            ..no_relay_from(spec, beta, ks)?
        }
    };
    Ok(region.with_terms(named))
}

/// Modified-CF region of the MARC. When the binning constraint fails the
/// bounds fall back to [`no_relay_region_marc`] and `feasible` is false.
pub fn cf_region_marc(spec: &DmChannelSpec, beta: SlotFraction) -> Result<RateRegion, DmError> {
    cf_region(spec, beta, &[1])
}

/// Modified-CF region of the compound MAC over the active destinations.
pub fn cf_region_cmacr(spec: &DmChannelSpec, beta: SlotFraction) -> Result<RateRegion, DmError> {
    let ks = active_destinations(spec);
    if ks.is_empty() {
        return Err(DmError::NoDestination);
    }
    cf_region(spec, beta, &ks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dm::Alphabets;
    use crate::random::{random_dm_spec, DmDraw};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bsc(eps: f64) -> impl Fn(usize, usize) -> f64 {
        move |a, b| if a == b { 1.0 - eps } else { eps }
    }

    fn half() -> SlotFraction {
        SlotFraction::new(0.5).unwrap()
    }

    /// Binary MARC: the relay hears X11 xor X21, destination 1 hears both
    /// sources through separate noisy looks, slot 2 adds the relay symbol.
    fn toy_with(test_eps: f64, relay_eps: f64) -> DmChannelSpec {
        let a = Alphabets { y21: 1, y22: 1, y11: 4, y12: 4, ..Alphabets::uniform(2) };
        DmChannelSpec::from_fns(
            a,
            [vec![0.5, 0.5], vec![0.4, 0.6], vec![0.5, 0.5], vec![0.5, 0.5], vec![0.5, 0.5]],
            bsc(test_eps),
            |[x1, x2], [yr, y1, _]| bsc(0.1)(x1 ^ x2, yr) * bsc(0.3)(x1, y1 & 1) * bsc(0.25)(x2, y1 >> 1),
            move |[x1, x2, xr], [y1, _]| bsc(relay_eps)(xr, y1 & 1) * bsc(0.2)(x1 ^ x2, y1 >> 1),
        )
        .unwrap()
    }

    fn with_constant_quantizer(spec: &DmChannelSpec) -> DmChannelSpec {
        let yr = spec.alphabets().yr;
        spec.with_test_channel(1, vec![1.0; yr]).unwrap()
    }

    #[test]
    fn constant_quantizer_removes_yhr_terms() {
        let spec = with_constant_quantizer(&toy_with(0.2, 0.05));
        let j = Joints::new(&spec).unwrap();
        let t = gqf_terms(&spec, half(), 1).unwrap();
        for i in 1..=2 {
            let (xi1, xj1, xi2, xj2) = source_vars(i);
            let b = 0.5 * j.i1(&[xi1], &[xj1, Y11], &[]).unwrap() + 0.5 * j.i2(&[xi2, XR], &[xj2, Y12], &[]).unwrap();
            assert!((t.b[i - 1] - b).abs() < 1e-12);
            let a = 0.5 * j.i1(&[xi1], &[xj1, Y11], &[]).unwrap() + 0.5 * j.i2(&[xi2], &[xj2, XR, Y12], &[]).unwrap();
            assert!((t.a[i - 1] - a).abs() < 1e-12);
        }
        // and the CF constraint has zero left-hand side
        let cf = cf_region_marc(&spec, half()).unwrap();
        assert!(cf.feasible);
        assert!(cf.term("binning_lhs").unwrap().abs() < 1e-12);
    }

    #[test]
    fn identity_quantizer_substitutes_yr() {
        let spec = toy_with(0.2, 0.05).with_test_channel(2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let j = Joints::new(&spec).unwrap();
        let t = gqf_terms(&spec, half(), 1).unwrap();
        let direct = 0.5 * j.i1(&[X11], &[X21, Y11, YR], &[]).unwrap() + 0.5 * j.i2(&[X12], &[X22, XR, Y12], &[]).unwrap();
        assert!((t.a[0] - direct).abs() < 1e-12);
    }

    #[test]
    fn marc_region_is_min_of_terms() {
        let spec = toy_with(0.2, 0.05);
        let t = gqf_terms(&spec, half(), 1).unwrap();
        let r = gqf_region_marc(&spec, half()).unwrap();
        let expect = clamp_region(t.a[0].min(t.b[0]), t.a[1].min(t.b[1]), t.c.min(t.d));
        assert_eq!((r.r1_max, r.r2_max, r.sum_max), (expect.r1_max, expect.r2_max, expect.sum_max));
        assert!(r.feasible);
        assert_eq!(r.term("d1"), Some(t.d));
    }

    #[test]
    fn destination_index_checked() {
        assert!(gqf_terms(&toy_with(0.2, 0.05), half(), 3).is_err());
    }

    #[test]
    fn useless_relay_link_makes_cf_infeasible() {
        // relay symbol never reaches Y12
        let a = Alphabets { y21: 1, y22: 1, ..Alphabets::uniform(2) };
        let spec = DmChannelSpec::from_fns(
            a,
            [vec![0.5, 0.5], vec![0.5, 0.5], vec![0.5, 0.5], vec![0.5, 0.5], vec![0.5, 0.5]],
            bsc(0.1),
            |[x1, x2], [yr, y1, _]| bsc(0.1)(x1 ^ x2, yr) * bsc(0.2)(x1, y1),
            |[x1, x2, _], [y1, _]| bsc(0.1)(x1 ^ x2, y1),
        )
        .unwrap();
        let cf = cf_region_marc(&spec, half()).unwrap();
        assert!(!cf.feasible);
        assert!(cf.term("binning_rhs").unwrap().abs() < 1e-12);
        let nr = no_relay_region_marc(&spec, half()).unwrap();
        assert_eq!((cf.r1_max, cf.r2_max, cf.sum_max), (nr.r1_max, nr.r2_max, nr.sum_max));
        // raw a/c terms are still reported
        assert!(cf.term("a1(1)").is_some() && cf.term("c1").is_some());
    }

    #[test]
    fn cf_feasibility_matches_direct_inequality() {
        for (test_eps, relay_eps) in [(0.0, 0.05), (0.2, 0.05), (0.2, 0.4), (0.45, 0.3)] {
            let spec = toy_with(test_eps, relay_eps);
            let j1 = spec.build_slot1_joint().unwrap();
            let j2 = spec.build_slot2_joint().unwrap();
            let lhs = 0.5 * (j1.mutual_information(&[YR], &[YhR], &[]).unwrap() - j1.mutual_information(&[Y11], &[YhR], &[]).unwrap());
            let rhs = 0.5 * j2.mutual_information(&[XR], &[Y12], &[]).unwrap();
            let cf = cf_region_marc(&spec, half()).unwrap();
            assert_eq!(cf.feasible, lhs < rhs - CF_MARGIN, "eps {test_eps}/{relay_eps}");
            if cf.feasible {
                let t = gqf_terms(&spec, half(), 1).unwrap();
                assert_eq!(cf.r1_max, t.a[0].max(0.0));
            }
        }
    }

    #[test]
    fn symmetric_destinations_match_marc() {
        // second destination sees exact copies of the first
        let a = Alphabets::uniform(2);
        let spec = DmChannelSpec::from_fns(
            a,
            [vec![0.5, 0.5], vec![0.3, 0.7], vec![0.5, 0.5], vec![0.5, 0.5], vec![0.2, 0.8]],
            bsc(0.15),
            |[x1, x2], [yr, y1, y2]| bsc(0.1)(x1 ^ x2, yr) * bsc(0.2)(x1, y1) * ((y2 == y1) as u8 as f64),
            |[x1, x2, xr], [y1, y2]| bsc(0.05)(x1 ^ x2 ^ xr, y1) * ((y2 == y1) as u8 as f64),
        )
        .unwrap();
        let marc = gqf_region_marc(&spec, half()).unwrap();
        let cmacr = gqf_region_cmacr(&spec, half()).unwrap();
        assert!((marc.r1_max - cmacr.r1_max).abs() < 1e-12);
        assert!((marc.r2_max - cmacr.r2_max).abs() < 1e-12);
        assert!((marc.sum_max - cmacr.sum_max).abs() < 1e-12);
        let cf_m = cf_region_marc(&spec, half()).unwrap();
        let cf_c = cf_region_cmacr(&spec, half()).unwrap();
        assert_eq!(cf_m.feasible, cf_c.feasible);
        assert!((cf_m.sum_max - cf_c.sum_max).abs() < 1e-12);
    }

    #[test]
    fn severed_second_relay_link_is_infeasible() {
        let a = Alphabets::uniform(2);
        let spec = DmChannelSpec::from_fns(
            a,
            [vec![0.5, 0.5], vec![0.5, 0.5], vec![0.5, 0.5], vec![0.5, 0.5], vec![0.5, 0.5]],
            bsc(0.1),
            |[x1, x2], [yr, y1, y2]| bsc(0.1)(x1 ^ x2, yr) * bsc(0.2)(x1, y1) * bsc(0.2)(x2, y2),
            |[x1, x2, xr], [y1, y2]| bsc(0.05)(xr, y1) * bsc(0.05)(x1 ^ x2, y2),
        )
        .unwrap();
        assert!(cf_region_marc(&spec, half()).unwrap().feasible);
        let cf = cf_region_cmacr(&spec, half()).unwrap();
        assert!(!cf.feasible);
        assert!(cf.term("binning_rhs").unwrap().abs() < 1e-12);
    }

    #[test]
    fn cmacr_is_min_over_destinations() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let spec = random_dm_spec(&mut rng, DmDraw::default());
            let beta = SlotFraction::new(0.3).unwrap();
            let t1 = gqf_terms(&spec, beta, 1).unwrap();
            let t2 = gqf_terms(&spec, beta, 2).unwrap();
            let r = gqf_region_cmacr(&spec, beta).unwrap();
            let e = clamp_region(
                t1.a[0].min(t2.a[0]).min(t1.b[0].min(t2.b[0])),
                t1.a[1].min(t2.a[1]).min(t1.b[1].min(t2.b[1])),
                t1.c.min(t2.c).min(t1.d.min(t2.d)),
            );
            assert_eq!((r.r1_max, r.r2_max, r.sum_max), (e.r1_max, e.r2_max, e.sum_max));
        }
    }

    #[test]
    fn no_destination_is_an_error() {
        let a = Alphabets { y11: 1, y12: 1, y21: 1, y22: 1, ..Alphabets::uniform(2) };
        let spec = DmChannelSpec::from_fns(
            a,
            [vec![0.5, 0.5], vec![0.5, 0.5], vec![0.5, 0.5], vec![0.5, 0.5], vec![0.5, 0.5]],
            bsc(0.1),
            |[x1, x2], [yr, _, _]| bsc(0.1)(x1 ^ x2, yr),
            |_, _| 1.0,
        )
        .unwrap();
        assert!(active_destinations(&spec).is_empty());
        assert!(matches!(gqf_region_cmacr(&spec, half()), Err(DmError::NoDestination)));
        assert!(matches!(cf_region_cmacr(&spec, half()), Err(DmError::NoDestination)));
    }
}
