//! Closed-form rates of the Gaussian half-duplex MARC.
//!
//! Channel model (unit-variance noises, independent Gaussian inputs):
//!
//! ```text
//! slot 1:  Y11 = h11 X11 + h21 X21 + Z11      YR = h1R X11 + h2R X21 + ZR
//! slot 2:  Y12 = h11 X12 + h21 X22 + hR1 XR + Z12
//! relay:   ŶR = YR + ZQ,  var(ZQ) = σ_Q²
//! ```
//!
//! With `A = 1 + h11²P11 + h21²P21`, `N = (h11 h2R - h1R h21)² P11 P21 +
//! h1R² P11 + h2R² P21`, `B = 1 + h11²P12 + h21²P22` and `C = B + hR1² PR`
//! the GQF sum-rate branches are
//!
//! ```text
//! I1(σ) = β/2 log2(A + N/(1+σ))    + (1-β)/2 log2(B)
//! I2(σ) = β/2 log2(A σ/(1+σ))      + (1-β)/2 log2(C)
//! ```
//!
//! `I1` decreases and `I2` increases in σ, so the max-min sum rate sits at
//! their crossing, which coincides with the smallest quantization noise the
//! CF binning constraint admits.

use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{clamp_region, ParamError, RateRegion, SchemeId, SlotFraction};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GaussianError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("I1 and I2 do not cross; best endpoint sigmaQ2 = {sigma}, sum rate {sum_rate}")]
    NoCrossing { sigma: f64, sum_rate: f64 },
    #[error("relay-destination link carries nothing (hR1^2 PR = 0); no finite sigmaQ2 satisfies the CF constraint")]
    DegenerateRelayLink,
    #[error(transparent)]
    Param(#[from] ParamError),
}

/// Gains and powers of the Gaussian HD-MARC. Noise variances are 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarcChannel {
    pub h11: f64,
    pub h21: f64,
    #[serde(rename = "h1R")]
    pub h1r: f64,
    #[serde(rename = "h2R")]
    pub h2r: f64,
    #[serde(rename = "hR1")]
    pub hr1: f64,
    #[serde(rename = "P11")]
    pub p11: f64,
    #[serde(rename = "P12")]
    pub p12: f64,
    #[serde(rename = "P21")]
    pub p21: f64,
    #[serde(rename = "P22")]
    pub p22: f64,
    #[serde(rename = "PR")]
    pub pr: f64,
}

impl MarcChannel {
    /// Unit powers, direct gains 1, a strong first source-relay link
    /// (h1R = 3), a weak second one (h2R = 0.5) and hR1 = 3.
    pub fn reference() -> Self {
        MarcChannel {
            h11: 1.0,
            h21: 1.0,
            h1r: 3.0,
            h2r: 0.5,
            hr1: 3.0,
            p11: 1.0,
            p12: 1.0,
            p21: 1.0,
            p22: 1.0,
            pr: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), GaussianError> {
        let gains = [("h11", self.h11), ("h21", self.h21), ("h1R", self.h1r), ("h2R", self.h2r), ("hR1", self.hr1)];
        for (name, g) in gains {
            if !g.is_finite() {
                return Err(GaussianError::InvalidParams(format!("{name} = {g} is not finite")));
            }
        }
        let powers = [("P11", self.p11), ("P12", self.p12), ("P21", self.p21), ("P22", self.p22), ("PR", self.pr)];
        for (name, p) in powers {
            if !(p.is_finite() && p >= 0.0) {
                return Err(GaussianError::InvalidParams(format!("{name} = {p} must be a finite power >= 0")));
            }
        }
        Ok(())
    }

    /// `A = 1 + h11²P11 + h21²P21`
    fn a(&self) -> f64 {
        1.0 + self.h11 * self.h11 * self.p11 + self.h21 * self.h21 * self.p21
    }

    /// Relay-side gain `N` added to `A` when ŶR is observed noiselessly.
    fn n(&self) -> f64 {
        let cross = self.h11 * self.h2r - self.h1r * self.h21;
        cross * cross * self.p11 * self.p21 + self.h1r * self.h1r * self.p11 + self.h2r * self.h2r * self.p21
    }

    /// `B = 1 + h11²P12 + h21²P22`
    fn b(&self) -> f64 {
        1.0 + self.h11 * self.h11 * self.p12 + self.h21 * self.h21 * self.p22
    }

    fn relay_snr(&self) -> f64 {
        self.hr1 * self.hr1 * self.pr
    }

    /// `(h_i1, h_iR, P_i1, P_i2)` for source `i`.
    fn source(&self, i: usize) -> Result<(f64, f64, f64, f64), GaussianError> {
        match i {
            1 => Ok((self.h11, self.h1r, self.p11, self.p12)),
            2 => Ok((self.h21, self.h2r, self.p21, self.p22)),
            _ => Err(GaussianError::InvalidParams(format!("source index {i} (expected 1 or 2)"))),
        }
    }
}

/// A channel evaluated at a fixed slot fraction and quantization noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMarcParams {
    pub channel: MarcChannel,
    pub beta: SlotFraction,
    #[serde(rename = "sigmaQ2")]
    pub sigma_q2: f64,
}

impl GaussianMarcParams {
    pub fn new(channel: MarcChannel, beta: SlotFraction, sigma_q2: f64) -> Result<Self, GaussianError> {
        let p = GaussianMarcParams { channel, beta, sigma_q2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), GaussianError> {
        self.channel.validate()?;
        if !(self.sigma_q2.is_finite() && self.sigma_q2 > 0.0) {
            return Err(GaussianError::InvalidParams(format!(
                "sigmaQ2 = {} must be finite and > 0",
                self.sigma_q2
            )));
        }
        Ok(())
    }
}

/// Per-slot mutual informations (bits, unweighted) making up one bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotPair {
    pub slot1: f64,
    pub slot2: f64,
}

impl SlotPair {
    pub fn weighted(&self, beta: SlotFraction) -> f64 {
        beta.listen() * self.slot1 + beta.transmit() * self.slot2
    }
}

/// The two branches of an individual-rate bound for one source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndividualBrackets {
    /// Joint decoding with the quantized relay observation as side information.
    pub first: SlotPair,
    /// Joint decoding that also resolves the relay codeword.
    pub second: SlotPair,
}

/// The `I1`/`I2` branches of the sum-rate bound, per slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumBrackets {
    pub i1: SlotPair,
    pub i2: SlotPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumRateTerms {
    #[serde(rename = "I1")]
    pub i1: f64,
    #[serde(rename = "I2")]
    pub i2: f64,
}

impl SumRateTerms {
    pub fn max_min(&self) -> f64 {
        self.i1.min(self.i2)
    }
}

fn half_log2(x: f64) -> f64 {
    0.5 * x.log2()
}

/// `½ log2(1 + x)` without cancellation for small `x`.
fn half_log2_1p(x: f64) -> f64 {
    0.5 * x.ln_1p() / std::f64::consts::LN_2
}

pub fn individual_brackets(p: &GaussianMarcParams, i: usize) -> Result<IndividualBrackets, GaussianError> {
    p.validate()?;
    let ch = &p.channel;
    let (hd, hr, p1, p2) = ch.source(i)?;
    let s = p.sigma_q2;
    let direct1 = hd * hd * p1;
    Ok(IndividualBrackets {
        first: SlotPair {
            slot1: half_log2(1.0 + direct1 + hr * hr * p1 / (1.0 + s)),
            slot2: half_log2(1.0 + hd * hd * p2),
        },
        second: SlotPair {
            slot1: half_log2((1.0 + direct1) * s / (1.0 + s)),
            slot2: half_log2(1.0 + hd * hd * p2 + ch.relay_snr()),
        },
    })
}

pub fn sum_brackets(p: &GaussianMarcParams) -> Result<SumBrackets, GaussianError> {
    p.validate()?;
    let ch = &p.channel;
    let s = p.sigma_q2;
    Ok(SumBrackets {
        i1: SlotPair {
            slot1: half_log2(ch.a() + ch.n() / (1.0 + s)),
            slot2: half_log2(ch.b()),
        },
        i2: SlotPair {
            slot1: half_log2(ch.a() * s / (1.0 + s)),
            slot2: half_log2(ch.b() + ch.relay_snr()),
        },
    })
}

/// GQF individual-rate bound for source `i`, clamped at zero.
pub fn gqf_individual_rate(p: &GaussianMarcParams, i: usize) -> Result<f64, GaussianError> {
    let b = individual_brackets(p, i)?;
    Ok(b.first.weighted(p.beta).min(b.second.weighted(p.beta)).max(0.0))
}

pub fn gqf_sum_terms(p: &GaussianMarcParams) -> Result<SumRateTerms, GaussianError> {
    let b = sum_brackets(p)?;
    Ok(SumRateTerms {
        i1: b.i1.weighted(p.beta),
        i2: b.i2.weighted(p.beta),
    })
}

/// GQF region at fixed `(β, σ_Q²)`.
pub fn gqf_region(p: &GaussianMarcParams) -> Result<RateRegion, GaussianError> {
    let r1 = gqf_individual_rate(p, 1)?;
    let r2 = gqf_individual_rate(p, 2)?;
    let t = gqf_sum_terms(p)?;
    Ok(clamp_region(r1, r2, t.max_min()).with_terms([("I1".to_string(), t.i1), ("I2".to_string(), t.i2)]))
}

/// `I1(σ) - I2(σ)` in a form that stays accurate for large σ.
fn sum_branch_gap(ch: &MarcChannel, beta: SlotFraction, sigma: f64) -> f64 {
    let a = ch.a();
    beta.listen() * half_log2_1p((a + ch.n()) / (a * sigma)) - beta.transmit() * half_log2_1p(ch.relay_snr() / ch.b())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaOptimum {
    pub sigma: f64,
    pub sum_rate: f64,
}

const SIGMA_BRACKET: (f64, f64) = (1e-9, 1e9);
const SIGMA_LIMITS: (f64, f64) = (1e-300, 1e300);

fn max_min_at(ch: &MarcChannel, beta: SlotFraction, sigma: f64) -> Result<f64, GaussianError> {
    let t = gqf_sum_terms(&GaussianMarcParams::new(*ch, beta, sigma)?)?;
    Ok(t.max_min().max(0.0))
}

fn best_endpoint(ch: &MarcChannel, beta: SlotFraction, lo: f64, hi: f64) -> Result<GaussianError, GaussianError> {
    let (v_lo, v_hi) = (max_min_at(ch, beta, lo)?, max_min_at(ch, beta, hi)?);
    let (sigma, sum_rate) = if v_hi >= v_lo { (hi, v_hi) } else { (lo, v_lo) };
    Ok(GaussianError::NoCrossing { sigma, sum_rate })
}

/// The σ_Q² maximizing `min(I1, I2)` at fixed β, found by bisecting the
/// monotone gap `I1 - I2` in log σ.
///
/// Returns [`GaussianError::NoCrossing`] carrying the better bracket
/// endpoint when the branches never cross (a relay link with `hR1² PR = 0`).
pub fn gqf_optimize_sigma(ch: &MarcChannel, beta: SlotFraction) -> Result<SigmaOptimum, GaussianError> {
    ch.validate()?;
    let (mut lo, mut hi) = SIGMA_BRACKET;
    if ch.relay_snr() <= 0.0 {
        return Err(best_endpoint(ch, beta, lo, hi)?);
    }
    while sum_branch_gap(ch, beta, lo) <= 0.0 && lo > SIGMA_LIMITS.0 {
        lo *= 1e-3;
    }
    while sum_branch_gap(ch, beta, hi) > 0.0 && hi < SIGMA_LIMITS.1 {
        hi *= 1e3;
    }
    if sum_branch_gap(ch, beta, lo) <= 0.0 || sum_branch_gap(ch, beta, hi) > 0.0 {
        return Err(best_endpoint(ch, beta, lo, hi)?);
    }
    for _ in 0..400 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if sum_branch_gap(ch, beta, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let sigma = 0.5 * (lo + hi);
    Ok(SigmaOptimum {
        sigma,
        sum_rate: max_min_at(ch, beta, sigma)?,
    })
}

/// Smallest σ_Q² for which the CF binning constraint can hold:
/// `(1 + N/A) / ((1 + hR1²PR/B)^((1-β)/β) - 1)`.
pub fn cf_sigma_min(ch: &MarcChannel, beta: SlotFraction) -> Result<f64, GaussianError> {
    ch.validate()?;
    let num = 1.0 + ch.n() / ch.a();
    let exponent = beta.transmit() / beta.listen();
    let den = (exponent * (ch.relay_snr() / ch.b()).ln_1p()).exp_m1();
    if !(den > 0.0) {
        return Err(GaussianError::DegenerateRelayLink);
    }
    Ok(num / den)
}

/// Two-slot MAC with the relay silent (the σ_Q² → ∞ limit of the CF rates).
pub fn two_slot_no_relay(ch: &MarcChannel, beta: SlotFraction) -> Result<RateRegion, GaussianError> {
    ch.validate()?;
    let r = |i: usize| -> Result<f64, GaussianError> {
        let (hd, _, p1, p2) = ch.source(i)?;
        Ok(beta.listen() * half_log2(1.0 + hd * hd * p1) + beta.transmit() * half_log2(1.0 + hd * hd * p2))
    };
    let sum = beta.listen() * half_log2(ch.a()) + beta.transmit() * half_log2(ch.b());
    Ok(clamp_region(r(1)?, r(2)?, sum))
}

fn cf_bounds_at(ch: &MarcChannel, beta: SlotFraction, sigma: f64) -> Result<RateRegion, GaussianError> {
    let p = GaussianMarcParams::new(*ch, beta, sigma)?;
    let r1 = individual_brackets(&p, 1)?.first.weighted(beta);
    let r2 = individual_brackets(&p, 2)?.first.weighted(beta);
    let sum = sum_brackets(&p)?.i1.weighted(beta);
    Ok(clamp_region(r1, r2, sum))
}

/// Modified-CF rates. Below the threshold σ_min the region is reported at
/// σ_min itself with `feasible = false`; equality counts as infeasible.
pub fn cf_rates(p: &GaussianMarcParams) -> Result<RateRegion, GaussianError> {
    p.validate()?;
    let (ch, beta) = (&p.channel, p.beta);
    match cf_sigma_min(ch, beta) {
        Ok(sigma_min) => {
            let feasible = p.sigma_q2 > sigma_min;
            let sigma = if feasible { p.sigma_q2 } else { sigma_min };
            let mut region = cf_bounds_at(ch, beta, sigma)?;
            region.feasible = feasible;
            Ok(region.with_terms([
                ("sigma_min".to_string(), sigma_min),
                ("sigma_eval".to_string(), sigma),
            ]))
        }
        Err(GaussianError::DegenerateRelayLink) => {
            let mut region = two_slot_no_relay(ch, beta)?;
            region.feasible = false;
            Ok(region.with_terms([("degenerate_relay_link".to_string(), 1.0)]))
        }
        Err(e) => Err(e),
    }
}

/// Standard two-user Gaussian MAC with the relay absent.
pub fn no_relay_rates(h11: f64, h21: f64, p1: f64, p2: f64) -> Result<RateRegion, GaussianError> {
    if !(p1.is_finite() && p1 >= 0.0 && p2.is_finite() && p2 >= 0.0) {
        return Err(GaussianError::InvalidParams(format!("powers {p1}, {p2} must be >= 0")));
    }
    if !(h11.is_finite() && h21.is_finite()) {
        return Err(GaussianError::InvalidParams("gains must be finite".into()));
    }
    let s1 = h11 * h11 * p1;
    let s2 = h21 * h21 * p2;
    Ok(clamp_region(half_log2(1.0 + s1), half_log2(1.0 + s2), half_log2(1.0 + s1 + s2)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Sum,
    R1,
    R2,
}

impl Objective {
    pub fn of(self, r: &RateRegion) -> f64 {
        match self {
            Objective::Sum => r.sum_max,
            Objective::R1 => r.r1_max,
            Objective::R2 => r.r2_max,
        }
    }
}

impl FromStr for Objective {
    type Err = GaussianError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sum" => Ok(Objective::Sum),
            "r1" => Ok(Objective::R1),
            "r2" => Ok(Objective::R2),
            _ => Err(GaussianError::InvalidParams(format!("unknown objective {s:?}"))),
        }
    }
}

/// Scheme evaluation at a given β with σ_Q² chosen by the scheme's rule:
/// the GQF crossing point, or just above the CF threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct TunedRegion {
    pub sigma: f64,
    pub region: RateRegion,
}

/// Relative offset above σ_min used when CF runs at its threshold.
pub const CF_THRESHOLD_OFFSET: f64 = 1e-9;

pub fn tuned_region(ch: &MarcChannel, beta: SlotFraction, scheme: SchemeId) -> Result<TunedRegion, GaussianError> {
    match scheme {
        SchemeId::Gqf => {
            let sigma = match gqf_optimize_sigma(ch, beta) {
                Ok(opt) => opt.sigma,
                Err(GaussianError::NoCrossing { sigma, .. }) => sigma,
                Err(e) => return Err(e),
            };
            let region = gqf_region(&GaussianMarcParams::new(*ch, beta, sigma)?)?;
            Ok(TunedRegion { sigma, region })
        }
        SchemeId::Cf => match cf_sigma_min(ch, beta) {
            Ok(sigma_min) => {
                let sigma = sigma_min * (1.0 + CF_THRESHOLD_OFFSET);
                let region = cf_rates(&GaussianMarcParams::new(*ch, beta, sigma)?)?;
                Ok(TunedRegion { sigma, region })
            }
            Err(GaussianError::DegenerateRelayLink) => {
                // any σ gives the same fallback region
                let region = cf_rates(&GaussianMarcParams::new(*ch, beta, 1.0)?)?;
                Ok(TunedRegion { sigma: f64::INFINITY, region })
            }
            Err(e) => Err(e),
        },
        SchemeId::NoRelay => Err(GaussianError::InvalidParams(
            "tuning applies to GQF and CF only".into(),
        )),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaOptimum {
    pub beta: f64,
    pub rate: f64,
    pub sigma: f64,
}

pub const BETA_RANGE: (f64, f64) = (0.01, 0.99);
const BETA_SEEDS: usize = 33;
pub const BETA_TOL: f64 = 1e-6;

/// Maximizes `objective` over β: a 33-point seed grid on `[0.01, 0.99]`
/// followed by golden-section refinement around the best seed.
pub fn optimize_beta(ch: &MarcChannel, scheme: SchemeId, objective: Objective) -> Result<BetaOptimum, GaussianError> {
    ch.validate()?;
    let eval = |b: f64| -> Result<(f64, f64), GaussianError> {
        let t = tuned_region(ch, SlotFraction::new(b)?, scheme)?;
        Ok((objective.of(&t.region), t.sigma))
    };
    let (lo, hi) = BETA_RANGE;
    let step = (hi - lo) / (BETA_SEEDS - 1) as f64;
    let seeds: Vec<f64> = (0..BETA_SEEDS).map(|k| lo + step * k as f64).collect();
    let mut best = (seeds[0], eval(seeds[0])?);
    for &b in &seeds[1..] {
        let v = eval(b)?;
        if v.0 > best.1 .0 {
            best = (b, v);
        }
    }
    let mut a = (best.0 - step).max(lo);
    let mut c = (best.0 + step).min(hi);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = c - inv_phi * (c - a);
    let mut x2 = a + inv_phi * (c - a);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    while c - a > BETA_TOL {
        if f1.0 >= f2.0 {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - inv_phi * (c - a);
            f1 = eval(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (c - a);
            f2 = eval(x2)?;
        }
    }
    for cand in [(x1, f1), (x2, f2)] {
        if cand.1 .0 > best.1 .0 {
            best = cand;
        }
    }
    Ok(BetaOptimum {
        beta: best.0,
        rate: best.1 .0,
        sigma: best.1 .1,
    })
}
