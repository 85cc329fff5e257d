//! Seeded invariant suites comparing the rate formulas with the oracles.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dm::{DmChannelSpec, VarId};
use crate::dm_regions::{cf_region_cmacr, cf_region_marc, gqf_region_cmacr, gqf_region_marc};
use crate::gaussian::{
    cf_rates, cf_sigma_min, gqf_optimize_sigma, gqf_region, gqf_sum_terms, individual_brackets, sum_brackets,
    GaussianError, GaussianMarcParams, MarcChannel, SlotPair,
};
use crate::oracle::{cf_binning_sides, gqf_cmacr_region_via_ru_sweep, gqf_region_via_ru_sweep, oracle_brackets};
use crate::random::{random_dm_spec, random_gaussian_params, DmDraw, GaussianDraw};
use crate::types::{RateRegion, SlotFraction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subject {
    ClosedForms,
    DmRegions,
    Reductions,
}

impl Subject {
    pub const ALL: [Subject; 3] = [Subject::ClosedForms, Subject::DmRegions, Subject::Reductions];

    pub fn as_str(self) -> &'static str {
        match self {
            Subject::ClosedForms => "closed-forms",
            Subject::DmRegions => "dm-regions",
            Subject::Reductions => "reductions",
        }
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Subject {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Subject::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| format!("unknown subject {s:?} (expected closed-forms, dm-regions or reductions)"))
    }
}

/// Largest deviation seen by one invariant across all draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub samples: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    /// Draws where an evaluation returned an error.
    pub errors: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub subject: Subject,
    pub seed: u64,
    pub draws: usize,
    pub checks: Vec<Check>,
    pub passed: bool,
}

struct Tally {
    checks: Vec<Check>,
}

impl Tally {
    fn new() -> Self {
        Tally { checks: Vec::new() }
    }

    fn slot(&mut self, name: &str, tolerance: f64) -> &mut Check {
        if let Some(k) = self.checks.iter().position(|c| c.name == name) {
            return &mut self.checks[k];
        }
        self.checks.push(Check {
            name: name.to_string(),
            samples: 0,
            max_deviation: 0.0,
            tolerance,
            errors: 0,
            passed: true,
        });
        self.checks.last_mut().expect("just pushed")
    }

    fn record(&mut self, name: &str, tolerance: f64, deviation: f64) {
        let c = self.slot(name, tolerance);
        c.samples += 1;
        // NaN counts as an unbounded deviation
        let d = if deviation.is_nan() { f64::INFINITY } else { deviation.abs() };
        c.max_deviation = c.max_deviation.max(d);
    }

    fn fail(&mut self, name: &str, tolerance: f64) {
        let c = self.slot(name, tolerance);
        c.samples += 1;
        c.errors += 1;
    }

    fn outcome<T, E>(&mut self, name: &str, tolerance: f64, r: Result<T, E>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(_) => {
                self.fail(name, tolerance);
                None
            }
        }
    }

    fn finish(mut self, subject: Subject, seed: u64, draws: usize) -> VerifyReport {
        for c in &mut self.checks {
            c.passed = c.errors == 0 && c.max_deviation <= c.tolerance;
        }
        let passed = self.checks.iter().all(|c| c.passed);
        VerifyReport {
            subject,
            seed,
            draws,
            checks: self.checks,
            passed,
        }
    }
}

pub const BRACKET_TOL: f64 = 1e-9;
pub const DM_TOL: f64 = 1e-10;
pub const SUM_AGREEMENT_TOL: f64 = 1e-6;

pub fn verify(subject: Subject, seed: u64, draws: usize) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new();
    for _ in 0..draws {
        match subject {
            Subject::ClosedForms => closed_forms_draw(&mut rng, &mut t),
            Subject::DmRegions => dm_regions_draw(&mut rng, &mut t),
            Subject::Reductions => reductions_draw(&mut rng, &mut t),
        }
    }
    t.finish(subject, seed, draws)
}

fn pair_dev(a: &SlotPair, b: &SlotPair) -> f64 {
    (a.slot1 - b.slot1).abs().max((a.slot2 - b.slot2).abs())
}

fn closed_forms_draw(rng: &mut ChaCha8Rng, t: &mut Tally) {
    let p = random_gaussian_params(rng, &GaussianDraw::default());
    bracket_checks(&p, t);
    threshold_checks(&p.channel, p.beta, t);
    let name = "cf_sum_dominates_gqf_max_min";
    if let (Some(cf), Some(g)) = (t.outcome(name, DM_TOL, cf_rates(&p)), t.outcome(name, DM_TOL, gqf_sum_terms(&p))) {
        if cf.feasible {
            t.record(name, DM_TOL, (g.max_min() - cf.sum_max).max(0.0));
        }
    }
}

fn bracket_checks(p: &GaussianMarcParams, t: &mut Tally) {
    let name = "closed_form_brackets_vs_logdet";
    let Some(o) = t.outcome(name, BRACKET_TOL, oracle_brackets(p)) else {
        return;
    };
    for i in 1..=2 {
        let Some(c) = t.outcome(name, BRACKET_TOL, individual_brackets(p, i)) else {
            return;
        };
        let o = &o.individual[i - 1];
        t.record(name, BRACKET_TOL, pair_dev(&c.first, &o.first).max(pair_dev(&c.second, &o.second)));
    }
    if let Some(c) = t.outcome(name, BRACKET_TOL, sum_brackets(p)) {
        t.record(name, BRACKET_TOL, pair_dev(&c.i1, &o.sum.i1).max(pair_dev(&c.i2, &o.sum.i2)));
    }
}

fn threshold_checks(ch: &MarcChannel, beta: SlotFraction, t: &mut Tally) {
    let cross = "sigma_star_equals_sigma_min";
    match (gqf_optimize_sigma(ch, beta), cf_sigma_min(ch, beta)) {
        (Ok(opt), Ok(smin)) => {
            t.record(cross, BRACKET_TOL, (opt.sigma - smin) / smin.max(1.0));
            let sides = "binning_sides_meet_at_sigma_min";
            if let Some((lhs, rhs)) = t.outcome(
                sides,
                BRACKET_TOL,
                GaussianMarcParams::new(*ch, beta, smin)
                    .map_err(crate::oracle::OracleError::from)
                    .and_then(|p| cf_binning_sides(&p)),
            ) {
                t.record(sides, BRACKET_TOL, lhs - rhs);
            }
            let agree = "gqf_sum_equals_cf_sum_at_threshold";
            if let Some(cf) = t.outcome(agree, SUM_AGREEMENT_TOL, GaussianMarcParams::new(*ch, beta, smin).and_then(|p| cf_rates(&p))) {
                t.record(agree, SUM_AGREEMENT_TOL, opt.sum_rate - cf.sum_max);
            }
        }
        // both degenerate together
        (Err(GaussianError::NoCrossing { .. }), Err(GaussianError::DegenerateRelayLink)) => t.record(cross, BRACKET_TOL, 0.0),
        _ => t.fail(cross, BRACKET_TOL),
    }
}

fn region_dev(a: &RateRegion, b: &RateRegion) -> f64 {
    (a.r1_max - b.r1_max)
        .abs()
        .max((a.r2_max - b.r2_max).abs())
        .max((a.sum_max - b.sum_max).abs())
}

/// How far `lo` exceeds `hi` on any bound (0 when `hi` dominates).
fn shortfall(hi: &RateRegion, lo: &RateRegion) -> f64 {
    (lo.r1_max - hi.r1_max)
        .max(lo.r2_max - hi.r2_max)
        .max(lo.sum_max - hi.sum_max)
        .max(0.0)
}

fn invariant_dev(r: &RateRegion) -> f64 {
    let neg = (-r.r1_max).max(-r.r2_max).max(-r.sum_max).max(0.0);
    let cap = (r.sum_max - r.r1_max - r.r2_max).max(0.0);
    let bad = if [r.r1_max, r.r2_max, r.sum_max].iter().all(|x| x.is_finite()) { 0.0 } else { f64::INFINITY };
    neg.max(cap).max(bad)
}

fn random_beta(rng: &mut ChaCha8Rng) -> SlotFraction {
    SlotFraction::new(rng.random_range(0.1..0.9)).expect("inside (0, 1)")
}

fn dm_regions_draw(rng: &mut ChaCha8Rng, t: &mut Tally) {
    let spec = random_dm_spec(rng, DmDraw::default());
    let beta = random_beta(rng);
    let name = "gqf_marc_vs_ru_elimination";
    if let (Some(g), Some(o)) = (
        t.outcome(name, DM_TOL, gqf_region_marc(&spec, beta)),
        t.outcome(name, DM_TOL, gqf_region_via_ru_sweep(&spec, beta)),
    ) {
        t.record(name, DM_TOL, region_dev(&g, &o));
        t.record("region_invariants", 0.0, invariant_dev(&g));
        let dom = "cf_dominates_gqf_when_feasible";
        if let Some(cf) = t.outcome(dom, DM_TOL, cf_region_marc(&spec, beta)) {
            t.record("region_invariants", 0.0, invariant_dev(&cf));
            if cf.feasible {
                t.record(dom, DM_TOL, shortfall(&cf, &g));
            }
        }
    }
    let name = "gqf_cmacr_vs_ru_elimination";
    if let (Some(g), Some(o)) = (
        t.outcome(name, DM_TOL, gqf_region_cmacr(&spec, beta)),
        t.outcome(name, DM_TOL, gqf_cmacr_region_via_ru_sweep(&spec, beta)),
    ) {
        t.record(name, DM_TOL, region_dev(&g, &o));
        t.record("region_invariants", 0.0, invariant_dev(&g));
    }
}

/// `β I(X11;Y11,ŶR) + (1-β) I(X12;Y12|XR)`
pub fn single_source_cf_rate(spec: &DmChannelSpec, beta: SlotFraction) -> Result<f64, crate::dm::DmError> {
    use VarId::*;
    let s1 = spec.build_slot1_joint()?;
    let s2 = spec.build_slot2_joint()?;
    Ok(beta.listen() * s1.mutual_information(&[X11], &[Y11, YhR], &[])?
        + beta.transmit() * s2.mutual_information(&[X12], &[Y12], &[XR])?)
}

fn reductions_draw(rng: &mut ChaCha8Rng, t: &mut Tally) {
    let beta = random_beta(rng);

    let relay = random_dm_spec(rng, DmDraw { single_source: true, ..DmDraw::default() });
    let name = "single_source_gqf_r1_equals_sum";
    if let Some(g) = t.outcome(name, DM_TOL, gqf_region_marc(&relay, beta)) {
        t.record(name, DM_TOL, g.r1_max - g.sum_max);
    }
    let name = "single_source_cf_matches_relay_channel_rate";
    if let (Some(cf), Some(rate)) = (
        t.outcome(name, DM_TOL, cf_region_marc(&relay, beta)),
        t.outcome(name, DM_TOL, single_source_cf_rate(&relay, beta)),
    ) {
        let raw = |k: &str| cf.term(k).unwrap_or(f64::NAN);
        let mut dev = (raw("a1(1)") - rate).abs().max((raw("c1") - rate).abs());
        if cf.feasible {
            dev = dev.max((cf.r1_max - rate).abs()).max((cf.sum_max - rate).abs());
        }
        t.record(name, DM_TOL, dev);
    }

    let marc = random_dm_spec(rng, DmDraw { single_destination: true, ..DmDraw::default() });
    let name = "blind_second_destination_gqf_cmacr_equals_marc";
    if let (Some(a), Some(b)) = (
        t.outcome(name, 0.0, gqf_region_cmacr(&marc, beta)),
        t.outcome(name, 0.0, gqf_region_marc(&marc, beta)),
    ) {
        t.record(name, 0.0, region_dev(&a, &b));
    }
    let name = "blind_second_destination_cf_feasibility_matches_marc";
    if let (Some(a), Some(b)) = (
        t.outcome(name, 0.0, cf_region_cmacr(&marc, beta)),
        t.outcome(name, 0.0, cf_region_marc(&marc, beta)),
    ) {
        t.record(name, 0.0, if a.feasible == b.feasible { region_dev(&a, &b) } else { 1.0 });
    }

    let mut p = random_gaussian_params(rng, &GaussianDraw::default());
    p.channel.p21 = 0.0;
    p.channel.p22 = 0.0;
    let name = "gaussian_single_source_r1_equals_sum";
    if let Some(g) = t.outcome(name, DM_TOL, gqf_region(&p)) {
        let terms = gqf_sum_terms(&p).map(|s| s.max_min().max(0.0)).unwrap_or(f64::NAN);
        t.record(name, DM_TOL, (g.r1_max - terms).abs().max((g.r1_max - g.sum_max).abs()));
    }
}
