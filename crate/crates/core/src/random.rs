//! Seeded random channels for fuzzing and the `verify` suites.

use rand::Rng;

use crate::dm::{Alphabets, DmChannelSpec};
use crate::gaussian::{GaussianMarcParams, MarcChannel};
use crate::types::SlotFraction;

/// Shape of a random discrete channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmDraw {
    /// Largest alphabet size; each variable gets a size in `2..=max_alphabet`.
    pub max_alphabet: usize,
    /// Make source 2 constant in both slots (`|X21| = |X22| = 1`).
    pub single_source: bool,
    /// Make destination 2 blind (`|Y21| = |Y22| = 1`).
    pub single_destination: bool,
}

impl Default for DmDraw {
    fn default() -> Self {
        DmDraw {
            max_alphabet: 3,
            single_source: false,
            single_destination: false,
        }
    }
}

/// Strictly positive pmf with some skew.
pub fn random_pmf<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.02..1.0f64).powi(2)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

fn conditional<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Vec<f64> {
    (0..rows).flat_map(|_| random_pmf(rng, cols)).collect()
}

pub fn random_dm_spec<R: Rng + ?Sized>(rng: &mut R, draw: DmDraw) -> DmChannelSpec {
    let max = draw.max_alphabet.max(2);
    let mut size = || rng.random_range(2..=max);
    let mut a = Alphabets {
        x11: size(),
        x21: size(),
        x12: size(),
        x22: size(),
        xr: size(),
        yr: size(),
        yhr: size(),
        y11: size(),
        y21: size(),
        y12: size(),
        y22: size(),
    };
    if draw.single_source {
        a.x21 = 1;
        a.x22 = 1;
    }
    if draw.single_destination {
        a.y21 = 1;
        a.y22 = 1;
    }
    let inputs = [
        random_pmf(rng, a.x11),
        random_pmf(rng, a.x21),
        random_pmf(rng, a.x12),
        random_pmf(rng, a.x22),
        random_pmf(rng, a.xr),
    ];
    let tc = conditional(rng, a.yr, a.yhr);
    let slot1 = conditional(rng, a.x11 * a.x21, a.yr * a.y11 * a.y21);
    let slot2 = conditional(rng, a.x12 * a.x22 * a.xr, a.y12 * a.y22);
    DmChannelSpec::new(a, inputs, tc, slot1, slot2).expect("random tables are valid pmfs")
}

/// Ranges for random Gaussian parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianDraw {
    pub gain: (f64, f64),
    pub power: (f64, f64),
    pub beta: (f64, f64),
    /// σ_Q² is drawn log-uniformly over this range.
    pub sigma_q2: (f64, f64),
}

impl Default for GaussianDraw {
    fn default() -> Self {
        GaussianDraw {
            gain: (0.1, 5.0),
            power: (0.1, 5.0),
            beta: (0.1, 0.9),
            sigma_q2: (0.01, 100.0),
        }
    }
}

pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, d: &GaussianDraw) -> MarcChannel {
    let mut g = || rng.random_range(d.gain.0..=d.gain.1);
    let (h11, h21, h1r, h2r, hr1) = (g(), g(), g(), g(), g());
    let mut p = || rng.random_range(d.power.0..=d.power.1);
    MarcChannel {
        h11,
        h21,
        h1r,
        h2r,
        hr1,
        p11: p(),
        p12: p(),
        p21: p(),
        p22: p(),
        pr: p(),
    }
}

pub fn random_gaussian_params<R: Rng + ?Sized>(rng: &mut R, d: &GaussianDraw) -> GaussianMarcParams {
    let channel = random_channel(rng, d);
    let beta = SlotFraction::new(rng.random_range(d.beta.0..=d.beta.1)).expect("beta range inside (0, 1)");
    let (lo, hi) = (d.sigma_q2.0.ln(), d.sigma_q2.1.ln());
    let sigma_q2 = rng.random_range(lo..=hi).exp();
    GaussianMarcParams::new(channel, beta, sigma_q2).expect("drawn parameters are valid")
}
