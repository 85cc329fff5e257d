//! JSON-configured parameter sweeps, single-point evaluation, and CSV /
//! gnuplot emission.
//!
//! See `docs/config.md` for the configuration schema.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dm::DmChannelSpec;
use crate::dm_regions::{
    cf_region_cmacr, cf_region_marc, gqf_region_cmacr, gqf_region_marc, no_relay_region_cmacr, no_relay_region_marc,
};
use crate::gaussian::{
    cf_rates, cf_sigma_min, gqf_optimize_sigma, gqf_region, no_relay_rates, tuned_region, GaussianError,
    GaussianMarcParams, MarcChannel,
};
use crate::types::{RateRegion, SchemeId, SlotFraction};

pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: &str = "swept,scheme,r1,r2,sum,feasible,diag_sigma";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config is not valid JSON for this schema: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("evaluation failed at {point}: {message}")]
    Evaluation { point: String, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl ConfigError {
    fn invalid(msg: impl Into<String>) -> Self {
        ConfigError::Invalid(msg.into())
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Gaussian,
    Dm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Swept {
    #[serde(rename = "sigmaQ2")]
    SigmaQ2,
    #[serde(rename = "beta")]
    Beta,
}

impl Swept {
    pub fn as_str(self) -> &'static str {
        match self {
            Swept::SigmaQ2 => "sigmaQ2",
            Swept::Beta => "beta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default = "default_spacing")]
    pub spacing: Spacing,
}

fn default_spacing() -> Spacing {
    Spacing::Linear
}

impl Grid {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(ConfigError::invalid(format!("grid needs finite min < max (got {} .. {})", self.min, self.max)));
        }
        if self.points < 2 {
            return Err(ConfigError::invalid(format!("grid needs at least 2 points (got {})", self.points)));
        }
        if self.spacing == Spacing::Log && self.min <= 0.0 {
            return Err(ConfigError::invalid("log spacing requires grid.min > 0"));
        }
        Ok(())
    }

    /// Grid values, endpoints included exactly.
    pub fn values(&self) -> Vec<f64> {
        let last = self.points - 1;
        (0..self.points)
            .map(|k| {
                if k == 0 {
                    return self.min;
                }
                if k == last {
                    return self.max;
                }
                let t = k as f64 / last as f64;
                match self.spacing {
                    Spacing::Linear => self.min + (self.max - self.min) * t,
                    Spacing::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * t).exp(),
                }
            })
            .collect()
    }
}

/// Source powers of the relay-free reference MAC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoRelayPowers {
    #[serde(rename = "P1")]
    pub p1: f64,
    #[serde(rename = "P2")]
    pub p2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Network {
    Marc,
    Cmacr,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: u32,
    model: ModelKind,
    params: serde_json::Value,
    #[serde(default)]
    no_relay: Option<NoRelayPowers>,
    #[serde(default)]
    swept: Option<Swept>,
    #[serde(default)]
    grid: Option<Grid>,
    schemes: Vec<SchemeId>,
    #[serde(default)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGaussianParams {
    h11: f64,
    h21: f64,
    #[serde(rename = "h1R")]
    h1r: f64,
    #[serde(rename = "h2R")]
    h2r: f64,
    #[serde(rename = "hR1")]
    hr1: f64,
    #[serde(rename = "P11")]
    p11: f64,
    #[serde(rename = "P12")]
    p12: f64,
    #[serde(rename = "P21")]
    p21: f64,
    #[serde(rename = "P22")]
    p22: f64,
    #[serde(rename = "PR")]
    pr: f64,
    #[serde(default)]
    beta: Option<f64>,
    #[serde(default, rename = "sigmaQ2")]
    sigma_q2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDmParams {
    #[serde(default)]
    spec: Option<serde_json::Value>,
    #[serde(default)]
    spec_file: Option<PathBuf>,
    #[serde(default)]
    beta: Option<f64>,
    #[serde(default)]
    network: Option<Network>,
}

/// Channel parameters with the swept coordinate left open.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    Gaussian {
        channel: MarcChannel,
        beta: Option<SlotFraction>,
        sigma_q2: Option<f64>,
        no_relay: Option<NoRelayPowers>,
    },
    Dm {
        spec: Box<DmChannelSpec>,
        beta: Option<SlotFraction>,
        network: Network,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub params: ModelParams,
    pub swept: Option<Swept>,
    pub grid: Option<Grid>,
    pub schemes: Vec<SchemeId>,
    pub output: Option<PathBuf>,
}

impl SweepConfig {
    /// Parses a config document. `base_dir` resolves a relative
    /// `params.spec_file`.
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        if raw.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::invalid(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                raw.schema_version
            )));
        }
        if raw.schemes.is_empty() {
            return Err(ConfigError::invalid("schemes must list at least one of GQF, CF, NO_RELAY"));
        }
        for (k, s) in raw.schemes.iter().enumerate() {
            if raw.schemes[..k].contains(s) {
                return Err(ConfigError::invalid(format!("scheme {s} listed twice")));
            }
        }
        let beta = |b: Option<f64>| b.map(SlotFraction::new).transpose().map_err(|e| ConfigError::invalid(e.to_string()));
        let params = match raw.model {
            ModelKind::Gaussian => {
                let p: RawGaussianParams =
                    serde_json::from_value(raw.params).map_err(|e| ConfigError::Parse(format!("params: {e}")))?;
                let channel = MarcChannel {
                    h11: p.h11,
                    h21: p.h21,
                    h1r: p.h1r,
                    h2r: p.h2r,
                    hr1: p.hr1,
                    p11: p.p11,
                    p12: p.p12,
                    p21: p.p21,
                    p22: p.p22,
                    pr: p.pr,
                };
                channel.validate().map_err(|e| ConfigError::invalid(e.to_string()))?;
                if let Some(s) = p.sigma_q2 {
                    if !(s.is_finite() && s > 0.0) {
                        return Err(ConfigError::invalid(format!("params.sigmaQ2 = {s} must be > 0")));
                    }
                }
                if raw.schemes.contains(&SchemeId::NoRelay) && raw.no_relay.is_none() {
                    return Err(ConfigError::invalid("scheme NO_RELAY needs a no_relay {P1, P2} block"));
                }
                if let Some(nr) = raw.no_relay {
                    no_relay_rates(channel.h11, channel.h21, nr.p1, nr.p2).map_err(|e| ConfigError::invalid(e.to_string()))?;
                }
                ModelParams::Gaussian {
                    channel,
                    beta: beta(p.beta)?,
                    sigma_q2: p.sigma_q2,
                    no_relay: raw.no_relay,
                }
            }
            ModelKind::Dm => {
                if raw.no_relay.is_some() {
                    return Err(ConfigError::invalid("no_relay applies to the gaussian model only"));
                }
                let p: RawDmParams =
                    serde_json::from_value(raw.params).map_err(|e| ConfigError::Parse(format!("params: {e}")))?;
                let spec: DmChannelSpec = match (p.spec, p.spec_file) {
                    (Some(v), None) => serde_json::from_value(v).map_err(|e| ConfigError::Parse(format!("params.spec: {e}")))?,
                    (None, Some(f)) => {
                        let path = base_dir.join(f);
                        let text = std::fs::read_to_string(&path).map_err(|e| ConfigError::io(&path, e))?;
                        DmChannelSpec::from_json(&text).map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))?
                    }
                    _ => return Err(ConfigError::invalid("dm params need exactly one of spec, spec_file")),
                };
                ModelParams::Dm {
                    spec: Box::new(spec),
                    beta: beta(p.beta)?,
                    network: p.network.unwrap_or(Network::Marc),
                }
            }
        };
        Ok(SweepConfig {
            params,
            swept: raw.swept,
            grid: raw.grid,
            schemes: raw.schemes,
            output: raw.output,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::io(path, e))?;
        SweepConfig::from_json(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Checks that the config describes a sweep and returns its axis and grid.
    pub fn sweep_axis(&self) -> Result<(Swept, Grid), ConfigError> {
        let swept = self.swept.ok_or_else(|| ConfigError::invalid("sweep needs a swept field"))?;
        let grid = self.grid.ok_or_else(|| ConfigError::invalid("sweep needs a grid"))?;
        grid.validate()?;
        match (&self.params, swept) {
            (ModelParams::Gaussian { beta, sigma_q2, .. }, Swept::SigmaQ2) => {
                if sigma_q2.is_some() {
                    return Err(ConfigError::invalid("params.sigmaQ2 must be absent when sweeping sigmaQ2"));
                }
                if beta.is_none() {
                    return Err(ConfigError::invalid("a sigmaQ2 sweep needs params.beta"));
                }
                if grid.min <= 0.0 {
                    return Err(ConfigError::invalid("sigmaQ2 grid must be > 0"));
                }
            }
            (ModelParams::Gaussian { beta, sigma_q2, .. }, Swept::Beta) => {
                if beta.is_some() {
                    return Err(ConfigError::invalid("params.beta must be absent when sweeping beta"));
                }
                if sigma_q2.is_some() {
                    return Err(ConfigError::invalid(
                        "params.sigmaQ2 must be absent in a beta sweep (it is chosen per point)",
                    ));
                }
            }
            (ModelParams::Dm { beta, .. }, Swept::Beta) => {
                if beta.is_some() {
                    return Err(ConfigError::invalid("params.beta must be absent when sweeping beta"));
                }
            }
            (ModelParams::Dm { .. }, Swept::SigmaQ2) => {
                return Err(ConfigError::invalid("dm sweeps support beta only"));
            }
        }
        if swept == Swept::Beta && !(grid.min > 0.0 && grid.max < 1.0) {
            return Err(ConfigError::invalid("beta grid must lie inside (0, 1)"));
        }
        Ok((swept, grid))
    }
}

/// One scheme evaluated at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub swept: f64,
    pub scheme: SchemeId,
    pub region: RateRegion,
    /// σ* for GQF, σ_min for CF (Gaussian only).
    pub diag_sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub swept: Swept,
    pub log_x: bool,
    /// Grouped by scheme (config order), then by increasing swept value.
    pub rows: Vec<SweepRow>,
}

fn point_error(swept: Swept, x: f64, scheme: SchemeId, e: impl std::fmt::Display) -> ConfigError {
    ConfigError::Evaluation {
        point: format!("{}={} ({scheme})", swept.as_str(), fmt_g12(x)),
        message: e.to_string(),
    }
}

fn gqf_sigma_star(ch: &MarcChannel, beta: SlotFraction) -> Result<Option<f64>, GaussianError> {
    match gqf_optimize_sigma(ch, beta) {
        Ok(o) => Ok(Some(o.sigma)),
        Err(GaussianError::NoCrossing { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn cf_threshold(ch: &MarcChannel, beta: SlotFraction) -> Result<Option<f64>, GaussianError> {
    match cf_sigma_min(ch, beta) {
        Ok(s) => Ok(Some(s)),
        Err(GaussianError::DegenerateRelayLink) => Ok(None),
        Err(e) => Err(e),
    }
}

fn gaussian_point(
    channel: &MarcChannel,
    beta: SlotFraction,
    sigma: Option<f64>,
    scheme: SchemeId,
    no_relay: Option<NoRelayPowers>,
) -> Result<(RateRegion, Option<f64>), GaussianError> {
    match (scheme, sigma) {
        (SchemeId::Gqf, Some(s)) => Ok((
            gqf_region(&GaussianMarcParams::new(*channel, beta, s)?)?,
            gqf_sigma_star(channel, beta)?,
        )),
        (SchemeId::Cf, Some(s)) => Ok((
            cf_rates(&GaussianMarcParams::new(*channel, beta, s)?)?,
            cf_threshold(channel, beta)?,
        )),
        (SchemeId::Gqf | SchemeId::Cf, None) => {
            let region = tuned_region(channel, beta, scheme)?.region;
            let diag = match scheme {
                SchemeId::Gqf => gqf_sigma_star(channel, beta)?,
                _ => cf_threshold(channel, beta)?,
            };
            Ok((region, diag))
        }
        (SchemeId::NoRelay, _) => {
            let nr = no_relay.ok_or_else(|| GaussianError::InvalidParams("no_relay powers missing".into()))?;
            Ok((no_relay_rates(channel.h11, channel.h21, nr.p1, nr.p2)?, None))
        }
    }
}

fn dm_point(spec: &DmChannelSpec, beta: SlotFraction, network: Network, scheme: SchemeId) -> Result<RateRegion, crate::dm::DmError> {
    match (network, scheme) {
        (Network::Marc, SchemeId::Gqf) => gqf_region_marc(spec, beta),
        (Network::Marc, SchemeId::Cf) => cf_region_marc(spec, beta),
        (Network::Marc, SchemeId::NoRelay) => no_relay_region_marc(spec, beta),
        (Network::Cmacr, SchemeId::Gqf) => gqf_region_cmacr(spec, beta),
        (Network::Cmacr, SchemeId::Cf) => cf_region_cmacr(spec, beta),
        (Network::Cmacr, SchemeId::NoRelay) => no_relay_region_cmacr(spec, beta),
    }
}

/// Evaluates every scheme at every grid point. Rows exist even where CF
/// is infeasible (clamped value, `feasible = false`).
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult, ConfigError> {
    let (swept, grid) = config.sweep_axis()?;
    let xs = grid.values();
    let mut rows = Vec::with_capacity(xs.len() * config.schemes.len());
    for &scheme in &config.schemes {
        for &x in &xs {
            let (region, diag_sigma) = match &config.params {
                ModelParams::Gaussian { channel, beta, no_relay, .. } => {
                    let (b, s) = match swept {
                        Swept::SigmaQ2 => (beta.expect("checked by sweep_axis"), Some(x)),
                        Swept::Beta => (SlotFraction::new(x).map_err(|e| point_error(swept, x, scheme, e))?, None),
                    };
                    gaussian_point(channel, b, s, scheme, *no_relay).map_err(|e| point_error(swept, x, scheme, e))?
                }
                ModelParams::Dm { spec, network, .. } => {
                    let b = SlotFraction::new(x).map_err(|e| point_error(swept, x, scheme, e))?;
                    (dm_point(spec, b, *network, scheme).map_err(|e| point_error(swept, x, scheme, e))?, None)
                }
            };
            rows.push(SweepRow {
                swept: x,
                scheme,
                region,
                diag_sigma,
            });
        }
    }
    Ok(SweepResult {
        swept,
        log_x: grid.spacing == Spacing::Log,
        rows,
    })
}

/// Single-point regions for every configured scheme. Needs complete params
/// (`beta`, and `sigmaQ2` for the Gaussian model); `swept`, `grid` and
/// `output` are ignored.
pub fn evaluate_regions(config: &SweepConfig) -> Result<BTreeMap<SchemeId, RateRegion>, ConfigError> {
    let mut out = BTreeMap::new();
    for &scheme in &config.schemes {
        let region = match &config.params {
            ModelParams::Gaussian { channel, beta, sigma_q2, no_relay } => {
                let b = beta.ok_or_else(|| ConfigError::invalid("region needs params.beta"))?;
                let s = match (scheme, sigma_q2) {
                    (SchemeId::NoRelay, _) => 1.0,
                    (_, Some(s)) => *s,
                    (_, None) => return Err(ConfigError::invalid("region needs params.sigmaQ2")),
                };
                let (mut region, diag) = gaussian_point(channel, b, Some(s), scheme, *no_relay).map_err(|e| ConfigError::Evaluation {
                    point: scheme.to_string(),
                    message: e.to_string(),
                })?;
                if let (Some(d), SchemeId::Gqf) = (diag, scheme) {
                    region.terms.insert("sigma_star".to_string(), d);
                }
                region
            }
            ModelParams::Dm { spec, beta, network } => {
                let b = beta.ok_or_else(|| ConfigError::invalid("region needs params.beta"))?;
                dm_point(spec, b, *network, scheme).map_err(|e| ConfigError::Evaluation {
                    point: scheme.to_string(),
                    message: e.to_string(),
                })?
            }
        };
        out.insert(scheme, region);
    }
    Ok(out)
}

/// `printf("%.12g")`.
pub fn fmt_g12(x: f64) -> String {
    const P: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let mant = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (P - 1 - exp) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn csv_string(result: &SweepResult) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &result.rows {
        let diag = r.diag_sigma.map(fmt_g12).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_g12(r.swept),
            r.scheme,
            fmt_g12(r.region.r1_max),
            fmt_g12(r.region.r2_max),
            fmt_g12(r.region.sum_max),
            r.region.feasible,
            diag
        );
    }
    out
}

fn ensure_nonempty(result: &SweepResult) -> Result<(), ConfigError> {
    if result.rows.is_empty() {
        return Err(ConfigError::invalid("sweep result has no rows"));
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<(), ConfigError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| ConfigError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| ConfigError::io(path, e))
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<(), ConfigError> {
    ensure_nonempty(result)?;
    write_file(path, &csv_string(result))
}

/// Gnuplot script plotting the sum rate of every scheme against the swept
/// parameter. `csv_name` is written verbatim, so pass a path relative to
/// where the script will be run (normally the CSV's file name).
pub fn plot_script_string(result: &SweepResult, csv_name: &str, image_name: &str) -> String {
    let mut schemes: Vec<SchemeId> = Vec::new();
    for r in &result.rows {
        if !schemes.contains(&r.scheme) {
            schemes.push(r.scheme);
        }
    }
    let xlabel = match result.swept {
        Swept::SigmaQ2 => "sigma_Q^2",
        Swept::Beta => "beta",
    };
    let mut s = String::new();
    let _ = writeln!(s, "# run from the directory containing {csv_name}");
    let _ = writeln!(s, "set datafile separator \",\"");
    let _ = writeln!(s, "set terminal pngcairo size 900,600");
    let _ = writeln!(s, "set output \"{image_name}\"");
    let _ = writeln!(s, "set xlabel \"{xlabel}\"");
    let _ = writeln!(s, "set ylabel \"sum rate (bits per channel use)\"");
    if result.log_x {
        let _ = writeln!(s, "set logscale x");
    }
    let _ = writeln!(s, "set key bottom right");
    let _ = writeln!(s, "set grid");
    let curves: Vec<String> = schemes
        .iter()
        .map(|sc| {
            let style = match sc {
                SchemeId::NoRelay => "lines dashtype 2",
                _ => "linespoints",
            };
            format!(
                "\"{csv_name}\" skip 1 using 1:(strcol(2) eq \"{sc}\" ? $5 : 1/0) with {style} title \"{sc}\""
            )
        })
        .collect();
    let _ = writeln!(s, "plot {}", curves.join(", \\\n     "));
    s
}

/// Writes the script next to `csv_path`, referencing the CSV by file name.
pub fn emit_plot_script(result: &SweepResult, csv_path: &Path, script_path: &Path) -> Result<(), ConfigError> {
    ensure_nonempty(result)?;
    let csv_name = csv_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .ok_or_else(|| ConfigError::invalid(format!("{} has no file name", csv_path.display())))?;
    let stem = csv_path.file_stem().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "sweep".into());
    write_file(script_path, &plot_script_string(result, &csv_name, &format!("{stem}.png")))
}

/// Default script location: the CSV path with a `.gp` extension.
pub fn default_script_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("gp")
}
