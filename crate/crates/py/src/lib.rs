//! Python bindings: `import hdmarc`.

use std::collections::BTreeMap;
use std::path::Path;

use hdmarc_core::dm::{DmChannelSpec, JointPmf, VarId};
use hdmarc_core::gaussian::{self as g, GaussianError};
use hdmarc_core::oracle::{self, GaussVar, Slot};
use hdmarc_core::sweep::{csv_string, run_sweep, ConfigError, SweepConfig};
use hdmarc_core::verify::{verify as run_verify, Subject};
use hdmarc_core::{dm_regions, SlotFraction};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

create_exception!(hdmarc, HdmarcError, PyException, "Base class for hdmarc errors.");
create_exception!(hdmarc, NoCrossingError, HdmarcError, "I1 and I2 never cross; args are (sigma, sum_rate) at the best endpoint.");
create_exception!(hdmarc, DegenerateRelayLinkError, HdmarcError, "hR1^2 PR = 0, so no finite sigmaQ2 meets the CF constraint.");

fn gauss_err(e: GaussianError) -> PyErr {
    match e {
        GaussianError::NoCrossing { sigma, sum_rate } => NoCrossingError::new_err((sigma, sum_rate)),
        GaussianError::DegenerateRelayLink => DegenerateRelayLinkError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn beta(b: f64) -> PyResult<SlotFraction> {
    SlotFraction::new(b).map_err(value_err)
}

/// Bounds `R1 <= r1_max`, `R2 <= r2_max`, `R1 + R2 <= sum_max` in bits.
#[pyclass(name = "RateRegion", frozen, skip_from_py_object, module = "hdmarc")]
#[derive(Clone)]
struct PyRateRegion {
    #[pyo3(get)]
    r1_max: f64,
    #[pyo3(get)]
    r2_max: f64,
    #[pyo3(get)]
    sum_max: f64,
    #[pyo3(get)]
    feasible: bool,
    #[pyo3(get)]
    terms: BTreeMap<String, f64>,
}

impl From<hdmarc_core::RateRegion> for PyRateRegion {
    fn from(r: hdmarc_core::RateRegion) -> Self {
        PyRateRegion {
            r1_max: r.r1_max,
            r2_max: r.r2_max,
            sum_max: r.sum_max,
            feasible: r.feasible,
            terms: r.terms,
        }
    }
}

#[pymethods]
impl PyRateRegion {
    fn __repr__(&self) -> String {
        format!(
            "RateRegion(r1_max={}, r2_max={}, sum_max={}, feasible={})",
            self.r1_max,
            self.r2_max,
            self.sum_max,
            if self.feasible { "True" } else { "False" }
        )
    }
}

#[pyclass(name = "MarcChannel", skip_from_py_object, module = "hdmarc")]
#[derive(Clone)]
struct PyMarcChannel {
    inner: g::MarcChannel,
}

#[pymethods]
impl PyMarcChannel {
    #[new]
    #[pyo3(signature = (h11, h21, h1R, h2R, hR1, P11, P12, P21, P22, PR))]
    #[allow(non_snake_case, clippy::too_many_arguments)]
    fn new(h11: f64, h21: f64, h1R: f64, h2R: f64, hR1: f64, P11: f64, P12: f64, P21: f64, P22: f64, PR: f64) -> PyResult<Self> {
        let inner = g::MarcChannel { h11, h21, h1r: h1R, h2r: h2R, hr1: hR1, p11: P11, p12: P12, p21: P21, p22: P22, pr: PR };
        inner.validate().map_err(gauss_err)?;
        Ok(PyMarcChannel { inner })
    }

    /// h11 = h21 = 1, h1R = 3, h2R = 0.5, hR1 = 3, all powers 1.
    #[staticmethod]
    fn reference() -> Self {
        PyMarcChannel { inner: g::MarcChannel::reference() }
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let c = &self.inner;
        let d = PyDict::new(py);
        for (k, v) in [
            ("h11", c.h11),
            ("h21", c.h21),
            ("h1R", c.h1r),
            ("h2R", c.h2r),
            ("hR1", c.hr1),
            ("P11", c.p11),
            ("P12", c.p12),
            ("P21", c.p21),
            ("P22", c.p22),
            ("PR", c.pr),
        ] {
            d.set_item(k, v)?;
        }
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("MarcChannel({:?})", self.inner)
    }
}

#[pyclass(name = "GaussianMarcParams", frozen, skip_from_py_object, module = "hdmarc")]
#[derive(Clone)]
struct PyParams {
    inner: g::GaussianMarcParams,
}

#[pymethods]
impl PyParams {
    #[new]
    fn new(channel: &PyMarcChannel, beta: f64, sigma_q2: f64) -> PyResult<Self> {
        let b = self::beta(beta)?;
        Ok(PyParams {
            inner: g::GaussianMarcParams::new(channel.inner, b, sigma_q2).map_err(gauss_err)?,
        })
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta.get()
    }

    #[getter]
    fn sigma_q2(&self) -> f64 {
        self.inner.sigma_q2
    }

    #[getter]
    fn channel(&self) -> PyMarcChannel {
        PyMarcChannel { inner: self.inner.channel }
    }
}

#[pyfunction]
fn gqf_region(p: &PyParams) -> PyResult<PyRateRegion> {
    Ok(g::gqf_region(&p.inner).map_err(gauss_err)?.into())
}

#[pyfunction]
fn gqf_individual_rate(p: &PyParams, i: usize) -> PyResult<f64> {
    g::gqf_individual_rate(&p.inner, i).map_err(gauss_err)
}

/// Returns `(I1, I2)`.
#[pyfunction]
fn gqf_sum_terms(p: &PyParams) -> PyResult<(f64, f64)> {
    let t = g::gqf_sum_terms(&p.inner).map_err(gauss_err)?;
    Ok((t.i1, t.i2))
}

/// Returns `(sigma_star, sum_rate)`; raises NoCrossingError without a crossing.
#[pyfunction]
fn gqf_optimize_sigma(channel: &PyMarcChannel, beta: f64) -> PyResult<(f64, f64)> {
    let o = g::gqf_optimize_sigma(&channel.inner, self::beta(beta)?).map_err(gauss_err)?;
    Ok((o.sigma, o.sum_rate))
}

#[pyfunction]
fn cf_sigma_min(channel: &PyMarcChannel, beta: f64) -> PyResult<f64> {
    g::cf_sigma_min(&channel.inner, self::beta(beta)?).map_err(gauss_err)
}

#[pyfunction]
fn cf_rates(p: &PyParams) -> PyResult<PyRateRegion> {
    Ok(g::cf_rates(&p.inner).map_err(gauss_err)?.into())
}

#[pyfunction]
fn no_relay_rates(h11: f64, h21: f64, p1: f64, p2: f64) -> PyResult<PyRateRegion> {
    Ok(g::no_relay_rates(h11, h21, p1, p2).map_err(gauss_err)?.into())
}

/// Returns `(beta, rate, sigma)` maximizing `objective` ("sum", "r1", "r2").
#[pyfunction]
#[pyo3(signature = (channel, scheme, objective = "sum"))]
fn optimize_beta(channel: &PyMarcChannel, scheme: &str, objective: &str) -> PyResult<(f64, f64, f64)> {
    let scheme = scheme.parse().map_err(value_err)?;
    let objective = objective.parse().map_err(gauss_err)?;
    let o = g::optimize_beta(&channel.inner, scheme, objective).map_err(gauss_err)?;
    Ok((o.beta, o.rate, o.sigma))
}

fn gauss_vars(names: Vec<String>) -> PyResult<Vec<GaussVar>> {
    names
        .iter()
        .map(|n| {
            let v = match n.as_str() {
                "X11" => GaussVar::X11,
                "X21" => GaussVar::X21,
                "YR" => GaussVar::YR,
                "YhR" => GaussVar::YhR,
                "Y11" => GaussVar::Y11,
                "X12" => GaussVar::X12,
                "X22" => GaussVar::X22,
                "XR" => GaussVar::XR,
                "Y12" => GaussVar::Y12,
                _ => return Err(PyValueError::new_err(format!("unknown Gaussian variable {n:?}"))),
            };
            Ok(v)
        })
        .collect()
}

/// Log-det `I(A;B|C)` in bits within one slot (1 or 2) of the Gaussian model.
#[pyfunction]
#[pyo3(signature = (p, slot, a, b, c = Vec::new()))]
fn gaussian_mi(p: &PyParams, slot: u8, a: Vec<String>, b: Vec<String>, c: Vec<String>) -> PyResult<f64> {
    let model = oracle::build_covariance(&p.inner, Slot::try_from(slot).map_err(value_err)?).map_err(value_err)?;
    oracle::gaussian_mi(&model, &gauss_vars(a)?, &gauss_vars(b)?, &gauss_vars(c)?).map_err(value_err)
}

/// Covariance of one slot as a list of rows, with the variable names.
#[pyfunction]
fn build_covariance(p: &PyParams, slot: u8) -> PyResult<(Vec<String>, Vec<Vec<f64>>)> {
    let m = oracle::build_covariance(&p.inner, Slot::try_from(slot).map_err(value_err)?).map_err(value_err)?;
    let cov = m.covariance();
    let rows = (0..cov.nrows()).map(|r| (0..cov.ncols()).map(|c| cov[(r, c)]).collect()).collect();
    Ok((m.vars().iter().map(|v| v.to_string()).collect(), rows))
}

fn var_ids(names: Vec<String>) -> PyResult<Vec<VarId>> {
    names.iter().map(|n| n.parse::<VarId>().map_err(value_err)).collect()
}

/// Dense joint pmf; `vars` is a list of `(name, alphabet_size)`, the last
/// variable varies fastest in `probs`.
#[pyclass(name = "JointPmf", frozen, module = "hdmarc")]
struct PyJointPmf {
    inner: JointPmf,
}

#[pymethods]
impl PyJointPmf {
    #[new]
    fn new(vars: Vec<(String, usize)>, probs: Vec<f64>) -> PyResult<Self> {
        let vars = vars
            .into_iter()
            .map(|(n, k)| n.parse::<VarId>().map(|v| (v, k)).map_err(value_err))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(PyJointPmf { inner: JointPmf::new(vars, probs).map_err(value_err)? })
    }

    fn entropy(&self, vars: Vec<String>) -> PyResult<f64> {
        self.inner.entropy(&var_ids(vars)?).map_err(value_err)
    }

    #[pyo3(signature = (a, b, c = Vec::new()))]
    fn mutual_information(&self, a: Vec<String>, b: Vec<String>, c: Vec<String>) -> PyResult<f64> {
        self.inner.mutual_information(&var_ids(a)?, &var_ids(b)?, &var_ids(c)?).map_err(value_err)
    }

    fn marginalize(&self, keep: Vec<String>) -> PyResult<PyJointPmf> {
        Ok(PyJointPmf { inner: self.inner.marginalize(&var_ids(keep)?).map_err(value_err)? })
    }

    #[getter]
    fn vars(&self) -> Vec<String> {
        self.inner.vars().iter().map(|v| v.name().to_string()).collect()
    }

    #[getter]
    fn probs(&self) -> Vec<f64> {
        self.inner.probs().to_vec()
    }
}

#[pyclass(name = "DmChannelSpec", frozen, module = "hdmarc")]
struct PyDmSpec {
    inner: DmChannelSpec,
}

#[pymethods]
impl PyDmSpec {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyDmSpec { inner: DmChannelSpec::from_json(text).map_err(value_err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn slot1_joint(&self) -> PyResult<PyJointPmf> {
        Ok(PyJointPmf { inner: self.inner.build_slot1_joint().map_err(value_err)? })
    }

    fn slot2_joint(&self) -> PyResult<PyJointPmf> {
        Ok(PyJointPmf { inner: self.inner.build_slot2_joint().map_err(value_err)? })
    }
}

macro_rules! dm_region_fn {
    ($($name:ident => $path:path),* $(,)?) => {$(
        #[pyfunction]
        fn $name(spec: &PyDmSpec, beta: f64) -> PyResult<PyRateRegion> {
            Ok($path(&spec.inner, self::beta(beta)?).map_err(value_err)?.into())
        }
    )*};
}

dm_region_fn! {
    gqf_region_marc => dm_regions::gqf_region_marc,
    gqf_region_cmacr => dm_regions::gqf_region_cmacr,
    cf_region_marc => dm_regions::cf_region_marc,
    cf_region_cmacr => dm_regions::cf_region_cmacr,
    no_relay_region_marc => dm_regions::no_relay_region_marc,
    no_relay_region_cmacr => dm_regions::no_relay_region_cmacr,
    gqf_region_via_ru_sweep => oracle::gqf_region_via_ru_sweep,
}

fn to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    use serde_json::Value;
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(a) => {
            let items = a.iter().map(|x| to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_any()
        }
        Value::Object(o) => {
            let d = PyDict::new(py);
            for (k, x) in o {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

/// Runs an invariant suite ("closed-forms", "dm-regions", "reductions") and
/// returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (subject, seed = 0, draws = 100))]
fn verify<'py>(py: Python<'py>, subject: &str, seed: u64, draws: usize) -> PyResult<Bound<'py, PyAny>> {
    let s: Subject = subject.parse().map_err(PyValueError::new_err)?;
    if draws == 0 {
        return Err(PyValueError::new_err("draws must be >= 1"));
    }
    let report = run_verify(s, seed, draws);
    to_py(py, &serde_json::to_value(&report).map_err(value_err)?)
}

fn config_err(e: ConfigError) -> PyErr {
    HdmarcError::new_err(e.to_string())
}

/// Runs the sweep described by a config file and returns the CSV text.
#[pyfunction]
fn sweep_csv(config_path: &str) -> PyResult<String> {
    let cfg = SweepConfig::from_file(Path::new(config_path)).map_err(config_err)?;
    Ok(csv_string(&run_sweep(&cfg).map_err(config_err)?))
}

#[pymodule]
fn hdmarc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("HdmarcError", py.get_type::<HdmarcError>())?;
    m.add("NoCrossingError", py.get_type::<NoCrossingError>())?;
    m.add("DegenerateRelayLinkError", py.get_type::<DegenerateRelayLinkError>())?;
    m.add_class::<PyRateRegion>()?;
    m.add_class::<PyMarcChannel>()?;
    m.add_class::<PyParams>()?;
    m.add_class::<PyJointPmf>()?;
    m.add_class::<PyDmSpec>()?;
    m.add_function(wrap_pyfunction!(gqf_region, m)?)?;
    m.add_function(wrap_pyfunction!(gqf_individual_rate, m)?)?;
    m.add_function(wrap_pyfunction!(gqf_sum_terms, m)?)?;
    m.add_function(wrap_pyfunction!(gqf_optimize_sigma, m)?)?;
    m.add_function(wrap_pyfunction!(cf_sigma_min, m)?)?;
    m.add_function(wrap_pyfunction!(cf_rates, m)?)?;
    m.add_function(wrap_pyfunction!(no_relay_rates, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_beta, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_mi, m)?)?;
    m.add_function(wrap_pyfunction!(build_covariance, m)?)?;
    m.add_function(wrap_pyfunction!(gqf_region_marc, m)?)?;
    m.add_function(wrap_pyfunction!(gqf_region_cmacr, m)?)?;
    m.add_function(wrap_pyfunction!(cf_region_marc, m)?)?;
    m.add_function(wrap_pyfunction!(cf_region_cmacr, m)?)?;
    m.add_function(wrap_pyfunction!(no_relay_region_marc, m)?)?;
    m.add_function(wrap_pyfunction!(no_relay_region_cmacr, m)?)?;
    m.add_function(wrap_pyfunction!(gqf_region_via_ru_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_csv, m)?)?;
    Ok(())
}
