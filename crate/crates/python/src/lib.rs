//! Python bindings: model construction, covariances, diagnostics, simulation,
//! likelihoods and fitting. Structured results come back as plain dicts.

use std::collections::BTreeMap;

use halfspec::covops::{cov_point, cov_slice_fft, DEFAULT_N_GRID, DEFAULT_OMEGA_MAX};
use halfspec::dataio::{self, DataHeader, PreprocessOptions, RawStationTable};
use halfspec::error::ErrorKind;
use halfspec::exactlik::exact_loglik;
use halfspec::fit::{default_init, fit_data, FitOptions, Method};
use halfspec::model::{CovModel, Family, Param, ParamVector, ModelSpec};
use halfspec::quad::QuadSpec;
use halfspec::spectrum::{check_model, smoothness_report, ConditionOptions};
use halfspec::whittle::{whittle_loglik_model, RegularMonitoringData, DEFAULT_ALIAS_M};
use nalgebra::DMatrix;
use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: halfspec::Error) -> PyErr {
    match e.kind() {
        ErrorKind::Config => PyValueError::new_err(e.to_string()),
        ErrorKind::Io => PyOSError::new_err(e.to_string()),
        ErrorKind::Numeric => PyArithmeticError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for halfspec::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn json_to_py<'py, S: serde::Serialize>(py: Python<'py>, v: &S) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn params_from(map: Option<BTreeMap<String, f64>>) -> PyResult<ParamVector> {
    let mut out = ParamVector::new();
    for (k, v) in map.unwrap_or_default() {
        out.set(k.parse::<Param>().py()?, v);
    }
    Ok(out)
}

/// A space-time covariance model.
#[pyclass(module = "halfspec_py", frozen)]
pub struct Model {
    spec: ModelSpec,
    inner: CovModel,
}

#[pymethods]
impl Model {
    /// Model(family, params=None, d=2, phi=None). Missing parameters take family defaults.
    #[new]
    #[pyo3(signature = (family, params=None, d=2, phi=None))]
    fn new(family: &str, params: Option<BTreeMap<String, f64>>, d: usize, phi: Option<Vec<f64>>) -> PyResult<Self> {
        let family: Family = family.parse().py()?;
        let mut p = family.defaults();
        p.merge(&params_from(params)?);
        let spec = ModelSpec { family, params: p, d, phi };
        let inner = spec.build().py()?;
        Ok(Model { spec, inner })
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.spec.family.name()
    }

    #[getter]
    fn d(&self) -> usize {
        self.spec.d
    }

    #[getter]
    fn params(&self) -> BTreeMap<String, f64> {
        self.spec.params.iter().map(|(k, v)| (k.name().to_string(), v)).collect()
    }

    #[getter]
    fn variance(&self) -> f64 {
        self.inner.variance()
    }

    /// K(s, t) by adaptive quadrature (closed form for the Gneiting family).
    fn cov(&self, py: Python<'_>, s: Vec<f64>, t: f64) -> PyResult<f64> {
        if s.len() != self.spec.d {
            return Err(PyValueError::new_err(format!("s must have {} components", self.spec.d)));
        }
        match &self.inner {
            CovModel::Half(h) => py.detach(|| cov_point(h, &s, t, &QuadSpec::default())).py().map(|p| p.value),
            CovModel::G(g) => Ok(g.cov_vec(&s, t)),
        }
    }

    /// (t, K(s, t)) on the FFT time grid t_j = jπ/omega_max.
    #[pyo3(signature = (s, n_grid=DEFAULT_N_GRID, omega_max=DEFAULT_OMEGA_MAX))]
    fn cov_grid(&self, py: Python<'_>, s: Vec<f64>, n_grid: usize, omega_max: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let h = self.inner.as_half().py()?;
        let g = py.detach(|| cov_slice_fft(h, &s, n_grid, omega_max)).py()?;
        Ok((g.t_grid, g.values))
    }

    /// Half-spectrum at spatial lag s and frequency ω, as a complex number.
    fn half_spectrum(&self, s: Vec<f64>, omega: f64) -> PyResult<Complex64> {
        self.inner.as_half().py()?.half_spectrum(&s, omega).py()
    }

    fn full_spectrum(&self, lam: Vec<f64>, omega: f64) -> PyResult<f64> {
        self.inner.as_half().py()?.full_spectrum(&lam, omega).py()
    }

    #[pyo3(signature = (radius=5.0, grid_density=512, norms=None))]
    fn check_condition<'py>(
        &self,
        py: Python<'py>,
        radius: f64,
        grid_density: usize,
        norms: Option<Vec<f64>>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let h = self.inner.as_half().py()?;
        let mut opts = ConditionOptions { radius, grid_density, ..ConditionOptions::default() };
        if let Some(n) = norms {
            opts.norms = n;
        }
        let r = py.detach(|| check_model(h, &opts)).py()?;
        json_to_py(py, &r)
    }

    fn smoothness<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let r = smoothness_report(self.inner.as_half().py()?).py()?;
        json_to_py(py, &r)
    }

    /// Exact Gaussian draw at the given sites and n unit-spaced times.
    #[pyo3(signature = (coords, n, seed=0))]
    fn simulate(&self, py: Python<'_>, coords: Vec<Vec<f64>>, n: usize, seed: u64) -> PyResult<Data> {
        let inner = py.detach(|| dataio::simulate(&self.inner, &coords, n, seed)).py()?;
        Ok(Data { inner })
    }

    fn __repr__(&self) -> String {
        let p: Vec<String> = self.spec.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("Model('{}', {}, d={})", self.spec.family, p.join(", "), self.spec.d)
    }
}

/// p sites observed at n equally spaced times.
#[pyclass(module = "halfspec_py", frozen)]
pub struct Data {
    inner: RegularMonitoringData,
}

#[pymethods]
impl Data {
    /// Data(coords, series, dt=1.0) with series given as p rows of length n.
    #[new]
    #[pyo3(signature = (coords, series, dt=1.0))]
    fn new(coords: Vec<Vec<f64>>, series: Vec<Vec<f64>>, dt: f64) -> PyResult<Self> {
        let p = series.len();
        let n = series.first().map_or(0, Vec::len);
        if series.iter().any(|r| r.len() != n) {
            return Err(PyValueError::new_err("series rows differ in length"));
        }
        let m = DMatrix::from_fn(p, n, |i, t| series[i][t]);
        Ok(Data { inner: RegularMonitoringData::new(coords, m, dt).py()? })
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        let (_, inner) = dataio::read_data_path(path).py()?;
        Ok(Data { inner })
    }

    fn write(&self, path: &str) -> PyResult<()> {
        dataio::write_data_path(path, &DataHeader::for_data(&self.inner), &self.inner).py()
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.p()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt
    }

    #[getter]
    fn coords(&self) -> Vec<Vec<f64>> {
        self.inner.coords.clone()
    }

    #[getter]
    fn series(&self) -> Vec<Vec<f64>> {
        self.inner.series.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    fn __repr__(&self) -> String {
        format!("Data(p={}, n={}, dt={})", self.inner.p(), self.inner.n(), self.inner.dt)
    }
}

#[pyfunction]
#[pyo3(signature = (model, data, m=DEFAULT_ALIAS_M))]
fn whittle_loglik(py: Python<'_>, model: &Model, data: &Data, m: usize) -> PyResult<f64> {
    py.detach(|| whittle_loglik_model(&model.inner, &data.inner, m)).py()
}

#[pyfunction(name = "exact_loglik")]
fn exact_loglik_py(py: Python<'_>, model: &Model, data: &Data) -> PyResult<f64> {
    py.detach(|| exact_loglik(&model.inner, &data.inner)).py()
}

/// Maximum likelihood fit. Returns the fit result as a dict.
#[pyfunction]
#[pyo3(signature = (data, family, method="whittle", fixed=None, init=None, phi=None, max_evals=3000, restarts=3))]
#[allow(clippy::too_many_arguments)]
fn fit<'py>(
    py: Python<'py>,
    data: &Data,
    family: &str,
    method: &str,
    fixed: Option<BTreeMap<String, f64>>,
    init: Option<BTreeMap<String, f64>>,
    phi: Option<Vec<f64>>,
    max_evals: usize,
    restarts: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let family: Family = family.parse().py()?;
    let method = match method {
        "whittle" => Method::Whittle,
        "exact" => Method::Exact,
        other => return Err(PyValueError::new_err(format!("unknown method '{other}'"))),
    };
    let fixed = params_from(fixed)?;
    let mut start = default_init(family, &data.inner);
    start.merge(&params_from(init)?);
    let opts = FitOptions { max_evals, restarts, ..FitOptions::default() };
    let r = py
        .detach(|| fit_data(method, family, &data.inner, phi.as_deref(), &fixed, &start, &opts))
        .py()?;
    json_to_py(py, &r)
}

/// Reads long-format station CSV and applies the standard preprocessing.
/// Returns (data, station ids).
#[pyfunction]
#[pyo3(signature = (path, drop=Vec::new(), n_harmonics=4))]
fn preprocess(path: &str, drop: Vec<String>, n_harmonics: usize) -> PyResult<(Data, Vec<String>)> {
    let raw = RawStationTable::read_csv_path(path).py()?;
    let opts = PreprocessOptions { n_harmonics, drop, ..PreprocessOptions::default() };
    let prep = dataio::preprocess(&raw, &opts).py()?;
    Ok((Data { inner: prep.data }, prep.stations))
}

#[pyfunction]
fn lonlat_to_xyz(lon: f64, lat: f64) -> (f64, f64, f64) {
    let [x, y, z] = dataio::lonlat_to_xyz(lon, lat);
    (x, y, z)
}

#[pyfunction]
fn families() -> Vec<&'static str> {
    Family::ALL.iter().map(|f| f.name()).collect()
}

#[pymodule]
fn halfspec_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add_class::<Data>()?;
    m.add_function(wrap_pyfunction!(whittle_loglik, m)?)?;
    m.add_function(wrap_pyfunction!(exact_loglik_py, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(preprocess, m)?)?;
    m.add_function(wrap_pyfunction!(lonlat_to_xyz, m)?)?;
    m.add_function(wrap_pyfunction!(families, m)?)?;
    Ok(())
}
