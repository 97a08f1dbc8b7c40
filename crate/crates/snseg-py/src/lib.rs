//! Python bindings: segmentation entry points, critical-value lookup,
//! benchmark simulation and scoring metrics.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyModule;

use snseg::{
    gen_model, load_default_table, resolve_config, segment_estimates as core_segment_estimates,
    sncp_segment, snhd_segment, Component, GenericFunctional, ModelSpec, ParameterSpec,
    SegmentationResult, TableKind, TimeSeriesMatrix,
};

fn to_py_err(e: snseg::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A fitted segmentation: change-point locations, the resolved window and
/// threshold, and the per-anchor maximal statistics.
#[pyclass(name = "Segmentation")]
struct PySegmentation {
    #[pyo3(get)]
    est_cp: Vec<usize>,
    #[pyo3(get)]
    grid_size: usize,
    #[pyo3(get)]
    epsilon: f64,
    #[pyo3(get)]
    confidence: f64,
    #[pyo3(get)]
    critical_value: f64,
    #[pyo3(get)]
    max_stats: Vec<f64>,
    #[pyo3(get)]
    warnings: Vec<String>,
}

#[pymethods]
impl PySegmentation {
    fn __repr__(&self) -> String {
        format!(
            "Segmentation(est_cp={:?}, grid_size={}, critical_value={:.4})",
            self.est_cp, self.grid_size, self.critical_value
        )
    }
}

impl PySegmentation {
    fn from_result(r: SegmentationResult) -> Self {
        Self {
            est_cp: r.est_cp,
            grid_size: r.config.grid_size_h,
            epsilon: r.config.epsilon,
            confidence: r.config.confidence_q,
            critical_value: r.config.threshold_kn,
            max_stats: r.sweep.max_stats,
            warnings: r.config.warnings.iter().map(|w| w.to_string()).collect(),
        }
    }
}

fn matrix_from_columns(columns: Vec<Vec<f64>>) -> PyResult<TimeSeriesMatrix> {
    TimeSeriesMatrix::from_columns(columns).map_err(to_py_err)
}

fn run_sncp(
    ts: &TimeSeriesMatrix,
    spec: &ParameterSpec,
    confidence: f64,
    epsilon: Option<f64>,
    grid_size: Option<usize>,
) -> PyResult<PySegmentation> {
    let table = load_default_table(TableKind::Sncp { dim: spec.dim_d() }).map_err(to_py_err)?;
    let config = resolve_config(
        ts.n(),
        epsilon.or(Some(0.05)),
        grid_size,
        confidence,
        spec.dim_d(),
        &table,
    )
    .map_err(to_py_err)?;
    let result = sncp_segment(ts, spec, &config).map_err(to_py_err)?;
    Ok(PySegmentation::from_result(result))
}

/// Change-point estimation in a univariate series. `params` mixes built-in
/// names (`"mean"`, `"variance"`, `"acf"`) and quantile levels (`"q0.9"`).
#[pyfunction]
#[pyo3(signature = (values, params, confidence=0.9, epsilon=None, grid_size=None))]
fn segment_uni(
    values: Vec<f64>,
    params: Vec<String>,
    confidence: f64,
    epsilon: Option<f64>,
    grid_size: Option<usize>,
) -> PyResult<PySegmentation> {
    let ts = TimeSeriesMatrix::univariate(values).map_err(to_py_err)?;
    let spec = ParameterSpec::parse_components(&params, 1).map_err(to_py_err)?;
    run_sncp(&ts, &spec, confidence, epsilon, grid_size)
}

/// Change-point estimation driven by a Python callable evaluated on raw
/// subsamples (lists of floats); it must return `dim` finite floats.
#[pyfunction]
#[pyo3(signature = (values, func, dim=1, min_support=1, confidence=0.9, epsilon=None, grid_size=None))]
#[allow(clippy::too_many_arguments)]
fn segment_uni_fn(
    values: Vec<f64>,
    func: Py<PyAny>,
    dim: usize,
    min_support: usize,
    confidence: f64,
    epsilon: Option<f64>,
    grid_size: Option<usize>,
) -> PyResult<PySegmentation> {
    let ts = TimeSeriesMatrix::univariate(values).map_err(to_py_err)?;
    let functional = GenericFunctional::new("python", dim, min_support, move |sub| {
        Python::attach(|py| {
            let arg: Vec<f64> = sub.column(0).to_vec();
            let out = match func.call1(py, (arg,)) {
                Ok(v) => v,
                Err(_) => return vec![f64::NAN],
            };
            if let Ok(x) = out.extract::<f64>(py) {
                return vec![x];
            }
            out.extract::<Vec<f64>>(py).unwrap_or_else(|_| vec![f64::NAN])
        })
    });
    let spec = ParameterSpec::single(Component::Generic(functional), 1).map_err(to_py_err)?;
    run_sncp(&ts, &spec, confidence, epsilon, grid_size)
}

/// Mean or covariance change in a multivariate series (one list per
/// column).
#[pyfunction]
#[pyo3(signature = (columns, param="mean", confidence=0.9, epsilon=None, grid_size=None))]
fn segment_multi(
    columns: Vec<Vec<f64>>,
    param: &str,
    confidence: f64,
    epsilon: Option<f64>,
    grid_size: Option<usize>,
) -> PyResult<PySegmentation> {
    let ts = matrix_from_columns(columns)?;
    let spec =
        ParameterSpec::parse_components(&[param.to_string()], ts.p()).map_err(to_py_err)?;
    run_sncp(&ts, &spec, confidence, epsilon, grid_size)
}

/// High-dimensional mean change detection.
#[pyfunction]
#[pyo3(signature = (columns, confidence=0.9, epsilon=None, grid_size=None))]
fn segment_hd(
    columns: Vec<Vec<f64>>,
    confidence: f64,
    epsilon: Option<f64>,
    grid_size: Option<usize>,
) -> PyResult<PySegmentation> {
    let ts = matrix_from_columns(columns)?;
    let table = load_default_table(TableKind::Snhd).map_err(to_py_err)?;
    let config = resolve_config(
        ts.n(),
        epsilon.or(Some(0.05)),
        grid_size,
        confidence,
        0,
        &table,
    )
    .map_err(to_py_err)?;
    let result = snhd_segment(&ts, &config).map_err(to_py_err)?;
    Ok(PySegmentation::from_result(result))
}

/// Per-segment parameter estimates: list of (component, per-segment values
/// or None where degenerate).
#[pyfunction]
fn segment_estimates(
    columns: Vec<Vec<f64>>,
    params: Vec<String>,
    est_cp: Vec<usize>,
) -> PyResult<Vec<(String, Vec<Option<Vec<f64>>>)>> {
    let ts = matrix_from_columns(columns)?;
    let spec = ParameterSpec::parse_components(&params, ts.p()).map_err(to_py_err)?;
    let est = core_segment_estimates(&ts, &spec, &est_cp).map_err(to_py_err)?;
    Ok(est.into_iter().map(|c| (c.label, c.per_segment)).collect())
}

/// Interpolated critical value from the shipped tables
/// (`kind` is `"sncp"` or `"snhd"`).
#[pyfunction]
#[pyo3(signature = (kind, d, epsilon, q))]
fn critical_value(kind: &str, d: usize, epsilon: f64, q: f64) -> PyResult<f64> {
    let kind = match kind {
        "sncp" => TableKind::Sncp { dim: d },
        "snhd" => TableKind::Snhd,
        other => return Err(PyValueError::new_err(format!("unknown kind '{other}'"))),
    };
    let table = load_default_table(kind).map_err(to_py_err)?;
    let (eps, _) = snseg::clamp_epsilon(epsilon);
    snseg::lookup_critical_value(&table, eps, q).map_err(to_py_err)
}

/// Generate a benchmark model; returns (columns, true change-points).
#[pyfunction]
#[pyo3(signature = (model, seed, rho=None, delta=None, n=None))]
fn simulate(
    model: &str,
    seed: u64,
    rho: Option<f64>,
    delta: Option<f64>,
    n: Option<usize>,
) -> PyResult<(Vec<Vec<f64>>, Vec<usize>)> {
    let spec = match model.to_ascii_lowercase().as_str() {
        "v1" => ModelSpec::V1,
        "mp1" => ModelSpec::Mp1,
        "m2" => ModelSpec::M2,
        "hd" => ModelSpec::Hd,
        "m" => ModelSpec::M { rho: rho.unwrap_or(0.0) },
        "sa" => ModelSpec::Sa {
            delta: delta.unwrap_or_else(|| 3.0_f64.sqrt()),
        },
        "ar1" => ModelSpec::Ar1 {
            n: n.unwrap_or(1000),
            rho: rho.unwrap_or(0.0),
        },
        other => return Err(PyValueError::new_err(format!("unknown model '{other}'"))),
    };
    let generated = gen_model(&spec, seed).map_err(to_py_err)?;
    let cols = (0..generated.ts.p())
        .map(|s| generated.ts.column(s).to_vec())
        .collect();
    Ok((cols, generated.true_cp().to_vec()))
}

/// (d1, d2, dH): over/under-segmentation distances and their maximum.
#[pyfunction]
fn hausdorff(truth: Vec<usize>, estimate: Vec<usize>, n: usize) -> (f64, f64, f64) {
    snseg::hausdorff_distances(&truth, &estimate, n)
}

/// Adjusted Rand index of the induced partitions of 1..=n.
#[pyfunction]
fn adjusted_rand_index(truth: Vec<usize>, estimate: Vec<usize>, n: usize) -> f64 {
    snseg::adjusted_rand_index(&truth, &estimate, n)
}

#[pymodule]
fn snseg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySegmentation>()?;
    m.add_function(wrap_pyfunction!(segment_uni, m)?)?;
    m.add_function(wrap_pyfunction!(segment_uni_fn, m)?)?;
    m.add_function(wrap_pyfunction!(segment_multi, m)?)?;
    m.add_function(wrap_pyfunction!(segment_hd, m)?)?;
    m.add_function(wrap_pyfunction!(segment_estimates, m)?)?;
    m.add_function(wrap_pyfunction!(critical_value, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(hausdorff, m)?)?;
    m.add_function(wrap_pyfunction!(adjusted_rand_index, m)?)?;
    Ok(())
}
