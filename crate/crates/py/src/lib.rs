//! Python bindings: metrics from the DSL or the catalog, curvature reports,
//! mixed curvature, extremization, sphere averages and the verification
//! battery.

use hermcurv_core::catalog::{self, sample_points, CatalogEntry};
use hermcurv_core::curvature::{analyze, kahler_defect, kahler_like_defect, PointGeometry};
use hermcurv_core::mixed::{
    extremize, mixed_curvature, sphere_average_closed_form, sphere_average_monte_carlo, ExtremizeOptions, MixedParams,
};
use hermcurv_core::verify::{run_suite, Suite};
use hermcurv_core::{conformal_metric, parse_expr, parse_metric, CMatrix, MetricSpec, Tensor4};
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn tensor(t: &Tensor4) -> Vec<Vec<Vec<Vec<Complex64>>>> {
    let n = t.dim();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| (0..n).map(|l| t[[i, j, k, l]]).collect()).collect()).collect())
        .collect()
}

fn params(alpha: f64, beta: f64) -> PyResult<MixedParams> {
    MixedParams::new(alpha, beta).map_err(value_error)
}

/// A Hermitian metric `g_{ij̄}` on a domain of `C^n`.
#[pyclass(name = "Metric", module = "hermcurv", frozen)]
struct PyMetric {
    spec: MetricSpec,
}

impl PyMetric {
    fn geometry(&self, point: Vec<Complex64>) -> PyResult<PointGeometry> {
        analyze(&self.spec, &point).map_err(value_error)
    }
}

#[pymethods]
impl PyMetric {
    /// Parses metric DSL source.
    #[staticmethod]
    fn parse(source: &str) -> PyResult<Self> {
        Ok(Self { spec: parse_metric(source).map_err(value_error)? })
    }

    /// A catalog metric by name.
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        Ok(Self { spec: catalog::builtin(name).map_err(value_error)?.spec })
    }

    #[getter]
    fn name(&self) -> &str {
        &self.spec.name
    }

    #[getter]
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn to_dsl(&self) -> String {
        self.spec.to_dsl()
    }

    fn __repr__(&self) -> String {
        format!("Metric(name={:?}, dim={}, domain={:?})", self.spec.name, self.spec.dim(), self.spec.domain.to_string())
    }

    fn metric_at(&self, point: Vec<Complex64>) -> PyResult<Vec<Vec<Complex64>>> {
        Ok(matrix(&self.spec.metric_at(&point).map_err(value_error)?))
    }

    /// Deterministic points of the metric's domain.
    #[pyo3(signature = (count, seed=0))]
    fn sample_points(&self, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
        let entry = CatalogEntry {
            name: self.spec.name.clone(),
            spec: self.spec.clone(),
            expected: Vec::new(),
            notes: "",
            kahler: false,
        };
        sample_points(&entry, count, seed)
    }

    /// Chern curvature `R[i][j][k][l] = R_{ij̄kl̄}` in the "coordinate" or
    /// "unitary" frame.
    #[pyo3(signature = (point, frame="unitary"))]
    fn curvature(&self, point: Vec<Complex64>, frame: &str) -> PyResult<Vec<Vec<Vec<Vec<Complex64>>>>> {
        let g = self.geometry(point)?;
        match frame {
            "unitary" => Ok(tensor(&g.unitary.r)),
            "coordinate" => Ok(tensor(&g.coordinate.r)),
            other => Err(PyValueError::new_err(format!("unknown frame {other:?}"))),
        }
    }

    /// Scalars, Ricci forms (unitary frame), torsion and Kähler defects.
    fn report<'py>(&self, py: Python<'py>, point: Vec<Complex64>) -> PyResult<Bound<'py, PyDict>> {
        let g = self.geometry(point)?;
        let d = PyDict::new(py);
        d.set_item("u", g.bundle.u)?;
        d.set_item("v", g.bundle.v)?;
        d.set_item("eta_norm2", g.torsion.eta_norm2)?;
        d.set_item("eta", g.torsion.eta.clone())?;
        d.set_item("kahler_defect", kahler_defect(&g.jet))?;
        d.set_item("kahler_like_defect", kahler_like_defect(&g.unitary))?;
        d.set_item("rho1", matrix(&g.bundle.rho1))?;
        d.set_item("rho2", matrix(&g.bundle.rho2))?;
        d.set_item("rho3", matrix(&g.bundle.rho3))?;
        d.set_item("rho4", matrix(&g.bundle.rho4))?;
        d.set_item("frame", matrix(&g.frame))?;
        Ok(d)
    }

    /// `α Ric(X, X̄)/|X|² + β H(X)` for a coordinate vector `X`.
    fn mixed_curvature(&self, point: Vec<Complex64>, direction: Vec<Complex64>, alpha: f64, beta: f64) -> PyResult<f64> {
        let g = self.geometry(point)?;
        mixed_curvature(&g.coordinate, &g.jet.g, params(alpha, beta)?, &direction).map_err(value_error)
    }

    /// Minimum and maximum of the mixed curvature over unit directions;
    /// arg vectors are in the unitary frame.
    #[pyo3(signature = (point, alpha, beta, restarts=16, seed=0))]
    fn extremize<'py>(
        &self,
        py: Python<'py>,
        point: Vec<Complex64>,
        alpha: f64,
        beta: f64,
        restarts: usize,
        seed: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let g = self.geometry(point)?;
        let n = self.spec.dim();
        let opts = ExtremizeOptions { restarts, seed, ..ExtremizeOptions::default() };
        let rep = extremize(&g.unitary, &CMatrix::identity(n, n), params(alpha, beta)?, &opts).map_err(value_error)?;
        let d = PyDict::new(py);
        d.set_item("min", rep.min_value)?;
        d.set_item("max", rep.max_value)?;
        d.set_item("spread", rep.spread)?;
        d.set_item("argmin", rep.argmin)?;
        d.set_item("argmax", rep.argmax)?;
        d.set_item("converged", rep.converged)?;
        Ok(d)
    }

    /// Closed-form average of the mixed curvature over the unit sphere.
    fn sphere_average(&self, point: Vec<Complex64>, alpha: f64, beta: f64) -> PyResult<f64> {
        Ok(sphere_average_closed_form(&self.geometry(point)?.bundle, params(alpha, beta)?))
    }

    /// Monte Carlo average; returns `(mean, standard_error)`.
    #[pyo3(signature = (point, alpha, beta, samples=100_000, seed=0))]
    fn sphere_average_mc(&self, point: Vec<Complex64>, alpha: f64, beta: f64, samples: usize, seed: u64) -> PyResult<(f64, f64)> {
        let g = self.geometry(point)?;
        let n = self.spec.dim();
        sphere_average_monte_carlo(&g.unitary, &CMatrix::identity(n, n), params(alpha, beta)?, samples, seed)
            .map_err(value_error)
    }

    /// The metric `exp(2F) g` for a real DSL expression `F`.
    fn conformal(&self, factor: &str) -> PyResult<Self> {
        let f = parse_expr(factor, self.spec.dim()).map_err(value_error)?;
        Ok(Self { spec: conformal_metric(&self.spec, &f) })
    }
}

#[pyfunction]
fn catalog_names() -> Vec<&'static str> {
    catalog::names()
}

/// Runs a verification suite; returns one dict per check.
#[pyfunction]
#[pyo3(signature = (suite="all", tol=None))]
fn verify<'py>(py: Python<'py>, suite: &str, tol: Option<f64>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let suite = match suite {
        "all" => Suite::All,
        "core" => Suite::Core,
        "conformal" => Suite::Conformal,
        "surface" => Suite::Surface,
        "mixed" => Suite::Mixed,
        "catalog" => Suite::Catalog,
        other => return Err(PyValueError::new_err(format!("unknown suite {other:?}"))),
    };
    run_suite(suite, tol)
        .into_iter()
        .map(|o| {
            let d = PyDict::new(py);
            d.set_item("check", o.check_id)?;
            d.set_item("metric", o.metric)?;
            d.set_item("residual", o.residual)?;
            d.set_item("tolerance", o.tolerance)?;
            d.set_item("pass", o.pass)?;
            d.set_item("provenance", o.provenance.as_str())?;
            d.set_item("error", o.error)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn hermcurv(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMetric>()?;
    m.add_function(wrap_pyfunction!(catalog_names, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
