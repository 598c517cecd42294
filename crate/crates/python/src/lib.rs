use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use repcone::analysis::{alexander_display, analyze as run_analysis, AnalysisConfig};
use repcone::catalog::{entries, lookup};
use repcone::charvar::character_report;
use repcone::cone::{enumerate_components, tangent_basis};
use repcone::foxcoh::alexander_polynomial;
use repcone::linalg::{Tolerance, C64};
use repcone::presentation::parse_presentation;
use repcone::repbuild::{check_hypotheses_with, EigenvalueData};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn tolerance(tol_rank: f64, tol_res: f64) -> PyResult<Tolerance> {
    let ok = |x: f64| x > 0.0 && x < 1.0;
    if !ok(tol_rank) || !ok(tol_res) {
        return Err(PyValueError::new_err("tolerances must lie in (0, 1)"));
    }
    Ok(Tolerance::new(tol_rank, tol_res))
}

/// A deficiency-one group presentation with abelianization weights.
#[pyclass(frozen, skip_from_py_object, module = "repcone_py")]
struct Presentation {
    inner: repcone::presentation::Presentation,
}

#[pymethods]
impl Presentation {
    /// Parses the text format, e.g. `gens x y; rel x y x Y X Y;`.
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Presentation {
            inner: parse_presentation(text).map_err(err)?,
        })
    }

    /// Built-in knot: `trefoil`, `fig8` or `torus:p,q`.
    #[staticmethod]
    fn knot(name: &str) -> PyResult<Self> {
        Ok(Presentation {
            inner: lookup(name).map_err(err)?,
        })
    }

    #[getter]
    fn generators(&self) -> Vec<String> {
        self.inner.names().iter().map(|c| c.to_string()).collect()
    }

    #[getter]
    fn relators(&self) -> Vec<String> {
        self.inner
            .relators()
            .iter()
            .map(|w| w.format(self.inner.names()))
            .collect()
    }

    #[getter]
    fn weights(&self) -> Vec<i64> {
        self.inner.weights().to_vec()
    }

    /// Alexander polynomial as a display string.
    fn alexander(&self) -> PyResult<String> {
        Ok(alexander_display(
            &alexander_polynomial(&self.inner).map_err(err)?.poly,
        ))
    }

    /// `(lowest exponent, integer coefficients)` of the normalized polynomial.
    fn alexander_coefficients(&self) -> PyResult<(i64, Vec<i64>)> {
        let poly = alexander_polynomial(&self.inner).map_err(err)?.poly;
        let coeffs = poly
            .integer_coeffs()
            .ok_or_else(|| PyValueError::new_err("polynomial has non-integer coefficients"))?;
        Ok((poly.low(), coeffs))
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Presentation({:?})", self.inner.to_string())
    }
}

/// Diagonal eigenvalue data `lambda_1, ..., lambda_n`.
#[pyclass(frozen, skip_from_py_object, module = "repcone_py")]
struct Eigenvalues {
    inner: EigenvalueData,
}

#[pymethods]
impl Eigenvalues {
    /// Comma list of `cyc:m/k` or `num:re,im` entries.
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        let n = repcone::laurent::parse_root_list(spec).map_err(err)?.len();
        Ok(Eigenvalues {
            inner: EigenvalueData::parse(n, spec).map_err(err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    /// Eigenvalues as complex numbers.
    fn values(&self) -> Vec<C64> {
        self.inner.lambdas().iter().map(|l| l.value()).collect()
    }

    fn __repr__(&self) -> String {
        let s: Vec<String> = self.inner.lambdas().iter().map(|l| l.to_string()).collect();
        format!("Eigenvalues({:?})", s.join(","))
    }
}

/// `(passed, reasons)` for the ratio conditions.
#[pyfunction]
fn check_hypotheses(p: &Presentation, eig: &Eigenvalues) -> PyResult<(bool, Vec<String>)> {
    let delta = alexander_polynomial(&p.inner).map_err(err)?.poly;
    let r = check_hypotheses_with(&delta, &eig.inner);
    Ok((r.passed(), r.reasons().to_vec()))
}

/// Full pipeline; returns the report as a JSON string and the exit code.
#[pyfunction]
#[pyo3(signature = (p, eig, *, samples=100, seed=0, order=4, t=1e-2, tol_rank=1e-8, tol_res=1e-9, jobs=1))]
#[allow(clippy::too_many_arguments)]
fn analyze(
    py: Python<'_>,
    p: &Presentation,
    eig: &Eigenvalues,
    samples: usize,
    seed: u64,
    order: usize,
    t: f64,
    tol_rank: f64,
    tol_res: f64,
    jobs: usize,
) -> PyResult<(String, i32)> {
    if samples == 0 || jobs == 0 || !(t > 0.0 && t < 1.0) {
        return Err(PyValueError::new_err(
            "samples and jobs must be positive and t must lie in (0, 1)",
        ));
    }
    let cfg = AnalysisConfig {
        tol: tolerance(tol_rank, tol_res)?,
        samples,
        seed,
        jobs,
        order,
        t,
    };
    let report = py
        .detach(|| run_analysis(&p.inner, &eig.inner, &cfg))
        .map_err(err)?;
    let text = serde_json::to_string_pretty(&report).map_err(err)?;
    Ok((text, report.exit_code()))
}

/// `(iota, dim, label)` for each cone component at size `n`.
#[pyfunction]
fn cone_components(n: usize) -> PyResult<Vec<(Vec<usize>, usize, Option<&'static str>)>> {
    if n < 2 {
        return Err(PyValueError::new_err("n must be at least 2"));
    }
    Ok(enumerate_components(n)
        .into_iter()
        .map(|c| (c.iota, c.dim, c.label))
        .collect())
}

/// Slice bookkeeping `(dim H1 quotient, dim T abelian, dim T component,
/// intersection, rank dt, h0 triangular)`.
#[pyfunction]
#[pyo3(signature = (p, eig, *, tol_rank=1e-8, tol_res=1e-9))]
fn slice_report(
    p: &Presentation,
    eig: &Eigenvalues,
    tol_rank: f64,
    tol_res: f64,
) -> PyResult<(usize, usize, usize, usize, usize, usize)> {
    let tol = tolerance(tol_rank, tol_res)?;
    let basis = tangent_basis(&p.inner, &eig.inner, &tol).map_err(err)?;
    let (r, _) = character_report(&p.inner, &eig.inner, &basis, &tol).map_err(err)?;
    Ok(r.tuple())
}

/// Built-in knots as `(name, description)`.
#[pyfunction]
fn catalog() -> Vec<(&'static str, &'static str)> {
    entries()
        .into_iter()
        .map(|e| (e.name, e.description))
        .collect()
}

#[pymodule]
fn repcone_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Presentation>()?;
    m.add_class::<Eigenvalues>()?;
    m.add_function(wrap_pyfunction!(check_hypotheses, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(cone_components, m)?)?;
    m.add_function(wrap_pyfunction!(slice_report, m)?)?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    Ok(())
}
