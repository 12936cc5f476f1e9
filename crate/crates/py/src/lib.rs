//! Python bindings for the certification toolkit. Matrices cross the
//! boundary as nested lists of complex numbers; reports come back as dicts
//! mirroring the JSON the command-line tool emits.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use schurcert::dilation::{
    build_dilation, verify_dilation as core_verify_dilation, TruncatedDilation, DEFAULT_DEPTH,
};
use schurcert::linalg::{
    polar_decompose as core_polar, schatten_norm as core_schatten, ComplexMatrix, TraceMode,
    DEFAULT_TOL,
};
use schurcert::opalg::norming_functional as core_norming;
use schurcert::schur::SchurSymbol;
use schurcert::witness::{
    fourier_witness as core_fourier, gram_of, search_witness as core_search,
    verify_witness as core_verify, SearchConfig, SearchOutcome, StepRule, UnitaryWitness,
    DEFAULT_TARGET_RESIDUAL,
};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_matrix(rows: Vec<Vec<Complex64>>) -> PyResult<ComplexMatrix> {
    ComplexMatrix::from_rows(&rows).map_err(value_error)
}

fn from_matrix(m: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Symbol matrix of an entrywise multiplier.
#[pyclass]
#[derive(Clone)]
struct Symbol {
    inner: SchurSymbol,
}

#[pymethods]
impl Symbol {
    #[new]
    fn new(m: Vec<Vec<Complex64>>) -> PyResult<Self> {
        Ok(Self {
            inner: SchurSymbol::new(to_matrix(m)?).map_err(value_error)?,
        })
    }

    #[staticmethod]
    fn identity(n: usize) -> Self {
        Self {
            inner: SchurSymbol::identity(n),
        }
    }

    #[staticmethod]
    fn all_ones(n: usize) -> Self {
        Self {
            inner: SchurSymbol::all_ones(n),
        }
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        from_matrix(self.inner.matrix())
    }

    /// Validity flags at the given tolerance.
    #[pyo3(signature = (tol = DEFAULT_TOL))]
    fn validate<'py>(&self, py: Python<'py>, tol: f64) -> PyResult<Bound<'py, PyDict>> {
        let report = self.inner.validate_symbol(tol);
        let out = PyDict::new_bound(py);
        out.set_item("hermitian", report.hermitian)?;
        out.set_item("psd", report.psd)?;
        out.set_item("unit_diagonal", report.unit_diagonal)?;
        out.set_item("min_eigenvalue", report.min_eigenvalue)?;
        out.set_item("valid", report.is_valid())?;
        Ok(out)
    }

    /// Entrywise product with the symbol.
    fn apply(&self, a: Vec<Vec<Complex64>>) -> PyResult<Vec<Vec<Complex64>>> {
        let result = self
            .inner
            .apply_multiplier(&to_matrix(a)?)
            .map_err(value_error)?;
        Ok(from_matrix(&result))
    }

    fn choi(&self) -> Vec<Vec<Complex64>> {
        from_matrix(&self.inner.choi_matrix())
    }

    fn __repr__(&self) -> String {
        format!("Symbol(n={})", self.inner.n())
    }
}

/// Family of unitaries whose normalized Gram matrix realizes a symbol.
#[pyclass]
#[derive(Clone)]
struct Witness {
    inner: UnitaryWitness,
}

#[pymethods]
impl Witness {
    #[new]
    fn new(v: Vec<Vec<Vec<Complex64>>>) -> PyResult<Self> {
        let matrices = v
            .into_iter()
            .map(to_matrix)
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Self {
            inner: UnitaryWitness::new(matrices).map_err(value_error)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    fn matrices(&self) -> Vec<Vec<Vec<Complex64>>> {
        self.inner.matrices().iter().map(from_matrix).collect()
    }

    /// Normalized Gram matrix g_ij = tr(v_i^* v_j) / d.
    fn gram(&self) -> Vec<Vec<Complex64>> {
        from_matrix(&gram_of(&self.inner))
    }

    fn __repr__(&self) -> String {
        format!("Witness(n={}, d={})", self.inner.n(), self.inner.d())
    }
}

/// Diagonal root-of-unity witness for the identity symbol.
#[pyfunction]
fn fourier_witness(n: usize) -> PyResult<Witness> {
    if n == 0 {
        return Err(value_error("fourier witness needs n >= 1"));
    }
    Ok(Witness {
        inner: core_fourier(n),
    })
}

/// Independent re-check of a witness against a symbol.
#[pyfunction]
#[pyo3(signature = (witness, symbol, tol = DEFAULT_TOL))]
fn verify_witness<'py>(
    py: Python<'py>,
    witness: &Witness,
    symbol: &Symbol,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let report = core_verify(&witness.inner, &symbol.inner, tol).map_err(value_error)?;
    let out = PyDict::new_bound(py);
    out.set_item("unitarity_defect", report.unitarity_defect)?;
    out.set_item("residual", report.residual)?;
    out.set_item("pass", report.pass)?;
    Ok(out)
}

/// Multi-start Riemannian search for a witness. Returns a dict with the
/// found flag, the (best) witness, and its residual.
#[pyfunction]
#[pyo3(signature = (
    symbol,
    d_min = 1,
    d_max = 8,
    restarts = 50,
    max_iters = 2000,
    target_residual = DEFAULT_TARGET_RESIDUAL,
    seed = 0,
    diagonal_only = false,
))]
#[allow(clippy::too_many_arguments)]
fn search_witness<'py>(
    py: Python<'py>,
    symbol: &Symbol,
    d_min: usize,
    d_max: usize,
    restarts: usize,
    max_iters: usize,
    target_residual: f64,
    seed: u64,
    diagonal_only: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let config = SearchConfig {
        d_min,
        d_max,
        restarts,
        max_iters,
        target_residual,
        seed,
        step_rule: StepRule::Backtracking,
        diagonal_only,
    };
    let outcome = core_search(&symbol.inner, &config).map_err(value_error)?;
    let out = PyDict::new_bound(py);
    match outcome {
        SearchOutcome::Found { witness } => {
            out.set_item("found", true)?;
            out.set_item("residual", witness.residual_claim())?;
            out.set_item("witness", Py::new(py, Witness { inner: witness })?)?;
        }
        SearchOutcome::NotFound {
            best_residual,
            best_witness,
        } => {
            out.set_item("found", false)?;
            out.set_item("residual", best_residual)?;
            out.set_item("witness", Py::new(py, Witness { inner: best_witness })?)?;
        }
    }
    Ok(out)
}

/// Truncated shift dilation of the multipliers certified by a family of
/// witnesses, exact on words of length up to the depth.
#[pyclass]
struct Dilation {
    inner: TruncatedDilation,
}

#[pymethods]
impl Dilation {
    #[new]
    #[pyo3(signature = (witnesses, depth = DEFAULT_DEPTH))]
    fn new(witnesses: Vec<Witness>, depth: usize) -> PyResult<Self> {
        let family: Vec<UnitaryWitness> = witnesses.into_iter().map(|w| w.inner).collect();
        Ok(Self {
            inner: build_dilation(&family, depth).map_err(value_error)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn depth(&self) -> usize {
        self.inner.depth()
    }

    #[getter]
    fn block_dim(&self) -> usize {
        self.inner.block_dim()
    }

    #[getter]
    fn total_dim(&self) -> usize {
        self.inner.total_dim()
    }

    #[getter]
    fn multiplier_count(&self) -> usize {
        self.inner.multiplier_count()
    }

    /// Unital embedding x ↦ x ⊗ 1.
    fn embed(&self, x: Vec<Vec<Complex64>>) -> PyResult<Vec<Vec<Complex64>>> {
        let out = self.inner.embed_j(&to_matrix(x)?).map_err(value_error)?;
        Ok(from_matrix(&out))
    }

    /// Trace-preserving conditional expectation onto the embedded corner.
    fn expect(&self, y: Vec<Vec<Complex64>>) -> PyResult<Vec<Vec<Complex64>>> {
        let out = self.inner.expect_e(&to_matrix(y)?).map_err(value_error)?;
        Ok(from_matrix(&out))
    }

    /// The l-th dilating automorphism: shifted conjugation by the l-th
    /// block unitary.
    fn apply_u(&self, l: usize, y: Vec<Vec<Complex64>>) -> PyResult<Vec<Vec<Complex64>>> {
        let out = self.inner.apply_u(l, &to_matrix(y)?).map_err(value_error)?;
        Ok(from_matrix(&out))
    }

    /// Cyclic right shift of the whole tensor block.
    fn shift(&self, y: Vec<Vec<Complex64>>) -> PyResult<Vec<Vec<Complex64>>> {
        let out = self.inner.shift_s(&to_matrix(y)?).map_err(value_error)?;
        Ok(from_matrix(&out))
    }

    /// Checks the dilation identity for all multi-indices up to the depth,
    /// plus commutation, trace preservation, and trace duality.
    #[pyo3(signature = (symbols, tol = DEFAULT_TOL))]
    fn verify<'py>(
        &self,
        py: Python<'py>,
        symbols: Vec<Symbol>,
        tol: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let symbols: Vec<SchurSymbol> = symbols.into_iter().map(|s| s.inner).collect();
        let report = core_verify_dilation(&self.inner, &symbols, tol).map_err(value_error)?;
        let per_index = PyDict::new_bound(py);
        for (label, dev) in &report.per_index {
            per_index.set_item(label, dev)?;
        }
        let out = PyDict::new_bound(py);
        out.set_item("max_deviation", report.max_deviation)?;
        out.set_item("per_index", per_index)?;
        out.set_item("commutator_norm", report.commutator_norm)?;
        out.set_item("trace_defect", report.trace_defect)?;
        out.set_item("duality_defect", report.duality_defect)?;
        out.set_item("pass", report.pass)?;
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!(
            "Dilation(n={}, depth={}, total_dim={})",
            self.inner.n(),
            self.inner.depth(),
            self.inner.total_dim()
        )
    }
}

/// Norming functional y for x in Schatten p: tr(x·y) = ‖x‖_p, ‖y‖_q = 1.
#[pyfunction]
fn norming_functional<'py>(
    py: Python<'py>,
    x: Vec<Vec<Complex64>>,
    p: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let pair = core_norming(&to_matrix(x)?, p).map_err(value_error)?;
    let out = PyDict::new_bound(py);
    out.set_item("y", from_matrix(&pair.y))?;
    out.set_item("p", pair.p)?;
    out.set_item("q", pair.q)?;
    Ok(out)
}

/// Schatten p-norm; normalized mode uses the trace divided by the side.
#[pyfunction]
#[pyo3(signature = (x, p, normalized = false))]
fn schatten_norm(x: Vec<Vec<Complex64>>, p: f64, normalized: bool) -> PyResult<f64> {
    let mode = if normalized {
        TraceMode::Normalized
    } else {
        TraceMode::Standard
    };
    core_schatten(&to_matrix(x)?, p, mode).map_err(value_error)
}

/// Polar decomposition x = u·|x|, returned as the pair (u, |x|).
#[pyfunction]
fn polar_decompose(
    x: Vec<Vec<Complex64>>,
) -> PyResult<(Vec<Vec<Complex64>>, Vec<Vec<Complex64>>)> {
    let polar = core_polar(&to_matrix(x)?).map_err(value_error)?;
    Ok((from_matrix(&polar.u), from_matrix(&polar.absx)))
}

#[pymodule]
fn schurcert_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Symbol>()?;
    m.add_class::<Witness>()?;
    m.add_class::<Dilation>()?;
    m.add_function(wrap_pyfunction!(fourier_witness, m)?)?;
    m.add_function(wrap_pyfunction!(verify_witness, m)?)?;
    m.add_function(wrap_pyfunction!(search_witness, m)?)?;
    m.add_function(wrap_pyfunction!(norming_functional, m)?)?;
    m.add_function(wrap_pyfunction!(schatten_norm, m)?)?;
    m.add_function(wrap_pyfunction!(polar_decompose, m)?)?;
    m.add("DEFAULT_TOL", DEFAULT_TOL)?;
    m.add("DEFAULT_TARGET_RESIDUAL", DEFAULT_TARGET_RESIDUAL)?;
    m.add("DEFAULT_DEPTH", DEFAULT_DEPTH)?;
    Ok(())
}
