//! Python bindings. Matrices cross the boundary as lists of rows of
//! `complex`; combiners come back as alphabet indices plus the efficiency.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use bscomp::beamspace;
use bscomp::combiner::{self, CombinerMatrix, PhaseAlphabet};
use bscomp::harness::{self, ExperimentConfig, Scheme, SelftestTolerances};
use bscomp::numerics::{self, ComplexMatrix};
use bscomp::solvers::{self, BbOptions, SolverReport};
use bscomp::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Input(_) | Error::Config(_) | Error::Parse { .. } | Error::Dimension(_) | Error::NonFinite => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn to_matrix(rows: Vec<Vec<Complex64>>) -> PyResult<ComplexMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("rows must have equal length"));
    }
    ComplexMatrix::new(n, m, rows.into_iter().flatten().collect()).map_err(py_err)
}

fn from_matrix(a: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    (0..a.rows()).map(|i| a.row(i).to_vec()).collect()
}

/// Outcome of a discrete combiner search.
#[pyclass(frozen, get_all)]
struct Combination {
    /// `K` lists of `L` alphabet indices.
    indices: Vec<Vec<usize>>,
    bits: u32,
    /// Efficiency of the combiner against the input CCM's trace.
    eta: f64,
    nodes_expanded: usize,
    certified: bool,
    /// Per-column Rayleigh quotients on the deflated working CCM.
    rayleigh_quotients: Vec<f64>,
}

#[pymethods]
impl Combination {
    /// The `L × K` unit-modulus combiner.
    fn matrix(&self) -> PyResult<Vec<Vec<Complex64>>> {
        let alphabet = PhaseAlphabet::new(self.bits).map_err(py_err)?;
        let beams = self.indices.first().map_or(0, Vec::len);
        let comb = CombinerMatrix::new(alphabet, beams, self.indices.clone()).map_err(py_err)?;
        Ok(from_matrix(&comb.matrix()))
    }

    fn __repr__(&self) -> String {
        format!(
            "Combination(K={}, bits={}, eta={:.6}, nodes={}, certified={})",
            self.indices.len(),
            self.bits,
            self.eta,
            self.nodes_expanded,
            self.certified
        )
    }
}

fn combination(r: &ComplexMatrix, comb: CombinerMatrix, report: SolverReport) -> PyResult<Combination> {
    let eta = combiner::efficiency(&comb.matrix(), r, r.trace_re()).map_err(py_err)?;
    Ok(Combination {
        indices: comb.indices().to_vec(),
        bits: comb.alphabet().bits(),
        eta,
        nodes_expanded: report.nodes_expanded(),
        certified: report.certified(),
        rayleigh_quotients: report.columns.iter().map(|c| c.rayleigh_quotient).collect(),
    })
}

/// Branch-and-bound beam combination.
#[pyfunction]
#[pyo3(signature = (ccm, k, bits, epsilon=0.0, node_budget=solvers::DEFAULT_NODE_BUDGET, corollary1=false))]
fn bb_bc(
    py: Python<'_>,
    ccm: Vec<Vec<Complex64>>,
    k: usize,
    bits: u32,
    epsilon: f64,
    node_budget: usize,
    corollary1: bool,
) -> PyResult<Combination> {
    let r = to_matrix(ccm)?;
    let alphabet = PhaseAlphabet::new(bits).map_err(py_err)?;
    let opts = BbOptions {
        epsilon,
        node_budget,
        corollary1_bound: corollary1,
        ..Default::default()
    };
    let (comb, report) = py.detach(|| solvers::bb_bc(&r, k, &alphabet, &opts)).map_err(py_err)?;
    combination(&r, comb, report)
}

/// Sequential greedy beam combination.
#[pyfunction]
fn sg_bc(ccm: Vec<Vec<Complex64>>, k: usize, bits: u32) -> PyResult<Combination> {
    let r = to_matrix(ccm)?;
    let alphabet = PhaseAlphabet::new(bits).map_err(py_err)?;
    let (comb, report) = solvers::sg_bc(&r, k, &alphabet).map_err(py_err)?;
    combination(&r, comb, report)
}

/// Exhaustive enumeration; limited to small `B·(L−1)`.
#[pyfunction]
fn exhaustive(py: Python<'_>, ccm: Vec<Vec<Complex64>>, k: usize, bits: u32) -> PyResult<Combination> {
    let r = to_matrix(ccm)?;
    let alphabet = PhaseAlphabet::new(bits).map_err(py_err)?;
    let (comb, report) = py.detach(|| solvers::exhaustive(&r, k, &alphabet)).map_err(py_err)?;
    combination(&r, comb, report)
}

/// Power fraction retained by `combiner` (`L × K`) on `ccm`.
#[pyfunction]
fn efficiency(combiner: Vec<Vec<Complex64>>, ccm: Vec<Vec<Complex64>>, total_power: f64) -> PyResult<f64> {
    combiner::efficiency(&to_matrix(combiner)?, to_matrix(ccm)?, total_power).map_err(py_err)
}

/// Eigenvalues (descending) and eigenvectors (as columns) of a Hermitian matrix.
#[pyfunction]
fn herm_eig(matrix: Vec<Vec<Complex64>>) -> PyResult<(Vec<f64>, Vec<Vec<Complex64>>)> {
    let eig = numerics::herm_eig(&to_matrix(matrix)?).map_err(py_err)?;
    Ok((eig.eigenvalues.clone(), from_matrix(&eig.eigenvectors)))
}

/// Root above the largest pole of `λd − r = Σ w_i/(λ − λ_i)`.
#[pyfunction]
fn solve_secular(poles: Vec<f64>, weights: Vec<f64>, d: f64, r: f64) -> PyResult<f64> {
    let prob = numerics::SecularProblem::new(poles, weights, d, r).map_err(py_err)?;
    numerics::solve_secular(&prob).map_err(py_err)
}

#[pyfunction]
fn leakage_profile(theta: f64, m: usize) -> PyResult<Vec<f64>> {
    beamspace::leakage_profile(theta, m).map_err(py_err)
}

#[pyfunction]
fn estimate_beam_count(spreads: Vec<(f64, f64)>, m: usize) -> PyResult<f64> {
    beamspace::estimate_beam_count(&spreads, m).map_err(py_err)
}

#[pyfunction]
fn parse_ccm(text: &str) -> PyResult<Vec<Vec<Complex64>>> {
    Ok(from_matrix(&harness::parse_ccm(text).map_err(py_err)?))
}

#[pyfunction]
fn format_ccm(matrix: Vec<Vec<Complex64>>) -> PyResult<String> {
    Ok(harness::format_ccm(&to_matrix(matrix)?))
}

/// Experiment configuration; keys match the configuration file.
#[pyclass(name = "ExperimentConfig")]
struct PyConfig {
    inner: ExperimentConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (preset=None, **overrides))]
    fn new(preset: Option<&str>, overrides: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut inner = match preset {
            Some(p) => ExperimentConfig::preset(p).map_err(py_err)?,
            None => ExperimentConfig::default(),
        };
        if let Some(kw) = overrides {
            for (k, v) in kw.iter() {
                let key: String = k.extract()?;
                inner.set(&key, &value_text(&v)?).map_err(py_err)?;
            }
        }
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        let mut inner = ExperimentConfig::default();
        inner.apply_text(text).map_err(py_err)?;
        Ok(Self { inner })
    }

    fn set(&mut self, key: &str, value: &Bound<'_, PyAny>) -> PyResult<()> {
        self.inner.set(key, &value_text(value)?).map_err(py_err)
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("ExperimentConfig({})", self.inner.to_text().trim().replace('\n', ", "))
    }
}

/// Accept `64`, `"2..=12"`, `[1, 2, 3]` or `True` for a configuration value.
fn value_text(v: &Bound<'_, PyAny>) -> PyResult<String> {
    if let Ok(s) = v.extract::<String>() {
        return Ok(s);
    }
    if let Ok(b) = v.extract::<bool>() {
        return Ok(b.to_string());
    }
    if let Ok(items) = v.extract::<Vec<Bound<'_, PyAny>>>() {
        let parts: PyResult<Vec<String>> = items.iter().map(|x| Ok(x.str()?.to_string())).collect();
        return Ok(parts?.join(","));
    }
    Ok(v.str()?.to_string())
}

/// Run a seeded experiment; returns one dict per record.
#[pyfunction]
fn simulate<'py>(py: Python<'py>, config: &PyConfig) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cfg = config.inner.clone();
    let records = py.detach(|| harness::run_experiment(&cfg)).map_err(py_err)?;
    records
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("trial", r.trial)?;
            d.set_item("seed", r.seed)?;
            d.set_item("scheme", r.scheme.as_str())?;
            d.set_item("M", r.antennas)?;
            d.set_item("L", r.beams)?;
            d.set_item("K", r.rf_chains)?;
            d.set_item("B", r.bits)?;
            d.set_item("snr_db", r.snr_db)?;
            d.set_item("eta", r.eta)?;
            d.set_item("eta_opt", r.eta_opt)?;
            d.set_item("nodes", r.nodes)?;
            d.set_item("ms", r.ms)?;
            d.set_item("error", r.error.clone())?;
            Ok(d)
        })
        .collect()
}

/// Render a simulation as the CLI's CSV or JSON report.
#[pyfunction]
#[pyo3(signature = (config, format="csv"))]
fn simulate_report(py: Python<'_>, config: &PyConfig, format: &str) -> PyResult<String> {
    let format: harness::ReportFormat = format.parse().map_err(py_err)?;
    let cfg = config.inner.clone();
    let records = py.detach(|| harness::run_experiment(&cfg)).map_err(py_err)?;
    let mut out = Vec::new();
    harness::write_report(&records, format, &mut out).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    String::from_utf8(out).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Names of the schemes accepted in `scheme`.
#[pyfunction]
fn schemes() -> Vec<&'static str> {
    Scheme::ALL.iter().map(|s| s.as_str()).collect()
}

/// Run the embedded checks; returns `(passed, summary_text)`.
#[pyfunction]
fn selftest(py: Python<'_>) -> (bool, String) {
    let summary = py.detach(|| harness::selftest(&SelftestTolerances::default()));
    (summary.passed(), summary.to_string())
}

#[pymodule]
pub fn bscomp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Combination>()?;
    m.add_class::<PyConfig>()?;
    m.add_function(wrap_pyfunction!(bb_bc, m)?)?;
    m.add_function(wrap_pyfunction!(sg_bc, m)?)?;
    m.add_function(wrap_pyfunction!(exhaustive, m)?)?;
    m.add_function(wrap_pyfunction!(efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(herm_eig, m)?)?;
    m.add_function(wrap_pyfunction!(solve_secular, m)?)?;
    m.add_function(wrap_pyfunction!(leakage_profile, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_beam_count, m)?)?;
    m.add_function(wrap_pyfunction!(parse_ccm, m)?)?;
    m.add_function(wrap_pyfunction!(format_ccm, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_report, m)?)?;
    m.add_function(wrap_pyfunction!(schemes, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
