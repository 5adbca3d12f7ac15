//! Python bindings. Matrices cross the boundary as nested lists of `complex`,
//! reports and summaries as JSON strings.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use witness::bounds::{self, LocalFidelities};
use witness::channel::{self, ChannelSpec, QuantumChannel, Qubit};
use witness::charops::{self, characteristic_op, OpClass};
use witness::cli::{self, GateSpec, ParamRange, ScenarioConfig};
use witness::json::to_string_precise;
use witness::states::{Axis, ProductBasis};
use witness::{ComplexMatrix, Error};

fn py_err(e: Error) -> PyErr {
    if e.is_usage() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

trait OrPy<T> {
    fn or_py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for Result<T, Error> {
    fn or_py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn to_matrix(rows: Vec<Vec<Complex64>>) -> PyResult<ComplexMatrix> {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != n_cols) {
        return Err(PyValueError::new_err("matrix rows have different lengths"));
    }
    ComplexMatrix::new(n_rows, n_cols, rows.into_iter().flatten().collect()).or_py()
}

fn from_matrix(m: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    m.entries().chunks(m.cols()).map(<[Complex64]>::to_vec).collect()
}

fn gate_or_cnot(gate: Option<Vec<Vec<Complex64>>>) -> PyResult<ComplexMatrix> {
    gate.map_or_else(|| Ok(channel::ideal_cnot()), to_matrix)
}

fn parse_basis(label: &str) -> PyResult<ProductBasis> {
    label.parse().or_py()
}

fn parse_axis(label: &str) -> PyResult<Axis> {
    let mut chars = label.chars();
    match (
        chars.next().and_then(|c| Axis::from_label(c.to_ascii_lowercase())),
        chars.next(),
    ) {
        (Some(axis), None) => Ok(axis),
        _ => Err(PyValueError::new_err(format!("axis must be x, y or z, got {label:?}"))),
    }
}

/// A completely positive, trace-preserving map in Kraus form.
#[pyclass(name = "Channel", frozen)]
struct PyChannel {
    inner: QuantumChannel,
}

#[pymethods]
impl PyChannel {
    #[new]
    fn new(kraus: Vec<Vec<Vec<Complex64>>>) -> PyResult<Self> {
        let ops = kraus.into_iter().map(to_matrix).collect::<PyResult<Vec<_>>>()?;
        Ok(PyChannel {
            inner: QuantumChannel::new(ops).or_py()?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (dim = 4))]
    fn identity(dim: usize) -> Self {
        PyChannel {
            inner: QuantumChannel::identity(dim),
        }
    }

    #[staticmethod]
    fn unitary(u: Vec<Vec<Complex64>>) -> PyResult<Self> {
        Ok(PyChannel {
            inner: channel::unitary_channel(&to_matrix(u)?).or_py()?,
        })
    }

    #[staticmethod]
    fn cnot() -> PyResult<Self> {
        Ok(PyChannel {
            inner: channel::unitary_channel(&channel::ideal_cnot()).or_py()?,
        })
    }

    #[staticmethod]
    fn depolarizing(p: f64) -> PyResult<Self> {
        Ok(PyChannel {
            inner: channel::depolarizing(p).or_py()?,
        })
    }

    #[staticmethod]
    fn dephasing(p: f64, qubit: &str, axis: &str) -> PyResult<Self> {
        let which = match qubit {
            "control" => Qubit::Control,
            "target" => Qubit::Target,
            other => {
                return Err(PyValueError::new_err(format!(
                    "qubit must be control or target, got {other:?}"
                )))
            }
        };
        Ok(PyChannel {
            inner: channel::dephasing(p, which, parse_axis(axis)?).or_py()?,
        })
    }

    #[staticmethod]
    fn overrotation(theta: f64) -> PyResult<Self> {
        Ok(PyChannel {
            inner: channel::coherent_overrotation(theta).or_py()?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (rank, seed, dim = 4))]
    fn random(rank: usize, seed: u64, dim: usize) -> PyResult<Self> {
        Ok(PyChannel {
            inner: channel::random_channel(dim, rank, seed).or_py()?,
        })
    }

    /// Noise channel from a config-style JSON object, e.g. `{"type": "depolarizing", "p": 0.1}`.
    #[staticmethod]
    fn from_spec(spec: &str) -> PyResult<Self> {
        let spec: ChannelSpec = serde_json::from_str(spec).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyChannel {
            inner: spec.build().or_py()?,
        })
    }

    /// This channel followed by `next`.
    fn then(&self, next: &PyChannel) -> PyResult<Self> {
        Ok(PyChannel {
            inner: self.inner.then(&next.inner).or_py()?,
        })
    }

    /// `(1 - weight)·self + weight·other`.
    fn mix(&self, other: &PyChannel, weight: f64) -> PyResult<Self> {
        Ok(PyChannel {
            inner: self.inner.mix(&other.inner, weight).or_py()?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn kraus_ops(&self) -> Vec<Vec<Vec<Complex64>>> {
        self.inner.kraus_ops().iter().map(from_matrix).collect()
    }

    fn apply(&self, rho: Vec<Vec<Complex64>>) -> PyResult<Vec<Vec<Complex64>>> {
        Ok(from_matrix(&self.inner.apply(&to_matrix(rho)?).or_py()?))
    }

    fn choi(&self) -> PyResult<Vec<Vec<Complex64>>> {
        Ok(from_matrix(channel::choi(&self.inner).or_py()?.matrix()))
    }

    /// Process fidelity against an ideal unitary (default: the CNOT).
    #[pyo3(signature = (gate = None))]
    fn process_fidelity(&self, gate: Option<Vec<Vec<Complex64>>>) -> PyResult<f64> {
        channel::process_fidelity(&self.inner, &gate_or_cnot(gate)?).or_py()
    }

    fn __repr__(&self) -> String {
        format!(
            "Channel(dim={}, kraus_rank={})",
            self.inner.dim(),
            self.inner.kraus_ops().len()
        )
    }
}

/// The ideal CNOT, control first.
#[pyfunction]
fn cnot() -> Vec<Vec<Complex64>> {
    from_matrix(&channel::ideal_cnot())
}

/// Classification label of each of the nine input bases, keyed like `"xz"`.
/// Cells that fail to classify map to `"other"`.
#[pyfunction]
#[pyo3(signature = (gate = None))]
fn classify<'py>(py: Python<'py>, gate: Option<Vec<Vec<Complex64>>>) -> PyResult<Bound<'py, PyDict>> {
    let grid = charops::classification_grid(&gate_or_cnot(gate)?).or_py()?;
    let out = PyDict::new(py);
    for basis in ProductBasis::all() {
        let cell = &grid[basis.control.index()][basis.target.index()];
        out.set_item(basis.label(), cell.as_ref().map_or("other", |c| OpClass::label(*c)))?;
    }
    Ok(out)
}

/// Classical fidelity of the characteristic operation on `basis`.
#[pyfunction]
#[pyo3(signature = (channel, basis, gate = None))]
fn classical_fidelity(channel: &PyChannel, basis: &str, gate: Option<Vec<Vec<Complex64>>>) -> PyResult<f64> {
    let op = characteristic_op(&gate_or_cnot(gate)?, parse_basis(basis)?).or_py()?;
    Ok(charops::classical_fidelity(&channel.inner, &op).or_py()?.value)
}

/// All nine classical fidelities keyed by record name, e.g. `"F_zz->zz"`.
#[pyfunction]
#[pyo3(signature = (channel, gate = None))]
fn classical_fidelities<'py>(
    py: Python<'py>,
    channel: &PyChannel,
    gate: Option<Vec<Vec<Complex64>>>,
) -> PyResult<Bound<'py, PyDict>> {
    let ops = charops::enumerate_characteristic_ops(&gate_or_cnot(gate)?).or_py()?;
    let out = PyDict::new(py);
    for record in charops::classical_fidelities(&channel.inner, &ops).or_py()? {
        out.set_item(record.name, record.value)?;
    }
    Ok(out)
}

/// Entanglement fidelity of an entangling operation, read out with a Bell
/// measurement (`route="bell"`) or from three local parities (`route="local"`).
#[pyfunction]
#[pyo3(signature = (channel, basis, route = "bell"))]
fn entanglement_fidelity(channel: &PyChannel, basis: &str, route: &str) -> PyResult<f64> {
    let gate = channel::ideal_cnot();
    let op = characteristic_op(&gate, parse_basis(basis)?).or_py()?;
    let record = match route {
        "bell" => charops::entanglement_fidelity_bell(&channel.inner, &op),
        "local" => charops::entanglement_fidelity_local(&channel.inner, &op, &gate),
        other => {
            return Err(PyValueError::new_err(format!(
                "route must be bell or local, got {other:?}"
            )))
        }
    };
    Ok(record.or_py()?.value)
}

/// `(lower, upper)` process-fidelity bounds from two complementary fidelities.
#[pyfunction]
fn process_bounds_pair(f_n: f64, f_k: f64) -> PyResult<(f64, f64)> {
    let b = bounds::process_bounds_pair(f_n, f_k).or_py()?;
    Ok((b.lower, b.upper))
}

/// `(lower, upper)` process-fidelity bounds from the ZZ, XX, ZY and YX fidelities.
#[pyfunction]
fn process_bounds(f_zz: f64, f_xx: f64, f_zy: f64, f_yx: f64) -> PyResult<(f64, f64)> {
    let b = LocalFidelities {
        zz: f_zz,
        xx: f_xx,
        zy: f_zy,
        yx: f_yx,
    }
    .process_bounds()
    .or_py()?;
    Ok((b.lower, b.upper))
}

#[pyfunction]
fn gate_entanglement_capability(f_zz: f64, f_xx: f64, f_zy: f64, f_yx: f64) -> PyResult<f64> {
    bounds::gate_entanglement_capability(f_zz, f_xx, f_zy, f_yx).or_py()
}

#[pyfunction]
fn wootters_concurrence(rho: Vec<Vec<Complex64>>) -> PyResult<f64> {
    bounds::wootters_concurrence(&to_matrix(rho)?).or_py()
}

/// Runs a scenario config (JSON text) and returns the report as JSON text.
#[pyfunction]
fn report(config: &str) -> PyResult<String> {
    let config = ScenarioConfig::from_json(config).or_py()?;
    to_string_precise(&cli::cmd_report(&config).or_py()?).or_py()
}

/// Sweeps the noise parameter over `LO:HI:STEPS`; returns JSON text.
#[pyfunction]
fn sweep(config: &str, param_range: &str) -> PyResult<String> {
    let config = ScenarioConfig::from_json(config).or_py()?;
    let range: ParamRange = param_range.parse().or_py()?;
    to_string_precise(&cli::cmd_sweep(&config, &range).or_py()?).or_py()
}

/// Randomized soundness campaign; returns the summary as JSON text.
#[pyfunction]
#[pyo3(signature = (channels, seed = 0, rank = None, mix_identity = false))]
fn verify_bounds(channels: usize, seed: u64, rank: Option<usize>, mix_identity: bool) -> PyResult<String> {
    to_string_precise(&cli::cmd_verify_bounds(channels, seed, rank, mix_identity).or_py()?).or_py()
}

/// Rendered classification table of a named gate or a JSON matrix.
#[pyfunction]
#[pyo3(signature = (gate = "cnot"))]
fn table(gate: &str) -> PyResult<String> {
    let spec: GateSpec = gate.parse().or_py()?;
    Ok(cli::render_table(&cli::cmd_table(&spec).or_py()?))
}

#[pymodule]
fn gate_witness(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChannel>()?;
    m.add_function(wrap_pyfunction!(cnot, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(classical_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(classical_fidelities, m)?)?;
    m.add_function(wrap_pyfunction!(entanglement_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(process_bounds_pair, m)?)?;
    m.add_function(wrap_pyfunction!(process_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(gate_entanglement_capability, m)?)?;
    m.add_function(wrap_pyfunction!(wootters_concurrence, m)?)?;
    m.add_function(wrap_pyfunction!(report, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(verify_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(table, m)?)?;
    Ok(())
}
