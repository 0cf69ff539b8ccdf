//! Python bindings: build, simulate, verify and serialize circuits.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use spikearith_core::bricks::BuildOptions;
use spikearith_core::streams;
use spikearith_core::verify::{self, Circuit, CircuitOptions, Mutation, SweepMode, SweepSpec};
use spikearith_core::{DelayStrategy, LoweredNetwork, Signedness};

fn py_err(e: spikearith_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn signedness(signed: bool) -> Signedness {
    if signed {
        Signedness::TwosComplement
    } else {
        Signedness::Unsigned
    }
}

fn parsed<T: std::str::FromStr<Err = spikearith_core::Error>>(
    s: Option<&str>,
) -> PyResult<Option<T>> {
    s.map(str::parse).transpose().map_err(py_err)
}

/// A lowered circuit: a flat spiking network plus its port schedule.
#[pyclass(name = "Network", module = "spikearith", frozen)]
pub struct PyNetwork {
    inner: LoweredNetwork,
    circuit: Option<(Circuit, u32)>,
}

#[pymethods]
impl PyNetwork {
    /// Build a library circuit at `width` bits.
    #[staticmethod]
    #[pyo3(signature = (name, width, leak=None, variant=None, mode=None, scalar=None, relay_chain=false))]
    fn circuit(
        name: &str,
        width: u32,
        leak: Option<&str>,
        variant: Option<&str>,
        mode: Option<&str>,
        scalar: Option<u64>,
        relay_chain: bool,
    ) -> PyResult<Self> {
        let opts = CircuitOptions {
            leak: parsed(leak)?,
            variant: parsed(variant)?,
            mode: parsed(mode)?,
            scalar,
        };
        let c = Circuit::named(name, &opts).map_err(py_err)?;
        let strategy = if relay_chain {
            DelayStrategy::RelayChain
        } else {
            DelayStrategy::Synapse
        };
        let inner = c
            .lower(width, &BuildOptions::default(), strategy)
            .map_err(py_err)?;
        Ok(PyNetwork {
            inner,
            circuit: Some((c, width)),
        })
    }

    #[staticmethod]
    fn from_netlist(text: &str) -> PyResult<Self> {
        Ok(PyNetwork {
            inner: LoweredNetwork::from_netlist_json(text).map_err(py_err)?,
            circuit: None,
        })
    }

    fn to_netlist(&self) -> String {
        self.inner.to_netlist_json()
    }

    fn to_dot(&self) -> String {
        self.inner.to_dot()
    }

    #[getter]
    fn neuron_count(&self) -> usize {
        self.inner.network.len()
    }

    #[getter]
    fn horizon(&self) -> u64 {
        self.inner.horizon()
    }

    /// `{port: (offset, width, signed)}` for every input and output.
    #[getter]
    fn schedule(&self) -> BTreeMap<String, (u64, u32, bool)> {
        self.inner
            .schedule
            .iter()
            .map(|(k, s)| {
                let signed = s.signedness == Signedness::TwosComplement;
                (k.clone(), (s.offset, s.width, signed))
            })
            .collect()
    }

    #[getter]
    fn inputs(&self) -> Vec<String> {
        self.inner.network.inputs().keys().cloned().collect()
    }

    #[getter]
    fn outputs(&self) -> Vec<String> {
        self.inner.network.outputs().keys().cloned().collect()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels.clone()
    }

    /// Decoded value of every output. For a library mux, `stop` defaults
    /// to `select`.
    fn evaluate(&self, operands: BTreeMap<String, i64>) -> PyResult<BTreeMap<String, i64>> {
        self.inner
            .evaluate(&self.complete(operands))
            .map_err(py_err)
    }

    /// Spike raster as `(time, neuron)` pairs in time order.
    fn simulate(&self, operands: BTreeMap<String, i64>) -> PyResult<Vec<(u64, u32)>> {
        let r = self
            .inner
            .simulate(&self.complete(operands))
            .map_err(py_err)?;
        Ok(r.events.iter().map(|e| (e.time, e.neuron.0)).collect())
    }

    fn raster_csv(&self, operands: BTreeMap<String, i64>) -> PyResult<String> {
        let r = self
            .inner
            .simulate(&self.complete(operands))
            .map_err(py_err)?;
        Ok(r.to_csv())
    }

    /// Integer oracle for a library circuit, `None` for imported netlists.
    fn expected(&self, operands: BTreeMap<String, i64>) -> PyResult<Option<i64>> {
        let Some((c, k)) = self.circuit else {
            return Ok(None);
        };
        let values = c
            .operands(k)
            .iter()
            .map(|(n, _)| {
                operands
                    .get(*n)
                    .copied()
                    .ok_or_else(|| PyValueError::new_err(format!("missing operand {n}")))
            })
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Some(c.expected(k, &values)))
    }

    fn __repr__(&self) -> String {
        let name = self
            .circuit
            .map_or("netlist".to_string(), |(c, k)| format!("{c} k={k}"));
        format!("<Network {name}: {} neurons>", self.inner.network.len())
    }
}

impl PyNetwork {
    fn complete(&self, mut operands: BTreeMap<String, i64>) -> BTreeMap<String, i64> {
        if matches!(self.circuit, Some((Circuit::Mux, _))) && !operands.contains_key("stop") {
            if let Some(&s) = operands.get("select") {
                operands.insert("stop".into(), s);
            }
        }
        operands
    }
}

/// Outcome of a verification sweep.
#[pyclass(name = "Report", module = "spikearith", frozen)]
pub struct PyReport {
    inner: verify::Report,
}

#[pymethods]
impl PyReport {
    #[getter]
    fn passed(&self) -> bool {
        self.inner.passed()
    }

    #[getter]
    fn cases(&self) -> u64 {
        self.inner.cases
    }

    #[getter]
    fn failures(&self) -> u64 {
        self.inner.failures
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.inner).expect("report serializes")
    }

    fn __repr__(&self) -> String {
        format!(
            "<Report cases={} failures={}>",
            self.inner.cases, self.inner.failures
        )
    }
}

/// Spike times of `value` as a little-endian stream starting at `offset`.
#[pyfunction]
#[pyo3(signature = (value, width, offset=0, signed=false))]
fn encode(value: i64, width: u32, offset: u64, signed: bool) -> PyResult<Vec<u64>> {
    streams::encode(value, width, offset, signedness(signed)).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (times, width, offset=0, signed=false))]
fn decode(times: Vec<u64>, width: u32, offset: u64, signed: bool) -> i64 {
    streams::decode_times(&times, offset, width, signedness(signed))
}

/// Sweep a circuit family against its oracle. `samples` switches to seeded
/// random sampling; `mutation` indexes `mutations()`.
#[pyfunction]
#[pyo3(signature = (circuit="all", widths=vec![1, 2, 3, 4], samples=None, seed=verify::DEFAULT_SEED, mutation=None))]
fn verify_circuits(
    py: Python<'_>,
    circuit: &str,
    widths: Vec<u32>,
    samples: Option<usize>,
    seed: u64,
    mutation: Option<usize>,
) -> PyResult<PyReport> {
    let circuits = Circuit::family(circuit).map_err(py_err)?;
    let mode = match samples {
        Some(samples) => SweepMode::Randomized { samples, seed },
        None => SweepMode::Exhaustive,
    };
    let mut spec = SweepSpec::new(circuits, widths, mode);
    if let Some(i) = mutation {
        let all = Mutation::documented();
        spec.mutation = Some(
            *all.get(i)
                .ok_or_else(|| PyValueError::new_err(format!("no mutation {i}")))?,
        );
    }
    let inner = py.detach(|| verify::sweep(&spec)).map_err(py_err)?;
    Ok(PyReport { inner })
}

/// Descriptions of the documented mutations, in index order.
#[pyfunction]
fn mutations() -> Vec<String> {
    Mutation::documented()
        .iter()
        .map(ToString::to_string)
        .collect()
}

#[pymodule]
fn spikearith(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNetwork>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(encode, m)?)?;
    m.add_function(wrap_pyfunction!(decode, m)?)?;
    m.add_function(wrap_pyfunction!(verify_circuits, m)?)?;
    m.add_function(wrap_pyfunction!(mutations, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use pyo3::types::PyDict;

    #[test]
    fn module_round_trip() {
        Python::initialize();
        Python::attach(|py| {
            let m = PyModule::new(py, "spikearith").unwrap();
            spikearith(&m).unwrap();
            let locals = PyDict::new(py);
            locals.set_item("sa", m).unwrap();
            py.run(
                c"
net = sa.Network.circuit('variable_mult', 3)
assert net.evaluate({'X': 5, 'Y': 6}) == {'P': 30}
assert sa.Network.from_netlist(net.to_netlist()).evaluate({'X': 7, 'Y': 7}) == {'P': 49}
assert sa.decode(sa.encode(-3, 4, 2, True), 4, 2, True) == -3
",
                None,
                Some(&locals),
            )
            .unwrap();
        });
    }

    #[test]
    fn bad_options_raise() {
        Python::initialize();
        Python::attach(|py| {
            let err = PyNetwork::circuit("not", 3, Some("sideways"), None, None, None, false)
                .err()
                .unwrap();
            assert!(err.is_instance_of::<PyValueError>(py));
            assert!(PyNetwork::circuit("scalar_mult", 3, None, None, None, None, false).is_err());
        });
    }
}
