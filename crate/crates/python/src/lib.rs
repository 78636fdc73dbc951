//! Python bindings.
//!
//! ```python
//! import mininet_py as mn
//! net = mn.Network.reference(2, 10)
//! net.converge()
//! assert all(all(row) for row in net.matrix())
//! print(net.looking_glass(3, "ROUTER1", "bgp"))
//! ```
//!
//! Structured results come back as plain dicts and lists.

use mini_internet::bgpsim::{converge, DEFAULT_MAX_ROUNDS};
use mini_internet::confcli::load_config_script;
use mini_internet::dataplane::trace;
use mini_internet::grader::{check_valley_free, default_rubric, parse_rubric, run_rubric};
use mini_internet::monitor::{as_path_between, connectivity_matrix, diagnose, looking_glass, LgView};
use mini_internet::scenario::{apply_event, lg_dump, Event};
use mini_internet::topo::{
    generate_reference_topology, instantiate, parse_topology_spec, render_topology_spec, Asn,
    DeviceId, DEFAULT_TOPOLOGY,
};
use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn value_err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Serialize to JSON, then hand it to Python's `json.loads`.
fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(value_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "Network", module = "mininet_py")]
struct PyNetwork {
    net: mini_internet::topo::Network,
}

#[pymethods]
impl PyNetwork {
    /// Build from topology text. Auto-configured ASes get reference configs.
    #[new]
    fn new(topology: &str) -> PyResult<Self> {
        let spec = parse_topology_spec(topology).map_err(value_err)?;
        Ok(Self {
            net: instantiate(&spec).map_err(value_err)?,
        })
    }

    /// Generated topology with every AS configured.
    #[staticmethod]
    #[pyo3(signature = (regions=2, ases_per_region=10, configure_all=true))]
    fn reference(regions: u32, ases_per_region: u32, configure_all: bool) -> PyResult<Self> {
        let mut spec = generate_reference_topology(regions, ases_per_region).map_err(value_err)?;
        if configure_all {
            for a in &mut spec.ases {
                a.auto_configured = true;
            }
        }
        Ok(Self {
            net: instantiate(&spec).map_err(value_err)?,
        })
    }

    fn asns(&self) -> Vec<Asn> {
        self.net.spec.asns()
    }

    fn topology(&self) -> String {
        render_topology_spec(&self.net.spec)
    }

    #[pyo3(signature = (max_rounds=DEFAULT_MAX_ROUNDS))]
    fn converge<'py>(&mut self, py: Python<'py>, max_rounds: usize) -> PyResult<Bound<'py, PyAny>> {
        let report = converge(&mut self.net, max_rounds);
        to_py(py, &report)
    }

    /// Apply a configuration script to one device; returns the diagnostics.
    #[pyo3(signature = (asn, device, script, strict=false))]
    fn apply_config<'py>(
        &mut self,
        py: Python<'py>,
        asn: Asn,
        device: &str,
        script: &str,
        strict: bool,
    ) -> PyResult<Bound<'py, PyAny>> {
        let out = load_config_script(&mut self.net, asn, device, script, strict)
            .map_err(|e| PyKeyError::new_err(e.to_string()))?;
        to_py(py, &out)
    }

    /// Apply a scenario event given as a dict, e.g. `{"type": "blank", "asn": 3}`.
    fn event(&mut self, py: Python<'_>, event: &Bound<'_, PyAny>) -> PyResult<Vec<String>> {
        let text: String = py.import("json")?.call_method1("dumps", (event,))?.extract()?;
        let ev: Event = serde_json::from_str(&text).map_err(value_err)?;
        apply_event(&mut self.net, &ev).map_err(value_err)
    }

    /// Rows are sources, columns destinations; True is green.
    fn matrix(&self) -> Vec<Vec<bool>> {
        let m = connectivity_matrix(&self.net);
        m.cells
            .iter()
            .map(|row| row.iter().map(|c| c.is_green()).collect())
            .collect()
    }

    fn matrix_json(&self) -> String {
        connectivity_matrix(&self.net).to_json()
    }

    fn diagnose<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &diagnose(&connectivity_matrix(&self.net)))
    }

    fn looking_glass(&self, asn: Asn, device: &str, view: &str) -> PyResult<String> {
        let view: LgView = view.parse().map_err(value_err)?;
        looking_glass(&self.net, asn, device, view).map_err(|e| PyKeyError::new_err(e.to_string()))
    }

    /// Every looking-glass view of every device, concatenated.
    fn dump(&self) -> String {
        lg_dump(&self.net)
    }

    fn as_path<'py>(&self, py: Python<'py>, src: Asn, dst: Asn) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &as_path_between(&self.net, src, dst))
    }

    #[pyo3(signature = (asn, device, dst, flow_id=0))]
    fn trace<'py>(&self, py: Python<'py>, asn: Asn, device: &str, dst: &str, flow_id: u64) -> PyResult<Bound<'py, PyAny>> {
        let dst = dst.parse().map_err(value_err)?;
        let id = DeviceId::new(asn, device);
        if !self.net.devices.contains_key(&id) {
            return Err(PyKeyError::new_err(format!("unknown device {id}")));
        }
        to_py(py, &trace(&self.net, &id, dst, flow_id))
    }

    /// Grade one AS; `rubric` is rubric text, the default rubric if omitted.
    #[pyo3(signature = (asn, rubric=None))]
    fn grade<'py>(&self, py: Python<'py>, asn: Asn, rubric: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
        let r = match rubric {
            Some(t) => parse_rubric(t).map_err(value_err)?,
            None => default_rubric(asn),
        };
        to_py(py, &run_rubric(&self.net, asn, &r))
    }

    fn valley_violations<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &check_valley_free(&self.net))
    }
}

#[pyfunction]
fn default_topology() -> &'static str {
    DEFAULT_TOPOLOGY
}

#[pyfunction]
fn generate_topology(regions: u32, ases_per_region: u32) -> PyResult<String> {
    generate_reference_topology(regions, ases_per_region)
        .map(|s| render_topology_spec(&s))
        .map_err(value_err)
}

#[pymodule]
fn mininet_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNetwork>()?;
    m.add_function(wrap_pyfunction!(default_topology, m)?)?;
    m.add_function(wrap_pyfunction!(generate_topology, m)?)?;
    Ok(())
}
