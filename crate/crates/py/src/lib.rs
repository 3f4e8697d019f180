//! Python bindings: lattice parameters, solved discrete conformal maps,
//! Schwarzian evaluation, and the convergence sweep.

use dcl_core::analytic::AnalyticFunction;
use dcl_core::harness::{reference_map, run_experiment, ExperimentConfig, RegionSpec};
use dcl_core::lattice::{Dir, Disc, LatticeParams, VertexId};
use dcl_core::solver::DiscreteMap;
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

fn err(e: dcl_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn dir(k: u8) -> PyResult<Dir> {
    if (1..=6).contains(&k) {
        Ok(Dir::new(k))
    } else {
        Err(PyValueError::new_err("direction must be in 1..=6"))
    }
}

fn make_function(name: &str, params: &[f64]) -> PyResult<AnalyticFunction> {
    AnalyticFunction::from_name(name, params).map_err(err)
}

/// Strictly acute lattice geometry at a mesh size.
#[pyclass]
struct Lattice {
    params: LatticeParams,
}

#[pymethods]
impl Lattice {
    #[new]
    fn new(alpha: f64, beta: f64, epsilon: f64) -> PyResult<Self> {
        Ok(Lattice {
            params: LatticeParams::new(alpha, beta, epsilon).map_err(err)?,
        })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.params.alpha
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.params.beta
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.params.gamma
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.params.epsilon
    }

    /// The constant value of the lattice Laplacian on x^2 and y^2.
    #[getter]
    fn laplacian_constant(&self) -> f64 {
        self.params.c_abg
    }

    /// Position of the vertex with lattice coordinates (n, m).
    fn position(&self, n: i64, m: i64) -> Complex64 {
        self.params.position(VertexId::new(n, m))
    }

    /// Side length ratio L_k for direction k in 1..=6.
    fn length(&self, k: u8) -> PyResult<f64> {
        Ok(self.params.length(dir(k)?))
    }

    /// Unit direction omega_k for direction k in 1..=6.
    fn omega(&self, k: u8) -> PyResult<Complex64> {
        Ok(self.params.omega(dir(k)?))
    }

    /// Reference cross-ratio Q_k of the undeformed lattice.
    fn lattice_cross_ratio(&self, k: u8) -> PyResult<Complex64> {
        Ok(self.params.q(dir(k)?))
    }
}

/// A solved and laid-out discrete conformal map on a disc-shaped piece of
/// the lattice.
#[pyclass]
struct ConformalMap {
    map: DiscreteMap,
    newton_iters: usize,
    max_residual: f64,
}

#[pymethods]
impl ConformalMap {
    /// Solves the Dirichlet problem with boundary values log|f'| for the
    /// named reference function on the disc of the given radius around 0,
    /// and lays out the image mesh.
    #[staticmethod]
    #[pyo3(signature = (function, alpha, beta, epsilon, radius, params = Vec::new()))]
    fn solve(
        function: &str,
        alpha: f64,
        beta: f64,
        epsilon: f64,
        radius: f64,
        params: Vec<f64>,
    ) -> PyResult<Self> {
        let f = make_function(function, &params)?;
        let lp = LatticeParams::new(alpha, beta, epsilon).map_err(err)?;
        let disc = Disc {
            center: Complex64::new(0.0, 0.0),
            radius,
        };
        let (map, sol) = reference_map(&f, &lp, &disc).map_err(err)?;
        Ok(ConformalMap {
            map,
            newton_iters: sol.newton_iters,
            max_residual: sol.max_residual,
        })
    }

    #[getter]
    fn newton_iters(&self) -> usize {
        self.newton_iters
    }

    /// Largest angle-sum residual after the solve.
    #[getter]
    fn max_residual(&self) -> f64 {
        self.max_residual
    }

    fn vertex_count(&self) -> usize {
        self.map.subcomplex().vertices().len()
    }

    /// Lattice coordinates of all vertices, lexicographic order.
    fn vertices(&self) -> Vec<(i64, i64)> {
        self.map
            .subcomplex()
            .vertices()
            .iter()
            .map(|v| (v.n, v.m))
            .collect()
    }

    /// Image position of vertex (n, m).
    fn value(&self, n: i64, m: i64) -> PyResult<Complex64> {
        self.map.value(VertexId::new(n, m)).map_err(err)
    }

    /// Logarithmic scale factor at vertex (n, m).
    fn scale(&self, n: i64, m: i64) -> PyResult<f64> {
        self.map.scale().get(VertexId::new(n, m)).map_err(err)
    }

    /// Piecewise-linear evaluation of the map at a point of the domain.
    fn evaluate(&self, z: Complex64) -> PyResult<Complex64> {
        self.map.evaluate_pl(z).map_err(err)
    }

    /// Discrete Schwarzian on the edge from (n, m) in direction k.
    fn schwarzian(&self, n: i64, m: i64, k: u8) -> PyResult<Complex64> {
        dcl_core::schwarzian::edge_schwarzian(&self.map, VertexId::new(n, m), dir(k)?).map_err(err)
    }
}

/// Complex cross-ratio (a-b)(c-d) / ((b-c)(d-a)).
#[pyfunction]
fn cross_ratio(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> PyResult<Complex64> {
    dcl_core::schwarzian::cross_ratio(a, b, c, d).map_err(err)
}

/// The predicted limits (S_1, S_2, S_3) of the discrete Schwarzians of the
/// named function at z for the given lattice angles.
#[pyfunction]
#[pyo3(signature = (function, alpha, beta, z, params = Vec::new()))]
fn predicted_schwarzians(
    function: &str,
    alpha: f64,
    beta: f64,
    z: Complex64,
    params: Vec<f64>,
) -> PyResult<(Complex64, Complex64, Complex64)> {
    let f = make_function(function, &params)?;
    let lp = LatticeParams::new(alpha, beta, 1.0).map_err(err)?;
    let s = dcl_core::analytic::predicted_s(&f, &lp, z).map_err(err)?;
    Ok((s[0], s[1], s[2]))
}

/// Runs a convergence sweep and returns a dict with per-level rows and the
/// fitted orders.
#[pyfunction]
#[pyo3(signature = (function, alpha, beta, epsilons, radius, params = Vec::new()))]
fn run_sweep(
    py: Python<'_>,
    function: &str,
    alpha: f64,
    beta: f64,
    epsilons: Vec<f64>,
    radius: f64,
    params: Vec<f64>,
) -> PyResult<Py<PyDict>> {
    let cfg = ExperimentConfig {
        function: make_function(function, &params)?,
        alpha,
        beta,
        region: RegionSpec::Disc {
            cx: 0.0,
            cy: 0.0,
            r: radius,
        },
        epsilons,
        out: None,
    };
    let report = run_experiment(&cfg).map_err(err)?;

    let rows = PyList::empty(py);
    for r in &report.rows {
        let d = PyDict::new(py);
        d.set_item("epsilon", r.epsilon)?;
        d.set_item("vertices", r.vertices)?;
        d.set_item("newton_iters", r.newton_iters)?;
        d.set_item("max_angle_residual", r.max_angle_residual)?;
        d.set_item("err_u_max", r.err_u_max)?;
        d.set_item("err_f_vertex_max", r.err_f_vertex_max)?;
        d.set_item("err_f_pl_max", r.err_f_pl_max)?;
        d.set_item("err_s1_max", r.err_s_max[0])?;
        d.set_item("err_s2_max", r.err_s_max[1])?;
        d.set_item("err_s3_max", r.err_s_max[2])?;
        d.set_item("flower_res_max", r.flower_res_max)?;
        d.set_item("phi_res_max", r.phi_res_max)?;
        d.set_item("dlap_s_res_max", r.dlap_s_res_max)?;
        d.set_item("contact_res_max", r.contact_res_max)?;
        rows.append(d)?;
    }
    let failures = PyList::empty(py);
    for (eps, e) in &report.failures {
        failures.append((eps, e.to_string()))?;
    }

    let out = PyDict::new(py);
    out.set_item("rows", rows)?;
    out.set_item("failures", failures)?;
    out.set_item("order_u", report.slope_u)?;
    out.set_item("order_f", report.slope_f)?;
    out.set_item("order_s", report.slope_s.to_vec())?;
    Ok(out.into())
}

#[pymodule]
fn dcl_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Lattice>()?;
    m.add_class::<ConformalMap>()?;
    m.add_function(wrap_pyfunction!(cross_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(predicted_schwarzians, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    Ok(())
}
