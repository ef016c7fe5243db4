//! Python bindings: problems, direct and fast-reaction runs, the exact
//! exchange flow, and the experiment drivers (returned as plain dicts).

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use xdiff_lab::harness::{self, SweepOptions};
use xdiff_lab::solver::{History, NoObserver, SolverConfig};
use xdiff_lab::{Error, FastState, Field, Grid, Problem};

fn py_err(e: Error) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn to_py_json<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A direct-run problem: model parameters, grid, time stepping and initial profiles.
#[pyclass(name = "Problem", module = "xdiff_lab_py", skip_from_py_object)]
#[derive(Clone)]
struct PyProblem {
    inner: Problem,
}

#[pymethods]
impl PyProblem {
    /// Quadratic SKT competition preset.
    #[staticmethod]
    fn skt() -> Self {
        Self { inner: Problem::skt_preset() }
    }

    /// Preset with `d < a`.
    #[staticmethod]
    fn theorem1() -> Self {
        Self { inner: Problem::theorem1_preset() }
    }

    /// Problem section of a TOML run configuration.
    #[staticmethod]
    #[pyo3(signature = (text, allow_unsupported = false))]
    fn from_toml(text: &str, allow_unsupported: bool) -> PyResult<Self> {
        let cfg = xdiff_lab::parse_config_with(text, allow_unsupported).map_err(py_err)?;
        Ok(Self { inner: cfg.problem })
    }

    /// Copy on a 1-D grid of `nx` cells over `[0, lx]`, or 2-D when `ny` is given.
    #[pyo3(signature = (nx, lx = 1.0, ny = None, ly = 1.0))]
    fn with_grid(&self, nx: usize, lx: f64, ny: Option<usize>, ly: f64) -> PyResult<Self> {
        let grid = match ny {
            Some(ny) => Grid::new_2d(nx, ny, lx, ly),
            None => Grid::new_1d(nx, lx),
        }
        .map_err(py_err)?;
        Ok(Self { inner: Problem { grid, ..self.inner.clone() } })
    }

    #[pyo3(signature = (dt, t_end, snapshot_every = None))]
    fn with_time(&self, dt: f64, t_end: f64, snapshot_every: Option<usize>) -> PyResult<Self> {
        let solver = SolverConfig { dt, t_end, ..self.inner.solver };
        solver.validate().map_err(py_err)?;
        Ok(Self {
            inner: Problem {
                solver,
                snapshot_every: snapshot_every.unwrap_or(self.inner.snapshot_every),
                ..self.inner.clone()
            },
        })
    }

    /// Grid and time step divided by `factor`.
    fn refined(&self, factor: usize) -> PyResult<Self> {
        if factor == 0 {
            return Err(PyValueError::new_err("factor must be ≥ 1"));
        }
        Ok(Self { inner: self.inner.refined(factor) })
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.solver.dt
    }

    #[getter]
    fn t_end(&self) -> f64 {
        self.inner.solver.t_end
    }

    #[getter]
    fn shape(&self) -> Vec<usize> {
        (0..self.inner.grid.dim()).map(|a| self.inner.grid.n(a)).collect()
    }

    #[getter]
    fn regime(&self) -> &'static str {
        match self.inner.params.regime() {
            xdiff_lab::Regime::Theorem1 => "THEOREM1",
            xdiff_lab::Regime::Theorem2 => "THEOREM2",
            xdiff_lab::Regime::Unsupported => "UNSUPPORTED",
        }
    }

    /// Scalar model parameters by name.
    fn params<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (k, v) in self.inner.params.scalars() {
            d.set_item(k, v)?;
        }
        Ok(d)
    }

    /// Cell centers as a list of `x` (1-D) or `(x, y)` pairs (2-D).
    fn centers<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyList>> {
        let g = &self.inner.grid;
        let list = PyList::empty(py);
        for i in 0..g.cell_count() {
            let c = g.center(i);
            if g.dim() == 1 {
                list.append(c[0])?;
            } else {
                list.append((c[0], c[1]))?;
            }
        }
        Ok(list)
    }

    /// Spatially uniform coexistence state, if one exists.
    fn coexistence_state(&self) -> Option<(f64, f64)> {
        self.inner.params.coexistence_state()
    }

    /// Rates of the fast-reaction system at `epsilon`.
    fn fast_config<'py>(&self, py: Python<'py>, epsilon: f64) -> PyResult<Bound<'py, PyDict>> {
        let f = self.inner.fast_config(epsilon).map_err(py_err)?;
        let d = PyDict::new(py);
        for (k, v) in [("epsilon", f.epsilon), ("d_a", f.d_a), ("d_b", f.d_b), ("h0", f.h0), ("phi1", f.phi1), ("v1", f.v1)] {
            d.set_item(k, v)?;
        }
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "Problem(regime={}, shape={:?}, dt={}, t_end={})",
            self.regime(),
            self.shape(),
            self.inner.solver.dt,
            self.inner.solver.t_end
        )
    }
}

fn values(f: &Field) -> Vec<f64> {
    f.values().to_vec()
}

/// Integrates the cross-diffusion system; returns times and stored `u`, `v` snapshots.
#[pyfunction]
#[pyo3(signature = (problem, snapshot_every = None))]
fn run_cross<'py>(py: Python<'py>, problem: &PyProblem, snapshot_every: Option<usize>) -> PyResult<Bound<'py, PyDict>> {
    let p = problem.inner.clone();
    let every = snapshot_every.unwrap_or(p.snapshot_every);
    let h = py
        .detach(move || {
            let init = p.cross_initial()?;
            xdiff_lab::run_cross(&init, &p.params, &p.solver, every, &mut NoObserver)
        })
        .map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("t", h.times())?;
    d.set_item("u", h.snapshots.iter().map(|s| values(&s.u)).collect::<Vec<_>>())?;
    d.set_item("v", h.snapshots.iter().map(|s| values(&s.v)).collect::<Vec<_>>())?;
    Ok(d)
}

/// Integrates the fast-reaction system at `epsilon`; returns times and the
/// stored `u_a`, `u_b`, total `u` and `v` snapshots.
#[pyfunction]
#[pyo3(signature = (problem, epsilon, snapshot_every = None))]
fn run_fast<'py>(
    py: Python<'py>,
    problem: &PyProblem,
    epsilon: f64,
    snapshot_every: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let p = problem.inner.clone();
    let every = snapshot_every.unwrap_or(p.snapshot_every);
    let h: History<FastState> = py
        .detach(move || {
            let frc = p.fast_config(epsilon)?;
            let init = p.fast_initial(&frc)?;
            xdiff_lab::run_fast(&init, &p.params, &frc, &p.solver, every, &mut NoObserver)
        })
        .map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("t", h.times())?;
    d.set_item("u_a", h.snapshots.iter().map(|s| values(&s.u_a)).collect::<Vec<_>>())?;
    d.set_item("u_b", h.snapshots.iter().map(|s| values(&s.u_b)).collect::<Vec<_>>())?;
    d.set_item("u", h.snapshots.iter().map(|s| values(&s.total_u())).collect::<Vec<_>>())?;
    d.set_item("v", h.snapshots.iter().map(|s| values(&s.v)).collect::<Vec<_>>())?;
    Ok(d)
}

/// Exact flow of the linear exchange `u_A' = (k u_B − h u_A)/ε` over `dt`.
#[pyfunction]
fn exchange_exact(u_a: f64, u_b: f64, h: f64, k: f64, epsilon: f64, dt: f64) -> PyResult<(f64, f64)> {
    let ok = [u_a, u_b, h, k].iter().all(|x| *x >= 0.0 && x.is_finite())
        && h + k > 0.0
        && epsilon > 0.0
        && dt >= 0.0;
    if !ok {
        return Err(PyValueError::new_err("densities and rates must be ≥ 0 with h + k > 0, epsilon > 0, dt ≥ 0"));
    }
    Ok(xdiff_lab::exchange_exact(u_a, u_b, h, k, epsilon, dt))
}

/// Fast-reaction runs over `eps_list` compared with the direct solver.
#[pyfunction]
#[pyo3(signature = (problem, eps_list, defect_p = None, dissipation_ps = None))]
fn eps_sweep<'py>(
    py: Python<'py>,
    problem: &PyProblem,
    eps_list: Vec<f64>,
    defect_p: Option<f64>,
    dissipation_ps: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let p = problem.inner.clone();
    let defect_p = defect_p.unwrap_or(match p.params.regime() {
        xdiff_lab::Regime::Theorem1 => 2.0,
        _ => 0.5,
    });
    let opts = SweepOptions { eps_list, defect_p, dissipation_ps: dissipation_ps.unwrap_or_else(|| vec![defect_p]) };
    let report = py.detach(move || harness::eps_sweep(&p, &opts)).map_err(py_err)?;
    to_py_json(py, &report)
}

/// Self-convergence of the direct solver over `levels` refinements.
#[pyfunction]
#[pyo3(signature = (problem, levels, ratio = 2))]
fn refine_study<'py>(py: Python<'py>, problem: &PyProblem, levels: usize, ratio: usize) -> PyResult<Bound<'py, PyAny>> {
    let p = problem.inner.clone();
    let report = py.detach(move || harness::refine_study_with_ratio(&p, levels, ratio)).map_err(py_err)?;
    to_py_json(py, &report)
}

/// Distance between runs from initial data perturbed by `delta` times a bump.
#[pyfunction]
fn stability_experiment<'py>(py: Python<'py>, problem: &PyProblem, deltas: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    let p = problem.inner.clone();
    let report = py.detach(move || harness::stability_experiment(&p, &deltas)).map_err(py_err)?;
    to_py_json(py, &report)
}

#[pymodule]
fn xdiff_lab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_function(wrap_pyfunction!(run_cross, m)?)?;
    m.add_function(wrap_pyfunction!(run_fast, m)?)?;
    m.add_function(wrap_pyfunction!(exchange_exact, m)?)?;
    m.add_function(wrap_pyfunction!(eps_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(refine_study, m)?)?;
    m.add_function(wrap_pyfunction!(stability_experiment, m)?)?;
    m.add("SCHEMA", harness::SCHEMA)?;
    Ok(())
}
