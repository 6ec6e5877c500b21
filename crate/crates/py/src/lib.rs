//! Python bindings. Thin wrappers over the core types plus module-level
//! functions for the solver, the initial-data checks, the monitored
//! functionals, and checkpoint IO. Field arrays stay on the Rust side;
//! states are compared and summarized through methods rather than copied
//! out, which keeps the surface small and the smoke tests honest about
//! what the library computes.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use elastoblow::diagnostics;
use elastoblow::grid::Grid;
use elastoblow::initdata::{self, BumpSpec, HypothesisReport};
use elastoblow::params::{Mode, PhysParams};
use elastoblow::solver::{self, RunStatus};
use elastoblow::state::{self, ConservedState, State};
use elastoblow::stencil::StencilConfig;
use elastoblow::{checkpoint, Error};

fn err(e: Error) -> PyErr {
    match e {
        Error::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_mode(s: &str) -> PyResult<Mode> {
    match s {
        "inviscid" => Ok(Mode::Inviscid),
        "viscous" => Ok(Mode::Viscous),
        other => Err(PyValueError::new_err(format!(
            "mode must be `inviscid` or `viscous`, got `{other}`"
        ))),
    }
}

/// Material and data parameters. `lam` is the second Lame parameter
/// (`lambda` is reserved in Python).
#[pyclass(name = "PhysParams", skip_from_py_object)]
#[derive(Clone)]
struct PyPhysParams {
    inner: PhysParams,
}

#[pymethods]
impl PyPhysParams {
    #[new]
    #[pyo3(signature = (a, gamma, rho_bar, r, mu = 0.0, lam = 0.0))]
    fn new(a: f64, gamma: f64, rho_bar: f64, r: f64, mu: f64, lam: f64) -> PyPhysParams {
        PyPhysParams {
            inner: PhysParams {
                a,
                gamma,
                mu,
                lambda: lam,
                rho_bar,
                r,
            },
        }
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }
    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }
    #[getter]
    fn rho_bar(&self) -> f64 {
        self.inner.rho_bar
    }
    #[getter]
    fn r(&self) -> f64 {
        self.inner.r
    }
    #[getter]
    fn mu(&self) -> f64 {
        self.inner.mu
    }
    #[getter]
    fn lam(&self) -> f64 {
        self.inner.lambda
    }

    /// Background sound speed sqrt(A gamma rho_bar^(gamma-1)).
    fn sigma(&self) -> f64 {
        self.inner.sigma()
    }

    fn __repr__(&self) -> String {
        format!(
            "PhysParams(a={}, gamma={}, rho_bar={}, r={}, mu={}, lam={})",
            self.inner.a,
            self.inner.gamma,
            self.inner.rho_bar,
            self.inner.r,
            self.inner.mu,
            self.inner.lambda
        )
    }
}

/// Cell-centered cube of n^3 cells spanning [-half_width, half_width]^3.
#[pyclass(name = "Grid", skip_from_py_object)]
#[derive(Clone)]
struct PyGrid {
    inner: Grid,
}

#[pymethods]
impl PyGrid {
    #[new]
    fn new(n: usize, half_width: f64) -> PyResult<PyGrid> {
        Ok(PyGrid {
            inner: Grid::cube(n, half_width).map_err(err)?,
        })
    }

    #[getter]
    fn n(&self) -> (usize, usize, usize) {
        let n = self.inner.n;
        (n[0], n[1], n[2])
    }
    #[getter]
    fn h(&self) -> (f64, f64, f64) {
        let h = self.inner.h;
        (h[0], h[1], h[2])
    }
    #[getter]
    fn half_width(&self) -> f64 {
        self.inner.half_width
    }

    fn __repr__(&self) -> String {
        format!(
            "Grid(n={}, half_width={})",
            self.inner.n[0], self.inner.half_width
        )
    }
}

/// Spatial scheme: first-derivative order (2 or 4) plus the artificial
/// dissipation coefficient.
#[pyclass(name = "StencilConfig", skip_from_py_object)]
#[derive(Clone)]
struct PyStencilConfig {
    inner: StencilConfig,
}

#[pymethods]
impl PyStencilConfig {
    #[new]
    #[pyo3(signature = (order = 2, dissipation_coeff = 0.0))]
    fn new(order: usize, dissipation_coeff: f64) -> PyStencilConfig {
        PyStencilConfig {
            inner: StencilConfig {
                order,
                dissipation_coeff,
            },
        }
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order
    }
    #[getter]
    fn dissipation_coeff(&self) -> f64 {
        self.inner.dissipation_coeff
    }
}

/// Run controls. Defaults follow the library: cfl 0.4, rho floor
/// 1e-8 rho_bar, gradient ceiling 1e4 sigma/R, output every 10 steps.
#[pyclass(name = "RunConfig", skip_from_py_object)]
#[derive(Clone)]
struct PyRunConfig {
    inner: solver::RunConfig,
}

#[pymethods]
impl PyRunConfig {
    #[new]
    #[pyo3(signature = (t_end, mode, params, cfl = None, rho_floor = None, gradu_ceiling = None, output_stride = None))]
    fn new(
        t_end: f64,
        mode: &str,
        params: PyRef<'_, PyPhysParams>,
        cfl: Option<f64>,
        rho_floor: Option<f64>,
        gradu_ceiling: Option<f64>,
        output_stride: Option<usize>,
    ) -> PyResult<PyRunConfig> {
        let mut rc = solver::RunConfig::new(t_end, parse_mode(mode)?, &params.inner);
        if let Some(v) = cfl {
            rc.cfl = v;
        }
        if let Some(v) = rho_floor {
            rc.rho_floor = v;
        }
        if let Some(v) = gradu_ceiling {
            rc.gradu_ceiling = v;
        }
        if let Some(v) = output_stride {
            rc.output_stride = v;
        }
        rc.validate().map_err(err)?;
        Ok(PyRunConfig { inner: rc })
    }

    #[getter]
    fn t_end(&self) -> f64 {
        self.inner.t_end
    }
    #[getter]
    fn cfl(&self) -> f64 {
        self.inner.cfl
    }
    #[getter]
    fn mode(&self) -> &'static str {
        match self.inner.mode {
            Mode::Inviscid => "inviscid",
            Mode::Viscous => "viscous",
        }
    }
    #[getter]
    fn rho_floor(&self) -> f64 {
        self.inner.rho_floor
    }
    #[getter]
    fn gradu_ceiling(&self) -> f64 {
        self.inner.gradu_ceiling
    }
    #[getter]
    fn output_stride(&self) -> usize {
        self.inner.output_stride
    }
}

/// Primitive fields (rho, u, F) at one instant.
#[pyclass(name = "State")]
struct PyState {
    inner: State,
}

#[pymethods]
impl PyState {
    #[getter]
    fn t(&self) -> f64 {
        self.inner.t
    }

    #[getter]
    fn shape(&self) -> (usize, usize, usize) {
        self.inner.rho.dim()
    }

    /// Max absolute field difference against another state of the same shape.
    fn max_abs_diff(&self, other: PyRef<'_, PyState>) -> PyResult<f64> {
        let a = &self.inner;
        let b = &other.inner;
        if a.rho.dim() != b.rho.dim() {
            return Err(PyValueError::new_err("states have different shapes"));
        }
        let mut d = 0.0f64;
        let mut acc = |x: &ndarray::Array3<f64>, y: &ndarray::Array3<f64>| {
            for (p, q) in x.iter().zip(y.iter()) {
                d = d.max((p - q).abs());
            }
        };
        acc(&a.rho, &b.rho);
        for i in 0..3 {
            acc(&a.u[i], &b.u[i]);
        }
        for r in 0..3 {
            for c in 0..3 {
                acc(&a.f[r][c], &b.f[r][c]);
            }
        }
        Ok(d)
    }

    /// Largest deviation from (rho_bar, 0, I) outside the data ball |x| < R.
    fn far_field_deviation(
        &self,
        params: PyRef<'_, PyPhysParams>,
        grid: PyRef<'_, PyGrid>,
    ) -> f64 {
        self.inner.far_field_deviation(&params.inner, &grid.inner)
    }
}

fn hyp_dict<'py>(py: Python<'py>, h: &HypothesisReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("m0", h.m0)?;
    d.set_item("ffun0", h.f0_functional)?;
    d.set_item("e0", h.e0)?;
    d.set_item("trace0", h.trace0)?;
    d.set_item("rho0_max", h.rho0_max)?;
    d.set_item("threshold", h.threshold)?;
    d.set_item("div_residual0", h.div_residual0)?;
    d.set_item("momentum_nonneg", h.cond_ff1)?;
    d.set_item("above_threshold", h.cond_ff)?;
    d.set_item("trace_dominates", h.cond_a2)?;
    d.set_item("t_upper", h.t_upper)?;
    d.set_item("all_hold", h.all_hold())?;
    Ok(d)
}

/// Result of a run: status, breakdown classification, diagnostics series,
/// and the final state.
#[pyclass(name = "RunOutcome")]
struct PyRunOutcome {
    status: RunStatus,
    steps: usize,
    viscous_dissipation: Option<f64>,
    rows: Vec<diagnostics::DiagnosticsRow>,
    hypotheses: HypothesisReport,
    final_state: ConservedState,
}

#[pymethods]
impl PyRunOutcome {
    #[getter]
    fn status(&self) -> &'static str {
        match self.status {
            RunStatus::Completed => "completed",
            RunStatus::Breakdown { .. } => "breakdown",
        }
    }

    #[getter]
    fn breakdown_reason(&self) -> Option<String> {
        match self.status {
            RunStatus::Completed => None,
            RunStatus::Breakdown { reason, .. } => Some(reason.to_string()),
        }
    }

    #[getter]
    fn breakdown_t(&self) -> Option<f64> {
        match self.status {
            RunStatus::Completed => None,
            RunStatus::Breakdown { t, .. } => Some(t),
        }
    }

    #[getter]
    fn steps(&self) -> usize {
        self.steps
    }

    #[getter]
    fn viscous_dissipation(&self) -> Option<f64> {
        self.viscous_dissipation
    }

    /// Diagnostics rows as dicts, one per output sample.
    fn series<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.rows
            .iter()
            .map(|r| {
                let d = PyDict::new(py);
                d.set_item("t", r.t)?;
                d.set_item("m", r.m)?;
                d.set_item("ffun", r.ffun)?;
                d.set_item("e", r.e)?;
                d.set_item("trace", r.trace)?;
                d.set_item("div_res", r.div_res)?;
                d.set_item("front", r.front)?;
                d.set_item("front_bound", r.front_bound)?;
                d.set_item("bkm", r.bkm)?;
                d.set_item("gradu_max", r.gradu_max)?;
                d.set_item("rho_min", r.rho_min)?;
                d.set_item("riccati_lb", r.riccati_lb)?;
                Ok(d)
            })
            .collect()
    }

    /// Initial-data hypothesis report evaluated before stepping.
    fn hypotheses<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        hyp_dict(py, &self.hypotheses)
    }

    fn final_state(&self) -> PyResult<PyState> {
        Ok(PyState {
            inner: state::to_primitive(&self.final_state).map_err(err)?,
        })
    }
}

/// Background state (rho_bar, 0, I).
#[pyfunction]
fn equilibrium(params: PyRef<'_, PyPhysParams>, grid: PyRef<'_, PyGrid>) -> PyState {
    PyState {
        inner: initdata::make_equilibrium(&params.inner, &grid.inner),
    }
}

/// Compactly supported pulse: radial velocity, density bump, and a
/// gradient-potential perturbation of F, all inside |x| < R.
#[pyfunction]
#[pyo3(signature = (params, grid, velocity_amplitude = 0.0, density_bump = 0.0, f_potential_amplitude = 0.0))]
fn bump(
    params: PyRef<'_, PyPhysParams>,
    grid: PyRef<'_, PyGrid>,
    velocity_amplitude: f64,
    density_bump: f64,
    f_potential_amplitude: f64,
) -> PyResult<PyState> {
    let spec = BumpSpec {
        velocity_amplitude,
        density_bump,
        f_potential_amplitude,
        ..BumpSpec::default()
    };
    Ok(PyState {
        inner: initdata::make_bump(&spec, &params.inner, &grid.inner).map_err(err)?,
    })
}

/// Advance the state to t_end or breakdown.
#[pyfunction]
fn run(
    state: PyRef<'_, PyState>,
    params: PyRef<'_, PyPhysParams>,
    grid: PyRef<'_, PyGrid>,
    stencil: PyRef<'_, PyStencilConfig>,
    run_config: PyRef<'_, PyRunConfig>,
) -> PyResult<PyRunOutcome> {
    let out = solver::run(
        &state.inner,
        &params.inner,
        &grid.inner,
        &stencil.inner,
        &run_config.inner,
    )
    .map_err(err)?;
    Ok(PyRunOutcome {
        status: out.status,
        steps: out.steps,
        viscous_dissipation: out.viscous_dissipation,
        rows: out.series,
        hypotheses: out.hypotheses,
        final_state: out.final_state,
    })
}

/// Growth hypotheses on initial data: radial momentum nonnegative,
/// functional above threshold, trace dominating twice the energy.
#[pyfunction]
fn check_hypotheses<'py>(
    py: Python<'py>,
    state: PyRef<'_, PyState>,
    params: PyRef<'_, PyPhysParams>,
    grid: PyRef<'_, PyGrid>,
    stencil: PyRef<'_, PyStencilConfig>,
) -> PyResult<Bound<'py, PyDict>> {
    let h = initdata::check_hypotheses(&state.inner, &params.inner, &grid.inner, &stencil.inner)
        .map_err(err)?;
    hyp_dict(py, &h)
}

/// int (rho - rho_bar) dx.
#[pyfunction]
fn mass_deviation(
    state: PyRef<'_, PyState>,
    params: PyRef<'_, PyPhysParams>,
    grid: PyRef<'_, PyGrid>,
) -> f64 {
    diagnostics::mass_deviation(&state.inner, &params.inner, &grid.inner)
}

/// int rho x . u dx.
#[pyfunction]
fn radial_momentum(state: PyRef<'_, PyState>, grid: PyRef<'_, PyGrid>) -> f64 {
    diagnostics::radial_momentum(&state.inner, &grid.inner)
}

/// Kinetic + elastic + relative internal energy.
#[pyfunction]
fn energy(
    state: PyRef<'_, PyState>,
    params: PyRef<'_, PyPhysParams>,
    grid: PyRef<'_, PyGrid>,
) -> f64 {
    diagnostics::energy(&state.inner, &params.inner, &grid.inner)
}

/// int rho tr(F - I) dx.
#[pyfunction]
fn trace_integral(state: PyRef<'_, PyState>, grid: PyRef<'_, PyGrid>) -> f64 {
    diagnostics::trace_integral(&state.inner, &grid.inner)
}

/// Max-norm of the row divergence of rho F^T.
#[pyfunction]
fn div_residual(
    state: PyRef<'_, PyState>,
    grid: PyRef<'_, PyGrid>,
    stencil: PyRef<'_, PyStencilConfig>,
) -> PyResult<f64> {
    diagnostics::div_residual(&state.inner, &grid.inner, &stencil.inner).map_err(err)
}

/// Functional value below which no finite blowup bound follows.
#[pyfunction]
fn growth_threshold(rho0_max: f64, params: PyRef<'_, PyPhysParams>) -> f64 {
    diagnostics::growth_threshold(rho0_max, &params.inner)
}

/// Riccati comparison envelope at time t (infinite past its pole).
#[pyfunction]
fn riccati_lower_bound(
    t: f64,
    f0: f64,
    rho0_max: f64,
    params: PyRef<'_, PyPhysParams>,
) -> PyResult<f64> {
    diagnostics::riccati_lower_bound(t, f0, rho0_max, &params.inner).map_err(err)
}

/// Time by which the envelope diverges, or None at or below threshold.
#[pyfunction]
fn blowup_time_upper_bound(
    f0: f64,
    rho0_max: f64,
    params: PyRef<'_, PyPhysParams>,
) -> Option<f64> {
    diagnostics::blowup_time_upper_bound(f0, rho0_max, &params.inner)
}

/// Write state + parameters + grid; the conserved payload is bit-exact.
#[pyfunction]
fn save_checkpoint(
    path: &str,
    state: PyRef<'_, PyState>,
    params: PyRef<'_, PyPhysParams>,
    grid: PyRef<'_, PyGrid>,
) -> PyResult<()> {
    let c = state::to_conserved(&state.inner);
    checkpoint::save(path.as_ref(), &c, &params.inner, &grid.inner).map_err(err)
}

/// Read a checkpoint back as (state, params, grid).
#[pyfunction]
fn load_checkpoint(path: &str) -> PyResult<(PyState, PyPhysParams, PyGrid)> {
    let (c, p, g) = checkpoint::load(path.as_ref()).map_err(err)?;
    Ok((
        PyState {
            inner: state::to_primitive(&c).map_err(err)?,
        },
        PyPhysParams { inner: p },
        PyGrid { inner: g },
    ))
}

#[pymodule]
fn elastoblow_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPhysParams>()?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PyStencilConfig>()?;
    m.add_class::<PyRunConfig>()?;
    m.add_class::<PyState>()?;
    m.add_class::<PyRunOutcome>()?;
    m.add_function(wrap_pyfunction!(equilibrium, m)?)?;
    m.add_function(wrap_pyfunction!(bump, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(check_hypotheses, m)?)?;
    m.add_function(wrap_pyfunction!(mass_deviation, m)?)?;
    m.add_function(wrap_pyfunction!(radial_momentum, m)?)?;
    m.add_function(wrap_pyfunction!(energy, m)?)?;
    m.add_function(wrap_pyfunction!(trace_integral, m)?)?;
    m.add_function(wrap_pyfunction!(div_residual, m)?)?;
    m.add_function(wrap_pyfunction!(growth_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(riccati_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(blowup_time_upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(save_checkpoint, m)?)?;
    m.add_function(wrap_pyfunction!(load_checkpoint, m)?)?;
    Ok(())
}
