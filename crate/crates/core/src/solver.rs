//! Conservative time evolution of (rho, m, Q):
//!
//!   d rho / dt = -div m
//!   d m_i  / dt = -d_a ( m_i m_a / rho + d_ia P - (Q^T Q)_ia / rho )
//!                 [+ mu Lap u_i + (mu + lambda) d_i div u in viscous mode]
//!   d Q_jk / dt = -d_a ( u_a Q_jk - u_k Q_ja )
//!
//! The Q flux is antisymmetric in (a, k)-exchange against the constraint
//! index, which freezes the discrete row divergence of Q up to dissipation
//! and collar effects. All fluxes are differenced conservatively, so cell
//! sums of rho, m, and tr(Q) change only through the pinned boundary.
//! Classical RK4 in time; the boundary collar is re-pinned to the
//! background after every stage. Breakdown (non-finite values, density
//! below floor, gradient above ceiling, vanishing dt) is a reported
//! outcome, not an error.

use ndarray::Array3;
use rayon::prelude::*;

use crate::diagnostics::{self, DiagnosticsRow, RiccatiCtx};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::initdata::{self, HypothesisReport};
use crate::params::{Mode, PhysParams};
use crate::state::{q_comp, to_conserved, to_primitive, ConservedState, State, N_COMPS};
use crate::stencil::{self, StencilConfig};
use crate::symhyp;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BreakdownReason {
    NonFinite,
    DensityFloor,
    GraduCeiling,
    DtUnderflow,
}

impl std::fmt::Display for BreakdownReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            BreakdownReason::NonFinite => "non_finite",
            BreakdownReason::DensityFloor => "density_floor",
            BreakdownReason::GraduCeiling => "gradu_ceiling",
            BreakdownReason::DtUnderflow => "dt_underflow",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunStatus {
    Completed,
    Breakdown { reason: BreakdownReason, t: f64 },
}

impl RunStatus {
    pub fn is_breakdown(&self) -> bool {
        matches!(self, RunStatus::Breakdown { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub t_end: f64,
    pub cfl: f64,
    pub mode: Mode,
    pub rho_floor: f64,
    pub gradu_ceiling: f64,
    pub output_stride: usize,
}

impl RunConfig {
    /// Defaults: cfl 0.4, floor 1e-8 rho_bar, ceiling 1e4 sigma/R, stride 10.
    pub fn new(t_end: f64, mode: Mode, p: &PhysParams) -> RunConfig {
        RunConfig {
            t_end,
            cfl: 0.4,
            mode,
            rho_floor: 1e-8 * p.rho_bar,
            gradu_ceiling: 1e4 * p.sigma() / p.r,
            output_stride: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("t_end", self.t_end, self.t_end > 0.0),
            ("cfl", self.cfl, self.cfl > 0.0 && self.cfl <= 1.0),
            ("rho_floor", self.rho_floor, self.rho_floor > 0.0),
            ("gradu_ceiling", self.gradu_ceiling, self.gradu_ceiling > 0.0),
        ];
        for (field, v, ok) in checks {
            if !(ok && v.is_finite()) {
                return Err(Error::InvalidParams {
                    field,
                    message: format!("out of range: {v}"),
                });
            }
        }
        if self.output_stride == 0 {
            return Err(Error::InvalidParams {
                field: "output_stride",
                message: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub final_state: ConservedState,
    pub series: Vec<DiagnosticsRow>,
    pub hypotheses: HypothesisReport,
    /// Accumulated int_0^t sum [mu |grad u|^2 + (mu+lambda)(div u)^2] h^3 ds,
    /// viscous mode only.
    pub viscous_dissipation: Option<f64>,
    pub steps: usize,
}

/// Velocity components m / rho plus the shared reciprocal density.
fn velocity_fields(c: &ConservedState) -> ([Array3<f64>; 3], Array3<f64>) {
    let inv_rho = c.rho().mapv(|r| 1.0 / r);
    let u = std::array::from_fn(|j| {
        let mut a = c.m(j).clone();
        ndarray::azip!((v in &mut a, &ir in &inv_rho) *v *= ir);
        a
    });
    (u, inv_rho)
}

struct RhsCtx<'a> {
    c: &'a ConservedState,
    p: &'a PhysParams,
    g: &'a Grid,
    sc: &'a StencilConfig,
    mode: Mode,
    speed_scale: f64,
    u: &'a [Array3<f64>; 3],
    inv_rho: &'a Array3<f64>,
    pressure: &'a Array3<f64>,
}

fn flat(a: &Array3<f64>) -> &[f64] {
    a.as_slice_memory_order().expect("contiguous")
}

fn momentum_flux(ctx: &RhsCtx<'_>, i: usize, axis: usize) -> Array3<f64> {
    let mut out = Array3::zeros(ctx.c.dim());
    {
        let dst = out.as_slice_memory_order_mut().expect("contiguous");
        let mi = flat(ctx.c.m(i));
        let ua = flat(&ctx.u[axis]);
        let ir = flat(ctx.inv_rho);
        let pr = flat(ctx.pressure);
        let q0i = flat(ctx.c.q(0, i));
        let q1i = flat(ctx.c.q(1, i));
        let q2i = flat(ctx.c.q(2, i));
        let q0a = flat(ctx.c.q(0, axis));
        let q1a = flat(ctx.c.q(1, axis));
        let q2a = flat(ctx.c.q(2, axis));
        let with_p = i == axis;
        for idx in 0..dst.len() {
            let elastic =
                (q0i[idx] * q0a[idx] + q1i[idx] * q1a[idx] + q2i[idx] * q2a[idx]) * ir[idx];
            let p_term = if with_p { pr[idx] } else { 0.0 };
            dst[idx] = mi[idx] * ua[idx] + p_term - elastic;
        }
    }
    out
}

fn q_flux(ctx: &RhsCtx<'_>, j: usize, k: usize, axis: usize) -> Array3<f64> {
    let mut out = Array3::zeros(ctx.c.dim());
    {
        let dst = out.as_slice_memory_order_mut().expect("contiguous");
        let ua = flat(&ctx.u[axis]);
        let uk = flat(&ctx.u[k]);
        let qjk = flat(ctx.c.q(j, k));
        let qja = flat(ctx.c.q(j, axis));
        for idx in 0..dst.len() {
            dst[idx] = ua[idx] * qjk[idx] - uk[idx] * qja[idx];
        }
    }
    out
}

fn component_tendency(ctx: &RhsCtx<'_>, comp: usize) -> Result<Array3<f64>> {
    let mut out = Array3::zeros(ctx.c.dim());
    match comp {
        0 => {
            stencil::sub_flux_div([ctx.c.m(0), ctx.c.m(1), ctx.c.m(2)], ctx.g, ctx.sc, &mut out)?;
        }
        1..=3 => {
            let i = comp - 1;
            let fl: [Array3<f64>; 3] = std::array::from_fn(|a| momentum_flux(ctx, i, a));
            stencil::sub_flux_div([&fl[0], &fl[1], &fl[2]], ctx.g, ctx.sc, &mut out)?;
            if ctx.mode == Mode::Viscous {
                let lap = stencil::laplacian(&ctx.u[i], ctx.g, ctx.sc)?;
                let ddiv = stencil::grad_div_comp(ctx.u, i, ctx.g, ctx.sc)?;
                let mu = ctx.p.mu;
                let mul = ctx.p.mu + ctx.p.lambda;
                ndarray::azip!((o in &mut out, &l in &lap, &d in &ddiv) *o += mu * l + mul * d);
            }
        }
        _ => {
            let j = (comp - 4) / 3;
            let k = (comp - 4) % 3;
            let fl: [Array3<f64>; 3] = std::array::from_fn(|a| q_flux(ctx, j, k, a));
            stencil::sub_flux_div([&fl[0], &fl[1], &fl[2]], ctx.g, ctx.sc, &mut out)?;
        }
    }
    stencil::add_dissipation(ctx.c.comp(comp), ctx.speed_scale, ctx.g, ctx.sc, &mut out)?;
    Ok(out)
}

/// Tendency of the conserved state. `speed_scale` feeds the artificial
/// dissipation; pass the step's global characteristic speed.
pub fn rhs(
    c: &ConservedState,
    p: &PhysParams,
    g: &Grid,
    sc: &StencilConfig,
    mode: Mode,
    speed_scale: f64,
) -> Result<ConservedState> {
    let min_rho = c.min_rho();
    if !(min_rho > 0.0) {
        return Err(Error::DegenerateDensity { min_rho });
    }
    let (u, inv_rho) = velocity_fields(c);
    let pressure = c.rho().mapv(|r| crate::eos::pressure(r, p));
    let ctx = RhsCtx {
        c,
        p,
        g,
        sc,
        mode,
        speed_scale,
        u: &u,
        inv_rho: &inv_rho,
        pressure: &pressure,
    };
    // the 13 component tendencies are independent; parallelism stays at
    // this level so every reduction below remains serial and reruns are
    // bit-identical for any worker count
    let comps: Vec<Array3<f64>> = (0..N_COMPS)
        .into_par_iter()
        .map(|comp| component_tendency(&ctx, comp))
        .collect::<Result<_>>()?;
    let comps: [Array3<f64>; N_COMPS] = comps.try_into().expect("13 components");
    Ok(ConservedState::from_comps(c.t, comps))
}

pub fn rhs_inviscid(
    c: &ConservedState,
    p: &PhysParams,
    g: &Grid,
    sc: &StencilConfig,
    speed_scale: f64,
) -> Result<ConservedState> {
    rhs(c, p, g, sc, Mode::Inviscid, speed_scale)
}

pub fn rhs_viscous(
    c: &ConservedState,
    p: &PhysParams,
    g: &Grid,
    sc: &StencilConfig,
    speed_scale: f64,
) -> Result<ConservedState> {
    rhs(c, p, g, sc, Mode::Viscous, speed_scale)
}

/// Forces the boundary collar to the exact background (rho_bar, 0, rho_bar I).
pub fn pin_collar(c: &mut ConservedState, p: &PhysParams, g: &Grid, width: usize) {
    let (n0, n1, n2) = g.dim();
    let mut pin_comp = |comp: usize, value: f64| {
        let arr = c.comp_mut(comp);
        for i in 0..n0 {
            for j in 0..n1 {
                let edge_ij = i < width || i >= n0 - width || j < width || j >= n1 - width;
                if edge_ij {
                    for k in 0..n2 {
                        arr[[i, j, k]] = value;
                    }
                } else {
                    for k in 0..width {
                        arr[[i, j, k]] = value;
                        arr[[i, j, n2 - 1 - k]] = value;
                    }
                }
            }
        }
    };
    pin_comp(0, p.rho_bar);
    for j in 0..3 {
        pin_comp(1 + j, 0.0);
        for k in 0..3 {
            pin_comp(q_comp(j, k), if j == k { p.rho_bar } else { 0.0 });
        }
    }
}

/// Largest stable dt for the current state, and the characteristic speed
/// that produced it (reused as the dissipation scale).
pub fn stable_dt(
    c: &ConservedState,
    p: &PhysParams,
    g: &Grid,
    rc: &RunConfig,
) -> Result<(f64, f64)> {
    let speed = symhyp::max_char_speed_conserved(c, p)?;
    let h = g.min_h();
    let mut dt = rc.cfl * h / speed;
    if rc.mode == Mode::Viscous {
        let visc = 2.0 * (2.0 * p.mu + p.lambda) + f64::MIN_POSITIVE;
        dt = dt.min(rc.cfl * h * h * c.min_rho() / visc);
    }
    Ok((dt, speed))
}

fn rk4_with_speed(
    c: &ConservedState,
    dt: f64,
    speed: f64,
    p: &PhysParams,
    g: &Grid,
    sc: &StencilConfig,
    mode: Mode,
) -> Result<ConservedState> {
    let collar = sc.collar();
    let stage = |base: &ConservedState, coeff: f64, k: &ConservedState| -> ConservedState {
        let mut s = base.clone();
        s.axpy(coeff, k);
        pin_collar(&mut s, p, g, collar);
        s
    };
    let k1 = rhs(c, p, g, sc, mode, speed)?;
    let s2 = stage(c, 0.5 * dt, &k1);
    let k2 = rhs(&s2, p, g, sc, mode, speed)?;
    let s3 = stage(c, 0.5 * dt, &k2);
    let k3 = rhs(&s3, p, g, sc, mode, speed)?;
    let s4 = stage(c, dt, &k3);
    let k4 = rhs(&s4, p, g, sc, mode, speed)?;
    let mut out = c.clone();
    out.axpy(dt / 6.0, &k1);
    out.axpy(dt / 3.0, &k2);
    out.axpy(dt / 3.0, &k3);
    out.axpy(dt / 6.0, &k4);
    pin_collar(&mut out, p, g, collar);
    out.t = c.t + dt;
    Ok(out)
}

/// One classical RK4 step. Negative dt integrates backwards (used by the
/// reversibility checks); the CFL gate applies to |dt|.
pub fn step_rk4(
    c: &ConservedState,
    dt: f64,
    p: &PhysParams,
    g: &Grid,
    sc: &StencilConfig,
    rc: &RunConfig,
) -> Result<ConservedState> {
    let (dt_max, speed) = stable_dt(c, p, g, rc)?;
    if !(dt.abs() <= dt_max * (1.0 + 1e-12)) {
        return Err(Error::CflViolation { dt: dt.abs(), dt_max });
    }
    rk4_with_speed(c, dt, speed, p, g, sc, rc.mode)
}

/// Rate int [mu |grad u|^2 + (mu+lambda)(div u)^2] h^3 at one instant.
fn viscous_rate(
    u: &[Array3<f64>; 3],
    p: &PhysParams,
    g: &Grid,
    sc: &StencilConfig,
) -> Result<f64> {
    let mut acc = diagnostics::CompensatedSum::default();
    for comp in u {
        for axis in 0..3 {
            let d = stencil::deriv_axis(comp, axis, g, sc)?;
            for &v in d.iter() {
                acc.add(p.mu * v * v);
            }
        }
    }
    let divu = stencil::div_vec(u, g, sc)?;
    let mul = p.mu + p.lambda;
    for &v in divu.iter() {
        acc.add(mul * v * v);
    }
    Ok(acc.total() * g.cell_volume())
}

fn collar_is_background(s: &State, p: &PhysParams, g: &Grid, width: usize) -> bool {
    let (n0, n1, n2) = g.dim();
    let tol = 1e-10 * p.rho_bar.max(1.0);
    for i in 0..n0 {
        for j in 0..n1 {
            for k in 0..n2 {
                let in_collar = i < width
                    || i >= n0 - width
                    || j < width
                    || j >= n1 - width
                    || k < width
                    || k >= n2 - width;
                if in_collar && diagnostics::deviation_at(s, i, j, k, p.rho_bar) > tol {
                    return false;
                }
            }
        }
    }
    true
}

/// Advances `initial` to rc.t_end or breakdown, sampling diagnostics every
/// output_stride steps and at the last computed state. The growth
/// hypotheses are evaluated once up front; the Riccati column is populated
/// only if they held at t = 0.
pub fn run(
    initial: &State,
    p: &PhysParams,
    g: &Grid,
    sc: &StencilConfig,
    rc: &RunConfig,
) -> Result<RunOutcome> {
    p.validate(rc.mode)?;
    sc.validate()?;
    rc.validate()?;
    initial.check_shape(g)?;
    let all_finite = initial.rho.iter().all(|v| v.is_finite())
        && initial.u.iter().all(|a| a.iter().all(|v| v.is_finite()))
        && initial
            .f
            .iter()
            .all(|r| r.iter().all(|a| a.iter().all(|v| v.is_finite())));
    if !all_finite {
        return Err(Error::InvalidInitialData("initial fields contain non-finite values".into()));
    }
    let mut rho_min0 = f64::INFINITY;
    for &v in initial.rho.iter() {
        rho_min0 = rho_min0.min(v);
    }
    if rho_min0 <= rc.rho_floor {
        return Err(Error::InvalidInitialData(format!(
            "initial density {rho_min0} is at or below the floor {}",
            rc.rho_floor
        )));
    }
    if !collar_is_background(initial, p, g, sc.collar()) {
        return Err(Error::InvalidInitialData(
            "boundary collar must hold the background state".into(),
        ));
    }

    let hyp = initdata::check_hypotheses(initial, p, g, sc)?;
    let ric = if hyp.cond_ff && initial.t == 0.0 {
        Some(RiccatiCtx { f0: hyp.f0_functional, rho0_max: hyp.rho0_max })
    } else {
        None
    };

    let mut c = to_conserved(initial);
    pin_collar(&mut c, p, g, sc.collar());
    let mut series = vec![diagnostics::sample(initial, p, g, sc, None, ric.as_ref())?];
    let mut last_sampled_t = c.t;

    let viscous = rc.mode == Mode::Viscous;
    let mut diss_integral = 0.0f64;
    let mut prev_rate = if viscous {
        viscous_rate(&velocity_fields(&c).0, p, g, sc)?
    } else {
        0.0
    };

    let mut steps = 0usize;
    let dt_min = 1e-14 * rc.t_end;
    let mut status = RunStatus::Completed;

    while c.t < rc.t_end * (1.0 - 1e-12) {
        let (dt_stable, speed) = stable_dt(&c, p, g, rc)?;
        if !(dt_stable > dt_min) {
            status = RunStatus::Breakdown { reason: BreakdownReason::DtUnderflow, t: c.t };
            break;
        }
        let dt = dt_stable.min(rc.t_end - c.t);
        let next = match rk4_with_speed(&c, dt, speed, p, g, sc, rc.mode) {
            Ok(n) => n,
            Err(Error::DegenerateDensity { .. }) => {
                status = RunStatus::Breakdown {
                    reason: BreakdownReason::DensityFloor,
                    t: c.t + dt,
                };
                break;
            }
            Err(e) => return Err(e),
        };
        steps += 1;
        if !next.all_finite() {
            status = RunStatus::Breakdown { reason: BreakdownReason::NonFinite, t: next.t };
            break;
        }
        c = next;
        let (u, _) = velocity_fields(&c);
        if viscous {
            let rate = viscous_rate(&u, p, g, sc)?;
            diss_integral += 0.5 * (prev_rate + rate) * dt;
            prev_rate = rate;
        }
        if c.min_rho() <= rc.rho_floor {
            status = RunStatus::Breakdown { reason: BreakdownReason::DensityFloor, t: c.t };
            break;
        }
        let gradu = diagnostics::max_grad_norm(&u, g, sc)?;
        let due = steps.is_multiple_of(rc.output_stride);
        let over_ceiling = gradu > rc.gradu_ceiling;
        if due || over_ceiling {
            let prim = to_primitive(&c)?;
            let row = diagnostics::sample(&prim, p, g, sc, series.last(), ric.as_ref())?;
            series.push(row);
            last_sampled_t = c.t;
        }
        if over_ceiling {
            status = RunStatus::Breakdown { reason: BreakdownReason::GraduCeiling, t: c.t };
            break;
        }
    }

    // final state is always represented in the series when it is sampleable
    if c.t > last_sampled_t && c.min_rho() > 0.0 && c.all_finite() {
        let prim = to_primitive(&c)?;
        series.push(diagnostics::sample(&prim, p, g, sc, series.last(), ric.as_ref())?);
    }

    Ok(RunOutcome {
        status,
        final_state: c,
        series,
        hypotheses: hyp,
        viscous_dissipation: viscous.then_some(diss_integral),
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initdata::{make_bump, make_equilibrium, BumpSpec};

    fn params() -> PhysParams {
        PhysParams { a: 1.0, gamma: 2.0, mu: 0.0, lambda: 0.0, rho_bar: 1.0, r: 0.5 }
    }

    #[test]
    fn equilibrium_tendency_is_exactly_zero() {
        let p = params();
        let g = Grid::cube(10, 1.0).unwrap();
        for order in [2usize, 4] {
            let sc = StencilConfig { order, dissipation_coeff: 0.02 };
            let eq = to_conserved(&make_equilibrium(&p, &g));
            for mode in [Mode::Inviscid, Mode::Viscous] {
                let k = rhs(&eq, &p, &g, &sc, mode, 2.0).unwrap();
                for comp in 0..N_COMPS {
                    assert!(k.comp(comp).iter().all(|&v| v == 0.0), "comp {comp}");
                }
            }
        }
    }

    #[test]
    fn zero_viscosity_viscous_rhs_equals_inviscid_bitwise() {
        let p = params();
        let g = Grid::cube(12, 1.0).unwrap();
        let sc = StencilConfig::default();
        let spec = BumpSpec {
            velocity_amplitude: 0.3,
            density_bump: 0.1,
            f_potential_amplitude: 0.05,
            ..Default::default()
        };
        let c = to_conserved(&make_bump(&spec, &p, &g).unwrap());
        let a = rhs_inviscid(&c, &p, &g, &sc, 1.7).unwrap();
        let b = rhs_viscous(&c, &p, &g, &sc, 1.7).unwrap();
        for comp in 0..N_COMPS {
            assert_eq!(a.comp(comp), b.comp(comp));
        }
    }

    #[test]
    fn shear_mode_viscous_term_matches_fourier_symbol() {
        // u = eps sin(k x0) e1, rho const, F = I: the whole momentum-1
        // tendency reduces to mu Lap u1 ~= -mu k^2 u1
        let mu = 0.13;
        let p = PhysParams { mu, ..params() };
        let k = std::f64::consts::PI;
        let eps = 1e-3;
        let mut errs = Vec::new();
        for n in [16usize, 32] {
            let g = Grid::cube(n, 1.0).unwrap();
            let sc = StencilConfig { order: 2, dissipation_coeff: 0.0 };
            let mut s = make_equilibrium(&p, &g);
            for i in 0..n {
                for j in 0..n {
                    for kk in 0..n {
                        let x = g.coord(i, j, kk);
                        s.u[1][[i, j, kk]] = eps * (k * x[0]).sin();
                    }
                }
            }
            let c = to_conserved(&s);
            let tend = rhs_viscous(&c, &p, &g, &sc, 1.0).unwrap();
            let [ri, rj, rk] = crate::stencil::interior(&g, &sc);
            let mut err = 0.0f64;
            for i in ri.clone() {
                for j in rj.clone() {
                    for kk in rk.clone() {
                        let want = -mu * k * k * s.u[1][[i, j, kk]];
                        err = err.max((tend.comp(2)[[i, j, kk]] - want).abs());
                    }
                }
            }
            errs.push(err / (mu * k * k * eps));
        }
        let slope = (errs[0] / errs[1]).log2();
        assert!(slope > 1.7, "errs {errs:?}, slope {slope}");
    }

    #[test]
    fn equilibrium_is_a_fixed_point_of_the_stepper() {
        let p = params();
        let g = Grid::cube(12, 1.0).unwrap();
        let sc = StencilConfig::default();
        let rc = RunConfig::new(1.0, Mode::Inviscid, &p);
        let eq = to_conserved(&make_equilibrium(&p, &g));
        let (dt, _) = stable_dt(&eq, &p, &g, &rc).unwrap();
        let mut c = eq.clone();
        for _ in 0..20 {
            c = step_rk4(&c, dt, &p, &g, &sc, &rc).unwrap();
        }
        for comp in 0..N_COMPS {
            assert_eq!(c.comp(comp), eq.comp(comp), "comp {comp} drifted");
        }
    }

    #[test]
    fn oversized_dt_is_rejected() {
        let p = params();
        let g = Grid::cube(10, 1.0).unwrap();
        let sc = StencilConfig::default();
        let rc = RunConfig::new(1.0, Mode::Inviscid, &p);
        let eq = to_conserved(&make_equilibrium(&p, &g));
        let (dt_max, _) = stable_dt(&eq, &p, &g, &rc).unwrap();
        assert!(matches!(
            step_rk4(&eq, 3.0 * dt_max, &p, &g, &sc, &rc),
            Err(Error::CflViolation { .. })
        ));
    }

    #[test]
    fn viscous_dt_bound_tightens_on_fine_grids() {
        let p = PhysParams { mu: 0.5, lambda: 0.0, ..params() };
        let rc = RunConfig::new(1.0, Mode::Viscous, &p);
        let g1 = Grid::cube(16, 1.0).unwrap();
        let g2 = Grid::cube(64, 1.0).unwrap();
        let e1 = to_conserved(&make_equilibrium(&p, &g1));
        let e2 = to_conserved(&make_equilibrium(&p, &g2));
        let (dt1, _) = stable_dt(&e1, &p, &g1, &rc).unwrap();
        let (dt2, _) = stable_dt(&e2, &p, &g2, &rc).unwrap();
        // h shrinks by 4, viscous dt by 16
        let ratio = dt1 / dt2;
        assert!(ratio > 12.0, "expected quadratic dt scaling, got ratio {ratio}");
    }

    #[test]
    fn equilibrium_run_completes_with_null_series() {
        let p = params();
        let g = Grid::cube(10, 1.0).unwrap();
        let sc = StencilConfig::default();
        let mut rc = RunConfig::new(0.05, Mode::Inviscid, &p);
        rc.output_stride = 3;
        let out = run(&make_equilibrium(&p, &g), &p, &g, &sc, &rc).unwrap();
        assert_eq!(out.status, RunStatus::Completed);
        assert!(out.steps > 0);
        assert!(out.series.len() >= 2);
        for row in &out.series {
            assert_eq!(row.m, 0.0);
            assert_eq!(row.ffun, 0.0);
            assert_eq!(row.e, 0.0);
            assert_eq!(row.trace, 0.0);
            assert_eq!(row.front, 0.0);
            assert_eq!(row.gradu_max, 0.0);
            assert_eq!(row.bkm, 0.0);
        }
        // strictly increasing sample times
        for w in out.series.windows(2) {
            assert!(w[1].t > w[0].t);
        }
        let last = out.series.last().unwrap();
        assert!((last.t - 0.05).abs() <= 1e-12);
        assert!(out.viscous_dissipation.is_none());
    }

    #[test]
    fn gradient_ceiling_breakdown_is_reported_not_raised() {
        let p = params();
        let g = Grid::cube(12, 1.0).unwrap();
        let sc = StencilConfig::default();
        let mut rc = RunConfig::new(0.5, Mode::Inviscid, &p);
        rc.gradu_ceiling = 1e-9; // any motion at all trips it
        let spec = BumpSpec { velocity_amplitude: 0.2, ..Default::default() };
        let s = make_bump(&spec, &p, &g).unwrap();
        let out = run(&s, &p, &g, &sc, &rc).unwrap();
        match out.status {
            RunStatus::Breakdown { reason, t } => {
                assert_eq!(reason, BreakdownReason::GraduCeiling);
                assert!(t > 0.0);
                assert!((reason.to_string()) == "gradu_ceiling");
            }
            other => panic!("expected breakdown, got {other:?}"),
        }
        // breakdown-time row is present, timestamps still strict
        for w in out.series.windows(2) {
            assert!(w[1].t > w[0].t);
        }
    }

    #[test]
    fn bad_initial_data_is_an_error_not_a_breakdown() {
        let p = params();
        let g = Grid::cube(10, 1.0).unwrap();
        let sc = StencilConfig::default();
        let rc = RunConfig::new(0.1, Mode::Inviscid, &p);
        let mut s = make_equilibrium(&p, &g);
        s.u[0][[0, 0, 0]] = 0.3; // deviation inside the pinned collar
        assert!(matches!(
            run(&s, &p, &g, &sc, &rc),
            Err(Error::InvalidInitialData(_))
        ));
        let mut s2 = make_equilibrium(&p, &g);
        s2.rho[[5, 5, 5]] = f64::NAN;
        assert!(matches!(
            run(&s2, &p, &g, &sc, &rc),
            Err(Error::InvalidInitialData(_))
        ));
    }
}
