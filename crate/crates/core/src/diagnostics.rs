//! Functionals and bounds monitored during a run: the mass deviation
//! m(t) = int (rho - rho_bar), the weighted radial momentum
//! Ffun(t) = int rho x.u, the energy
//! E(t) = int [ rho|u|^2/2 + rho|F-I|^2/2 + (P - P0)/(gamma-1) ],
//! the trace integral int rho tr(F-I), the constraint residual
//! max|div(rho F^T)|, the disturbance front radius against sigma t + R,
//! the accumulated gradient integral int_0^t max|grad u| ds, and the
//! Riccati-type lower envelope y' = y^2 / ((4pi/3)(sigma t + R)^5 rho_max)
//! whose divergence time upper-bounds the lifespan when Ffun(0) exceeds
//! (16pi/3) sigma R^4 rho_max.

use ndarray::Array3;

use crate::eos;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::PhysParams;
use crate::state::State;
use crate::stencil::{self, StencilConfig};

/// Deviation threshold that defines "disturbed" for the front radius.
pub const FRONT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub m: f64,
    pub ffun: f64,
    pub e: f64,
    pub trace: f64,
    pub div_res: f64,
    pub front: f64,
    pub front_bound: f64,
    pub bkm: f64,
    pub gradu_max: f64,
    pub rho_min: f64,
    /// Present only when the initial data satisfied the growth hypothesis.
    pub riccati_lb: Option<f64>,
}

/// Initial-data constants that parameterize the Riccati envelope.
#[derive(Debug, Clone, Copy)]
pub struct RiccatiCtx {
    pub f0: f64,
    pub rho0_max: f64,
}

/// Neumaier-compensated accumulator. The conservation tolerances sit near
/// the roundoff of a naive quarter-million-term sum, so the quadratures
/// here must not be the dominant error source.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    s: f64,
    c: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.s + v;
        if self.s.abs() >= v.abs() {
            self.c += (self.s - t) + v;
        } else {
            self.c += (v - t) + self.s;
        }
        self.s = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.s + self.c
    }
}

fn cell_sum(g: &Grid, mut term: impl FnMut(usize, usize, usize) -> f64) -> f64 {
    let mut acc = CompensatedSum::default();
    for i in 0..g.n[0] {
        for j in 0..g.n[1] {
            for k in 0..g.n[2] {
                acc.add(term(i, j, k));
            }
        }
    }
    acc.total() * g.cell_volume()
}

/// m(t) = int (rho - rho_bar) dx by midpoint quadrature.
pub fn mass_deviation(s: &State, p: &PhysParams, g: &Grid) -> f64 {
    cell_sum(g, |i, j, k| s.rho[[i, j, k]] - p.rho_bar)
}

/// Ffun(t) = int rho x.u dx.
pub fn radial_momentum(s: &State, g: &Grid) -> f64 {
    cell_sum(g, |i, j, k| {
        let x = g.coord(i, j, k);
        let xu = x[0] * s.u[0][[i, j, k]] + x[1] * s.u[1][[i, j, k]] + x[2] * s.u[2][[i, j, k]];
        s.rho[[i, j, k]] * xu
    })
}

/// E(t) with the elastic part measured against the identity and the
/// pressure part against P0 = P(rho_bar).
pub fn energy(s: &State, p: &PhysParams, g: &Grid) -> f64 {
    let p0 = eos::pressure(p.rho_bar, p);
    cell_sum(g, |i, j, k| {
        let rho = s.rho[[i, j, k]];
        let mut u2 = 0.0;
        for a in 0..3 {
            let v = s.u[a][[i, j, k]];
            u2 += v * v;
        }
        let mut fmi2 = 0.0;
        for r in 0..3 {
            for c in 0..3 {
                let d = s.f[r][c][[i, j, k]] - if r == c { 1.0 } else { 0.0 };
                fmi2 += d * d;
            }
        }
        0.5 * rho * u2 + 0.5 * rho * fmi2 + (eos::pressure(rho, p) - p0) / (p.gamma - 1.0)
    })
}

/// int rho tr(F - I) dx.
pub fn trace_integral(s: &State, g: &Grid) -> f64 {
    cell_sum(g, |i, j, k| {
        s.rho[[i, j, k]]
            * (s.f[0][0][[i, j, k]] + s.f[1][1][[i, j, k]] + s.f[2][2][[i, j, k]] - 3.0)
    })
}

/// max-norm of the discrete row divergence of rho F^T. Zero initial data
/// keeps this at stencil-truncation level for the lifetime of a smooth run.
pub fn div_residual(s: &State, g: &Grid, sc: &StencilConfig) -> Result<f64> {
    let dim = s.rho.dim();
    let mut m: [[Array3<f64>; 3]; 3] = std::array::from_fn(|_| {
        std::array::from_fn(|_| Array3::zeros(dim))
    });
    for (j, row) in m.iter_mut().enumerate() {
        for (i, entry) in row.iter_mut().enumerate() {
            // (rho F^T)_{ji} = rho F_{ij}
            ndarray::azip!((e in entry, &r in &s.rho, &f in &s.f[i][j]) *e = r * f);
        }
    }
    let d = stencil::div_mat_rows(&m, g, sc)?;
    let mut worst = 0.0f64;
    for comp in &d {
        for &v in comp.iter() {
            worst = worst.max(v.abs());
        }
    }
    Ok(worst)
}

pub(crate) fn deviation_at(s: &State, i: usize, j: usize, k: usize, rho_bar: f64) -> f64 {
    let mut d = (s.rho[[i, j, k]] - rho_bar).abs();
    for a in 0..3 {
        d = d.max(s.u[a][[i, j, k]].abs());
    }
    for r in 0..3 {
        for c in 0..3 {
            let id = if r == c { 1.0 } else { 0.0 };
            d = d.max((s.f[r][c][[i, j, k]] - id).abs());
        }
    }
    d
}

/// Largest cell-center radius at which the state deviates from the
/// background (rho_bar, 0, I) by more than tol; 0 if nowhere.
pub fn front_radius(s: &State, p: &PhysParams, g: &Grid, tol: f64) -> f64 {
    let mut front = 0.0f64;
    for i in 0..g.n[0] {
        for j in 0..g.n[1] {
            for k in 0..g.n[2] {
                let x = g.coord(i, j, k);
                let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                if r > front && deviation_at(s, i, j, k, p.rho_bar) > tol {
                    front = r;
                }
            }
        }
    }
    front
}

/// max over cells of the Frobenius norm of the discrete velocity gradient.
pub fn max_grad_norm(u: &[Array3<f64>; 3], g: &Grid, sc: &StencilConfig) -> Result<f64> {
    let mut sq: Option<Array3<f64>> = None;
    for comp in u {
        for axis in 0..3 {
            let d = stencil::deriv_axis(comp, axis, g, sc)?;
            match &mut sq {
                None => {
                    let mut d2 = d;
                    d2.mapv_inplace(|v| v * v);
                    sq = Some(d2);
                }
                Some(acc) => ndarray::azip!((a in acc, &v in &d) *a += v * v),
            }
        }
    }
    let sq = sq.expect("three components");
    let mut worst = 0.0f64;
    for &v in sq.iter() {
        worst = worst.max(v);
    }
    Ok(worst.sqrt())
}

/// Trapezoidal accumulation of int max|grad u| dt.
pub fn bkm_accumulate(prev: f64, gradu_now: f64, gradu_prev: f64, dt: f64) -> f64 {
    prev + 0.5 * (gradu_now + gradu_prev) * dt
}

fn riccati_k(rho0_max: f64, p: &PhysParams) -> f64 {
    3.0 / (16.0 * std::f64::consts::PI * p.sigma() * rho0_max)
}

/// Condition threshold (16pi/3) sigma R^4 rho0_max for the radial-momentum
/// functional.
pub fn growth_threshold(rho0_max: f64, p: &PhysParams) -> f64 {
    let r4 = p.r * p.r * p.r * p.r;
    16.0 * std::f64::consts::PI / 3.0 * p.sigma() * r4 * rho0_max
}

/// Closed-form solution of the comparison problem
/// y' = y^2 / ((4pi/3)(sigma t + R)^5 rho0_max), y(0) = f0:
/// y(t) = 1 / ( 1/f0 - K (R^-4 - (sigma t + R)^-4) ), K = 3/(16 pi sigma rho0_max).
/// Returns +inf once the denominator is no longer positive.
pub fn riccati_lower_bound(t: f64, f0: f64, rho0_max: f64, p: &PhysParams) -> Result<f64> {
    if !(f0 > 0.0) {
        return Err(Error::InvalidFunctional(format!(
            "Riccati envelope needs a positive initial functional, got {f0}"
        )));
    }
    let k = riccati_k(rho0_max, p);
    let r = p.r;
    let st = p.sigma() * t + r;
    let denom = 1.0 / f0 - k * (r.powi(-4) - st.powi(-4));
    if denom <= 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(1.0 / denom)
    }
}

/// Divergence time of the envelope: finite only above the growth threshold,
/// where T = ( (R^-4 - 16 pi sigma rho0_max/(3 f0))^(-1/4) - R ) / sigma.
pub fn blowup_time_upper_bound(f0: f64, rho0_max: f64, p: &PhysParams) -> Option<f64> {
    if !(f0 > growth_threshold(rho0_max, p)) {
        return None;
    }
    let k = riccati_k(rho0_max, p);
    let inner = p.r.powi(-4) - 1.0 / (k * f0);
    Some((inner.powf(-0.25) - p.r) / p.sigma())
}

/// Assembles one diagnostics row. The trapezoidal gradient integral chains
/// off `prev`; the Riccati column is filled only when `ric` is supplied.
pub fn sample(
    s: &State,
    p: &PhysParams,
    g: &Grid,
    sc: &StencilConfig,
    prev: Option<&DiagnosticsRow>,
    ric: Option<&RiccatiCtx>,
) -> Result<DiagnosticsRow> {
    let t = s.t;
    let gradu_max = max_grad_norm(&s.u, g, sc)?;
    let bkm = match prev {
        Some(r) => bkm_accumulate(r.bkm, gradu_max, r.gradu_max, t - r.t),
        None => 0.0,
    };
    let riccati_lb = match ric {
        Some(c) => Some(riccati_lower_bound(t, c.f0, c.rho0_max, p)?),
        None => None,
    };
    let mut rho_min = f64::INFINITY;
    for &v in s.rho.iter() {
        rho_min = rho_min.min(v);
    }
    Ok(DiagnosticsRow {
        t,
        m: mass_deviation(s, p, g),
        ffun: radial_momentum(s, g),
        e: energy(s, p, g),
        trace: trace_integral(s, g),
        div_res: div_residual(s, g, sc)?,
        front: front_radius(s, p, g, FRONT_TOL),
        front_bound: p.sigma() * t + p.r,
        bkm,
        gradu_max,
        rho_min,
        riccati_lb,
    })
}
