use ndarray::Array3;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::PhysParams;

/// Primitive fields at time `t`: density rho, velocity u, deformation
/// gradient F (row r, column c as `f[r][c]`).
#[derive(Debug, Clone)]
pub struct State {
    pub t: f64,
    pub rho: Array3<f64>,
    pub u: [Array3<f64>; 3],
    pub f: [[Array3<f64>; 3]; 3],
}

/// Conserved fields evolved by the scheme: rho, momentum m = rho u, and
/// Q = rho F^T (so Q_jk = rho F_kj). Row-divergence of Q is the tracked
/// constraint residual. Components live in a fixed order used everywhere
/// serialization touches them: [rho, m1, m2, m3, Q11, Q12, ..., Q33].
#[derive(Debug, Clone)]
pub struct ConservedState {
    pub t: f64,
    comps: [Array3<f64>; 13],
}

pub const N_COMPS: usize = 13;

#[inline]
pub const fn q_comp(j: usize, k: usize) -> usize {
    4 + 3 * j + k
}

impl State {
    pub fn zeros(g: &Grid) -> State {
        let z = || Array3::zeros(g.dim());
        State {
            t: 0.0,
            rho: z(),
            u: std::array::from_fn(|_| z()),
            f: std::array::from_fn(|_| std::array::from_fn(|_| z())),
        }
    }

    pub fn check_shape(&self, g: &Grid) -> Result<()> {
        let want = g.dim();
        let mut dims = vec![self.rho.dim()];
        dims.extend(self.u.iter().map(|a| a.dim()));
        for row in &self.f {
            dims.extend(row.iter().map(|a| a.dim()));
        }
        for d in dims {
            if d != want {
                return Err(Error::ShapeMismatch {
                    expected: [want.0, want.1, want.2],
                    got: [d.0, d.1, d.2],
                });
            }
        }
        Ok(())
    }

    /// Largest deviation from the background (rho_bar, 0, I) over cells with
    /// |x| >= p.r. Zero for data satisfying the far-field identity exactly.
    pub fn far_field_deviation(&self, p: &PhysParams, g: &Grid) -> f64 {
        let mut dev: f64 = 0.0;
        let (n0, n1, n2) = g.dim();
        let r2 = p.r * p.r;
        for i in 0..n0 {
            for j in 0..n1 {
                for k in 0..n2 {
                    let x = g.coord(i, j, k);
                    if x[0] * x[0] + x[1] * x[1] + x[2] * x[2] < r2 {
                        continue;
                    }
                    dev = dev.max((self.rho[[i, j, k]] - p.rho_bar).abs());
                    for a in 0..3 {
                        dev = dev.max(self.u[a][[i, j, k]].abs());
                        for b in 0..3 {
                            let id = if a == b { 1.0 } else { 0.0 };
                            dev = dev.max((self.f[a][b][[i, j, k]] - id).abs());
                        }
                    }
                }
            }
        }
        dev
    }
}

impl ConservedState {
    pub fn zeros(g: &Grid) -> ConservedState {
        ConservedState { t: 0.0, comps: std::array::from_fn(|_| Array3::zeros(g.dim())) }
    }

    #[inline]
    pub(crate) fn from_comps(t: f64, comps: [Array3<f64>; 13]) -> ConservedState {
        ConservedState { t, comps }
    }

    pub fn comp(&self, c: usize) -> &Array3<f64> {
        &self.comps[c]
    }

    #[inline]
    pub fn comp_mut(&mut self, c: usize) -> &mut Array3<f64> {
        &mut self.comps[c]
    }

    #[inline]
    pub fn rho(&self) -> &Array3<f64> {
        &self.comps[0]
    }

    #[inline]
    pub fn m(&self, j: usize) -> &Array3<f64> {
        &self.comps[1 + j]
    }

    /// Q_jk, row j, column k.
    #[inline]
    pub fn q(&self, j: usize, k: usize) -> &Array3<f64> {
        &self.comps[q_comp(j, k)]
    }

    pub fn dim(&self) -> (usize, usize, usize) {
        self.comps[0].dim()
    }

    /// self += a * other, componentwise. Time is untouched.
    pub fn axpy(&mut self, a: f64, other: &ConservedState) {
        for c in 0..N_COMPS {
            let dst = self.comps[c].as_slice_memory_order_mut().expect("contiguous");
            let src = other.comps[c].as_slice_memory_order().expect("contiguous");
            for (d, s) in dst.iter_mut().zip(src) {
                *d += a * s;
            }
        }
    }

    pub fn min_rho(&self) -> f64 {
        self.comps[0].iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn all_finite(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|v| v.is_finite()))
    }
}

pub fn to_conserved(s: &State) -> ConservedState {
    let mut c = ConservedState {
        t: s.t,
        comps: std::array::from_fn(|_| Array3::zeros(s.rho.dim())),
    };
    c.comps[0].assign(&s.rho);
    for j in 0..3 {
        let dst = c.comps[1 + j].as_slice_memory_order_mut().unwrap();
        let rho = s.rho.as_slice_memory_order().unwrap();
        let u = s.u[j].as_slice_memory_order().unwrap();
        for ((d, r), v) in dst.iter_mut().zip(rho).zip(u) {
            *d = r * v;
        }
    }
    for j in 0..3 {
        for k in 0..3 {
            // Q_jk = rho (F^T)_jk = rho F_kj
            let dst = c.comps[q_comp(j, k)].as_slice_memory_order_mut().unwrap();
            let rho = s.rho.as_slice_memory_order().unwrap();
            let f = s.f[k][j].as_slice_memory_order().unwrap();
            for ((d, r), v) in dst.iter_mut().zip(rho).zip(f) {
                *d = r * v;
            }
        }
    }
    c
}

/// Recovers (rho, u = m/rho, F = (Q/rho)^T). Errors if rho is anywhere
/// nonpositive; division by near-vacuum densities is the caller's risk and
/// is guarded in the solver by the density floor.
pub fn to_primitive(c: &ConservedState) -> Result<State> {
    let min_rho = c.min_rho();
    if !(min_rho > 0.0) {
        return Err(Error::DegenerateDensity { min_rho });
    }
    let mut s = State {
        t: c.t,
        rho: c.comps[0].clone(),
        u: std::array::from_fn(|_| Array3::zeros(c.dim())),
        f: std::array::from_fn(|_| std::array::from_fn(|_| Array3::zeros(c.dim()))),
    };
    let rho = c.comps[0].as_slice_memory_order().unwrap();
    for j in 0..3 {
        let dst = s.u[j].as_slice_memory_order_mut().unwrap();
        let m = c.comps[1 + j].as_slice_memory_order().unwrap();
        for ((d, r), v) in dst.iter_mut().zip(rho).zip(m) {
            *d = v / r;
        }
    }
    for r_idx in 0..3 {
        for c_idx in 0..3 {
            // F_rc = Q_cr / rho
            let dst = s.f[r_idx][c_idx].as_slice_memory_order_mut().unwrap();
            let q = c.comps[q_comp(c_idx, r_idx)].as_slice_memory_order().unwrap();
            for ((d, r), v) in dst.iter_mut().zip(rho).zip(q) {
                *d = v / r;
            }
        }
    }
    Ok(s)
}
