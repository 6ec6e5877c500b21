//! Central finite differences on the uniform grid, in difference-of-fluxes
//! form so that interior sums telescope, plus even-order artificial
//! dissipation. All operators write the interior box only; the boundary
//! collar (width order/2 + 1) is left zero and is pinned to the background
//! by the time stepper.

use ndarray::Array3;

use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilConfig {
    /// Formal order of the first-derivative stencils, 2 or 4.
    pub order: usize,
    /// Artificial dissipation coefficient, >= 0. The applied operator is
    /// 4th-difference for order 2 and 6th-difference for order 4, scaled by
    /// the characteristic speed passed per evaluation, so it damps without
    /// degrading the design order.
    pub dissipation_coeff: f64,
}

impl Default for StencilConfig {
    fn default() -> Self {
        StencilConfig { order: 2, dissipation_coeff: 0.02 }
    }
}

impl StencilConfig {
    pub fn validate(&self) -> Result<()> {
        if self.order != 2 && self.order != 4 {
            return Err(Error::InvalidParams {
                field: "order",
                message: format!("stencil order must be 2 or 4, got {}", self.order),
            });
        }
        if !(self.dissipation_coeff >= 0.0 && self.dissipation_coeff.is_finite()) {
            return Err(Error::InvalidParams {
                field: "dissipation_coeff",
                message: format!("must be finite and nonnegative, got {}", self.dissipation_coeff),
            });
        }
        Ok(())
    }

    /// Cells pinned on each face. Wide enough for both the derivative
    /// stencil (order/2) and the dissipation stencil (order/2 + 1).
    #[inline]
    pub fn collar(&self) -> usize {
        self.order / 2 + 1
    }

    pub fn min_cells(&self) -> usize {
        2 * self.collar() + 1
    }
}

fn check_grid(g: &Grid, sc: &StencilConfig) -> Result<()> {
    sc.validate()?;
    let need = sc.min_cells();
    for a in 0..3 {
        if g.n[a] < need {
            return Err(Error::GridTooSmall { needed: need, got: g.n[a] });
        }
    }
    Ok(())
}

fn check_shape(f: &Array3<f64>, g: &Grid) -> Result<()> {
    if f.dim() != g.dim() {
        let d = f.dim();
        return Err(Error::ShapeMismatch {
            expected: g.n,
            got: [d.0, d.1, d.2],
        });
    }
    Ok(())
}

/// Index ranges of the non-collar box.
pub fn interior(g: &Grid, sc: &StencilConfig) -> [std::ops::Range<usize>; 3] {
    let c = sc.collar();
    [c..g.n[0] - c, c..g.n[1] - c, c..g.n[2] - c]
}

/// out[cell] += scale * sum_pairs c_o * (f[cell + o] - f[cell - o]) along
/// the axis, over the interior box. Pairing before scaling makes every
/// antisymmetric stencil return exactly 0.0 on constant fields, so a
/// discrete equilibrium is a bitwise fixed point of the scheme.
fn add_antisym_axis(
    f: &Array3<f64>,
    axis: usize,
    pairs: &[(usize, f64)],
    scale: f64,
    collar: usize,
    out: &mut Array3<f64>,
) {
    let (n0, n1, n2) = f.dim();
    let stride = [n1 * n2, n2, 1usize];
    let src = f.as_slice_memory_order().expect("contiguous");
    let dst = out.as_slice_memory_order_mut().expect("contiguous");
    let len = n2 - 2 * collar;
    for i in collar..n0 - collar {
        for j in collar..n1 - collar {
            let base = (i * n1 + j) * n2 + collar;
            for &(o, c) in pairs {
                let cs = c * scale;
                let shift = o * stride[axis];
                let sp = &src[base + shift..base + shift + len];
                let sm = &src[base - shift..base - shift + len];
                let d = &mut dst[base..base + len];
                for ((dv, pv), mv) in d.iter_mut().zip(sp).zip(sm) {
                    *dv += cs * (pv - mv);
                }
            }
        }
    }
}

/// Paired undivided second difference along the axis:
/// d[x] = (f[x-1] - f[x]) + (f[x+1] - f[x]), on cells 1..n-1, zero at the
/// end planes. Exactly 0.0 on constants; composing it yields the higher
/// even differences with the same exactness.
fn delta2_axis(f: &Array3<f64>, axis: usize) -> Array3<f64> {
    let (n0, n1, n2) = f.dim();
    let stride = [n1 * n2, n2, 1usize];
    let sh = stride[axis];
    let src = f.as_slice_memory_order().expect("contiguous");
    let mut out = Array3::zeros(f.dim());
    {
        let dst = out.as_slice_memory_order_mut().expect("contiguous");
        let lo = [
            if axis == 0 { 1 } else { 0 },
            if axis == 1 { 1 } else { 0 },
            if axis == 2 { 1 } else { 0 },
        ];
        let len = n2 - 2 * lo[2];
        for i in lo[0]..n0 - lo[0] {
            for j in lo[1]..n1 - lo[1] {
                let base = (i * n1 + j) * n2 + lo[2];
                let s0 = &src[base..base + len];
                let sp = &src[base + sh..base + sh + len];
                let sm = &src[base - sh..base - sh + len];
                let d = &mut dst[base..base + len];
                for (((dv, v0), pv), mv) in d.iter_mut().zip(s0).zip(sp).zip(sm) {
                    *dv = (mv - v0) + (pv - v0);
                }
            }
        }
    }
    out
}

fn first_deriv_pairs(order: usize) -> (&'static [(usize, f64)], f64) {
    match order {
        2 => (&[(1, 1.0)][..], 0.5),
        4 => (&[(1, 8.0), (2, -1.0)][..], 1.0 / 12.0),
        _ => unreachable!("validated order"),
    }
}

/// d/dx_axis by the central stencil; interior box only, collar zero.
pub fn deriv_axis(f: &Array3<f64>, axis: usize, g: &Grid, sc: &StencilConfig) -> Result<Array3<f64>> {
    check_grid(g, sc)?;
    check_shape(f, g)?;
    let mut out = Array3::zeros(f.dim());
    let (pairs, w) = first_deriv_pairs(sc.order);
    add_antisym_axis(f, axis, pairs, w / g.h[axis], sc.collar(), &mut out);
    Ok(out)
}

pub fn grad(f: &Array3<f64>, g: &Grid, sc: &StencilConfig) -> Result<[Array3<f64>; 3]> {
    Ok([
        deriv_axis(f, 0, g, sc)?,
        deriv_axis(f, 1, g, sc)?,
        deriv_axis(f, 2, g, sc)?,
    ])
}

pub fn div_vec(v: &[Array3<f64>; 3], g: &Grid, sc: &StencilConfig) -> Result<Array3<f64>> {
    check_grid(g, sc)?;
    for a in v {
        check_shape(a, g)?;
    }
    let mut out = Array3::zeros(v[0].dim());
    let (pairs, w) = first_deriv_pairs(sc.order);
    for axis in 0..3 {
        add_antisym_axis(&v[axis], axis, pairs, w / g.h[axis], sc.collar(), &mut out);
    }
    Ok(out)
}

/// Row divergence of a matrix field: out_j = sum_i d(M_ji)/dx_i.
pub fn div_mat_rows(
    m: &[[Array3<f64>; 3]; 3],
    g: &Grid,
    sc: &StencilConfig,
) -> Result<[Array3<f64>; 3]> {
    check_grid(g, sc)?;
    for row in m {
        for a in row {
            check_shape(a, g)?;
        }
    }
    let mut out: [Array3<f64>; 3] = std::array::from_fn(|_| Array3::zeros(m[0][0].dim()));
    let (pairs, w) = first_deriv_pairs(sc.order);
    for (j, row) in m.iter().enumerate() {
        for axis in 0..3 {
            add_antisym_axis(&row[axis], axis, pairs, w / g.h[axis], sc.collar(), &mut out[j]);
        }
    }
    Ok(out)
}

/// Accumulates scale * src into the interior box of out.
fn add_scaled_interior(src: &Array3<f64>, scale: f64, collar: usize, out: &mut Array3<f64>) {
    let (n0, n1, n2) = src.dim();
    let s = src.as_slice_memory_order().expect("contiguous");
    let d = out.as_slice_memory_order_mut().expect("contiguous");
    let len = n2 - 2 * collar;
    for i in collar..n0 - collar {
        for j in collar..n1 - collar {
            let base = (i * n1 + j) * n2 + collar;
            for (dv, sv) in d[base..base + len].iter_mut().zip(&s[base..base + len]) {
                *dv += scale * sv;
            }
        }
    }
}

/// Adds the order-matched second derivative along `axis` into the
/// interior box of `out`.
fn add_second_axis(
    f: &Array3<f64>,
    axis: usize,
    g: &Grid,
    sc: &StencilConfig,
    out: &mut Array3<f64>,
) {
    let h2 = g.h[axis] * g.h[axis];
    let collar = sc.collar();
    let d2 = delta2_axis(f, axis);
    match sc.order {
        2 => add_scaled_interior(&d2, 1.0 / h2, collar, out),
        4 => {
            // delta2 - delta4/12 reproduces the 5-point 4th-order taps
            let d4 = delta2_axis(&d2, axis);
            let mut comb = d2;
            ndarray::azip!((c in &mut comb, &q in &d4) *c -= q / 12.0);
            add_scaled_interior(&comb, 1.0 / h2, collar, out);
        }
        _ => unreachable!("validated order"),
    }
}

/// out[cell] += scale * (mixed second difference along two distinct axes),
/// the tensor product of two antisymmetric first-derivative stencils
/// applied directly to f. Per-axis reach stays at order/2, inside the
/// collar; composing two deriv_axis passes instead would read the zeroed
/// collar of the intermediate and poison the cells near the interior edge.
/// The corner grouping keeps constant fields at exactly 0.0.
fn add_mixed_axis(
    f: &Array3<f64>,
    axis_a: usize,
    axis_b: usize,
    pairs: &[(usize, f64)],
    scale: f64,
    collar: usize,
    out: &mut Array3<f64>,
) {
    let (n0, n1, n2) = f.dim();
    let stride = [n1 * n2, n2, 1usize];
    let src = f.as_slice_memory_order().expect("contiguous");
    let dst = out.as_slice_memory_order_mut().expect("contiguous");
    let len = n2 - 2 * collar;
    for i in collar..n0 - collar {
        for j in collar..n1 - collar {
            let base = (i * n1 + j) * n2 + collar;
            for &(oa, ca) in pairs {
                for &(ob, cb) in pairs {
                    let cs = ca * cb * scale;
                    let sa = oa * stride[axis_a];
                    let sb = ob * stride[axis_b];
                    let spp = &src[base + sa + sb..base + sa + sb + len];
                    let spm = &src[base + sa - sb..base + sa - sb + len];
                    let smp = &src[base - sa + sb..base - sa + sb + len];
                    let smm = &src[base - sa - sb..base - sa - sb + len];
                    let d = &mut dst[base..base + len];
                    for x in 0..len {
                        d[x] += cs * ((spp[x] - spm[x]) - (smp[x] - smm[x]));
                    }
                }
            }
        }
    }
}

pub fn laplacian(f: &Array3<f64>, g: &Grid, sc: &StencilConfig) -> Result<Array3<f64>> {
    check_grid(g, sc)?;
    check_shape(f, g)?;
    let mut out = Array3::zeros(f.dim());
    for axis in 0..3 {
        add_second_axis(f, axis, g, sc, &mut out);
    }
    Ok(out)
}

/// Component i of grad(div u), assembled from second-derivative stencils
/// on the velocity components directly: sum_j d2 u_j / dx_i dx_j. No
/// intermediate div u field is formed (see add_mixed_axis for why).
pub fn grad_div_comp(
    u: &[Array3<f64>; 3],
    i: usize,
    g: &Grid,
    sc: &StencilConfig,
) -> Result<Array3<f64>> {
    check_grid(g, sc)?;
    for a in u {
        check_shape(a, g)?;
    }
    let mut out = Array3::zeros(u[0].dim());
    let (pairs, w) = first_deriv_pairs(sc.order);
    for j in 0..3 {
        if j == i {
            add_second_axis(&u[i], i, g, sc, &mut out);
        } else {
            let scale = w * w / (g.h[i] * g.h[j]);
            add_mixed_axis(&u[j], i, j, pairs, scale, sc.collar(), &mut out);
        }
    }
    Ok(out)
}

/// Conservative divergence of a flux triple: out = sum_a d(flux_a)/dx_a.
/// Central first derivatives telescope, so the interior sum of the result
/// reduces to boundary flux values and vanishes for compact fluxes.
pub fn flux_div(flux: &[Array3<f64>; 3], g: &Grid, sc: &StencilConfig) -> Result<Array3<f64>> {
    div_vec(flux, g, sc)
}

/// out -= divergence of the flux triple, in conservative form. Borrowed
/// fluxes let callers difference existing state arrays without copies;
/// this is the accumulation primitive behind every tendency.
pub fn sub_flux_div(
    flux: [&Array3<f64>; 3],
    g: &Grid,
    sc: &StencilConfig,
    out: &mut Array3<f64>,
) -> Result<()> {
    check_grid(g, sc)?;
    for a in flux {
        check_shape(a, g)?;
    }
    check_shape(out, g)?;
    let (pairs, w) = first_deriv_pairs(sc.order);
    for axis in 0..3 {
        add_antisym_axis(flux[axis], axis, pairs, -w / g.h[axis], sc.collar(), out);
    }
    Ok(())
}

/// Adds the even-order dissipation tendency of `f` into `out`:
/// -(coeff * speed_scale / h_a) * (-1)^p * delta_a^(2p) f per axis, with
/// p = order/2 + 1. Annihilates constants and linears; telescopes.
pub fn add_dissipation(
    f: &Array3<f64>,
    speed_scale: f64,
    g: &Grid,
    sc: &StencilConfig,
    out: &mut Array3<f64>,
) -> Result<()> {
    check_grid(g, sc)?;
    check_shape(f, g)?;
    check_shape(out, g)?;
    if sc.dissipation_coeff == 0.0 {
        return Ok(());
    }
    // delta^4 for order 2, delta^6 for order 4, built by composing the
    // paired second difference; the sign keeps the Fourier symbol <= 0
    let collar = sc.collar();
    for axis in 0..3 {
        let d2 = delta2_axis(f, axis);
        let d4 = delta2_axis(&d2, axis);
        let (even, sign) = match sc.order {
            2 => (d4, -1.0),
            4 => (delta2_axis(&d4, axis), 1.0),
            _ => unreachable!("validated order"),
        };
        let scale = sign * sc.dissipation_coeff * speed_scale / g.h[axis];
        add_scaled_interior(&even, scale, collar, out);
    }
    Ok(())
}

pub fn dissipation(
    f: &Array3<f64>,
    speed_scale: f64,
    g: &Grid,
    sc: &StencilConfig,
) -> Result<Array3<f64>> {
    let mut out = Array3::zeros(f.dim());
    add_dissipation(f, speed_scale, g, sc, &mut out)?;
    Ok(out)
}
