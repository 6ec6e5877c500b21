//! Symmetric-hyperbolic form of the first-order system in the variables
//! V = [P_hat; u; F_col0; F_col1; F_col2] (13 entries), where
//! P_hat = A*gamma/(gamma-1) * rho^(gamma-1) is the pressure potential.
//! The system reads A0 V_t + sum_i Ai V_xi = 0 with A0 = diag(a0, I12),
//! a0 = 1/(A*gamma*rho^(gamma-1)) = 1/c^2, and symmetric Ai.
//!
//! This form is used for validation and wave-speed bounds only; time
//! evolution runs on the conservative variables (solver module).

use crate::eos;
use crate::error::{Error, Result};
use crate::params::PhysParams;
use crate::state::ConservedState;

pub const V_DIM: usize = 13;

/// Index of P_hat in V.
#[inline]
pub const fn v_phat() -> usize {
    0
}

/// Index of u_j in V.
#[inline]
pub const fn v_u(j: usize) -> usize {
    1 + j
}

/// Index of F_{jc} in V (column-major over F's columns).
#[inline]
pub const fn v_f(j: usize, c: usize) -> usize {
    4 + 3 * c + j
}

#[derive(Debug, Clone)]
pub struct SymbolMatrices {
    /// Diagonal of A0 (the matrix is diagonal positive).
    pub a0_diag: [f64; V_DIM],
    /// The three symmetric coefficient matrices A1, A2, A3.
    pub ai: [[[f64; V_DIM]; V_DIM]; 3],
}

#[derive(Debug, Clone, Copy)]
pub struct HyperbolicityReport {
    /// max over i of max|Ai - Ai^T|; exactly 0 by construction.
    pub symmetry_defect: f64,
    /// min diagonal entry of A0; must be > 0.
    pub min_a0_diag: f64,
    pub degenerate_density: bool,
    pub pass: bool,
}

/// Builds (A0, A1, A2, A3) at one point state. F is indexed f[row][col].
pub fn assemble(rho: f64, u: [f64; 3], f: [[f64; 3]; 3], p: &PhysParams) -> Result<SymbolMatrices> {
    if !(rho > 0.0) {
        return Err(Error::DegenerateDensity { min_rho: rho });
    }
    let a0 = 1.0 / eos::sound_speed_sq(rho, p);
    let mut a0_diag = [1.0; V_DIM];
    a0_diag[v_phat()] = a0;

    let mut ai = [[[0.0; V_DIM]; V_DIM]; 3];
    for (i, a) in ai.iter_mut().enumerate() {
        // pressure row/column: advection of P_hat plus the div u coupling
        a[v_phat()][v_phat()] = u[i] * a0;
        a[v_phat()][v_u(i)] = 1.0;
        a[v_u(i)][v_phat()] = 1.0;
        for j in 0..3 {
            // velocity block advects with u_i
            a[v_u(j)][v_u(j)] = u[i];
            for c in 0..3 {
                // u <-> F_col(c) coupling is -F_{ic} I
                a[v_u(j)][v_f(j, c)] = -f[i][c];
                a[v_f(j, c)][v_u(j)] = -f[i][c];
                // F blocks advect with u_i
                a[v_f(j, c)][v_f(j, c)] = u[i];
            }
        }
    }
    Ok(SymbolMatrices { a0_diag, ai })
}

/// Largest eigenvalue of a symmetric 3x3 matrix, by the trigonometric
/// closed form (no iteration, so it is cheap enough for per-cell use).
pub fn sym3_eig_max(m: [[f64; 3]; 3]) -> f64 {
    let p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    if p1 == 0.0 {
        return m[0][0].max(m[1][1]).max(m[2][2]);
    }
    let d0 = m[0][0] - q;
    let d1 = m[1][1] - q;
    let d2 = m[2][2] - q;
    let p2 = d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    if p == 0.0 {
        return q;
    }
    // r = det((M - qI)/p) / 2, clamped against roundoff
    let b = [
        [d0 / p, m[0][1] / p, m[0][2] / p],
        [m[0][1] / p, d1 / p, m[1][2] / p],
        [m[0][2] / p, m[1][2] / p, d2 / p],
    ];
    let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
        - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (det_b / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    q + 2.0 * p * phi.cos()
}

/// Multiplicative guard on the closed-form speed bound so that roundoff in
/// the eigenvalue formula can never let a sampled eigenvalue sneak above it.
const SPEED_SAFETY: f64 = 1.0 + 1e-12;

fn speed_bound(rho: f64, speed2: f64, ftf_max: f64, p: &PhysParams) -> f64 {
    let c2 = eos::sound_speed_sq(rho, p);
    (speed2.sqrt() + (c2 + ftf_max.max(0.0)).sqrt()) * SPEED_SAFETY
}

/// Upper bound on the spectral radius of A0^{-1} (sum_i n_i Ai) over all
/// unit directions n: |u| + sqrt(c^2 + lambda_max(F^T F)). The directional
/// wave speeds are u.n, u.n +- |F^T n|, u.n +- sqrt(c^2 + |F^T n|^2), all
/// dominated by this value.
pub fn max_char_speed(rho: f64, u: [f64; 3], f: [[f64; 3]; 3], p: &PhysParams) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::DegenerateDensity { min_rho: rho });
    }
    let u2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    let mut ftf = [[0.0; 3]; 3];
    for c in 0..3 {
        for d in 0..3 {
            ftf[c][d] = (0..3).map(|r| f[r][c] * f[r][d]).sum();
        }
    }
    Ok(speed_bound(rho, u2, sym3_eig_max(ftf), p))
}

/// max_char_speed over every cell of a conserved state. Serial reduction in
/// a fixed order, so reruns are bit-identical.
pub fn max_char_speed_conserved(cs: &ConservedState, p: &PhysParams) -> Result<f64> {
    let rho = cs.rho().as_slice_memory_order().expect("contiguous");
    let m: [&[f64]; 3] =
        std::array::from_fn(|j| cs.m(j).as_slice_memory_order().expect("contiguous"));
    let q: [[&[f64]; 3]; 3] = std::array::from_fn(|j| {
        std::array::from_fn(|k| cs.q(j, k).as_slice_memory_order().expect("contiguous"))
    });
    let mut worst = 0.0f64;
    for idx in 0..rho.len() {
        let r = rho[idx];
        if !(r > 0.0) {
            return Err(Error::DegenerateDensity { min_rho: r });
        }
        let inv_r2 = 1.0 / (r * r);
        let m2 = (0..3).map(|j| m[j][idx] * m[j][idx]).sum::<f64>();
        // F^T F = Q Q^T / rho^2
        let mut qqt = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in a..3 {
                let v = (0..3).map(|i| q[a][i][idx] * q[b][i][idx]).sum::<f64>() * inv_r2;
                qqt[a][b] = v;
                qqt[b][a] = v;
            }
        }
        let s = speed_bound(r, m2 * inv_r2, sym3_eig_max(qqt), p);
        if s > worst {
            worst = s;
        }
    }
    Ok(worst)
}

pub fn check_hyperbolicity(
    rho: f64,
    u: [f64; 3],
    f: [[f64; 3]; 3],
    p: &PhysParams,
) -> HyperbolicityReport {
    if !(rho > 0.0) {
        return HyperbolicityReport {
            symmetry_defect: f64::NAN,
            min_a0_diag: f64::NAN,
            degenerate_density: true,
            pass: false,
        };
    }
    let sm = assemble(rho, u, f, p).expect("rho > 0 checked");
    let mut defect = 0.0f64;
    for a in &sm.ai {
        for r in 0..V_DIM {
            for c in 0..V_DIM {
                defect = defect.max((a[r][c] - a[c][r]).abs());
            }
        }
    }
    let min_a0 = sm.a0_diag.iter().cloned().fold(f64::INFINITY, f64::min);
    HyperbolicityReport {
        symmetry_defect: defect,
        min_a0_diag: min_a0,
        degenerate_density: false,
        pass: defect == 0.0 && min_a0 > 0.0 && min_a0.is_finite(),
    }
}
