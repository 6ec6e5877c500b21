//! Shared analytic field machinery for the verification suites: smooth
//! trigonometric states with closed-form derivatives, and the exact
//! tendencies of both the conservative system and the symmetrized
//! primitive system built from them by the product rule. Everything here
//! is independent of the discrete operators it is used to test.

#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

use elastoblow::eos;
use elastoblow::grid::Grid;
use elastoblow::params::{Mode, PhysParams};
use elastoblow::state::{q_comp, State};

#[derive(Debug, Clone, Copy)]
pub struct Wave {
    pub amp: f64,
    pub k: [f64; 3],
    pub phase: f64,
}

impl Wave {
    pub fn val(&self, x: [f64; 3]) -> f64 {
        self.amp * (self.k[0] * x[0] + self.k[1] * x[1] + self.k[2] * x[2] + self.phase).sin()
    }

    pub fn grad(&self, x: [f64; 3]) -> [f64; 3] {
        let c =
            self.amp * (self.k[0] * x[0] + self.k[1] * x[1] + self.k[2] * x[2] + self.phase).cos();
        [c * self.k[0], c * self.k[1], c * self.k[2]]
    }

    /// d^2/dx_a dx_b.
    pub fn hess(&self, x: [f64; 3]) -> [[f64; 3]; 3] {
        let s = -self.amp
            * (self.k[0] * x[0] + self.k[1] * x[1] + self.k[2] * x[2] + self.phase).sin();
        std::array::from_fn(|a| std::array::from_fn(|b| s * self.k[a] * self.k[b]))
    }
}

/// Smooth manufactured state: rho = rho_bar + wave, u_i = wave_i,
/// F = I + wave matrix. Amplitudes are chosen so rho stays positive on
/// the unit box.
pub struct AnalyticState {
    pub rho_bar: f64,
    pub rho_w: Wave,
    pub u_w: [Wave; 3],
    pub f_w: [[Wave; 3]; 3],
}

pub fn standard_analytic() -> AnalyticState {
    use std::f64::consts::PI;
    let w = |amp: f64, k: [f64; 3], phase: f64| Wave {
        amp,
        k: [k[0] * PI, k[1] * PI, k[2] * PI],
        phase,
    };
    AnalyticState {
        rho_bar: 1.0,
        rho_w: w(0.08, [1.0, -0.5, 0.75], 0.3),
        u_w: [
            w(0.15, [0.75, 0.5, -1.0], 0.9),
            w(0.12, [-0.5, 1.0, 0.5], -0.4),
            w(0.10, [1.0, 0.25, 0.75], 1.7),
        ],
        f_w: [
            [w(0.06, [0.5, 0.75, -0.5], 0.1), w(0.05, [1.0, -0.25, 0.5], 0.7), w(0.04, [-0.75, 0.5, 1.0], -1.1)],
            [w(0.05, [0.25, 1.0, 0.75], 2.0), w(0.07, [0.75, -1.0, 0.25], 0.4), w(0.05, [0.5, 0.5, -0.75], -0.8)],
            [w(0.04, [-1.0, 0.25, 0.5], 1.2), w(0.06, [0.5, 0.75, 1.0], -1.6), w(0.08, [0.75, 0.5, 0.25], 0.6)],
        ],
    }
}

impl AnalyticState {
    pub fn rho(&self, x: [f64; 3]) -> f64 {
        self.rho_bar + self.rho_w.val(x)
    }

    pub fn drho(&self, x: [f64; 3]) -> [f64; 3] {
        self.rho_w.grad(x)
    }

    pub fn u(&self, x: [f64; 3]) -> [f64; 3] {
        std::array::from_fn(|i| self.u_w[i].val(x))
    }

    /// du[i][a] = d u_i / d x_a.
    pub fn du(&self, x: [f64; 3]) -> [[f64; 3]; 3] {
        std::array::from_fn(|i| self.u_w[i].grad(x))
    }

    /// d2u[i][a][b] = d^2 u_i / dx_a dx_b.
    pub fn d2u(&self, x: [f64; 3]) -> [[[f64; 3]; 3]; 3] {
        std::array::from_fn(|i| self.u_w[i].hess(x))
    }

    /// f[r][c] = F_rc.
    pub fn f(&self, x: [f64; 3]) -> [[f64; 3]; 3] {
        std::array::from_fn(|r| {
            std::array::from_fn(|c| {
                let id = if r == c { 1.0 } else { 0.0 };
                id + self.f_w[r][c].val(x)
            })
        })
    }

    /// df[r][c][a] = d F_rc / d x_a.
    pub fn df(&self, x: [f64; 3]) -> [[[f64; 3]; 3]; 3] {
        std::array::from_fn(|r| std::array::from_fn(|c| self.f_w[r][c].grad(x)))
    }

    pub fn fill(&self, g: &Grid) -> State {
        let mut s = State::zeros(g);
        for i in 0..g.n[0] {
            for j in 0..g.n[1] {
                for k in 0..g.n[2] {
                    let x = g.coord(i, j, k);
                    s.rho[[i, j, k]] = self.rho(x);
                    let u = self.u(x);
                    let f = self.f(x);
                    for a in 0..3 {
                        s.u[a][[i, j, k]] = u[a];
                        for b in 0..3 {
                            s.f[a][b][[i, j, k]] = f[a][b];
                        }
                    }
                }
            }
        }
        s
    }

    /// Exact tendency of the conserved variables [rho, m, Q] at x, by the
    /// product rule on the flux forms (dissipation excluded).
    pub fn conserved_tendency(&self, x: [f64; 3], p: &PhysParams, mode: Mode) -> [f64; 13] {
        let rho = self.rho(x);
        let drho = self.drho(x);
        let u = self.u(x);
        let du = self.du(x);
        let f = self.f(x);
        let df = self.df(x);

        let mut out = [0.0f64; 13];

        // mass: -div(rho u)
        for a in 0..3 {
            out[0] -= drho[a] * u[a] + rho * du[a][a];
        }

        // momentum: -d_a [ rho u_i u_a + delta_ia P - rho (F F^T)_ia ]
        let c2 = eos::sound_speed_sq(rho, p);
        for i in 0..3 {
            let mut t = 0.0;
            for a in 0..3 {
                t -= (drho[a] * u[i] + rho * du[i][a]) * u[a] + rho * u[i] * du[a][a];
                let mut ffa = 0.0;
                let mut dffa = 0.0;
                for c in 0..3 {
                    ffa += f[i][c] * f[a][c];
                    dffa += df[i][c][a] * f[a][c] + f[i][c] * df[a][c][a];
                }
                t += drho[a] * ffa + rho * dffa;
            }
            t -= c2 * drho[i];
            if mode == Mode::Viscous {
                let d2u = self.d2u(x);
                let mut lap = 0.0;
                let mut ddiv = 0.0;
                for b in 0..3 {
                    lap += d2u[i][b][b];
                    ddiv += d2u[b][i][b];
                }
                t += p.mu * lap + (p.mu + p.lambda) * ddiv;
            }
            out[1 + i] = t;
        }

        // Q_jk = rho F_kj: -d_a (u_a Q_jk - u_k Q_ja)
        let q = |j: usize, k: usize| rho * f[k][j];
        let dq = |j: usize, k: usize, a: usize| drho[a] * f[k][j] + rho * df[k][j][a];
        for j in 0..3 {
            for k in 0..3 {
                let mut t = 0.0;
                for a in 0..3 {
                    t -= du[a][a] * q(j, k) + u[a] * dq(j, k, a);
                    t += du[k][a] * q(j, a) + u[k] * dq(j, a, a);
                }
                out[q_comp(j, k)] = t;
            }
        }
        out
    }

    /// Exact tendency of the symmetrized variables [p_hat, u, F columns]
    /// at x. The F block evolves by F_t = -u.grad F + (grad u) F; the
    /// velocity block carries grad p_hat and the elastic sum
    /// F_ic d_i F_jc, exactly the terms the symbol matrices encode.
    pub fn primitive_tendency(&self, x: [f64; 3], p: &PhysParams) -> [f64; 13] {
        let rho = self.rho(x);
        let drho = self.drho(x);
        let u = self.u(x);
        let du = self.du(x);
        let f = self.f(x);
        let df = self.df(x);

        let c2 = eos::sound_speed_sq(rho, p);
        let dphat: [f64; 3] = std::array::from_fn(|a| eos::dp_hat_drho(rho, p) * drho[a]);

        let mut out = [0.0f64; 13];
        for a in 0..3 {
            out[0] -= u[a] * dphat[a] + c2 * du[a][a];
        }
        for j in 0..3 {
            let mut t = -dphat[j];
            for a in 0..3 {
                t -= u[a] * du[j][a];
            }
            for i in 0..3 {
                for c in 0..3 {
                    t += f[i][c] * df[j][c][i];
                }
            }
            out[1 + j] = t;
        }
        for j in 0..3 {
            for c in 0..3 {
                let mut t = 0.0;
                for a in 0..3 {
                    t -= u[a] * df[j][c][a];
                }
                for i in 0..3 {
                    t += f[i][c] * du[j][i];
                }
                out[4 + 3 * c + j] = t;
            }
        }
        out
    }
}

/// Max absolute difference over all 13 conserved components.
pub fn max_state_diff(
    a: &elastoblow::state::ConservedState,
    b: &elastoblow::state::ConservedState,
) -> f64 {
    let mut m = 0.0f64;
    for comp in 0..elastoblow::state::N_COMPS {
        for (x, y) in a.comp(comp).iter().zip(b.comp(comp).iter()) {
            m = m.max((x - y).abs());
        }
    }
    m
}

/// Max interior error of -A0^{-1} sum_i Ai dV_i, with the Ai assembled per
/// cell and the dV_i taken by the same finite differences the solver uses,
/// against the exact primitive tendency of the standard analytic field.
pub fn symhyp_equiv_error(n: usize, order: usize, p: &PhysParams) -> f64 {
    use elastoblow::{eos, stencil, symhyp};
    use ndarray::Array3;

    let g = Grid::cube(n, 1.0).unwrap();
    let sc = stencil::StencilConfig { order, dissipation_coeff: 0.0 };
    let an = standard_analytic();

    let mut v: Vec<Array3<f64>> = (0..symhyp::V_DIM)
        .map(|_| Array3::zeros(g.dim()))
        .collect();
    for i in 0..g.n[0] {
        for j in 0..g.n[1] {
            for k in 0..g.n[2] {
                let x = g.coord(i, j, k);
                v[symhyp::v_phat()][[i, j, k]] = eos::p_hat(an.rho(x), p);
                let u = an.u(x);
                let f = an.f(x);
                for a in 0..3 {
                    v[symhyp::v_u(a)][[i, j, k]] = u[a];
                    for c in 0..3 {
                        v[symhyp::v_f(a, c)][[i, j, k]] = f[a][c];
                    }
                }
            }
        }
    }
    let dv: Vec<[Array3<f64>; 3]> = v
        .iter()
        .map(|comp| {
            std::array::from_fn(|axis| stencil::deriv_axis(comp, axis, &g, &sc).unwrap())
        })
        .collect();

    let mut err = 0.0f64;
    let ir = stencil::interior(&g, &sc);
    for i in ir[0].clone() {
        for j in ir[1].clone() {
            for k in ir[2].clone() {
                let x = g.coord(i, j, k);
                let m = symhyp::assemble(an.rho(x), an.u(x), an.f(x), p).unwrap();
                let exact = an.primitive_tendency(x, p);
                for r in 0..symhyp::V_DIM {
                    let mut flux = 0.0;
                    for axis in 0..3 {
                        for s in 0..symhyp::V_DIM {
                            let a = m.ai[axis][r][s];
                            if a != 0.0 {
                                flux += a * dv[s][axis][[i, j, k]];
                            }
                        }
                    }
                    let got = -flux / m.a0_diag[r];
                    err = err.max((got - exact[r]).abs());
                }
            }
        }
    }
    err
}
