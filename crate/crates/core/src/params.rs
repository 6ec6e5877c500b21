use crate::error::{Error, Result};

/// Viscosity regime of a run. Inviscid drops the viscous terms entirely;
/// viscous adds mu*lap(u) + (mu+lambda)*grad(div u) to the momentum balance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Inviscid,
    Viscous,
}

/// Material and data parameters.
///
/// Pressure law P(rho) = A rho^gamma with A > 0, gamma > 1. The stored
/// elastic energy is Hookean, W(F) = |F|^2 / 2, so the Cauchy stress
/// contribution is div(rho F F^T). `rho_bar` is the far-field density and
/// `r` the radius of the initial disturbance: data equal (rho_bar, 0, I)
/// for |x| >= r.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    pub a: f64,
    pub gamma: f64,
    pub mu: f64,
    pub lambda: f64,
    pub rho_bar: f64,
    pub r: f64,
}

impl PhysParams {
    /// Sound speed of the background, sigma = sqrt(A gamma rho_bar^(gamma-1)).
    pub fn sigma(&self) -> f64 {
        (self.a * self.gamma * self.rho_bar.powf(self.gamma - 1.0)).sqrt()
    }

    /// Checks positivity/admissibility. Viscous mode additionally requires
    /// the run gate 7 mu > lambda (which also rejects mu = lambda = 0).
    pub fn validate(&self, mode: Mode) -> Result<()> {
        fn finite(field: &'static str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParams { field, message: format!("must be finite, got {v}") })
            }
        }
        finite("A", self.a)?;
        finite("gamma", self.gamma)?;
        finite("mu", self.mu)?;
        finite("lambda", self.lambda)?;
        finite("rho_bar", self.rho_bar)?;
        finite("R", self.r)?;
        if self.a <= 0.0 {
            return Err(Error::InvalidParams {
                field: "A",
                message: format!("pressure coefficient must be positive, got {}", self.a),
            });
        }
        if self.gamma <= 1.0 {
            return Err(Error::InvalidParams {
                field: "gamma",
                message: format!("adiabatic exponent must exceed 1, got {}", self.gamma),
            });
        }
        if self.rho_bar <= 0.0 {
            return Err(Error::InvalidParams {
                field: "rho_bar",
                message: format!("far-field density must be positive, got {}", self.rho_bar),
            });
        }
        if self.r <= 0.0 {
            return Err(Error::InvalidParams {
                field: "R",
                message: format!("disturbance radius must be positive, got {}", self.r),
            });
        }
        if self.mu < 0.0 {
            return Err(Error::InvalidParams {
                field: "mu",
                message: format!("shear viscosity must be nonnegative, got {}", self.mu),
            });
        }
        if 3.0 * self.lambda + 2.0 * self.mu < 0.0 {
            return Err(Error::InvalidParams {
                field: "lambda",
                message: format!(
                    "3*lambda + 2*mu must be nonnegative, got {}",
                    3.0 * self.lambda + 2.0 * self.mu
                ),
            });
        }
        if mode == Mode::Viscous && !crate::initdata::check_viscosity(self.mu, self.lambda) {
            return Err(Error::InvalidParams {
                field: "mu",
                message: format!(
                    "viscous runs require 7*mu > lambda, got mu = {}, lambda = {}",
                    self.mu, self.lambda
                ),
            });
        }
        Ok(())
    }
}
