//! Isentropic gamma-law equation of state, P(rho) = A rho^gamma, and the
//! normalized pressure p_hat = A gamma / (gamma - 1) rho^(gamma - 1) that
//! symmetrizes the first-order system. Note rho * dp_hat/drho = dP/drho.

use crate::params::PhysParams;

/// P(rho). Defined for rho >= 0; vacuum maps to zero pressure.
#[inline]
pub fn pressure(rho: f64, p: &PhysParams) -> f64 {
    p.a * rho.powf(p.gamma)
}

/// dP/drho = A gamma rho^(gamma-1), the squared sound speed.
#[inline]
pub fn sound_speed_sq(rho: f64, p: &PhysParams) -> f64 {
    p.a * p.gamma * rho.powf(p.gamma - 1.0)
}

/// p_hat(rho) = A gamma / (gamma - 1) rho^(gamma - 1).
#[inline]
pub fn p_hat(rho: f64, p: &PhysParams) -> f64 {
    p.a * p.gamma / (p.gamma - 1.0) * rho.powf(p.gamma - 1.0)
}

/// dp_hat/drho = A gamma rho^(gamma-2). Needs rho > 0 when gamma < 2.
#[inline]
pub fn dp_hat_drho(rho: f64, p: &PhysParams) -> f64 {
    p.a * p.gamma * rho.powf(p.gamma - 2.0)
}

/// Background sound speed sigma = sqrt(dP/drho at rho_bar).
#[inline]
pub fn sound_speed_inf(p: &PhysParams) -> f64 {
    p.sigma()
}
