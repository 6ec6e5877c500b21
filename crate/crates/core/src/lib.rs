//! Finite-time breakdown experiments for compressible Hookean
//! elastodynamics, with and without Oldroyd-type viscosity.
//!
//! The library evolves the conserved fields (rho, m, Q) = (density,
//! momentum, rho F^T) of an isentropic elastic medium on a periodic-free
//! cube with a pinned background collar, tracks the weighted functionals
//! whose Riccati comparison forces gradient growth, and reports either a
//! completed run or a classified breakdown. See the `solver` module for
//! the scheme and `diagnostics` for the monitored quantities.

// Stencil and symbol assembly index several arrays in lockstep; iterator
// rewrites obscure that. `!(x > 0)` guards deliberately reject NaN.
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod convergence;
pub mod diagnostics;
pub mod eos;
pub mod error;
pub mod grid;
pub mod initdata;
pub mod params;
pub mod series;
pub mod solver;
pub mod state;
pub mod stencil;
pub mod symhyp;

pub use cli::cli_main;
pub use error::{Error, Result};
