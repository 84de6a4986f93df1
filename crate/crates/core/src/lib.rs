//! Lagrangian solver and audit toolkit for the one-dimensional periodic
//! radiation hydrodynamics system with viscosity and heat conduction:
//!
//! ```text
//! v_t − u_x = 0
//! u_t + p_x = (μ u_x / v)_x
//! (R/(γ−1)) θ_t − (κ(v,θ) θ_x / v)_x = −q_x + μ u_x² / v − (Rθ/v) u_x
//! −(q_x / v)_x + a v q + b (θ⁴)_x = 0
//! ```
//!
//! on the torus `[−½, ½)`, together with numerical audits of the identities
//! and bounds that govern it.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod exponents;
pub mod grid;
pub mod integrator;
pub mod model;
pub mod radiation;
pub mod tridiag;

pub use error::{Error, Field, Result};
pub use grid::Grid;
pub use model::{Params, State};
