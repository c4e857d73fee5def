//! Simulation and verification laboratory for the Poiseuille flow of a
//! full Ericksen–Leslie nematic liquid crystal.
//!
//! The reduced model couples a parabolic velocity equation to a damped
//! quasilinear wave equation for the director angle:
//!
//! ```text
//! ρ u_t           = a + (g(θ) u_x + h(θ) θ_t)_x
//! ν θ_tt + γ₁ θ_t = c(θ)(c(θ) θ_x)_x − h(θ) u_x
//! ```
//!
//! The crate provides:
//!
//! - [`model`] — material parameters and the coefficient functions `c, g, h, b`;
//! - [`initial`] — finite-energy initial data, including the compressive
//!   bump family that produces finite-time gradient blow-up;
//! - [`heat`] — the 1-D heat kernel, Duhamel velocity representation, and
//!   the flux map whose fixed point closes the coupling;
//! - [`charsolver`] — the characteristic-coordinate semilinear solver for
//!   the wave part, valid through gradient blow-up;
//! - [`coupled`] — the fixed-point coupling of the two solvers plus an
//!   independent finite-difference reference scheme and energy accounting;
//! - [`singularity`] — blow-up detection, characteristic tracing, and
//!   regularity diagnostics (Hölder-1/2 cusp signature);
//! - [`csvio`] — deterministic CSV snapshots of all field data.

pub mod charsolver;
pub mod coupled;
pub mod csvio;
pub mod error;
pub mod heat;
pub mod initial;
pub mod model;
pub mod num;
pub mod singularity;

pub use error::{Error, Result};
pub use initial::{build_blowup_data, bump_phi, initial_energy, BlowupFamily, InitialData};
pub use model::LeslieParams;
