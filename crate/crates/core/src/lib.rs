//! Hessian measures and mixed Monge-Ampere measures of finite convex
//! functions on R^n (2 <= n <= 4), computed numerically along independent
//! routes, together with the valuations built from them and a harness that
//! checks additive kinematic identities to stated tolerances.
//!
//! The crate is organized around the measure pipeline:
//!
//! * [`numerics`] - elementary symmetric functions, mixed discriminants,
//!   quadrature grids, Haar sampling on SO(n), polynomial fits, rng streams.
//! * [`convexfn`] - the convex-function zoo (cones, half-cones, support
//!   functions, smooth test functions) with evaluation, derivatives,
//!   subdifferentials and proximal maps.
//! * [`transforms`] - radial test densities, their decay classes, and the
//!   integral transform calculus used to move between Hessian-measure and
//!   Monge-Ampere representations.
//! * [`measures`] - weighted integrals against Hessian measures and mixed
//!   Monge-Ampere measures, via closed forms, quadrature and a prox-based
//!   Monte Carlo oracle.
//! * [`valuations`] - functional intrinsic volumes and functional Minkowski
//!   vectors with their closed forms on the canonical cone functions.
//! * [`kinematics`] - both sides of the kinematic formulas and the
//!   verification reports they produce.

pub mod convexfn;
pub mod kinematics;
pub mod measures;
pub mod numerics;
pub mod transforms;
pub mod valuations;

mod error;

pub use error::{Error, Result};
pub use numerics::{Point, Rotation, SymMatrix};
