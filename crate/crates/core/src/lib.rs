//! Simulation and bifurcation analysis of planar systems switched by quadrant.
//!
//! The plane is split into four half-open quadrants; quadrants 1 and 3 follow
//! `x' = A(λ)x + g(x, λ)` and quadrants 2 and 4 follow `x' = B(λ)x + g(x, λ)`,
//! with `A = [[-a, b], [-c, -a]]` and `B = [[-a, c], [-b, -a]]`. Both linear
//! parts are stable foci, yet the switched flow can lose stability through the
//! return index `Δ(λ)`, creating a branch of periodic orbits.

// `!(x < 0.0)` is used on purpose so that NaN counts as a violation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod bifurcation;
pub mod config;
pub mod error;
pub mod fit;
pub mod model;
pub mod numeric;
pub mod poly;
pub mod roots;

pub use error::{Error, ErrorClass, Result};
pub use model::{region_of, Point, Quadrant, SwitchedSystem, SystemParams};
pub use poly::{LambdaPoly, MonomialTerm, PolyField};
