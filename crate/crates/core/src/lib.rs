//! Numerical evaluation of generalized Piterbarg-Berman sojourn functionals
//!
//! Evaluates B_a^h(x, E) = int e^z P{ mes{t in E : sqrt2 B_a(t) - |t|^a - h(t) - z > 0} > x } dz
//! for fractional Brownian motion B_a, by closed forms (a in {1,2}), semi-closed
//! quadrature, definition-level quadrature, and Monte Carlo, plus analytic bounds.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bounds;
pub mod closed;
pub mod gauss;
pub mod mc;
pub mod problem;
pub mod quad;
pub mod sojourn;
