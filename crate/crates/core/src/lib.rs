//! Homogenized energy densities under convex gradient constraints.
//!
//! The crate computes, at desk scale, the objects attached to periodic
//! integrands `W(x, xi) = A(x) f(xi)` whose effective domain in the gradient
//! variable is the closure of a bounded convex set `C` with `0` in its
//! interior:
//!
//! - exact gauge/distance geometry of `C` ([`convex`]),
//! - extended-real evaluation of `W`, hypothesis certification, and the
//!   finite truncation sequence `W_n` ([`integrand`]),
//! - discrete multi-cell minimization approximating the homogenized density
//!   ([`cell`]),
//! - piecewise-affine envelopes, lamination bounds, radial limits and the
//!   extension to the constraint boundary ([`envelope`]),
//! - the barrier-type hyperelastic application ([`hyper`]),
//! - epsilon-sweep experiments comparing oscillating-coefficient minima with
//!   homogenized predictions ([`sweep`]).
//!
//! Everything here is `no_std + alloc`; IO, file formats and the CLI live in
//! the companion `homcell-cli` crate. Infinity is a first-class value: any
//! evaluation may return `f64::INFINITY` and the solvers keep their iterates
//! strictly feasible instead of penalizing.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod cell;
pub mod convex;
pub mod envelope;
pub mod error;
pub mod hyper;
pub mod integrand;
pub mod math;
pub mod matrix;
pub mod mesh;
pub mod solver;
pub mod sweep;

pub use convex::ConstraintSet;
pub use error::HomError;
pub use integrand::{DensityKernel, Integrand, PeriodicCoefficient, TruncationSchedule};
pub use matrix::Matrix;
