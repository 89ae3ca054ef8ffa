//! Somos-4 recurrences over the dual numbers.
//!
//! The crate covers the exact side (dual-rational iteration, symbolic
//! Laurent checks, shadow sequences, Hankel determinant formulae) and a
//! floating-point Weierstrass layer used to cross-check the analytic
//! sigma-function solution.

pub mod cli;
pub mod dualnum;
pub mod elliptic;
pub mod error;
pub mod hankel;
pub mod laurentpoly;
pub mod shadow;
pub mod somos;

pub use dualnum::{
    dual_inv, dual_mul, dual_parse, Dual, DualComplex, DualScalar, Rational, SmoothScalar,
};
pub use error::{Error, Result};
