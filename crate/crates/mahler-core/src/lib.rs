//! Exact computer-algebra kernels for p-Mahler functional equations at the origin.
//!
//! A p-Mahler equation relates `f(z), f(z^p), ..., f(z^{p^d})` with ramified
//! rational coefficients. This crate provides the machinery to
//!
//! - reduce Mahler systems to constant coefficients through a three-step gauge
//!   pipeline (slope factorization, regular-singular normalization, Sylvester
//!   solves in a filtered algebra of special Hahn series),
//! - produce truncated bases of generalized p-Mahler series solutions, i.e.
//!   finite sums `sum f_{c,j,w} xi_w e_c l^j` with Puiseux coefficients,
//! - classify the arithmetic growth of solution coefficients by logarithmic
//!   Weil height (five regimes, with root-of-unity certification of Mahler
//!   denominators).
//!
//! Everything is exact: rationals are arbitrary precision, algebraic numbers
//! live in a single explicit number-field extension, and series carry explicit
//! precision bounds that are never silently exceeded.
//!
//! The crate is `no_std` (with `alloc`); IO, parsing and the CLI live in the
//! companion crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod scalar;
pub mod poly;
pub mod heights;
pub mod matrix;
pub mod dunford;
pub mod series;
pub mod ratfun;
pub mod operators;
pub mod factorization;
pub mod guessing;
pub mod xi;
pub mod reduction;
pub mod growth;
pub mod examples;

pub use error::CoreError;
pub use scalar::{NumberField, Scalar, Q};
pub use series::{Prec, TruncatedPuiseux};
pub use xi::{GeneralizedSeries, TruncatedHahn, Window, XiExpr, XiIndex};
pub use operators::{MahlerOperator, MahlerSystem, NewtonData};
pub use ratfun::RatFun;
pub use reduction::ReductionResult;
pub use growth::{DenominatorReport, GrowthClass, GrowthLabel};




