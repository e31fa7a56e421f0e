//! Exact-arithmetic engine for wall-crossing of one-dimensional sheaf and
//! pair invariants, and for the rationality of their generating functions.
//!
//! The crate is `no_std` and only needs `alloc`. Modules, bottom-up:
//!
//! - [`classlat`]: curve classes on a coordinate-cone lattice model.
//! - [`stability`]: slope functions and pair stability.
//! - [`wallcoeffs`]: the combinatorial coefficients S, U and their Lie rewriting.
//! - [`vertexmodel`]: a toy graded vertex algebra with D/R operator calculus.
//! - [`quasipoly`]: quasi-polynomials, chambers, lattice sums, difference solvers.
//! - [`ratgen`]: rational generating functions with exact pole analysis.
//! - [`wallcross`]: the recursion engine and the end-to-end series pipeline.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod classlat;
pub mod error;
pub mod quasipoly;
pub mod rat;
pub mod ratgen;
pub mod stability;
pub mod vertexmodel;
pub mod wallcoeffs;
pub mod wallcross;

pub use error::{Error, Result};
pub use rat::Q;
