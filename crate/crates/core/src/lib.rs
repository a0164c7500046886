//! Divergence-free neural operators for periodic finite-strain
//! micromechanics.
//!
//! The crate covers per-mode tensor algebra ([`tensor_core`]), spectral
//! grids ([`spectral_grid`]), random Voronoi microstructures
//! ([`microstructure`]), a spectral equilibrium solver ([`solver`]), the
//! Fourier neural operator with three output variants ([`fno`]), the data
//! and training pipeline ([`training`]) and an algebraic consistency audit
//! ([`appendix`]).

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod appendix;
pub mod error;
pub mod exec;
pub mod fno;
pub mod microstructure;
pub mod normalization;
pub mod solver;
pub mod spectral_grid;
pub mod tensor_core;
pub mod training;

pub use error::{Error, Result};
pub use exec::Exec;
