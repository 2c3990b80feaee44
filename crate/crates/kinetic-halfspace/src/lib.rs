//! Linearized Boltzmann operators for cutoff soft potentials, half-space
//! Knudsen layers with specular reflection, a planar Euler solver and
//! Hilbert-expansion residual diagnostics on a Cartesian velocity lattice.

pub mod collision;
pub mod config;
pub mod criteria;
pub mod error;
pub mod euler;
pub mod expansion;
pub mod grid;
pub mod interp;
pub mod knudsen;
pub mod krylov;
pub mod macro_micro;
pub mod quadrature;
pub mod run;
pub mod state;
pub mod symmetry;

pub use error::{Error, Result};
