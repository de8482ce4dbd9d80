//! Exact-diagonalization toolkit for ground-state fidelity diagnostics of
//! SU(2)-symmetric spin chains.
//!
//! The crate is organised bottom-up:
//!
//! * [`hilbert`] enumerates fixed-`Sz` sectors and applies two-site spin operators.
//! * [`models`] builds matrix-free Hamiltonians for the dimerized spin-1/2 chain,
//!   the mixed (1/2, S) dimer chain and the spin-1 bilinear-biquadratic chain.
//! * [`eig`] finds ground states (Lanczos or dense) and energy derivatives.
//! * [`observables`] extracts pair density matrices and correlators.
//! * [`fidelity`] turns them into fidelity susceptibilities along several routes.
//! * [`analytic`] holds closed-form references.
//! * [`sweep`] and [`output`] run parameter grids and write CSV or JSON.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod analytic;
pub mod eig;
pub mod error;
pub mod fidelity;
pub mod hilbert;
pub mod linalg;
pub mod models;
pub mod observables;
pub mod output;
pub mod sweep;

pub use error::{Error, Result};
pub use fidelity::Route;
pub use hilbert::{HalfInt, Spin};
pub use models::{ModelFamily, ModelSpec};
