//! Verification workbench for quantum nonlocality.
//!
//! The crate is organised around five layers:
//!
//! * [`qstate`]: dense complex state vectors over labelled tensor-product
//!   spaces, the measurement interaction and the Born-rule joint probability.
//! * [`behavior`]: conditional probability tables `P(A,B|a,b)`, finite
//!   hidden-variable ensembles and the Monte Carlo sign model.
//! * [`causality`]: no-signalling, parameter independence, outcome
//!   independence, factorizability and the reduction of perfectly
//!   anticorrelated factorizable models to determinism.
//! * [`inequalities`]: CHSH and the three-setting anticorrelation inequality,
//!   the classical bound by enumeration and the quantum maximum by search.
//! * [`everett`] and [`spacetime`]: branch-by-branch unitary simulation of
//!   EPR-Bohm experiments and the light-cone geometry they must respect.
//!
//! Heavy inner loops (Monte Carlo sampling, CHSH grid search, per-λ checks)
//! run on rayon when the `parallel` feature is enabled (the default) and fall
//! back to plain iterators otherwise. Results are bitwise identical either way.

pub mod behavior;
pub mod causality;
pub mod document;
mod error;
pub mod everett;
pub mod inequalities;
mod par;
pub mod qstate;
pub mod spacetime;

pub use error::{Error, Result};

/// Tolerance for exact algebraic identities.
pub const ALGEBRAIC_TOL: f64 = 1e-12;

/// Tolerance for quantities produced by numerical optimisation.
pub const OPTIMIZATION_TOL: f64 = 1e-9;
