//! Weighted integral representations in several complex variables.
//!
//! The crate builds the kernels, weights, Hefer forms and Koszul residue
//! currents that make up division-interpolation formulas, evaluates them
//! with deterministic quadrature, and uses them to solve division problems
//! and to decide membership in smooth monomial ideals.

pub mod symbolic;
pub mod forms;
pub mod kernels;
pub mod poly;
pub mod koszul;
pub mod hefer;
pub mod membership;
pub mod quadrature;
pub mod division;
pub mod extension;
pub mod extrapolate;
