//! Koszul complexes, the minimal section `sigma`, the forms `U` and the
//! regularized residue currents `R`.

mod complex;
mod currents;
mod pairing;

use thiserror::Error;

use crate::forms::FormError;
use crate::quadrature::QuadError;
use crate::symbolic::SymbolicError;

pub use complex::{koszul_complex, subsets, ComplexSpec};
pub use currents::{
    koszul_residue, norm2, power_residue_shape, r_form, r_operator, sigma, u_form, u_operator, ExtElem,
    RegularizedCurrent,
};
pub use pairing::{residue_pairing, PairingReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KoszulError {
    #[error("no generators")]
    Empty,
    #[error("generators must be holomorphic")]
    NotHolomorphic,
    #[error("residue shape needs a single monomial")]
    NotMonomial,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}
