use crate::extrapolate::{extrapolate, Extrapolation, ExtrapolationError};
use crate::forms::Form;
use crate::quadrature::{integrate, Domain, Rule, TapeIntegrand};
use crate::symbolic::C64;

use super::{KoszulError, RegularizedCurrent};

#[derive(Clone, Debug)]
pub struct PairingReport {
    pub ladder: Vec<f64>,
    pub values: Vec<C64>,
    /// Quadrature error estimate at each rung.
    pub quadrature_errors: Vec<f64>,
    pub fit: Result<Extrapolation, ExtrapolationError>,
    pub evaluations: usize,
}

impl PairingReport {
    /// Extrapolated limit, or the non-convergence error.
    pub fn limit(&self) -> Result<C64, ExtrapolationError> {
        self.fit.as_ref().map(|f| f.limit).map_err(Clone::clone)
    }
}

/// `<R, test> = int R_eps ∧ test` along the ladder, extrapolated to `eps -> 0`.
/// `test` must have complementary bidegree (the product must be top degree).
pub fn residue_pairing(
    current: &RegularizedCurrent,
    test: &Form,
    domain: &Domain,
    rule: &Rule,
    ladder: &[f64],
) -> Result<PairingReport, KoszulError> {
    let mut values = Vec::with_capacity(ladder.len());
    let mut quadrature_errors = Vec::with_capacity(ladder.len());
    let mut evaluations = 0;
    for &eps in ladder {
        let r = current.at(eps)?;
        let density = r.wedge(test)?.top_density()?;
        let f = TapeIntegrand::new(&[density], Vec::new());
        let v = integrate(&f, domain, rule)?;
        values.push(v.value());
        quadrature_errors.push(v.error());
        evaluations += v.evaluations;
    }
    let fit = extrapolate(ladder, &values);
    Ok(PairingReport { ladder: ladder.to_vec(), values, quadrature_errors, fit, evaluations })
}
