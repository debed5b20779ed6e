//! Exterior algebra of `(p,q)`-forms with expression coefficients.
//!
//! Terms are stored in canonical generator order: ascending `dzeta_j`
//! followed by ascending `dzetabar_j`, with the permutation sign folded into
//! the coefficient. Hom-valued forms are dense matrices of forms together
//! with a parity, so that composing and applying them keeps the signs of
//! the graded (super) structure on `E ⊗ forms`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::symbolic::{partial, simplify, Atom, Expr, Point, SymbolicError, Var, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("ambient dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("expected a form of top bidegree ({0},{0})")]
    NotTopDegree(usize),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

#[derive(Clone, Debug)]
pub struct Term {
    pub coeff: Expr,
    pub holo: u64,
    pub anti: u64,
}

impl Term {
    pub fn degree(&self) -> u32 {
        self.holo.count_ones() + self.anti.count_ones()
    }

    pub fn bidegree(&self) -> (u32, u32) {
        (self.holo.count_ones(), self.anti.count_ones())
    }
}

/// Sign of concatenating two sorted generator sets into sorted order.
pub(crate) fn merge_sign(first: u64, second: u64) -> i32 {
    let mut inversions = 0;
    let mut rest = second;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        inversions += (first >> (j + 1)).count_ones();
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

#[derive(Clone, Debug)]
pub struct Form {
    dim: usize,
    terms: Vec<Term>,
}

impl Form {
    pub fn zero(dim: usize) -> Self {
        Form { dim, terms: Vec::new() }
    }

    pub fn scalar(dim: usize, e: Expr) -> Self {
        Form::from_terms(dim, vec![Term { coeff: e, holo: 0, anti: 0 }])
    }

    pub fn one(dim: usize) -> Self {
        Form::scalar(dim, Expr::one())
    }

    pub fn dzeta(dim: usize, j: usize) -> Self {
        assert!(j < dim);
        Form::from_terms(dim, vec![Term { coeff: Expr::one(), holo: 1 << j, anti: 0 }])
    }

    pub fn dzetabar(dim: usize, j: usize) -> Self {
        assert!(j < dim);
        Form::from_terms(dim, vec![Term { coeff: Expr::one(), holo: 0, anti: 1 << j }])
    }

    /// `sum_j coeffs[j] dzeta_j`.
    pub fn holo_one_form(dim: usize, coeffs: &[Expr]) -> Self {
        let terms = coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| Term { coeff: c.clone(), holo: 1 << j, anti: 0 })
            .collect();
        Form::from_terms(dim, terms)
    }

    /// `sum_j coeffs[j] dzetabar_j`.
    pub fn anti_one_form(dim: usize, coeffs: &[Expr]) -> Self {
        let terms = coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| Term { coeff: c.clone(), holo: 0, anti: 1 << j })
            .collect();
        Form::from_terms(dim, terms)
    }

    /// Canonicalizes: merges equal generator sets and drops zero coefficients.
    /// Generator sets must already be in canonical order (bitsets are).
    pub fn from_terms(dim: usize, terms: Vec<Term>) -> Self {
        let mut merged: BTreeMap<(u64, u64), Vec<Expr>> = BTreeMap::new();
        for t in terms {
            if t.coeff.is_zero() {
                continue;
            }
            merged.entry((t.holo, t.anti)).or_default().push(t.coeff);
        }
        let terms = merged
            .into_iter()
            .filter_map(|((holo, anti), cs)| {
                let coeff = Expr::sum(cs);
                (!coeff.is_zero()).then_some(Term { coeff, holo, anti })
            })
            .collect();
        Form { dim, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The same form regarded on `C^dim`, `dim >= self.dim()`, through the
    /// first coordinates.
    pub fn embed(&self, dim: usize) -> Form {
        assert!(dim >= self.dim);
        Form { dim, terms: self.terms.clone() }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the given generator sets (zero when absent).
    pub fn coeff(&self, holo: u64, anti: u64) -> Expr {
        self.terms
            .iter()
            .find(|t| t.holo == holo && t.anti == anti)
            .map(|t| t.coeff.clone())
            .unwrap_or_else(Expr::zero)
    }

    pub fn bidegrees(&self) -> Vec<(u32, u32)> {
        let mut b: Vec<(u32, u32)> = self.terms.iter().map(Term::bidegree).collect();
        b.sort_unstable();
        b.dedup();
        b
    }

    fn check_dim(&self, other: &Form) -> Result<(), FormError> {
        if self.dim != other.dim {
            return Err(FormError::DimensionMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    pub fn add(&self, other: &Form) -> Result<Form, FormError> {
        self.check_dim(other)?;
        let terms = self.terms.iter().chain(&other.terms).cloned().collect();
        Ok(Form::from_terms(self.dim, terms))
    }

    pub fn sub(&self, other: &Form) -> Result<Form, FormError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Form {
        self.scale(&Expr::real(-1.0))
    }

    /// Multiplies every coefficient by a 0-form.
    pub fn scale(&self, e: &Expr) -> Form {
        let terms = self
            .terms
            .iter()
            .map(|t| Term { coeff: e.mul(&t.coeff), ..t.clone() })
            .collect();
        Form::from_terms(self.dim, terms)
    }

    pub fn wedge(&self, other: &Form) -> Result<Form, FormError> {
        self.check_dim(other)?;
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                if a.holo & b.holo != 0 || a.anti & b.anti != 0 {
                    continue;
                }
                let mut sign = merge_sign(a.holo, b.holo) * merge_sign(a.anti, b.anti);
                if (a.anti.count_ones() * b.holo.count_ones()) % 2 == 1 {
                    sign = -sign;
                }
                let coeff = a.coeff.mul(&b.coeff);
                let coeff = if sign < 0 { coeff.neg() } else { coeff };
                terms.push(Term { coeff, holo: a.holo | b.holo, anti: a.anti | b.anti });
            }
        }
        Ok(Form::from_terms(self.dim, terms))
    }

    /// `self ∧ self ∧ ...` (`k` factors); `k = 0` gives 1.
    pub fn wedge_power(&self, k: usize) -> Form {
        let mut acc = Form::one(self.dim);
        for _ in 0..k {
            acc = acc.wedge(self).expect("same dimension");
        }
        acc
    }

    /// `dbar`: differentiates coefficients in each `conj(zeta_j)` and wedges
    /// `dzetabar_j` from the left. Parameters are constants.
    pub fn dbar(&self) -> Result<Form, FormError> {
        let mut terms = Vec::new();
        for t in &self.terms {
            for j in 0..self.dim {
                if t.anti & (1 << j) != 0 {
                    continue;
                }
                let d = partial(&t.coeff, Var::coord_bar(j))?;
                if d.is_zero() {
                    continue;
                }
                let mut sign = merge_sign(1 << j, t.anti);
                if t.holo.count_ones() % 2 == 1 {
                    sign = -sign;
                }
                let coeff = if sign < 0 { d.neg() } else { d };
                terms.push(Term { coeff, holo: t.holo, anti: t.anti | (1 << j) });
            }
        }
        Ok(Form::from_terms(self.dim, terms))
    }

    /// Contraction with the holomorphic vector field `sum_j w_j d/dzeta_j`;
    /// an antiderivation of degree -1.
    pub fn interior(&self, w: &[Expr]) -> Result<Form, FormError> {
        if w.len() != self.dim {
            return Err(FormError::DimensionMismatch(w.len(), self.dim));
        }
        let mut terms = Vec::new();
        for t in &self.terms {
            let mut rest = t.holo;
            while rest != 0 {
                let j = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let before = (t.holo & ((1u64 << j) - 1)).count_ones();
                let c = w[j].mul(&t.coeff);
                let coeff = if before % 2 == 1 { c.neg() } else { c };
                terms.push(Term { coeff, holo: t.holo & !(1 << j), anti: t.anti });
            }
        }
        Ok(Form::from_terms(self.dim, terms))
    }

    /// `nabla = delta_{zeta - base} - dbar`, where `delta` is contraction with
    /// `2 pi i sum_j (zeta_j - base_j) d/dzeta_j`.
    pub fn nabla(&self, base: &[Expr]) -> Result<Form, FormError> {
        let w = nabla_field(self.dim, base)?;
        self.interior(&w)?.sub(&self.dbar()?)
    }

    /// Exact projection onto bidegree `(p, q)`.
    pub fn component(&self, p: u32, q: u32) -> Form {
        let terms = self.terms.iter().filter(|t| t.bidegree() == (p, q)).cloned().collect();
        Form { dim: self.dim, terms }
    }

    /// Components of total degree `d`.
    pub fn degree_part(&self, d: u32) -> Form {
        let terms = self.terms.iter().filter(|t| t.degree() == d).cloned().collect();
        Form { dim: self.dim, terms }
    }

    /// Multiplies terms of odd degree by -1 when `odd` is set (the grade
    /// involution used to move odd operators past forms).
    pub fn twist(&self, odd: bool) -> Form {
        if !odd {
            return self.clone();
        }
        let terms = self
            .terms
            .iter()
            .map(|t| {
                if t.degree() % 2 == 1 {
                    Term { coeff: t.coeff.neg(), ..t.clone() }
                } else {
                    t.clone()
                }
            })
            .collect();
        Form { dim: self.dim, terms }
    }

    pub fn map_coeffs<F: Fn(&Expr) -> Expr>(&self, f: F) -> Form {
        let terms = self.terms.iter().map(|t| Term { coeff: f(&t.coeff), ..t.clone() }).collect();
        Form::from_terms(self.dim, terms)
    }

    pub fn simplify(&self) -> Form {
        self.map_coeffs(simplify)
    }

    /// Lebesgue density of a top-degree form: with `dzeta_j ∧ dzetabar_j =
    /// -2i dx_j ∧ dy_j` and orientation `dx_1 dy_1 ... dx_N dy_N`.
    pub fn top_density(&self) -> Result<Expr, FormError> {
        let n = self.dim;
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let mut coeff = Expr::zero();
        for t in &self.terms {
            if t.holo != full || t.anti != full {
                return Err(FormError::NotTopDegree(n));
            }
            coeff = t.coeff.clone();
        }
        Ok(coeff.scale(top_factor(n)))
    }

    /// Evaluates every coefficient.
    pub fn eval(&self, p: &Point<'_>) -> Result<Vec<((u64, u64), C64)>, SymbolicError> {
        self.terms
            .iter()
            .map(|t| Ok(((t.holo, t.anti), t.coeff.eval(p)?)))
            .collect()
    }

    /// Largest coefficient modulus at `p` (0 for the zero form).
    pub fn max_abs(&self, p: &Point<'_>) -> Result<f64, SymbolicError> {
        Ok(self.eval(p)?.into_iter().map(|(_, v)| v.norm()).fold(0.0, f64::max))
    }

    /// Largest modulus among coefficients of positive degree.
    pub fn max_abs_positive_degree(&self, p: &Point<'_>) -> Result<f64, SymbolicError> {
        let mut m: f64 = 0.0;
        for t in &self.terms {
            if t.degree() > 0 {
                m = m.max(t.coeff.eval(p)?.norm());
            }
        }
        Ok(m)
    }
}

/// Surface density of an `(N, N-1)`-form on the sphere `|zeta - center| = r`:
/// `int_S alpha = int_S density(dr ∧ alpha) dsigma` with the outward normal.
pub fn sphere_flux_density(alpha: &Form, center: &[Expr]) -> Result<Expr, FormError> {
    let n = alpha.dim();
    if center.len() != n {
        return Err(FormError::DimensionMismatch(center.len(), n));
    }
    let diff: Vec<Expr> = (0..n).map(|j| Expr::coord(j).sub(&center[j])).collect();
    let r2 = Expr::sum(diff.iter().map(Expr::abs2));
    let inv_2r = Expr::apply(Atom::Power { coeff: 0.5, exponent: -0.5 }, r2);
    let dr = Form::holo_one_form(n, &diff.iter().map(|d| d.conj().mul(&inv_2r)).collect::<Vec<_>>())
        .add(&Form::anti_one_form(n, &diff.iter().map(|d| d.mul(&inv_2r)).collect::<Vec<_>>()))?;
    dr.wedge(&alpha.component(n as u32, n as u32 - 1))?.top_density()
}

/// `(-1)^{N(N-1)/2} (-2i)^N`: converts the canonical top coefficient to a
/// Lebesgue density.
pub fn top_factor(n: usize) -> C64 {
    let mut f = C64::new(1.0, 0.0);
    for _ in 0..n {
        f *= C64::new(0.0, -2.0);
    }
    if (n * (n.saturating_sub(1)) / 2) % 2 == 1 {
        f = -f;
    }
    f
}

/// The contraction field `2 pi i (zeta_j - base_j)`.
pub fn nabla_field(dim: usize, base: &[Expr]) -> Result<Vec<Expr>, FormError> {
    if base.len() != dim {
        return Err(FormError::DimensionMismatch(base.len(), dim));
    }
    Ok((0..dim).map(|j| Expr::two_pi_i().mul(&Expr::coord(j).sub(&base[j]))).collect())
}

/// Parity of a Hom-valued form as an operator on `E ⊗ forms`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    pub fn plus(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// `Hom(E, F)`-valued form: column `j` holds the image of basis vector `e_j`,
/// written form-first as `sum_i M[i][j] ∧ f_i`.
#[derive(Clone, Debug)]
pub struct HomForm {
    rows: usize,
    cols: usize,
    dim: usize,
    parity: Parity,
    entries: Vec<Form>,
}

impl HomForm {
    pub fn zero(rows: usize, cols: usize, dim: usize, parity: Parity) -> Self {
        HomForm { rows, cols, dim, parity, entries: vec![Form::zero(dim); rows * cols] }
    }

    pub fn identity(rank: usize, dim: usize) -> Self {
        let mut m = HomForm::zero(rank, rank, dim, Parity::Even);
        for i in 0..rank {
            m.set(i, i, Form::one(dim));
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Form>(
        rows: usize,
        cols: usize,
        dim: usize,
        parity: Parity,
        mut f: F,
    ) -> Self {
        let mut m = HomForm::zero(rows, cols, dim, parity);
        for i in 0..rows {
            for j in 0..cols {
                let e = f(i, j);
                assert_eq!(e.dim(), dim);
                m.entries[i * cols + j] = e;
            }
        }
        m
    }

    /// A column vector of forms (a section of `F`), treated as a map from the
    /// trivial rank-one bundle.
    pub fn column(entries: Vec<Form>, dim: usize) -> Self {
        let rows = entries.len();
        HomForm { rows, cols: 1, dim, parity: Parity::Even, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn get(&self, i: usize, j: usize) -> &Form {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, f: Form) {
        self.entries[i * self.cols + j] = f;
    }

    /// See [`Form::embed`].
    pub fn embed(&self, dim: usize) -> HomForm {
        HomForm { dim, entries: self.entries.iter().map(|f| f.embed(dim)).collect(), ..self.clone() }
    }

    pub fn entries(&self) -> &[Form] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Form::is_zero)
    }

    /// Operator composition `self ∘ other`.
    pub fn compose(&self, other: &HomForm) -> Result<HomForm, FormError> {
        if self.cols != other.rows || self.dim != other.dim {
            return Err(FormError::Shape(format!(
                "cannot compose {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let odd = self.parity.is_odd();
        let mut out = HomForm::zero(self.rows, other.cols, self.dim, self.parity.plus(other.parity));
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Form::zero(self.dim);
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    let b = other.get(k, j);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = acc.add(&b.twist(odd).wedge(a)?)?;
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &HomForm) -> Result<HomForm, FormError> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(FormError::Shape("sum of differently shaped maps".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(HomForm { entries, ..self.clone() })
    }

    pub fn sub(&self, other: &HomForm) -> Result<HomForm, FormError> {
        self.add(&other.map(Form::neg))
    }

    pub fn scale(&self, e: &Expr) -> HomForm {
        self.map(|f| f.scale(e))
    }

    pub fn map<F: Fn(&Form) -> Form>(&self, f: F) -> HomForm {
        HomForm { entries: self.entries.iter().map(f).collect(), ..self.clone() }
    }

    pub fn try_map<F: Fn(&Form) -> Result<Form, FormError>>(
        &self,
        f: F,
    ) -> Result<HomForm, FormError> {
        let entries = self.entries.iter().map(f).collect::<Result<Vec<_>, _>>()?;
        Ok(HomForm { entries, ..self.clone() })
    }

    /// Entrywise `nabla`; for maps between holomorphic frames this is the
    /// graded commutator with `nabla`.
    pub fn nabla(&self, base: &[Expr]) -> Result<HomForm, FormError> {
        self.try_map(|f| f.nabla(base))
    }

    /// Wedge every entry on the right with an even scalar form.
    pub fn wedge_even(&self, g: &Form) -> Result<HomForm, FormError> {
        self.try_map(|f| f.wedge(g))
    }

    pub fn with_parity(mut self, parity: Parity) -> HomForm {
        self.parity = parity;
        self
    }

    /// Largest coefficient modulus over all entries.
    pub fn max_abs(&self, p: &Point<'_>) -> Result<f64, SymbolicError> {
        self.entries.iter().try_fold(0.0f64, |m, f| Ok(m.max(f.max_abs(p)?)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::C64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn at<'a>(coords: &'a [C64], params: &'a [C64]) -> Point<'a> {
        Point::new(coords, params)
    }

    #[test]
    fn repeated_generator_vanishes() {
        let d1 = Form::dzeta(2, 0);
        assert!(d1.wedge(&d1).unwrap().is_zero());
    }

    #[test]
    fn holo_and_anti_generators_anticommute() {
        let a = Form::dzeta(1, 0).wedge(&Form::dzetabar(1, 0)).unwrap();
        let b = Form::dzetabar(1, 0).wedge(&Form::dzeta(1, 0)).unwrap();
        let cs = [c(0.1, 0.2)];
        let pt = at(&cs, &[]);
        assert_eq!(a.eval(&pt).unwrap(), vec![((1, 1), c(1.0, 0.0))]);
        assert_eq!(b.eval(&pt).unwrap(), vec![((1, 1), c(-1.0, 0.0))]);
    }

    #[test]
    fn bilinear_expansion() {
        let (d1, d2) = (Form::dzeta(2, 0), Form::dzeta(2, 1));
        let w = d1.add(&d2).unwrap().wedge(&d1.sub(&d2).unwrap()).unwrap();
        let cs = [c(0.0, 0.0), c(0.0, 0.0)];
        let pt = at(&cs, &[]);
        assert_eq!(w.eval(&pt).unwrap(), vec![((0b11, 0), c(-2.0, 0.0))]);
    }

    #[test]
    fn dbar_examples() {
        let z = Form::scalar(2, Expr::coord(0)).wedge(&Form::dzeta(2, 1)).unwrap();
        assert!(z.dbar().unwrap().is_zero());
        let zb = Form::scalar(1, Expr::coord_bar(0)).dbar().unwrap();
        let cs = [c(0.3, 0.0)];
        assert_eq!(zb.eval(&at(&cs, &[])).unwrap(), vec![((0, 1), c(1.0, 0.0))]);
        let inv = Form::scalar(1, Expr::coord(0).abs2().recip()).dbar().unwrap();
        let p = c(0.4, -0.7);
        let cs = [p];
        let v = inv.eval(&at(&cs, &[])).unwrap();
        let expected = -p / p.norm_sqr().powi(2);
        assert_eq!(v.len(), 1);
        assert!((v[0].1 - expected).norm() < 1e-12 * expected.norm());
    }

    #[test]
    fn interior_is_an_antiderivation() {
        let a = [Expr::coord(0), Expr::coord(1).scale(c(2.0, 0.0))];
        let top = Form::dzeta(2, 0).wedge(&Form::dzeta(2, 1)).unwrap();
        let got = top.interior(&a).unwrap();
        let expected = Form::dzeta(2, 1).scale(&a[0]).sub(&Form::dzeta(2, 0).scale(&a[1])).unwrap();
        let cs = [c(0.5, 0.1), c(-0.2, 0.3)];
        let pt = at(&cs, &[]);
        let diff = got.sub(&expected).unwrap().max_abs(&pt).unwrap();
        assert!(diff < 1e-15);
        assert!(Form::one(2).interior(&a).unwrap().is_zero());
    }

    #[test]
    fn nabla_of_constant_vanishes() {
        assert!(Form::one(2).nabla(&[Expr::param(0), Expr::param(1)]).unwrap().is_zero());
    }

    #[test]
    fn component_extraction() {
        let f = Form::one(1)
            .add(&Form::dzetabar(1, 0).wedge(&Form::dzeta(1, 0)).unwrap())
            .unwrap();
        let cs = [c(0.0, 0.0)];
        let pt = at(&cs, &[]);
        assert_eq!(f.component(0, 0).eval(&pt).unwrap(), vec![((0, 0), c(1.0, 0.0))]);
        assert_eq!(f.component(1, 1).eval(&pt).unwrap(), vec![((1, 1), c(-1.0, 0.0))]);
        assert!(f.component(2, 1).is_zero());
    }

    #[test]
    fn top_density_conventions() {
        let area = Form::dzeta(1, 0).wedge(&Form::dzetabar(1, 0)).unwrap();
        let cs = [c(0.0, 0.0), c(0.0, 0.0)];
        let pt = at(&cs, &[]);
        assert_eq!(area.top_density().unwrap().eval(&pt).unwrap(), c(0.0, -2.0));
        let normalized = area.scale(&Expr::constant(c(0.0, 0.5)));
        assert_eq!(normalized.top_density().unwrap().eval(&pt).unwrap(), c(1.0, 0.0));
        let reordered = Form::dzetabar(2, 0)
            .wedge(&Form::dzeta(2, 0))
            .unwrap()
            .wedge(&Form::dzeta(2, 1))
            .unwrap()
            .wedge(&Form::dzetabar(2, 1))
            .unwrap();
        assert_eq!(reordered.top_density().unwrap().eval(&pt).unwrap(), c(4.0, 0.0));
        assert!(Form::dzeta(1, 0).top_density().is_err());
    }

    fn random_form(rng: &mut ChaCha8Rng, dim: usize) -> Form {
        let mut terms = Vec::new();
        let atoms = [
            Expr::coord(0),
            Expr::coord_bar(0),
            Expr::coord(dim - 1).abs2(),
            Expr::apply(Atom::cutoff(0.1, 2.0), Expr::coord(0).abs2()),
            (Expr::coord(0) - Expr::param(0)).abs2().add(&Expr::real(1.0)).recip(),
        ];
        for _ in 0..4 {
            let holo = rng.gen_range(0..(1u64 << dim));
            let anti = rng.gen_range(0..(1u64 << dim));
            let a = &atoms[rng.gen_range(0..atoms.len())];
            let b = &atoms[rng.gen_range(0..atoms.len())];
            let k = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            terms.push(Term { coeff: a.mul(b).scale(k), holo, anti });
        }
        Form::from_terms(dim, terms)
    }

    fn random_point(rng: &mut ChaCha8Rng, dim: usize) -> (Vec<C64>, Vec<C64>) {
        let coords = (0..dim).map(|_| c(rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9))).collect();
        let params = (0..dim).map(|_| c(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3))).collect();
        (coords, params)
    }

    fn homogeneous(f: &Form) -> Vec<Form> {
        (0..=2 * f.dim() as u32).map(|d| f.degree_part(d)).filter(|p| !p.is_zero()).collect()
    }

    #[test]
    fn graded_identities_on_random_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let dim = 2;
        let base = [Expr::param(0), Expr::param(1)];
        let w: Vec<Expr> = nabla_field(dim, &base).unwrap();
        for _ in 0..20 {
            let a = random_form(&mut rng, dim);
            let b = random_form(&mut rng, dim);
            let (cs, ps) = random_point(&mut rng, dim);
            let pt = at(&cs, &ps);
            for ha in homogeneous(&a) {
                for hb in homogeneous(&b) {
                    let da = ha.terms()[0].degree();
                    let db = hb.terms()[0].degree();
                    let ab = ha.wedge(&hb).unwrap();
                    let ba = hb.wedge(&ha).unwrap();
                    let signed = if (da * db) % 2 == 1 { ba.neg() } else { ba };
                    assert!(ab.sub(&signed).unwrap().max_abs(&pt).unwrap() < 1e-12);
                    // Leibniz for nabla
                    let lhs = ab.nabla(&base).unwrap();
                    let t1 = ha.nabla(&base).unwrap().wedge(&hb).unwrap();
                    let t2 = ha.wedge(&hb.nabla(&base).unwrap()).unwrap();
                    let t2 = if da % 2 == 1 { t2.neg() } else { t2 };
                    let rhs = t1.add(&t2).unwrap();
                    let scale = lhs.max_abs(&pt).unwrap().max(1.0);
                    assert!(lhs.sub(&rhs).unwrap().max_abs(&pt).unwrap() <= 1e-9 * scale);
                }
            }
            assert!(a.dbar().unwrap().dbar().unwrap().max_abs(&pt).unwrap() < 1e-10);
            assert!(a.interior(&w).unwrap().interior(&w).unwrap().max_abs(&pt).unwrap() < 1e-10);
        }
    }

    #[test]
    fn composition_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let dim = 2;
        let mk = |rng: &mut ChaCha8Rng, r, c, parity| {
            HomForm::from_fn(r, c, dim, parity, |_, _| random_form(rng, dim))
        };
        let a = mk(&mut rng, 2, 3, Parity::Odd);
        let b = mk(&mut rng, 3, 2, Parity::Even);
        let cc = mk(&mut rng, 2, 1, Parity::Odd);
        let left = a.compose(&b).unwrap().compose(&cc).unwrap();
        let right = a.compose(&b.compose(&cc).unwrap()).unwrap();
        let (cs, ps) = random_point(&mut rng, dim);
        let pt = at(&cs, &ps);
        let diff = left.sub(&right).unwrap().max_abs(&pt).unwrap();
        assert!(diff <= 1e-12 * left.max_abs(&pt).unwrap().max(1.0));
        assert!(a.compose(&a).is_err());
    }
}
