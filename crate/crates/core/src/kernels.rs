//! Bochner–Martinelli kernels and weights.
//!
//! Everything here is built symbolically around a base point given as a
//! vector of expressions: `[z_1, .., z_n]` for the holomorphic setting or
//! `[z_1, .., z_n, conj(z_1), .., conj(z_n)]` for the doubled space, where
//! coordinate `n + j` plays the role of `omega_j`.

use thiserror::Error;

use crate::forms::{Form, FormError};
use crate::symbolic::{Atom, Expr};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("weight radii must satisfy 0 < inner < outer <= radius, got {inner}, {outer}, {radius}")]
    ParameterOrder { inner: f64, outer: f64, radius: f64 },
    #[error("weights are bound to different base points")]
    BindingMismatch,
    #[error(transparent)]
    Form(#[from] FormError),
}

/// Holomorphic base point `z` in `C^n`.
pub fn holomorphic_base(n: usize) -> Vec<Expr> {
    (0..n).map(Expr::param).collect()
}

/// Base point `(z, conj(z))` in the doubled space `C^{2n}`.
pub fn doubled_base(n: usize) -> Vec<Expr> {
    (0..n).map(Expr::param).chain((0..n).map(Expr::param_bar)).collect()
}

/// `|zeta - base|^2`.
pub fn distance2(base: &[Expr]) -> Expr {
    Expr::sum(base.iter().enumerate().map(|(j, w)| (Expr::coord(j) - w.clone()).abs2()))
}

/// `b = (1/2 pi i) sum_j conj(zeta_j - base_j) dzeta_j / |zeta - base|^2`.
pub fn bm_b(base: &[Expr]) -> Form {
    let inv = distance2(base).recip().mul(&Expr::inv_two_pi_i());
    let coeffs: Vec<Expr> = base
        .iter()
        .enumerate()
        .map(|(j, w)| (Expr::coord_bar(j) - w.conj()).mul(&inv))
        .collect();
    Form::holo_one_form(base.len(), &coeffs)
}

/// Full Bochner–Martinelli form `b + b ∧ dbar b + ... + b ∧ (dbar b)^{N-1}`.
pub fn bm_full(base: &[Expr]) -> Result<Form, KernelError> {
    let b = bm_b(base);
    Ok(geometric_series(&b)?)
}

/// Bochner–Martinelli form of the doubled space at `(z, conj(z))`.
pub fn doubled_bm(n: usize) -> Result<Form, KernelError> {
    bm_full(&doubled_base(n))
}

/// `s ∧ (1 + dbar s + (dbar s)^2 + ...)`, truncated by degree.
fn geometric_series(s: &Form) -> Result<Form, FormError> {
    let ds = s.dbar()?;
    let mut acc = Form::zero(s.dim());
    let mut term = s.clone();
    for _ in 0..s.dim() {
        if term.is_zero() {
            break;
        }
        acc = acc.add(&term)?;
        term = term.wedge(&ds)?;
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightKind {
    /// `chi - dbar chi ∧ u` for the ball of the given radius, with `chi`
    /// equal to 1 on `|zeta| <= inner` and 0 on `|zeta| >= outer`.
    Ball { radius: f64, inner: f64, outer: f64 },
    Product(Vec<WeightSpec>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightSpec {
    pub kind: WeightKind,
}

impl WeightSpec {
    pub fn ball(radius: f64) -> Self {
        WeightSpec { kind: WeightKind::Ball { radius, inner: 0.7 * radius, outer: 0.95 * radius } }
    }

    pub fn ball_with_radii(radius: f64, inner: f64, outer: f64) -> Self {
        WeightSpec { kind: WeightKind::Ball { radius, inner, outer } }
    }

    /// Radius of the ball on which the cutoff is identically 1.
    pub fn inner_radius(&self) -> f64 {
        match &self.kind {
            WeightKind::Ball { inner, .. } => *inner,
            WeightKind::Product(ws) => ws.iter().map(WeightSpec::inner_radius).fold(f64::INFINITY, f64::min),
        }
    }

    /// Outer radius of the support.
    pub fn support_radius(&self) -> f64 {
        match &self.kind {
            WeightKind::Ball { outer, .. } => *outer,
            WeightKind::Product(ws) => {
                ws.iter().map(WeightSpec::support_radius).fold(f64::INFINITY, f64::min)
            }
        }
    }

    pub fn build(&self, base: &[Expr]) -> Result<Weight, KernelError> {
        match &self.kind {
            WeightKind::Ball { radius, inner, outer } => ball_weight(*radius, *inner, *outer, base),
            WeightKind::Product(ws) => {
                let mut acc = Weight { form: Form::one(base.len()), base: base.to_vec() };
                for w in ws {
                    acc = weight_product(&acc, &w.build(base)?)?;
                }
                Ok(acc)
            }
        }
    }
}

/// A weight together with the base point it is bound to.
#[derive(Clone, Debug)]
pub struct Weight {
    pub form: Form,
    pub base: Vec<Expr>,
}

/// `s = (1/2 pi i) sum_j conj(zeta_j) dzeta_j / (|zeta|^2 - sum_j base_j conj(zeta_j))`
/// so that contraction with `2 pi i (zeta - base)` gives 1.
pub fn ball_section(base: &[Expr]) -> Form {
    let n = base.len();
    let denom = Expr::sum((0..n).map(|j| {
        Expr::coord_bar(j).mul(&(Expr::coord(j) - base[j].clone()))
    }));
    let inv = denom.recip().mul(&Expr::inv_two_pi_i());
    let coeffs: Vec<Expr> = (0..n).map(|j| Expr::coord_bar(j).mul(&inv)).collect();
    Form::holo_one_form(n, &coeffs)
}

/// Cutoff `chi(|zeta|^2)` equal to 1 for `|zeta| <= inner`, 0 for `|zeta| >= outer`.
pub fn radial_cutoff(n: usize, inner: f64, outer: f64) -> Expr {
    let r2 = Expr::sum((0..n).map(|j| Expr::coord(j).abs2()));
    Expr::apply(Atom::cutoff(inner * inner, outer * outer), r2)
}

/// Weight `g = chi - dbar chi ∧ u` with `u = s ∧ sum_k (dbar s)^k` for the
/// ball of radius `radius`.
pub fn ball_weight(radius: f64, inner: f64, outer: f64, base: &[Expr]) -> Result<Weight, KernelError> {
    if !(inner > 0.0 && inner < outer && outer <= radius) {
        return Err(KernelError::ParameterOrder { inner, outer, radius });
    }
    let n = base.len();
    let chi = Form::scalar(n, radial_cutoff(n, inner, outer));
    let u = geometric_series(&ball_section(base))?;
    let form = chi.sub(&chi.dbar()?.wedge(&u)?)?;
    Ok(Weight { form, base: base.to_vec() })
}

pub fn weight_product(g1: &Weight, g2: &Weight) -> Result<Weight, KernelError> {
    if g1.base != g2.base {
        return Err(KernelError::BindingMismatch);
    }
    Ok(Weight { form: g1.form.wedge(&g2.form)?, base: g1.base.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{Point, SymbolicError, C64};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_c(rng: &mut ChaCha8Rng, r: f64) -> C64 {
        C64::new(rng.gen_range(-r..r), rng.gen_range(-r..r))
    }

    fn check_nabla_is_one(f: &Form, base: &[Expr], pt: &Point<'_>, tol: f64) {
        let nf = f.nabla(base).unwrap();
        let scalar = nf.coeff(0, 0).eval(pt).unwrap();
        assert!((scalar - 1.0).norm() <= tol, "scalar part {scalar}");
        let rest = nf.max_abs_positive_degree(pt).unwrap();
        assert!(rest <= tol, "positive degree residual {rest}");
    }

    #[test]
    fn one_variable_b_is_cauchy() {
        let b = bm_b(&holomorphic_base(1));
        let (zeta, z) = (C64::new(0.3, -0.4), C64::new(-0.1, 0.2));
        let (cs, ps) = ([zeta], [z]);
        let v = b.coeff(1, 0).eval(&Point::new(&cs, &ps)).unwrap();
        let expected = 1.0 / (C64::new(0.0, 2.0 * std::f64::consts::PI) * (zeta - z));
        assert!((v - expected).norm() < 1e-14);
        assert_eq!(bm_full(&holomorphic_base(1)).unwrap().bidegrees(), vec![(1, 0)]);
    }

    #[test]
    fn b_contracts_to_one_and_fails_at_pole() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=3 {
            let base = holomorphic_base(n);
            let b = bm_b(&base);
            let w = crate::forms::nabla_field(n, &base).unwrap();
            let ib = b.interior(&w).unwrap();
            for _ in 0..10 {
                let cs: Vec<C64> = (0..n).map(|_| rand_c(&mut rng, 1.0)).collect();
                let ps: Vec<C64> = (0..n).map(|_| rand_c(&mut rng, 1.0)).collect();
                let v = ib.coeff(0, 0).eval(&Point::new(&cs, &ps)).unwrap();
                assert!((v - 1.0).norm() < 1e-12);
            }
            let same: Vec<C64> = (0..n).map(|_| rand_c(&mut rng, 1.0)).collect();
            let err = b.eval(&Point::new(&same, &same)).unwrap_err();
            assert!(matches!(err, SymbolicError::DivisionByZero { .. }));
        }
    }

    #[test]
    fn full_bm_bidegrees_and_nabla() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 1..=3 {
            let base = holomorphic_base(n);
            let v = bm_full(&base).unwrap();
            let expected: Vec<(u32, u32)> = (0..n as u32).map(|k| (k + 1, k)).collect();
            assert_eq!(v.bidegrees(), expected);
            for _ in 0..5 {
                let cs: Vec<C64> = (0..n).map(|_| rand_c(&mut rng, 1.0)).collect();
                let ps: Vec<C64> = (0..n).map(|_| rand_c(&mut rng, 1.0)).collect();
                check_nabla_is_one(&v, &base, &Point::new(&cs, &ps), 1e-9);
            }
        }
    }

    #[test]
    fn doubled_bm_matches_contracts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = doubled_bm(1).unwrap();
        assert_eq!(v.bidegrees(), vec![(1, 0), (2, 1)]);
        let base = doubled_base(1);
        for _ in 0..10 {
            let cs = [rand_c(&mut rng, 1.0), rand_c(&mut rng, 1.0)];
            let ps = [rand_c(&mut rng, 0.5)];
            check_nabla_is_one(&v, &base, &Point::new(&cs, &ps), 1e-9);
        }
        let z = C64::new(0.2, 0.1);
        let (cs, ps) = ([z, z.conj()], [z]);
        assert!(v.eval(&Point::new(&cs, &ps)).is_err());
    }

    #[test]
    fn ball_weight_contracts() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 1..=2 {
            let base = holomorphic_base(n);
            let g = ball_weight(1.0, 0.7, 0.95, &base).unwrap();
            assert!(g.form.terms().iter().all(|t| !t.coeff.depends_on(crate::symbolic::Var::param_bar(0))));
            let mut annulus = 0;
            while annulus < 50 {
                let cs: Vec<C64> = (0..n).map(|_| rand_c(&mut rng, 1.0)).collect();
                let r = cs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                let ps: Vec<C64> = (0..n).map(|_| rand_c(&mut rng, 0.35)).collect();
                let pt = Point::new(&cs, &ps);
                let ng = g.form.nabla(&base).unwrap();
                assert!(ng.max_abs(&pt).unwrap() <= 1e-9);
                if r < 0.7 {
                    assert!((g.form.coeff(0, 0).eval(&pt).unwrap() - 1.0).norm() < 1e-15);
                    assert_eq!(g.form.max_abs_positive_degree(&pt).unwrap(), 0.0);
                } else if r > 0.95 {
                    assert_eq!(g.form.max_abs(&pt).unwrap(), 0.0);
                } else {
                    annulus += 1;
                }
            }
        }
        assert!(matches!(
            ball_weight(1.0, 0.9, 0.5, &holomorphic_base(1)),
            Err(KernelError::ParameterOrder { .. })
        ));
    }

    #[test]
    fn weight_products() {
        let base = holomorphic_base(2);
        let g1 = WeightSpec::ball(1.0).build(&base).unwrap();
        let g2 = WeightSpec::ball_with_radii(1.0, 0.5, 0.8).build(&base).unwrap();
        let one = Weight { form: Form::one(2), base: base.clone() };
        let same = weight_product(&g1, &one).unwrap();
        let prod = weight_product(&g1, &g2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let cs: Vec<C64> = (0..2).map(|_| rand_c(&mut rng, 0.7)).collect();
            let ps: Vec<C64> = (0..2).map(|_| rand_c(&mut rng, 0.3)).collect();
            let pt = Point::new(&cs, &ps);
            assert!(same.form.sub(&g1.form).unwrap().max_abs(&pt).unwrap() < 1e-14);
            assert!(prod.form.nabla(&base).unwrap().max_abs(&pt).unwrap() < 1e-9);
        }
        let z = [C64::new(0.1, 0.0), C64::new(0.0, -0.2)];
        let pt = Point::new(&z, &z);
        assert!((prod.form.coeff(0, 0).eval(&pt).unwrap() - 1.0).norm() < 1e-14);
        let other = WeightSpec::ball(1.0).build(&doubled_base(1)).unwrap();
        assert!(matches!(weight_product(&g1, &other), Err(KernelError::BindingMismatch)));
    }
}
