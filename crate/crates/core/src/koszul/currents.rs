use std::collections::BTreeMap;
use std::sync::Arc;

use crate::forms::{merge_sign, Form, HomForm, Parity};
use crate::poly::Poly;
use crate::symbolic::Expr;

use super::complex::{bits, subsets};
use super::KoszulError;

/// Element of `forms ⊗ ∧(e_1, .., e_m)`, written form-first as
/// `sum_I alpha_I e_I`; differentials and frame elements all anticommute.
#[derive(Clone, Debug)]
pub struct ExtElem {
    dim: usize,
    rank: usize,
    comps: BTreeMap<u64, Form>,
}

impl ExtElem {
    pub fn zero(dim: usize, rank: usize) -> Self {
        ExtElem { dim, rank, comps: BTreeMap::new() }
    }

    pub fn scalar(rank: usize, f: Form) -> Self {
        let mut out = ExtElem::zero(f.dim(), rank);
        out.insert(0, f);
        out
    }

    /// `sum_i coeffs[i] e_i`.
    pub fn vector(dim: usize, coeffs: &[Expr]) -> Self {
        let mut out = ExtElem::zero(dim, coeffs.len());
        for (i, c) in coeffs.iter().enumerate() {
            out.insert(1 << i, Form::scalar(dim, c.clone()));
        }
        out
    }

    fn insert(&mut self, set: u64, f: Form) {
        if f.is_zero() {
            return;
        }
        let merged = match self.comps.remove(&set) {
            Some(g) => g.add(&f).expect("same dimension"),
            None => f,
        };
        if !merged.is_zero() {
            self.comps.insert(set, merged);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Coefficient of `e_I`.
    pub fn get(&self, set: u64) -> Form {
        self.comps.get(&set).cloned().unwrap_or_else(|| Form::zero(self.dim))
    }

    pub fn components(&self) -> impl Iterator<Item = (u64, &Form)> {
        self.comps.iter().map(|(k, v)| (*k, v))
    }

    /// Part of frame degree `k`.
    pub fn frame_part(&self, k: u32) -> ExtElem {
        let comps = self.comps.iter().filter(|(s, _)| s.count_ones() == k).map(|(s, f)| (*s, f.clone())).collect();
        ExtElem { comps, ..*self }
    }

    pub fn add(&self, other: &ExtElem) -> ExtElem {
        let mut out = self.clone();
        for (s, f) in &other.comps {
            out.insert(*s, f.clone());
        }
        out
    }

    pub fn sub(&self, other: &ExtElem) -> ExtElem {
        self.add(&other.map(Form::neg))
    }

    pub fn scale(&self, e: &Expr) -> ExtElem {
        self.map(|f| f.scale(e))
    }

    fn map<F: Fn(&Form) -> Form>(&self, f: F) -> ExtElem {
        let mut out = ExtElem::zero(self.dim, self.rank);
        for (s, g) in &self.comps {
            out.insert(*s, f(g));
        }
        out
    }

    /// `(alpha e_I)(beta e_J) = (-1)^{|I||beta|} sgn(I, J) alpha ∧ beta e_{I ∪ J}`.
    pub fn mul(&self, other: &ExtElem) -> Result<ExtElem, KoszulError> {
        let mut out = ExtElem::zero(self.dim, self.rank);
        for (&i, a) in &self.comps {
            for (&j, b) in &other.comps {
                if i & j != 0 {
                    continue;
                }
                let prod = a.wedge(&b.twist(i.count_ones() % 2 == 1))?;
                let prod = if merge_sign(i, j) < 0 { prod.neg() } else { prod };
                out.insert(i | j, prod);
            }
        }
        Ok(out)
    }

    pub fn power(&self, k: usize) -> Result<ExtElem, KoszulError> {
        let mut acc = ExtElem::scalar(self.rank, Form::one(self.dim));
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn dbar(&self) -> Result<ExtElem, KoszulError> {
        let mut out = ExtElem::zero(self.dim, self.rank);
        for (s, f) in &self.comps {
            out.insert(*s, f.dbar()?);
        }
        Ok(out)
    }

    /// Contraction `delta_a`: `delta_a(alpha e_I) = (-1)^{|alpha|} alpha delta_a(e_I)`
    /// with `delta_a e_I = sum_p (-1)^p a_{i_p} e_{I \ i_p}`.
    pub fn delta(&self, a: &[Expr]) -> ExtElem {
        let mut out = ExtElem::zero(self.dim, self.rank);
        for (&set, f) in &self.comps {
            let tw = f.twist(true);
            for (p, i) in bits(set).enumerate() {
                let g = tw.scale(&a[i]);
                out.insert(set & !(1 << i), if p % 2 == 0 { g } else { g.neg() });
            }
        }
        out
    }

    /// `nabla_f = delta_a - dbar`.
    pub fn nabla(&self, a: &[Expr]) -> Result<ExtElem, KoszulError> {
        Ok(self.delta(a).sub(&self.dbar()?))
    }

    /// Left multiplication `E_l -> E_k` by the frame-degree `k - l` part, as
    /// an operator; its parity is the total degree of that part.
    pub fn left_mult(&self, l: usize, k: usize) -> Result<HomForm, KoszulError> {
        let rows = subsets(self.rank, k);
        let cols = subsets(self.rank, l);
        let mut parity = None;
        let mut out = HomForm::zero(rows.len(), cols.len(), self.dim, Parity::Even);
        if k < l {
            return Ok(out);
        }
        for (&i, f) in self.comps.iter().filter(|(s, _)| s.count_ones() as usize == k - l) {
            for t in f.terms() {
                let p = if (t.degree() + i.count_ones()) % 2 == 0 { Parity::Even } else { Parity::Odd };
                match parity {
                    None => parity = Some(p),
                    Some(q) if q != p => {
                        return Err(KoszulError::Shape("left multiplication by an element of mixed parity".into()))
                    }
                    _ => {}
                }
            }
            for (c, &j) in cols.iter().enumerate() {
                if i & j != 0 {
                    continue;
                }
                let r = rows.iter().position(|&s| s == i | j).expect("subset present");
                let entry = if merge_sign(i, j) < 0 { f.neg() } else { f.clone() };
                let sum = out.get(r, c).add(&entry)?;
                out.set(r, c, sum);
            }
        }
        Ok(out.with_parity(parity.unwrap_or(Parity::Even)))
    }
}

fn generator_exprs(a: &[Poly]) -> Result<Vec<Expr>, KoszulError> {
    if a.is_empty() {
        return Err(KoszulError::Empty);
    }
    if a.iter().any(|p| !p.is_holomorphic()) {
        return Err(KoszulError::NotHolomorphic);
    }
    Ok(a.iter().map(Poly::to_expr).collect())
}

/// `|a|^2 = sum_j |a_j|^2`.
pub fn norm2(a: &[Expr]) -> Expr {
    Expr::sum(a.iter().map(Expr::abs2))
}

/// Minimal section `sigma = sum_j conj(a_j) e_j / |a|^2` with `delta_a sigma = 1`.
pub fn sigma(a: &[Poly]) -> Result<ExtElem, KoszulError> {
    let ex = generator_exprs(a)?;
    let inv = norm2(&ex).recip();
    let coeffs: Vec<Expr> = ex.iter().map(|e| e.conj().mul(&inv)).collect();
    Ok(ExtElem::vector(a[0].nvars(), &coeffs))
}

/// Regularized `u = sum_k sigma (dbar sigma)^{k-1}` with `sigma` replaced by
/// `conj(a) / (|a|^2 + eps)` in every factor. Since `sigma ∧ sigma = 0` the
/// frame-degree `k` part is `conj(a) (dbar conj(a))^{k-1} / (|a|^2 + eps)^k`,
/// which is what gets built; `eps = 0` gives the unregularized form.
pub fn u_form(a: &[Poly], eps: f64) -> Result<ExtElem, KoszulError> {
    let ex = generator_exprs(a)?;
    let n = a[0].nvars();
    let abar = ExtElem::vector(n, &ex.iter().map(Expr::conj).collect::<Vec<_>>());
    let dabar = abar.dbar()?;
    let denom = norm2(&ex).add(&Expr::real(eps));
    let mut out = ExtElem::zero(n, a.len());
    let mut num = abar;
    for k in 1..=a.len() {
        if num.is_zero() {
            break;
        }
        out = out.add(&num.scale(&denom.pow(k as u32).recip()));
        num = num.mul(&dabar)?;
    }
    Ok(out)
}

/// `R_eps = 1 - nabla_f u_eps`, so that `nabla_f U_eps + U_eps nabla_f = I - R_eps`
/// holds exactly for every `eps > 0`.
pub fn r_form(a: &[Poly], eps: f64) -> Result<ExtElem, KoszulError> {
    let ex = generator_exprs(a)?;
    let u = u_form(a, eps)?;
    let one = ExtElem::scalar(a.len(), Form::one(a[0].nvars()));
    Ok(one.sub(&u.nabla(&ex)?))
}

/// Operator `U^l_k : E_l -> E_k` (bidegree `(0, k - l - 1)`).
pub fn u_operator(a: &[Poly], eps: f64, l: usize, k: usize) -> Result<HomForm, KoszulError> {
    u_form(a, eps)?.left_mult(l, k)
}

/// Operator `R^l_k : E_l -> E_k` (bidegree `(0, k - l)`).
pub fn r_operator(a: &[Poly], eps: f64, l: usize, k: usize) -> Result<HomForm, KoszulError> {
    r_form(a, eps)?.left_mult(l, k)
}

/// A form-valued family `eps -> form` whose pairings are extrapolated to `eps -> 0`.
#[derive(Clone)]
pub struct RegularizedCurrent {
    pub name: String,
    pub build: Arc<dyn Fn(f64) -> Result<Form, KoszulError> + Send + Sync>,
    /// `s` such that the regularized denominator scales like `|zeta|^(2 s)`;
    /// the ladder starts at `1e-2 * scale^(2 s)`.
    pub homogeneity: u32,
}

impl std::fmt::Debug for RegularizedCurrent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RegularizedCurrent({})", self.name)
    }
}

impl RegularizedCurrent {
    pub fn at(&self, eps: f64) -> Result<Form, KoszulError> {
        (self.build)(eps)
    }

    /// `eps_k = eps_0 4^{-k}`, `k = 0..4`, with `eps_0 = 1e-2 scale^{2s}`.
    pub fn ladder(&self, scale: f64) -> Vec<f64> {
        let eps0 = 1e-2 * scale.powi(2 * self.homogeneity as i32);
        (0..4).map(|k| eps0 * 0.25f64.powi(k)).collect()
    }
}

/// `dbar[ conj(a0)^s / (|a0|^{2s} + eps) ]` for a monomial `a0`, the
/// regularization of `dbar(1/a0^s)`.
pub fn power_residue_shape(a0: &Poly, s: u32) -> Result<RegularizedCurrent, KoszulError> {
    a0.as_monomial().map_err(|_| KoszulError::NotMonomial)?;
    let e = a0.to_expr();
    let n = a0.nvars();
    let num = e.conj().pow(s);
    let abs2s = e.abs2().pow(s);
    let build = move |eps: f64| -> Result<Form, KoszulError> {
        let f = num.div(&abs2s.add(&Expr::real(eps)));
        Ok(Form::scalar(n, f).dbar()?)
    };
    Ok(RegularizedCurrent { name: format!("dbar(1/({a0})^{s})"), build: Arc::new(build), homogeneity: s * a0.degree() })
}

/// The frame-degree-`k` part of `R_eps` for a single generator, as a
/// regularized scalar current (`rank` 1).
pub fn koszul_residue(a: &[Poly], k: u32) -> Result<RegularizedCurrent, KoszulError> {
    let owned: Vec<Poly> = a.to_vec();
    let top = subsets(a.len(), k as usize);
    if top.len() != 1 {
        return Err(KoszulError::Shape("scalar residue needs k equal to the number of generators".into()));
    }
    let set = top[0];
    let build = move |eps: f64| Ok(r_form(&owned, eps)?.get(set));
    Ok(RegularizedCurrent { name: format!("R_{k}"), build: Arc::new(build), homogeneity: 1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{Point, C64};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pts(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
        (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
    }

    #[test]
    fn sigma_contracts_to_one_and_squares_to_zero() {
        let x = |i| Poly::var(2, i);
        let a = [x(0), x(1).pow(2).add(&x(0)), x(0).mul(&x(1))];
        let ex: Vec<Expr> = a.iter().map(Poly::to_expr).collect();
        let s = sigma(&a).unwrap();
        let ds = s.delta(&ex);
        let sq = s.mul(&s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let cs = pts(&mut rng, 2);
            for (_, f) in sq.components() {
                assert!(f.max_abs(&Point::new(&cs, &[])).unwrap() <= 1e-12);
            }
            let v = ds.get(0).coeff(0, 0).eval(&Point::new(&cs, &[])).unwrap();
            assert!((v - 1.0).norm() <= 1e-12);
        }
    }

    #[test]
    fn one_generator_closed_forms() {
        let a = [Poly::var(1, 0)];
        let eps = 0.3;
        let u = u_form(&a, eps).unwrap();
        let r = r_form(&a, eps).unwrap();
        let z = C64::new(0.4, -0.2);
        let cs = [z];
        let pt = Point::new(&cs, &[]);
        let d = z.norm_sqr() + eps;
        let u1 = u.get(1).coeff(0, 0).eval(&pt).unwrap();
        assert!((u1 - z.conj() / d).norm() < 1e-15);
        let r0 = r.get(0).coeff(0, 0).eval(&pt).unwrap();
        assert!((r0 - eps / d).norm() < 1e-15);
        let r1 = r.get(1).coeff(0, 1).eval(&pt).unwrap();
        assert!((r1 - eps / (d * d)).norm() < 1e-15);
        let shape = power_residue_shape(&a[0], 1).unwrap().at(eps).unwrap();
        let v = shape.coeff(0, 1).eval(&pt).unwrap();
        assert!((v - eps / (d * d)).norm() < 1e-15);
    }

    #[test]
    fn regularized_current_equation() {
        let x = |i| Poly::var(2, i);
        let a = [x(0), x(1)];
        let ex: Vec<Expr> = a.iter().map(Poly::to_expr).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for eps in [0.0, 1e-2] {
            let u = u_form(&a, eps).unwrap();
            let nu = u.nabla(&ex).unwrap();
            let r = r_form(&a, eps).unwrap();
            for _ in 0..20 {
                let cs = pts(&mut rng, 2);
                let pt = Point::new(&cs, &[]);
                // R_eps supported near Z as eps -> 0; identically 0 off Z at eps = 0
                for set in [0u64, 1, 2, 3] {
                    let got = nu.get(set).add(&r.get(set)).unwrap();
                    let expect = if set == 0 { 1.0 } else { 0.0 };
                    let scalar = got.coeff(0, 0).eval(&pt).unwrap();
                    assert!((scalar - expect).norm() < 1e-12);
                    assert!(got.max_abs_positive_degree(&pt).unwrap() < 1e-12);
                    if eps == 0.0 {
                        assert!(r.get(set).max_abs(&pt).unwrap() < 1e-12);
                    }
                }
            }
        }
        let u = u_form(&a, 1e-2).unwrap();
        assert_eq!(u.get(3).bidegrees(), vec![(0, 1)]);
        let r = r_form(&a, 1e-2).unwrap();
        assert_eq!(r.get(3).bidegrees(), vec![(0, 2)]);
    }

    #[test]
    fn operator_equation_matches_element_equation() {
        // nabla_f U + U nabla_f = I - R as operators E_0 -> E_1 applied to a 0-form
        let x = |i| Poly::var(2, i);
        let a = [x(0), x(1)];
        let complex = crate::koszul::koszul_complex(&a).unwrap();
        let eps = 0.05;
        let u01 = u_operator(&a, eps, 0, 1).unwrap();
        let u02 = u_operator(&a, eps, 0, 2).unwrap();
        let r01 = r_operator(&a, eps, 0, 1).unwrap();
        assert_eq!(u01.parity(), Parity::Odd);
        // degree-1 part of the operator identity on E_0 -> E_1:
        // f_2 U^0_2 - dbar U^0_1 = -R^0_1
        let lhs = complex.map(2, false).compose(&u02).unwrap().sub(&u01.try_map(|f| Ok(f.dbar()?)).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let cs = pts(&mut rng, 2);
            let pt = Point::new(&cs, &[]);
            let diff = lhs.add(&r01).unwrap();
            assert!(diff.max_abs(&pt).unwrap() < 1e-12);
        }
    }

    #[test]
    fn power_shape_needs_monomial() {
        let p = Poly::var(2, 0).add(&Poly::var(2, 1));
        assert!(matches!(power_residue_shape(&p, 1), Err(KoszulError::NotMonomial)));
    }
}
