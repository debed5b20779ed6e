//! Membership of polynomial `(z, conj z)`-germs in `E a^r` for monomial
//! ideals `a`, decided in exact rational arithmetic, and annihilation of
//! monomial residue currents `dbar(1/a0^s)`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::forms::Form;
use crate::koszul::{power_residue_shape, residue_pairing, KoszulError, PairingReport};
use crate::poly::{Monomial, Poly};
use crate::quadrature::{Domain, Rule};
use crate::symbolic::{Atom, Expr, C64};

/// Exact complex rational coefficient.
pub type Coeff = Complex<Rational64>;

pub fn coeff(re: i64, im: i64) -> Coeff {
    Complex::new(Rational64::from_integer(re), Rational64::from_integer(im))
}

fn to_c64(c: &Coeff) -> C64 {
    let f = |r: &Rational64| *r.numer() as f64 / *r.denom() as f64;
    C64::new(f(&c.re), f(&c.im))
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MembershipError {
    #[error("an ideal needs at least one generator")]
    Empty,
    #[error("exponent vectors must have length {expected}, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("generator {0:?} divides generator {1:?}; pass a minimal generating set")]
    NotMinimal(Vec<u32>, Vec<u32>),
    #[error("no product of {r} generators divides the holomorphic part of term {term}")]
    NoDivisor { r: u32, term: GermTerm },
    #[error("residue shape needs a non-constant monomial")]
    ConstantResidue,
    #[error(transparent)]
    Koszul(#[from] KoszulError),
}

/// `coeff * z^a * conj(z)^b`.
#[derive(Clone, Debug, PartialEq)]
pub struct GermTerm {
    pub coeff: Coeff,
    pub a: Vec<u32>,
    pub b: Vec<u32>,
}

impl fmt::Display for GermTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}+{}i) z^{:?} zbar^{:?}", self.coeff.re, self.coeff.im, self.a, self.b)
    }
}

/// Polynomial germ in `z`, `conj(z)` with exact coefficients; zero terms are dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct Germ {
    n: usize,
    terms: BTreeMap<(Vec<u32>, Vec<u32>), Coeff>,
}

impl Germ {
    pub fn zero(n: usize) -> Self {
        Germ { n, terms: BTreeMap::new() }
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = GermTerm>) -> Result<Self, MembershipError> {
        let mut g = Germ::zero(n);
        for t in terms {
            g.add_term(t)?;
        }
        Ok(g)
    }

    pub fn monomial(c: Coeff, a: &[u32], b: &[u32]) -> Self {
        let mut g = Germ::zero(a.len());
        g.add_term(GermTerm { coeff: c, a: a.to_vec(), b: b.to_vec() }).expect("matching lengths");
        g
    }

    pub fn add_term(&mut self, t: GermTerm) -> Result<(), MembershipError> {
        for v in [&t.a, &t.b] {
            if v.len() != self.n {
                return Err(MembershipError::Arity { expected: self.n, got: v.len() });
            }
        }
        let key = (t.a, t.b);
        let slot = self.terms.entry(key.clone()).or_insert_with(Coeff::zero);
        *slot += t.coeff;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
        Ok(())
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = GermTerm> + '_ {
        self.terms.iter().map(|((a, b), c)| GermTerm { coeff: *c, a: a.clone(), b: b.clone() })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest `conj(z_i)` exponent per variable.
    pub fn anti_degrees(&self) -> Vec<u32> {
        let mut d = vec![0; self.n];
        for (_, b) in self.terms.keys() {
            for (di, bi) in d.iter_mut().zip(b) {
                *di = (*di).max(*bi);
            }
        }
        d
    }

    /// `d^alpha / d conj(z)^alpha`, exactly.
    pub fn anti_derivative(&self, alpha: &[u32]) -> Germ {
        let mut out = Germ::zero(self.n);
        for ((a, b), c) in &self.terms {
            if b.iter().zip(alpha).any(|(bi, ai)| bi < ai) {
                continue;
            }
            let mut factor = 1i64;
            for (bi, ai) in b.iter().zip(alpha) {
                factor *= (bi - ai + 1..=*bi).map(i64::from).product::<i64>();
            }
            let nb: Vec<u32> = b.iter().zip(alpha).map(|(bi, ai)| bi - ai).collect();
            let k = Rational64::from_integer(factor);
            out.add_term(GermTerm { coeff: Complex::new(c.re * k, c.im * k), a: a.clone(), b: nb }).unwrap();
        }
        out
    }

    pub fn add(&self, other: &Germ) -> Germ {
        let mut out = self.clone();
        for t in other.terms() {
            out.add_term(t).unwrap();
        }
        out
    }

    /// Product with `z^e`.
    pub fn shift(&self, e: &[u32]) -> Germ {
        let mut out = Germ::zero(self.n);
        for t in self.terms() {
            let a = t.a.iter().zip(e).map(|(x, y)| x + y).collect();
            out.add_term(GermTerm { a, ..t }).unwrap();
        }
        out
    }

    /// Floating point copy in the polynomial type used by the analytic modules.
    pub fn to_poly(&self) -> Poly {
        let mut p = Poly::zero(self.n);
        for ((a, b), c) in &self.terms {
            p.add_term(to_c64(c), Monomial { zeta: a.clone(), zeta_bar: b.clone(), z: vec![0; self.n] });
        }
        p
    }

    /// All multi-indices `alpha` with `alpha <= anti_degrees()` componentwise.
    pub fn derivative_orders(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new()];
        for d in self.anti_degrees() {
            out = out.into_iter().flat_map(|pre| (0..=d).map(move |k| [pre.clone(), vec![k]].concat())).collect();
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonomialIdeal {
    n: usize,
    generators: Vec<Vec<u32>>,
}

fn divides(g: &[u32], a: &[u32]) -> bool {
    g.iter().zip(a).all(|(x, y)| x <= y)
}

impl MonomialIdeal {
    /// Requires a minimal generating set.
    pub fn new(n: usize, generators: Vec<Vec<u32>>) -> Result<Self, MembershipError> {
        if generators.is_empty() {
            return Err(MembershipError::Empty);
        }
        for g in &generators {
            if g.len() != n {
                return Err(MembershipError::Arity { expected: n, got: g.len() });
            }
        }
        for (i, g) in generators.iter().enumerate() {
            for (j, h) in generators.iter().enumerate() {
                if i != j && divides(g, h) {
                    return Err(MembershipError::NotMinimal(g.clone(), h.clone()));
                }
            }
        }
        Ok(MonomialIdeal { n, generators })
    }

    /// Drops duplicates and generators divisible by others.
    pub fn minimal(n: usize, mut generators: Vec<Vec<u32>>) -> Result<Self, MembershipError> {
        generators.sort();
        generators.dedup();
        let keep: Vec<Vec<u32>> = generators
            .iter()
            .filter(|h| !generators.iter().any(|g| g != *h && divides(g, h)))
            .cloned()
            .collect();
        MonomialIdeal::new(n, keep)
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[Vec<u32>] {
        &self.generators
    }

    /// `min(m, n)`.
    pub fn mu(&self) -> u32 {
        self.generators.len().min(self.n) as u32
    }

    /// Whether `|z^c| <= C |a|^k` near 0, i.e. `c` lies in `k` times the Newton
    /// polyhedron. Boundary points count as inside.
    pub fn bounds_monomial(&self, c: &[u32], k: u32) -> bool {
        in_newton_polyhedron(c, &self.generators, k)
    }

    /// Multisets of `r` generators as exponent counts, lexicographically.
    fn products(&self, r: u32) -> Vec<Vec<u32>> {
        crate::extension::multi_indices(self.generators.len(), r)
    }

    fn product_exponent(&self, counts: &[u32]) -> Vec<u32> {
        let mut e = vec![0; self.n];
        for (g, &c) in self.generators.iter().zip(counts) {
            for (ei, gi) in e.iter_mut().zip(g) {
                *ei += gi * c;
            }
        }
        e
    }
}

/// `c ∈ k (conv(gens) + R^n_{>=0})`, by Fourier–Motzkin elimination over the
/// convex weights.
pub fn in_newton_polyhedron(c: &[u32], gens: &[Vec<u32>], k: u32) -> bool {
    let m = gens.len();
    let r = |x: i64| Rational64::from_integer(x);
    // rows: coeffs . lambda <= rhs
    let mut rows: Vec<(Vec<Rational64>, Rational64)> = Vec::new();
    for j in 0..m {
        let mut v = vec![r(0); m];
        v[j] = r(-1);
        rows.push((v, r(0)));
    }
    rows.push((vec![r(1); m], r(k as i64)));
    rows.push((vec![r(-1); m], r(-(k as i64))));
    for (i, ci) in c.iter().enumerate() {
        rows.push((gens.iter().map(|g| r(g[i] as i64)).collect(), r(*ci as i64)));
    }
    for var in (0..m).rev() {
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for row in rows {
            let a = row.0[var];
            if a.is_positive() {
                pos.push(row);
            } else if a.is_negative() {
                neg.push(row);
            } else {
                rest.push(row);
            }
        }
        for (pc, pr) in &pos {
            for (nc, nr) in &neg {
                let (sp, sn) = (pc[var].recip(), -nc[var].recip());
                let coeffs: Vec<Rational64> = pc.iter().zip(nc).map(|(a, b)| *a * sp + *b * sn).collect();
                rest.push((coeffs, *pr * sp + *nr * sn));
            }
        }
        rows = rest;
    }
    rows.iter().all(|(_, rhs)| !rhs.is_negative())
}

/// A monomial of some `d^alpha_{zbar} phi` that violates the bound.
#[derive(Clone, Debug, PartialEq)]
pub struct BsWitness {
    pub alpha: Vec<u32>,
    pub term: GermTerm,
    /// Integer weights `w` with `<w, a + b> < k min_j <w, g_j>`: along
    /// `z_i = t^{w_i}` the ratio blows up as `t -> 0`.
    pub curve: Option<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BsVerdict {
    pub passes: bool,
    /// Exponent `k` of the bound `|a|^k`.
    pub exponent: u32,
    pub witness: Option<BsWitness>,
    pub monomials_checked: usize,
    /// Random points in the unit polydisc at which the inequality
    /// `|z^(a+b)| <= |a(z)|^k` was evaluated for every bounded monomial.
    pub samples: usize,
    /// Sample at which a monomial classified as bounded broke the inequality.
    pub sample_violation: Option<Vec<C64>>,
}

fn curve_witness(c: &[u32], gens: &[Vec<u32>], k: u32, rng: &mut ChaCha8Rng) -> Option<Vec<u32>> {
    let dot = |w: &[u32], v: &[u32]| -> u64 { w.iter().zip(v).map(|(x, y)| *x as u64 * *y as u64).sum() };
    for _ in 0..1000 {
        let w: Vec<u32> = (0..c.len()).map(|_| rng.gen_range(0..=6)).collect();
        if w.iter().all(|&x| x == 0) {
            continue;
        }
        let min_g = gens.iter().map(|g| dot(&w, g)).min().unwrap_or(0);
        if dot(&w, c) < k as u64 * min_g {
            return Some(w);
        }
    }
    None
}

const SPOT_SAMPLES: usize = 1000;

/// Checks `|d^alpha_{zbar} phi| <= C |a|^k` for every `alpha` with `k = exponent`,
/// monomial by monomial, and corroborates the bounded monomials at random points.
pub fn bs_condition_with_exponent(phi: &Germ, ideal: &MonomialIdeal, exponent: u32) -> BsVerdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB5);
    let mut checked = 0;
    let mut bounded: Vec<Vec<u32>> = Vec::new();
    let mut witness = None;
    'outer: for alpha in phi.derivative_orders() {
        for term in phi.anti_derivative(&alpha).terms() {
            checked += 1;
            let c: Vec<u32> = term.a.iter().zip(&term.b).map(|(x, y)| x + y).collect();
            if ideal.bounds_monomial(&c, exponent) {
                bounded.push(c);
            } else {
                let curve = curve_witness(&c, &ideal.generators, exponent, &mut rng);
                witness = Some(BsWitness { alpha: alpha.clone(), term, curve });
                break 'outer;
            }
        }
    }
    bounded.sort();
    bounded.dedup();
    let mut sample_violation = None;
    for _ in 0..SPOT_SAMPLES {
        let z: Vec<C64> = (0..ideal.n)
            .map(|_| C64::from_polar(10f64.powf(rng.gen_range(-4.0..0.0)), rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        let mono = |e: &[u32]| e.iter().zip(&z).map(|(k, v)| v.norm().powi(*k as i32)).product::<f64>();
        let a_norm = ideal.generators.iter().map(|g| mono(g).powi(2)).sum::<f64>().sqrt();
        if bounded.iter().any(|c| mono(c) > a_norm.powi(exponent as i32) * (1.0 + 1e-9)) {
            sample_violation.get_or_insert(z);
        }
    }
    BsVerdict {
        passes: witness.is_none(),
        exponent,
        witness,
        monomials_checked: checked,
        samples: SPOT_SAMPLES,
        sample_violation,
    }
}

/// The derivative bound with exponent `mu + r - 1`.
pub fn bs_condition(phi: &Germ, ideal: &MonomialIdeal, r: u32) -> BsVerdict {
    bs_condition_with_exponent(phi, ideal, ideal.mu() + r - 1)
}

/// `phi = sum_{|I| = r} xi_I a^I` with `I` counting generator multiplicities.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub r: u32,
    pub xi: BTreeMap<Vec<u32>, Germ>,
}

impl Certificate {
    /// `sum_I xi_I a^I`, exactly.
    pub fn expand(&self, ideal: &MonomialIdeal) -> Germ {
        let mut out = Germ::zero(ideal.n);
        for (counts, xi) in &self.xi {
            out = out.add(&xi.shift(&ideal.product_exponent(counts)));
        }
        out
    }
}

/// Divides every term of `phi` by the first product of `r` generators that
/// divides its holomorphic part; the antiholomorphic factor rides along in `xi`.
/// The result is checked by exact re-expansion.
pub fn bs_certificate(phi: &Germ, ideal: &MonomialIdeal, r: u32) -> Result<Certificate, MembershipError> {
    let products: Vec<(Vec<u32>, Vec<u32>)> =
        ideal.products(r).into_iter().map(|c| (ideal.product_exponent(&c), c)).collect();
    let mut xi: BTreeMap<Vec<u32>, Germ> = BTreeMap::new();
    for term in phi.terms() {
        let Some((e, counts)) = products.iter().find(|(e, _)| divides(e, &term.a)) else {
            return Err(MembershipError::NoDivisor { r, term });
        };
        let a = term.a.iter().zip(e).map(|(x, y)| x - y).collect();
        xi.entry(counts.clone()).or_insert_with(|| Germ::zero(ideal.n)).add_term(GermTerm { a, ..term })?;
    }
    let cert = Certificate { r, xi };
    assert_eq!(cert.expand(ideal), *phi, "certificate does not re-expand");
    Ok(cert)
}

/// Whether `z^a conj(z)^b dbar(1/a0^s) = 0` for `a0 = z^t`: in every variable
/// of `a0` either the holomorphic power absorbs the pole or a conjugate factor
/// kills the residue.
pub fn annihilates(term: &GermTerm, t: &[u32], s: u32) -> bool {
    t.iter()
        .enumerate()
        .filter(|(_, &ti)| ti > 0)
        .all(|(i, &ti)| term.a[i] >= s * ti || term.b[i] >= 1)
}

#[derive(Clone, Debug)]
pub struct AnnihilationResult {
    pub annihilates: bool,
    /// One-variable pairing against the test form that detects the term;
    /// `None` in several variables.
    pub pairing: Option<PairingReport>,
}

/// Quadrature rule used for the numeric corroboration.
pub fn annihilation_rule() -> Rule {
    Rule { radial_grading: Some((0.5, 16)), radial_breaks: vec![0.5, 0.9], ..Rule::tensor(16, 1, 16) }
}

/// [`annihilates`] plus, in one variable, the extrapolated pairing
/// `<term dbar(1/z^{ts}), z^m dz bump / 2 pi i>` with `m` chosen so that a
/// surviving term pairs to its coefficient.
pub fn annihilation_test(term: &GermTerm, t: &[u32], s: u32) -> Result<AnnihilationResult, MembershipError> {
    let verdict = annihilates(term, t, s);
    if t.len() != 1 {
        return Ok(AnnihilationResult { annihilates: verdict, pairing: None });
    }
    let pole = t[0] * s;
    if pole == 0 {
        return Err(MembershipError::ConstantResidue);
    }
    let a0 = Poly::monomial(1, C64::new(1.0, 0.0), t);
    let current = power_residue_shape(&a0, s)?;
    let m = pole.saturating_sub(1 + term.a[0]);
    let bump = Expr::apply(Atom::cutoff(0.25, 0.81), Expr::coord(0).abs2());
    let xi = Expr::constant(to_c64(&term.coeff))
        .mul(&Expr::coord(0).pow(term.a[0] + m))
        .mul(&Expr::coord_bar(0).pow(term.b[0]));
    let test = Form::dzeta(1, 0).scale(&xi.mul(&bump).mul(&Expr::inv_two_pi_i()));
    let report = residue_pairing(&current, &test, &Domain::ball(1, 1.0), &annihilation_rule(), &current.ladder(0.5))?;
    Ok(AnnihilationResult { annihilates: verdict, pairing: Some(report) })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidueMembership {
    pub member: bool,
    /// First `(alpha, term)` of some `d^alpha_{zbar} phi` not annihilated.
    pub obstruction: Option<(Vec<u32>, GermTerm)>,
    /// `phi / a0^s` when `phi` is a member.
    pub quotient: Option<Germ>,
}

/// Membership of `phi` in the ideal generated by `a0^s`, `a0 = z^t`, decided by
/// `(d^alpha_{zbar} phi) dbar(1/a0^s) = 0` for every `alpha`.
pub fn residue_membership(phi: &Germ, t: &[u32], s: u32) -> Result<ResidueMembership, MembershipError> {
    if t.len() != phi.nvars() {
        return Err(MembershipError::Arity { expected: phi.nvars(), got: t.len() });
    }
    if t.iter().all(|&x| x == 0) || s == 0 {
        return Err(MembershipError::ConstantResidue);
    }
    for alpha in phi.derivative_orders() {
        if let Some(term) = phi.anti_derivative(&alpha).terms().find(|term| !annihilates(term, t, s)) {
            return Ok(ResidueMembership { member: false, obstruction: Some((alpha, term)), quotient: None });
        }
    }
    let st: Vec<u32> = t.iter().map(|x| x * s).collect();
    let mut q = Germ::zero(phi.nvars());
    for term in phi.terms() {
        let a = term.a.iter().zip(&st).map(|(x, y)| x - y).collect();
        q.add_term(GermTerm { a, ..term })?;
    }
    Ok(ResidueMembership { member: true, obstruction: None, quotient: Some(q) })
}

/// Direct oracle: every term `z^a conj(z)^b` of `phi` has `a >= s t`.
pub fn divisible_by_power(phi: &Germ, t: &[u32], s: u32) -> bool {
    phi.terms().all(|term| term.a.iter().zip(t).all(|(a, ti)| *a >= s * ti))
}

impl fmt::Display for Germ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms().map(|t| t.to_string()).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl GermTerm {
    pub fn new(c: Coeff, a: &[u32], b: &[u32]) -> Self {
        GermTerm { coeff: c, a: a.to_vec(), b: b.to_vec() }
    }

    pub fn is_unit_coeff(&self) -> bool {
        self.coeff.is_one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> Coeff {
        coeff(1, 0)
    }

    #[test]
    fn newton_polyhedron_membership() {
        let gens = vec![vec![2, 0], vec![0, 2]];
        assert!(in_newton_polyhedron(&[1, 1], &gens, 1));
        assert!(!in_newton_polyhedron(&[1, 0], &gens, 1));
        assert!(in_newton_polyhedron(&[3, 1], &gens, 2));
        assert!(!in_newton_polyhedron(&[2, 1], &gens, 2));
        assert!(in_newton_polyhedron(&[0, 5], &[vec![1, 0], vec![0, 1]], 5));
    }

    #[test]
    fn condition_examples() {
        let z1 = MonomialIdeal::new(1, vec![vec![1]]).unwrap();
        let v = bs_condition(&Germ::monomial(one(), &[0], &[1]), &z1, 1);
        assert!(!v.passes);
        let w = v.witness.unwrap();
        assert_eq!(w.alpha, vec![1]);
        assert!(w.curve.is_some());
        let v = bs_condition(&Germ::monomial(one(), &[1], &[1]), &z1, 1);
        assert!(v.passes && v.sample_violation.is_none());
        assert!(bs_condition(&Germ::zero(1), &z1, 1).passes);
    }

    #[test]
    fn certificate_examples() {
        let ideal = MonomialIdeal::new(2, vec![vec![1, 0], vec![0, 1]]).unwrap();
        let phi = Germ::monomial(one(), &[2, 1], &[1, 0]);
        assert!(bs_condition(&phi, &ideal, 2).passes);
        let cert = bs_certificate(&phi, &ideal, 2).unwrap();
        assert_eq!(cert.expand(&ideal), phi);
        let z1 = MonomialIdeal::new(1, vec![vec![1]]).unwrap();
        let cert = bs_certificate(&Germ::monomial(one(), &[1], &[0]), &z1, 1).unwrap();
        assert_eq!(cert.xi[&vec![1]], Germ::monomial(one(), &[0], &[0]));
        assert!(matches!(
            bs_certificate(&Germ::monomial(one(), &[0], &[1]), &z1, 1),
            Err(MembershipError::NoDivisor { .. })
        ));
    }

    #[test]
    fn minimal_generators_are_enforced() {
        assert!(MonomialIdeal::new(2, vec![vec![1, 0], vec![1, 1]]).is_err());
        let m = MonomialIdeal::minimal(2, vec![vec![1, 0], vec![1, 1], vec![0, 3]]).unwrap();
        assert_eq!(m.generators(), &[vec![0, 3], vec![1, 0]]);
        assert_eq!(m.mu(), 2);
    }

    #[test]
    fn annihilation_examples() {
        for (a, b, expect) in [(0, 1, true), (3, 0, true), (2, 0, false)] {
            let term = GermTerm::new(one(), &[a], &[b]);
            let res = annihilation_test(&term, &[1], 3).unwrap();
            assert_eq!(res.annihilates, expect);
            let v = res.pairing.unwrap().limit().unwrap();
            if expect {
                assert!(v.norm() <= 1e-3, "{v}");
            } else {
                assert!((v - 1.0).norm() <= 1e-3, "{v}");
            }
        }
        // several variables: every pole variable must be handled
        let term = GermTerm::new(one(), &[1, 0], &[0, 0]);
        assert!(!annihilates(&term, &[1, 1], 1));
        assert!(annihilates(&GermTerm::new(one(), &[1, 0], &[0, 1]), &[1, 1], 1));
    }

    #[test]
    fn residue_membership_examples() {
        let r = residue_membership(&Germ::monomial(one(), &[1], &[1]), &[1], 2).unwrap();
        assert!(!r.member);
        let r = residue_membership(&Germ::monomial(one(), &[2], &[3]), &[1], 2).unwrap();
        assert!(r.member);
        assert_eq!(r.quotient.unwrap(), Germ::monomial(one(), &[0], &[3]));
        let r = residue_membership(&Germ::monomial(one(), &[0], &[2]), &[1], 1).unwrap();
        assert!(!r.member);
    }
}
