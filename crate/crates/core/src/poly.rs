//! Sparse polynomials in `zeta`, `conj(zeta)` and the base point `z`.

use std::collections::BTreeMap;
use std::fmt;

use crate::symbolic::{Expr, Point, SymbolicError, C64};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub zeta: Vec<u32>,
    pub zeta_bar: Vec<u32>,
    pub z: Vec<u32>,
}

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial { zeta: vec![0; n], zeta_bar: vec![0; n], z: vec![0; n] }
    }

    pub fn holomorphic(zeta: Vec<u32>) -> Self {
        let n = zeta.len();
        Monomial { zeta, zeta_bar: vec![0; n], z: vec![0; n] }
    }

    pub fn degree(&self) -> u32 {
        self.zeta.iter().chain(&self.zeta_bar).chain(&self.z).sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let add = |a: &[u32], b: &[u32]| a.iter().zip(b).map(|(x, y)| x + y).collect();
        Monomial {
            zeta: add(&self.zeta, &other.zeta),
            zeta_bar: add(&self.zeta_bar, &other.zeta_bar),
            z: add(&self.z, &other.z),
        }
    }

    fn to_expr(&self) -> Expr {
        let mut factors = Vec::new();
        for (j, &e) in self.zeta.iter().enumerate() {
            factors.push(Expr::coord(j).pow(e));
        }
        for (j, &e) in self.zeta_bar.iter().enumerate() {
            factors.push(Expr::coord_bar(j).pow(e));
        }
        for (j, &e) in self.z.iter().enumerate() {
            factors.push(Expr::param(j).pow(e));
        }
        Expr::product(factors)
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("polynomial depends on conj(zeta)")]
    NotHolomorphic,
    #[error("polynomial is not a single monomial")]
    NotMonomial,
    #[error("variable count mismatch: {0} vs {1}")]
    Arity(usize, usize),
}

/// Polynomial with complex coefficients; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, C64>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: C64) -> Self {
        Poly::zero(nvars).with_term(c, Monomial::one(nvars))
    }

    /// `zeta_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Poly::monomial(nvars, C64::new(1.0, 0.0), &e)
    }

    /// `c * zeta^exps`.
    pub fn monomial(nvars: usize, c: C64, exps: &[u32]) -> Self {
        assert_eq!(exps.len(), nvars);
        Poly::zero(nvars).with_term(c, Monomial::holomorphic(exps.to_vec()))
    }

    pub fn with_term(mut self, c: C64, m: Monomial) -> Self {
        self.add_term(c, m);
        self
    }

    pub fn add_term(&mut self, c: C64, m: Monomial) {
        assert_eq!(m.zeta.len(), self.nvars);
        let slot = self.terms.entry(m).or_insert(C64::new(0.0, 0.0));
        *slot += c;
        if *slot == C64::new(0.0, 0.0) {
            self.terms.retain(|_, v| *v != C64::new(0.0, 0.0));
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_holomorphic(&self) -> bool {
        self.terms.keys().all(|m| m.zeta_bar.iter().all(|&e| e == 0))
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Single holomorphic monomial: `(coeff, exponents)`.
    pub fn as_monomial(&self) -> Result<(C64, Vec<u32>), PolyError> {
        if !self.is_holomorphic() {
            return Err(PolyError::NotHolomorphic);
        }
        let mut it = self.terms.iter();
        match (it.next(), it.next()) {
            (Some((m, c)), None) if m.z.iter().all(|&e| e == 0) => Ok((*c, m.zeta.clone())),
            _ => Err(PolyError::NotMonomial),
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*c, m.clone());
        }
        out
    }

    pub fn scale(&self, c: C64) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, v) in &self.terms {
            out.add_term(v * c, m.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Poly::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(c1 * c2, m1.mul(m2));
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Poly {
        (0..k).fold(Poly::constant(self.nvars, C64::new(1.0, 0.0)), |acc, _| acc.mul(self))
    }

    /// Exact `d/d conj(zeta_j)`.
    pub fn d_zeta_bar(&self, j: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            if m.zeta_bar[j] > 0 {
                let mut d = m.clone();
                d.zeta_bar[j] -= 1;
                out.add_term(c * m.zeta_bar[j] as f64, d);
            }
        }
        out
    }

    /// Exact `d/d zeta_j`.
    pub fn d_zeta(&self, j: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            if m.zeta[j] > 0 {
                let mut d = m.clone();
                d.zeta[j] -= 1;
                out.add_term(c * m.zeta[j] as f64, d);
            }
        }
        out
    }

    /// Highest total `conj(zeta)` degree.
    pub fn anti_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.zeta_bar.iter().sum()).max().unwrap_or(0)
    }

    /// Expression in `zeta`, `conj(zeta)` and `z`.
    pub fn to_expr(&self) -> Expr {
        Expr::sum(self.terms.iter().map(|(m, c)| m.to_expr().scale(*c)))
    }

    /// The polynomial with every `zeta_j` replaced by `z_j` (holomorphic input).
    pub fn at_base(&self) -> Expr {
        Expr::sum(self.terms.iter().map(|(m, c)| {
            let swapped = Monomial {
                zeta: vec![0; self.nvars],
                zeta_bar: m.zeta_bar.clone(),
                z: m.z.iter().zip(&m.zeta).map(|(a, b)| a + b).collect(),
            };
            swapped.to_expr().scale(*c)
        }))
    }

    pub fn eval(&self, coords: &[C64], params: &[C64]) -> Result<C64, SymbolicError> {
        self.to_expr().eval(&Point::new(coords, params))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut s = format!("({c})");
                let mut push = |name: &str, exps: &[u32]| {
                    for (j, &e) in exps.iter().enumerate() {
                        match e {
                            0 => {}
                            1 => s.push_str(&format!("*{name}{}", j + 1)),
                            _ => s.push_str(&format!("*{name}{}^{e}", j + 1)),
                        }
                    }
                };
                push("zeta", &m.zeta);
                push("zetabar", &m.zeta_bar);
                push("z", &m.z);
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
