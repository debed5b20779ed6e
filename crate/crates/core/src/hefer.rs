//! Hefer decompositions and Hefer forms for Koszul complexes.
//!
//! A Hefer form `H^l_k : E_k -> E_l` of bidegree `(k - l, 0)` satisfies
//! `nabla H^l_k = H^l_{k-1} f_k - f_{l+1}(z) H^{l+1}_k`, where `nabla` acts on
//! entries and compositions follow the graded rules of [`HomForm`].

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::forms::{Form, FormError, HomForm, Parity};
use crate::koszul::{koszul_complex, subsets, ComplexSpec, KoszulError};
use crate::poly::{Monomial, Poly};
use crate::symbolic::{Expr, Point, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeferError {
    #[error("Hefer decomposition needs a holomorphic polynomial")]
    NotHolomorphic,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("constructed Hefer forms fail the identity: {0}")]
    Verification(String),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Koszul(#[from] KoszulError),
}

/// Returns `h_1..h_N` in `(zeta, z)` with `p(zeta) - p(z) = sum_i h_i (zeta_i - z_i)`,
/// obtained by replacing `zeta_1, zeta_2, ..` by `z_1, z_2, ..` one at a time.
pub fn hefer_decompose(p: &Poly) -> Result<Vec<Poly>, HeferError> {
    if !p.is_holomorphic() {
        return Err(HeferError::NotHolomorphic);
    }
    let n = p.nvars();
    let mut h = vec![Poly::zero(n); n];
    for (m, &c) in p.terms() {
        for i in 0..n {
            let k = m.zeta[i];
            if k == 0 {
                continue;
            }
            // variables before i already moved to z, after i still in zeta
            let mut base = Monomial::one(n);
            for j in 0..n {
                if j < i {
                    base.z[j] = m.zeta[j] + m.z[j];
                } else if j > i {
                    base.zeta[j] = m.zeta[j];
                    base.z[j] = m.z[j];
                } else {
                    base.z[j] = m.z[j];
                }
            }
            // (zeta^k - z^k) / (zeta - z) = sum_j zeta^j z^{k-1-j}
            for j in 0..k {
                let mut t = base.clone();
                t.zeta[i] += j;
                t.z[i] += k - 1 - j;
                h[i].add_term(c, t);
            }
        }
    }
    Ok(h)
}

/// Hefer forms `H^l_k` for `0 <= l <= k <= N`.
#[derive(Clone, Debug)]
pub struct HeferCollection {
    nvars: usize,
    ranks: Vec<usize>,
    forms: BTreeMap<(usize, usize), HomForm>,
}

impl HeferCollection {
    /// Builds a collection from explicit off-diagonal entries; the diagonal
    /// is the identity.
    pub fn new(
        nvars: usize,
        ranks: Vec<usize>,
        off_diagonal: BTreeMap<(usize, usize), HomForm>,
    ) -> Result<Self, HeferError> {
        for (&(l, k), h) in &off_diagonal {
            if l >= k || k >= ranks.len() || h.rows() != ranks[l] || h.cols() != ranks[k] {
                return Err(HeferError::Shape(format!("H^{l}_{k}")));
            }
        }
        Ok(HeferCollection { nvars, ranks, forms: off_diagonal })
    }

    pub fn length(&self) -> usize {
        self.ranks.len() - 1
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// `H^l_k`: identity when `l == k`, zero when `k < l` or absent.
    pub fn get(&self, l: usize, k: usize) -> HomForm {
        if l == k {
            return HomForm::identity(self.ranks[l], self.nvars);
        }
        match self.forms.get(&(l, k)) {
            Some(h) if k > l => h.clone(),
            _ => HomForm::zero(self.ranks[l], self.ranks[k], self.nvars, Parity::Even),
        }
    }

    pub fn set(&mut self, l: usize, k: usize, h: HomForm) {
        self.forms.insert((l, k), h);
    }
}

/// Hefer forms of the Koszul complex of `a`, built as `H = exp(h)` where
/// `h = sum_j h_j iota_j` with `h_j = (1/2 pi i) sum_i h_{ji} dzeta_i` from
/// [`hefer_decompose`] and `iota_j` the contraction with `e_j^*`.
/// Verified at construction.
pub fn koszul_hefer(a: &[Poly]) -> Result<HeferCollection, HeferError> {
    let complex = koszul_complex(a)?;
    let n = complex.nvars;
    let m = a.len();
    let one_forms: Vec<Form> = a
        .iter()
        .map(|aj| {
            let hj = hefer_decompose(aj)?;
            let coeffs: Vec<Expr> = hj.iter().map(|p| p.to_expr().mul(&Expr::inv_two_pi_i())).collect();
            Ok(Form::holo_one_form(n, &coeffs))
        })
        .collect::<Result<_, HeferError>>()?;
    // h : E_k -> E_{k-1}, even
    let step = |k: usize| -> HomForm {
        let rows = subsets(m, k - 1);
        let cols = subsets(m, k);
        let mut h = HomForm::zero(rows.len(), cols.len(), n, Parity::Even);
        for (c, &set) in cols.iter().enumerate() {
            for (p, j) in (0..m).filter(|j| set & (1 << j) != 0).enumerate() {
                let r = rows.iter().position(|&s| s == set & !(1 << j)).unwrap();
                let f = if p % 2 == 0 { one_forms[j].clone() } else { one_forms[j].neg() };
                h.set(r, c, f);
            }
        }
        h
    };
    let mut coll = HeferCollection::new(n, complex.ranks.clone(), BTreeMap::new())?;
    for l in 0..m {
        let mut acc = HomForm::identity(complex.ranks[l], n);
        for k in l + 1..=m {
            let scale = Expr::real(1.0 / (k - l) as f64);
            acc = acc.compose(&step(k))?.scale(&scale);
            coll.set(l, k, acc.clone());
        }
    }
    let samples = sample_points(n, 20, 0x4EFE);
    let report = verify_hefer(&coll, &complex, &samples)?;
    if !report.pass {
        return Err(HeferError::Verification(report.to_string()));
    }
    Ok(coll)
}

/// Deterministic pseudo-random `(zeta, z)` pairs in the polydisc of radius 1.
pub fn sample_points(n: usize, count: usize, seed: u64) -> Vec<(Vec<C64>, Vec<C64>)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    (0..count).map(|_| (draw(), draw())).collect()
}

pub const HEFER_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct HeferReport {
    pub max_residual: f64,
    /// `(l, k, row, col, sample)` of the largest residual.
    pub worst: Option<(usize, usize, usize, usize, usize)>,
    pub tolerance: f64,
    pub pass: bool,
}

impl fmt::Display for HeferReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "max residual {:.3e} (tolerance {:.0e})", self.max_residual, self.tolerance)?;
        if let Some((l, k, i, j, s)) = self.worst {
            write!(f, " at H^{l}_{k} entry ({i},{j}), sample {s}")?;
        }
        Ok(())
    }
}

/// Residual of `nabla H^l_k - (H^l_{k-1} f_k - f_{l+1}(z) H^{l+1}_k)` over all
/// `l <= k` and sample points.
pub fn verify_hefer(
    h: &HeferCollection,
    complex: &ComplexSpec,
    samples: &[(Vec<C64>, Vec<C64>)],
) -> Result<HeferReport, HeferError> {
    if h.ranks != complex.ranks || h.nvars != complex.nvars {
        return Err(HeferError::Shape("Hefer collection does not match the complex".into()));
    }
    let n = complex.nvars;
    let top = complex.length();
    let base: Vec<Expr> = (0..n).map(Expr::param).collect();
    let mut report = HeferReport { max_residual: 0.0, worst: None, tolerance: HEFER_TOLERANCE, pass: true };
    for l in 0..=top {
        for k in l..=top {
            let lhs = h.get(l, k).nabla(&base)?;
            let mut rhs = HomForm::zero(complex.ranks[l], complex.ranks[k], n, Parity::Odd);
            if k >= 1 && k > l {
                rhs = rhs.add(&h.get(l, k - 1).compose(&complex.map(k, false))?)?;
            }
            if l < top {
                rhs = rhs.sub(&complex.map(l + 1, true).compose(&h.get(l + 1, k))?)?;
            }
            let diff = lhs.sub(&rhs)?;
            for (s, (cs, ps)) in samples.iter().enumerate() {
                let pt = Point::new(cs, ps);
                for i in 0..diff.rows() {
                    for j in 0..diff.cols() {
                        let r = diff.get(i, j).max_abs(&pt).map_err(FormError::from)?;
                        if r > report.max_residual {
                            report.max_residual = r;
                            report.worst = Some((l, k, i, j, s));
                        }
                    }
                }
            }
        }
    }
    report.pass = report.max_residual <= report.tolerance;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(p: &Poly, cs: &[C64], ps: &[C64]) -> C64 {
        p.eval(cs, ps).unwrap()
    }

    #[test]
    fn telescoping_examples() {
        let x = |i| Poly::var(2, i);
        let h = hefer_decompose(&x(0)).unwrap();
        assert_eq!(h[0], Poly::constant(2, C64::new(1.0, 0.0)));
        assert!(h[1].is_zero());
        let h = hefer_decompose(&x(0).mul(&x(1))).unwrap();
        assert_eq!(h[0], x(1));
        assert_eq!(h[1], Poly::zero(2).with_term(C64::new(1.0, 0.0), Monomial { zeta: vec![0, 0], zeta_bar: vec![0, 0], z: vec![1, 0] }));
        assert!(hefer_decompose(&Poly::constant(2, C64::new(3.0, 0.0))).unwrap().iter().all(Poly::is_zero));
        let bar = Poly::zero(1).with_term(C64::new(1.0, 0.0), Monomial { zeta: vec![0], zeta_bar: vec![1], z: vec![0] });
        assert_eq!(hefer_decompose(&bar), Err(HeferError::NotHolomorphic));
    }

    #[test]
    fn decomposition_is_exact() {
        let x = |i| Poly::var(3, i);
        let p = x(0).pow(4).add(&x(1).mul(&x(2)).pow(2).scale(C64::new(0.0, 2.0))).add(&x(2).scale(C64::new(-1.5, 0.0)));
        let h = hefer_decompose(&p).unwrap();
        for (cs, ps) in sample_points(3, 50, 11) {
            let lhs = eval(&p, &cs, &[]) - eval(&p, &ps, &[]);
            let rhs: C64 = (0..3).map(|i| eval(&h[i], &cs, &ps) * (cs[i] - ps[i])).sum();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn koszul_hefer_shapes_and_identity() {
        let a = [Poly::var(2, 0), Poly::var(2, 1)];
        let h = koszul_hefer(&a).unwrap();
        assert_eq!(h.ranks(), &[1, 2, 1]);
        assert_eq!(h.get(0, 1).get(0, 0).bidegrees(), vec![(1, 0)]);
        assert_eq!(h.get(0, 2).get(0, 0).bidegrees(), vec![(2, 0)]);
        assert!(h.get(2, 0).is_zero());
        let one = koszul_hefer(&a[..1]).unwrap();
        let entry = one.get(0, 1).get(0, 0).coeff(1, 0);
        let cs = [C64::new(0.3, 0.0), C64::new(0.0, 0.0)];
        let v = entry.eval(&Point::new(&cs, &cs)).unwrap();
        assert!((v - Expr::inv_two_pi_i().as_const().unwrap()).norm() < 1e-15);
    }

    #[test]
    fn perturbation_is_localized() {
        let x = |i| Poly::var(2, i);
        let a = [x(0).pow(2), x(0).mul(&x(1)).add(&x(1).pow(3))];
        let complex = koszul_complex(&a).unwrap();
        let mut h = koszul_hefer(&a).unwrap();
        let samples = sample_points(2, 10, 3);
        assert!(verify_hefer(&h, &complex, &samples).unwrap().pass);
        let mut bad = h.get(0, 1);
        let shifted = bad.get(0, 1).add(&Form::dzeta(2, 0).scale(&Expr::real(1e-3))).unwrap();
        bad.set(0, 1, shifted);
        h.set(0, 1, bad);
        let report = verify_hefer(&h, &complex, &samples).unwrap();
        assert!(!report.pass);
        let (l, k, _, _, _) = report.worst.unwrap();
        assert!((l, k) == (0, 1) || (l, k) == (0, 2));
    }
}
