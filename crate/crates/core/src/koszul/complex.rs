use crate::forms::{Form, HomForm, Parity};
use crate::poly::Poly;
use crate::symbolic::{Point, C64};

use super::KoszulError;

/// Subsets of `{0, .., m-1}` of size `k` as bitsets, in lexicographic order.
pub fn subsets(m: usize, k: usize) -> Vec<u64> {
    fn rec(start: usize, m: usize, k: usize, acc: u64, out: &mut Vec<u64>) {
        if k == 0 {
            out.push(acc);
            return;
        }
        for i in start..m {
            if m - i < k {
                break;
            }
            rec(i + 1, m, k - 1, acc | (1 << i), out);
        }
    }
    let mut out = Vec::new();
    if k <= m {
        rec(0, m, k, 0, &mut out);
    }
    out
}

/// Bounded complex `0 -> E_N -> ... -> E_1 -> E_0` of trivial bundles with
/// polynomial maps; `maps[k - 1]` is `f_k : E_k -> E_{k-1}` stored as a
/// `rank(k-1) x rank(k)` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSpec {
    pub nvars: usize,
    pub ranks: Vec<usize>,
    pub maps: Vec<Vec<Vec<Poly>>>,
}

impl ComplexSpec {
    pub fn new(nvars: usize, ranks: Vec<usize>, maps: Vec<Vec<Vec<Poly>>>) -> Result<Self, KoszulError> {
        if ranks.len() != maps.len() + 1 {
            return Err(KoszulError::Shape("need one map per consecutive pair of ranks".into()));
        }
        for (k, f) in maps.iter().enumerate() {
            if f.len() != ranks[k] || f.iter().any(|row| row.len() != ranks[k + 1]) {
                return Err(KoszulError::Shape(format!("f_{} has the wrong shape", k + 1)));
            }
            if f.iter().flatten().any(|p| p.nvars() != nvars) {
                return Err(KoszulError::Shape(format!("f_{} has the wrong arity", k + 1)));
            }
        }
        Ok(ComplexSpec { nvars, ranks, maps })
    }

    pub fn length(&self) -> usize {
        self.maps.len()
    }

    /// `f_k` at `zeta` (or at the base point `z` when `at_base`) as an odd
    /// operator with 0-form entries.
    pub fn map(&self, k: usize, at_base: bool) -> HomForm {
        let f = &self.maps[k - 1];
        HomForm::from_fn(self.ranks[k - 1], self.ranks[k], self.nvars, Parity::Odd, |i, j| {
            let e = if at_base { f[i][j].at_base() } else { f[i][j].to_expr() };
            Form::scalar(self.nvars, e)
        })
    }

    /// Largest entry of `f_k f_{k+1}` over the sample points.
    pub fn complex_residual(&self, samples: &[Vec<C64>]) -> Result<f64, KoszulError> {
        let mut worst: f64 = 0.0;
        for k in 1..self.length() {
            let prod = self.map(k, false).compose(&self.map(k + 1, false))?;
            for s in samples {
                worst = worst.max(prod.max_abs(&Point::new(s, &[]))?);
            }
        }
        Ok(worst)
    }
}

/// Koszul complex of `a = (a_1, .., a_m)`: `E_k` is spanned by `e_J`,
/// `|J| = k`, and `f_k e_J = sum_p (-1)^p a_{j_p} e_{J \ j_p}`.
pub fn koszul_complex(a: &[Poly]) -> Result<ComplexSpec, KoszulError> {
    let m = a.len();
    if m == 0 {
        return Err(KoszulError::Empty);
    }
    let nvars = a[0].nvars();
    if a.iter().any(|p| p.nvars() != nvars) {
        return Err(KoszulError::Shape("generators with different arity".into()));
    }
    if a.iter().any(|p| !p.is_holomorphic()) {
        return Err(KoszulError::NotHolomorphic);
    }
    let ranks: Vec<usize> = (0..=m).map(|k| subsets(m, k).len()).collect();
    let mut maps = Vec::with_capacity(m);
    for k in 1..=m {
        let rows = subsets(m, k - 1);
        let cols = subsets(m, k);
        let mut f = vec![vec![Poly::zero(nvars); cols.len()]; rows.len()];
        for (c, &set) in cols.iter().enumerate() {
            for (p, j) in bits(set).enumerate() {
                let r = rows.iter().position(|&s| s == set & !(1 << j)).unwrap();
                let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
                f[r][c] = a[j].scale(C64::new(sign, 0.0));
            }
        }
        maps.push(f);
    }
    ComplexSpec::new(nvars, ranks, maps)
}

pub(crate) fn bits(set: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| set & (1 << i) != 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lexicographic_subsets() {
        assert_eq!(subsets(3, 2), vec![0b011, 0b101, 0b110]);
        assert_eq!(subsets(2, 0), vec![0]);
        assert!(subsets(2, 3).is_empty());
    }

    #[test]
    fn two_generator_complex() {
        let a = [Poly::var(2, 0), Poly::var(2, 1)];
        let k = koszul_complex(&a).unwrap();
        assert_eq!(k.ranks, vec![1, 2, 1]);
        assert_eq!(k.maps[0][0], vec![a[0].clone(), a[1].clone()]);
        assert_eq!(k.maps[1][0][0], a[1].scale(C64::new(-1.0, 0.0)));
        assert_eq!(k.maps[1][1][0], a[0]);
        assert_eq!(koszul_complex(&a[..1]).unwrap().ranks, vec![1, 1]);
        assert!(matches!(koszul_complex(&[]), Err(KoszulError::Empty)));
    }

    #[test]
    fn three_generators_compose_to_zero() {
        let x = |i| Poly::var(2, i);
        let a = [x(0), x(1).pow(2), x(0).mul(&x(1)).add(&Poly::constant(2, C64::new(0.5, 1.0)))];
        let k = koszul_complex(&a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let samples: Vec<Vec<C64>> = (0..20)
            .map(|_| (0..2).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
            .collect();
        assert!(k.complex_residual(&samples).unwrap() <= 1e-12);
    }
}
