//! Limits of regularized values `v(eps) = L + C eps^p + ...` as `eps -> 0`.

use std::fmt;

use thiserror::Error;

use crate::symbolic::C64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtrapolationError {
    #[error("need at least three ladder values, got {0}")]
    TooShort(usize),
    #[error("ladder does not converge (fitted rate {rate:.3e}, values {values:?})")]
    NonConvergent { rate: f64, values: Vec<C64> },
    #[error("non-finite ladder value")]
    NonFinite,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Extrapolation {
    pub limit: C64,
    /// Fitted exponent `p`; infinite for a constant ladder.
    pub rate: f64,
    pub coefficient: C64,
    /// Root-mean-square misfit of the model over the ladder.
    pub residual: f64,
    /// Error estimate: fit residual plus the distance between the limit and
    /// the limit obtained without the largest `eps`.
    pub error: f64,
}

impl fmt::Display for Extrapolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "limit {:.10e}{:+.10e}i, rate {:.3}, residual {:.2e}, error {:.2e}",
            self.limit.re, self.limit.im, self.rate, self.residual, self.error
        )
    }
}

const MIN_RATE: f64 = 0.02;
const MAX_RATE: f64 = 6.0;
const ROUNDOFF_FLOOR: f64 = 1e-14;

/// Least-squares fit of `L + C x` with `x = eps^p`.
fn linear_fit(x: &[f64], v: &[C64]) -> (C64, C64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let mv = v.iter().sum::<C64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
    let sxv: C64 = x.iter().zip(v).map(|(xi, vi)| (xi - mx) * (vi - mv)).sum();
    let c = if sxx > 0.0 { sxv / sxx } else { C64::new(0.0, 0.0) };
    let l = mv - c * mx;
    let rss: f64 = x.iter().zip(v).map(|(xi, vi)| (vi - l - c * xi).norm_sqr()).sum();
    (l, c, (rss / n).sqrt())
}

fn fit(eps: &[f64], v: &[C64]) -> (f64, C64, C64, f64) {
    let eval = |p: f64| {
        let x: Vec<f64> = eps.iter().map(|e| e.powf(p)).collect();
        let (l, c, r) = linear_fit(&x, v);
        (r, l, c)
    };
    // coarse log-spaced scan, then golden-section refinement
    let grid: Vec<f64> = (0..=200).map(|k| MIN_RATE * (MAX_RATE / MIN_RATE).powf(k as f64 / 200.0)).collect();
    let mut best = 0;
    for (k, &p) in grid.iter().enumerate() {
        if eval(p).0 < eval(grid[best]).0 {
            best = k;
        }
    }
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(grid.len() - 1)]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if eval(c).0 < eval(d).0 {
            b = d;
        } else {
            a = c;
        }
    }
    let p = 0.5 * (a + b);
    let (r, l, c) = eval(p);
    (p, l, c, r)
}

/// Fits `v(eps) = L + C eps^p` to a ladder; `eps` in any order.
pub fn extrapolate(eps: &[f64], values: &[C64]) -> Result<Extrapolation, ExtrapolationError> {
    if eps.len() < 3 || eps.len() != values.len() {
        return Err(ExtrapolationError::TooShort(eps.len().min(values.len())));
    }
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(ExtrapolationError::NonFinite);
    }
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let spread = values.iter().map(|v| (v - values[0]).norm()).fold(0.0, f64::max);
    // values at roundoff level count as constant (zero)
    if spread <= (1e-13 * scale).max(ROUNDOFF_FLOOR) {
        let mean = values.iter().sum::<C64>() / values.len() as f64;
        return Ok(Extrapolation {
            limit: mean,
            rate: f64::INFINITY,
            coefficient: C64::new(0.0, 0.0),
            residual: spread,
            error: spread,
        });
    }
    let (p, l, c, r) = fit(eps, values);
    if p <= MIN_RATE * 1.0001 {
        return Err(ExtrapolationError::NonConvergent { rate: p, values: values.to_vec() });
    }
    // stability: refit without the largest eps
    let largest = (0..eps.len()).max_by(|&a, &b| eps[a].partial_cmp(&eps[b]).unwrap()).unwrap();
    let (e2, v2): (Vec<f64>, Vec<C64>) =
        eps.iter().zip(values).enumerate().filter(|(k, _)| *k != largest).map(|(_, (e, v))| (*e, *v)).unzip();
    let drift = if e2.len() >= 3 {
        (fit(&e2, &v2).1 - l).norm()
    } else {
        let x: Vec<f64> = e2.iter().map(|e| e.powf(p)).collect();
        (linear_fit(&x, &v2).0 - l).norm()
    };
    Ok(Extrapolation { limit: l, rate: p, coefficient: c, residual: r, error: r + drift })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ladder() -> Vec<f64> {
        (0..4).map(|k| 1e-2 * 0.25f64.powi(k)).collect()
    }

    #[test]
    fn recovers_power_laws() {
        let eps = ladder();
        for (l, c, p) in [(1.0, 3.0, 1.0), (-0.5, 0.2, 0.5), (2.0, -1.0, 1.0 / 3.0)] {
            let v: Vec<C64> = eps.iter().map(|e| C64::new(l + c * e.powf(p), 0.5 * l)).collect();
            let x = extrapolate(&eps, &v).unwrap();
            assert!((x.limit - C64::new(l, 0.5 * l)).norm() < 1e-9, "{x}");
            assert!((x.rate - p).abs() < 1e-4);
        }
    }

    #[test]
    fn constant_and_divergent_ladders() {
        let eps = ladder();
        let v = vec![C64::new(0.25, 0.0); 4];
        let x = extrapolate(&eps, &v).unwrap();
        assert_eq!(x.rate, f64::INFINITY);
        assert_eq!(x.limit, v[0]);
        let log: Vec<C64> = eps.iter().map(|e| C64::new(e.ln(), 0.0)).collect();
        assert!(matches!(extrapolate(&eps, &log), Err(ExtrapolationError::NonConvergent { .. })));
        assert!(extrapolate(&eps[..2], &v[..2]).is_err());
    }

    #[test]
    fn second_order_terms_are_tolerated() {
        let eps = ladder();
        let v: Vec<C64> = eps.iter().map(|e| C64::new(1.0 + 2.0 * e + 5.0 * e * e, 0.0)).collect();
        let x = extrapolate(&eps, &v).unwrap();
        assert!((x.limit.re - 1.0).abs() <= x.error, "{x}");
        assert!(x.error < 1e-4);
    }
}
