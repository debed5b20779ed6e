//! Almost holomorphic extensions to the doubled space and the field `Phi^z`.
//!
//! The doubled space has coordinates `(zeta_1, .., zeta_n, omega_1, .., omega_n)`
//! where `omega_j` is coordinate `n + j`. Smooth data `phi(zeta)` is extended
//! to `phi~(zeta, omega) = sum_{|alpha| <= K} d^alpha_{zetabar} phi(zeta) (omega - zetabar)^alpha / alpha!`,
//! which restricts to `phi` on `omega = conj(zeta)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::forms::{Form, FormError};
use crate::kernels::{doubled_bm, KernelError};
use crate::poly::Poly;
use crate::symbolic::{partial, simplify, Atom, Expr, Point, SymbolicError, Var, C64};

#[derive(Debug, Error)]
pub enum ExtensionError {
    #[error("extension order {requested} exceeds the available derivative order {available}")]
    OrderTooHigh { requested: u32, available: u32 },
    #[error("dbar of the extension vanishes to order {vanishing}, the kernel needs {required}")]
    InsufficientOrder { vanishing: u32, required: u32 },
    #[error("germs live in {got} variables, expected {expected}")]
    Arity { got: usize, expected: usize },
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Smooth data near the origin of `C^n`.
#[derive(Clone, Debug)]
pub enum SmoothGerm {
    /// Polynomial in `zeta`, `conj(zeta)`; derivatives of every order are exact.
    Poly(Poly),
    /// Atom-backed expression in `zeta`, `conj(zeta)`, differentiable up to `max_order`.
    Expr { nvars: usize, expr: Expr, max_order: u32 },
}

impl SmoothGerm {
    pub fn nvars(&self) -> usize {
        match self {
            SmoothGerm::Poly(p) => p.nvars(),
            SmoothGerm::Expr { nvars, .. } => *nvars,
        }
    }

    /// `None` when derivatives of every order are available.
    pub fn max_order(&self) -> Option<u32> {
        match self {
            SmoothGerm::Poly(_) => None,
            SmoothGerm::Expr { max_order, .. } => Some(*max_order),
        }
    }

    pub fn expr(&self) -> Expr {
        match self {
            SmoothGerm::Poly(p) => p.to_expr(),
            SmoothGerm::Expr { expr, .. } => expr.clone(),
        }
    }

    /// `d^alpha phi / d conj(zeta)^alpha`, simplified.
    pub fn anti_derivative(&self, alpha: &[u32]) -> Result<Expr, ExtensionError> {
        match self {
            SmoothGerm::Poly(p) => {
                let mut d = p.clone();
                for (j, &a) in alpha.iter().enumerate() {
                    for _ in 0..a {
                        d = d.d_zeta_bar(j);
                    }
                }
                Ok(d.to_expr())
            }
            SmoothGerm::Expr { expr, .. } => {
                let mut d = expr.clone();
                for (j, &a) in alpha.iter().enumerate() {
                    for _ in 0..a {
                        d = partial(&d, Var::coord_bar(j))?;
                    }
                }
                Ok(simplify(&d))
            }
        }
    }
}

/// All multi-indices of length `n` and total order `k`, lexicographically.
pub fn multi_indices(n: usize, k: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return if k == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in (0..=k).rev() {
        for mut rest in multi_indices(n - 1, k - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn factorial(alpha: &[u32]) -> f64 {
    alpha.iter().map(|&a| (1..=a).map(f64::from).product::<f64>()).product()
}

/// `(omega - conj(zeta))^alpha` on the doubled space.
fn offset_power(alpha: &[u32]) -> Expr {
    let n = alpha.len();
    Expr::product(alpha.iter().enumerate().map(|(j, &a)| (Expr::coord(n + j) - Expr::coord_bar(j)).pow(a)))
}

/// `|omega - conj(zeta)|^2`.
fn offset_norm2(n: usize) -> Expr {
    Expr::sum((0..n).map(|j| (Expr::coord(n + j) - Expr::coord_bar(j)).abs2()))
}

/// Cutoffs `chi(lambda_k |omega - conj(zeta)|)` applied to the order-`k` corrections.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesCutoff {
    /// `lambda_k` for `k = 0, 1, ..`; missing entries continue the last ratio.
    pub lambdas: Vec<f64>,
    /// `chi = 1` on `[0, inner]`, `0` beyond `outer`.
    pub inner: f64,
    pub outer: f64,
}

impl Default for SeriesCutoff {
    fn default() -> Self {
        SeriesCutoff { lambdas: (0..8).map(|k| 2f64.powi(k)).collect(), inner: 0.5, outer: 1.0 }
    }
}

impl SeriesCutoff {
    pub fn lambda(&self, k: u32) -> f64 {
        let k = k as usize;
        match self.lambdas.len() {
            0 => 2f64.powi(k as i32),
            1 => self.lambdas[0],
            len if k < len => self.lambdas[k],
            len => {
                let ratio = self.lambdas[len - 1] / self.lambdas[len - 2];
                self.lambdas[len - 1] * ratio.powi((k - len + 1) as i32)
            }
        }
    }

    fn factor(&self, n: usize, k: u32) -> Expr {
        let l2 = self.lambda(k).powi(2);
        Expr::apply(Atom::cutoff(self.inner * self.inner, self.outer * self.outer), offset_norm2(n).scale(C64::new(l2, 0.0)))
    }
}

/// An extension `phi~` of a germ to the doubled space.
#[derive(Clone, Debug)]
pub struct AlmostHolomorphic {
    nvars: usize,
    order: u32,
    expr: Expr,
    /// Coefficients of `d conj(zeta_j)` in `dbar phi~` for the finite variant,
    /// kept in remainder form so evaluation near `omega = conj(zeta)` does not cancel.
    remainder: Option<Vec<Expr>>,
    /// Vanishing order of `dbar phi~` along `omega = conj(zeta)`; `None` if it is zero.
    vanishing: Option<u32>,
}

fn check_order(germ: &SmoothGerm, k: u32) -> Result<(), ExtensionError> {
    match germ.max_order() {
        Some(available) if k > available => Err(ExtensionError::OrderTooHigh { requested: k, available }),
        _ => Ok(()),
    }
}

/// Finite extension `sum_{|alpha| <= k} d^alpha phi (omega - conj(zeta))^alpha / alpha!`.
pub fn almost_holo_finite(germ: &SmoothGerm, k: u32) -> Result<AlmostHolomorphic, ExtensionError> {
    check_order(germ, k)?;
    let n = germ.nvars();
    let mut terms = Vec::new();
    for order in 0..=k {
        for alpha in multi_indices(n, order) {
            let d = germ.anti_derivative(&alpha)?;
            if !d.is_zero() {
                terms.push(d.scale(C64::new(1.0 / factorial(&alpha), 0.0)).mul(&offset_power(&alpha)));
            }
        }
    }
    // d/d conj(zeta_j) phi~ = sum_{|alpha| = k} d^{alpha + e_j} phi (omega - conj(zeta))^alpha / alpha!
    let mut remainder = vec![Expr::zero(); n];
    let mut any = false;
    for alpha in multi_indices(n, k) {
        let weight = C64::new(1.0 / factorial(&alpha), 0.0);
        for (j, slot) in remainder.iter_mut().enumerate() {
            let mut beta = alpha.clone();
            beta[j] += 1;
            let d = germ.anti_derivative(&beta)?;
            if !d.is_zero() {
                any = true;
                *slot = slot.add(&d.scale(weight).mul(&offset_power(&alpha)));
            }
        }
    }
    Ok(AlmostHolomorphic {
        nvars: n,
        order: k,
        expr: Expr::sum(terms),
        remainder: Some(remainder),
        vanishing: any.then_some(k),
    })
}

/// Truncated series with the order-`j` corrections localized by
/// `chi(lambda_j |omega - conj(zeta)|)`. Agrees with the finite extension where
/// every cutoff equals 1.
pub fn almost_holo_series(
    germ: &SmoothGerm,
    k: u32,
    cutoff: &SeriesCutoff,
) -> Result<AlmostHolomorphic, ExtensionError> {
    check_order(germ, k)?;
    let n = germ.nvars();
    let mut terms = Vec::new();
    let mut top_nonzero = false;
    for order in 0..=k {
        let chi = cutoff.factor(n, order);
        for alpha in multi_indices(n, order) {
            let d = germ.anti_derivative(&alpha)?;
            if !d.is_zero() {
                let t = d.scale(C64::new(1.0 / factorial(&alpha), 0.0)).mul(&offset_power(&alpha));
                terms.push(if order == 0 { t } else { t.mul(&chi) });
            }
        }
    }
    for alpha in multi_indices(n, k) {
        for j in 0..n {
            let mut beta = alpha.clone();
            beta[j] += 1;
            top_nonzero |= !germ.anti_derivative(&beta)?.is_zero();
        }
    }
    Ok(AlmostHolomorphic {
        nvars: n,
        order: k,
        expr: Expr::sum(terms),
        remainder: None,
        vanishing: top_nonzero.then_some(k),
    })
}

impl AlmostHolomorphic {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// `phi~` as an expression over the doubled coordinates.
    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    /// Vanishing order of `dbar phi~` along `omega = conj(zeta)`; `None` when
    /// `dbar phi~` is identically zero.
    pub fn vanishing(&self) -> Option<u32> {
        self.vanishing
    }

    /// `dbar phi~` as a `(0,1)`-form on the doubled space.
    pub fn dbar(&self) -> Result<Form, ExtensionError> {
        let dim = 2 * self.nvars;
        if self.vanishing.is_none() {
            return Ok(Form::zero(dim));
        }
        match &self.remainder {
            Some(r) => {
                let mut coeffs = r.clone();
                coeffs.resize(dim, Expr::zero());
                Ok(Form::anti_one_form(dim, &coeffs))
            }
            None => Ok(Form::scalar(dim, self.expr.clone()).dbar()?),
        }
    }

    pub fn eval(&self, zeta: &[C64], omega: &[C64]) -> Result<C64, SymbolicError> {
        let coords: Vec<C64> = zeta.iter().chain(omega).copied().collect();
        self.expr.eval(&Point::new(&coords, &[]))
    }
}

/// Order of the pole of the doubled Bochner–Martinelli form: `2N - 1` with `N = 2n`.
pub fn kernel_singularity_order(n: usize) -> u32 {
    (4 * n - 1) as u32
}

/// `Phi^z = phi~ - dbar phi~ ∧ v^z` on the doubled space, one form per
/// component, with `v^z` the Bochner–Martinelli form at `(z, conj(z))`
/// (`z` enters as parameters). Fails when `dbar phi~` does not vanish to the
/// order needed to keep `Phi^z` bounded near the pole.
pub fn phi_field(components: &[AlmostHolomorphic]) -> Result<Vec<Form>, ExtensionError> {
    let Some(first) = components.first() else {
        return Ok(Vec::new());
    };
    let required = kernel_singularity_order(first.nvars);
    for c in components {
        if let Some(vanishing) = c.vanishing {
            if vanishing < required {
                return Err(ExtensionError::InsufficientOrder { vanishing, required });
            }
        }
    }
    phi_field_unchecked(components)
}

/// [`phi_field`] without the boundedness requirement.
pub fn phi_field_unchecked(components: &[AlmostHolomorphic]) -> Result<Vec<Form>, ExtensionError> {
    let Some(first) = components.first() else {
        return Ok(Vec::new());
    };
    let n = first.nvars;
    if let Some(c) = components.iter().find(|c| c.nvars != n) {
        return Err(ExtensionError::Arity { got: c.nvars, expected: n });
    }
    let mut kernel = None;
    components
        .iter()
        .map(|c| {
            let base = Form::scalar(2 * n, c.expr.clone());
            if c.vanishing.is_none() {
                return Ok(base);
            }
            let v = match &kernel {
                Some(v) => v,
                None => kernel.insert(doubled_bm(n)?),
            };
            Ok(base.sub(&c.dbar()?.wedge(v)?)?)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VanishingFit {
    /// Fitted exponent; infinite when every sample is exactly zero.
    pub order: f64,
    /// Root-mean-square misfit of the log-log regression.
    pub residual: f64,
}

/// Offsets `|omega - conj(zeta)|` used by [`vanishing_order`].
pub fn vanishing_offsets() -> Vec<f64> {
    (0..7).map(|k| 0.1 * 0.5f64.powi(k)).collect()
}

/// Log-log slope of `max |coefficient of f|` against `|omega - conj(zeta)|`
/// approaching the totally real diagonal, pooled over `samples` random
/// base points and directions.
pub fn vanishing_order(
    f: &Form,
    n: usize,
    params: &[C64],
    samples: usize,
    seed: u64,
) -> Result<VanishingFit, SymbolicError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offsets = vanishing_offsets();
    let mut series: Vec<Vec<(f64, f64)>> = Vec::new();
    for _ in 0..samples {
        let zeta: Vec<C64> = (0..n).map(|_| C64::new(rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4))).collect();
        let dir: Vec<C64> = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let norm = dir.iter().map(|d| d.norm_sqr()).sum::<f64>().sqrt().max(1e-12);
        let mut pts = Vec::new();
        for &t in &offsets {
            let coords: Vec<C64> =
                zeta.iter().copied().chain(zeta.iter().zip(&dir).map(|(z, d)| z.conj() + d * (t / norm))).collect();
            let v = f.max_abs(&Point::new(&coords, params))?;
            if v > 0.0 {
                pts.push((t.ln(), v.ln()));
            }
        }
        if pts.len() >= 2 {
            series.push(pts);
        }
    }
    if series.is_empty() {
        return Ok(VanishingFit { order: f64::INFINITY, residual: 0.0 });
    }
    // common slope, separate intercept per sample
    let (mut sxy, mut sxx) = (0.0, 0.0);
    let centered: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|pts| {
            let m = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
            pts.iter().map(|(x, y)| (x - mx, y - my)).collect()
        })
        .collect();
    for (x, y) in centered.iter().flatten() {
        sxy += x * y;
        sxx += x * x;
    }
    let slope = sxy / sxx;
    let count = centered.iter().map(Vec::len).sum::<usize>() as f64;
    let rss: f64 = centered.iter().flatten().map(|(x, y)| (y - slope * x).powi(2)).sum();
    Ok(VanishingFit { order: slope, residual: (rss / count).sqrt() })
}
