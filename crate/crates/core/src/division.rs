//! Division by weighted integral operators.
//!
//! For data `phi` in `E_l` with `f_l phi = 0` the operators
//!
//! `T_l phi(z) = sum_k int (H^{l+1}_k U^l_k Phi ∧ g)` and
//! `S_l phi(z) = sum_k int (H^l_k R^l_k Phi ∧ g)`
//!
//! give `phi(z) = f_{l+1}(z) T_l phi(z) + S_l phi(z)` for every regularization
//! `eps > 0`; `S_l phi` tends to 0 as `eps -> 0` whenever `R^l phi = 0`.
//! Holomorphic data is integrated over `C^n` with `Phi = phi`; smooth data
//! goes through the doubled space with `Phi = Phi^z` from [`crate::extension`].

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::extension::{almost_holo_finite, phi_field, ExtensionError, SmoothGerm};
use crate::extrapolate::{extrapolate, Extrapolation, ExtrapolationError};
use crate::forms::{Form, FormError, HomForm};
use crate::hefer::{koszul_hefer, HeferCollection, HeferError};
use crate::kernels::{doubled_base, holomorphic_base, KernelError, WeightSpec};
use crate::koszul::{koszul_complex, r_operator, u_operator, ComplexSpec, KoszulError};
use crate::poly::Poly;
use crate::quadrature::{integrate, Domain, QuadError, Rule, TapeIntegrand};
use crate::symbolic::{Expr, Point, SymbolicError, C64};

#[derive(Debug, Error)]
pub enum DivisionError {
    #[error("f_l phi does not vanish (residual {residual:.3e} at {point:?})")]
    Precondition { residual: f64, point: Vec<C64> },
    #[error("evaluation point {point:?} lies outside the region where the weight cutoff is 1")]
    PointOutside { point: Vec<C64> },
    #[error("eps = {eps:.3e} is below the squared node spacing {spacing:.3e}^2 near the singular set")]
    Unresolved { eps: f64, spacing: f64 },
    #[error("eps ladder does not converge at point {point}, output {output}: {source}")]
    NonConvergent { point: usize, output: usize, source: ExtrapolationError },
    #[error("level {level} out of range for a complex of length {length}")]
    Level { level: usize, length: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("growth fit residual {residual:.3e} exceeds {limit:.3e}")]
    PoorFit { residual: f64, limit: f64 },
    #[error(transparent)]
    Koszul(#[from] KoszulError),
    #[error(transparent)]
    Hefer(#[from] HeferError),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

#[derive(Clone, Debug)]
pub struct DivisionProblem {
    pub complex: ComplexSpec,
    pub hefer: HeferCollection,
    /// Generators whose Koszul currents supply `U` and `R`; `complex` must be
    /// their Koszul complex.
    pub generators: Vec<Poly>,
    pub weight: WeightSpec,
    /// Components of `phi` in `E_level`.
    pub data: Vec<SmoothGerm>,
    pub level: usize,
    pub points: Vec<Vec<C64>>,
    pub domain: Domain,
    pub rule: Rule,
    pub ladder: Vec<f64>,
    /// Order of the almost holomorphic extension used for smooth data.
    pub extension_order: u32,
}

impl DivisionProblem {
    /// Problem for the Koszul complex of `generators`, with the complex and
    /// its Hefer forms built here. Domain, rule and ladder get defaults.
    pub fn koszul(
        generators: Vec<Poly>,
        data: Vec<SmoothGerm>,
        level: usize,
        points: Vec<Vec<C64>>,
    ) -> Result<Self, DivisionError> {
        let complex = koszul_complex(&generators)?;
        let hefer = koszul_hefer(&generators)?;
        let n = complex.nvars;
        let weight = WeightSpec::ball(1.0);
        let doubled = data.iter().any(|g| !is_holomorphic(g));
        let dim = if doubled { 2 * n } else { n };
        Ok(DivisionProblem {
            complex,
            hefer,
            generators,
            domain: Domain::ball(dim, weight.support_radius()),
            weight,
            data,
            level,
            points,
            rule: default_rule(),
            ladder: default_ladder(),
            extension_order: 4 * n as u32 + 2,
        })
    }

    pub fn nvars(&self) -> usize {
        self.complex.nvars
    }

    /// Whether the doubled-space pipeline is needed.
    pub fn doubled(&self) -> bool {
        self.data.iter().any(|g| !is_holomorphic(g))
    }
}

/// Radially graded tensor rule resolving kernels near the origin.
pub fn default_rule() -> Rule {
    Rule { radial_grading: Some((0.5, 12)), radial_panels: 2, radial_breaks: vec![0.7, 0.95], ..Rule::tensor(8, 6, 12) }
}

/// `eps_k = 1e-4 4^{-k}`, `k = 0..4`.
pub fn default_ladder() -> Vec<f64> {
    (0..4).map(|k| 1e-4 * 0.25f64.powi(k)).collect()
}

fn is_holomorphic(g: &SmoothGerm) -> bool {
    match g {
        SmoothGerm::Poly(p) => p.is_holomorphic(),
        SmoothGerm::Expr { expr, .. } => !expr.has_coord_conj(),
    }
}

/// An output extrapolated along the eps ladder.
#[derive(Clone, Debug)]
pub struct LadderLimit {
    pub values: Vec<C64>,
    pub quadrature_errors: Vec<f64>,
    pub fit: Extrapolation,
}

impl LadderLimit {
    pub fn value(&self) -> C64 {
        self.fit.limit
    }

    /// Extrapolation error plus the largest quadrature error on the ladder.
    pub fn error(&self) -> f64 {
        self.fit.error + self.quadrature_errors.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct PointSolution {
    pub z: Vec<C64>,
    /// `T_l phi(z)`, one entry per basis vector of `E_{l+1}`.
    pub psi: Vec<LadderLimit>,
    /// `S_l phi(z)`, one entry per basis vector of `E_l`.
    pub residue: Vec<LadderLimit>,
    /// `phi(z)` evaluated directly from the data.
    pub phi: Vec<C64>,
    pub evaluations: usize,
}

impl PointSolution {
    pub fn psi_values(&self) -> Vec<C64> {
        self.psi.iter().map(LadderLimit::value).collect()
    }

    pub fn residue_values(&self) -> Vec<C64> {
        self.residue.iter().map(LadderLimit::value).collect()
    }
}

#[derive(Clone, Debug)]
pub struct DivisionSolution {
    pub doubled: bool,
    pub ladder: Vec<f64>,
    pub points: Vec<PointSolution>,
}

impl DivisionSolution {
    /// `max_i |phi_i(z) - (f_{l+1}(z) T_l phi(z))_i - S_l phi(z)_i|` per point.
    pub fn decomposition_residuals(&self, f_next: &[Vec<Poly>]) -> Result<Vec<f64>, DivisionError> {
        self.points
            .iter()
            .map(|p| {
                let image = apply_matrix(f_next, &p.z, &p.psi_values())?;
                Ok(image
                    .iter()
                    .zip(&p.phi)
                    .zip(p.residue_values())
                    .map(|((fi, phi), s)| (phi - fi - s).norm())
                    .fold(0.0, f64::max))
            })
            .collect()
    }

    /// Error bound of `(f_{l+1} T_l phi + S_l phi)_i` per point, maximized over `i`.
    pub fn error_bounds(&self, f_next: &[Vec<Poly>]) -> Result<Vec<f64>, DivisionError> {
        self.points
            .iter()
            .map(|p| {
                let mut bound = 0.0f64;
                for (i, row) in f_next.iter().enumerate() {
                    let mut b = p.residue.get(i).map_or(0.0, LadderLimit::error);
                    for (f, psi) in row.iter().zip(&p.psi) {
                        b += f.eval(&p.z, &[])?.norm() * psi.error();
                    }
                    bound = bound.max(b);
                }
                Ok(bound)
            })
            .collect()
    }
}

/// `f(z) v` for a polynomial matrix `f`.
pub fn apply_matrix(f: &[Vec<Poly>], z: &[C64], v: &[C64]) -> Result<Vec<C64>, DivisionError> {
    f.iter()
        .map(|row| {
            if row.len() != v.len() {
                return Err(DivisionError::Shape(format!("matrix row of length {} against {}", row.len(), v.len())));
            }
            row.iter().zip(v).try_fold(C64::new(0.0, 0.0), |acc, (p, x)| Ok(acc + p.eval(z, &[])? * x))
        })
        .collect()
}

fn eval_data(data: &[SmoothGerm], z: &[C64]) -> Result<Vec<C64>, DivisionError> {
    data.iter().map(|g| Ok(g.expr().eval(&Point::new(z, &[]))?)).collect()
}

fn check_annihilated(p: &DivisionProblem) -> Result<(), DivisionError> {
    if p.level == 0 {
        return Ok(());
    }
    let f = &p.complex.maps[p.level - 1];
    let n = p.nvars();
    let mut rng = ChaCha8Rng::seed_from_u64(0xD1_71DE);
    for _ in 0..20 {
        let zeta: Vec<C64> =
            (0..n).map(|_| C64::new(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6))).collect();
        let phi = eval_data(&p.data, &zeta)?;
        let image = apply_matrix(f, &zeta, &phi)?;
        let scale = phi.iter().map(|v| v.norm()).fold(1.0, f64::max);
        let residual = image.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if residual > 1e-10 * scale {
            return Err(DivisionError::Precondition { residual, point: zeta });
        }
    }
    Ok(())
}

fn domain_radius(domain: &Domain) -> f64 {
    match domain {
        Domain::Ball { radius, .. } | Domain::Sphere { radius, .. } => *radius,
        Domain::Shell { outer, .. } => *outer,
        Domain::Polydisc { radii, .. } | Domain::CircleProduct { radii, .. } => {
            radii.iter().copied().fold(0.0, f64::max)
        }
    }
}

fn sum_terms(terms: Vec<HomForm>) -> Result<Option<HomForm>, FormError> {
    let mut acc: Option<HomForm> = None;
    for t in terms {
        acc = Some(match acc {
            None => t,
            Some(a) => a.add(&t)?,
        });
    }
    Ok(acc)
}

/// Top-degree densities of `T_l phi` followed by those of `S_l phi` at
/// regularization `eps`, with `z` entering as parameters.
pub fn division_densities(p: &DivisionProblem, phi: &HomForm, g: &Form, eps: f64) -> Result<Vec<Expr>, DivisionError> {
    let dim = phi.dim();
    let (l, len) = (p.level, p.complex.length());
    let mut t_terms = Vec::new();
    for k in l + 1..=len {
        let h = p.hefer.get(l + 1, k).embed(dim);
        let u = u_operator(&p.generators, eps, l, k)?.embed(dim);
        t_terms.push(h.compose(&u)?.compose(phi)?);
    }
    let mut s_terms = Vec::new();
    for k in l..=len {
        let h = p.hefer.get(l, k).embed(dim);
        let r = r_operator(&p.generators, eps, l, k)?.embed(dim);
        s_terms.push(h.compose(&r)?.compose(phi)?);
    }
    let mut out = Vec::new();
    let top = dim as u32;
    for (op, rank) in [(sum_terms(t_terms)?, p.complex.ranks.get(l + 1).copied().unwrap_or(0)), (sum_terms(s_terms)?, p.complex.ranks[l])] {
        for i in 0..rank {
            let density = match &op {
                Some(m) => m.get(i, 0).wedge(g)?.component(top, top).top_density()?,
                None => Expr::zero(),
            };
            out.push(density);
        }
    }
    Ok(out)
}

/// `Phi` as a column: the data itself for holomorphic input, `Phi^z` otherwise.
pub fn data_field(p: &DivisionProblem) -> Result<HomForm, DivisionError> {
    let n = p.nvars();
    if p.doubled() {
        let exts = p
            .data
            .iter()
            .map(|g| almost_holo_finite(g, p.extension_order))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(HomForm::column(phi_field(&exts)?, 2 * n))
    } else {
        Ok(HomForm::column(p.data.iter().map(|g| Form::scalar(n, g.expr())).collect(), n))
    }
}

/// Solves the division problem at every evaluation point.
pub fn solve(p: &DivisionProblem) -> Result<DivisionSolution, DivisionError> {
    let len = p.complex.length();
    if p.level >= len {
        return Err(DivisionError::Level { level: p.level, length: len });
    }
    if p.data.len() != p.complex.ranks[p.level] {
        return Err(DivisionError::Shape(format!(
            "data has {} components, E_{} has rank {}",
            p.data.len(),
            p.level,
            p.complex.ranks[p.level]
        )));
    }
    check_annihilated(p)?;
    let n = p.nvars();
    let doubled = p.doubled();
    let dim = if doubled { 2 * n } else { n };
    if p.domain.dim() != dim {
        return Err(DivisionError::Shape(format!("domain of dimension {} for an integral over C^{dim}", p.domain.dim())));
    }
    for z in &p.points {
        let r2: f64 = z.iter().map(|c| c.norm_sqr()).sum::<f64>() * if doubled { 2.0 } else { 1.0 };
        if z.len() != n || r2.sqrt() >= p.weight.inner_radius() {
            return Err(DivisionError::PointOutside { point: z.clone() });
        }
    }
    let spacing = p.rule.radial_spacing(domain_radius(&p.domain), 2 * dim);
    if let Some(&eps) = p.ladder.iter().min_by(|a, b| a.total_cmp(b)) {
        if eps < spacing * spacing {
            return Err(DivisionError::Unresolved { eps, spacing });
        }
    }

    let base = if doubled { doubled_base(n) } else { holomorphic_base(n) };
    let g = p.weight.build(&base)?.form;
    let phi = data_field(p)?;
    let rungs: Vec<TapeIntegrand> = p
        .ladder
        .iter()
        .map(|&eps| Ok(TapeIntegrand::new(&division_densities(p, &phi, &g, eps)?, Vec::new())))
        .collect::<Result<_, DivisionError>>()?;
    let t_rank = p.complex.ranks[p.level + 1];

    let mut points = Vec::with_capacity(p.points.len());
    for (pi, z) in p.points.iter().enumerate() {
        let mut values: Vec<Vec<C64>> = Vec::new();
        let mut errors: Vec<Vec<f64>> = Vec::new();
        let mut evaluations = 0;
        for tape in &rungs {
            let r = integrate(&tape.with_params(z.clone()), &p.domain, &p.rule)?;
            evaluations += r.evaluations;
            values.push(r.values);
            errors.push(r.errors);
        }
        let outputs = values.first().map_or(0, Vec::len);
        let mut limits = Vec::with_capacity(outputs);
        for o in 0..outputs {
            let v: Vec<C64> = values.iter().map(|r| r[o]).collect();
            let e: Vec<f64> = errors.iter().map(|r| r[o]).collect();
            let fit = extrapolate(&p.ladder, &v)
                .map_err(|source| DivisionError::NonConvergent { point: pi, output: o, source })?;
            limits.push(LadderLimit { values: v, quadrature_errors: e, fit });
        }
        let residue = limits.split_off(t_rank);
        points.push(PointSolution { z: z.clone(), psi: limits, residue, phi: eval_data(&p.data, z)?, evaluations });
    }
    Ok(DivisionSolution { doubled, ladder: p.ladder.clone(), points })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualStats {
    pub max: f64,
    pub mean: f64,
    pub per_point: Vec<f64>,
}

/// Componentwise `|f(z) psi(z) - phi(z)|` statistics.
pub fn residual_report(
    f_next: &[Vec<Poly>],
    psi: &[Vec<C64>],
    phi: &[Vec<C64>],
    points: &[Vec<C64>],
) -> Result<ResidualStats, DivisionError> {
    let per_point = points
        .iter()
        .zip(psi)
        .zip(phi)
        .map(|((z, s), t)| {
            let image = apply_matrix(f_next, z, s)?;
            Ok(image.iter().zip(t).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
        })
        .collect::<Result<Vec<f64>, DivisionError>>()?;
    let max = per_point.iter().copied().fold(0.0, f64::max);
    let mean = if per_point.is_empty() { 0.0 } else { per_point.iter().sum::<f64>() / per_point.len() as f64 };
    Ok(ResidualStats { max, mean, per_point })
}

/// Least-squares solution of `f(z) psi = phi(z)`, the unique solution where
/// `f(z)` is injective.
pub fn pointwise_solution(f_next: &[Vec<Poly>], data: &[SmoothGerm], z: &[C64]) -> Result<Vec<C64>, DivisionError> {
    let rows = f_next.len();
    let cols = f_next.first().map_or(0, Vec::len);
    let mut m = DMatrix::<C64>::zeros(rows, cols);
    for (i, row) in f_next.iter().enumerate() {
        for (j, f) in row.iter().enumerate() {
            m[(i, j)] = f.eval(z, &[])?;
        }
    }
    let b = DVector::from_vec(eval_data(data, z)?);
    let x = m
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| DivisionError::Shape(format!("least squares failed: {e}")))?;
    Ok(x.iter().copied().collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthFit {
    /// Fitted `p` in `|psi| ~ C |z|^p`.
    pub exponent: f64,
    /// Two standard errors of the slope.
    pub band: f64,
    /// Root-mean-square misfit in log space.
    pub residual: f64,
}

/// Log-log fit of `|psi|` against `|z|`. Fails when the misfit exceeds `max_residual`.
pub fn regularity_probe(radii: &[f64], magnitudes: &[f64], max_residual: f64) -> Result<GrowthFit, DivisionError> {
    let pts: Vec<(f64, f64)> = radii
        .iter()
        .zip(magnitudes)
        .filter(|(r, m)| **r > 0.0 && **m > 0.0)
        .map(|(r, m)| (r.ln(), m.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(DivisionError::Shape(format!("need three positive samples, got {}", pts.len())));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    let residual = (rss / k).sqrt();
    let band = 2.0 * (rss / (k - 2.0) / sxx).sqrt();
    if residual > max_residual {
        return Err(DivisionError::PoorFit { residual, limit: max_residual });
    }
    Ok(GrowthFit { exponent: slope, band, residual })
}

/// Pointwise solutions along the ray `t * direction`, probed for growth.
pub fn probe_ray(
    f_next: &[Vec<Poly>],
    data: &[SmoothGerm],
    direction: &[C64],
    radii: &[f64],
) -> Result<GrowthFit, DivisionError> {
    let norm = direction.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let mut mags = Vec::with_capacity(radii.len());
    for &t in radii {
        let z: Vec<C64> = direction.iter().map(|c| c * (t / norm)).collect();
        let psi = pointwise_solution(f_next, data, &z)?;
        mags.push(psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt());
    }
    regularity_probe(radii, &mags, 0.05)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::Atom;

    fn enkel(data: Vec<Poly>) -> DivisionProblem {
        let gens = vec![Poly::var(2, 0), Poly::var(2, 1)];
        DivisionProblem::koszul(gens, data.into_iter().map(SmoothGerm::Poly).collect(), 1, vec![vec![
            C64::new(0.1, 0.05),
            C64::new(-0.2, 0.1),
        ]])
        .unwrap()
    }

    #[test]
    fn precondition_is_checked() {
        let p = enkel(vec![Poly::var(2, 0), Poly::var(2, 0)]);
        assert!(matches!(solve(&p), Err(DivisionError::Precondition { .. })));
    }

    #[test]
    fn residual_report_is_linear_in_perturbation() {
        let f2 = vec![vec![Poly::var(2, 1).scale(C64::new(-1.0, 0.0))], vec![Poly::var(2, 0)]];
        let z = vec![vec![C64::new(0.2, 0.1), C64::new(-0.1, 0.3)]];
        let phi = vec![vec![-z[0][1], z[0][0]]];
        let exact = residual_report(&f2, &[vec![C64::new(1.0, 0.0)]], &phi, &z).unwrap();
        assert!(exact.max < 1e-15);
        let r1 = residual_report(&f2, &[vec![C64::new(1.0 + 1e-3, 0.0)]], &phi, &z).unwrap().max;
        let r2 = residual_report(&f2, &[vec![C64::new(1.0 + 2e-3, 0.0)]], &phi, &z).unwrap().max;
        assert!((r2 / r1 - 2.0).abs() < 1e-6);
    }

    #[test]
    fn pointwise_inverse_of_injective_column() {
        let f2 = vec![vec![Poly::var(2, 1).scale(C64::new(-1.0, 0.0))], vec![Poly::var(2, 0)]];
        let data = vec![
            SmoothGerm::Poly(Poly::var(2, 1).mul(&Poly::var(2, 0)).scale(C64::new(-1.0, 0.0))),
            SmoothGerm::Poly(Poly::var(2, 0).pow(2)),
        ];
        let z = [C64::new(0.3, -0.1), C64::new(0.2, 0.2)];
        let psi = pointwise_solution(&f2, &data, &z).unwrap();
        assert!((psi[0] - z[0]).norm() < 1e-14);
    }

    #[test]
    fn growth_exponents() {
        let f2 = vec![vec![Poly::var(2, 1).scale(C64::new(-1.0, 0.0))], vec![Poly::var(2, 0)]];
        let radius = Expr::apply(Atom::Power { coeff: 1.0, exponent: -1.0 / 6.0 }, Expr::coord(0).abs2().add(&Expr::coord(1).abs2()));
        let data = vec![
            SmoothGerm::Expr { nvars: 2, expr: Expr::coord(1).neg().mul(&radius), max_order: 0 },
            SmoothGerm::Expr { nvars: 2, expr: Expr::coord(0).mul(&radius), max_order: 0 },
        ];
        let radii: Vec<f64> = (0..8).map(|k| 0.3 * 0.5f64.powi(k)).collect();
        let dir = [C64::new(0.6, 0.2), C64::new(-0.3, 0.7)];
        let fit = probe_ray(&f2, &data, &dir, &radii).unwrap();
        assert!((fit.exponent + 1.0 / 3.0).abs() < 1e-6, "{fit:?}");
        let hol = vec![SmoothGerm::Poly(Poly::var(2, 1).scale(C64::new(-1.0, 0.0))), SmoothGerm::Poly(Poly::var(2, 0))];
        assert!(probe_ray(&f2, &hol, &dir, &radii).unwrap().exponent.abs() < 1e-9);
    }
}
