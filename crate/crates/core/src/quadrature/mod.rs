//! Deterministic integration over balls, shells, polydiscs, spheres and
//! circle products in `C^N`.
//!
//! Integrands are plain functions of the point (usually a compiled tape of
//! top-degree densities). Each rule is a union of node sets: the main set
//! over the domain and one polar set per declared singular point, glued by a
//! smooth partition of unity. Sums are reduced over a fixed binary tree of
//! node index ranges, so results do not depend on the number of threads.

mod nodes;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::symbolic::{Expr, Point, SymbolicError, Tape, C64};

use nodes::{angular, breakpoints, gauss_panels, kronecker_alpha, unit_breaks, Bump, Geometry, Mask, NodeSet, Sampler};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("integrand is not finite at node {point:?}: {message}")]
    Singular { point: Vec<C64>, message: String },
    #[error("patch at {center:?} with radius {radius} does not fit in the domain")]
    PatchEscapes { center: Vec<C64>, radius: f64 },
    #[error("patches at {0:?} and {1:?} overlap")]
    PatchOverlap(Vec<C64>, Vec<C64>),
    #[error("degenerate patch radius {0}")]
    DegeneratePatch(f64),
    #[error("invalid domain: {0}")]
    Domain(String),
    #[error("invalid rule: {0}")]
    Rule(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Ball { center: Vec<C64>, radius: f64 },
    /// `inner <= |zeta - center| <= outer`.
    Shell { center: Vec<C64>, inner: f64, outer: f64 },
    Polydisc { center: Vec<C64>, radii: Vec<f64> },
    /// Product of circles with measure `prod dtheta_j`.
    CircleProduct { center: Vec<C64>, radii: Vec<f64> },
    /// Round sphere in `R^{2N}` with surface measure.
    Sphere { center: Vec<C64>, radius: f64 },
}

impl Domain {
    pub fn ball(n: usize, radius: f64) -> Self {
        Domain::Ball { center: vec![C64::new(0.0, 0.0); n], radius }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Ball { center, .. }
            | Domain::Shell { center, .. }
            | Domain::Polydisc { center, .. }
            | Domain::CircleProduct { center, .. }
            | Domain::Sphere { center, .. } => center.len(),
        }
    }

    fn validate(&self) -> Result<(), QuadError> {
        let n = self.dim();
        if n == 0 {
            return Err(QuadError::Domain("zero-dimensional domain".into()));
        }
        let ok = match self {
            Domain::Ball { radius, .. } | Domain::Sphere { radius, .. } => *radius > 0.0,
            Domain::Shell { inner, outer, .. } => *inner >= 0.0 && outer > inner,
            Domain::Polydisc { radii, .. } | Domain::CircleProduct { radii, .. } => {
                radii.len() == n && radii.iter().all(|&r| r > 0.0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(QuadError::Domain(format!("{self:?}")))
        }
    }

    /// Whether the closed ball `B(p, rho)` lies inside the domain.
    fn contains_ball(&self, p: &[C64], rho: f64) -> bool {
        let dist = |c: &[C64]| p.iter().zip(c).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        match self {
            Domain::Ball { center, radius } => dist(center) + rho <= *radius,
            Domain::Shell { center, inner, outer } => {
                let d = dist(center);
                d + rho <= *outer && d - rho >= *inner
            }
            Domain::Polydisc { center, radii } => {
                p.iter().zip(center).zip(radii).all(|((a, c), r)| (a - c).norm() + rho <= *r)
            }
            Domain::CircleProduct { .. } | Domain::Sphere { .. } => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    TensorGauss,
    Qmc,
}

/// Polar sub-rule around a point where the integrand is singular.
#[derive(Clone, Debug, PartialEq)]
pub struct Patch {
    pub center: Vec<C64>,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub scheme: Scheme,
    /// Gauss nodes per radial panel.
    pub radial_nodes: usize,
    /// Equal panels between consecutive radial breakpoints.
    pub radial_panels: usize,
    /// Extra radial breakpoints (absolute radii), e.g. cutoff radii.
    pub radial_breaks: Vec<f64>,
    /// Geometric panels accumulating toward the inner radius: `(ratio, levels)`.
    pub radial_grading: Option<(f64, usize)>,
    /// Gauss nodes per panel on each simplex axis.
    pub simplex_nodes: usize,
    /// Geometric panels toward both ends of each simplex axis.
    pub simplex_grading: usize,
    /// Trapezoid nodes per angle.
    pub angular_nodes: usize,
    pub qmc_samples: usize,
    pub qmc_batches: usize,
    pub seed: u64,
    pub patches: Vec<Patch>,
}

impl Default for Rule {
    fn default() -> Self {
        Rule {
            scheme: Scheme::TensorGauss,
            radial_nodes: 32,
            radial_panels: 1,
            radial_breaks: Vec::new(),
            radial_grading: None,
            simplex_nodes: 32,
            simplex_grading: 0,
            angular_nodes: 32,
            qmc_samples: 1 << 20,
            qmc_batches: 16,
            seed: 0x5EED,
            patches: Vec::new(),
        }
    }
}

impl Rule {
    pub fn tensor(radial: usize, simplex: usize, angular: usize) -> Self {
        Rule { radial_nodes: radial, simplex_nodes: simplex, angular_nodes: angular, ..Rule::default() }
    }

    pub fn qmc(samples: usize) -> Self {
        Rule { scheme: Scheme::Qmc, qmc_samples: samples, ..Rule::default() }
    }

    pub fn with_breaks(mut self, breaks: &[f64]) -> Self {
        self.radial_breaks = breaks.to_vec();
        self
    }

    pub fn with_patch(mut self, center: Vec<C64>, radius: f64) -> Self {
        self.patches.push(Patch { center, radius });
        self
    }

    /// Finest node spacing next to the center of a radial axis `[0, radius]`
    /// in real dimension `real_dim`.
    pub fn radial_spacing(&self, radius: f64, real_dim: usize) -> f64 {
        match self.scheme {
            Scheme::TensorGauss => {
                let b = breakpoints(0.0, radius, &self.radial_breaks, self.radial_panels, self.radial_grading);
                (b[1] - b[0]) / self.radial_nodes.max(1) as f64
            }
            Scheme::Qmc => radius * (self.qmc_samples.max(1) as f64).powf(-1.0 / real_dim.max(1) as f64),
        }
    }

    fn halved(&self) -> Rule {
        Rule {
            radial_nodes: (self.radial_nodes / 2).max(1),
            simplex_nodes: (self.simplex_nodes / 2).max(1),
            angular_nodes: (self.angular_nodes / 2).max(1),
            ..self.clone()
        }
    }
}

/// Checks a patch and returns it; the patch is applied by adding it to a
/// rule's `patches`.
pub fn polar_patch(domain: &Domain, center: Vec<C64>, radius: f64) -> Result<Patch, QuadError> {
    if !(radius > 0.0) {
        return Err(QuadError::DegeneratePatch(radius));
    }
    if center.len() != domain.dim() || !domain.contains_ball(&center, radius) {
        return Err(QuadError::PatchEscapes { center, radius });
    }
    Ok(Patch { center, radius })
}

/// Vector-valued integrand.
pub trait Integrand: Sync {
    fn outputs(&self) -> usize;
    fn eval(&self, zeta: &[C64], scratch: &mut Vec<C64>, out: &mut [C64]) -> Result<(), SymbolicError>;
}

/// Compiled densities with the parameters (base point) fixed.
#[derive(Clone)]
pub struct TapeIntegrand {
    tape: Arc<Tape>,
    params: Vec<C64>,
}

impl TapeIntegrand {
    pub fn new(densities: &[Expr], params: Vec<C64>) -> Self {
        TapeIntegrand { tape: Arc::new(Tape::compile(densities)), params }
    }

    /// The same compiled densities bound to other parameter values.
    pub fn with_params(&self, params: Vec<C64>) -> Self {
        TapeIntegrand { tape: Arc::clone(&self.tape), params }
    }

    pub fn tape(&self) -> &Tape {
        &self.tape
    }
}

impl Integrand for TapeIntegrand {
    fn outputs(&self) -> usize {
        self.tape.n_outputs()
    }

    fn eval(&self, zeta: &[C64], scratch: &mut Vec<C64>, out: &mut [C64]) -> Result<(), SymbolicError> {
        self.tape.eval_into(&Point::new(zeta, &self.params), scratch, out)
    }
}

/// Scalar integrand from a closure.
pub struct FnIntegrand<F>(pub F);

impl<F: Fn(&[C64]) -> C64 + Sync> Integrand for FnIntegrand<F> {
    fn outputs(&self) -> usize {
        1
    }

    fn eval(&self, zeta: &[C64], _: &mut Vec<C64>, out: &mut [C64]) -> Result<(), SymbolicError> {
        out[0] = (self.0)(zeta);
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Integral {
    pub values: Vec<C64>,
    /// Nested-rule difference (tensor) or batch standard error (qmc).
    pub errors: Vec<f64>,
    pub evaluations: usize,
}

impl Integral {
    pub fn value(&self) -> C64 {
        self.values[0]
    }

    pub fn error(&self) -> f64 {
        self.errors[0]
    }
}

const LEAF: usize = 256;

fn build_sets(domain: &Domain, rule: &Rule, batch: Option<u64>) -> Result<Vec<NodeSet>, QuadError> {
    domain.validate()?;
    let n = domain.dim();
    for (i, p) in rule.patches.iter().enumerate() {
        polar_patch(domain, p.center.clone(), p.radius)?;
        for q in &rule.patches[i + 1..] {
            let d: f64 = p.center.iter().zip(&q.center).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            if d < p.radius + q.radius {
                return Err(QuadError::PatchOverlap(p.center.clone(), q.center.clone()));
            }
        }
    }
    let bumps: Vec<Bump> = rule.patches.iter().map(|p| Bump::new(p.center.clone(), p.radius)).collect();
    let main_mask = if bumps.is_empty() { Mask::None } else { Mask::Outside(bumps.clone()) };
    let (geometry, center, ranges) = match domain {
        Domain::Ball { center, radius } => (Geometry::Ball { n }, center.clone(), ball_ranges(n, 0.0, *radius)),
        Domain::Shell { center, inner, outer } => (Geometry::Ball { n }, center.clone(), ball_ranges(n, *inner, *outer)),
        Domain::Sphere { center, radius } => {
            (Geometry::Sphere { n, radius: *radius }, center.clone(), ball_ranges(n, 0.0, 1.0)[1..].to_vec())
        }
        Domain::Polydisc { center, radii } => {
            let ranges = radii.iter().flat_map(|&r| [Range::Radial(0.0, r), Range::Angle]).collect();
            (Geometry::Polydisc { n }, center.clone(), ranges)
        }
        Domain::CircleProduct { center, radii } => {
            (Geometry::Circles { radii: radii.clone() }, center.clone(), vec![Range::Angle; n])
        }
    };
    // resolve the partition-of-unity transition in the main radial grid
    let mut main_rule = rule.clone();
    if matches!(domain, Domain::Ball { .. } | Domain::Shell { .. }) {
        for p in &rule.patches {
            let d: f64 = p.center.iter().zip(&center).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            for off in [-1.0, -0.5, 0.0, 0.5, 1.0] {
                main_rule.radial_breaks.push(d + off * p.radius);
            }
        }
    }
    let mut sets = vec![make_set(&main_rule, geometry, center, &ranges, main_mask, batch, 0)];
    for (k, p) in rule.patches.iter().enumerate() {
        let patch_rule = Rule { radial_breaks: vec![0.5 * p.radius], radial_grading: None, ..rule.clone() };
        let ranges = ball_ranges(n, 0.0, p.radius);
        let mask = Mask::Inside(bumps[k].clone());
        sets.push(make_set(&patch_rule, Geometry::Ball { n }, p.center.clone(), &ranges, mask, batch, k as u64 + 1));
    }
    Ok(sets)
}

#[derive(Clone, Copy, Debug)]
enum Range {
    Radial(f64, f64),
    Simplex,
    Angle,
}

fn ball_ranges(n: usize, lo: f64, hi: f64) -> Vec<Range> {
    let mut r = vec![Range::Radial(lo, hi)];
    r.extend(std::iter::repeat(Range::Simplex).take(n - 1));
    r.extend(std::iter::repeat(Range::Angle).take(n));
    r
}

fn make_set(
    rule: &Rule,
    geometry: Geometry,
    center: Vec<C64>,
    ranges: &[Range],
    mask: Mask,
    batch: Option<u64>,
    salt: u64,
) -> NodeSet {
    match (rule.scheme, batch) {
        (Scheme::Qmc, Some(b)) => {
            let (lo, hi): (Vec<f64>, Vec<f64>) = ranges
                .iter()
                .map(|r| match *r {
                    Range::Radial(a, b) => (a, b),
                    Range::Simplex => (0.0, 1.0),
                    Range::Angle => (0.0, std::f64::consts::TAU),
                })
                .unzip();
            let mut rng = ChaCha8Rng::seed_from_u64(rule.seed ^ (salt << 32));
            let mut shift = vec![0.0; ranges.len()];
            for _ in 0..=b {
                shift = (0..ranges.len()).map(|_| rng.gen::<f64>()).collect();
            }
            let count = (rule.qmc_samples / rule.qmc_batches.max(1)).max(1);
            let alpha = kronecker_alpha(ranges.len());
            NodeSet { geometry, center, sampler: Sampler::Lattice { lo, hi, alpha, shift, count }, mask }
        }
        _ => {
            let axes = ranges
                .iter()
                .map(|r| match *r {
                    Range::Radial(a, b) => {
                        let br = breakpoints(a, b, &rule.radial_breaks, rule.radial_panels, rule.radial_grading);
                        gauss_panels(&br, rule.radial_nodes)
                    }
                    Range::Simplex => gauss_panels(&unit_breaks(rule.simplex_grading), rule.simplex_nodes),
                    Range::Angle => angular(rule.angular_nodes),
                })
                .collect();
            NodeSet::tensor(geometry, center, axes, mask)
        }
    }
}

struct Work<'a, I: Integrand + ?Sized> {
    set: &'a NodeSet,
    f: &'a I,
    dim: usize,
    axes: usize,
    outputs: usize,
}

impl<I: Integrand + ?Sized> Work<'_, I> {
    fn leaf(&self, lo: usize, hi: usize) -> Result<Vec<C64>, QuadError> {
        let mut acc = vec![C64::new(0.0, 0.0); self.outputs];
        let mut x = vec![0.0; self.axes];
        let mut p = vec![C64::new(0.0, 0.0); self.dim];
        let mut scratch = Vec::new();
        let mut vals = vec![C64::new(0.0, 0.0); self.outputs];
        for i in lo..hi {
            let w = self.set.node(i, &mut x, &mut p);
            if w == 0.0 {
                continue;
            }
            let sing = |message: String| QuadError::Singular { point: p.clone(), message };
            self.f.eval(&p, &mut scratch, &mut vals).map_err(|e| sing(e.to_string()))?;
            for (a, v) in acc.iter_mut().zip(&vals) {
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err(sing(format!("value {v}")));
                }
                *a += v * w;
            }
        }
        Ok(acc)
    }

    fn reduce(&self, lo: usize, hi: usize) -> Result<Vec<C64>, QuadError> {
        if hi - lo <= LEAF {
            return self.leaf(lo, hi);
        }
        let mid = lo + (hi - lo) / 2;
        let (a, b) = rayon::join(|| self.reduce(lo, mid), || self.reduce(mid, hi));
        let (mut a, b) = (a?, b?);
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
        Ok(a)
    }
}

fn sum_sets<I: Integrand + ?Sized>(f: &I, sets: &[NodeSet], dim: usize) -> Result<(Vec<C64>, usize), QuadError> {
    let mut total = vec![C64::new(0.0, 0.0); f.outputs()];
    let mut count = 0;
    for set in sets {
        let work = Work { set, f, dim, axes: set.geometry.axes(), outputs: f.outputs() };
        let s = work.reduce(0, set.len())?;
        count += set.len();
        for (t, v) in total.iter_mut().zip(s) {
            *t += v;
        }
    }
    Ok((total, count))
}

/// Integrates `f` against Lebesgue (or surface / angular) measure.
pub fn integrate<I: Integrand + ?Sized>(f: &I, domain: &Domain, rule: &Rule) -> Result<Integral, QuadError> {
    let dim = domain.dim();
    match rule.scheme {
        Scheme::TensorGauss => {
            let (values, n1) = sum_sets(f, &build_sets(domain, rule, None)?, dim)?;
            let (coarse, n2) = sum_sets(f, &build_sets(domain, &rule.halved(), None)?, dim)?;
            let errors = values.iter().zip(&coarse).map(|(a, b)| (a - b).norm()).collect();
            Ok(Integral { values, errors, evaluations: n1 + n2 })
        }
        Scheme::Qmc => {
            let batches = rule.qmc_batches.max(2);
            let mut estimates = Vec::with_capacity(batches);
            let mut evaluations = 0;
            for b in 0..batches as u64 {
                let (v, n) = sum_sets(f, &build_sets(domain, rule, Some(b))?, dim)?;
                estimates.push(v);
                evaluations += n;
            }
            let k = f.outputs();
            let bf = batches as f64;
            let mut values = vec![C64::new(0.0, 0.0); k];
            for e in &estimates {
                for (v, x) in values.iter_mut().zip(e) {
                    *v += x / bf;
                }
            }
            let errors = (0..k)
                .map(|j| {
                    let var: f64 = estimates.iter().map(|e| (e[j] - values[j]).norm_sqr()).sum::<f64>() / (bf - 1.0);
                    (var / bf).sqrt()
                })
                .collect();
            Ok(Integral { values, errors, evaluations })
        }
    }
}

#[derive(Clone, Debug)]
pub struct NodeRecord {
    pub set: usize,
    pub point: Vec<C64>,
    pub weight: f64,
    pub values: Vec<C64>,
}

/// Every node of the rule (first qmc batch) with its weight and integrand
/// values, for debugging.
pub fn dump_nodes<I: Integrand + ?Sized>(f: &I, domain: &Domain, rule: &Rule) -> Result<Vec<NodeRecord>, QuadError> {
    let batch = (rule.scheme == Scheme::Qmc).then_some(0);
    let sets = build_sets(domain, rule, batch)?;
    let mut out = Vec::new();
    let mut scratch = Vec::new();
    for (s, set) in sets.iter().enumerate() {
        let mut x = vec![0.0; set.geometry.axes()];
        for i in 0..set.len() {
            let mut p = vec![C64::new(0.0, 0.0); domain.dim()];
            let weight = set.node(i, &mut x, &mut p);
            let mut values = vec![C64::new(0.0, 0.0); f.outputs()];
            if weight != 0.0 {
                f.eval(&p, &mut scratch, &mut values)
                    .map_err(|e| QuadError::Singular { point: p.clone(), message: e.to_string() })?;
            }
            out.push(NodeRecord { set: s, point: p, weight, values });
        }
    }
    Ok(out)
}

/// Tab-separated node table: set, coordinates (re, im), weight, values (re, im).
pub fn format_nodes(records: &[NodeRecord]) -> String {
    let mut s = String::new();
    for r in records {
        let mut cols = vec![r.set.to_string()];
        for c in &r.point {
            cols.push(format!("{:.17e}", c.re));
            cols.push(format!("{:.17e}", c.im));
        }
        cols.push(format!("{:.17e}", r.weight));
        for v in &r.values {
            cols.push(format!("{:.17e}", v.re));
            cols.push(format!("{:.17e}", v.im));
        }
        s.push_str(&cols.join("\t"));
        s.push('\n');
    }
    s
}
