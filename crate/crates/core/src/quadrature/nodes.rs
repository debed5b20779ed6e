use gauss_quad::GaussLegendre;

use crate::symbolic::{Atom, C64};

/// One coordinate axis of a product rule, as `(x, w)` pairs.
pub(crate) type AxisTable = Vec<(f64, f64)>;

/// Gauss–Legendre with `n` nodes on each panel between consecutive breaks.
pub(crate) fn gauss_panels(breaks: &[f64], n: usize) -> AxisTable {
    let n = n.max(1);
    let gl = GaussLegendre::new(n.try_into().expect("n >= 1"));
    let mut out = Vec::with_capacity(n * breaks.len().saturating_sub(1));
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (x, wt) in gl.iter() {
            out.push((mid + half * x, half * wt));
        }
    }
    out
}

/// Midpoint-shifted trapezoid rule on `[0, 2 pi)`.
pub(crate) fn angular(n: usize) -> AxisTable {
    let n = n.max(1);
    let h = std::f64::consts::TAU / n as f64;
    (0..n).map(|k| ((k as f64 + 0.5) * h, h)).collect()
}

/// Breakpoints of `[lo, hi]`: the given interior breaks, each interval split
/// into `pieces` equal panels, plus `levels` geometric panels (ratio `ratio`)
/// accumulating toward `lo`.
pub(crate) fn breakpoints(lo: f64, hi: f64, interior: &[f64], pieces: usize, grading: Option<(f64, usize)>) -> Vec<f64> {
    let mut b = vec![lo];
    b.extend(interior.iter().copied().filter(|&x| x > lo && x < hi));
    b.push(hi);
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.dedup();
    let mut out = Vec::new();
    for w in b.windows(2) {
        for k in 0..pieces.max(1) {
            out.push(w[0] + (w[1] - w[0]) * k as f64 / pieces.max(1) as f64);
        }
    }
    out.push(hi);
    if let Some((ratio, levels)) = grading {
        let first = out[1];
        let mut extra: Vec<f64> = (1..=levels).map(|k| lo + (first - lo) * ratio.powi(k as i32)).collect();
        extra.reverse();
        out.splice(1..1, extra);
    }
    out
}

/// Breakpoints of `[0, 1]` graded geometrically toward both ends.
pub(crate) fn unit_breaks(levels: usize) -> Vec<f64> {
    let mut b: Vec<f64> = (1..=levels).map(|k| 0.5f64.powi(k as i32 + 1)).collect();
    b.reverse();
    let mut out = vec![0.0];
    out.extend(b.iter().copied());
    out.push(0.5);
    out.extend(b.iter().rev().map(|x| 1.0 - x));
    out.push(1.0);
    out
}

#[derive(Clone, Debug)]
pub(crate) enum Geometry {
    /// Axes: `r`, `u_1..u_{N-1}` (stick-breaking simplex), `theta_1..theta_N`.
    Ball { n: usize },
    /// As `Ball` with the radius fixed (surface measure).
    Sphere { n: usize, radius: f64 },
    /// Axes: `r_1, theta_1, r_2, theta_2, ...`.
    Polydisc { n: usize },
    /// Axes: `theta_1..theta_N` on circles of the given radii, measure `prod dtheta`.
    Circles { radii: Vec<f64> },
}

impl Geometry {
    pub(crate) fn axes(&self) -> usize {
        match self {
            Geometry::Ball { n } => 2 * n,
            Geometry::Sphere { n, .. } => 2 * n - 1,
            Geometry::Polydisc { n } => 2 * n,
            Geometry::Circles { radii } => radii.len(),
        }
    }

    /// Writes the point for axis values `x` and returns the Jacobian.
    pub(crate) fn place(&self, center: &[C64], x: &[f64], out: &mut [C64]) -> f64 {
        match self {
            Geometry::Ball { n } => ball_place(*n, x[0], &x[1..], center, out),
            Geometry::Sphere { n, radius } => ball_place(*n, *radius, x, center, out),
            Geometry::Polydisc { n } => {
                let mut jac = 1.0;
                for j in 0..*n {
                    let (r, th) = (x[2 * j], x[2 * j + 1]);
                    out[j] = center[j] + C64::from_polar(r, th);
                    jac *= r;
                }
                jac
            }
            Geometry::Circles { radii } => {
                for (j, &rho) in radii.iter().enumerate() {
                    out[j] = center[j] + C64::from_polar(rho, x[j]);
                }
                1.0
            }
        }
    }
}

/// `zeta_j = c_j + r sqrt(t_j) e^{i theta_j}` with `t` from stick-breaking
/// on `u`; volume element `2^{1-N} r^{2N-1} dr dt dtheta`.
fn ball_place(n: usize, r: f64, x: &[f64], center: &[C64], out: &mut [C64]) -> f64 {
    let (u, theta) = x.split_at(n - 1);
    let mut rest = 1.0;
    let mut jac = 2f64.powi(1 - n as i32) * r.powi(2 * n as i32 - 1);
    for j in 0..n {
        let t = if j + 1 < n { rest * u[j] } else { rest };
        if j + 1 < n {
            jac *= rest;
            rest *= 1.0 - u[j];
        }
        out[j] = center[j] + C64::from_polar(r * t.max(0.0).sqrt(), theta[j]);
    }
    jac
}

/// Smooth partition-of-unity bump around a patch center: 1 within half the
/// radius, 0 beyond the radius.
#[derive(Clone, Debug)]
pub(crate) struct Bump {
    pub center: Vec<C64>,
    atom: Atom,
}

impl Bump {
    pub(crate) fn new(center: Vec<C64>, radius: f64) -> Self {
        Bump { center, atom: Atom::cutoff(0.25 * radius * radius, radius * radius) }
    }

    pub(crate) fn eval(&self, p: &[C64]) -> f64 {
        let d2: f64 = p.iter().zip(&self.center).map(|(a, b)| (a - b).norm_sqr()).sum();
        self.atom.eval(d2).map(|v| v.re).unwrap_or(0.0)
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Mask {
    None,
    /// Multiply by `prod (1 - bump)`.
    Outside(Vec<Bump>),
    /// Multiply by `bump`.
    Inside(Bump),
}

impl Mask {
    pub(crate) fn eval(&self, p: &[C64]) -> f64 {
        match self {
            Mask::None => 1.0,
            Mask::Outside(bs) => bs.iter().map(|b| 1.0 - b.eval(p)).product(),
            Mask::Inside(b) => b.eval(p),
        }
    }
}

/// A concrete node set: product rule or shifted lattice over a geometry.
#[derive(Clone, Debug)]
pub(crate) enum Sampler {
    Tensor { axes: Vec<AxisTable>, strides: Vec<usize> },
    Lattice { lo: Vec<f64>, hi: Vec<f64>, alpha: Vec<f64>, shift: Vec<f64>, count: usize },
}

#[derive(Clone, Debug)]
pub(crate) struct NodeSet {
    pub geometry: Geometry,
    pub center: Vec<C64>,
    pub sampler: Sampler,
    pub mask: Mask,
}

impl NodeSet {
    pub(crate) fn tensor(geometry: Geometry, center: Vec<C64>, axes: Vec<AxisTable>, mask: Mask) -> Self {
        let mut strides = vec![1; axes.len()];
        for k in (0..axes.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * axes[k + 1].len();
        }
        NodeSet { geometry, center, sampler: Sampler::Tensor { axes, strides }, mask }
    }

    pub(crate) fn len(&self) -> usize {
        match &self.sampler {
            Sampler::Tensor { axes, .. } => axes.iter().map(Vec::len).product(),
            Sampler::Lattice { count, .. } => *count,
        }
    }

    /// Point and weight of node `i` (weight includes the mask).
    pub(crate) fn node(&self, i: usize, x: &mut [f64], out: &mut [C64]) -> f64 {
        let mut w = match &self.sampler {
            Sampler::Tensor { axes, strides } => {
                let mut w = 1.0;
                for k in 0..axes.len() {
                    let (xk, wk) = axes[k][(i / strides[k]) % axes[k].len()];
                    x[k] = xk;
                    w *= wk;
                }
                w
            }
            Sampler::Lattice { lo, hi, alpha, shift, count } => {
                let mut w = 1.0 / *count as f64;
                for k in 0..alpha.len() {
                    let u = (shift[k] + (i as f64 + 1.0) * alpha[k]).fract();
                    x[k] = lo[k] + (hi[k] - lo[k]) * u;
                    w *= hi[k] - lo[k];
                }
                w
            }
        };
        w *= self.geometry.place(&self.center, x, out);
        w * self.mask.eval(out)
    }
}

/// Generator of the `d`-dimensional Kronecker lattice built from the
/// generalized golden ratio.
pub(crate) fn kronecker_alpha(d: usize) -> Vec<f64> {
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
    }
    (1..=d).map(|k| (1.0 / phi).powi(k as i32).fract()).collect()
}
