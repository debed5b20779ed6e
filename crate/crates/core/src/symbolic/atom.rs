//! Smooth one-argument functions of a real scalar.
//!
//! Every atom knows its own derivative, so formal differentiation of an
//! [`Expr`](super::Expr) never falls back to finite differences.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::SymbolicError;

/// Signature of a user evaluator for [`Atom::Custom`].
pub type AtomFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// An atom not built into the crate. The derivative is optional; an atom
/// without one can be evaluated but not differentiated.
#[derive(Clone)]
pub struct CustomAtom {
    pub name: String,
    pub eval: AtomFn,
    pub derivative: Option<Atom>,
}

#[derive(Clone)]
pub enum Atom {
    /// `d^order/dt^order` of the cutoff profile `chi(t) = h((outer - t)/(outer - inner))`,
    /// where `inner`/`outer` are squared radii and `h` is the smooth step.
    Cutoff { inner: f64, outer: f64, order: u32 },
    /// `coeff * t^exponent`, defined for `t > 0` (any `t` when `exponent` is a
    /// non-negative integer).
    Power { coeff: f64, exponent: f64 },
    /// `coeff * exp(rate * t)`.
    Exp { coeff: f64, rate: f64 },
    Custom(Arc<CustomAtom>),
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl PartialEq for Atom {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (
                Atom::Cutoff { inner, outer, order },
                Atom::Cutoff { inner: i2, outer: o2, order: k2 },
            ) => inner.to_bits() == i2.to_bits() && outer.to_bits() == o2.to_bits() && order == k2,
            (Atom::Power { coeff, exponent }, Atom::Power { coeff: c2, exponent: e2 }) => {
                coeff.to_bits() == c2.to_bits() && exponent.to_bits() == e2.to_bits()
            }
            (Atom::Exp { coeff, rate }, Atom::Exp { coeff: c2, rate: r2 }) => {
                coeff.to_bits() == c2.to_bits() && rate.to_bits() == r2.to_bits()
            }
            (Atom::Custom(a), Atom::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl Atom {
    /// Cutoff equal to 1 for `t <= inner` and 0 for `t >= outer`.
    pub fn cutoff(inner: f64, outer: f64) -> Self {
        Atom::Cutoff { inner, outer, order: 0 }
    }

    pub fn name(&self) -> String {
        match self {
            Atom::Cutoff { inner, outer, order } => {
                let primes = "'".repeat(*order as usize);
                format!("chi{primes}[{inner},{outer}]")
            }
            Atom::Power { coeff, exponent } => format!("{coeff}*pow[{exponent}]"),
            Atom::Exp { coeff, rate } => format!("{coeff}*exp[{rate}]"),
            Atom::Custom(c) => c.name.clone(),
        }
    }

    pub fn eval(&self, t: f64) -> Result<Complex64, SymbolicError> {
        let v = match self {
            Atom::Cutoff { inner, outer, order } => {
                let width = outer - inner;
                let s = (outer - t) / width;
                let chain = (-1.0 / width).powi(*order as i32);
                chain * smooth_step_derivative(s, *order as usize)
            }
            Atom::Power { coeff, exponent } => {
                let integral = exponent.fract() == 0.0 && *exponent >= 0.0;
                if t <= 0.0 && !integral {
                    return Err(SymbolicError::AtomDomain { atom: self.name(), arg: t });
                }
                coeff * t.powf(*exponent)
            }
            Atom::Exp { coeff, rate } => coeff * (rate * t).exp(),
            Atom::Custom(c) => return Ok((c.eval)(t)),
        };
        Ok(Complex64::new(v, 0.0))
    }

    /// The atom representing the derivative with respect to the scalar argument.
    pub fn derivative(&self) -> Result<Atom, SymbolicError> {
        match self {
            Atom::Cutoff { inner, outer, order } => {
                Ok(Atom::Cutoff { inner: *inner, outer: *outer, order: order + 1 })
            }
            Atom::Power { coeff, exponent } => {
                Ok(Atom::Power { coeff: coeff * exponent, exponent: exponent - 1.0 })
            }
            Atom::Exp { coeff, rate } => Ok(Atom::Exp { coeff: coeff * rate, rate: *rate }),
            Atom::Custom(c) => c
                .derivative
                .clone()
                .ok_or_else(|| SymbolicError::NoDerivative(c.name.clone())),
        }
    }

    /// True when the atom is identically zero (a derivative of a constant power).
    pub(crate) fn is_zero(&self) -> bool {
        match self {
            Atom::Power { coeff, .. } | Atom::Exp { coeff, .. } => *coeff == 0.0,
            _ => false,
        }
    }
}

/// Constructors for atoms referenced by name in problem files.
#[derive(Default, Clone)]
pub struct AtomRegistry {
    entries: BTreeMap<String, Arc<dyn Fn(&[f64]) -> Result<Atom, SymbolicError> + Send + Sync>>,
}

impl AtomRegistry {
    /// Registry with `cutoff(inner, outer)`, `pow(coeff, exponent)` and `exp(coeff, rate)`.
    pub fn builtin() -> Self {
        let mut reg = Self::default();
        reg.register("cutoff", |p| match p {
            [inner, outer] if inner < outer => Ok(Atom::cutoff(*inner, *outer)),
            _ => Err(SymbolicError::AtomParams("cutoff expects inner < outer".into())),
        });
        reg.register("pow", |p| match p {
            [coeff, exponent] => Ok(Atom::Power { coeff: *coeff, exponent: *exponent }),
            _ => Err(SymbolicError::AtomParams("pow expects [coeff, exponent]".into())),
        });
        reg.register("exp", |p| match p {
            [coeff, rate] => Ok(Atom::Exp { coeff: *coeff, rate: *rate }),
            _ => Err(SymbolicError::AtomParams("exp expects [coeff, rate]".into())),
        });
        reg
    }

    pub fn register<F>(&mut self, name: &str, ctor: F)
    where
        F: Fn(&[f64]) -> Result<Atom, SymbolicError> + Send + Sync + 'static,
    {
        self.entries.insert(name.to_string(), Arc::new(ctor));
    }

    pub fn make(&self, name: &str, params: &[f64]) -> Result<Atom, SymbolicError> {
        let ctor = self
            .entries
            .get(name)
            .ok_or_else(|| SymbolicError::UnknownAtom(name.to_string()))?;
        ctor(params)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

/// `k`-th derivative of `h(s) = E(s) / (E(s) + E(1 - s))`, `E(s) = exp(-1/s)`.
pub fn smooth_step_derivative(s: f64, k: usize) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let left = exp_inverse_jet(s, 1.0, k);
    let right = exp_inverse_jet(1.0 - s, -1.0, k);
    let denom: Vec<f64> = left.iter().zip(&right).map(|(a, b)| a + b).collect();
    let h = jet_div(&left, &denom);
    h[k] * factorial(k)
}

/// Taylor jet (coefficients, not derivatives) of `exp(-1/x)` at `x`, where
/// `x` moves with slope `dir` as the expansion variable moves.
fn exp_inverse_jet(x: f64, dir: f64, k: usize) -> Vec<f64> {
    // exp(-1/x) underflows long before its derivatives matter.
    if x < 2e-3 {
        return vec![0.0; k + 1];
    }
    let mut xj = vec![0.0; k + 1];
    xj[0] = x;
    if k >= 1 {
        xj[1] = dir;
    }
    let inv = jet_recip(&xj);
    let neg: Vec<f64> = inv.iter().map(|c| -c).collect();
    jet_exp(&neg)
}

fn jet_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    (0..n).map(|i| (0..=i).map(|j| a[j] * b[i - j]).sum()).collect()
}

fn jet_recip(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut b = vec![0.0; n];
    b[0] = 1.0 / a[0];
    for i in 1..n {
        let acc: f64 = (1..=i).map(|j| a[j] * b[i - j]).sum();
        b[i] = -acc / a[0];
    }
    b
}

fn jet_div(a: &[f64], b: &[f64]) -> Vec<f64> {
    jet_mul(a, &jet_recip(b))
}

fn jet_exp(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut b = vec![0.0; n];
    b[0] = a[0].exp();
    for i in 1..n {
        let acc: f64 = (1..=i).map(|j| j as f64 * a[j] * b[i - j]).sum();
        b[i] = acc / i as f64;
    }
    b
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}
