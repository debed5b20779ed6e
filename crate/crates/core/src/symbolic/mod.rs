//! Expression trees over complex coordinates, their conjugates and parameters.
//!
//! Coordinates `zeta_j` are integration variables; parameters `z_j` are the
//! base point of a kernel and are constant for `dbar`. A variable and its
//! conjugate are distinct symbols, so Wirtinger derivatives in `zeta_j` and
//! `conj(zeta_j)` are independent.

mod atom;
mod diff;
mod tape;

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

pub use atom::{smooth_step_derivative, Atom, AtomFn, AtomRegistry, CustomAtom};
pub use diff::{partial, partial_all, simplify};
pub use tape::Tape;

pub type C64 = Complex64;

/// Largest number of coordinates (and of parameters) an expression can use.
pub const MAX_VARS: usize = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolicError {
    #[error("variable {0} is not assigned")]
    Unassigned(Var),
    #[error("division by zero in {subexpr} (path {path:?})")]
    DivisionByZero { path: Vec<usize>, subexpr: String },
    #[error("atom {atom} evaluated outside its domain at {arg}")]
    AtomDomain { atom: String, arg: f64 },
    #[error("atom {0} has no registered derivative")]
    NoDerivative(String),
    #[error("unknown atom {0}")]
    UnknownAtom(String),
    #[error("bad atom parameters: {0}")]
    AtomParams(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub index: u8,
    pub conjugated: bool,
    pub param: bool,
}

impl Var {
    pub fn coord(index: usize) -> Self {
        assert!(index < MAX_VARS, "coordinate index {index} out of range");
        Var { index: index as u8, conjugated: false, param: false }
    }

    pub fn coord_bar(index: usize) -> Self {
        Var { conjugated: true, ..Var::coord(index) }
    }

    pub fn param(index: usize) -> Self {
        Var { param: true, ..Var::coord(index) }
    }

    pub fn param_bar(index: usize) -> Self {
        Var { conjugated: true, param: true, ..Var::coord(index) }
    }

    pub fn conj(self) -> Self {
        Var { conjugated: !self.conjugated, ..self }
    }

    fn bit(self) -> u128 {
        let slot = self.index as u32 + 32 * self.conjugated as u32 + 64 * self.param as u32;
        1u128 << slot
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = if self.param { "z" } else { "zeta" };
        if self.conjugated {
            write!(f, "conj({base}{})", self.index + 1)
        } else {
            write!(f, "{base}{}", self.index + 1)
        }
    }
}

/// Values for coordinates and parameters. Conjugated variables evaluate to
/// the complex conjugate of the assigned value.
#[derive(Clone, Copy, Debug)]
pub struct Point<'a> {
    pub coords: &'a [C64],
    pub params: &'a [C64],
}

impl<'a> Point<'a> {
    pub fn new(coords: &'a [C64], params: &'a [C64]) -> Self {
        Point { coords, params }
    }

    pub fn value(&self, v: Var) -> Result<C64, SymbolicError> {
        let slots = if v.param { self.params } else { self.coords };
        let x = slots.get(v.index as usize).ok_or(SymbolicError::Unassigned(v))?;
        Ok(if v.conjugated { x.conj() } else { *x })
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Kind {
    Const(C64),
    Var(Var),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Expr, u32),
    Recip(Expr),
    /// Only ever wraps an atom application; conjugation distributes elsewhere.
    Conj(Expr),
    Atom(Atom, Expr),
}

#[derive(Debug)]
pub(crate) struct Node {
    kind: Kind,
    vars: u128,
    hash: u64,
}

/// Immutable expression; clones share structure.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl Expr {
    fn from_kind(kind: Kind) -> Self {
        let mut h = DefaultHasher::new();
        let vars = match &kind {
            Kind::Const(c) => {
                0u8.hash(&mut h);
                c.re.to_bits().hash(&mut h);
                c.im.to_bits().hash(&mut h);
                0
            }
            Kind::Var(v) => {
                1u8.hash(&mut h);
                v.hash(&mut h);
                v.bit()
            }
            Kind::Sum(xs) | Kind::Product(xs) => {
                let tag = if matches!(kind, Kind::Sum(_)) { 2u8 } else { 3u8 };
                tag.hash(&mut h);
                xs.iter().fold(0, |acc, x| {
                    x.0.hash.hash(&mut h);
                    acc | x.0.vars
                })
            }
            Kind::Pow(x, n) => {
                4u8.hash(&mut h);
                x.0.hash.hash(&mut h);
                n.hash(&mut h);
                x.0.vars
            }
            Kind::Recip(x) => {
                5u8.hash(&mut h);
                x.0.hash.hash(&mut h);
                x.0.vars
            }
            Kind::Conj(x) => {
                6u8.hash(&mut h);
                x.0.hash.hash(&mut h);
                swap_conj_bits(x.0.vars)
            }
            Kind::Atom(a, x) => {
                7u8.hash(&mut h);
                a.name().hash(&mut h);
                x.0.hash.hash(&mut h);
                x.0.vars
            }
        };
        Expr(Arc::new(Node { kind, vars, hash: h.finish() }))
    }

    pub(crate) fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub(crate) fn ptr(&self) -> *const Node {
        Arc::as_ptr(&self.0)
    }

    pub fn constant(c: C64) -> Self {
        Self::from_kind(Kind::Const(c))
    }

    pub fn real(x: f64) -> Self {
        Self::constant(C64::new(x, 0.0))
    }

    pub fn zero() -> Self {
        Self::real(0.0)
    }

    pub fn one() -> Self {
        Self::real(1.0)
    }

    /// `1 / (2 pi i)`, kept as an exact constant factor.
    pub fn inv_two_pi_i() -> Self {
        Self::constant(C64::new(0.0, -1.0 / (2.0 * std::f64::consts::PI)))
    }

    pub fn two_pi_i() -> Self {
        Self::constant(C64::new(0.0, 2.0 * std::f64::consts::PI))
    }

    pub fn var(v: Var) -> Self {
        Self::from_kind(Kind::Var(v))
    }

    pub fn coord(i: usize) -> Self {
        Self::var(Var::coord(i))
    }

    pub fn coord_bar(i: usize) -> Self {
        Self::var(Var::coord_bar(i))
    }

    pub fn param(i: usize) -> Self {
        Self::var(Var::param(i))
    }

    pub fn param_bar(i: usize) -> Self {
        Self::var(Var::param_bar(i))
    }

    pub fn as_const(&self) -> Option<C64> {
        match self.kind() {
            Kind::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(C64::new(0.0, 0.0))
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(C64::new(1.0, 0.0))
    }

    /// Whether `v` occurs in the expression.
    pub fn depends_on(&self, v: Var) -> bool {
        self.0.vars & v.bit() != 0
    }

    /// Whether any coordinate conjugate occurs (the expression is then not
    /// manifestly holomorphic in the coordinates).
    pub fn has_coord_conj(&self) -> bool {
        self.0.vars & (0xffff_ffffu128 << 32) != 0
    }

    pub fn has_param_conj(&self) -> bool {
        self.0.vars & (0xffff_ffffu128 << 96) != 0
    }

    pub fn sum<I: IntoIterator<Item = Expr>>(items: I) -> Self {
        let mut terms = Vec::new();
        let mut constant = C64::new(0.0, 0.0);
        for e in items {
            match e.kind() {
                Kind::Const(c) => constant += c,
                Kind::Sum(xs) => {
                    for x in xs {
                        match x.kind() {
                            Kind::Const(c) => constant += c,
                            _ => terms.push(x.clone()),
                        }
                    }
                }
                _ => terms.push(e),
            }
        }
        if constant != C64::new(0.0, 0.0) {
            terms.push(Expr::constant(constant));
        }
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.pop().unwrap(),
            _ => Expr::from_kind(Kind::Sum(terms)),
        }
    }

    pub fn product<I: IntoIterator<Item = Expr>>(items: I) -> Self {
        let mut factors = Vec::new();
        let mut constant = C64::new(1.0, 0.0);
        for e in items {
            match e.kind() {
                Kind::Const(c) => constant *= c,
                Kind::Product(xs) => {
                    for x in xs {
                        match x.kind() {
                            Kind::Const(c) => constant *= c,
                            _ => factors.push(x.clone()),
                        }
                    }
                }
                _ => factors.push(e),
            }
        }
        if constant == C64::new(0.0, 0.0) {
            return Expr::zero();
        }
        if constant != C64::new(1.0, 0.0) {
            factors.insert(0, Expr::constant(constant));
        }
        match factors.len() {
            0 => Expr::one(),
            1 => factors.pop().unwrap(),
            _ => Expr::from_kind(Kind::Product(factors)),
        }
    }

    pub fn add(&self, other: &Expr) -> Expr {
        Expr::sum([self.clone(), other.clone()])
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        Expr::sum([self.clone(), other.neg()])
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        Expr::product([self.clone(), other.clone()])
    }

    pub fn scale(&self, c: C64) -> Expr {
        Expr::product([Expr::constant(c), self.clone()])
    }

    pub fn neg(&self) -> Expr {
        self.scale(C64::new(-1.0, 0.0))
    }

    pub fn div(&self, other: &Expr) -> Expr {
        self.mul(&other.recip())
    }

    pub fn pow(&self, n: u32) -> Expr {
        match (n, self.kind()) {
            (0, _) => Expr::one(),
            (1, _) => self.clone(),
            (_, Kind::Const(c)) => Expr::constant(c.powi(n as i32)),
            (_, Kind::Pow(x, m)) => Expr::from_kind(Kind::Pow(x.clone(), m * n)),
            _ => Expr::from_kind(Kind::Pow(self.clone(), n)),
        }
    }

    pub fn recip(&self) -> Expr {
        match self.kind() {
            Kind::Const(c) if *c != C64::new(0.0, 0.0) => Expr::constant(c.inv()),
            Kind::Recip(x) => x.clone(),
            _ => Expr::from_kind(Kind::Recip(self.clone())),
        }
    }

    /// Complex conjugate; distributes down to variables and constants.
    pub fn conj(&self) -> Expr {
        match self.kind() {
            Kind::Const(c) => Expr::constant(c.conj()),
            Kind::Var(v) => Expr::var(v.conj()),
            Kind::Sum(xs) => Expr::sum(xs.iter().map(Expr::conj)),
            Kind::Product(xs) => Expr::product(xs.iter().map(Expr::conj)),
            Kind::Pow(x, n) => x.conj().pow(*n),
            Kind::Recip(x) => x.conj().recip(),
            Kind::Conj(x) => x.clone(),
            Kind::Atom(..) => Expr::from_kind(Kind::Conj(self.clone())),
        }
    }

    pub fn apply(atom: Atom, arg: Expr) -> Expr {
        if atom.is_zero() {
            return Expr::zero();
        }
        Expr::from_kind(Kind::Atom(atom, arg))
    }

    /// `|e|^2 = e * conj(e)`.
    pub fn abs2(&self) -> Expr {
        self.mul(&self.conj())
    }

    pub fn eval(&self, p: &Point<'_>) -> Result<C64, SymbolicError> {
        let mut path = Vec::new();
        self.eval_at(p, &mut path)
    }

    fn eval_at(&self, p: &Point<'_>, path: &mut Vec<usize>) -> Result<C64, SymbolicError> {
        let v = match self.kind() {
            Kind::Const(c) => *c,
            Kind::Var(v) => p.value(*v)?,
            Kind::Sum(xs) => {
                let mut acc = C64::new(0.0, 0.0);
                for (i, x) in xs.iter().enumerate() {
                    path.push(i);
                    acc += x.eval_at(p, path)?;
                    path.pop();
                }
                acc
            }
            Kind::Product(xs) => {
                let mut acc = C64::new(1.0, 0.0);
                for (i, x) in xs.iter().enumerate() {
                    path.push(i);
                    acc *= x.eval_at(p, path)?;
                    path.pop();
                }
                acc
            }
            Kind::Pow(x, n) => {
                path.push(0);
                let b = x.eval_at(p, path)?;
                path.pop();
                b.powi(*n as i32)
            }
            Kind::Recip(x) => {
                path.push(0);
                let d = x.eval_at(p, path)?;
                path.pop();
                if d == C64::new(0.0, 0.0) {
                    return Err(SymbolicError::DivisionByZero {
                        path: path.clone(),
                        subexpr: self.to_string(),
                    });
                }
                d.inv()
            }
            Kind::Conj(x) => {
                path.push(0);
                let v = x.eval_at(p, path)?;
                path.pop();
                v.conj()
            }
            Kind::Atom(a, x) => {
                path.push(0);
                let t = x.eval_at(p, path)?;
                path.pop();
                a.eval(t.re)?
            }
        };
        Ok(v)
    }

    /// Number of distinct nodes in the expression DAG.
    pub fn node_count(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.ptr() as usize) {
                continue;
            }
            stack.extend(e.children().cloned());
        }
        seen.len()
    }

    pub(crate) fn children(&self) -> Box<dyn Iterator<Item = &Expr> + '_> {
        match self.kind() {
            Kind::Const(_) | Kind::Var(_) => Box::new(std::iter::empty()),
            Kind::Sum(xs) | Kind::Product(xs) => Box::new(xs.iter()),
            Kind::Pow(x, _) | Kind::Recip(x) | Kind::Conj(x) | Kind::Atom(_, x) => {
                Box::new(std::iter::once(x))
            }
        }
    }
}

fn swap_conj_bits(mask: u128) -> u128 {
    let lo = 0xffff_ffffu128;
    let mut out = 0;
    for block in [0u32, 64] {
        let plain = (mask >> block) & lo;
        let bar = (mask >> (block + 32)) & lo;
        out |= (bar << block) | (plain << (block + 32));
    }
    out
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.0.hash != other.0.hash {
            return false;
        }
        match (self.kind(), other.kind()) {
            (Kind::Const(a), Kind::Const(b)) => {
                a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()
            }
            (Kind::Var(a), Kind::Var(b)) => a == b,
            (Kind::Sum(a), Kind::Sum(b)) | (Kind::Product(a), Kind::Product(b)) => a == b,
            (Kind::Pow(a, n), Kind::Pow(b, m)) => n == m && a == b,
            (Kind::Recip(a), Kind::Recip(b)) | (Kind::Conj(a), Kind::Conj(b)) => a == b,
            (Kind::Atom(f, a), Kind::Atom(g, b)) => f == g && a == b,
            _ => false,
        }
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash.hash(state);
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            Kind::Const(c) if c.im == 0.0 => write!(f, "{}", c.re),
            Kind::Const(c) => write!(f, "({}{:+}i)", c.re, c.im),
            Kind::Var(v) => write!(f, "{v}"),
            Kind::Sum(xs) => {
                write!(f, "(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            Kind::Product(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
            Kind::Pow(x, n) => write!(f, "{x}^{n}"),
            Kind::Recip(x) => write!(f, "1/({x})"),
            Kind::Conj(x) => write!(f, "conj({x})"),
            Kind::Atom(a, x) => write!(f, "{}({x})", a.name()),
        }
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $call:ident) => {
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$call(&self, &rhs)
            }
        }
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$call(self, rhs)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}
