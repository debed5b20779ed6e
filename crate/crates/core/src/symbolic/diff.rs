use std::collections::HashMap;

use super::{Expr, Kind, Node, SymbolicError, Var, C64};

/// Formal Wirtinger derivative `d e / d v`, treating a variable and its
/// conjugate as independent symbols.
pub fn partial(e: &Expr, v: Var) -> Result<Expr, SymbolicError> {
    let mut memo = HashMap::new();
    partial_memo(e, v, &mut memo)
}

/// Iterated derivative in the listed variables (applied left to right).
pub fn partial_all(e: &Expr, vars: &[Var]) -> Result<Expr, SymbolicError> {
    vars.iter().try_fold(e.clone(), |acc, v| partial(&acc, *v))
}

fn partial_memo(
    e: &Expr,
    v: Var,
    memo: &mut HashMap<(*const Node, Var), Expr>,
) -> Result<Expr, SymbolicError> {
    if !e.depends_on(v) {
        return Ok(Expr::zero());
    }
    if let Some(d) = memo.get(&(e.ptr(), v)) {
        return Ok(d.clone());
    }
    let d = match e.kind() {
        Kind::Const(_) => Expr::zero(),
        Kind::Var(w) => {
            if *w == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Kind::Sum(xs) => {
            let parts = xs
                .iter()
                .map(|x| partial_memo(x, v, memo))
                .collect::<Result<Vec<_>, _>>()?;
            Expr::sum(parts)
        }
        Kind::Product(xs) => {
            let mut terms = Vec::new();
            for (i, x) in xs.iter().enumerate() {
                let dx = partial_memo(x, v, memo)?;
                if dx.is_zero() {
                    continue;
                }
                let rest = xs
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, y)| y.clone());
                terms.push(Expr::product(std::iter::once(dx).chain(rest)));
            }
            Expr::sum(terms)
        }
        Kind::Pow(x, n) => {
            let dx = partial_memo(x, v, memo)?;
            Expr::product([Expr::real(*n as f64), x.pow(n - 1), dx])
        }
        Kind::Recip(x) => {
            let dx = partial_memo(x, v, memo)?;
            Expr::product([Expr::real(-1.0), dx, e.pow(2)])
        }
        Kind::Conj(x) => partial_memo(x, v.conj(), memo)?.conj(),
        Kind::Atom(a, x) => {
            let dx = partial_memo(x, v, memo)?;
            if dx.is_zero() {
                Expr::zero()
            } else {
                Expr::apply(a.derivative()?, x.clone()).mul(&dx)
            }
        }
    };
    memo.insert((e.ptr(), v), d.clone());
    Ok(d)
}

/// Rebuilds `e` bottom-up through the folding constructors, flattening
/// nested sums and products, folding constants, dropping `0` terms and `1`
/// factors, and gathering repeated factors into powers.
pub fn simplify(e: &Expr) -> Expr {
    let mut memo = HashMap::new();
    simplify_memo(e, &mut memo)
}

fn simplify_memo(e: &Expr, memo: &mut HashMap<*const Node, Expr>) -> Expr {
    if let Some(s) = memo.get(&e.ptr()) {
        return s.clone();
    }
    let s = match e.kind() {
        Kind::Const(_) | Kind::Var(_) => e.clone(),
        Kind::Sum(xs) => {
            let parts: Vec<Expr> = xs.iter().map(|x| simplify_memo(x, memo)).collect();
            combine_like_terms(Expr::sum(parts))
        }
        Kind::Product(xs) => {
            let parts: Vec<Expr> = xs.iter().map(|x| simplify_memo(x, memo)).collect();
            gather_powers(Expr::product(parts))
        }
        Kind::Pow(x, n) => simplify_memo(x, memo).pow(*n),
        Kind::Recip(x) => simplify_memo(x, memo).recip(),
        Kind::Conj(x) => simplify_memo(x, memo).conj(),
        Kind::Atom(a, x) => Expr::apply(a.clone(), simplify_memo(x, memo)),
    };
    memo.insert(e.ptr(), s.clone());
    s
}

fn split_coefficient(e: &Expr) -> (C64, Expr) {
    if let Kind::Product(xs) = e.kind() {
        if let Some(c) = xs[0].as_const() {
            return (c, Expr::product(xs[1..].iter().cloned()));
        }
    }
    match e.as_const() {
        Some(c) => (c, Expr::one()),
        None => (C64::new(1.0, 0.0), e.clone()),
    }
}

fn combine_like_terms(e: Expr) -> Expr {
    let Kind::Sum(xs) = e.kind() else { return e };
    let mut order: Vec<Expr> = Vec::new();
    let mut coeffs: HashMap<Expr, C64> = HashMap::new();
    for x in xs {
        let (c, rest) = split_coefficient(x);
        match coeffs.get_mut(&rest) {
            Some(acc) => *acc += c,
            None => {
                coeffs.insert(rest.clone(), c);
                order.push(rest);
            }
        }
    }
    if order.len() == xs.len() {
        return e;
    }
    Expr::sum(order.into_iter().map(|rest| {
        let c = coeffs[&rest];
        rest.scale(c)
    }))
}

fn gather_powers(e: Expr) -> Expr {
    let Kind::Product(xs) = e.kind() else { return e };
    let mut order: Vec<Expr> = Vec::new();
    let mut powers: HashMap<Expr, u32> = HashMap::new();
    for x in xs {
        let (base, n) = match x.kind() {
            Kind::Pow(b, n) => (b.clone(), *n),
            _ => (x.clone(), 1),
        };
        match powers.get_mut(&base) {
            Some(acc) => *acc += n,
            None => {
                powers.insert(base.clone(), n);
                order.push(base);
            }
        }
    }
    if order.len() == xs.len() {
        return e;
    }
    Expr::product(order.into_iter().map(|b| {
        let n = powers[&b];
        b.pow(n)
    }))
}
