//! Flat evaluation program for a set of expressions.
//!
//! Compilation merges structurally equal subexpressions, so a kernel used by
//! many output coefficients is evaluated once per point.

use std::collections::HashMap;

use super::{Atom, Expr, Kind, Point, SymbolicError, Var, C64};

#[derive(Clone, Debug)]
enum Op {
    Const(C64),
    Var(Var),
    Sum(u32, u32),
    Product(u32, u32),
    Pow(u32, u32),
    Recip(u32),
    Conj(u32),
    Atom(u32, u32),
}

#[derive(Clone, Debug)]
pub struct Tape {
    ops: Vec<Op>,
    args: Vec<u32>,
    atoms: Vec<Atom>,
    outputs: Vec<u32>,
    sources: Vec<Expr>,
}

impl Tape {
    pub fn compile(roots: &[Expr]) -> Tape {
        let mut tape = Tape {
            ops: Vec::new(),
            args: Vec::new(),
            atoms: Vec::new(),
            outputs: Vec::new(),
            sources: Vec::new(),
        };
        let mut slots: HashMap<Expr, u32> = HashMap::new();
        for r in roots {
            let s = tape.emit(r, &mut slots);
            tape.outputs.push(s);
        }
        tape
    }

    fn emit(&mut self, e: &Expr, slots: &mut HashMap<Expr, u32>) -> u32 {
        if let Some(&s) = slots.get(e) {
            return s;
        }
        let op = match e.kind() {
            Kind::Const(c) => Op::Const(*c),
            Kind::Var(v) => Op::Var(*v),
            Kind::Sum(xs) | Kind::Product(xs) => {
                let children: Vec<u32> = xs.iter().map(|x| self.emit(x, slots)).collect();
                let start = self.args.len() as u32;
                self.args.extend(children);
                if matches!(e.kind(), Kind::Sum(_)) {
                    Op::Sum(start, xs.len() as u32)
                } else {
                    Op::Product(start, xs.len() as u32)
                }
            }
            Kind::Pow(x, n) => Op::Pow(self.emit(x, slots), *n),
            Kind::Recip(x) => Op::Recip(self.emit(x, slots)),
            Kind::Conj(x) => Op::Conj(self.emit(x, slots)),
            Kind::Atom(a, x) => {
                let arg = self.emit(x, slots);
                let idx = match self.atoms.iter().position(|b| b == a) {
                    Some(i) => i,
                    None => {
                        self.atoms.push(a.clone());
                        self.atoms.len() - 1
                    }
                };
                Op::Atom(idx as u32, arg)
            }
        };
        let slot = self.ops.len() as u32;
        self.ops.push(op);
        self.sources.push(e.clone());
        slots.insert(e.clone(), slot);
        slot
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn n_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Evaluates all outputs into `out`, using `regs` as scratch space.
    pub fn eval_into(
        &self,
        p: &Point<'_>,
        regs: &mut Vec<C64>,
        out: &mut [C64],
    ) -> Result<(), SymbolicError> {
        regs.clear();
        regs.reserve(self.ops.len());
        for (i, op) in self.ops.iter().enumerate() {
            let v = match *op {
                Op::Const(c) => c,
                Op::Var(v) => p.value(v)?,
                Op::Sum(s, n) => {
                    let mut acc = C64::new(0.0, 0.0);
                    for &a in &self.args[s as usize..(s + n) as usize] {
                        acc += regs[a as usize];
                    }
                    acc
                }
                Op::Product(s, n) => {
                    let mut acc = C64::new(1.0, 0.0);
                    for &a in &self.args[s as usize..(s + n) as usize] {
                        acc *= regs[a as usize];
                    }
                    acc
                }
                Op::Pow(a, n) => pow_u(regs[a as usize], n),
                Op::Recip(a) => {
                    let d = regs[a as usize];
                    if d == C64::new(0.0, 0.0) {
                        return Err(SymbolicError::DivisionByZero {
                            path: Vec::new(),
                            subexpr: self.sources[i].to_string(),
                        });
                    }
                    d.inv()
                }
                Op::Conj(a) => regs[a as usize].conj(),
                Op::Atom(k, a) => self.atoms[k as usize].eval(regs[a as usize].re)?,
            };
            regs.push(v);
        }
        for (o, &s) in out.iter_mut().zip(&self.outputs) {
            *o = regs[s as usize];
        }
        Ok(())
    }

    pub fn eval(&self, p: &Point<'_>) -> Result<Vec<C64>, SymbolicError> {
        let mut regs = Vec::new();
        let mut out = vec![C64::new(0.0, 0.0); self.outputs.len()];
        self.eval_into(p, &mut regs, &mut out)?;
        Ok(out)
    }
}

fn pow_u(x: C64, n: u32) -> C64 {
    let mut acc = C64::new(1.0, 0.0);
    let mut base = x;
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            acc *= base;
        }
        base *= base;
        k >>= 1;
    }
    acc
}
