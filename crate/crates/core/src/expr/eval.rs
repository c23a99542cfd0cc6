use std::collections::HashMap;

use num_traits::ToPrimitive;
use thiserror::Error;

use super::node::{Expr, Func, Kind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalDomainError {
    #[error("division by (nearly) zero")]
    DivisionByZero,
    #[error("logarithm of a non-positive number")]
    LogDomain,
    #[error("even root of a negative number")]
    RootDomain,
    #[error("non-finite intermediate value")]
    NonFinite,
}

#[derive(Debug, Clone)]
enum Op {
    Lit(f64),
    X,
    Y,
    Add(Vec<u32>),
    Mul(Vec<u32>),
    PowInt(u32, i32),
    PowRat(u32, i64, u64),
    Func(Func, u32),
}

/// Expression compiled to a linear program over its shared graph, for fast
/// repeated evaluation (probing, geodesic right-hand sides).
#[derive(Debug, Clone)]
pub struct Compiled {
    ops: Vec<Op>,
    roots: Vec<u32>,
}

const TINY: f64 = 1e-300;

impl Compiled {
    pub fn new(e: &Expr) -> Compiled {
        Compiled::many(std::slice::from_ref(e))
    }

    pub fn many(es: &[Expr]) -> Compiled {
        let mut c = Compiled {
            ops: Vec::new(),
            roots: Vec::new(),
        };
        let mut slot: HashMap<usize, u32> = HashMap::new();
        for e in es {
            let r = c.emit(e, &mut slot);
            c.roots.push(r);
        }
        c
    }

    fn emit(&mut self, root: &Expr, slot: &mut HashMap<usize, u32>) -> u32 {
        // iterative post-order to stay clear of deep recursion
        let mut stack: Vec<(Expr, bool)> = vec![(root.clone(), false)];
        while let Some((e, ready)) = stack.pop() {
            if slot.contains_key(&e.ptr_id()) {
                continue;
            }
            if !ready {
                stack.push((e.clone(), true));
                e.for_each_child(|c| {
                    if !slot.contains_key(&c.ptr_id()) {
                        stack.push((c.clone(), false));
                    }
                });
                continue;
            }
            let id = |c: &Expr| slot[&c.ptr_id()];
            let op = match e.kind() {
                Kind::Num(r) => Op::Lit(r.to_f64().unwrap_or(f64::NAN)),
                Kind::Const(c) => Op::Lit(c.value()),
                Kind::Var(super::node::Var::X) => Op::X,
                Kind::Var(super::node::Var::Y) => Op::Y,
                Kind::Add(ts) => Op::Add(ts.iter().map(id).collect()),
                Kind::Mul(ts) => Op::Mul(ts.iter().map(id).collect()),
                Kind::Pow(b, ex) => {
                    if ex.is_integer() {
                        Op::PowInt(id(b), ex.numer().to_i32().unwrap_or(i32::MAX))
                    } else {
                        Op::PowRat(
                            id(b),
                            ex.numer().to_i64().unwrap_or(i64::MAX),
                            ex.denom().to_u64().unwrap_or(u64::MAX),
                        )
                    }
                }
                Kind::Func(f, a) => Op::Func(*f, id(a)),
            };
            let n = self.ops.len() as u32;
            self.ops.push(op);
            slot.insert(e.ptr_id(), n);
        }
        slot[&root.ptr_id()]
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Values of all roots at (x, y).
    pub fn eval(&self, x: f64, y: f64) -> Result<Vec<f64>, EvalDomainError> {
        let mut buf = Vec::with_capacity(self.ops.len());
        self.run(x, y, &mut buf)?;
        Ok(self.roots.iter().map(|&r| buf[r as usize]).collect())
    }

    pub fn eval1(&self, x: f64, y: f64) -> Result<f64, EvalDomainError> {
        let mut buf = Vec::with_capacity(self.ops.len());
        self.run(x, y, &mut buf)?;
        Ok(buf[self.roots[0] as usize])
    }

    /// Value of the first root and the largest magnitude among all intermediate values.
    pub fn eval_with_scale(&self, x: f64, y: f64) -> Result<(f64, f64), EvalDomainError> {
        let mut buf = Vec::with_capacity(self.ops.len());
        self.run(x, y, &mut buf)?;
        let scale = buf.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok((buf[self.roots[0] as usize], scale))
    }

    fn run(&self, x: f64, y: f64, buf: &mut Vec<f64>) -> Result<(), EvalDomainError> {
        buf.clear();
        for op in &self.ops {
            let v = match op {
                Op::Lit(v) => *v,
                Op::X => x,
                Op::Y => y,
                Op::Add(ts) => ts.iter().map(|&t| buf[t as usize]).sum(),
                Op::Mul(ts) => ts.iter().map(|&t| buf[t as usize]).product(),
                Op::PowInt(b, n) => {
                    let b = buf[*b as usize];
                    if *n < 0 && b.abs() < TINY {
                        return Err(EvalDomainError::DivisionByZero);
                    }
                    b.powi(*n)
                }
                Op::PowRat(b, p, q) => {
                    let b = buf[*b as usize];
                    if *p < 0 && b.abs() < TINY {
                        return Err(EvalDomainError::DivisionByZero);
                    }
                    if b < 0.0 {
                        if q % 2 == 0 {
                            return Err(EvalDomainError::RootDomain);
                        }
                        let m = (-b).powf(*p as f64 / *q as f64);
                        if p % 2 == 0 {
                            m
                        } else {
                            -m
                        }
                    } else {
                        b.powf(*p as f64 / *q as f64)
                    }
                }
                Op::Func(f, a) => {
                    let a = buf[*a as usize];
                    match f {
                        Func::Sin => a.sin(),
                        Func::Cos => a.cos(),
                        Func::Tan => {
                            if a.cos().abs() < 1e-12 {
                                return Err(EvalDomainError::DivisionByZero);
                            }
                            a.tan()
                        }
                        Func::Exp => a.exp(),
                        Func::Ln => {
                            if a <= 0.0 {
                                return Err(EvalDomainError::LogDomain);
                            }
                            a.ln()
                        }
                        Func::Sinh => a.sinh(),
                        Func::Cosh => a.cosh(),
                        Func::Tanh => a.tanh(),
                    }
                }
            };
            if !v.is_finite() {
                return Err(EvalDomainError::NonFinite);
            }
            buf.push(v);
        }
        Ok(())
    }
}

/// Double-precision value of `e` at `(x, y)`.
pub fn eval_at(e: &Expr, x: f64, y: f64) -> Result<f64, EvalDomainError> {
    Compiled::new(e).eval1(x, y)
}

impl Expr {
    pub fn eval_at(&self, x: f64, y: f64) -> Result<f64, EvalDomainError> {
        eval_at(self, x, y)
    }
}
