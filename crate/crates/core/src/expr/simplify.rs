//! Canonical rational-function normal form over a kernel of atoms.
//!
//! A normal form is `num / prod(d_k^m_k)` where `num` is an expanded
//! polynomial and every `d_k` is monic, free of monomial content, and
//! distinct. Cancelling a denominator factor is recorded as a note, since the
//! original expression was undefined on that factor's zero set.

use std::collections::HashMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::node::{Expr, Func, Kind};
use super::poly::{normalize_factor, AtomTable, Budget, BudgetExceeded, Poly};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemovableNote {
    /// The cancelled factor; the input was singular where it vanishes.
    pub factor: Expr,
}

impl fmt::Display for RemovableNote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "removable singularity cancelled where {} = 0", self.factor)
    }
}

#[derive(Debug, Clone)]
struct Rat {
    num: Poly,
    den: Vec<(Poly, u32)>,
}

struct Ctx {
    table: AtomTable,
    budget: Budget,
    // keyed by node address; the key expression is held so the address stays unique
    memo: HashMap<usize, (Expr, Rat)>,
    notes: Vec<RemovableNote>,
}

type R<T> = Result<T, BudgetExceeded>;

impl Ctx {
    fn new(budget: Budget) -> Ctx {
        let mut table = AtomTable::default();
        table.intern(Expr::x(), None);
        table.intern(Expr::y(), None);
        Ctx {
            table,
            budget,
            memo: HashMap::new(),
            notes: Vec::new(),
        }
    }

    fn constant(c: BigRational) -> Rat {
        Rat {
            num: Poly::constant(c),
            den: Vec::new(),
        }
    }

    fn atom(&mut self, e: Expr, root: Option<(Poly, u32)>) -> Rat {
        let id = self.table.intern(e, root);
        Rat {
            num: Poly::atom(id, 1),
            den: Vec::new(),
        }
    }

    fn expand_den(&mut self, den: &[(Poly, u32)]) -> R<Poly> {
        let mut out = Poly::one();
        for (d, m) in den {
            let p = d.pow(*m, &self.table, &mut self.budget)?;
            out = out.mul(&p, &self.table, &mut self.budget)?;
        }
        Ok(out)
    }

    /// Splits a nonzero polynomial into denominator factors and a scalar.
    fn factors_of(&mut self, p: &Poly) -> (BigRational, Vec<(Poly, u32)>) {
        let (lc, content, rest) = normalize_factor(p, &self.table);
        let mut out = Vec::new();
        for &(a, e) in &content {
            out.push((Poly::atom(a, 1), e));
        }
        if rest.as_constant().is_none() {
            out.push((rest, 1));
        }
        (lc, out)
    }

    fn merge_den(into: &mut Vec<(Poly, u32)>, extra: &[(Poly, u32)]) {
        for (d, m) in extra {
            if let Some(slot) = into.iter_mut().find(|(e, _)| e == d) {
                slot.1 += m;
            } else {
                into.push((d.clone(), *m));
            }
        }
    }

    fn cancel(&mut self, mut r: Rat) -> R<Rat> {
        if r.num.is_zero() {
            for (d, _) in &r.den {
                self.notes.push(RemovableNote {
                    factor: d.to_expr(&self.table),
                });
            }
            r.den.clear();
            return Ok(r);
        }
        for k in 0..r.den.len() {
            while r.den[k].1 > 0 {
                match r.num.div_exact(&r.den[k].0, &self.table, &mut self.budget)? {
                    Some(q) => {
                        r.num = q;
                        r.den[k].1 -= 1;
                        self.notes.push(RemovableNote {
                            factor: r.den[k].0.to_expr(&self.table),
                        });
                    }
                    None => break,
                }
            }
        }
        r.den.retain(|(_, m)| *m > 0);
        Ok(r)
    }

    fn add(&mut self, a: &Rat, b: &Rat) -> R<Rat> {
        if a.num.is_zero() {
            return Ok(b.clone());
        }
        if b.num.is_zero() {
            return Ok(a.clone());
        }
        let mut lcm: Vec<(Poly, u32)> = a.den.clone();
        for (d, m) in &b.den {
            match lcm.iter_mut().find(|(e, _)| e == d) {
                Some(slot) => slot.1 = slot.1.max(*m),
                None => lcm.push((d.clone(), *m)),
            }
        }
        let missing = |den: &[(Poly, u32)]| -> Vec<(Poly, u32)> {
            lcm.iter()
                .filter_map(|(d, m)| {
                    let have = den.iter().find(|(e, _)| e == d).map(|x| x.1).unwrap_or(0);
                    if *m > have {
                        Some((d.clone(), m - have))
                    } else {
                        None
                    }
                })
                .collect()
        };
        let fa = missing(&a.den);
        let fb = missing(&b.den);
        let ea = self.expand_den(&fa)?;
        let eb = self.expand_den(&fb)?;
        let na = a.num.mul(&ea, &self.table, &mut self.budget)?;
        let nb = b.num.mul(&eb, &self.table, &mut self.budget)?;
        let num = na.add(&nb, &mut self.budget)?;
        self.cancel(Rat { num, den: lcm })
    }

    fn mul(&mut self, a: &Rat, b: &Rat) -> R<Rat> {
        if a.num.is_zero() || b.num.is_zero() {
            let mut den = a.den.clone();
            Ctx::merge_den(&mut den, &b.den);
            return self.cancel(Rat {
                num: Poly::zero(),
                den,
            });
        }
        let num = a.num.mul(&b.num, &self.table, &mut self.budget)?;
        let mut den = a.den.clone();
        Ctx::merge_den(&mut den, &b.den);
        self.cancel(Rat { num, den })
    }

    fn recip(&mut self, a: &Rat) -> R<Option<Rat>> {
        if a.num.is_zero() {
            return Ok(None);
        }
        let (lc, fs) = self.factors_of(&a.num);
        let num = self.expand_den(&a.den)?.scale(&lc.recip());
        Ok(Some(Rat { num, den: fs }))
    }

    fn pow_int(&mut self, a: &Rat, n: i64) -> R<Option<Rat>> {
        if n.unsigned_abs() > 64 {
            return Err(BudgetExceeded);
        }
        let base = if n < 0 {
            match self.recip(a)? {
                Some(r) => r,
                None => return Ok(None),
            }
        } else {
            a.clone()
        };
        let mut out = Ctx::constant(BigRational::one());
        for _ in 0..n.unsigned_abs() {
            out = self.mul(&out, &base)?;
        }
        Ok(Some(out))
    }

    fn to_expr(&self, r: &Rat) -> Expr {
        let mut fs = vec![r.num.to_expr(&self.table)];
        for (d, m) in &r.den {
            fs.push(d.to_expr(&self.table).powi(-(*m as i64)));
        }
        Expr::mul_many(fs)
    }

    /// `None` marks a subexpression outside the normal-form language (a literal
    /// pole such as `1/0`); the caller keeps the input unchanged.
    fn convert(&mut self, e: &Expr) -> R<Option<Rat>> {
        if let Some((_, r)) = self.memo.get(&e.ptr_id()) {
            return Ok(Some(r.clone()));
        }
        let out = match e.kind() {
            Kind::Num(c) => Ctx::constant(c.clone()),
            Kind::Var(_) | Kind::Const(_) => self.atom(e.clone(), None),
            Kind::Add(ts) => {
                let mut acc = Ctx::constant(BigRational::zero());
                for t in ts {
                    let Some(rt) = self.convert(t)? else { return Ok(None) };
                    acc = self.add(&acc, &rt)?;
                }
                acc
            }
            Kind::Mul(ts) => {
                let mut acc = Ctx::constant(BigRational::one());
                for t in ts {
                    let Some(rt) = self.convert(t)? else { return Ok(None) };
                    acc = self.mul(&acc, &rt)?;
                }
                acc
            }
            Kind::Pow(b, ex) => {
                let Some(rb) = self.convert(b)? else { return Ok(None) };
                if ex.is_integer() {
                    let n: i64 = ex.numer().try_into().map_err(|_| BudgetExceeded)?;
                    match self.pow_int(&rb, n)? {
                        Some(r) => r,
                        None => return Ok(None),
                    }
                } else {
                    let q: u32 = ex.denom().try_into().map_err(|_| BudgetExceeded)?;
                    let p: i64 = ex.numer().try_into().map_err(|_| BudgetExceeded)?;
                    let base_expr = self.to_expr(&rb);
                    let root = base_expr.powr(BigRational::new(1.into(), (q as i64).into()));
                    let root_rat = match root.kind() {
                        Kind::Pow(..) => {
                            let radicand = if rb.den.is_empty() { Some((rb.num.clone(), q)) } else { None };
                            self.atom(root, radicand)
                        }
                        _ => match self.convert(&root)? {
                            Some(r) => r,
                            None => return Ok(None),
                        },
                    };
                    match self.pow_int(&root_rat, p)? {
                        Some(r) => r,
                        None => return Ok(None),
                    }
                }
            }
            Kind::Func(f, a) => {
                let Some(ra) = self.convert(a)? else { return Ok(None) };
                if *f == Func::Exp && ra.den.is_empty() && !ra.num.is_zero() {
                    // exp(sum c_k m_k) = prod exp(m_k / q_k)^(p_k), c_k = p_k / q_k
                    let mut acc = Ctx::constant(BigRational::one());
                    for (m, c) in &ra.num.terms {
                        let mut t = Poly::zero();
                        t.terms.insert(m.clone(), BigRational::one());
                        let base = t.to_expr(&self.table).scale(&BigRational::new(1.into(), c.denom().clone()));
                        let atom = self.atom(Expr::func(Func::Exp, &base), None);
                        let n: i64 = c.numer().try_into().map_err(|_| BudgetExceeded)?;
                        if n.unsigned_abs() > 64 {
                            return Err(BudgetExceeded);
                        }
                        let Some(pw) = self.pow_int(&atom, n)? else { return Ok(None) };
                        acc = self.mul(&acc, &pw)?;
                    }
                    self.memo.insert(e.ptr_id(), (e.clone(), acc.clone()));
                    return Ok(Some(acc));
                }
                let arg = self.to_expr(&ra);
                let fe = Expr::func(*f, &arg);
                match fe.kind() {
                    Kind::Func(..) => self.atom(fe, None),
                    _ => match self.convert(&fe)? {
                        Some(r) => r,
                        None => return Ok(None),
                    },
                }
            }
        };
        self.memo.insert(e.ptr_id(), (e.clone(), out.clone()));
        Ok(Some(out))
    }
}

/// Default work limit for symbolic normalization.
pub const DEFAULT_MAX_TERMS: usize = 4000;
pub const DEFAULT_MAX_OPS: u64 = 5_000_000;

/// Normal form with the list of cancelled removable singularities, or `None`
/// when the work budget runs out.
pub fn try_simplify(e: &Expr, max_terms: usize, max_ops: u64) -> Option<(Expr, Vec<RemovableNote>)> {
    let mut ctx = Ctx::new(Budget::new(max_terms, max_ops));
    match ctx.convert(e) {
        Ok(Some(r)) => {
            let out = ctx.to_expr(&r);
            Some((out, ctx.notes))
        }
        Ok(None) => Some((e.clone(), Vec::new())),
        Err(BudgetExceeded) => None,
    }
}

/// Canonical normal form; expressions too large for the budget come back unchanged.
pub fn simplify(e: &Expr) -> Expr {
    simplify_with_notes(e).0
}

pub fn simplify_with_notes(e: &Expr) -> (Expr, Vec<RemovableNote>) {
    try_simplify(e, DEFAULT_MAX_TERMS, DEFAULT_MAX_OPS).unwrap_or_else(|| (e.clone(), Vec::new()))
}

impl Expr {
    pub fn simplify(&self) -> Expr {
        simplify(self)
    }
}
