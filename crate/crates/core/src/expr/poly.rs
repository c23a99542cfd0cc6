//! Sparse multivariate polynomials over the rationals in a table of atoms
//! (chart variables, constants, transcendental kernels, radicals).

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::node::{canonical_cmp, Expr};

pub type Mono = Vec<(u32, u32)>;

#[derive(Debug)]
pub struct BudgetExceeded;

pub struct Budget {
    pub max_terms: usize,
    pub ops_left: u64,
}

impl Budget {
    pub fn new(max_terms: usize, ops: u64) -> Budget {
        Budget {
            max_terms,
            ops_left: ops,
        }
    }

    fn spend(&mut self, n: u64) -> Result<(), BudgetExceeded> {
        if self.ops_left < n {
            return Err(BudgetExceeded);
        }
        self.ops_left -= n;
        Ok(())
    }

    fn check(&self, p: &Poly) -> Result<(), BudgetExceeded> {
        if p.terms.len() > self.max_terms {
            Err(BudgetExceeded)
        } else {
            Ok(())
        }
    }
}

pub struct Atom {
    pub expr: Expr,
    /// For a radical atom `b^(1/q)`: the polynomial `b` and `q`, so that `atom^q`
    /// can be replaced by `b`.
    pub root: Option<(Poly, u32)>,
}

#[derive(Default)]
pub struct AtomTable {
    pub atoms: Vec<Atom>,
    index: HashMap<Expr, u32>,
    rank: Vec<u32>,
}

impl AtomTable {
    pub fn intern(&mut self, e: Expr, root: Option<(Poly, u32)>) -> u32 {
        if let Some(&i) = self.index.get(&e) {
            return i;
        }
        let id = self.atoms.len() as u32;
        self.atoms.push(Atom {
            expr: e.clone(),
            root,
        });
        self.index.insert(e, id);
        let mut order: Vec<u32> = (0..self.atoms.len() as u32).collect();
        order.sort_by(|&a, &b| canonical_cmp(&self.atoms[a as usize].expr, &self.atoms[b as usize].expr));
        self.rank = vec![0; order.len()];
        for (r, &a) in order.iter().enumerate() {
            self.rank[a as usize] = r as u32;
        }
        id
    }

    pub fn has_roots(&self) -> bool {
        self.atoms.iter().any(|a| a.root.is_some())
    }

    /// Lexicographic monomial order with atoms ranked by canonical expression order,
    /// so that normal forms do not depend on the order atoms were met.
    pub fn lex_cmp(&self, a: &Mono, b: &Mono) -> Ordering {
        let mut va: Vec<(u32, u32)> = a.iter().map(|&(i, e)| (self.rank[i as usize], e)).collect();
        let mut vb: Vec<(u32, u32)> = b.iter().map(|&(i, e)| (self.rank[i as usize], e)).collect();
        va.sort_unstable();
        vb.sort_unstable();
        let (mut i, mut j) = (0, 0);
        loop {
            match (va.get(i), vb.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some(&(ra, ea)), Some(&(rb, eb))) => {
                    if ra < rb {
                        return Ordering::Greater;
                    }
                    if rb < ra {
                        return Ordering::Less;
                    }
                    if ea != eb {
                        return ea.cmp(&eb);
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    pub terms: BTreeMap<Mono, BigRational>,
}

fn mono_mul(a: &Mono, b: &Mono) -> Mono {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(&(x, e)), Some(&(y, f))) => {
                if x == y {
                    out.push((x, e + f));
                    i += 1;
                    j += 1;
                } else if x < y {
                    out.push((x, e));
                    i += 1;
                } else {
                    out.push((y, f));
                    j += 1;
                }
            }
            (Some(&t), None) => {
                out.push(t);
                i += 1;
            }
            (None, Some(&t)) => {
                out.push(t);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// `a / b` when `b` divides `a` as monomials.
fn mono_div(a: &Mono, b: &Mono) -> Option<Mono> {
    let mut out = Vec::with_capacity(a.len());
    let mut j = 0;
    for &(x, e) in a {
        if j < b.len() && b[j].0 < x {
            return None;
        }
        if j < b.len() && b[j].0 == x {
            let f = b[j].1;
            if f > e {
                return None;
            }
            if e > f {
                out.push((x, e - f));
            }
            j += 1;
        } else {
            out.push((x, e));
        }
    }
    if j < b.len() {
        return None;
    }
    Some(out)
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn constant(c: BigRational) -> Poly {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Vec::new(), c);
        }
        p
    }

    pub fn one() -> Poly {
        Poly::constant(BigRational::one())
    }

    pub fn atom(id: u32, exp: u32) -> Poly {
        let mut p = Poly::zero();
        p.terms.insert(vec![(id, exp)], BigRational::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    pub fn add_assign_scaled(&mut self, other: &Poly, c: &BigRational, m: &Mono) {
        for (mono, coef) in &other.terms {
            let key = if m.is_empty() { mono.clone() } else { mono_mul(mono, m) };
            let v = coef * c;
            match self.terms.get_mut(&key) {
                Some(x) => {
                    *x += v;
                    if x.is_zero() {
                        self.terms.remove(&key);
                    }
                }
                None => {
                    self.terms.insert(key, v);
                }
            }
        }
    }

    pub fn add(&self, other: &Poly, budget: &mut Budget) -> Result<Poly, BudgetExceeded> {
        budget.spend(other.terms.len() as u64 + 1)?;
        let mut out = self.clone();
        out.add_assign_scaled(other, &BigRational::one(), &Vec::new());
        budget.check(&out)?;
        Ok(out)
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly, table: &AtomTable, budget: &mut Budget) -> Result<Poly, BudgetExceeded> {
        budget.spend((self.terms.len() as u64) * (other.terms.len() as u64) + 1)?;
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            out.add_assign_scaled(other, c, m);
            budget.check(&out)?;
        }
        out.reduce_roots(table, budget)
    }

    pub fn pow(&self, n: u32, table: &AtomTable, budget: &mut Budget) -> Result<Poly, BudgetExceeded> {
        let mut out = Poly::one();
        for _ in 0..n {
            out = out.mul(self, table, budget)?;
        }
        Ok(out)
    }

    /// Replaces `r^q` by its radicand for radical atoms.
    fn reduce_roots(self, table: &AtomTable, budget: &mut Budget) -> Result<Poly, BudgetExceeded> {
        if !table.has_roots() {
            return Ok(self);
        }
        let needs = self.terms.keys().any(|m| {
            m.iter().any(|&(a, e)| matches!(&table.atoms[a as usize].root, Some((_, q)) if e >= *q))
        });
        if !needs {
            return Ok(self);
        }
        let mut out = Poly::zero();
        for (m, c) in self.terms {
            let mut rest: Mono = Vec::new();
            let mut factor = Poly::one();
            for &(a, e) in &m {
                match &table.atoms[a as usize].root {
                    Some((base, q)) if e >= *q => {
                        let (k, r) = (e / q, e % q);
                        if r > 0 {
                            rest.push((a, r));
                        }
                        for _ in 0..k {
                            factor = factor.mul(base, table, budget)?;
                        }
                    }
                    _ => rest.push((a, e)),
                }
            }
            out.add_assign_scaled(&factor, &c, &rest);
            budget.check(&out)?;
        }
        Ok(out)
    }

    pub fn leading<'a>(&'a self, table: &AtomTable) -> Option<(&'a Mono, &'a BigRational)> {
        let mut best: Option<(&Mono, &BigRational)> = None;
        for (m, c) in &self.terms {
            best = match best {
                None => Some((m, c)),
                Some((bm, bc)) => {
                    if table.lex_cmp(m, bm) == Ordering::Greater {
                        Some((m, c))
                    } else {
                        Some((bm, bc))
                    }
                }
            };
        }
        best
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly, table: &AtomTable, budget: &mut Budget) -> Result<Option<Poly>, BudgetExceeded> {
        let (dm, dc) = match d.leading(table) {
            Some((m, c)) => (m.clone(), c.clone()),
            None => return Ok(None),
        };
        let mut r = self.clone();
        let mut q = Poly::zero();
        while !r.is_zero() {
            budget.spend(d.terms.len() as u64 + r.terms.len() as u64)?;
            let (rm, rc) = {
                let (m, c) = r.leading(table).unwrap();
                (m.clone(), c.clone())
            };
            let t = match mono_div(&rm, &dm) {
                Some(t) => t,
                None => return Ok(None),
            };
            let c = rc / &dc;
            q.add_assign_scaled(&Poly::one(), &c, &t);
            r.add_assign_scaled(d, &-c, &t);
            budget.check(&r)?;
        }
        Ok(Some(q))
    }

    /// Monomial content: the largest monomial dividing every term.
    pub fn monomial_content(&self) -> Mono {
        let mut it = self.terms.keys();
        let mut g: Mono = match it.next() {
            Some(m) => m.clone(),
            None => return Vec::new(),
        };
        for m in it {
            g = g
                .iter()
                .filter_map(|&(a, e)| m.iter().find(|&&(b, _)| b == a).map(|&(_, f)| (a, e.min(f))))
                .collect();
            if g.is_empty() {
                break;
            }
        }
        g
    }

    pub fn div_mono(&self, m: &Mono) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (mono_div(k, m).expect("monomial content divides"), v.clone()))
                .collect(),
        }
    }

    pub fn to_expr(&self, table: &AtomTable) -> Expr {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let mut fs = vec![Expr::num(c.clone())];
            for &(a, e) in m {
                fs.push(table.atoms[a as usize].expr.powi(e as i64));
            }
            terms.push(Expr::mul_many(fs));
        }
        Expr::add_many(terms)
    }
}

/// Content-free form of a nonzero polynomial: returns `(lc, monomial content, rest)`
/// with `p = lc * content * rest` and `rest` monic in the canonical order.
pub fn normalize_factor(p: &Poly, table: &AtomTable) -> (BigRational, Mono, Poly) {
    let content = p.monomial_content();
    let rest = if content.is_empty() { p.clone() } else { p.div_mono(&content) };
    let lc = rest.leading(table).map(|(_, c)| c.clone()).unwrap_or_else(BigRational::one);
    let rest = rest.scale(&lc.recip());
    (lc, content, rest)
}
