use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Chart variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    Y,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
        }
    }

    pub fn other(self) -> Var {
        match self {
            Var::X => Var::Y,
            Var::Y => Var::X,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    pub fn name(self) -> &'static str {
        match self {
            Constant::Pi => "pi",
            Constant::E => "e",
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Constant::Pi => std::f64::consts::PI,
            Constant::E => std::f64::consts::E,
        }
    }
}

/// Elementary functions. `sqrt` and `neg` are not listed: they are stored as
/// `Pow(_, 1/2)` and `Mul(-1, _)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sinh,
    Cosh,
    Tanh,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Ln,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == s)
    }
}

#[derive(Debug)]
pub enum Kind {
    Num(BigRational),
    Const(Constant),
    Var(Var),
    /// Flattened, sorted, at least two operands, at most one numeric operand.
    Add(Vec<Expr>),
    /// Flattened, sorted, at least two operands, numeric coefficient first when present.
    Mul(Vec<Expr>),
    /// Exponent is never 0 or 1.
    Pow(Expr, BigRational),
    Func(Func, Expr),
}

pub struct Node {
    kind: Kind,
    hash: u64,
    size: u64,
    pub(crate) dx: OnceLock<Expr>,
    pub(crate) dy: OnceLock<Expr>,
}

/// Immutable expression in the chart variables `x`, `y`. Cloning is cheap.
#[derive(Clone)]
pub struct Expr(pub(crate) Arc<Node>);

fn rank(k: &Kind) -> u8 {
    match k {
        Kind::Num(_) => 0,
        Kind::Const(_) => 1,
        Kind::Var(_) => 2,
        Kind::Pow(..) => 3,
        Kind::Func(..) => 4,
        Kind::Mul(_) => 5,
        Kind::Add(_) => 6,
    }
}

fn hash_kind(k: &Kind) -> u64 {
    let mut h = DefaultHasher::new();
    rank(k).hash(&mut h);
    match k {
        Kind::Num(r) => r.hash(&mut h),
        Kind::Const(c) => c.hash(&mut h),
        Kind::Var(v) => v.hash(&mut h),
        Kind::Add(ts) | Kind::Mul(ts) => {
            for t in ts {
                t.0.hash.hash(&mut h);
            }
        }
        Kind::Pow(b, e) => {
            b.0.hash.hash(&mut h);
            e.hash(&mut h);
        }
        Kind::Func(f, a) => {
            f.hash(&mut h);
            a.0.hash.hash(&mut h);
        }
    }
    h.finish()
}

fn size_kind(k: &Kind) -> u64 {
    match k {
        Kind::Num(_) | Kind::Const(_) | Kind::Var(_) => 1,
        Kind::Add(ts) | Kind::Mul(ts) => ts
            .iter()
            .fold(1u64, |acc, t| acc.saturating_add(t.0.size)),
        Kind::Pow(b, _) => b.0.size.saturating_add(1),
        Kind::Func(_, a) => a.0.size.saturating_add(1),
    }
}

impl Expr {
    fn from_kind(kind: Kind) -> Expr {
        let hash = hash_kind(&kind);
        let size = size_kind(&kind);
        Expr(Arc::new(Node {
            kind,
            hash,
            size,
            dx: OnceLock::new(),
            dy: OnceLock::new(),
        }))
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub fn structural_hash(&self) -> u64 {
        self.0.hash
    }

    /// Number of nodes when the shared graph is expanded into a tree (saturating).
    pub fn tree_size(&self) -> u64 {
        self.0.size
    }

    /// Number of distinct nodes in the shared graph.
    pub fn dag_size(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(Arc::as_ptr(&e.0) as usize) {
                continue;
            }
            e.for_each_child(|c| stack.push(c.clone()));
        }
        seen.len()
    }

    pub(crate) fn for_each_child(&self, mut f: impl FnMut(&Expr)) {
        match self.kind() {
            Kind::Add(ts) | Kind::Mul(ts) => ts.iter().for_each(&mut f),
            Kind::Pow(b, _) => f(b),
            Kind::Func(_, a) => f(a),
            _ => {}
        }
    }

    pub fn ptr_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    // ---- leaves ----

    pub fn num(r: BigRational) -> Expr {
        Expr::from_kind(Kind::Num(r))
    }

    pub fn int(i: i64) -> Expr {
        Expr::num(BigRational::from_integer(BigInt::from(i)))
    }

    pub fn frac(n: i64, d: i64) -> Expr {
        Expr::num(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn var(v: Var) -> Expr {
        Expr::from_kind(Kind::Var(v))
    }

    pub fn x() -> Expr {
        Expr::var(Var::X)
    }

    pub fn y() -> Expr {
        Expr::var(Var::Y)
    }

    pub fn constant(c: Constant) -> Expr {
        Expr::from_kind(Kind::Const(c))
    }

    pub fn as_num(&self) -> Option<&BigRational> {
        match self.kind() {
            Kind::Num(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_num_zero(&self) -> bool {
        matches!(self.kind(), Kind::Num(r) if r.is_zero())
    }

    pub fn is_num_one(&self) -> bool {
        matches!(self.kind(), Kind::Num(r) if r.is_one())
    }

    /// True when the expression contains no chart variable.
    pub fn is_constant(&self) -> bool {
        !self.depends_on(Var::X) && !self.depends_on(Var::Y)
    }

    pub fn depends_on(&self, v: Var) -> bool {
        let mut memo: HashMap<usize, bool> = HashMap::new();
        depends(self, v, &mut memo)
    }

    // ---- smart constructors ----

    pub fn add(a: &Expr, b: &Expr) -> Expr {
        Expr::add_many(vec![a.clone(), b.clone()])
    }

    pub fn sub(a: &Expr, b: &Expr) -> Expr {
        Expr::add_many(vec![a.clone(), b.neg()])
    }

    pub fn mul(a: &Expr, b: &Expr) -> Expr {
        Expr::mul_many(vec![a.clone(), b.clone()])
    }

    pub fn div(a: &Expr, b: &Expr) -> Expr {
        Expr::mul_many(vec![a.clone(), b.recip()])
    }

    pub fn neg(&self) -> Expr {
        Expr::mul_many(vec![Expr::int(-1), self.clone()])
    }

    pub fn recip(&self) -> Expr {
        self.powr(BigRational::from_integer(BigInt::from(-1)))
    }

    pub fn powi(&self, n: i64) -> Expr {
        self.powr(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn sqrt(&self) -> Expr {
        self.powr(BigRational::new(BigInt::from(1), BigInt::from(2)))
    }

    pub fn scale(&self, r: &BigRational) -> Expr {
        Expr::mul_many(vec![Expr::num(r.clone()), self.clone()])
    }

    pub fn add_many(terms: Vec<Expr>) -> Expr {
        let mut flat: Vec<Expr> = Vec::with_capacity(terms.len());
        for t in terms {
            match t.kind() {
                Kind::Add(ts) => flat.extend(ts.iter().cloned()),
                _ => flat.push(t),
            }
        }
        let mut constant = BigRational::zero();
        // (rest, coefficient) in first-seen order
        let mut slots: Vec<(Option<Expr>, BigRational)> = Vec::new();
        let mut index: HashMap<u64, Vec<usize>> = HashMap::new();
        for t in flat {
            if let Kind::Num(r) = t.kind() {
                constant += r;
                continue;
            }
            let (c, rest) = split_coeff(&t);
            let key = rest.0.hash;
            let bucket = index.entry(key).or_default();
            let mut found = false;
            for &i in bucket.iter() {
                if slots[i].0.as_ref().unwrap() == &rest {
                    slots[i].1 += &c;
                    found = true;
                    break;
                }
            }
            if !found {
                bucket.push(slots.len());
                slots.push((Some(rest), c));
            }
        }
        let mut out: Vec<Expr> = Vec::with_capacity(slots.len() + 1);
        for (rest, c) in slots {
            if c.is_zero() {
                continue;
            }
            let rest = rest.unwrap();
            if c.is_one() {
                out.push(rest);
            } else {
                out.push(with_coeff(c, &rest));
            }
        }
        if !constant.is_zero() {
            out.push(Expr::num(constant));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => {
                out.sort_by(canonical_cmp);
                Expr::from_kind(Kind::Add(out))
            }
        }
    }

    pub fn mul_many(factors: Vec<Expr>) -> Expr {
        let mut flat: Vec<Expr> = Vec::with_capacity(factors.len());
        for f in factors {
            match f.kind() {
                Kind::Mul(fs) => flat.extend(fs.iter().cloned()),
                _ => flat.push(f),
            }
        }
        let mut coeff = BigRational::one();
        let mut slots: Vec<(Expr, BigRational)> = Vec::new();
        let mut index: HashMap<u64, Vec<usize>> = HashMap::new();
        for f in flat {
            if let Kind::Num(r) = f.kind() {
                if r.is_zero() {
                    return Expr::zero();
                }
                coeff *= r;
                continue;
            }
            let (base, e) = match f.kind() {
                Kind::Pow(b, e) => (b.clone(), e.clone()),
                _ => (f.clone(), BigRational::one()),
            };
            let bucket = index.entry(base.0.hash).or_default();
            let mut found = false;
            for &i in bucket.iter() {
                // only merge exponents of equal sign: cancellation belongs to simplify
                if slots[i].0 == base && slots[i].1.is_negative() == e.is_negative() {
                    slots[i].1 += &e;
                    found = true;
                    break;
                }
            }
            if !found {
                bucket.push(slots.len());
                slots.push((base, e));
            }
        }
        let mut out: Vec<Expr> = Vec::with_capacity(slots.len() + 1);
        let mut extra_coeff = BigRational::one();
        for (b, e) in slots {
            let p = b.powr(e);
            match p.kind() {
                Kind::Num(r) => extra_coeff *= r,
                Kind::Mul(fs) => {
                    for f in fs {
                        if let Kind::Num(r) = f.kind() {
                            extra_coeff *= r;
                        } else {
                            out.push(f.clone());
                        }
                    }
                }
                _ => out.push(p),
            }
        }
        coeff *= extra_coeff;
        if coeff.is_zero() {
            return Expr::zero();
        }
        if out.is_empty() {
            return Expr::num(coeff);
        }
        out.sort_by(canonical_cmp);
        // merging after a power expansion may leave equal neighbours; rare, fold once more
        if has_equal_neighbours(&out) {
            let mut v = vec![Expr::num(coeff)];
            v.extend(out);
            return Expr::mul_many(v);
        }
        if coeff.is_one() {
            if out.len() == 1 {
                return out.pop().unwrap();
            }
        } else {
            out.insert(0, Expr::num(coeff));
        }
        Expr::from_kind(Kind::Mul(out))
    }

    pub fn powr(&self, e: BigRational) -> Expr {
        if e.is_zero() {
            return Expr::one();
        }
        if e.is_one() {
            return self.clone();
        }
        match self.kind() {
            Kind::Num(r) => {
                if let Some(v) = rational_pow(r, &e) {
                    return Expr::num(v);
                }
            }
            Kind::Pow(b, e0) if e.is_integer() => {
                return b.powr(e0 * &e);
            }
            Kind::Mul(fs) if e.is_integer() => {
                let parts: Vec<Expr> = fs.iter().map(|f| f.powr(e.clone())).collect();
                return Expr::mul_many(parts);
            }
            _ => {}
        }
        Expr::from_kind(Kind::Pow(self.clone(), e))
    }

    pub fn func(f: Func, arg: &Expr) -> Expr {
        if let Kind::Num(r) = arg.kind() {
            if r.is_zero() {
                match f {
                    Func::Sin | Func::Tan | Func::Sinh | Func::Tanh => return Expr::zero(),
                    Func::Cos | Func::Exp | Func::Cosh => return Expr::one(),
                    Func::Ln => {}
                }
            }
            if r.is_one() && f == Func::Ln {
                return Expr::zero();
            }
        }
        if f == Func::Ln {
            if let Kind::Func(Func::Exp, inner) = arg.kind() {
                return inner.clone();
            }
        }
        Expr::from_kind(Kind::Func(f, arg.clone()))
    }

    pub fn sin(&self) -> Expr {
        Expr::func(Func::Sin, self)
    }
    pub fn cos(&self) -> Expr {
        Expr::func(Func::Cos, self)
    }
    pub fn exp(&self) -> Expr {
        Expr::func(Func::Exp, self)
    }
    pub fn ln(&self) -> Expr {
        Expr::func(Func::Ln, self)
    }
}

fn depends(e: &Expr, v: Var, memo: &mut HashMap<usize, bool>) -> bool {
    if let Some(&b) = memo.get(&e.ptr_id()) {
        return b;
    }
    let r = match e.kind() {
        Kind::Var(w) => *w == v,
        Kind::Num(_) | Kind::Const(_) => false,
        Kind::Add(ts) | Kind::Mul(ts) => ts.iter().any(|t| depends(t, v, memo)),
        Kind::Pow(b, _) => depends(b, v, memo),
        Kind::Func(_, a) => depends(a, v, memo),
    };
    memo.insert(e.ptr_id(), r);
    r
}

fn has_equal_neighbours(v: &[Expr]) -> bool {
    v.windows(2).any(|w| {
        let (b0, e0) = base_exp(&w[0]);
        let (b1, e1) = base_exp(&w[1]);
        b0 == b1 && e0.is_negative() == e1.is_negative()
    })
}

fn base_exp(e: &Expr) -> (Expr, BigRational) {
    match e.kind() {
        Kind::Pow(b, x) => (b.clone(), x.clone()),
        _ => (e.clone(), BigRational::one()),
    }
}

/// Splits `c * rest` with rational `c`.
pub(crate) fn split_coeff(t: &Expr) -> (BigRational, Expr) {
    if let Kind::Mul(fs) = t.kind() {
        if let Kind::Num(c) = fs[0].kind() {
            let rest = if fs.len() == 2 {
                fs[1].clone()
            } else {
                Expr::from_kind(Kind::Mul(fs[1..].to_vec()))
            };
            return (c.clone(), rest);
        }
    }
    (BigRational::one(), t.clone())
}

fn with_coeff(c: BigRational, rest: &Expr) -> Expr {
    match rest.kind() {
        Kind::Mul(fs) => {
            let mut v = Vec::with_capacity(fs.len() + 1);
            v.push(Expr::num(c));
            v.extend(fs.iter().cloned());
            Expr::from_kind(Kind::Mul(v))
        }
        _ => Expr::from_kind(Kind::Mul(vec![Expr::num(c), rest.clone()])),
    }
}

/// Exact rational power when the result is rational.
pub(crate) fn rational_pow(r: &BigRational, e: &BigRational) -> Option<BigRational> {
    let p = e.numer().to_i64()?;
    let q = e.denom().to_u32()?;
    if r.is_zero() {
        return if p > 0 { Some(BigRational::zero()) } else { None };
    }
    if p.unsigned_abs() > 4096 {
        return None;
    }
    let base = if q == 1 {
        r.clone()
    } else {
        let neg = r.is_negative();
        if neg && q % 2 == 0 {
            return None;
        }
        let n = exact_root(&r.numer().abs(), q)?;
        let d = exact_root(r.denom(), q)?;
        let v = BigRational::new(n, d);
        if neg {
            -v
        } else {
            v
        }
    };
    let mut out = num_traits::pow(base, p.unsigned_abs() as usize);
    if p < 0 {
        out = out.recip();
    }
    Some(out)
}

fn exact_root(n: &BigInt, q: u32) -> Option<BigInt> {
    let r = n.nth_root(q);
    if num_traits::pow(r.clone(), q as usize) == *n {
        Some(r)
    } else {
        None
    }
}

/// Total order used to sort commutative operands.
pub fn canonical_cmp(a: &Expr, b: &Expr) -> Ordering {
    if Arc::ptr_eq(&a.0, &b.0) {
        return Ordering::Equal;
    }
    let (ra, rb) = (rank(a.kind()), rank(b.kind()));
    if ra != rb {
        return ra.cmp(&rb);
    }
    match (a.kind(), b.kind()) {
        (Kind::Num(x), Kind::Num(y)) => x.cmp(y),
        (Kind::Const(x), Kind::Const(y)) => x.cmp(y),
        (Kind::Var(x), Kind::Var(y)) => x.cmp(y),
        (Kind::Pow(b1, e1), Kind::Pow(b2, e2)) => {
            canonical_cmp(b1, b2).then_with(|| e1.cmp(e2))
        }
        (Kind::Func(f1, a1), Kind::Func(f2, a2)) => f1.cmp(f2).then_with(|| canonical_cmp(a1, a2)),
        _ => a.0.hash.cmp(&b.0.hash).then_with(|| {
            if a == b {
                Ordering::Equal
            } else {
                a.0.size.cmp(&b.0.size)
            }
        }),
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Expr) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.0.hash != other.0.hash || self.0.size != other.0.size {
            return false;
        }
        match (self.kind(), other.kind()) {
            (Kind::Num(a), Kind::Num(b)) => a == b,
            (Kind::Const(a), Kind::Const(b)) => a == b,
            (Kind::Var(a), Kind::Var(b)) => a == b,
            (Kind::Add(a), Kind::Add(b)) | (Kind::Mul(a), Kind::Mul(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x == y)
            }
            (Kind::Pow(a, e), Kind::Pow(b, f)) => e == f && a == b,
            (Kind::Func(f, a), Kind::Func(g, b)) => f == g && a == b,
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
        write!(f, "Expr({})", self)
    }
}

impl From<i64> for Expr {
    fn from(i: i64) -> Expr {
        Expr::int(i)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:path) => {
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                $f(&self, &rhs)
            }
        }
        impl std::ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                $f(&self, rhs)
            }
        }
        impl std::ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                $f(self, &rhs)
            }
        }
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                $f(self, rhs)
            }
        }
        impl std::ops::$tr<i64> for Expr {
            type Output = Expr;
            fn $m(self, rhs: i64) -> Expr {
                $f(&self, &Expr::int(rhs))
            }
        }
        impl std::ops::$tr<i64> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: i64) -> Expr {
                $f(self, &Expr::int(rhs))
            }
        }
    };
}

binop!(Add, add, Expr::add);
binop!(Sub, sub, Expr::sub);
binop!(Mul, mul, Expr::mul);
binop!(Div, div, Expr::div);

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

impl Default for Expr {
    fn default() -> Expr {
        Expr::zero()
    }
}
