use num_rational::BigRational;
use num_traits::One;

use super::node::{Expr, Func, Kind, Var};

/// Exact partial derivative. Results are cached on the node, so repeated
/// differentiation of shared subexpressions costs nothing.
pub fn diff(e: &Expr, v: Var) -> Expr {
    let cell = match v {
        Var::X => &e.0.dx,
        Var::Y => &e.0.dy,
    };
    if let Some(d) = cell.get() {
        return d.clone();
    }
    let d = compute(e, v);
    cell.get_or_init(|| d).clone()
}

fn compute(e: &Expr, v: Var) -> Expr {
    match e.kind() {
        Kind::Num(_) | Kind::Const(_) => Expr::zero(),
        Kind::Var(w) => {
            if *w == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Kind::Add(ts) => Expr::add_many(ts.iter().map(|t| diff(t, v)).collect()),
        Kind::Mul(fs) => {
            let ds: Vec<Expr> = fs.iter().map(|f| diff(f, v)).collect();
            let mut terms = Vec::new();
            for (i, d) in ds.iter().enumerate() {
                if d.is_num_zero() {
                    continue;
                }
                let mut prod = Vec::with_capacity(fs.len());
                for (j, f) in fs.iter().enumerate() {
                    if i == j {
                        prod.push(d.clone());
                    } else {
                        prod.push(f.clone());
                    }
                }
                terms.push(Expr::mul_many(prod));
            }
            Expr::add_many(terms)
        }
        Kind::Pow(b, ex) => {
            let db = diff(b, v);
            if db.is_num_zero() {
                return Expr::zero();
            }
            let lower = b.powr(ex - BigRational::one());
            Expr::mul_many(vec![Expr::num(ex.clone()), lower, db])
        }
        Kind::Func(f, a) => {
            let da = diff(a, v);
            if da.is_num_zero() {
                return Expr::zero();
            }
            let outer = match f {
                Func::Sin => a.cos(),
                Func::Cos => a.sin().neg(),
                Func::Tan => a.cos().powi(-2),
                Func::Exp => e.clone(),
                Func::Ln => a.recip(),
                Func::Sinh => Expr::func(Func::Cosh, a),
                Func::Cosh => Expr::func(Func::Sinh, a),
                Func::Tanh => Expr::func(Func::Cosh, a).powi(-2),
            };
            Expr::mul(&outer, &da)
        }
    }
}

impl Expr {
    pub fn diff(&self, v: Var) -> Expr {
        diff(self, v)
    }

    pub fn dx(&self) -> Expr {
        diff(self, Var::X)
    }

    pub fn dy(&self) -> Expr {
        diff(self, Var::Y)
    }
}
