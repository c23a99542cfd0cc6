//! Complex-valued expressions stored as a pair of real expressions, and the
//! Wirtinger derivatives `d/dz = (d/dx - i d/dy)/2`, `d/dzbar = (d/dx + i d/dy)/2`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use thiserror::Error;

use crate::expr::{is_zero, simplify, Domain, Expr, ZeroTestConfig, ZeroVerdict};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnumError {
    #[error("division by a complex expression that is identically zero")]
    DivisionByZero,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CExpr {
    pub re: Expr,
    pub im: Expr,
}

impl CExpr {
    pub fn new(re: Expr, im: Expr) -> CExpr {
        CExpr { re, im }
    }

    pub fn real(re: Expr) -> CExpr {
        CExpr { re, im: Expr::zero() }
    }

    pub fn zero() -> CExpr {
        CExpr::real(Expr::zero())
    }

    pub fn one() -> CExpr {
        CExpr::real(Expr::one())
    }

    pub fn i() -> CExpr {
        CExpr::new(Expr::zero(), Expr::one())
    }

    /// `x + i y`.
    pub fn z() -> CExpr {
        CExpr::new(Expr::x(), Expr::y())
    }

    pub fn int(n: i64) -> CExpr {
        CExpr::real(Expr::int(n))
    }

    pub fn conj(&self) -> CExpr {
        CExpr::new(self.re.clone(), -&self.im)
    }

    pub fn mul_i(&self) -> CExpr {
        CExpr::new(-&self.im, self.re.clone())
    }

    pub fn scale(&self, r: &Expr) -> CExpr {
        CExpr::new(&self.re * r, &self.im * r)
    }

    pub fn scale_q(&self, q: &BigRational) -> CExpr {
        CExpr::new(self.re.scale(q), self.im.scale(q))
    }

    pub fn scale_int(&self, n: i64) -> CExpr {
        CExpr::new(&self.re * n, &self.im * n)
    }

    pub fn square(&self) -> CExpr {
        self * self
    }

    /// `|f|^2` as a real expression.
    pub fn norm_sqr(&self) -> Expr {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn is_symbolic_zero(&self) -> bool {
        self.re.is_num_zero() && self.im.is_num_zero()
    }

    /// Quotient; rejected when the divisor simplifies to zero in both parts.
    pub fn div(&self, d: &CExpr) -> Result<CExpr, CnumError> {
        if simplify(&d.re).is_num_zero() && simplify(&d.im).is_num_zero() {
            return Err(CnumError::DivisionByZero);
        }
        if d.im.is_num_zero() {
            return Ok(CExpr::new(&self.re / &d.re, &self.im / &d.re));
        }
        let n = self * &d.conj();
        let den = d.norm_sqr();
        Ok(CExpr::new(&n.re / &den, &n.im / &den))
    }

    pub fn dx(&self) -> CExpr {
        CExpr::new(self.re.dx(), self.im.dx())
    }

    pub fn dy(&self) -> CExpr {
        CExpr::new(self.re.dy(), self.im.dy())
    }

    pub fn simplify(&self) -> CExpr {
        CExpr::new(simplify(&self.re), simplify(&self.im))
    }

    /// Zero test of both components.
    pub fn is_zero_on(&self, domain: &Domain, cfg: &ZeroTestConfig) -> ZeroVerdict {
        is_zero(&self.re, domain, cfg).and(is_zero(&self.im, domain, cfg))
    }
}

pub fn wirtinger_z(f: &CExpr) -> CExpr {
    // (f_x - i f_y) / 2
    let (fx, fy) = (f.dx(), f.dy());
    let half = BigRational::new(1.into(), 2.into());
    CExpr::new((&fx.re + &fy.im).scale(&half), (&fx.im - &fy.re).scale(&half))
}

pub fn wirtinger_zbar(f: &CExpr) -> CExpr {
    // (f_x + i f_y) / 2
    let (fx, fy) = (f.dx(), f.dy());
    let half = BigRational::new(1.into(), 2.into());
    CExpr::new((&fx.re - &fy.im).scale(&half), (&fx.im + &fy.re).scale(&half))
}

/// Cauchy-Riemann test: both components of `f_zbar` vanish.
pub fn is_holomorphic(f: &CExpr, domain: &Domain, cfg: &ZeroTestConfig) -> ZeroVerdict {
    wirtinger_zbar(f).is_zero_on(domain, cfg)
}

impl From<Expr> for CExpr {
    fn from(e: Expr) -> CExpr {
        CExpr::real(e)
    }
}

impl fmt::Debug for CExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) + i*({})", self.re, self.im)
    }
}

impl fmt::Display for CExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

fn add(a: &CExpr, b: &CExpr) -> CExpr {
    CExpr::new(&a.re + &b.re, &a.im + &b.im)
}

fn sub(a: &CExpr, b: &CExpr) -> CExpr {
    CExpr::new(&a.re - &b.re, &a.im - &b.im)
}

fn mul(a: &CExpr, b: &CExpr) -> CExpr {
    if a.im.is_num_zero() {
        return b.scale(&a.re);
    }
    if b.im.is_num_zero() {
        return a.scale(&b.re);
    }
    CExpr::new(&a.re * &b.re - &a.im * &b.im, &a.re * &b.im + &a.im * &b.re)
}

macro_rules! cbinop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl $tr<CExpr> for CExpr {
            type Output = CExpr;
            fn $m(self, rhs: CExpr) -> CExpr {
                $f(&self, &rhs)
            }
        }
        impl $tr<&CExpr> for CExpr {
            type Output = CExpr;
            fn $m(self, rhs: &CExpr) -> CExpr {
                $f(&self, rhs)
            }
        }
        impl $tr<CExpr> for &CExpr {
            type Output = CExpr;
            fn $m(self, rhs: CExpr) -> CExpr {
                $f(self, &rhs)
            }
        }
        impl $tr<&CExpr> for &CExpr {
            type Output = CExpr;
            fn $m(self, rhs: &CExpr) -> CExpr {
                $f(self, rhs)
            }
        }
    };
}

cbinop!(Add, add, add);
cbinop!(Sub, sub, sub);
cbinop!(Mul, mul, mul);

impl Neg for CExpr {
    type Output = CExpr;
    fn neg(self) -> CExpr {
        CExpr::new(-&self.re, -&self.im)
    }
}

impl Neg for &CExpr {
    type Output = CExpr;
    fn neg(self) -> CExpr {
        CExpr::new(-&self.re, -&self.im)
    }
}
