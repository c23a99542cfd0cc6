use std::fmt::{self, Write};

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::node::{Expr, Kind};

// Binding strength of the printed form, used to decide on parentheses.
const P_SUM: u8 = 1;
const P_PROD: u8 = 2;
const P_UNARY: u8 = 3;
const P_ATOM: u8 = 5;

fn write_rational(out: &mut String, r: &BigRational) {
    if r.is_integer() {
        write!(out, "{}", r.numer()).unwrap();
    } else {
        write!(out, "{}/{}", r.numer(), r.denom()).unwrap();
    }
}

fn strength(e: &Expr) -> u8 {
    match e.kind() {
        Kind::Num(r) => {
            if r.is_negative() {
                P_UNARY
            } else if r.is_integer() {
                P_ATOM
            } else {
                P_PROD
            }
        }
        Kind::Const(_) | Kind::Var(_) | Kind::Func(..) => P_ATOM,
        Kind::Pow(_, ex) => {
            if is_half(ex) {
                P_ATOM
            } else {
                // printed as base^exp, binds tighter than unary minus
                4
            }
        }
        Kind::Mul(fs) => {
            if matches!(fs[0].kind(), Kind::Num(c) if c.is_negative()) {
                P_UNARY
            } else {
                P_PROD
            }
        }
        Kind::Add(_) => P_SUM,
    }
}

fn is_half(r: &BigRational) -> bool {
    r.numer() == &1.into() && r.denom() == &2.into()
}

fn write_wrapped(out: &mut String, e: &Expr, min: u8) {
    if strength(e) < min {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

fn write_pow(out: &mut String, base: &Expr, ex: &BigRational) {
    if is_half(ex) {
        out.push_str("sqrt(");
        write_expr(out, base);
        out.push(')');
        return;
    }
    write_wrapped(out, base, P_ATOM);
    out.push('^');
    if ex.is_integer() && ex.is_positive() {
        write_rational(out, ex);
    } else {
        out.push('(');
        write_rational(out, ex);
        out.push(')');
    }
}

/// Writes a product without its sign; `coeff` is the absolute coefficient.
fn write_product(out: &mut String, coeff: &BigRational, factors: &[Expr]) {
    let mut numer: Vec<&Expr> = Vec::new();
    let mut denom: Vec<(Expr, BigRational)> = Vec::new();
    for f in factors {
        match f.kind() {
            Kind::Pow(b, ex) if ex.is_negative() => denom.push((b.clone(), -ex)),
            _ => numer.push(f),
        }
    }
    let mut first = true;
    if !coeff.is_one() || numer.is_empty() {
        write_rational(out, coeff);
        first = false;
    }
    for f in numer {
        if !first {
            out.push('*');
        }
        first = false;
        let min = if matches!(f.kind(), Kind::Pow(..)) { 4 } else { P_ATOM };
        write_wrapped(out, f, min);
    }
    for (b, ex) in denom {
        out.push('/');
        if ex.is_one() {
            write_wrapped(out, &b, P_ATOM);
        } else {
            write_pow(out, &b, &ex);
        }
    }
}

fn write_expr(out: &mut String, e: &Expr) {
    match e.kind() {
        Kind::Num(r) => {
            if r.is_negative() {
                out.push('-');
                write_rational(out, &-r);
            } else {
                write_rational(out, r);
            }
        }
        Kind::Const(c) => out.push_str(c.name()),
        Kind::Var(v) => out.push_str(v.name()),
        Kind::Func(f, a) => {
            out.push_str(f.name());
            out.push('(');
            write_expr(out, a);
            out.push(')');
        }
        Kind::Pow(b, ex) => write_pow(out, b, ex),
        Kind::Mul(fs) => {
            let (coeff, rest) = match fs[0].kind() {
                Kind::Num(c) => (c.clone(), &fs[1..]),
                _ => (BigRational::one(), &fs[..]),
            };
            if coeff.is_negative() {
                out.push('-');
            }
            write_product(out, &coeff.abs(), rest);
        }
        Kind::Add(ts) => {
            for (i, t) in ts.iter().enumerate() {
                let negative = match t.kind() {
                    Kind::Num(r) => r.is_negative(),
                    Kind::Mul(fs) => matches!(fs[0].kind(), Kind::Num(c) if c.is_negative()),
                    _ => false,
                };
                if i == 0 {
                    write_wrapped(out, t, P_PROD);
                    continue;
                }
                if negative {
                    out.push_str(" - ");
                    write_wrapped(out, &t.neg(), P_PROD);
                } else {
                    out.push_str(" + ");
                    write_wrapped(out, t, P_PROD);
                }
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_expr(&mut s, self);
        f.write_str(&s)
    }
}

/// Canonical text form accepted by `parse`.
pub fn print(e: &Expr) -> String {
    e.to_string()
}
