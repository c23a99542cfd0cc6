//! Metrics of signature (1,1) in null coordinates `g = lambda dx dy`.
//!
//! The codifferential is a pair `A1 = a1 d/dx^3`, `A2 = a2 d/dy^3`; it is
//! quasi-holomorphic when `a1` depends on `x` only and `a2` on `y` only.

use crate::decision::{flowchart, DecisionError, Verdict};
use crate::expr::{is_zero, Domain, Expr, ZeroTestConfig, ZeroVerdict};
use crate::geometry::{GeometryError, Metric};
use crate::invariants::{Codifferential, InvariantError, Invariants, SymTensor3};
use crate::verify::bracket_fh;

/// `(d a1/dy = 0, d a2/dx = 0)`.
pub fn quasi_holo_check(a1: &Expr, a2: &Expr, domain: &Domain, cfg: &ZeroTestConfig) -> (ZeroVerdict, ZeroVerdict) {
    (is_zero(&a1.dy(), domain, cfg), is_zero(&a2.dx(), domain, cfg))
}

/// The cubic `F = a1 px^3 + B1 px^2 py + B2 px py^2 - a2 py^3`.
pub fn null_cubic(a1: &Expr, a2: &Expr, b1: &Expr, b2: &Expr) -> SymTensor3 {
    SymTensor3::from_polynomial(&[a1.clone(), b1.clone(), b2.clone(), a2.neg()])
}

/// `{F, H}` coefficients of `px^4, px^3 py, px^2 py^2, px py^3, py^4` on a null chart.
pub fn bracket_fh_null(f: &SymTensor3, g: &Metric) -> Result<[Expr; 5], GeometryError> {
    match g {
        Metric::Null { .. } => Ok(bracket_fh(f, g)),
        _ => Err(GeometryError::ChartMismatch),
    }
}

/// `dx dy / (y + f(x))^2`, whose curvature is `2 f'(x)`.
pub fn normal_form_metric(f: &Expr) -> Metric {
    let d = Expr::y() + f;
    Metric::null((&d * &d).recip())
}

pub fn decide_pseudo(g: &Metric, a: &Codifferential, domain: &Domain, cfg: &ZeroTestConfig) -> Result<Verdict, DecisionError> {
    let (Metric::Null { .. }, Codifferential::NullPair { .. }) = (g, a) else {
        return Err(InvariantError::ChartMismatch.into());
    };
    g.validate(domain, cfg)?;
    let inv = Invariants::new(g, a)?;
    flowchart(&inv, domain, cfg)
}
