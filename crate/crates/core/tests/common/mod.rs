#![allow(dead_code)]

use cubicflow::cnum::CExpr;
use cubicflow::expr::*;
use cubicflow::geometry::Metric;
use cubicflow::invariants::SymTensor3;
use proptest::prelude::*;

pub fn p(s: &str) -> Expr {
    parse(s).unwrap()
}

pub fn c(re: &str, im: &str) -> CExpr {
    CExpr::new(p(re), p(im))
}

pub fn unit() -> Domain {
    Domain::new((0.2, 1.0), (0.2, 1.0))
}

pub fn cfg() -> ZeroTestConfig {
    ZeroTestConfig::default()
}

pub fn assert_zero(e: &Expr, d: &Domain, what: &str) {
    let v = is_zero(e, d, &cfg());
    assert!(v.is_zero(), "{what}: {v}");
}

/// Random polynomial in x, y of total degree <= 3 with small integer
/// coefficients, optionally times a transcendental factor.
pub fn poly() -> impl Strategy<Value = Expr> {
    (prop::collection::vec(-4i64..=4, 10), 0usize..4).prop_map(|(cs, f)| {
        let monos = ["1", "x", "y", "x^2", "x*y", "y^2", "x^3", "x^2*y", "x*y^2", "y^3"];
        let mut terms = Vec::new();
        for (k, m) in monos.iter().enumerate() {
            terms.push(p(m) * cs[k]);
        }
        let base = Expr::add_many(terms);
        match f {
            0 => base,
            1 => base * p("exp(x/3)"),
            2 => base * p("sin(y)"),
            _ => base + p("cos(x*y)"),
        }
    })
}

pub fn cpoly() -> impl Strategy<Value = CExpr> {
    (poly(), poly()).prop_map(|(a, b)| CExpr::new(a, b))
}

/// Central second-order finite difference of a closure.
pub fn fd_x(f: &dyn Fn(f64, f64) -> f64, x: f64, y: f64, h: f64) -> f64 {
    (f(x + h, y) - f(x - h, y)) / (2.0 * h)
}

pub fn fd_y(f: &dyn Fn(f64, f64) -> f64, x: f64, y: f64, h: f64) -> f64 {
    (f(x, y + h) - f(x, y - h)) / (2.0 * h)
}

pub fn ev(e: &Expr) -> impl Fn(f64, f64) -> f64 {
    let c = Compiled::new(e);
    move |x, y| c.eval1(x, y).unwrap()
}

// fourth-order stencils
pub fn d1(f: &dyn Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    (-f(t + 2.0 * h) + 8.0 * f(t + h) - 8.0 * f(t - h) + f(t - 2.0 * h)) / (12.0 * h)
}

pub fn d2(f: &dyn Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    (-f(t + 2.0 * h) + 16.0 * f(t + h) - 30.0 * f(t) + 16.0 * f(t - h) - f(t - 2.0 * h)) / (12.0 * h * h)
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Gauss curvature by Brioschi's formula with finite-difference derivatives of
/// the numerically evaluated first fundamental form.
pub fn brioschi(e: &dyn Fn(f64, f64) -> f64, f: &dyn Fn(f64, f64) -> f64, g: &dyn Fn(f64, f64) -> f64, u: f64, v: f64) -> f64 {
    let h = 1e-2;
    let du = |q: &dyn Fn(f64, f64) -> f64| d1(&|t| q(t, v), u, h);
    let dv = |q: &dyn Fn(f64, f64) -> f64| d1(&|t| q(u, t), v, h);
    let duu = |q: &dyn Fn(f64, f64) -> f64| d2(&|t| q(t, v), u, h);
    let dvv = |q: &dyn Fn(f64, f64) -> f64| d2(&|t| q(u, t), v, h);
    let duv = |q: &dyn Fn(f64, f64) -> f64| d1(&|s| d1(&|t| q(t, s), u, h), v, h);
    let (ee, ff, gg) = (e(u, v), f(u, v), g(u, v));
    let (eu, ev_, fu, fv, gu, gv) = (du(e), dv(e), du(f), dv(f), du(g), dv(g));
    let a = [
        [-0.5 * dvv(e) + duv(f) - 0.5 * duu(g), 0.5 * eu, fu - 0.5 * ev_],
        [fv - 0.5 * gu, ee, ff],
        [0.5 * gv, ff, gg],
    ];
    let b = [[0.0, 0.5 * ev_, 0.5 * gu], [0.5 * ev_, ee, ff], [0.5 * gu, ff, gg]];
    (det3(a) - det3(b)) / (ee * gg - ff * ff).powi(2)
}


/// Brute-force `{F, H}` in `(x, y, px, py)`, with polynomials stored as
/// coefficient vectors indexed by the power of `py`.
pub fn brute_bracket(f: &SymTensor3, g: &Metric) -> Vec<Expr> {
    let c = f.polynomial().to_vec();
    let gi = g.inverse();
    let h = vec![gi[0][0].scale(&half()), gi[0][1].clone(), gi[1][1].scale(&half())];
    fn conv(a: &[Expr], b: &[Expr]) -> Vec<Expr> {
        let mut out = vec![Expr::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] = &out[i + j] + x * y;
            }
        }
        out
    }
    // d/dpx of sum c_k px^(n-k) py^k, d/dpy likewise
    fn dpx(a: &[Expr]) -> Vec<Expr> {
        let n = a.len() - 1;
        (0..n).map(|k| &a[k] * (n - k) as i64).collect()
    }
    fn dpy(a: &[Expr]) -> Vec<Expr> {
        (1..a.len()).map(|k| &a[k] * k as i64).collect()
    }
    let dx = |a: &[Expr]| a.iter().map(|e| e.dx()).collect::<Vec<_>>();
    let dy = |a: &[Expr]| a.iter().map(|e| e.dy()).collect::<Vec<_>>();
    let t1 = conv(&dx(&c), &dpx(&h));
    let t2 = conv(&dy(&c), &dpy(&h));
    let t3 = conv(&dpx(&c), &dx(&h));
    let t4 = conv(&dpy(&c), &dy(&h));
    (0..5).map(|k| &t1[k] + &t2[k] - &t3[k] - &t4[k]).collect()
}

pub fn half() -> num_rational::BigRational {
    num_rational::BigRational::new(1.into(), 2.into())
}

