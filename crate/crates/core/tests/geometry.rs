mod common;

use common::*;
use cubicflow::cnum::*;
use cubicflow::expr::*;
use cubicflow::geometry::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sphere() -> Metric {
    Metric::isothermal(p("4/(1+x^2+y^2)^2"))
}

fn check_curvature_against_oracle(g: &Metric, expected: Option<f64>, dom: &Domain) {
    let comps = g.components();
    let (e, f, gg) = (ev(&comps[0][0]), ev(&comps[0][1]), ev(&comps[1][1]));
    let r = ev(&g.gauss_curvature());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..16 {
        let (x, y) = dom.sample(&mut rng);
        let oracle = brioschi(&e, &f, &gg, x, y);
        let got = r(x, y);
        assert!((got - oracle).abs() <= 1e-6, "R = {got}, oracle {oracle} at ({x}, {y})");
        if let Some(want) = expected {
            assert!((got - want).abs() <= 1e-9);
        }
    }
}

#[test]
fn curvature_examples() {
    assert!(simplify(&Metric::isothermal(Expr::one()).gauss_curvature()).is_num_zero());
    check_curvature_against_oracle(&sphere(), Some(1.0), &unit());
    let hyp = Metric::general(Expr::one(), Expr::zero(), p("exp(2*x)"));
    check_curvature_against_oracle(&hyp, Some(-1.0), &unit());
    check_curvature_against_oracle(&Metric::isothermal(p("1+x^2")), None, &unit());
    let tilted = Metric::general(p("1+x^2"), p("x*y/4"), p("1+y^2"));
    check_curvature_against_oracle(&tilted, None, &unit());
    assert!(simplify(&(sphere().gauss_curvature() - Expr::one())).is_num_zero());
}

#[test]
fn curvature_routes_agree() {
    for l in ["1+x^2", "4/(1+x^2+y^2)^2", "exp(x*y)", "1+x^2+y^4"] {
        let iso = Metric::isothermal(p(l));
        let gen = iso.to_general().unwrap();
        assert_zero(&(iso.gauss_curvature() - gen.gauss_curvature()), &unit(), l);
    }
    for u in ["x*y", "x^2*y + y^3", "x + 2*y^2*x"] {
        let lam = p(&format!("exp({u})"));
        let null = Metric::null(lam.clone());
        let uu = p(u);
        let want = &uu.dx().dy() / &lam;
        assert_zero(&(null.gauss_curvature() - want), &unit(), u);
        let via_christoffel = curvature_from_components(&null.components());
        assert_zero(&(null.gauss_curvature() - via_christoffel), &unit(), u);
    }
    let nf = Metric::null(p("1/(y+x^2)^2"));
    assert_zero(&(nf.gauss_curvature() - p("4*x")), &unit(), "normal form");
}

#[test]
fn metric_section_is_parallel() {
    let g = sphere();
    let gs = Section::new(CExpr::real(p("4/(1+x^2+y^2)^2")), 1, 1, Chart::Complex);
    assert!(nabla10(&gs, &g).unwrap().coeff.is_zero_on(&unit(), &cfg()).is_zero());
    assert!(nabla01(&gs, &g).unwrap().coeff.is_zero_on(&unit(), &cfg()).is_zero());
    let n = Metric::null(p("exp(x*y) + 1"));
    let ns = Section::new(CExpr::real(n.section_coefficient().unwrap()), 1, 1, Chart::Null);
    assert!(nabla10(&ns, &n).unwrap().coeff.is_zero_on(&unit(), &cfg()).is_zero());
    assert!(nabla01(&ns, &n).unwrap().coeff.is_zero_on(&unit(), &cfg()).is_zero());
}

#[test]
fn weight_zero_is_wirtinger() {
    let f = c("x*y", "x^2");
    let s = Section::scalar(f.clone(), Chart::Complex);
    let out = nabla10(&s, &sphere()).unwrap();
    assert_eq!((out.p, out.q), (1, 0));
    assert!((out.coeff - wirtinger_z(&f)).is_zero_on(&unit(), &cfg()).is_zero());
}

#[test]
fn chart_mismatch() {
    let s = Section::scalar(c("x", "0"), Chart::Null);
    assert_eq!(nabla10(&s, &sphere()), Err(GeometryError::ChartMismatch));
    let s = Section::scalar(c("x", "0"), Chart::Complex);
    assert_eq!(nabla01(&s, &Metric::general(Expr::one(), Expr::zero(), Expr::one())), Err(GeometryError::ChartMismatch));
}

/// `nabla01 nabla10 - nabla10 nabla01` minus `(p-q)/2 R g f`.
fn commutator_defect(g: &Metric, f: CExpr, pw: i64, qw: i64, chart: Chart) -> CExpr {
    let s = Section::new(f.clone(), pw, qw, chart);
    let a = nabla01(&nabla10(&s, g).unwrap(), g).unwrap();
    let b = nabla10(&nabla01(&s, g).unwrap(), g).unwrap();
    let r = g.gauss_curvature();
    let gc = g.section_coefficient().unwrap();
    let rhs = f.scale(&(r * gc)).scale_q(&num_rational::BigRational::new((pw - qw).into(), 2.into()));
    a.coeff - b.coeff - rhs
}

#[test]
fn commutator_example() {
    let d = commutator_defect(&sphere(), c("x*y", "0"), 2, 0, Chart::Complex);
    assert!(d.is_zero_on(&unit(), &cfg()).is_zero());
}

const WEIGHTS: [(i64, i64); 5] = [(0, 0), (1, 0), (2, 1), (3, 0), (0, 2)];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn commutator_identity(f in cpoly(), k in 0usize..5) {
        let (pw, qw) = WEIGHTS[k];
        let d = commutator_defect(&sphere(), f, pw, qw, Chart::Complex);
        prop_assert!(d.is_zero_on(&unit(), &cfg()).is_zero());
    }

    #[test]
    fn null_commutator_identity(f in poly(), k in 0usize..2) {
        let (pw, qw) = [(2, 1), (3, 0)][k];
        let g = Metric::null(p("1 + x^2 + x*y^2"));
        let d = commutator_defect(&g, CExpr::real(f), pw, qw, Chart::Null);
        prop_assert!(d.is_zero_on(&unit(), &cfg()).is_zero());
    }

    #[test]
    fn poisson_jacobi(f in poly(), h in poly(), k in poly()) {
        let g = Metric::general(p("1+x^2"), p("x*y/4"), p("1+y^2"));
        let b = |a: &Expr, c: &Expr| g.poisson(a, c);
        let j = b(&f, &b(&h, &k)) + b(&h, &b(&k, &f)) + b(&k, &b(&f, &h));
        prop_assert!(is_zero(&j, &unit(), &cfg()).is_zero());
    }

    #[test]
    fn poisson_complex_form(f in poly(), h in poly()) {
        let g = sphere();
        let (cf, ch) = (CExpr::real(f.clone()), CExpr::real(h.clone()));
        let lhs = &wirtinger_z(&cf) * &wirtinger_zbar(&ch) - &wirtinger_zbar(&cf) * &wirtinger_z(&ch);
        let lam = p("4/(1+x^2+y^2)^2");
        let rhs = CExpr::i().scale(&(lam * g.poisson(&f, &h))).scale_q(&num_rational::BigRational::new(1.into(), 2.into()));
        prop_assert!((lhs - rhs).is_zero_on(&unit(), &cfg()).is_zero());
    }

    #[test]
    fn half_square_nonnegative(f in poly()) {
        let g = Metric::general(p("1+x^2"), p("x*y/4"), p("1+y^2"));
        let c = Compiled::new(&g.grad_half_square(&f));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..32 {
            let (x, y) = unit().sample(&mut rng);
            prop_assert!(c.eval1(x, y).unwrap() >= -1e-12);
        }
    }
}

#[test]
fn null_commutator_sign() {
    let g = Metric::null(p("1 + x^2 + x*y^2"));
    for (pw, qw) in [(2, 1), (3, 0), (0, 2)] {
        let s = Section::new(c("x*y^2 + sin(x)", "0"), pw, qw, Chart::Null);
        let a = nabla10(&nabla01(&s, &g).unwrap(), &g).unwrap();
        let b = nabla01(&nabla10(&s, &g).unwrap(), &g).unwrap();
        let rhs = s.coeff.scale(&(g.gauss_curvature() * g.section_coefficient().unwrap()))
            .scale_q(&num_rational::BigRational::new((qw - pw).into(), 2.into()));
        assert!((a.coeff - b.coeff - rhs).is_zero_on(&unit(), &cfg()).is_zero(), "({pw},{qw})");
    }
}

#[test]
fn gradient_and_bracket_examples() {
    let flat = Metric::isothermal(Expr::one());
    assert_eq!(simplify(&flat.grad_half_square(&Expr::x())), Expr::frac(1, 2));
    let r = sphere().gauss_curvature();
    assert_zero(&sphere().grad_half_square(&r), &unit(), "constant R");
    let id = Metric::general(Expr::one(), Expr::zero(), Expr::one());
    assert_eq!(simplify(&id.grad_half_square(&p("x^2+y^2"))), p("2*x^2+2*y^2"));
    let g = Metric::isothermal(p("1+x^2"));
    assert_eq!(simplify(&(g.poisson(&Expr::x(), &Expr::y()) - p("1/(1+x^2)"))), Expr::zero());
    assert!(simplify(&g.poisson(&p("x*y"), &p("x*y"))).is_num_zero());
}

#[test]
fn laplacian_examples() {
    let flat = Metric::isothermal(Expr::one());
    assert_eq!(simplify(&flat.laplacian(&p("x^2+y^2"))), Expr::int(4));
    assert!(simplify(&flat.laplacian(&p("x*y"))).is_num_zero());
    // divergence-form oracle: (1/mu) d_i (mu g^ij d_j f) by nested finite differences
    let g = Metric::general(p("1+x^2"), p("x*y/4"), p("1+y^2"));
    let f = p("sin(x)*y^2 + x^3");
    let gi = g.inverse();
    let (g11, g12, g22, mu) = (ev(&gi[0][0]), ev(&gi[0][1]), ev(&gi[1][1]), ev(&g.volume()));
    let (fx, fy) = (ev(&f.dx()), ev(&f.dy()));
    let vx = |x: f64, y: f64| mu(x, y) * (g11(x, y) * fx(x, y) + g12(x, y) * fy(x, y));
    let vy = |x: f64, y: f64| mu(x, y) * (g12(x, y) * fx(x, y) + g22(x, y) * fy(x, y));
    let lap = ev(&g.laplacian(&f));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..8 {
        let (x, y) = unit().sample(&mut rng);
        let oracle = (d1(&|t| vx(t, y), x, 1e-3) + d1(&|t| vy(x, t), y, 1e-3)) / mu(x, y);
        assert!((lap(x, y) - oracle).abs() < 1e-7);
    }
    let iso = Metric::isothermal(p("1+x^2"));
    assert_zero(&(iso.laplacian(&f) - iso.to_general().unwrap().laplacian(&f)), &unit(), "iso laplacian");
}

#[test]
fn complex_structure_examples() {
    let j = Metric::isothermal(p("1+x^2")).complex_structure().unwrap();
    assert_eq!(j, [[Expr::zero(), Expr::int(-1)], [Expr::one(), Expr::zero()]]);
    let g = Metric::general(p("1+x^2"), p("x*y/4"), p("1+y^2"));
    let j = g.complex_structure().unwrap();
    for a in 0..2 {
        for b in 0..2 {
            let sq = &j[a][0] * &j[0][b] + &j[a][1] * &j[1][b] + if a == b { Expr::one() } else { Expr::zero() };
            assert_zero(&sq, &unit(), "J^2 + Id");
        }
    }
    assert_zero(&(&j[0][0] + &j[1][1]), &unit(), "tr J");
    // J preserves the metric
    let gc = g.components();
    for a in 0..2 {
        for b in 0..2 {
            let mut t = Vec::new();
            for k in 0..2 {
                for l in 0..2 {
                    t.push(&gc[k][l] * &j[k][a] * &j[l][b]);
                }
            }
            assert_zero(&(Expr::add_many(t) - &gc[a][b]), &unit(), "J orthogonal");
        }
    }
    assert_eq!(Metric::null(Expr::one()).complex_structure(), Err(GeometryError::NotRiemannian));
}

#[test]
fn validation() {
    let d = Domain::new((-1.0, 1.0), (-1.0, 1.0));
    assert!(sphere().validate(&d, &cfg()).is_ok());
    assert!(matches!(Metric::isothermal(p("x")).validate(&d, &cfg()), Err(GeometryError::Degenerate { .. })));
    let g = Metric::general(Expr::one(), Expr::int(2), Expr::one());
    assert!(g.validate(&d, &cfg()).is_err());
}
