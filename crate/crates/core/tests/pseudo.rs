mod common;

use common::*;
use cubicflow::decision::*;
use cubicflow::expr::*;
use cubicflow::geometry::*;
use cubicflow::invariants::*;
use cubicflow::pseudo::*;
use proptest::prelude::*;

fn pair(a1: &str, a2: &str) -> Codifferential {
    Codifferential::NullPair { a1: p(a1), a2: p(a2) }
}

#[test]
fn quasi_holomorphicity() {
    let d = unit();
    let (u, v) = quasi_holo_check(&p("1"), &p("1"), &d, &cfg());
    assert!(u.is_zero() && v.is_zero());
    assert!(quasi_holo_check(&p("x^3"), &p("0"), &d, &cfg()).0.is_zero());
    assert!(quasi_holo_check(&p("y"), &p("0"), &d, &cfg()).0.is_nonzero());
    assert!(quasi_holo_check(&p("0"), &p("x"), &d, &cfg()).1.is_nonzero());
}

#[test]
fn normal_forms() {
    let d = unit();
    for (f, r) in [("x", "2"), ("x^2", "4*x"), ("0", "0")] {
        let g = normal_form_metric(&p(f));
        assert!(is_zero(&(g.gauss_curvature() - p(r)), &d, &cfg()).is_zero(), "f = {f}");
    }
}

#[test]
fn null_bracket_examples() {
    let d = unit();
    let g = Metric::null(p("1+x^2"));
    let f = null_cubic(&Expr::zero(), &Expr::int(-1), &Expr::zero(), &Expr::zero());
    assert!(bracket_fh_null(&f, &g).unwrap().iter().all(|e| is_zero(e, &d, &cfg()).is_zero()));
    let f = null_cubic(&Expr::one(), &Expr::zero(), &Expr::zero(), &Expr::zero());
    let v = bracket_fh_null(&f, &Metric::null(p("1+x^2+y^3"))).unwrap();
    assert!(is_zero(&v[1], &d, &cfg()).is_nonzero());
    assert!(bracket_fh_null(&f, &Metric::isothermal(p("1"))).is_err());
}

#[test]
fn obstruction_fixture() {
    let g = normal_form_metric(&p("x^2"));
    let d = unit();
    let inv = Invariants::new(&g, &pair("1", "1")).unwrap();
    assert!(is_zero(&inv.expr(Inv::Phi1).unwrap(), &d, &cfg()).is_zero());
    let v = decide_pseudo(&g, &pair("1", "1"), &d, &cfg()).unwrap();
    match &v.status {
        Status::Incompatible { failed, .. } => assert_eq!(failed, "null-gradient-curvature"),
        s => panic!("{s:?}"),
    }
    assert_eq!(v.labels(), vec![BOX_INPUT, BOX_CURVATURE, BOX_PHI1]);
    // decide routes null input here as well
    assert_eq!(decide(&g, &pair("1", "1"), &d, &cfg()).unwrap(), v);
    // with A = 0 the zero integral is returned instead
    let z = decide_pseudo(&g, &pair("0", "0"), &d, &cfg()).unwrap();
    assert!(matches!(z.status, Status::CompatibleWithFormula { via: Via::ZeroCodifferential, .. }));
}

#[test]
fn x_only_null_metric() {
    // lambda(x) dx dy is flat, so the constant-curvature box answers first
    let g = Metric::null(p("1+x^2"));
    let d = unit();
    assert!(is_zero(&g.gauss_curvature(), &d, &cfg()).is_zero());
    let v = decide_pseudo(&g, &pair("0", "1"), &d, &cfg()).unwrap();
    assert!(v.status.is_compatible(), "{:?}", v.status);
    assert!(matches!(v.status, Status::CompatibleConstCurvature { .. }));
    let f = null_cubic(&Expr::zero(), &Expr::one(), &Expr::zero(), &Expr::zero());
    assert!(bracket_fh_null(&f, &g).unwrap().iter().all(|e| is_zero(e, &d, &cfg()).is_zero()));
    let inv = Invariants::new(&g, &pair("0", "1")).unwrap();
    for k in [Inv::Phi1, Inv::Phi2, Inv::PhiS2] {
        assert!(is_zero(&inv.expr(k).unwrap(), &d, &cfg()).is_zero());
    }
}

#[test]
fn killing_type_fixture() {
    // lambda = 1 + (x+y)^2 is not flat and has the translation field d/dx - d/dy
    let g = Metric::null(p("1+(x+y)^2"));
    let d = unit();
    let inv = Invariants::new(&g, &pair("0", "0")).unwrap();
    for k in [Inv::Phi2, Inv::PhiS2] {
        assert!(is_zero(&inv.expr(k).unwrap(), &d, &cfg()).is_zero(), "{k:?}");
    }
    let f1 = inv.expr(Inv::Phi1).unwrap();
    assert!(is_zero(&f1, &d, &cfg()).is_nonzero());
}

#[test]
fn flat_null_metric() {
    let v = decide_pseudo(&Metric::null(Expr::one()), &pair("1", "1"), &unit(), &cfg()).unwrap();
    assert!(matches!(v.status, Status::CompatibleConstCurvature { .. }));
}

#[test]
fn not_quasi_holomorphic() {
    let r = decide_pseudo(&Metric::null(p("1+x^2")), &pair("y", "1"), &unit(), &cfg());
    assert!(matches!(r, Err(DecisionError::Invariant(InvariantError::HolomorphicityViolated { .. }))));
}

#[test]
fn generic_null_metric_refutes_or_certifies() {
    // a null metric with phi2 non-vanishing: the verdict is decided either way and
    // any produced formula carries a zero certificate
    let g = Metric::null(p("1+x^2+y^3"));
    let v = decide_pseudo(&g, &pair("1", "1"), &unit(), &cfg()).unwrap();
    match &v.status {
        Status::Incompatible { .. } => {}
        Status::CompatibleWithFormula { certificate, .. } => assert!(certificate.all_zero()),
        s => panic!("{s:?}"),
    }
    let z = decide_pseudo(&g, &pair("0", "0"), &unit(), &cfg()).unwrap();
    assert!(matches!(z.status, Status::CompatibleWithFormula { .. }), "{:?}", z.status);
}

fn coeff() -> impl Strategy<Value = Expr> {
    (-3i64..=3, -3i64..=3, -3i64..=3).prop_map(|(a, b, c)| Expr::int(a) + p("x") * b + p("x*y") * c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn null_curvature_from_log(a in -3i64..=3, b in -3i64..=3, c in -3i64..=3) {
        // lambda = e^u gives R = e^-u u_xy
        let u = p("x*y") * a + p("x^2*y") * b + p("y^2") * c + p("x");
        let g = Metric::null(u.exp());
        let expect = u.neg().exp() * u.dx().dy();
        prop_assert!(is_zero(&(g.gauss_curvature() - expect), &unit(), &cfg()).is_zero());
    }

    #[test]
    fn null_commutators(f in coeff(), pq in prop::sample::select(vec![(2i64, 1i64), (3, 0)])) {
        use cubicflow::cnum::CExpr;
        let g = normal_form_metric(&p("x^2"));
        let s = Section::new(CExpr::real(f.clone()), pq.0, pq.1, Chart::Null);
        let lhs = nabla01(&nabla10(&s, &g).unwrap(), &g).unwrap().coeff.re
            - nabla10(&nabla01(&s, &g).unwrap(), &g).unwrap().coeff.re;
        let r = g.gauss_curvature();
        let gs = g.section_coefficient().unwrap();
        let rhs = (r * gs * f).scale(&num_rational::BigRational::new((pq.0 - pq.1).into(), 2.into()));
        prop_assert!(is_zero(&(lhs - rhs), &unit(), &cfg()).is_zero());
    }

    #[test]
    fn zero_pair_gives_symbolic_zeros(l in coeff()) {
        let g = Metric::null(p("2") + l * p("1/16"));
        let inv = Invariants::new(&g, &pair("0", "0")).unwrap();
        for k in [Inv::D0, Inv::D1, Inv::D2, Inv::D3, Inv::G2, Inv::G3, Inv::DS1, Inv::GS2, Inv::GS3] {
            prop_assert!(simplify(&inv.expr(k).unwrap()).is_num_zero());
        }
    }
}
