mod common;

use common::*;
use cubicflow::cnum::CExpr;
use cubicflow::decision::*;
use cubicflow::expr::*;
use cubicflow::geometry::*;
use cubicflow::invariants::*;
use cubicflow::verify::*;

fn iso(l: &str, re: &str, im: &str) -> (Metric, Codifferential) {
    (Metric::isothermal(p(l)), Codifferential::IsothermalComplex { a: c(re, im) })
}

fn run(g: &Metric, a: &Codifferential, d: &Domain) -> Verdict {
    decide(g, a, d, &cfg()).unwrap()
}

fn assert_certified(v: &Verdict, g: &Metric, d: &Domain) {
    match &v.status {
        Status::CompatibleWithFormula { f, certificate, .. } => {
            assert!(certificate.all_zero());
            // re-derive the certificate independently of the shipped one
            let again = bracket_fh(f, g);
            assert!(again.iter().all(|e| is_zero(e, d, &cfg()).is_zero()));
        }
        other => panic!("expected a formula, got {other:?}"),
    }
}

#[test]
fn flat_constant_codifferential() {
    let (g, a) = iso("1", "1", "0");
    let v = run(&g, &a, &unit());
    assert!(matches!(v.status, Status::CompatibleConstCurvature { .. }));
    assert_eq!(v.labels(), vec![BOX_INPUT, BOX_CURVATURE, BOX_D0]);
}

#[test]
fn sphere_with_non_vanishing_d0() {
    // a = z^3 on the round sphere: D0 is not identically zero
    let (g, a) = iso("4/(1+x^2+y^2)^2", "x^3-3*x*y^2", "3*x^2*y-y^3");
    let v = run(&g, &a, &unit());
    match v.status {
        Status::Incompatible { failed, witness } => {
            assert_eq!(failed, "D0");
            assert!(witness.is_some());
        }
        s => panic!("{s:?}"),
    }
}

#[test]
fn generic_metric_zero_codifferential() {
    let (g, a) = iso("1+x^2+y^4", "0", "0");
    let d = unit();
    let v = run(&g, &a, &d);
    assert_certified(&v, &g, &d);
    match &v.status {
        Status::CompatibleWithFormula { f, via, .. } => {
            assert_eq!(*via, Via::Generic);
            assert!(f.components().iter().all(|e| e.is_num_zero()));
        }
        _ => unreachable!(),
    }
    assert_eq!(v.labels(), vec![BOX_INPUT, BOX_CURVATURE, BOX_PHI2, BOX_G, BOX_CERTIFICATE]);
}

#[test]
fn killing_fixture() {
    let (g, a) = iso("1+x^2", "0", "-1");
    let d = unit();
    let v = run(&g, &a, &d);
    assert!(matches!(v.status, Status::CompatibleKilling { .. }), "{:?}", v.status);
    assert_eq!(v.labels(), vec![BOX_INPUT, BOX_CURVATURE, BOX_PHI2, BOX_D, BOX_PHI2_STAR, BOX_D_STAR]);
    // ground truth: F = py^3 / 2 has this codifferential and commutes with H
    let f = SymTensor3::from_polynomial(&[Expr::zero(), Expr::zero(), Expr::zero(), Expr::frac(1, 2)]);
    assert!(certify(&f, &g, &d, &cfg()).all_zero());
}

#[test]
fn refutation_fixture() {
    let (g, a) = iso("1+x^2+y^4", "1", "0");
    let v = run(&g, &a, &unit());
    let Status::Incompatible { failed, witness: Some(w) } = &v.status else {
        panic!("{:?}", v.status)
    };
    assert!(failed == "G2" || failed == "G3");
    let inv = Invariants::new(&g, &a).unwrap();
    let which = if failed == "G2" { Inv::G2 } else { Inv::G3 };
    let val = eval_at(&inv.expr(which).unwrap(), w.x, w.y).unwrap();
    assert!(val.abs() > 1e-6);
    assert_eq!(v.labels(), vec![BOX_INPUT, BOX_CURVATURE, BOX_PHI2, BOX_G]);
}

#[test]
fn starred_path_zero_codifferential() {
    let g = Metric::general(p("1"), p("0"), p("(x^2+y/x)^2"));
    let a = zero_codifferential(&g);
    let d = Domain::new((1.0, 2.0), (0.2, 1.0));
    let v = run(&g, &a, &d);
    assert_certified(&v, &g, &d);
    let Status::CompatibleWithFormula { via, .. } = v.status else { unreachable!() };
    assert_eq!(via, Via::Starred);
    assert_eq!(
        v.labels(),
        vec![BOX_INPUT, BOX_CURVATURE, BOX_PHI2, BOX_D, BOX_PHI2_STAR, BOX_G_STAR, BOX_CERTIFICATE]
    );
}

#[test]
fn oscillator_fixture() {
    let (g, a) = iso("4-(x^2+4*y^2)/2", "0", "2");
    let d = unit();
    let v = run(&g, &a, &d);
    assert_certified(&v, &g, &d);
}

#[test]
fn both_formulas_agree_when_both_apply() {
    // phi2 and phi2* both non-vanishing, A = 0: both give F = 0
    let g = Metric::isothermal(p("1+x^2+y^4"));
    let inv = Invariants::new(&g, &zero_codifferential(&g)).unwrap();
    let d = unit();
    let k = inv.kay(false, &d, &cfg()).unwrap();
    let ks = inv.kay(true, &d, &cfg()).unwrap();
    let f = inv.f_tensor(&k).unwrap();
    let fs = inv.f_tensor(&ks).unwrap();
    assert!(f.sub(&fs).is_zero_on(&d, &cfg()).is_zero());
}

#[test]
fn holomorphicity_errors() {
    let (g, a) = iso("1", "x", "0");
    assert!(matches!(
        decide(&g, &a, &unit(), &cfg()),
        Err(DecisionError::Invariant(InvariantError::HolomorphicityViolated { .. }))
    ));
}

#[test]
fn unknown_propagates() {
    // the conformal factor is not defined on the domain, so no probe succeeds
    let g = Metric::isothermal(p("1+x^2"));
    let a = Codifferential::IsothermalComplex { a: CExpr::new(p("sqrt(x-5)"), Expr::zero()) };
    let v = decide(&g, &a, &unit(), &cfg()).unwrap();
    assert!(matches!(v.status, Status::Undetermined { .. }));
    assert_eq!(v.labels(), vec![BOX_INPUT]);
}

#[test]
fn deterministic() {
    let (g, a) = iso("1+x^2+y^4", "1", "0");
    assert_eq!(run(&g, &a, &unit()), run(&g, &a, &unit()));
}

#[test]
fn every_trace_starts_at_input() {
    for (l, re, im) in [("1", "1", "0"), ("1+x^2", "0", "-1"), ("1+x^2+y^4", "1", "0"), ("1+x^2+y^4", "0", "0")] {
        let (g, a) = iso(l, re, im);
        let v = run(&g, &a, &unit());
        assert_eq!(v.trace[0].label, BOX_INPUT);
        if let Status::CompatibleWithFormula { .. } = v.status {
            assert_eq!(*v.labels().last().unwrap(), BOX_CERTIFICATE);
        }
    }
}
