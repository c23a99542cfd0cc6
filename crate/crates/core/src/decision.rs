//! The decision flowchart: does `(g, A)` admit a cubic integral whose
//! codifferential is `A`?
//!
//! ```text
//! Input g and A
//!   R constant? ── yes ─> D0 = 0? ── yes: CompatibleConstCurvature / no: Incompatible
//!   phi2 = 0?   ── no ──> G2 = G3 = 0? ── yes: F = A + B(K), certified / no: Incompatible
//!   D = 0?      ── no ──> Incompatible
//!   phi2* = 0?  ── no ──> G2* = G3* = 0? ── yes: F = A + B(K*), certified / no: Incompatible
//!   D* = 0?     ── yes: CompatibleKilling / no: Incompatible
//! ```
//!
//! Null charts insert `|grad R|^2 = 0?` after the curvature box.

use std::fmt;

use thiserror::Error;

use crate::expr::{is_zero, Domain, Expr, ZeroTestConfig, ZeroVerdict};
use crate::geometry::{GeometryError, Metric};
use crate::invariants::{Codifferential, Inv, InvariantError, Invariants, SymTensor3};
use crate::verify::{certify, BracketCertificate};

pub const BOX_INPUT: &str = "Input g and A";
pub const BOX_CURVATURE: &str = "R constant?";
pub const BOX_D0: &str = "D0 = 0?";
pub const BOX_PHI1: &str = "|grad R|^2 = 0?";
pub const BOX_PHI2: &str = "phi2 = 0?";
pub const BOX_G: &str = "G2 = G3 = 0?";
pub const BOX_D: &str = "D = 0?";
pub const BOX_PHI2_STAR: &str = "phi2* = 0?";
pub const BOX_G_STAR: &str = "G2* = G3* = 0?";
pub const BOX_D_STAR: &str = "D* = 0?";
pub const BOX_CERTIFICATE: &str = "{F, H} = 0?";

/// Which formula produced `F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Via {
    /// `K` from the unstarred family (`phi2` non-vanishing).
    Generic,
    /// `K*` from the starred family (`phi2 = 0`, `phi2*` non-vanishing).
    Starred,
    /// `A = 0` on a null chart with `|grad R|^2 = 0`: `F = 0`.
    ZeroCodifferential,
}

impl fmt::Display for Via {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Via::Generic => "generic",
            Via::Starred => "starred",
            Via::ZeroCodifferential => "zero-codifferential",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    CompatibleWithFormula {
        f: SymTensor3,
        via: Via,
        certificate: BracketCertificate,
    },
    CompatibleConstCurvature {
        note: &'static str,
    },
    CompatibleKilling {
        note: &'static str,
    },
    Incompatible {
        failed: String,
        witness: Option<Witness>,
    },
    Undetermined {
        reason: String,
    },
}

pub const NOTE_CONST_CURVATURE: &str =
    "constant curvature with D0 = 0: the integrals form a 10-dimensional family; construction not produced";
pub const NOTE_KILLING: &str = "the metric has a Killing field and the compatibility conditions hold; construction not produced";

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::CompatibleWithFormula { .. } => "CompatibleWithFormula",
            Status::CompatibleConstCurvature { .. } => "CompatibleConstCurvature",
            Status::CompatibleKilling { .. } => "CompatibleKilling",
            Status::Incompatible { .. } => "Incompatible",
            Status::Undetermined { .. } => "Undetermined",
        }
    }

    pub fn is_compatible(&self) -> bool {
        matches!(
            self,
            Status::CompatibleWithFormula { .. } | Status::CompatibleConstCurvature { .. } | Status::CompatibleKilling { .. }
        )
    }
}

/// One visited flowchart box and the zero tests made there.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub label: &'static str,
    pub tests: Vec<(String, ZeroVerdict)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub status: Status,
    pub trace: Vec<TraceStep>,
}

impl Verdict {
    pub fn labels(&self) -> Vec<&'static str> {
        self.trace.iter().map(|s| s.label).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecisionError {
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

struct Run<'a> {
    inv: &'a Invariants,
    domain: &'a Domain,
    cfg: &'a ZeroTestConfig,
    trace: Vec<TraceStep>,
}

#[allow(clippy::large_enum_variant)]
enum Step {
    Done(Status),
    Go,
}

impl<'a> Run<'a> {
    fn test(&self, e: &Expr) -> ZeroVerdict {
        is_zero(e, self.domain, self.cfg)
    }

    fn record(&mut self, label: &'static str, tests: Vec<(String, ZeroVerdict)>) -> ZeroVerdict {
        let v = tests.iter().fold(ZeroVerdict::Zero, |acc, (_, v)| acc.and(v.clone()));
        self.trace.push(TraceStep { label, tests });
        v
    }

    fn finish(self, status: Status) -> Verdict {
        Verdict { status, trace: self.trace }
    }

    fn undetermined(label: &str, v: &ZeroVerdict) -> Status {
        Status::Undetermined {
            reason: format!("{label}: {v}"),
        }
    }

    fn incompatible(tests: &[(String, ZeroVerdict)]) -> Status {
        let (name, v) = tests.iter().find(|(_, v)| v.is_nonzero()).expect("a non-zero test");
        let witness = match v {
            ZeroVerdict::NonZero { x, y, value } => Some(Witness { x: *x, y: *y, value: *value }),
            _ => None,
        };
        Status::Incompatible {
            failed: name.clone(),
            witness,
        }
    }

    /// A box whose all-zero answer continues and whose non-zero answer refutes.
    fn necessary(&mut self, label: &'static str, names: &[Inv]) -> Result<Option<Status>, DecisionError> {
        let mut tests = Vec::new();
        for &k in names {
            tests.push((k.name().to_string(), self.test(&self.inv.expr(k)?)));
        }
        let v = self.record(label, tests.clone());
        Ok(match v {
            ZeroVerdict::Zero => None,
            ZeroVerdict::NonZero { .. } => Some(Self::incompatible(&tests)),
            ZeroVerdict::Unknown(_) => Some(Self::undetermined(label, &v)),
        })
    }

    fn formula(&mut self, star: bool) -> Result<Status, DecisionError> {
        let kay = match self.inv.kay(star, self.domain, self.cfg) {
            Ok(k) => k,
            Err(InvariantError::DegenerateBracket(v)) => return Ok(Self::undetermined("K", &v)),
            Err(e) => return Err(e.into()),
        };
        let f = self.inv.f_tensor(&kay)?;
        Ok(self.certified(f, if star { Via::Starred } else { Via::Generic }))
    }

    fn certified(&mut self, f: SymTensor3, via: Via) -> Status {
        let f = f.map(crate::expr::simplify);
        let certificate = certify(&f, self.inv.metric(), self.domain, self.cfg);
        let tests = certificate
            .verdicts
            .iter()
            .enumerate()
            .map(|(k, v)| (format!("{{F,H}} coefficient of px^{} py^{}", 4 - k, k), v.clone()))
            .collect();
        let v = self.record(BOX_CERTIFICATE, tests);
        if certificate.all_zero() {
            Status::CompatibleWithFormula { f, via, certificate }
        } else {
            Status::Undetermined {
                reason: format!("the produced F failed its bracket certificate: {v}"),
            }
        }
    }

    /// `D_i = 0` for the directions in which `R` is non-constant.
    fn d_forms(&mut self, label: &'static str, x: Inv, y: Inv, rx: &ZeroVerdict, ry: &ZeroVerdict) -> Result<Step, DecisionError> {
        let mut tests = Vec::new();
        if rx.is_nonzero() {
            tests.push((x.name().to_string(), self.test(&self.inv.expr(x)?)));
        }
        if ry.is_nonzero() {
            tests.push((y.name().to_string(), self.test(&self.inv.expr(y)?)));
        }
        if tests.is_empty() {
            self.record(label, tests);
            return Ok(Step::Done(Status::Undetermined {
                reason: format!("{label}: no direction with dR certified non-zero"),
            }));
        }
        let disagree = tests.len() == 2 && tests[0].1.is_zero() != tests[1].1.is_zero();
        let v = self.record(label, tests.clone());
        if disagree {
            return Ok(Step::Done(Status::Undetermined {
                reason: format!("{label}: the two selectable forms disagree"),
            }));
        }
        Ok(match v {
            ZeroVerdict::Zero => Step::Go,
            ZeroVerdict::NonZero { .. } => Step::Done(Self::incompatible(&tests)),
            ZeroVerdict::Unknown(_) => Step::Done(Self::undetermined(label, &v)),
        })
    }
}

pub(crate) fn flowchart(inv: &Invariants, domain: &Domain, cfg: &ZeroTestConfig) -> Result<Verdict, DecisionError> {
    let mut run = Run {
        inv,
        domain,
        cfg,
        trace: Vec::new(),
    };
    let null = !inv.metric().is_riemannian();
    let holo = inv.check_holomorphic(domain, cfg);
    match &holo {
        ZeroVerdict::NonZero { x, y, value } => {
            return Err(InvariantError::HolomorphicityViolated { x: *x, y: *y, value: *value }.into())
        }
        ZeroVerdict::Unknown(_) => {
            run.record(BOX_INPUT, vec![("holomorphicity".into(), holo.clone())]);
            return Ok(run.finish(Run::undetermined(BOX_INPUT, &holo)));
        }
        ZeroVerdict::Zero => {
            run.record(BOX_INPUT, vec![("holomorphicity".into(), holo)]);
        }
    }

    let r = inv.expr(Inv::Phi0)?;
    let (rx, ry) = (run.test(&r.dx()), run.test(&r.dy()));
    let v = run.record(BOX_CURVATURE, vec![("R_x".into(), rx.clone()), ("R_y".into(), ry.clone())]);
    match v {
        ZeroVerdict::Unknown(_) => return Ok(run.finish(Run::undetermined(BOX_CURVATURE, &v))),
        ZeroVerdict::Zero => {
            let s = run.necessary(BOX_D0, &[Inv::D0])?;
            let status = s.unwrap_or(Status::CompatibleConstCurvature {
                note: NOTE_CONST_CURVATURE,
            });
            return Ok(run.finish(status));
        }
        ZeroVerdict::NonZero { .. } => {}
    }

    if null {
        let f1 = run.test(&inv.expr(Inv::Phi1)?);
        let v = run.record(BOX_PHI1, vec![(Inv::Phi1.name().into(), f1)]);
        match v {
            ZeroVerdict::Unknown(_) => return Ok(run.finish(Run::undetermined(BOX_PHI1, &v))),
            ZeroVerdict::Zero => {
                let status = if inv.codifferential().is_symbolic_zero() {
                    run.certified(SymTensor3::zero(), Via::ZeroCodifferential)
                } else {
                    Status::Incompatible {
                        failed: "null-gradient-curvature".into(),
                        witness: None,
                    }
                };
                return Ok(run.finish(status));
            }
            ZeroVerdict::NonZero { .. } => {}
        }
    }

    let f2 = run.test(&inv.expr(Inv::Phi2)?);
    let v = run.record(BOX_PHI2, vec![(Inv::Phi2.name().into(), f2)]);
    match v {
        ZeroVerdict::Unknown(_) => return Ok(run.finish(Run::undetermined(BOX_PHI2, &v))),
        ZeroVerdict::NonZero { .. } => {
            if let Some(s) = run.necessary(BOX_G, &[Inv::G2, Inv::G3])? {
                return Ok(run.finish(s));
            }
            let s = run.formula(false)?;
            return Ok(run.finish(s));
        }
        ZeroVerdict::Zero => {}
    }

    if let Step::Done(s) = run.d_forms(BOX_D, Inv::Dx, Inv::Dy, &rx, &ry)? {
        return Ok(run.finish(s));
    }

    let f2s = run.test(&inv.expr(Inv::PhiS2)?);
    let v = run.record(BOX_PHI2_STAR, vec![(Inv::PhiS2.name().into(), f2s)]);
    match v {
        ZeroVerdict::Unknown(_) => return Ok(run.finish(Run::undetermined(BOX_PHI2_STAR, &v))),
        ZeroVerdict::NonZero { .. } => {
            if let Some(s) = run.necessary(BOX_G_STAR, &[Inv::GS2, Inv::GS3])? {
                return Ok(run.finish(s));
            }
            let s = run.formula(true)?;
            return Ok(run.finish(s));
        }
        ZeroVerdict::Zero => {}
    }

    let status = match run.d_forms(BOX_D_STAR, Inv::DSx, Inv::DSy, &rx, &ry)? {
        Step::Done(s) => s,
        Step::Go => Status::CompatibleKilling { note: NOTE_KILLING },
    };
    Ok(run.finish(status))
}

/// Runs the flowchart; null metrics go through [`crate::pseudo::decide_pseudo`].
pub fn decide(g: &Metric, a: &Codifferential, domain: &Domain, cfg: &ZeroTestConfig) -> Result<Verdict, DecisionError> {
    if let (Metric::Null { .. }, Codifferential::NullPair { .. }) = (g, a) {
        return crate::pseudo::decide_pseudo(g, a, domain, cfg);
    }
    g.validate(domain, cfg)?;
    let inv = Invariants::new(g, a)?;
    flowchart(&inv, domain, cfg)
}
