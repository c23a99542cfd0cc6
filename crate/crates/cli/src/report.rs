use cubicflow::decision::{Status, Verdict};
use cubicflow::expr::{Domain, Expr, ZeroTestConfig, ZeroVerdict};
use cubicflow::invariants::SymTensor3;
use cubicflow::verify::BracketCertificate;
use serde::Serialize;

pub const REPORT_VERSION: u32 = 1;

const MONOMIALS: [&str; 5] = ["px^4", "px^3 py", "px^2 py^2", "px py^3", "py^4"];

#[derive(Serialize)]
pub struct Header {
    pub report_version: u32,
    pub command: &'static str,
    pub seed: u64,
    pub samples: usize,
    pub seeds: u32,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub domain: [[f64; 2]; 2],
}

impl Header {
    pub fn new(command: &'static str, domain: &Domain, cfg: &ZeroTestConfig) -> Header {
        Header {
            report_version: REPORT_VERSION,
            command,
            seed: cfg.seed,
            samples: cfg.samples,
            seeds: cfg.seeds,
            abs_tol: cfg.abs_tol,
            rel_tol: cfg.rel_tol,
            domain: [[domain.x.0, domain.x.1], [domain.y.0, domain.y.1]],
        }
    }
}

#[derive(Serialize)]
#[serde(tag = "result")]
pub enum ZeroJson {
    Zero,
    NonZero { x: f64, y: f64, value: f64 },
    Unknown { reason: String },
}

impl From<&ZeroVerdict> for ZeroJson {
    fn from(v: &ZeroVerdict) -> Self {
        match v {
            ZeroVerdict::Zero => ZeroJson::Zero,
            ZeroVerdict::NonZero { x, y, value } => ZeroJson::NonZero { x: *x, y: *y, value: *value },
            ZeroVerdict::Unknown(r) => ZeroJson::Unknown { reason: r.clone() },
        }
    }
}

#[derive(Serialize)]
pub struct TensorJson {
    t111: String,
    t112: String,
    t122: String,
    t222: String,
}

impl From<&SymTensor3> for TensorJson {
    fn from(t: &SymTensor3) -> Self {
        let s = |e: &Expr| e.to_string();
        TensorJson { t111: s(&t.t111), t112: s(&t.t112), t122: s(&t.t122), t222: s(&t.t222) }
    }
}

#[derive(Serialize)]
pub struct CoefficientJson {
    monomial: &'static str,
    coefficient: String,
    verdict: ZeroJson,
}

pub fn certificate_json(c: &BracketCertificate) -> Vec<CoefficientJson> {
    (0..5)
        .map(|k| CoefficientJson {
            monomial: MONOMIALS[k],
            coefficient: c.coefficients[k].to_string(),
            verdict: (&c.verdicts[k]).into(),
        })
        .collect()
}

#[derive(Serialize)]
pub struct TestJson {
    name: String,
    verdict: ZeroJson,
}

#[derive(Serialize)]
pub struct StepJson {
    #[serde(rename = "box")]
    label: &'static str,
    tests: Vec<TestJson>,
}

#[derive(Serialize)]
pub struct CheckReport {
    #[serde(flatten)]
    pub header: Header,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub via: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integral: Option<TensorJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Vec<CoefficientJson>>,
    pub trace: Vec<StepJson>,
}

impl CheckReport {
    pub fn new(header: Header, v: &Verdict) -> CheckReport {
        let trace = v
            .trace
            .iter()
            .map(|s| StepJson {
                label: s.label,
                tests: s.tests.iter().map(|(name, z)| TestJson { name: name.clone(), verdict: z.into() }).collect(),
            })
            .collect();
        let mut r = CheckReport {
            header,
            status: v.status.name(),
            note: None,
            failed: None,
            witness: None,
            via: None,
            integral: None,
            certificate: None,
            trace,
        };
        match &v.status {
            Status::CompatibleWithFormula { f, via, certificate } => {
                r.via = Some(via.to_string());
                r.integral = Some(f.into());
                r.certificate = Some(certificate_json(certificate));
            }
            Status::CompatibleConstCurvature { note } | Status::CompatibleKilling { note } => r.note = Some(note.to_string()),
            Status::Incompatible { failed, witness } => {
                r.failed = Some(failed.clone());
                r.witness = witness.map(|w| [w.x, w.y, w.value]);
            }
            Status::Undetermined { reason } => r.note = Some(reason.clone()),
        }
        r
    }
}

#[derive(Serialize)]
pub struct InvariantJson {
    pub name: &'static str,
    pub formula: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Serialize)]
pub struct InvariantsReport {
    #[serde(flatten)]
    pub header: Header,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at: Option<[f64; 2]>,
    pub invariants: Vec<InvariantJson>,
}

#[derive(Serialize)]
pub struct VerifyReport {
    #[serde(flatten)]
    pub header: Header,
    pub verdict: ZeroJson,
    pub integral: TensorJson,
    pub certificate: Vec<CoefficientJson>,
}

#[derive(Serialize)]
pub struct GeodesicReport {
    pub report_version: u32,
    pub command: &'static str,
    pub integrator: &'static str,
    pub start: [f64; 4],
    pub steps: usize,
    pub steps_taken: usize,
    pub dt: f64,
    pub threshold: f64,
    pub h0: Option<f64>,
    pub max_h_drift: Option<f64>,
    pub f0: Option<f64>,
    pub max_f_drift: Option<f64>,
    pub within_threshold: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}
