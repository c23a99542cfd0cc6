use std::fs;
use std::path::Path;

use cubicflow::cnum::CExpr;
use cubicflow::expr::{parse, Domain, Expr, ZeroTestConfig};
use cubicflow::geometry::Metric;
use cubicflow::invariants::{zero_codifferential, Codifferential, SymTensor3};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    metric: RawMetric,
    codifferential: Option<RawCodiff>,
    domain: RawDomain,
    tolerances: Option<RawTolerances>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawMetric {
    Isothermal {
        lambda: String,
    },
    General {
        g11: String,
        g12: String,
        g22: String,
        #[serde(default = "plus")]
        orientation: i8,
    },
    Null {
        lambda: String,
    },
}

fn plus() -> i8 {
    1
}

fn zero_str() -> String {
    "0".into()
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawCodiff {
    IsothermalComplex {
        #[serde(default = "zero_str")]
        re: String,
        #[serde(default = "zero_str")]
        im: String,
    },
    GeneralReal(RawTensor),
    NullPair {
        #[serde(default = "zero_str")]
        a1: String,
        #[serde(default = "zero_str")]
        a2: String,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTensor {
    #[serde(default = "zero_str")]
    t111: String,
    #[serde(default = "zero_str")]
    t112: String,
    #[serde(default = "zero_str")]
    t122: String,
    #[serde(default = "zero_str")]
    t222: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    x: [f64; 2],
    y: [f64; 2],
    samples: Option<usize>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    abs: Option<f64>,
    rel: Option<f64>,
    seeds: Option<u32>,
}

pub struct Manifest {
    pub metric: Metric,
    pub codiff: Codifferential,
    pub domain: Domain,
    pub cfg: ZeroTestConfig,
}

fn expr(field: &str, text: &str) -> Result<Expr, CliError> {
    parse(text).map_err(|e| CliError::input(format!("{field}: {e}")))
}

fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

impl RawTensor {
    fn build(&self) -> Result<SymTensor3, CliError> {
        Ok(SymTensor3::new(
            expr("t111", &self.t111)?,
            expr("t112", &self.t112)?,
            expr("t122", &self.t122)?,
            expr("t222", &self.t222)?,
        ))
    }
}

/// An integral file holds the four components `t111 .. t222` at top level.
pub fn load_integral(path: &Path) -> Result<SymTensor3, CliError> {
    read_toml::<RawTensor>(path)?.build()
}

pub fn load(path: &Path) -> Result<Manifest, CliError> {
    let raw: Raw = read_toml(path)?;
    let metric = match &raw.metric {
        RawMetric::Isothermal { lambda } => Metric::isothermal(expr("metric.lambda", lambda)?),
        RawMetric::General { g11, g12, g22, orientation } => {
            if orientation.abs() != 1 {
                return Err(CliError::input("metric.orientation must be 1 or -1"));
            }
            Metric::General {
                g11: expr("metric.g11", g11)?,
                g12: expr("metric.g12", g12)?,
                g22: expr("metric.g22", g22)?,
                orientation: *orientation,
            }
        }
        RawMetric::Null { lambda } => Metric::null(expr("metric.lambda", lambda)?),
    };
    let codiff = match &raw.codifferential {
        None => zero_codifferential(&metric),
        Some(RawCodiff::IsothermalComplex { re, im }) => {
            if !matches!(metric, Metric::Isothermal { .. }) {
                return Err(CliError::input("codifferential kind isothermal-complex needs an isothermal metric"));
            }
            Codifferential::IsothermalComplex { a: CExpr::new(expr("codifferential.re", re)?, expr("codifferential.im", im)?) }
        }
        Some(RawCodiff::GeneralReal(t)) => {
            if matches!(metric, Metric::Null { .. }) {
                return Err(CliError::input("codifferential kind general-real needs a Riemannian metric"));
            }
            Codifferential::GeneralReal(t.build()?)
        }
        Some(RawCodiff::NullPair { a1, a2 }) => {
            if !matches!(metric, Metric::Null { .. }) {
                return Err(CliError::input("codifferential kind null-pair needs a null metric"));
            }
            Codifferential::NullPair { a1: expr("codifferential.a1", a1)?, a2: expr("codifferential.a2", a2)? }
        }
    };
    let d = &raw.domain;
    let domain = Domain::new((d.x[0], d.x[1]), (d.y[0], d.y[1]));
    if !domain.is_nondegenerate() {
        return Err(CliError::input("domain: each range needs finite bounds with lo < hi"));
    }
    let mut cfg = ZeroTestConfig::default();
    if let Some(n) = d.samples {
        if n == 0 {
            return Err(CliError::input("domain.samples must be positive"));
        }
        cfg.samples = n;
    }
    if let Some(s) = d.seed {
        cfg.seed = s;
    }
    if let Some(t) = &raw.tolerances {
        for v in [t.abs, t.rel].into_iter().flatten() {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::input("tolerances must be positive"));
            }
        }
        cfg.abs_tol = t.abs.unwrap_or(cfg.abs_tol);
        cfg.rel_tol = t.rel.unwrap_or(cfg.rel_tol);
        if let Some(s) = t.seeds {
            if s == 0 {
                return Err(CliError::input("tolerances.seeds must be positive"));
            }
            cfg.seeds = s;
        }
    }
    Ok(Manifest { metric, codiff, domain, cfg })
}
