mod manifest;
mod report;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use cubicflow::decision::{decide, DecisionError, Status};
use cubicflow::expr::{eval_at, ZeroVerdict};
use cubicflow::invariants::{InvariantError, Invariants};
use cubicflow::verify::{certify, conservation_report, integrate_geodesic, trajectory_csv};
use serde::Serialize;

use report::*;

const EXIT_OK: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_UNDETERMINED: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> CliError {
        CliError { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<InvariantError> for CliError {
    fn from(e: InvariantError) -> Self {
        let code = match e {
            InvariantError::HolomorphicityViolated { .. } | InvariantError::ChartMismatch | InvariantError::Geometry(_) => EXIT_USAGE,
            _ => EXIT_UNDETERMINED,
        };
        CliError { code, message: format!("{e:?}: {e}") }
    }
}

impl From<DecisionError> for CliError {
    fn from(e: DecisionError) -> Self {
        match e {
            DecisionError::Invariant(i) => i.into(),
            DecisionError::Geometry(g) => CliError::input(format!("Geometry: {g}")),
        }
    }
}

#[derive(Parser)]
#[command(name = "cubicflow", version, about = "Decide whether a surface metric admits a cubic integral with a given codifferential")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the decision flowchart.
    Check { manifest: PathBuf },
    /// Report the invariant families, evaluated at a point or as expressions.
    #[command(group(ArgGroup::new("mode").required(true).args(["at", "symbolic"])))]
    Invariants {
        manifest: PathBuf,
        /// Evaluation point `x,y`.
        #[arg(long, value_parser = parse_point)]
        at: Option<[f64; 2]>,
        #[arg(long)]
        symbolic: bool,
    },
    /// Certify `{F, H} = 0` for a cubic given by its tensor components.
    Verify {
        manifest: PathBuf,
        /// TOML file with string fields t111, t112, t122, t222.
        #[arg(long)]
        integral: PathBuf,
    },
    /// Integrate the geodesic flow with RK4 and report conservation drift.
    Geodesic {
        manifest: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        x0: f64,
        #[arg(long, allow_hyphen_values = true)]
        y0: f64,
        #[arg(long, allow_hyphen_values = true)]
        px0: f64,
        #[arg(long, allow_hyphen_values = true)]
        py0: f64,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 1e-8)]
        threshold: f64,
        /// Also track the cubic in this integral file.
        #[arg(long)]
        integral: Option<PathBuf>,
        /// Write the trajectory here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [x, y] = parts.as_slice() else {
        return Err("expected x,y".into());
    };
    let f = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok([f(x)?, f(y)?])
}

fn emit<T: Serialize>(value: &T) {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    // a closed pipe downstream is not an error of ours
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn check(path: PathBuf) -> Result<u8, CliError> {
    let m = manifest::load(&path)?;
    let v = decide(&m.metric, &m.codiff, &m.domain, &m.cfg)?;
    emit(&CheckReport::new(Header::new("check", &m.domain, &m.cfg), &v));
    Ok(match v.status {
        s if s.is_compatible() => EXIT_OK,
        Status::Incompatible { .. } => EXIT_FAIL,
        _ => EXIT_UNDETERMINED,
    })
}

fn invariants(path: PathBuf, at: Option<[f64; 2]>) -> Result<u8, CliError> {
    let m = manifest::load(&path)?;
    m.metric.validate(&m.domain, &m.cfg).map_err(|e| CliError::input(format!("Geometry: {e}")))?;
    let inv = Invariants::new(&m.metric, &m.codiff)?;
    inv.require_holomorphic(&m.domain, &m.cfg)?;
    let rep = inv.report(&m.domain, &m.cfg)?;
    let invariants = rep
        .entries
        .iter()
        .map(|e| {
            let mut j = InvariantJson {
                name: e.which.name(),
                formula: e.which.formula(),
                order: e.quantity.as_ref().map(|q| q.order),
                expr: None,
                value: None,
                note: e.note.clone(),
            };
            if let Some(q) = &e.quantity {
                match at {
                    None => j.expr = Some(q.expr.to_string()),
                    Some([x, y]) => match eval_at(&q.expr, x, y) {
                        Ok(v) => j.value = Some(v),
                        Err(err) => j.note = Some(format!("not defined at ({x}, {y}): {err}")),
                    },
                }
            }
            j
        })
        .collect();
    emit(&InvariantsReport { header: Header::new("invariants", &m.domain, &m.cfg), at, invariants });
    Ok(EXIT_OK)
}

fn verify(path: PathBuf, integral: PathBuf) -> Result<u8, CliError> {
    let m = manifest::load(&path)?;
    let f = manifest::load_integral(&integral)?;
    let c = certify(&f, &m.metric, &m.domain, &m.cfg);
    let verdict = c.verdict();
    emit(&VerifyReport {
        header: Header::new("verify", &m.domain, &m.cfg),
        verdict: (&verdict).into(),
        integral: (&f).into(),
        certificate: certificate_json(&c),
    });
    Ok(match verdict {
        ZeroVerdict::Zero => EXIT_OK,
        ZeroVerdict::NonZero { .. } => EXIT_FAIL,
        ZeroVerdict::Unknown(_) => EXIT_UNDETERMINED,
    })
}

#[allow(clippy::too_many_arguments, clippy::neg_cmp_op_on_partial_ord)]
fn geodesic(
    path: PathBuf,
    start: [f64; 4],
    steps: usize,
    dt: f64,
    threshold: f64,
    integral: Option<PathBuf>,
    csv: Option<PathBuf>,
) -> Result<u8, CliError> {
    let m = manifest::load(&path)?;
    if steps == 0 || !(dt.is_finite() && dt > 0.0) || !(threshold > 0.0) || start.iter().any(|v| !v.is_finite()) {
        return Err(CliError::input("geodesic needs steps > 0, dt > 0, threshold > 0 and a finite start"));
    }
    let f = integral.as_deref().map(manifest::load_integral).transpose()?;
    let (traj, error) = match integrate_geodesic(&m.metric, start, steps, dt) {
        Ok(t) => (t, None),
        Err(p) => (p.trajectory, Some(format!("integration stopped: {}", p.error))),
    };
    let conserved = conservation_report(&traj, &m.metric, f.as_ref());
    let (cons, error) = match conserved {
        Ok(c) => (Some(c), error),
        Err(e) => (None, error.or(Some(format!("cannot evaluate the integrals: {e}")))),
    };
    if let Some(out) = &csv {
        let text = trajectory_csv(&traj, &m.metric, f.as_ref()).map_err(|e| CliError::input(format!("csv: {e}")))?;
        fs::write(out, text).map_err(|e| CliError::input(format!("{}: {e}", out.display())))?;
    }
    let within = error.is_none()
        && cons
            .as_ref()
            .is_some_and(|c| c.max_h_drift < threshold && c.max_f_drift.is_none_or(|d| d < threshold));
    emit(&GeodesicReport {
        report_version: REPORT_VERSION,
        command: "geodesic",
        integrator: "rk4",
        start,
        steps,
        steps_taken: traj.samples.len() - 1,
        dt,
        threshold,
        h0: cons.as_ref().map(|c| c.h0),
        max_h_drift: cons.as_ref().map(|c| c.max_h_drift),
        f0: cons.as_ref().and_then(|c| c.f0),
        max_f_drift: cons.as_ref().and_then(|c| c.max_f_drift),
        within_threshold: within,
        csv: csv.map(|p| p.display().to_string()),
        error,
    });
    Ok(if within { EXIT_OK } else { EXIT_FAIL })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Check { manifest } => check(manifest),
        Command::Invariants { manifest, at, .. } => invariants(manifest, at),
        Command::Verify { manifest, integral } => verify(manifest, integral),
        Command::Geodesic { manifest, x0, y0, px0, py0, steps, dt, threshold, integral, csv } => {
            geodesic(manifest, [x0, y0, px0, py0], steps, dt, threshold, integral, csv)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
