use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::eval::Compiled;
use super::node::Expr;
use super::simplify::try_simplify;

/// Axis-aligned sampling box in the chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Domain {
    pub fn new(x: (f64, f64), y: (f64, f64)) -> Domain {
        Domain { x, y }
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.x.0.is_finite() && self.x.1.is_finite() && self.y.0.is_finite() && self.y.1.is_finite()
            && self.x.0 < self.x.1
            && self.y.0 < self.y.1
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x.0 + self.x.1), 0.5 * (self.y.0 + self.y.1))
    }

    pub fn sample(&self, rng: &mut impl Rng) -> (f64, f64) {
        (rng.gen_range(self.x.0..self.x.1), rng.gen_range(self.y.0..self.y.1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroTestConfig {
    /// Probes per seed.
    pub samples: usize,
    pub seeds: u32,
    pub seed: u64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// A probe counts as a robust refutation when |value| exceeds the threshold by this factor.
    pub robust_factor: f64,
    /// Largest DAG handed to the symbolic normalizer before probing.
    pub symbolic_max_nodes: usize,
    /// Fraction of probes allowed to hit a domain error.
    pub max_failure_fraction: f64,
}

impl Default for ZeroTestConfig {
    fn default() -> Self {
        ZeroTestConfig {
            samples: 64,
            seeds: 3,
            seed: 0x5eed,
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            robust_factor: 10.0,
            symbolic_max_nodes: 200,
            max_failure_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ZeroVerdict {
    Zero,
    NonZero { x: f64, y: f64, value: f64 },
    Unknown(String),
}

impl ZeroVerdict {
    pub fn is_zero(&self) -> bool {
        matches!(self, ZeroVerdict::Zero)
    }

    pub fn is_nonzero(&self) -> bool {
        matches!(self, ZeroVerdict::NonZero { .. })
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, ZeroVerdict::Unknown(_))
    }

    /// Verdict for "both are zero": a refutation wins over an unknown.
    pub fn and(self, other: ZeroVerdict) -> ZeroVerdict {
        match (self, other) {
            (v @ ZeroVerdict::NonZero { .. }, _) | (_, v @ ZeroVerdict::NonZero { .. }) => v,
            (v @ ZeroVerdict::Unknown(_), _) | (_, v @ ZeroVerdict::Unknown(_)) => v,
            _ => ZeroVerdict::Zero,
        }
    }
}

impl fmt::Display for ZeroVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZeroVerdict::Zero => write!(f, "Zero"),
            ZeroVerdict::NonZero { x, y, value } => write!(f, "NonZero({value:e} at ({x}, {y}))"),
            ZeroVerdict::Unknown(r) => write!(f, "Unknown({r})"),
        }
    }
}

/// Tri-state identically-zero test: exact normalization for small inputs, then
/// seeded probing with a threshold relative to the largest intermediate value.
pub fn is_zero(e: &Expr, domain: &Domain, cfg: &ZeroTestConfig) -> ZeroVerdict {
    if e.is_num_zero() {
        return ZeroVerdict::Zero;
    }
    if let Some(c) = e.as_num() {
        let (x, y) = domain.center();
        return ZeroVerdict::NonZero {
            x,
            y,
            value: num_traits::ToPrimitive::to_f64(c).unwrap_or(f64::NAN),
        };
    }
    if e.dag_size() <= cfg.symbolic_max_nodes {
        if let Some((s, _)) = try_simplify(e, 2000, 500_000) {
            if s.is_num_zero() {
                return ZeroVerdict::Zero;
            }
        }
    }
    probe(&Compiled::new(e), domain, cfg)
}

/// Probing stage of [`is_zero`] on an already compiled expression.
pub fn probe(c: &Compiled, domain: &Domain, cfg: &ZeroTestConfig) -> ZeroVerdict {
    let total = cfg.samples * cfg.seeds as usize;
    let mut failures = 0usize;
    let mut best: Option<(f64, f64, f64, f64)> = None;
    let mut marginal = false;
    for s in 0..cfg.seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(s as u64));
        for _ in 0..cfg.samples {
            let (x, y) = domain.sample(&mut rng);
            match c.eval_with_scale(x, y) {
                Ok((v, scale)) => {
                    let ratio = v.abs() / (cfg.abs_tol + cfg.rel_tol * scale);
                    if ratio > 1.0 {
                        marginal = true;
                    }
                    if best.is_none_or(|b| ratio > b.0) {
                        best = Some((ratio, x, y, v));
                    }
                }
                Err(_) => failures += 1,
            }
        }
    }
    if failures as f64 > cfg.max_failure_fraction * total as f64 {
        return ZeroVerdict::Unknown(format!("{failures} of {total} probes hit a domain error"));
    }
    match best {
        Some((ratio, x, y, value)) if ratio > cfg.robust_factor => ZeroVerdict::NonZero { x, y, value },
        Some(_) if marginal => ZeroVerdict::Unknown("marginal probe values near the tolerance".into()),
        Some(_) => ZeroVerdict::Zero,
        None => ZeroVerdict::Unknown("no probe evaluated".into()),
    }
}

impl Expr {
    pub fn is_zero_on(&self, domain: &Domain, cfg: &ZeroTestConfig) -> ZeroVerdict {
        is_zero(self, domain, cfg)
    }
}
