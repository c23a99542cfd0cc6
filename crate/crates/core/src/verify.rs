//! Independent certification of a candidate integral: the bracket `{F, H}`
//! with `H = g^ij p_i p_j / 2`, and numerical conservation along geodesics.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::cnum::{wirtinger_z, wirtinger_zbar, CExpr};
use crate::expr::{is_zero, simplify, Compiled, Domain, EvalDomainError, Expr, ZeroTestConfig, ZeroVerdict};
use crate::geometry::Metric;
use crate::invariants::SymTensor3;

/// Polynomial in `px, py` with coefficients depending on `x, y`; keys are
/// `(degree in px, degree in py)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MomPoly {
    pub terms: BTreeMap<(u32, u32), Expr>,
}

impl MomPoly {
    pub fn zero() -> MomPoly {
        MomPoly::default()
    }

    pub fn monomial(i: u32, j: u32, c: Expr) -> MomPoly {
        let mut m = MomPoly::zero();
        m.add_term(i, j, c);
        m
    }

    pub fn add_term(&mut self, i: u32, j: u32, c: Expr) {
        if c.is_num_zero() {
            return;
        }
        let e = self.terms.entry((i, j)).or_insert_with(Expr::zero);
        *e = &*e + c;
    }

    /// `F^ijk p_i p_j p_k`.
    pub fn from_tensor3(t: &SymTensor3) -> MomPoly {
        let c = t.polynomial();
        let mut m = MomPoly::zero();
        for (k, e) in c.into_iter().enumerate() {
            m.add_term(3 - k as u32, k as u32, e);
        }
        m
    }

    /// `H = g^ij p_i p_j / 2`.
    pub fn hamiltonian(g: &Metric) -> MomPoly {
        let gi = g.inverse();
        let half = BigRational::new(1.into(), 2.into());
        let mut m = MomPoly::zero();
        m.add_term(2, 0, gi[0][0].scale(&half));
        m.add_term(1, 1, gi[0][1].clone());
        m.add_term(0, 2, gi[1][1].scale(&half));
        m
    }

    pub fn add(&self, o: &MomPoly) -> MomPoly {
        let mut m = self.clone();
        for (&(i, j), c) in &o.terms {
            m.add_term(i, j, c.clone());
        }
        m
    }

    pub fn sub(&self, o: &MomPoly) -> MomPoly {
        self.add(&o.scale(&Expr::int(-1)))
    }

    pub fn scale(&self, s: &Expr) -> MomPoly {
        let mut m = MomPoly::zero();
        for (&(i, j), c) in &self.terms {
            m.add_term(i, j, c * s);
        }
        m
    }

    pub fn mul(&self, o: &MomPoly) -> MomPoly {
        let mut m = MomPoly::zero();
        for (&(i, j), a) in &self.terms {
            for (&(k, l), b) in &o.terms {
                m.add_term(i + k, j + l, a * b);
            }
        }
        m
    }

    pub fn dx(&self) -> MomPoly {
        self.map_coeffs(|c| c.dx())
    }

    pub fn dy(&self) -> MomPoly {
        self.map_coeffs(|c| c.dy())
    }

    fn map_coeffs(&self, f: impl Fn(&Expr) -> Expr) -> MomPoly {
        let mut m = MomPoly::zero();
        for (&(i, j), c) in &self.terms {
            m.add_term(i, j, f(c));
        }
        m
    }

    pub fn d_px(&self) -> MomPoly {
        let mut m = MomPoly::zero();
        for (&(i, j), c) in &self.terms {
            if i > 0 {
                m.add_term(i - 1, j, c * i as i64);
            }
        }
        m
    }

    pub fn d_py(&self) -> MomPoly {
        let mut m = MomPoly::zero();
        for (&(i, j), c) in &self.terms {
            if j > 0 {
                m.add_term(i, j - 1, c * j as i64);
            }
        }
        m
    }

    pub fn coeff(&self, i: u32, j: u32) -> Expr {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|(i, j)| i + j).max()
    }

    /// Coefficients of `px^n, px^(n-1) py, ..., py^n`.
    pub fn homogeneous_coeffs(&self, n: u32) -> Vec<Expr> {
        (0..=n).map(|j| self.coeff(n - j, j)).collect()
    }

    /// Value at a phase-space point.
    pub fn eval(&self, x: f64, y: f64, px: f64, py: f64) -> Result<f64, EvalDomainError> {
        let exprs: Vec<Expr> = self.terms.values().cloned().collect();
        let vals = Compiled::many(&exprs).eval(x, y)?;
        Ok(self
            .terms
            .keys()
            .zip(vals)
            .map(|(&(i, j), v)| v * px.powi(i as i32) * py.powi(j as i32))
            .sum())
    }
}

/// Canonical bracket `{F, G} = F_x G_px + F_y G_py - F_px G_x - F_py G_y`.
pub fn canonical_bracket(f: &MomPoly, g: &MomPoly) -> MomPoly {
    let pos = f.dx().mul(&g.d_px()).add(&f.dy().mul(&g.d_py()));
    let neg = f.d_px().mul(&g.dx()).add(&f.d_py().mul(&g.dy()));
    pos.sub(&neg)
}

/// Split by total momentum degree; terms with zero coefficient are dropped.
pub fn homogeneous_components(f: &MomPoly) -> BTreeMap<u32, MomPoly> {
    let mut out: BTreeMap<u32, MomPoly> = BTreeMap::new();
    for (&(i, j), c) in &f.terms {
        let c = simplify(c);
        if c.is_num_zero() {
            continue;
        }
        out.entry(i + j).or_default().add_term(i, j, c);
    }
    out
}

type CRat = (BigRational, BigRational);

fn cmul(a: &CRat, b: &CRat) -> CRat {
    (&a.0 * &b.0 - &a.1 * &b.1, &a.0 * &b.1 + &a.1 * &b.0)
}

/// `p^m pbar^n` with `p = (px - i py)/2`, as complex coefficients of
/// `px^(m+n-j) py^j`.
fn p_power(m: usize, n: usize) -> Vec<CRat> {
    let half = BigRational::new(1.into(), 2.into());
    let zero = BigRational::zero();
    let p = vec![(half.clone(), zero.clone()), (zero.clone(), -&half)];
    let pb = vec![(half.clone(), zero.clone()), (zero.clone(), half)];
    let mut acc: Vec<CRat> = vec![(BigRational::one(), zero)];
    for f in std::iter::repeat_n(&p, m).chain(std::iter::repeat_n(&pb, n)) {
        let mut next = vec![(BigRational::zero(), BigRational::zero()); acc.len() + 1];
        for (j, a) in acc.iter().enumerate() {
            for (k, b) in f.iter().enumerate() {
                let t = cmul(a, b);
                next[j + k].0 += t.0;
                next[j + k].1 += t.1;
            }
        }
        acc = next;
    }
    acc
}

/// `Re(c p^m pbar^n)` as real quartic coefficients added into `out`.
fn add_re(out: &mut [Expr; 5], c: &CExpr, m: usize, n: usize) {
    for (j, (re, im)) in p_power(m, n).iter().enumerate() {
        let t = c.re.scale(re) - c.im.scale(im);
        out[j] = &out[j] + t;
    }
}

/// `(a, b)` with `F = Re(a p^3 + b p^2 pbar)` in an isothermal chart.
pub fn complex_coefficients(f: &SymTensor3) -> (CExpr, CExpr) {
    let c = f.polynomial();
    let a = CExpr::new((&c[0] - &c[2]) * 2, (&c[1] - &c[3]) * 2);
    let b = CExpr::new(&c[0] * 6 + &c[2] * 2, &c[3] * 6 + &c[1] * 2);
    (a, b)
}

/// Coefficients of `px^4, px^3 py, px^2 py^2, px py^3, py^4` in `{F, H}`.
pub fn bracket_fh(f: &SymTensor3, g: &Metric) -> [Expr; 5] {
    match g {
        Metric::Isothermal { lambda } => bracket_isothermal(f, lambda),
        Metric::Null { lambda } => bracket_null(f, lambda),
        Metric::General { .. } => {
            let b = canonical_bracket(&MomPoly::from_tensor3(f), &MomPoly::hamiltonian(g));
            let v = b.homogeneous_coeffs(4);
            [v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone(), v[4].clone()]
        }
    }
}

fn bracket_isothermal(f: &SymTensor3, lambda: &Expr) -> [Expr; 5] {
    let (a, b) = complex_coefficients(f);
    let l = CExpr::real(lambda.clone());
    let (lz, lzb) = (wirtinger_z(&l), wirtinger_zbar(&l));
    let q4 = wirtinger_zbar(&a).scale(lambda);
    let q31 = &b * &lzb + (&a * &lz).scale_int(3) + wirtinger_zbar(&b).scale(lambda) + wirtinger_z(&a).scale(lambda);
    let q22 = (&b * &lz).scale_int(2) + wirtinger_z(&b).scale(lambda);
    let mut out: [Expr; 5] = std::array::from_fn(|_| Expr::zero());
    add_re(&mut out, &q4, 4, 0);
    add_re(&mut out, &q31, 3, 1);
    add_re(&mut out, &q22, 2, 2);
    let s = (lambda * lambda).recip() * 2;
    out.map(|e| e * &s)
}

/// The null-chart route with `F = a1 px^3 + B1 px^2 py + B2 px py^2 - a2 py^3`.
fn bracket_null(f: &SymTensor3, lambda: &Expr) -> [Expr; 5] {
    let c = f.polynomial();
    let (a1, b1, b2, a2) = (c[0].clone(), c[1].clone(), c[2].clone(), c[3].neg());
    let l = lambda;
    let (lx, ly) = (l.dx(), l.dy());
    let p4x = l * a1.dy();
    let p4y = (l * a2.dx()).neg();
    let p31 = &b1 * &ly + &a1 * &lx * 3 + l * b1.dy() + l * a1.dx();
    let p13 = &b2 * &lx - &a2 * &ly * 3 + l * b2.dx() - l * a2.dy();
    let p22 = &b1 * &lx * 2 + l * b1.dx() + &b2 * &ly * 2 + l * b2.dy();
    // these are the coefficients for H = px py / (2 lambda); here H = -px py / lambda
    let s = (l * l).recip().neg();
    [p4x * &s, p31 * &s, p22 * &s, p13 * &s, p4y * &s]
}

/// The bracket coefficients with their zero verdicts.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketCertificate {
    pub coefficients: [Expr; 5],
    pub verdicts: [ZeroVerdict; 5],
}

impl BracketCertificate {
    pub fn all_zero(&self) -> bool {
        self.verdicts.iter().all(|v| v.is_zero())
    }

    pub fn verdict(&self) -> ZeroVerdict {
        self.verdicts.iter().cloned().fold(ZeroVerdict::Zero, ZeroVerdict::and)
    }
}

pub fn certify(f: &SymTensor3, g: &Metric, domain: &Domain, cfg: &ZeroTestConfig) -> BracketCertificate {
    let coefficients = bracket_fh(f, g).map(|e| simplify(&e));
    let verdicts = coefficients.clone().map(|e| is_zero(&e, domain, cfg));
    BracketCertificate { coefficients, verdicts }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub px: f64,
    pub py: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicTrajectory {
    pub samples: Vec<PhasePoint>,
    pub dt: f64,
    pub integrator: &'static str,
}

/// A trajectory cut short by an evaluation failure.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialTrajectory {
    pub trajectory: GeodesicTrajectory,
    pub error: EvalDomainError,
}

struct Rhs {
    c: Compiled,
}

impl Rhs {
    fn new(g: &Metric) -> Rhs {
        let gi = g.inverse();
        let inv = [gi[0][0].clone(), gi[0][1].clone(), gi[1][1].clone()];
        let mut all = inv.to_vec();
        all.extend(inv.iter().map(|e| e.dx()));
        all.extend(inv.iter().map(|e| e.dy()));
        Rhs { c: Compiled::many(&all) }
    }

    fn eval(&self, s: [f64; 4]) -> Result<[f64; 4], EvalDomainError> {
        let v = self.c.eval(s[0], s[1])?;
        let (px, py) = (s[2], s[3]);
        let quad = |o: usize| 0.5 * (v[o] * px * px + 2.0 * v[o + 1] * px * py + v[o + 2] * py * py);
        Ok([v[0] * px + v[1] * py, v[1] * px + v[2] * py, -quad(3), -quad(6)])
    }
}

/// Classical fixed-step RK4 on Hamilton's equations of `H = g^ij p_i p_j / 2`.
pub fn integrate_geodesic(g: &Metric, start: [f64; 4], steps: usize, dt: f64) -> Result<GeodesicTrajectory, PartialTrajectory> {
    let rhs = Rhs::new(g);
    let mut s = start;
    let mut t = 0.0;
    let point = |t: f64, s: [f64; 4]| PhasePoint {
        t,
        x: s[0],
        y: s[1],
        px: s[2],
        py: s[3],
    };
    let mut samples = vec![point(t, s)];
    let add = |a: [f64; 4], b: [f64; 4], h: f64| [a[0] + h * b[0], a[1] + h * b[1], a[2] + h * b[2], a[3] + h * b[3]];
    for n in 1..=steps {
        let step = (|| {
            let k1 = rhs.eval(s)?;
            let k2 = rhs.eval(add(s, k1, dt / 2.0))?;
            let k3 = rhs.eval(add(s, k2, dt / 2.0))?;
            let k4 = rhs.eval(add(s, k3, dt))?;
            let mut out = s;
            for i in 0..4 {
                out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            Ok(out)
        })();
        match step {
            Ok(next) => {
                s = next;
                t = n as f64 * dt;
                samples.push(point(t, s));
            }
            Err(error) => {
                return Err(PartialTrajectory {
                    trajectory: GeodesicTrajectory { samples, dt, integrator: "rk4" },
                    error,
                })
            }
        }
    }
    Ok(GeodesicTrajectory { samples, dt, integrator: "rk4" })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConservationReport {
    pub h0: f64,
    pub max_h_drift: f64,
    pub f0: Option<f64>,
    pub max_f_drift: Option<f64>,
}

fn evaluator(m: &MomPoly) -> impl Fn(&PhasePoint) -> Result<f64, EvalDomainError> {
    let keys: Vec<(u32, u32)> = m.terms.keys().copied().collect();
    let exprs: Vec<Expr> = m.terms.values().cloned().collect();
    let c = Compiled::many(&exprs);
    move |p| {
        let v = c.eval(p.x, p.y)?;
        Ok(keys
            .iter()
            .zip(v)
            .map(|(&(i, j), v)| v * p.px.powi(i as i32) * p.py.powi(j as i32))
            .sum())
    }
}

/// Largest deviation of `H` and of the optional integral `F` from their
/// initial values.
pub fn conservation_report(traj: &GeodesicTrajectory, g: &Metric, f: Option<&SymTensor3>) -> Result<ConservationReport, EvalDomainError> {
    let h = evaluator(&MomPoly::hamiltonian(g));
    let fe = f.map(|t| evaluator(&MomPoly::from_tensor3(t)));
    let first = &traj.samples[0];
    let h0 = h(first)?;
    let f0 = fe.as_ref().map(|e| e(first)).transpose()?;
    let (mut dh, mut df) = (0.0f64, 0.0f64);
    for s in &traj.samples {
        dh = dh.max((h(s)? - h0).abs());
        if let (Some(e), Some(v0)) = (&fe, f0) {
            df = df.max((e(s)? - v0).abs());
        }
    }
    Ok(ConservationReport {
        h0,
        max_h_drift: dh,
        f0,
        max_f_drift: f0.map(|_| df),
    })
}

/// CSV with columns `t,x,y,px,py,H,F` (`F` empty when no integral is given).
pub fn trajectory_csv(traj: &GeodesicTrajectory, g: &Metric, f: Option<&SymTensor3>) -> Result<String, EvalDomainError> {
    let h = evaluator(&MomPoly::hamiltonian(g));
    let fe = f.map(|t| evaluator(&MomPoly::from_tensor3(t)));
    let mut out = String::from("t,x,y,px,py,H,F\n");
    for s in &traj.samples {
        let fv = match &fe {
            Some(e) => format!("{:e}", e(s)?),
            None => String::new(),
        };
        let _ = writeln!(out, "{:e},{:e},{:e},{:e},{:e},{:e},{}", s.t, s.x, s.y, s.px, s.py, h(s)?, fv);
    }
    Ok(out)
}
