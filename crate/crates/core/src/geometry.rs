//! Metrics on a chart, curvature, gradients, brackets, and the weighted
//! derivatives on sections `f dz^p dzbar^q` (or `f dx^p dy^q` in a null chart).

use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cnum::{wirtinger_z, wirtinger_zbar, CExpr};
use crate::expr::{Compiled, Domain, Expr, ZeroTestConfig};

pub type Mat2 = [[Expr; 2]; 2];
/// `gamma[k][i][j]` is the Christoffel symbol with upper index `k`.
pub type Christoffel = [[[Expr; 2]; 2]; 2];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("section chart does not match the metric")]
    ChartMismatch,
    #[error("operation needs a Riemannian metric")]
    NotRiemannian,
    #[error("metric degenerates at ({x}, {y})")]
    Degenerate { x: f64, y: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    /// `lambda (dx^2 + dy^2)`.
    Isothermal { lambda: Expr },
    /// `g11 dx^2 + 2 g12 dx dy + g22 dy^2`, positive definite; the area form
    /// is `orientation * sqrt(det) dx^dy`.
    General { g11: Expr, g12: Expr, g22: Expr, orientation: i8 },
    /// Null chart, `g(dx, dy) = -lambda` so that `R = (ln lambda)_xy / lambda`.
    Null { lambda: Expr },
}

fn half() -> BigRational {
    BigRational::new(1.into(), 2.into())
}

fn half_of(e: &Expr) -> Expr {
    e.scale(&half())
}

impl Metric {
    pub fn isothermal(lambda: Expr) -> Metric {
        Metric::Isothermal { lambda }
    }

    pub fn general(g11: Expr, g12: Expr, g22: Expr) -> Metric {
        Metric::General { g11, g12, g22, orientation: 1 }
    }

    pub fn null(lambda: Expr) -> Metric {
        Metric::Null { lambda }
    }

    pub fn is_riemannian(&self) -> bool {
        !matches!(self, Metric::Null { .. })
    }

    pub fn orientation(&self) -> i64 {
        match self {
            Metric::General { orientation, .. }
                if *orientation < 0 => {
                    -1
                }
            _ => 1,
        }
    }

    /// The same metric as a `General` variant (Riemannian metrics only).
    pub fn to_general(&self) -> Result<Metric, GeometryError> {
        match self {
            Metric::Isothermal { lambda } => Ok(Metric::General {
                g11: lambda.clone(),
                g12: Expr::zero(),
                g22: lambda.clone(),
                orientation: 1,
            }),
            Metric::General { .. } => Ok(self.clone()),
            Metric::Null { .. } => Err(GeometryError::NotRiemannian),
        }
    }

    /// Covariant components `g_ij`.
    pub fn components(&self) -> Mat2 {
        match self {
            Metric::Isothermal { lambda } => [[lambda.clone(), Expr::zero()], [Expr::zero(), lambda.clone()]],
            Metric::General { g11, g12, g22, .. } => [[g11.clone(), g12.clone()], [g12.clone(), g22.clone()]],
            Metric::Null { lambda } => [[Expr::zero(), lambda.neg()], [lambda.neg(), Expr::zero()]],
        }
    }

    pub fn det(&self) -> Expr {
        match self {
            Metric::Isothermal { lambda } => lambda * lambda,
            Metric::General { g11, g12, g22, .. } => g11 * g22 - g12 * g12,
            Metric::Null { lambda } => (lambda * lambda).neg(),
        }
    }

    /// Contravariant components `g^ij`.
    pub fn inverse(&self) -> Mat2 {
        match self {
            Metric::Isothermal { lambda } => {
                let r = lambda.recip();
                [[r.clone(), Expr::zero()], [Expr::zero(), r]]
            }
            Metric::General { g11, g12, g22, .. } => {
                let d = self.det();
                [[g22 / &d, (g12 / &d).neg()], [(g12 / &d).neg(), g11 / &d]]
            }
            Metric::Null { lambda } => {
                let r = lambda.recip().neg();
                [[Expr::zero(), r.clone()], [r, Expr::zero()]]
            }
        }
    }

    /// Area density `mu = sqrt|det g|`.
    pub fn volume(&self) -> Expr {
        match self {
            Metric::Isothermal { lambda } | Metric::Null { lambda } => lambda.clone(),
            Metric::General { .. } => self.det().sqrt(),
        }
    }

    /// `omega_xy`, the area form component.
    pub fn omega(&self) -> Expr {
        let mu = self.volume();
        if self.orientation() < 0 {
            mu.neg()
        } else {
            mu
        }
    }

    pub fn christoffel(&self) -> Christoffel {
        christoffel(&self.components(), &self.inverse())
    }

    pub fn gauss_curvature(&self) -> Expr {
        match self {
            Metric::Isothermal { lambda } => {
                // R = -Delta(ln lambda) / (2 lambda)
                let (lx, ly) = (lambda.dx(), lambda.dy());
                let num = (lambda.dx().dx() + lambda.dy().dy()) * lambda - (&lx * &lx + &ly * &ly);
                (num / (lambda.powi(3) * 2)).neg()
            }
            Metric::Null { lambda } => {
                let num = lambda.dx().dy() * lambda - lambda.dx() * lambda.dy();
                num / lambda.powi(3)
            }
            Metric::General { .. } => curvature_from_components(&self.components()),
        }
    }

    /// `g^ij df_i dh_j`.
    pub fn inner(&self, f: &Expr, h: &Expr) -> Expr {
        let gi = self.inverse();
        let df = [f.dx(), f.dy()];
        let dh = [h.dx(), h.dy()];
        let mut terms = Vec::new();
        for i in 0..2 {
            for j in 0..2 {
                if !gi[i][j].is_num_zero() {
                    terms.push(&gi[i][j] * &df[i] * &dh[j]);
                }
            }
        }
        Expr::add_many(terms)
    }

    pub fn grad_half_square(&self, f: &Expr) -> Expr {
        half_of(&self.inner(f, f))
    }

    /// `{f, h} = (f_x h_y - f_y h_x) / omega_xy`.
    pub fn poisson(&self, f: &Expr, h: &Expr) -> Expr {
        (f.dx() * h.dy() - f.dy() * h.dx()) / self.omega()
    }

    pub fn laplacian(&self, f: &Expr) -> Expr {
        match self {
            Metric::Isothermal { lambda } => (f.dx().dx() + f.dy().dy()) / lambda,
            Metric::Null { lambda } => (f.dx().dy() * 2).neg() / lambda,
            Metric::General { .. } => {
                let mu = self.volume();
                let gi = self.inverse();
                let (fx, fy) = (f.dx(), f.dy());
                let vx = &mu * (&gi[0][0] * &fx + &gi[0][1] * &fy);
                let vy = &mu * (&gi[1][0] * &fx + &gi[1][1] * &fy);
                (vx.dx() + vy.dy()) / mu
            }
        }
    }

    /// `J^i_j` (row `i`, column `j`), the rotation by +90 degrees: `J d/dx` is
    /// the positively oriented unit-length turn of `d/dx`.
    pub fn complex_structure(&self) -> Result<Mat2, GeometryError> {
        match self {
            Metric::Isothermal { .. } => Ok([[Expr::zero(), Expr::int(-1)], [Expr::one(), Expr::zero()]]),
            Metric::General { .. } => {
                let gi = self.inverse();
                let w = self.omega();
                Ok([
                    [&w * &gi[0][1], (&w * &gi[0][0]).neg()],
                    [&w * &gi[1][1], (&w * &gi[1][0]).neg()],
                ])
            }
            Metric::Null { .. } => Err(GeometryError::NotRiemannian),
        }
    }

    /// Coefficient of the metric as a weight-(1,1) section.
    pub fn section_coefficient(&self) -> Result<Expr, GeometryError> {
        match self {
            Metric::Isothermal { lambda } => Ok(lambda.clone()),
            Metric::Null { lambda } => Ok((lambda * 2).neg()),
            Metric::General { .. } => Err(GeometryError::ChartMismatch),
        }
    }

    /// Fails when the metric degenerates (or the chart leaves its domain) at a
    /// probe point.
    pub fn validate(&self, domain: &Domain, cfg: &ZeroTestConfig) -> Result<(), GeometryError> {
        let (check, positive) = match self {
            Metric::Isothermal { lambda } | Metric::Null { lambda } => (lambda.clone(), false),
            Metric::General { .. } => (self.det(), true),
        };
        let c = Compiled::new(&check);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut pts = vec![domain.center()];
        for _ in 0..cfg.samples {
            pts.push(domain.sample(&mut rng));
        }
        for (x, y) in pts {
            let ok = match c.eval1(x, y) {
                Ok(v) => v.is_finite() && if positive { v > 1e-12 } else { v.abs() > 1e-12 },
                Err(_) => false,
            };
            if !ok {
                return Err(GeometryError::Degenerate { x, y });
            }
        }
        Ok(())
    }
}

pub fn christoffel(g: &Mat2, gi: &Mat2) -> Christoffel {
    let dg = |a: usize, b: usize, l: usize| if l == 0 { g[a][b].dx() } else { g[a][b].dy() };
    let mut out: Christoffel = Default::default();
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                let mut terms = Vec::new();
                for l in 0..2 {
                    if gi[k][l].is_num_zero() {
                        continue;
                    }
                    let s = dg(l, j, i) + dg(l, i, j) - dg(i, j, l);
                    if !s.is_num_zero() {
                        terms.push(&gi[k][l] * s);
                    }
                }
                out[k][i][j] = half_of(&Expr::add_many(terms));
            }
        }
    }
    out
}

/// `R = 1/2 R^i_{jik} g^{jk}` from the components of any non-degenerate metric.
pub fn curvature_from_components(g: &Mat2) -> Expr {
    let d = &g[0][0] * &g[1][1] - &g[0][1] * &g[1][0];
    let gi = [
        [&g[1][1] / &d, (&g[0][1] / &d).neg()],
        [(&g[1][0] / &d).neg(), &g[0][0] / &d],
    ];
    let gam = christoffel(g, &gi);
    let dgam = |i: usize, l: usize, j: usize, k: usize| {
        if k == 0 {
            gam[i][l][j].dx()
        } else {
            gam[i][l][j].dy()
        }
    };
    // R^i_{jkl} = d_k G^i_lj - d_l G^i_kj + G^i_km G^m_lj - G^i_lm G^m_kj, Ricci R_jl = R^i_{jil}
    let mut terms = Vec::new();
    for j in 0..2 {
        for l in 0..2 {
            if gi[j][l].is_num_zero() {
                continue;
            }
            let mut ric = Vec::new();
            for i in 0..2 {
                ric.push(dgam(i, l, j, i));
                ric.push(dgam(i, i, j, l).neg());
                for m in 0..2 {
                    ric.push(&gam[i][i][m] * &gam[m][l][j]);
                    ric.push((&gam[i][l][m] * &gam[m][i][j]).neg());
                }
            }
            terms.push(&gi[j][l] * Expr::add_many(ric));
        }
    }
    half_of(&Expr::add_many(terms))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    Complex,
    Null,
}

/// `coeff dz^p dzbar^q` (complex chart) or `coeff dx^p dy^q` (null chart);
/// negative weights stand for vector factors, `d/dz = dz^-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub coeff: CExpr,
    pub p: i64,
    pub q: i64,
    pub chart: Chart,
}

impl Section {
    pub fn new(coeff: CExpr, p: i64, q: i64, chart: Chart) -> Section {
        Section { coeff, p, q, chart }
    }

    pub fn scalar(f: CExpr, chart: Chart) -> Section {
        Section::new(f, 0, 0, chart)
    }

    /// Complex conjugate; in a null chart the roles of `x` and `y` are swapped
    /// by the involution instead, so only complex sections conjugate here.
    pub fn conj(&self) -> Section {
        Section::new(self.coeff.conj(), self.q, self.p, self.chart)
    }

    pub fn mul(&self, other: &Section) -> Result<Section, GeometryError> {
        if self.chart != other.chart {
            return Err(GeometryError::ChartMismatch);
        }
        Ok(Section::new(&self.coeff * &other.coeff, self.p + other.p, self.q + other.q, self.chart))
    }

    pub fn add(&self, other: &Section) -> Result<Section, GeometryError> {
        if self.chart != other.chart || self.p != other.p || self.q != other.q {
            return Err(GeometryError::ChartMismatch);
        }
        Ok(Section::new(&self.coeff + &other.coeff, self.p, self.q, self.chart))
    }

    pub fn scale(&self, c: &CExpr) -> Section {
        Section::new(&self.coeff * c, self.p, self.q, self.chart)
    }
}

fn chart_lambda(g: &Metric, chart: Chart) -> Result<&Expr, GeometryError> {
    match (g, chart) {
        (Metric::Isothermal { lambda }, Chart::Complex) | (Metric::Null { lambda }, Chart::Null) => Ok(lambda),
        _ => Err(GeometryError::ChartMismatch),
    }
}

/// `f_z - p (lambda_z / lambda) f`, weight raised by (1, 0).
pub fn nabla10(s: &Section, g: &Metric) -> Result<Section, GeometryError> {
    let lambda = chart_lambda(g, s.chart)?;
    let (df, dl) = match s.chart {
        Chart::Complex => (wirtinger_z(&s.coeff), wirtinger_z(&CExpr::real(lambda.clone()))),
        Chart::Null => (s.coeff.dx(), CExpr::real(lambda.dx())),
    };
    let corr = (&s.coeff * &dl).scale(&(lambda.recip() * s.p));
    Ok(Section::new(df - corr, s.p + 1, s.q, s.chart))
}

/// `f_zbar - q (lambda_zbar / lambda) f`, weight raised by (0, 1).
pub fn nabla01(s: &Section, g: &Metric) -> Result<Section, GeometryError> {
    let lambda = chart_lambda(g, s.chart)?;
    let (df, dl) = match s.chart {
        Chart::Complex => (wirtinger_zbar(&s.coeff), wirtinger_zbar(&CExpr::real(lambda.clone()))),
        Chart::Null => (s.coeff.dy(), CExpr::real(lambda.dy())),
    };
    let corr = (&s.coeff * &dl).scale(&(lambda.recip() * s.q));
    Ok(Section::new(df - corr, s.p, s.q + 1, s.chart))
}

pub fn gauss_curvature(g: &Metric) -> Expr {
    g.gauss_curvature()
}

pub fn grad_half_square(f: &Expr, g: &Metric) -> Expr {
    g.grad_half_square(f)
}

pub fn poisson_g(f: &Expr, h: &Expr, g: &Metric) -> Expr {
    g.poisson(f, h)
}

pub fn laplacian(f: &Expr, g: &Metric) -> Expr {
    g.laplacian(f)
}

pub fn complex_structure(g: &Metric) -> Result<Mat2, GeometryError> {
    g.complex_structure()
}
