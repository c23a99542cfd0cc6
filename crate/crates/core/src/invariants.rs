//! The invariant families built from a metric `g` and a 3-codifferential `A`:
//! `phi_k`, `D_k`, the compatibility expressions `G_k`, the covector `K`, the
//! starred family used when `phi_2` vanishes, and the 1-forms `Dx, Dy`.
//!
//! Three routes compute the `A`-dependent quantities:
//! * complex: isothermal metric and `A = a d/dz^3`, weighted Wirtinger calculus;
//! * index: any Riemannian chart and the real tensor `Re A`, covariant formulas;
//! * null: null chart and `A = (a1 d/dx^3, a2 d/dy^3)`, through the trace-free
//!   Hessian `S` that the principle equation prescribes for `K`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use num_rational::BigRational;
use thiserror::Error;

use crate::cnum::{wirtinger_z, CExpr};
use crate::expr::{is_zero, Domain, Expr, ZeroTestConfig, ZeroVerdict};
use crate::geometry::{nabla10, Chart, Christoffel, GeometryError, Mat2, Metric, Section};
use crate::tensorcoords;

/// Highest derivative order of the input data an invariant may involve.
pub const ORDER_CAP: u32 = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InvariantError {
    #[error("codifferential is not holomorphic: residual {value:e} at ({x}, {y})")]
    HolomorphicityViolated { x: f64, y: f64, value: f64 },
    #[error("holomorphicity could not be decided: {0}")]
    HolomorphicityUnknown(String),
    #[error("bracket in the denominator is not non-vanishing on the sampled domain: {0}")]
    DegenerateBracket(ZeroVerdict),
    #[error("{name} needs derivatives of order {order}, above the cap {cap}")]
    OrderCapExceeded { name: &'static str, order: u32, cap: u32 },
    #[error("codifferential and metric live in different charts")]
    ChartMismatch,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Symmetric contravariant 3-tensor, stored by the number of `2` indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SymTensor3 {
    pub t111: Expr,
    pub t112: Expr,
    pub t122: Expr,
    pub t222: Expr,
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

impl SymTensor3 {
    pub fn new(t111: Expr, t112: Expr, t122: Expr, t222: Expr) -> SymTensor3 {
        SymTensor3 { t111, t112, t122, t222 }
    }

    pub fn zero() -> SymTensor3 {
        SymTensor3::default()
    }

    /// `Re(a d/dz^3)` in the isothermal chart, `d/dz = (d/dx - i d/dy)/2`.
    pub fn from_section(a: &CExpr) -> SymTensor3 {
        let e = q(1, 8);
        SymTensor3::new(a.re.scale(&e), a.im.scale(&e), a.re.scale(&-&e), a.im.scale(&-&e))
    }

    /// From the cubic polynomial `c0 px^3 + c1 px^2 py + c2 px py^2 + c3 py^3`.
    pub fn from_polynomial(c: &[Expr; 4]) -> SymTensor3 {
        let t = q(1, 3);
        SymTensor3::new(c[0].clone(), c[1].scale(&t), c[2].scale(&t), c[3].clone())
    }

    /// Coefficients of `px^3, px^2 py, px py^2, py^3` in `F^{ijk} p_i p_j p_k`.
    pub fn polynomial(&self) -> [Expr; 4] {
        [self.t111.clone(), &self.t112 * 3, &self.t122 * 3, self.t222.clone()]
    }

    /// `(a0 - a2) + i (a1 - a3)` of the polynomial coefficients.
    pub fn eq13_coefficient(&self) -> CExpr {
        let c = self.polynomial();
        CExpr::new(&c[0] - &c[2], &c[1] - &c[3])
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &Expr {
        match i + j + k {
            0 => &self.t111,
            1 => &self.t112,
            2 => &self.t122,
            _ => &self.t222,
        }
    }

    pub fn full(&self) -> [[[Expr; 2]; 2]; 2] {
        let mut out: [[[Expr; 2]; 2]; 2] = Default::default();
        for (i, a) in out.iter_mut().enumerate() {
            for (j, b) in a.iter_mut().enumerate() {
                for (k, c) in b.iter_mut().enumerate() {
                    *c = self.get(i, j, k).clone();
                }
            }
        }
        out
    }

    /// Averaged symmetrization of an arbitrary 3-index array.
    pub fn symmetrize(t: &[[[Expr; 2]; 2]; 2]) -> SymTensor3 {
        let avg = |ids: &[(usize, usize, usize)]| {
            let n = ids.len() as i64;
            Expr::add_many(ids.iter().map(|&(i, j, k)| t[i][j][k].clone()).collect()).scale(&q(1, n))
        };
        SymTensor3::new(
            t[0][0][0].clone(),
            avg(&[(0, 0, 1), (0, 1, 0), (1, 0, 0)]),
            avg(&[(0, 1, 1), (1, 0, 1), (1, 1, 0)]),
            t[1][1][1].clone(),
        )
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> SymTensor3 {
        SymTensor3::new(f(&self.t111), f(&self.t112), f(&self.t122), f(&self.t222))
    }

    pub fn add(&self, o: &SymTensor3) -> SymTensor3 {
        SymTensor3::new(&self.t111 + &o.t111, &self.t112 + &o.t112, &self.t122 + &o.t122, &self.t222 + &o.t222)
    }

    pub fn sub(&self, o: &SymTensor3) -> SymTensor3 {
        SymTensor3::new(&self.t111 - &o.t111, &self.t112 - &o.t112, &self.t122 - &o.t122, &self.t222 - &o.t222)
    }

    pub fn components(&self) -> [&Expr; 4] {
        [&self.t111, &self.t112, &self.t122, &self.t222]
    }

    pub fn is_zero_on(&self, domain: &Domain, cfg: &ZeroTestConfig) -> ZeroVerdict {
        self.components()
            .iter()
            .fold(ZeroVerdict::Zero, |acc, c| acc.and(is_zero(c, domain, cfg)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Codifferential {
    /// `a d/dz^3` on an isothermal chart.
    IsothermalComplex { a: CExpr },
    /// The real part `Re A` as a symmetric tensor in any Riemannian chart.
    GeneralReal(SymTensor3),
    /// `a1 d/dx^3` and `a2 d/dy^3` on a null chart.
    NullPair { a1: Expr, a2: Expr },
}

impl Codifferential {
    pub fn is_symbolic_zero(&self) -> bool {
        match self {
            Codifferential::IsothermalComplex { a } => a.is_symbolic_zero(),
            Codifferential::GeneralReal(t) => t.components().iter().all(|c| c.is_num_zero()),
            Codifferential::NullPair { a1, a2 } => a1.is_num_zero() && a2.is_num_zero(),
        }
    }
}

/// Names of the computed quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Inv {
    Phi0,
    Phi1,
    Phi2,
    Phi3,
    D0,
    D1,
    D2,
    D3,
    G0,
    G1,
    G2,
    G3,
    G2Det,
    G3Det,
    K1,
    K2,
    PhiS1,
    PhiS2,
    PhiS3,
    DS1,
    DS2,
    DS3,
    GS2,
    GS3,
    GS2Det,
    GS3Det,
    KS1,
    KS2,
    Dx,
    Dy,
    DSx,
    DSy,
}

impl Inv {
    pub const ALL: [Inv; 32] = [
        Inv::Phi0,
        Inv::Phi1,
        Inv::Phi2,
        Inv::Phi3,
        Inv::D0,
        Inv::D1,
        Inv::D2,
        Inv::D3,
        Inv::G0,
        Inv::G1,
        Inv::G2,
        Inv::G3,
        Inv::G2Det,
        Inv::G3Det,
        Inv::K1,
        Inv::K2,
        Inv::PhiS1,
        Inv::PhiS2,
        Inv::PhiS3,
        Inv::DS1,
        Inv::DS2,
        Inv::DS3,
        Inv::GS2,
        Inv::GS3,
        Inv::GS2Det,
        Inv::GS3Det,
        Inv::KS1,
        Inv::KS2,
        Inv::Dx,
        Inv::Dy,
        Inv::DSx,
        Inv::DSy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Inv::Phi0 => "phi0",
            Inv::Phi1 => "phi1",
            Inv::Phi2 => "phi2",
            Inv::Phi3 => "phi3",
            Inv::D0 => "D0",
            Inv::D1 => "D1",
            Inv::D2 => "D2",
            Inv::D3 => "D3",
            Inv::G0 => "G0",
            Inv::G1 => "G1",
            Inv::G2 => "G2",
            Inv::G3 => "G3",
            Inv::G2Det => "G2_det",
            Inv::G3Det => "G3_det",
            Inv::K1 => "K1",
            Inv::K2 => "K2",
            Inv::PhiS1 => "phi1*",
            Inv::PhiS2 => "phi2*",
            Inv::PhiS3 => "phi3*",
            Inv::DS1 => "D1*",
            Inv::DS2 => "D2*",
            Inv::DS3 => "D3*",
            Inv::GS2 => "G2*",
            Inv::GS3 => "G3*",
            Inv::GS2Det => "G2*_det",
            Inv::GS3Det => "G3*_det",
            Inv::KS1 => "K1*",
            Inv::KS2 => "K2*",
            Inv::Dx => "Dx",
            Inv::Dy => "Dy",
            Inv::DSx => "Dx*",
            Inv::DSy => "Dy*",
        }
    }

    pub fn formula(self) -> &'static str {
        match self {
            Inv::Phi0 => "R",
            Inv::Phi1 => "|grad phi0|^2 / 2",
            Inv::Phi2 => "{phi0, phi1}",
            Inv::Phi3 => "|grad phi1|^2 / 2",
            Inv::D0 => "{K, phi0} = 4 div div div Re A",
            Inv::D1 => "<grad D0, grad phi0> - 4 (div Re A)(dphi0, dphi0)",
            Inv::D2 => "{D0, phi1} + {phi0, D1}",
            Inv::D3 => "<grad D1, grad phi1> - 4 (div Re A)(dphi1, dphi1)",
            Inv::G0 => "{phi1,phi2} D3 + {phi2,phi3} D1 + {phi3,phi1} D2",
            Inv::G1 => "{phi0,phi2} D3 + {phi2,phi3} D0 + {phi3,phi0} D2",
            Inv::G2 => "{phi0,phi1} D3 + {phi1,phi3} D0 + {phi3,phi0} D1",
            Inv::G3 => "{phi0,phi1} D2 + {phi1,phi2} D0 + {phi2,phi0} D1",
            Inv::G2Det => "det(dphi0 D0; dphi1 D1; dphi3 D3) / omega_xy",
            Inv::G3Det => "det(dphi0 D0; dphi1 D1; dphi2 D2) / omega_xy",
            Inv::K1 => "(phi0_x D1 - D0 phi1_x) / phi2",
            Inv::K2 => "(phi0_y D1 - D0 phi1_y) / phi2",
            Inv::PhiS1 => "Laplacian R",
            Inv::PhiS2 => "{phi0, phi1*}",
            Inv::PhiS3 => "|grad phi1*|^2 / 2",
            Inv::DS1 => "{K, phi1*} = Laplacian D0 - 2 Re((A;z R;z);z)",
            Inv::DS2 => "{D0, phi1*} + {phi0, D1*}",
            Inv::DS3 => "<grad D1*, grad phi1*> - 4 (div Re A)(dphi1*, dphi1*)",
            Inv::GS2 => "{phi0,phi1*} D3* + {phi1*,phi3*} D0 + {phi3*,phi0} D1*",
            Inv::GS3 => "{phi0,phi1*} D2* + {phi1*,phi2*} D0 + {phi2*,phi0} D1*",
            Inv::GS2Det => "det(dphi0 D0; dphi1* D1*; dphi3* D3*) / omega_xy",
            Inv::GS3Det => "det(dphi0 D0; dphi1* D1*; dphi2* D2*) / omega_xy",
            Inv::KS1 => "(phi0_x D1* - D0 phi1*_x) / phi2*",
            Inv::KS2 => "(phi0_y D1* - D0 phi1*_y) / phi2*",
            Inv::Dx => "phi0_x D1 - phi1_x D0",
            Inv::Dy => "phi0_y D1 - phi1_y D0",
            Inv::DSx => "phi0_x D1* - phi1*_x D0",
            Inv::DSy => "phi0_y D1* - phi1*_y D0",
        }
    }
}

impl fmt::Display for Inv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An invariant with the highest derivative order of the input data it uses.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantity {
    pub expr: Expr,
    pub order: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Route {
    Complex,
    Index,
    Null,
}

/// Lazily computed, memoized invariants of one `(g, A)` pair.
pub struct Invariants {
    metric: Metric,
    codiff: Codifferential,
    work: Metric,
    route: Route,
    cap: u32,
    inv: Mat2,
    gamma: Christoffel,
    omega: Expr,
    mu: Expr,
    memo: Mutex<HashMap<Inv, Quantity>>,
    cache: Mutex<Cache>,
}

#[derive(Default)]
struct Cache {
    a_z: Option<CExpr>,
    div_a: Option<Mat2>,
    s: Option<Mat2>,
}

type R<T> = Result<T, InvariantError>;

impl Invariants {
    pub fn new(g: &Metric, a: &Codifferential) -> R<Invariants> {
        let (work, route) = match (g, a) {
            (Metric::Isothermal { .. }, Codifferential::IsothermalComplex { .. }) => (g.clone(), Route::Complex),
            (Metric::Isothermal { .. } | Metric::General { .. }, Codifferential::GeneralReal(_)) => {
                (g.to_general()?, Route::Index)
            }
            (Metric::Null { .. }, Codifferential::NullPair { .. }) => (g.clone(), Route::Null),
            _ => return Err(InvariantError::ChartMismatch),
        };
        let inv = work.inverse();
        let gamma = crate::geometry::christoffel(&work.components(), &inv);
        Ok(Invariants {
            metric: g.clone(),
            codiff: a.clone(),
            omega: work.omega(),
            mu: work.volume(),
            work,
            route,
            cap: ORDER_CAP,
            inv,
            gamma,
            memo: Mutex::new(HashMap::new()),
            cache: Mutex::new(Cache::default()),
        })
    }

    pub fn with_order_cap(mut self, cap: u32) -> Invariants {
        self.cap = cap;
        self
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn codifferential(&self) -> &Codifferential {
        &self.codiff
    }

    /// Holomorphicity (resp. quasi-holomorphicity) of the codifferential.
    pub fn check_holomorphic(&self, domain: &Domain, cfg: &ZeroTestConfig) -> ZeroVerdict {
        match &self.codiff {
            Codifferential::IsothermalComplex { a } => crate::cnum::is_holomorphic(a, domain, cfg),
            Codifferential::GeneralReal(t) => tensorcoords::holo_residual(t, &self.work)
                .map(|r| r.is_zero_on(domain, cfg))
                .unwrap_or_else(|e| ZeroVerdict::Unknown(e.to_string())),
            Codifferential::NullPair { a1, a2 } => is_zero(&a1.dy(), domain, cfg).and(is_zero(&a2.dx(), domain, cfg)),
        }
    }

    /// Like [`check_holomorphic`](Self::check_holomorphic) but as an error.
    pub fn require_holomorphic(&self, domain: &Domain, cfg: &ZeroTestConfig) -> R<()> {
        match self.check_holomorphic(domain, cfg) {
            ZeroVerdict::Zero => Ok(()),
            ZeroVerdict::NonZero { x, y, value } => Err(InvariantError::HolomorphicityViolated { x, y, value }),
            ZeroVerdict::Unknown(r) => Err(InvariantError::HolomorphicityUnknown(r)),
        }
    }

    pub fn get(&self, which: Inv) -> R<Quantity> {
        if let Some(q) = self.memo.lock().unwrap().get(&which) {
            return Ok(q.clone());
        }
        let q = self.compute(which)?;
        if q.order > self.cap {
            return Err(InvariantError::OrderCapExceeded {
                name: which.name(),
                order: q.order,
                cap: self.cap,
            });
        }
        self.memo.lock().unwrap().insert(which, q.clone());
        Ok(q)
    }

    pub fn expr(&self, which: Inv) -> R<Expr> {
        Ok(self.get(which)?.expr)
    }

    fn e(&self, which: Inv) -> R<(Expr, u32)> {
        let q = self.get(which)?;
        Ok((q.expr, q.order))
    }

    // --- metric operations on the cached inverse and area form

    pub fn bracket(&self, f: &Expr, h: &Expr) -> Expr {
        (f.dx() * h.dy() - f.dy() * h.dx()) / &self.omega
    }

    pub fn inner(&self, f: &Expr, h: &Expr) -> Expr {
        let df = [f.dx(), f.dy()];
        let dh = [h.dx(), h.dy()];
        let mut t = Vec::new();
        for i in 0..2 {
            for j in 0..2 {
                if !self.inv[i][j].is_num_zero() {
                    t.push(&self.inv[i][j] * &df[i] * &dh[j]);
                }
            }
        }
        Expr::add_many(t)
    }

    fn half_square(&self, f: &Expr) -> Expr {
        self.inner(f, f).scale(&q(1, 2))
    }

    pub fn laplacian(&self, f: &Expr) -> Expr {
        match &self.work {
            Metric::Isothermal { .. } | Metric::Null { .. } => self.work.laplacian(f),
            Metric::General { .. } => {
                let df = [f.dx(), f.dy()];
                let v: Vec<Expr> = (0..2)
                    .map(|i| &self.mu * (&self.inv[i][0] * &df[0] + &self.inv[i][1] * &df[1]))
                    .collect();
                (v[0].dx() + v[1].dy()) / &self.mu
            }
        }
    }

    /// Divergence `(1/mu) d_a (mu v^a)` of a vector field.
    fn div_vec(&self, v: &[Expr; 2]) -> Expr {
        ((&self.mu * &v[0]).dx() + (&self.mu * &v[1]).dy()) / &self.mu
    }

    /// Poisson tensor `P^ij` with `{f, h} = P^ij f_i h_j`.
    fn poisson_tensor(&self) -> Mat2 {
        let w = self.omega.recip();
        [[Expr::zero(), w.clone()], [w.neg(), Expr::zero()]]
    }

    fn omega_lower(&self) -> Mat2 {
        [[Expr::zero(), self.omega.clone()], [self.omega.neg(), Expr::zero()]]
    }

    // --- codifferential data

    /// `A;z` as the coefficient of a weight (-2, 0) section (complex route).
    fn a_z(&self) -> R<CExpr> {
        if let Some(v) = &self.cache.lock().unwrap().a_z {
            return Ok(v.clone());
        }
        let Codifferential::IsothermalComplex { a } = &self.codiff else {
            return Err(InvariantError::ChartMismatch);
        };
        let s = nabla10(&Section::new(a.clone(), -3, 0, Chart::Complex), &self.work)?;
        self.cache.lock().unwrap().a_z = Some(s.coeff.clone());
        Ok(s.coeff)
    }

    /// `(div Re A)^{jk} = A^{ijk}_{;i}` (index route).
    pub fn div_a(&self) -> R<Mat2> {
        if let Some(v) = &self.cache.lock().unwrap().div_a {
            return Ok(v.clone());
        }
        let Codifferential::GeneralReal(t) = &self.codiff else {
            return Err(InvariantError::ChartMismatch);
        };
        let a = t.full();
        let g = &self.gamma;
        let mut out: Mat2 = Default::default();
        for j in 0..2 {
            for k in 0..2 {
                let mut terms = vec![self.div_vec(&[a[0][j][k].clone(), a[1][j][k].clone()])];
                for i in 0..2 {
                    for m in 0..2 {
                        terms.push(&g[j][i][m] * &a[i][m][k]);
                        terms.push(&g[k][i][m] * &a[i][j][m]);
                    }
                }
                out[j][k] = Expr::add_many(terms);
            }
        }
        self.cache.lock().unwrap().div_a = Some(out.clone());
        Ok(out)
    }

    /// Covariant trace-free Hessian `S_ij` that the principle equation assigns
    /// to `K`.
    pub fn s_tensor(&self) -> R<Mat2> {
        if let Some(v) = &self.cache.lock().unwrap().s {
            return Ok(v.clone());
        }
        let s = match (&self.codiff, &self.work) {
            (Codifferential::NullPair { a1, a2 }, Metric::Null { lambda }) => {
                let l2 = lambda * lambda;
                let a1x = a1.dx() + (a1 * lambda.dx() * 3) / lambda;
                let a2y = a2.dy() + (a2 * lambda.dy() * 3) / lambda;
                [[&l2 * a2y, Expr::zero()], [Expr::zero(), &l2 * a1x]]
            }
            (Codifferential::IsothermalComplex { .. }, Metric::Isothermal { lambda }) => {
                // K;zbar zbar = -(i/2) lambda^2 A;z
                let az = self.a_z()?;
                let l2 = lambda * lambda;
                let sxx = &l2 * &az.im;
                let sxy = (&l2 * &az.re).neg();
                [[sxx.clone(), sxy.clone()], [sxy, sxx.neg()]]
            }
            _ => {
                // S_ij = 4 g_k(i omega_j)l (div A)^kl
                let v = self.div_a()?;
                let gl = self.work.components();
                let w = self.omega_lower();
                let mut out: Mat2 = Default::default();
                for i in 0..2 {
                    for j in 0..2 {
                        let mut t = Vec::new();
                        for k in 0..2 {
                            for l in 0..2 {
                                t.push(&gl[k][i] * &w[j][l] * &v[k][l]);
                                t.push(&gl[k][j] * &w[i][l] * &v[k][l]);
                            }
                        }
                        out[i][j] = Expr::add_many(t) * 2;
                    }
                }
                out
            }
        };
        self.cache.lock().unwrap().s = Some(s.clone());
        Ok(s)
    }

    /// The quadratic term of `{K, |grad f|^2 / 2} = <grad {K,f}, grad f> - T(f)`.
    fn t_term(&self, f: &Expr) -> R<Expr> {
        if self.codiff.is_symbolic_zero() {
            return Ok(Expr::zero());
        }
        match self.route {
            Route::Complex => {
                let az = self.a_z()?;
                let fz = wirtinger_z(&CExpr::real(f.clone()));
                Ok((&az * &fz.square()).re * 4)
            }
            Route::Index => {
                let v = self.div_a()?;
                let df = [f.dx(), f.dy()];
                let mut t = Vec::new();
                for j in 0..2 {
                    for k in 0..2 {
                        t.push(&v[j][k] * &df[j] * &df[k]);
                    }
                }
                Ok(Expr::add_many(t) * 4)
            }
            Route::Null => self.t_term_s(f),
        }
    }

    /// The same quadratic term from `S`: `P^ki f_i S_kj f^j`.
    pub fn t_term_s(&self, f: &Expr) -> R<Expr> {
        let s = self.s_tensor()?;
        let p = self.poisson_tensor();
        let df = [f.dx(), f.dy()];
        let up: Vec<Expr> = (0..2).map(|j| &self.inv[j][0] * &df[0] + &self.inv[j][1] * &df[1]).collect();
        let mut t = Vec::new();
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    if !p[k][i].is_num_zero() && !s[k][j].is_num_zero() {
                        t.push(&p[k][i] * &df[i] * &s[k][j] * &up[j]);
                    }
                }
            }
        }
        Ok(Expr::add_many(t))
    }

    /// `D0 = {K, R}` from `S`: `d(div S) = dR ^ dK`.
    pub fn d0_from_s(&self) -> R<Expr> {
        let s = self.s_tensor()?;
        let g = &self.gamma;
        // (div S)_k = g^ab (d_b S_ka - G^c_bk S_ca - G^c_ba S_kc)
        let mut div = Vec::new();
        for k in 0..2 {
            let mut t = Vec::new();
            for a in 0..2 {
                for b in 0..2 {
                    if self.inv[a][b].is_num_zero() {
                        continue;
                    }
                    let mut inner = vec![if b == 0 { s[k][a].dx() } else { s[k][a].dy() }];
                    for c in 0..2 {
                        inner.push((&g[c][b][k] * &s[c][a]).neg());
                        inner.push((&g[c][b][a] * &s[k][c]).neg());
                    }
                    t.push(&self.inv[a][b] * Expr::add_many(inner));
                }
            }
            div.push(Expr::add_many(t));
        }
        let curl = div[1].dx() - div[0].dy();
        Ok((curl / &self.omega).neg())
    }

    /// The correction `2 Re((A;z f;z);z)` of `D1*`, in a general chart
    /// `(1/2) nabla^a (P^ki S_ka f_i)`.
    fn star_correction(&self, f: &Expr) -> R<Expr> {
        if self.codiff.is_symbolic_zero() {
            return Ok(Expr::zero());
        }
        if self.route == Route::Complex {
            // 2 Re((A;z f;z);z), weight (-1, 0) -> (0, 0)
            let az = self.a_z()?;
            let fz = wirtinger_z(&CExpr::real(f.clone()));
            let s = Section::new(&az * &fz, -1, 0, Chart::Complex);
            let d = nabla10(&s, &self.work)?;
            return Ok(d.coeff.re * 2);
        }
        let s = self.s_tensor()?;
        let p = self.poisson_tensor();
        let df = [f.dx(), f.dy()];
        // Y_a = P^ki S_ka f_i, raised with g^ab, then the divergence
        let ylow: Vec<Expr> = (0..2)
            .map(|a| {
                let mut t = Vec::new();
                for k in 0..2 {
                    for i in 0..2 {
                        if !p[k][i].is_num_zero() {
                            t.push(&p[k][i] * &s[k][a] * &df[i]);
                        }
                    }
                }
                Expr::add_many(t)
            })
            .collect();
        let yup = [
            &self.inv[0][0] * &ylow[0] + &self.inv[0][1] * &ylow[1],
            &self.inv[1][0] * &ylow[0] + &self.inv[1][1] * &ylow[1],
        ];
        Ok(self.div_vec(&yup).scale(&q(1, 2)))
    }

    fn compute_d0(&self) -> R<Expr> {
        if self.codiff.is_symbolic_zero() {
            return Ok(Expr::zero());
        }
        match self.route {
            Route::Complex => {
                let az = Section::new(self.a_z()?, -2, 0, Chart::Complex);
                let azz = nabla10(&az, &self.work)?;
                let azzz = nabla10(&azz, &self.work)?;
                Ok(azzz.coeff.re * 4)
            }
            Route::Index => {
                let v = self.div_a()?;
                let g = &self.gamma;
                let w: Vec<Expr> = (0..2)
                    .map(|k| {
                        let mut t = vec![self.div_vec(&[v[0][k].clone(), v[1][k].clone()])];
                        for j in 0..2 {
                            for a in 0..2 {
                                t.push(&g[k][j][a] * &v[j][a]);
                            }
                        }
                        Expr::add_many(t)
                    })
                    .collect();
                Ok(self.div_vec(&[w[0].clone(), w[1].clone()]) * 4)
            }
            Route::Null => self.d0_from_s(),
        }
    }

    fn jacobi(&self, a: &Expr, b: &Expr, c: &Expr, da: &Expr, db: &Expr, dc: &Expr) -> Expr {
        // {a,b} dc + {b,c} da + {c,a} db
        self.bracket(a, b) * dc + self.bracket(b, c) * da + self.bracket(c, a) * db
    }

    fn det_form(&self, rows: [(&Expr, &Expr); 3]) -> Expr {
        let d: Vec<[Expr; 3]> = rows.iter().map(|(f, dd)| [f.dx(), f.dy(), (*dd).clone()]).collect();
        let det = &d[0][0] * (&d[1][1] * &d[2][2] - &d[1][2] * &d[2][1])
            - &d[0][1] * (&d[1][0] * &d[2][2] - &d[1][2] * &d[2][0])
            + &d[0][2] * (&d[1][0] * &d[2][1] - &d[1][1] * &d[2][0]);
        det / &self.omega
    }

    fn compute(&self, which: Inv) -> R<Quantity> {
        use Inv::*;
        let mx = |xs: &[u32]| xs.iter().copied().max().unwrap_or(0);
        let (expr, order) = match which {
            Phi0 => (self.work.gauss_curvature(), 2),
            Phi1 => {
                let (r, o) = self.e(Phi0)?;
                (self.half_square(&r), o + 1)
            }
            Phi2 => {
                let ((r, o0), (f1, o1)) = (self.e(Phi0)?, self.e(Phi1)?);
                (self.bracket(&r, &f1), mx(&[o0, o1]) + 1)
            }
            Phi3 => {
                let (f1, o) = self.e(Phi1)?;
                (self.half_square(&f1), o + 1)
            }
            D0 => (self.compute_d0()?, 3),
            D1 => {
                let ((d0, od), (r, or)) = (self.e(D0)?, self.e(Phi0)?);
                (self.inner(&d0, &r) - self.t_term(&r)?, mx(&[od, or]) + 1)
            }
            D2 => {
                let (d0, o0) = self.e(D0)?;
                let (d1, o1) = self.e(D1)?;
                let (r, _) = self.e(Phi0)?;
                let (f1, of) = self.e(Phi1)?;
                (self.bracket(&d0, &f1) + self.bracket(&r, &d1), mx(&[o0, o1, of]) + 1)
            }
            D3 => {
                let ((d1, o1), (f1, of)) = (self.e(D1)?, self.e(Phi1)?);
                (self.inner(&d1, &f1) - self.t_term(&f1)?, mx(&[o1, of]) + 1)
            }
            G0 | G1 | G2 | G3 => {
                let f: Vec<(Expr, u32)> = [Phi0, Phi1, Phi2, Phi3].iter().map(|&k| self.e(k)).collect::<R<_>>()?;
                let d: Vec<(Expr, u32)> = [D0, D1, D2, D3].iter().map(|&k| self.e(k)).collect::<R<_>>()?;
                let (a, b, c) = match which {
                    G0 => (1, 2, 3),
                    G1 => (0, 2, 3),
                    G2 => (0, 1, 3),
                    _ => (0, 1, 2),
                };
                let e = self.jacobi(&f[a].0, &f[b].0, &f[c].0, &d[a].0, &d[b].0, &d[c].0);
                let o = mx(&[f[a].1 + 1, f[b].1 + 1, f[c].1 + 1, d[a].1, d[b].1, d[c].1]);
                (e, o)
            }
            G2Det | G3Det => {
                let k = if which == G2Det { (Phi3, D3) } else { (Phi2, D2) };
                let (r, o0) = self.e(Phi0)?;
                let (d0, _) = self.e(D0)?;
                let (f1, o1) = self.e(Phi1)?;
                let (d1, _) = self.e(D1)?;
                let (fk, ok) = self.e(k.0)?;
                let (dk, odk) = self.e(k.1)?;
                (self.det_form([(&r, &d0), (&f1, &d1), (&fk, &dk)]), mx(&[o0 + 1, o1 + 1, ok + 1, odk]))
            }
            K1 | K2 | KS1 | KS2 | Dx | Dy | DSx | DSy => {
                let star = matches!(which, KS1 | KS2 | DSx | DSy);
                let (f1k, d1k, f2k) = if star { (PhiS1, DS1, PhiS2) } else { (Phi1, D1, Phi2) };
                let (r, o0) = self.e(Phi0)?;
                let (d0, od0) = self.e(D0)?;
                let (f1, o1) = self.e(f1k)?;
                let (d1, od1) = self.e(d1k)?;
                let x = matches!(which, K1 | KS1 | Dx | DSx);
                let (dr, df1) = if x { (r.dx(), f1.dx()) } else { (r.dy(), f1.dy()) };
                let num = &dr * &d1 - &d0 * &df1;
                let o = mx(&[o0 + 1, o1 + 1, od0, od1]);
                if matches!(which, K1 | K2 | KS1 | KS2) {
                    let (f2, o2) = self.e(f2k)?;
                    (num / f2, mx(&[o, o2]))
                } else {
                    (num, o)
                }
            }
            PhiS1 => {
                let (r, o) = self.e(Phi0)?;
                (self.laplacian(&r), o + 2)
            }
            PhiS2 => {
                let ((r, o0), (f, o1)) = (self.e(Phi0)?, self.e(PhiS1)?);
                (self.bracket(&r, &f), mx(&[o0, o1]) + 1)
            }
            PhiS3 => {
                let (f, o) = self.e(PhiS1)?;
                (self.half_square(&f), o + 1)
            }
            DS1 => {
                let ((d0, od), (r, or)) = (self.e(D0)?, self.e(Phi0)?);
                (self.laplacian(&d0) - self.star_correction(&r)?, mx(&[od + 2, or + 1]))
            }
            DS2 => {
                let (d0, o0) = self.e(D0)?;
                let (d1, o1) = self.e(DS1)?;
                let (r, _) = self.e(Phi0)?;
                let (f1, of) = self.e(PhiS1)?;
                (self.bracket(&d0, &f1) + self.bracket(&r, &d1), mx(&[o0, o1, of]) + 1)
            }
            DS3 => {
                let ((d1, o1), (f1, of)) = (self.e(DS1)?, self.e(PhiS1)?);
                (self.inner(&d1, &f1) - self.t_term(&f1)?, mx(&[o1, of]) + 1)
            }
            GS2 | GS3 => {
                let f: Vec<(Expr, u32)> = [Phi0, PhiS1, PhiS2, PhiS3].iter().map(|&k| self.e(k)).collect::<R<_>>()?;
                let d: Vec<(Expr, u32)> = [D0, DS1, DS2, DS3].iter().map(|&k| self.e(k)).collect::<R<_>>()?;
                let c = if which == GS2 { 3 } else { 2 };
                let e = self.jacobi(&f[0].0, &f[1].0, &f[c].0, &d[0].0, &d[1].0, &d[c].0);
                (e, mx(&[f[0].1 + 1, f[1].1 + 1, f[c].1 + 1, d[0].1, d[1].1, d[c].1]))
            }
            GS2Det | GS3Det => {
                let k = if which == GS2Det { (PhiS3, DS3) } else { (PhiS2, DS2) };
                let (r, o0) = self.e(Phi0)?;
                let (d0, _) = self.e(D0)?;
                let (f1, o1) = self.e(PhiS1)?;
                let (d1, _) = self.e(DS1)?;
                let (fk, ok) = self.e(k.0)?;
                let (dk, odk) = self.e(k.1)?;
                (self.det_form([(&r, &d0), (&f1, &d1), (&fk, &dk)]), mx(&[o0 + 1, o1 + 1, ok + 1, odk]))
            }
        };
        Ok(Quantity { expr, order })
    }

    /// `[K1, K2]` after certifying that `phi2` (or `phi2*`) is non-vanishing on
    /// the sampled domain.
    pub fn kay(&self, star: bool, domain: &Domain, cfg: &ZeroTestConfig) -> R<[Expr; 2]> {
        let den = self.expr(if star { Inv::PhiS2 } else { Inv::Phi2 })?;
        match is_zero(&den, domain, cfg) {
            ZeroVerdict::NonZero { .. } => {}
            v => return Err(InvariantError::DegenerateBracket(v)),
        }
        let (a, b) = if star { (Inv::KS1, Inv::KS2) } else { (Inv::K1, Inv::K2) };
        Ok([self.expr(a)?, self.expr(b)?])
    }

    /// `Re A` in the chart of the metric.
    pub fn a_hat(&self) -> SymTensor3 {
        match &self.codiff {
            Codifferential::IsothermalComplex { a } => SymTensor3::from_section(a),
            Codifferential::GeneralReal(t) => t.clone(),
            Codifferential::NullPair { a1, a2 } => SymTensor3::new(a1.clone(), Expr::zero(), Expr::zero(), a2.neg()),
        }
    }

    /// `B^ijk` built from a covector `K_i`: `(1/8) g^(ij g^k)l J^m_l K_m` in a
    /// Riemannian chart, `B1 = -K_y/lambda^2, B2 = K_x/lambda^2` in a null chart.
    pub fn b_hat(&self, kay: &[Expr; 2]) -> R<SymTensor3> {
        if let Metric::Null { lambda } = &self.work {
            let l2 = lambda * lambda;
            let b1 = (&kay[1] / &l2).neg();
            let b2 = &kay[0] / &l2;
            return Ok(SymTensor3::new(Expr::zero(), b1.scale(&q(1, 3)), b2.scale(&q(1, 3)), Expr::zero()));
        }
        let j = self.work.complex_structure()?;
        // w^k = g^kl J^m_l K_m
        let jk: Vec<Expr> = (0..2).map(|l| &j[0][l] * &kay[0] + &j[1][l] * &kay[1]).collect();
        let w: Vec<Expr> = (0..2).map(|k| &self.inv[k][0] * &jk[0] + &self.inv[k][1] * &jk[1]).collect();
        let mut t: [[[Expr; 2]; 2]; 2] = Default::default();
        for (a, ta) in t.iter_mut().enumerate() {
            for (b, tb) in ta.iter_mut().enumerate() {
                for (c, tc) in tb.iter_mut().enumerate() {
                    *tc = (&self.inv[a][b] * &w[c]).scale(&q(1, 8));
                }
            }
        }
        Ok(SymTensor3::symmetrize(&t))
    }

    /// `F = Re A + B(K)`.
    pub fn f_tensor(&self, kay: &[Expr; 2]) -> R<SymTensor3> {
        Ok(self.a_hat().add(&self.b_hat(kay)?))
    }

    pub fn phi_family(&self) -> R<[Expr; 4]> {
        Ok([self.expr(Inv::Phi0)?, self.expr(Inv::Phi1)?, self.expr(Inv::Phi2)?, self.expr(Inv::Phi3)?])
    }

    pub fn dee_family(&self) -> R<[Expr; 4]> {
        Ok([self.expr(Inv::D0)?, self.expr(Inv::D1)?, self.expr(Inv::D2)?, self.expr(Inv::D3)?])
    }

    pub fn gee_family(&self) -> R<[Expr; 4]> {
        Ok([self.expr(Inv::G0)?, self.expr(Inv::G1)?, self.expr(Inv::G2)?, self.expr(Inv::G3)?])
    }

    pub fn dforms(&self) -> R<[Expr; 4]> {
        Ok([self.expr(Inv::Dx)?, self.expr(Inv::Dy)?, self.expr(Inv::DSx)?, self.expr(Inv::DSy)?])
    }

    /// Every invariant; `K` and `K*` are left out when their denominator is
    /// not certified non-vanishing.
    pub fn report(&self, domain: &Domain, cfg: &ZeroTestConfig) -> R<InvariantReport> {
        let mut entries = Vec::new();
        for which in Inv::ALL {
            let guarded = match which {
                Inv::K1 | Inv::K2 => Some(Inv::Phi2),
                Inv::KS1 | Inv::KS2 => Some(Inv::PhiS2),
                _ => None,
            };
            if let Some(den) = guarded {
                let v = is_zero(&self.expr(den)?, domain, cfg);
                if !v.is_nonzero() {
                    entries.push(ReportEntry {
                        which,
                        quantity: None,
                        note: Some(format!("{den} is not non-vanishing on the sampled domain ({v})")),
                    });
                    continue;
                }
            }
            entries.push(ReportEntry {
                which,
                quantity: Some(self.get(which)?),
                note: None,
            });
        }
        Ok(InvariantReport { entries })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportEntry {
    pub which: Inv,
    pub quantity: Option<Quantity>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantReport {
    pub entries: Vec<ReportEntry>,
}

impl InvariantReport {
    pub fn get(&self, which: Inv) -> Option<&Expr> {
        self.entries
            .iter()
            .find(|e| e.which == which)
            .and_then(|e| e.quantity.as_ref().map(|q| &q.expr))
    }
}

pub fn phi_family(g: &Metric) -> [Expr; 4] {
    let inv = Invariants::new(g, &zero_codifferential(g)).expect("zero codifferential fits every chart");
    inv.phi_family().expect("phi family stays below the order cap")
}

pub fn dee_family(g: &Metric, a: &Codifferential) -> R<[Expr; 4]> {
    Invariants::new(g, a)?.dee_family()
}

pub fn star_family(g: &Metric, a: &Codifferential) -> R<Vec<(Inv, Expr)>> {
    let inv = Invariants::new(g, a)?;
    use Inv::*;
    [PhiS1, PhiS2, PhiS3, DS1, DS2, DS3, GS2, GS3, KS1, KS2]
        .iter()
        .map(|&k| Ok((k, inv.expr(k)?)))
        .collect()
}

/// The codifferential `A = 0` in the representation matching the chart.
pub fn zero_codifferential(g: &Metric) -> Codifferential {
    match g {
        Metric::Isothermal { .. } => Codifferential::IsothermalComplex { a: CExpr::zero() },
        Metric::General { .. } => Codifferential::GeneralReal(SymTensor3::zero()),
        Metric::Null { .. } => Codifferential::NullPair {
            a1: Expr::zero(),
            a2: Expr::zero(),
        },
    }
}
