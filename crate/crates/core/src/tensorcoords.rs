//! Coordinate-free handling of cubic tensors on a Riemannian surface: the
//! type decomposition `F = A + B`, the imaginary part of `A`, the
//! holomorphicity residual and the tensor form of the principle equation.

use num_rational::BigRational;

use crate::expr::{is_zero, Domain, Expr, ZeroTestConfig, ZeroVerdict};
use crate::geometry::{christoffel, GeometryError, Mat2, Metric};
use crate::invariants::{Codifferential, Invariants, SymTensor3};

type Full3 = [[[Expr; 2]; 2]; 2];
type Full4 = [[[[Expr; 2]; 2]; 2]; 2];

/// Symmetric contravariant 4-tensor, `c[n]` is the component with `n` indices equal to 2.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SymTensor4 {
    pub c: [Expr; 5],
}

impl SymTensor4 {
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> &Expr {
        &self.c[i + j + k + l]
    }

    /// Averaged symmetrization of an arbitrary 4-index array.
    pub fn symmetrize(t: &Full4) -> SymTensor4 {
        let mut sums: [Vec<Expr>; 5] = Default::default();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        sums[i + j + k + l].push(t[i][j][k][l].clone());
                    }
                }
            }
        }
        let c = sums.map(|v| {
            let n = v.len() as i64;
            Expr::add_many(v).scale(&BigRational::new(1.into(), n.into()))
        });
        SymTensor4 { c }
    }

    pub fn full(&self) -> Full4 {
        let mut out: Full4 = Default::default();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        out[i][j][k][l] = self.get(i, j, k, l).clone();
                    }
                }
            }
        }
        out
    }

    pub fn is_zero_on(&self, domain: &Domain, cfg: &ZeroTestConfig) -> ZeroVerdict {
        self.c.iter().fold(ZeroVerdict::Zero, |acc, e| acc.and(is_zero(e, domain, cfg)))
    }
}

fn rotate_pair(t: &Full3, j: &Mat2, slots: (usize, usize)) -> Full3 {
    // apply J^a_i to two of the three contravariant slots
    let mut out: Full3 = Default::default();
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                let mut terms = Vec::new();
                for i in 0..2 {
                    for k in 0..2 {
                        let idx = {
                            let mut v = [a, b, c];
                            v[slots.0] = i;
                            v[slots.1] = k;
                            v
                        };
                        let outer = [a, b, c];
                        let f = &j[outer[slots.0]][i] * &j[outer[slots.1]][k];
                        terms.push(f * &t[idx[0]][idx[1]][idx[2]]);
                    }
                }
                out[a][b][c] = Expr::add_many(terms);
            }
        }
    }
    out
}

/// `(A, B)` with `A = (F - F(J,J,.) - F(J,.,J) - F(.,J,J)) / 4` and `B = F - A`.
pub fn split_ab(f: &SymTensor3, g: &Metric) -> Result<(SymTensor3, SymTensor3), GeometryError> {
    let j = g.complex_structure()?;
    let t = f.full();
    let rots = [(0, 1), (0, 2), (1, 2)].map(|s| rotate_pair(&t, &j, s));
    let mut out: Full3 = Default::default();
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                let r = Expr::add_many(rots.iter().map(|r| r[a][b][c].clone()).collect());
                out[a][b][c] = (&t[a][b][c] - r).scale(&BigRational::new(1.into(), 4.into()));
            }
        }
    }
    let a = SymTensor3::symmetrize(&out);
    let b = f.sub(&a);
    Ok((a, b))
}

/// `Im A` from `Re A`: `J` applied to each slot in turn, averaged.
pub fn imag_part(a: &SymTensor3, g: &Metric) -> Result<SymTensor3, GeometryError> {
    let j = g.complex_structure()?;
    let t = a.full();
    let mut out: Full3 = Default::default();
    for p in 0..2 {
        for q in 0..2 {
            for r in 0..2 {
                let mut terms = Vec::new();
                for l in 0..2 {
                    terms.push(&j[p][l] * &t[l][q][r]);
                    terms.push(&j[q][l] * &t[p][l][r]);
                    terms.push(&j[r][l] * &t[p][q][l]);
                }
                out[p][q][r] = Expr::add_many(terms).scale(&BigRational::new(1.into(), 3.into()));
            }
        }
    }
    Ok(SymTensor3::symmetrize(&out))
}

/// `A^(ijk;l) + J J J J A^(ijk;l)`, the index `l` raised with the metric.
pub fn holo_residual(a: &SymTensor3, g: &Metric) -> Result<SymTensor4, GeometryError> {
    let g = g.to_general()?;
    let j = g.complex_structure()?;
    let gi = g.inverse();
    let gam = christoffel(&g.components(), &gi);
    let t = a.full();
    // covariant derivative A^{ijk}_{;m}
    let mut cov: Full4 = Default::default();
    for i in 0..2 {
        for jj in 0..2 {
            for k in 0..2 {
                for m in 0..2 {
                    let d = if m == 0 { t[i][jj][k].dx() } else { t[i][jj][k].dy() };
                    let mut terms = vec![d];
                    for s in 0..2 {
                        terms.push(&gam[i][m][s] * &t[s][jj][k]);
                        terms.push(&gam[jj][m][s] * &t[i][s][k]);
                        terms.push(&gam[k][m][s] * &t[i][jj][s]);
                    }
                    cov[i][jj][k][m] = Expr::add_many(terms);
                }
            }
        }
    }
    let mut up: Full4 = Default::default();
    for i in 0..2 {
        for jj in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    up[i][jj][k][l] = &gi[l][0] * &cov[i][jj][k][0] + &gi[l][1] * &cov[i][jj][k][1];
                }
            }
        }
    }
    let s = SymTensor4::symmetrize(&up).full();
    let mut out: Full4 = Default::default();
    for p in 0..2 {
        for q in 0..2 {
            for r in 0..2 {
                for u in 0..2 {
                    let mut terms = vec![s[p][q][r][u].clone()];
                    for a1 in 0..2 {
                        for b1 in 0..2 {
                            for c1 in 0..2 {
                                for d1 in 0..2 {
                                    let f = &j[p][a1] * &j[q][b1] * &j[r][c1] * &j[u][d1];
                                    terms.push(f * &s[a1][b1][c1][d1]);
                                }
                            }
                        }
                    }
                    out[p][q][r][u] = Expr::add_many(terms);
                }
            }
        }
    }
    Ok(SymTensor4::symmetrize(&out))
}

/// Residual `E_ij = (1/2) K_;kl (d^k_i d^l_j - J^k_i J^l_j) - 4 g_k(i omega_j)l (div A)^kl`
/// of the principle equation.
pub fn principle_residual(k: &Expr, a: &SymTensor3, g: &Metric) -> Result<Mat2, GeometryError> {
    let gen = g.to_general()?;
    let j = gen.complex_structure()?;
    let gam = gen.christoffel();
    let dk = [k.dx(), k.dy()];
    let mut hess: Mat2 = Default::default();
    for p in 0..2 {
        for q in 0..2 {
            let d = if q == 0 { dk[p].dx() } else { dk[p].dy() };
            hess[p][q] = d - &gam[0][p][q] * &dk[0] - &gam[1][p][q] * &dk[1];
        }
    }
    let inv = Invariants::new(&gen, &Codifferential::GeneralReal(a.clone())).map_err(|_| GeometryError::ChartMismatch)?;
    let s = inv.s_tensor().map_err(|_| GeometryError::ChartMismatch)?;
    let mut out: Mat2 = Default::default();
    for p in 0..2 {
        for q in 0..2 {
            let mut jj = Vec::new();
            for a1 in 0..2 {
                for b1 in 0..2 {
                    jj.push(&j[a1][p] * &j[b1][q] * &hess[a1][b1]);
                }
            }
            let tf = (&hess[p][q] - Expr::add_many(jj)).scale(&BigRational::new(1.into(), 2.into()));
            out[p][q] = tf - &s[p][q];
        }
    }
    Ok(out)
}
