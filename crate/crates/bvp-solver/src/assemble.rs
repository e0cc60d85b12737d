use cell_solver::{Coefficients, EffectiveOperator};
use periodic_core::linalg::{cmat_serde, hermitian_part};
use periodic_core::{cell_mean, CMat, GridFunction, SymbolB, C64};
use serde::{Deserialize, Serialize};

use crate::linear::BandLu;
use crate::mesh::{steps, DomainMesh};
use crate::quadrature::{gradient_at_points, ElementRule, QuadratureField};
use crate::stencil::StencilMatrix;
use crate::{BvpError, Result};

/// Smallest admissible `ε/h`.
pub const MIN_RATIO: f64 = 16.0;

/// Above this many band operations the coercivity test of a freshly
/// assembled system is skipped.
const COERCIVITY_CHECK_COST: f64 = 2e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKind {
    Oscillating,
    Effective,
    BoundaryLayer,
}

/// Coefficients of the form at one point.
#[derive(Debug, Clone)]
pub struct PointCoefficients {
    pub g: CMat,
    pub a: Vec<CMat>,
    pub q: CMat,
    pub q0: CMat,
}

/// Representative constant coefficients used by the preconditioner.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReferenceCoefficients {
    /// `b_j* g b_j` per axis.
    #[serde(with = "cmat_serde::vec")]
    pub gbb: Vec<CMat>,
    /// Hermitian part of `Q + λQ₀`.
    #[serde(with = "cmat_serde")]
    pub q: CMat,
    #[serde(with = "cmat_serde")]
    pub q0: CMat,
}

/// Stiffness and `Q₀`-mass of one Dirichlet problem on interior nodes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscreteSystem {
    pub kind: OperatorKind,
    pub epsilon: Option<f64>,
    pub lambda_shift: f64,
    pub mesh: DomainMesh,
    pub matrix: StencilMatrix,
    pub reference: ReferenceCoefficients,
}

impl DiscreteSystem {
    pub fn ncomp(&self) -> usize {
        self.matrix.ncomp
    }

    pub fn unknowns(&self) -> usize {
        self.matrix.row_count() * self.ncomp()
    }

    /// `u*Ku` for a full-node vector.
    pub fn stiffness_form(&self, u: &[C64]) -> C64 {
        self.form(u, C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    }

    /// `u*Mu` for a full-node vector.
    pub fn mass_form(&self, u: &[C64]) -> C64 {
        self.form(u, C64::new(0.0, 0.0), C64::new(1.0, 0.0))
    }

    fn form(&self, u: &[C64], ck: C64, cm: C64) -> C64 {
        let mut y = vec![C64::new(0.0, 0.0); u.len()];
        self.matrix.apply_combination(ck, cm, u, &mut y);
        u.iter().zip(&y).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Point-wise coefficients of a form `b[u, u]`.
trait Source {
    fn eval(&self, x: &[f64]) -> PointCoefficients;
}

struct Oscillating<'a> {
    c: &'a Coefficients,
    eps: f64,
}

impl Source for Oscillating<'_> {
    fn eval(&self, x: &[f64]) -> PointCoefficients {
        let y: Vec<f64> = x.iter().map(|t| t / self.eps).collect();
        PointCoefficients {
            g: hermitian_part(&self.c.g.eval_cell(&y)),
            a: self.c.a.iter().map(|f| f.eval_cell(&y)).collect(),
            q: hermitian_part(&self.c.q.eval_cell(&y)),
            q0: hermitian_part(&self.c.q0.eval_cell(&y)),
        }
    }
}

struct Constant(PointCoefficients);

impl Source for Constant {
    fn eval(&self, _: &[f64]) -> PointCoefficients {
        self.0.clone()
    }
}

/// Element matrices `[(a·n + r)·(2^d n) + b·n + c]` for test node `a`,
/// trial node `b`.
fn element_matrices(
    src: &dyn Source,
    b: &SymbolB,
    lambda: f64,
    rule: &ElementRule,
    corner: &[f64],
) -> (Vec<C64>, Vec<C64>) {
    let (d, n) = (b.d(), b.n());
    let na = rule.nodes();
    let size = na * n;
    let mut kl = vec![C64::new(0.0, 0.0); size * size];
    let mut ml = vec![C64::new(0.0, 0.0); size * size];
    let bj: Vec<CMat> = (0..d).map(|j| b.b_matrices[j].clone()).collect();
    let im = C64::new(0.0, 1.0);
    for q in 0..na {
        let c = src.eval(&rule.point(corner, q));
        let w = C64::new(rule.weight, 0.0);
        // G[j][l] = b_l* g b_j
        let gjl: Vec<Vec<CMat>> = (0..d)
            .map(|j| (0..d).map(|l| bj[l].adjoint() * &c.g * &bj[j]).collect())
            .collect();
        let a_adj: Vec<CMat> = c.a.iter().map(|m| m.adjoint()).collect();
        let pot = &c.q + &c.q0 * C64::new(lambda, 0.0);
        let phi = &rule.values[q];
        let grad = &rule.gradients[q];
        for a in 0..na {
            for bb in 0..na {
                let pp = phi[a] * phi[bb];
                for r in 0..n {
                    for cc in 0..n {
                        let mut v = pot[(r, cc)] * pp;
                        for j in 0..d {
                            for l in 0..d {
                                v += gjl[j][l][(r, cc)] * (grad[bb][j] * grad[a][l]);
                            }
                            v += -im * c.a[j][(r, cc)] * (grad[bb][j] * phi[a]);
                            v += im * a_adj[j][(r, cc)] * (grad[a][j] * phi[bb]);
                        }
                        let idx = (a * n + r) * size + bb * n + cc;
                        kl[idx] += w * v;
                        ml[idx] += w * c.q0[(r, cc)] * pp;
                    }
                }
            }
        }
    }
    (kl, ml)
}

fn assemble(
    mesh: &DomainMesh,
    src: &dyn Source,
    b: &SymbolB,
    lambda: f64,
    period_cells: Option<usize>,
) -> StencilMatrix {
    let d = mesh.d();
    let n = b.n();
    let rule = ElementRule::new(d, mesh.h());
    let na = rule.nodes();
    let size = na * n;
    let mut mat = StencilMatrix::new(&mesh.grid.dims, n);
    // element matrices repeat with the period when the mesh is aligned with it
    let offsets: Option<Vec<i64>> = mesh
        .grid
        .lower
        .iter()
        .map(|&lo| {
            let t = lo / mesh.h();
            ((t - t.round()).abs() <= 1e-9 * t.abs().max(1.0)).then_some(t.round() as i64)
        })
        .collect();
    let r = period_cells.unwrap_or(1) as i64;
    let cached = period_cells.is_none() || offsets.is_some();
    let mut cache: Vec<Option<(Vec<C64>, Vec<C64>)>> = vec![None; if cached { r.pow(d as u32) as usize } else { 0 }];
    let mut kb = vec![C64::new(0.0, 0.0); n * n];
    let mut mb = vec![C64::new(0.0, 0.0); n * n];
    let mut scratch: (Vec<C64>, Vec<C64>);
    for e in 0..mesh.element_count() {
        let idx = mesh.element_index(e);
        let class = match (&offsets, period_cells) {
            (_, None) => Some(0),
            (Some(off), Some(_)) => Some(
                idx.iter()
                    .zip(off)
                    .rev()
                    .fold(0i64, |acc, (&i, &o)| acc * r + (i as i64 + o).rem_euclid(r)) as usize,
            ),
            (None, Some(_)) => None,
        };
        let corner = mesh.element_corner(e);
        let (kl, ml) = match class {
            Some(cl) => {
                if cache[cl].is_none() {
                    cache[cl] = Some(element_matrices(src, b, lambda, &rule, &corner));
                }
                let (k, m) = cache[cl].as_ref().unwrap();
                (k, m)
            }
            None => {
                scratch = element_matrices(src, b, lambda, &rule, &corner);
                (&scratch.0, &scratch.1)
            }
        };
        let nodes = mesh.element_nodes(e);
        for (a, &node_a) in nodes.iter().enumerate() {
            if mat.row_of(node_a).is_none() {
                continue;
            }
            for (bb, &node_b) in nodes.iter().enumerate() {
                for rr in 0..n {
                    for cc in 0..n {
                        let i = (a * n + rr) * size + bb * n + cc;
                        kb[rr * n + cc] = kl[i];
                        mb[rr * n + cc] = ml[i];
                    }
                }
                mat.add_block(node_a, node_b, &kb, &mb);
            }
        }
    }
    mat
}

fn check_coercive(mat: &StencilMatrix) -> Result<()> {
    let (kl, entries) = mat.band_entries(C64::new(-1e-10, 0.0));
    let unknowns = mat.row_count() * mat.ncomp;
    if unknowns as f64 * (kl * kl) as f64 > COERCIVITY_CHECK_COST {
        return Ok(());
    }
    let lu = BandLu::factor(unknowns, kl, &entries, false).map_err(|_| BvpError::NotCoercive)?;
    if lu.pivots().iter().any(|p| p.re <= 0.0) {
        return Err(BvpError::NotCoercive);
    }
    Ok(())
}

fn reference(b: &SymbolB, g: &CMat, q: &CMat, q0: &CMat, lambda: f64) -> ReferenceCoefficients {
    ReferenceCoefficients {
        gbb: (0..b.d()).map(|j| hermitian_part(&(b.b_matrices[j].adjoint() * g * &b.b_matrices[j]))).collect(),
        q: hermitian_part(&(q + q0 * C64::new(lambda, 0.0))),
        q0: hermitian_part(q0),
    }
}

/// Galerkin matrices of `b_{D,ε}[u, u] − ζ(Q₀^ε u, u)` with multilinear
/// elements and `2^d`-point Gauss quadrature.
pub fn assemble_oscillating(mesh: &DomainMesh, coeffs: &Coefficients, epsilon: f64, lambda_shift: f64) -> Result<DiscreteSystem> {
    if coeffs.d() != mesh.d() {
        return Err(BvpError::Shape("coefficients and mesh disagree on d".into()));
    }
    let ratio = epsilon / mesh.h();
    if ratio < MIN_RATIO * (1.0 - 1e-9) {
        return Err(BvpError::Resolution { h: mesh.h(), epsilon });
    }
    let r = steps(epsilon, mesh.h()).ok_or(BvpError::Resolution { h: mesh.h(), epsilon })?;
    let src = Oscillating { c: coeffs, eps: epsilon };
    let matrix = assemble(mesh, &src, &coeffs.b, lambda_shift, Some(r));
    check_coercive(&matrix)?;
    Ok(DiscreteSystem {
        kind: OperatorKind::Oscillating,
        epsilon: Some(epsilon),
        lambda_shift,
        mesh: mesh.clone(),
        matrix,
        reference: reference(&coeffs.b, &cell_mean(&coeffs.g), &cell_mean(&coeffs.q), &cell_mean(&coeffs.q0), lambda_shift),
    })
}

/// Matrices of the effective form `b_D⁰`: principal part `g⁰`, first-order
/// part `Σ_j(ā_j D_j + D_j ā_j*) − b(D)*V − V*b(D)`, potential `Q̄ − W + λQ̄₀`.
pub fn assemble_effective(mesh: &DomainMesh, eff: &EffectiveOperator) -> Result<DiscreteSystem> {
    if eff.d() != mesh.d() {
        return Err(BvpError::Shape("effective operator and mesh disagree on d".into()));
    }
    let v_adj = eff.v.adjoint();
    let a: Vec<CMat> = (0..eff.d()).map(|j| &eff.a_bar[j] - &v_adj * &eff.b.b_matrices[j]).collect();
    let q = &eff.q_mean - &eff.w;
    let src = Constant(PointCoefficients {
        g: hermitian_part(&eff.g0),
        a,
        q: hermitian_part(&q),
        q0: hermitian_part(&eff.q0_mean),
    });
    let matrix = assemble(mesh, &src, &eff.b, eff.lambda_shift, None);
    check_coercive(&matrix)?;
    Ok(DiscreteSystem {
        kind: OperatorKind::Effective,
        epsilon: None,
        lambda_shift: eff.lambda_shift,
        mesh: mesh.clone(),
        matrix,
        reference: reference(&eff.b, &eff.g0, &q, &eff.q0_mean, eff.lambda_shift),
    })
}

/// `p = g^ε b(D)u` at the Gauss points.
pub fn flux_at_points(mesh: &DomainMesh, coeffs: &Coefficients, epsilon: f64, u: &GridFunction) -> Result<QuadratureField> {
    let (d, n, m) = (coeffs.d(), coeffs.n(), coeffs.m());
    if u.ncomp != n {
        return Err(BvpError::Shape(format!("expected {n} components")));
    }
    let grad = gradient_at_points(mesh, u)?;
    let rule = ElementRule::new(d, mesh.h());
    let mut out = QuadratureField::zeros(mesh.element_count(), rule.nodes(), m);
    let mut gbuf = vec![C64::new(0.0, 0.0); m * m];
    let mut bu = vec![C64::new(0.0, 0.0); m];
    for e in 0..mesh.element_count() {
        let corner = mesh.element_corner(e);
        for q in 0..rule.nodes() {
            let y: Vec<f64> = rule.point(&corner, q).iter().map(|t| t / epsilon).collect();
            coeffs.g.eval_cell_into(&y, &mut gbuf);
            let du = grad.at(e, q);
            bu.fill(C64::new(0.0, 0.0));
            for j in 0..d {
                let bj = &coeffs.b.b_matrices[j];
                for r in 0..m {
                    for c in 0..n {
                        // D_j = −i ∂_j
                        bu[r] += bj[(r, c)] * du[c * d + j] * C64::new(0.0, -1.0);
                    }
                }
            }
            let dst = out.at_mut(e, q);
            for r in 0..m {
                dst[r] = (0..m).map(|c| gbuf[r * m + c] * bu[c]).sum();
            }
        }
    }
    Ok(out)
}
