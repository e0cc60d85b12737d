//! The first-order approximation `v_ε = u₀ + εΛ^ε S_ε b(D)ũ₀ + εΛ̃^ε S_ε ũ₀`,
//! its variant without smoothing, the flux approximation, the cut-off
//! `θ_ε` with the boundary data `φ_ε`, and the boundary-layer term `w_ε`.

mod extension;

use bvp_solver::quadrature::{interpolate_to_points, ElementRule};
use bvp_solver::{solve_boundary_layer, BvpError, DiscreteSystem, DomainMesh, QuadratureField, SolveResult};
use cell_solver::{CellSolution, Coefficients};
use periodic_core::{steklov_smooth, BoxGrid, CoreError, GridFunction, PeriodicField, SymbolB, C64};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use extension::{discrete_h2_norm, extend, required_margin, ExtendedFunction, ExtensionRule};

#[derive(Debug, Error)]
pub enum CorrectorError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Bvp(#[from] BvpError),
    #[error("extension margin: {0}")]
    Margin(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
}

pub type Result<T> = std::result::Result<T, CorrectorError>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrectorOutput {
    pub epsilon: f64,
    pub smoothing: bool,
    /// `v_ε = u₀ + K_term` at the mesh nodes.
    pub v_eps: GridFunction,
    /// `εK_D(ε;ζ)F` (or `εK_D⁰(ε;ζ)F` without smoothing).
    pub k_term: GridFunction,
    /// Flux approximation at the Gauss points.
    pub flux: QuadratureField,
    /// `K_term` on boundary nodes, zero elsewhere: the Dirichlet data of `w_ε`.
    pub w_trace: GridFunction,
}

/// `b(D)u = Σ_j b_j D_j u` with `D_j = −i∂_j`, from discrete partial derivatives.
fn apply_symbol(b: &SymbolB, u: &GridFunction) -> GridFunction {
    let (n, m) = (b.n(), b.m());
    let parts: Vec<GridFunction> = (0..b.d()).map(|j| u.difference(j)).collect();
    let mut out = GridFunction::zeros(u.grid.clone(), m);
    let mi = C64::new(0.0, -1.0);
    for node in 0..u.grid.len() {
        for (j, part) in parts.iter().enumerate() {
            let bj = &b.b_matrices[j];
            for r in 0..m {
                let mut acc = C64::new(0.0, 0.0);
                for c in 0..n {
                    acc += bj[(r, c)] * part.values[node * n + c];
                }
                out.values[node * m + r] += mi * acc;
            }
        }
    }
    out
}

/// `S_ε b(D)ũ₀` and `S_ε ũ₀` on the mesh nodes (or `b(D)u₀`, `u₀`).
fn smoothed_inputs(u0: &GridFunction, b: &SymbolB, coeffs: &Coefficients, epsilon: f64, smoothing: bool) -> Result<(GridFunction, GridFunction)> {
    if !smoothing {
        return Ok((apply_symbol(b, u0), u0.clone()));
    }
    let margin = required_margin(epsilon, u0.grid.h)?;
    let ext = extend(u0, margin)?;
    let bu = steklov_smooth(&apply_symbol(b, &ext.u), epsilon, &coeffs.lattice)?;
    let su = steklov_smooth(&ext.u, epsilon, &coeffs.lattice)?;
    Ok((bu.restrict(&u0.grid), su.restrict(&u0.grid)))
}

fn check_inputs(u0: &GridFunction, mesh: &DomainMesh, coeffs: &Coefficients, cell: &CellSolution) -> Result<()> {
    if u0.grid != mesh.grid {
        return Err(CorrectorError::Shape("u₀ does not live on the mesh".into()));
    }
    if u0.ncomp != coeffs.n() || cell.lambda_vertex.rows != coeffs.n() || cell.dim != mesh.d() {
        return Err(CorrectorError::Shape("cell solution, coefficients and u₀ disagree".into()));
    }
    Ok(())
}

/// `b(D)Λ` or `b(D)Λ̃` at lattice point `y`. Piecewise coefficients give
/// piecewise-constant cell data, read from the containing grid cell.
fn cell_value(field: &PeriodicField, piecewise: bool, y: &[f64], out: &mut [C64]) {
    if piecewise {
        let n = field.grid.n as i64;
        let k: Vec<usize> = y.iter().map(|t| ((t * n as f64).floor() as i64).rem_euclid(n) as usize).collect();
        out.copy_from_slice(field.block(field.grid.flat_index(&k)));
    } else {
        field.interpolate_into(y, out);
    }
}

fn matvec(a: &[C64], rows: usize, cols: usize, x: &[C64], y: &mut [C64]) {
    for r in 0..rows {
        y[r] = (0..cols).map(|c| a[r * cols + c] * x[c]).sum();
    }
}

/// `g̃^ε(S_ε b(D)ũ₀) + g^ε(b(D)Λ̃)^ε(S_ε ũ₀)` at the Gauss points, from the
/// nodal inputs interpolated with the mesh elements.
fn flux_from_inputs(mesh: &DomainMesh, coeffs: &Coefficients, cell: &CellSolution, epsilon: f64, bu: &GridFunction, su: &GridFunction) -> Result<QuadratureField> {
    let (n, m) = (coeffs.n(), coeffs.m());
    let bu_q = interpolate_to_points(mesh, bu)?;
    let su_q = interpolate_to_points(mesh, su)?;
    let rule = ElementRule::new(mesh.d(), mesh.h());
    let piecewise = coeffs.g.is_piecewise();
    let mut out = QuadratureField::zeros(mesh.element_count(), rule.nodes(), m);
    let (mut g, mut bl, mut blt) = (vec![C64::new(0.0, 0.0); m * m], vec![C64::new(0.0, 0.0); m * m], vec![C64::new(0.0, 0.0); m * n]);
    let (mut t, mut s) = (vec![C64::new(0.0, 0.0); m], vec![C64::new(0.0, 0.0); m]);
    for e in 0..mesh.element_count() {
        let corner = mesh.element_corner(e);
        for q in 0..rule.nodes() {
            let y: Vec<f64> = rule.point(&corner, q).iter().map(|x| x / epsilon).collect();
            coeffs.g.eval_cell_into(&y, &mut g);
            cell_value(&cell.b_lambda, piecewise, &y, &mut bl);
            cell_value(&cell.b_lambda_tilde, piecewise, &y, &mut blt);
            let grad = bu_q.at(e, q);
            // t = (b(D)Λ + 1) S b ũ₀ + (b(D)Λ̃) S ũ₀, then p = g t
            matvec(&bl, m, m, grad, &mut t);
            matvec(&blt, m, n, su_q.at(e, q), &mut s);
            for r in 0..m {
                t[r] += grad[r] + s[r];
            }
            matvec(&g, m, m, &t, out.at_mut(e, q));
        }
    }
    Ok(out)
}

/// First-order approximation with Steklov smoothing (`smoothing = true`) or
/// the plain corrector `K_D⁰` (`smoothing = false`).
pub fn first_order_approx(
    u0: &GridFunction,
    mesh: &DomainMesh,
    coeffs: &Coefficients,
    cell: &CellSolution,
    epsilon: f64,
    smoothing: bool,
) -> Result<CorrectorOutput> {
    check_inputs(u0, mesh, coeffs, cell)?;
    let (n, m) = (coeffs.n(), coeffs.m());
    let (bu, su) = smoothed_inputs(u0, &coeffs.b, coeffs, epsilon, smoothing)?;
    let mut k_term = GridFunction::zeros(mesh.grid.clone(), n);
    let mut lam = vec![C64::new(0.0, 0.0); n * m];
    let mut lam_t = vec![C64::new(0.0, 0.0); n * n];
    let (mut a, mut b) = (vec![C64::new(0.0, 0.0); n], vec![C64::new(0.0, 0.0); n]);
    for node in 0..mesh.node_count() {
        let y: Vec<f64> = mesh.grid.point(node).iter().map(|x| x / epsilon).collect();
        cell.lambda_vertex.eval_into(&y, &mut lam);
        cell.lambda_tilde_vertex.eval_into(&y, &mut lam_t);
        matvec(&lam, n, m, &bu.values[node * m..(node + 1) * m], &mut a);
        matvec(&lam_t, n, n, &su.values[node * n..(node + 1) * n], &mut b);
        for c in 0..n {
            k_term.values[node * n + c] = (a[c] + b[c]) * epsilon;
        }
    }
    let v_eps = GridFunction {
        values: u0.values.iter().zip(&k_term.values).map(|(u, k)| u + k).collect(),
        ..u0.clone()
    };
    let mut w_trace = GridFunction::zeros(mesh.grid.clone(), n);
    for node in mesh.boundary_nodes() {
        w_trace.values[node * n..(node + 1) * n].copy_from_slice(&k_term.values[node * n..(node + 1) * n]);
    }
    let flux = flux_from_inputs(mesh, coeffs, cell, epsilon, &bu, &su)?;
    Ok(CorrectorOutput {
        epsilon,
        smoothing,
        v_eps,
        k_term,
        flux,
        w_trace,
    })
}

pub fn corrector_no_smoothing(u0: &GridFunction, mesh: &DomainMesh, coeffs: &Coefficients, cell: &CellSolution, epsilon: f64) -> Result<CorrectorOutput> {
    first_order_approx(u0, mesh, coeffs, cell, epsilon, false)
}

/// Flux approximation alone; see [`first_order_approx`].
pub fn flux_approx(u0: &GridFunction, mesh: &DomainMesh, coeffs: &Coefficients, cell: &CellSolution, epsilon: f64, smoothing: bool) -> Result<QuadratureField> {
    check_inputs(u0, mesh, coeffs, cell)?;
    let (bu, su) = smoothed_inputs(u0, &coeffs.b, coeffs, epsilon, smoothing)?;
    flux_from_inputs(mesh, coeffs, cell, epsilon, &bu, &su)
}

/// Cut-off `θ_ε` and `φ_ε = θ_ε(Λ^ε S_ε b(D)ũ₀ + Λ̃^ε S_ε ũ₀)` scaled by `ε`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryCorrector {
    pub theta: GridFunction,
    pub phi: GridFunction,
    /// `φ_ε` on `∂O`, zero elsewhere.
    pub trace: GridFunction,
    /// Bound on `ε|∇θ_ε|`.
    pub mu: f64,
}

/// Smoothstep in the distance to `∂O`: 1 up to `ε/4`, 0 from `3ε/4`.
pub fn cutoff(grid: &BoxGrid, domain: &[[f64; 2]], epsilon: f64) -> Result<GridFunction> {
    if epsilon < 4.0 * grid.h {
        return Err(CorrectorError::Shape(format!("ε-strip thinner than 4h (ε = {epsilon}, h = {})", grid.h)));
    }
    Ok(GridFunction::from_fn(grid.clone(), 1, |x| {
        let dist = x.iter().zip(domain).map(|(t, [a, b])| (t - a).min(b - t)).fold(f64::INFINITY, f64::min);
        let s = ((dist / epsilon - 0.25) / 0.5).clamp(0.0, 1.0);
        vec![C64::new(1.0 - s * s * (3.0 - 2.0 * s), 0.0)]
    }))
}

/// Maximal slope of the smoothstep `3s² − 2s³` is 3/2 per unit `s`, and `s`
/// runs over `ε/2`.
pub const CUTOFF_MU: f64 = 3.0;

pub fn boundary_corrector_trace(out: &CorrectorOutput, mesh: &DomainMesh) -> Result<BoundaryCorrector> {
    let theta = cutoff(&mesh.grid, &mesh.domain(), out.epsilon)?;
    let n = out.k_term.ncomp;
    let mut phi = out.k_term.clone();
    for node in 0..mesh.node_count() {
        let t = theta.values[node].re;
        for v in &mut phi.values[node * n..(node + 1) * n] {
            *v *= t;
        }
    }
    let mut trace = GridFunction::zeros(mesh.grid.clone(), n);
    for node in mesh.boundary_nodes() {
        trace.values[node * n..(node + 1) * n].copy_from_slice(&phi.values[node * n..(node + 1) * n]);
    }
    Ok(BoundaryCorrector {
        theta,
        phi,
        trace,
        mu: CUTOFF_MU,
    })
}

/// `w_ε`: the oscillating homogeneous problem with the corrector trace on `∂O`.
pub fn boundary_layer(system: &DiscreteSystem, zeta: C64, out: &CorrectorOutput) -> Result<SolveResult> {
    Ok(solve_boundary_layer(system, zeta, &out.w_trace)?)
}
