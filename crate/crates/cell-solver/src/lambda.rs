//! The periodic cell problems for `Λ` and `Λ̃`.

use periodic_core::{PeriodicField, SymbolB, C64};

use crate::spectral::{dense_solve, modes_to_nodes, nodes_to_modes, pcg, wavevector, zero, CellOperator};
use crate::{CellError, Result};

const PCG_TOL: f64 = 1e-13;
const REQUIRED_RESIDUAL: f64 = 1e-10;

/// Solution of one cell problem with the derived fields the rest of the
/// pipeline needs.
#[derive(Debug, Clone)]
pub struct CellFieldSolution {
    /// The corrector itself, `n × cols`.
    pub field: PeriodicField,
    /// `b(D)` applied to the corrector, `m × cols`.
    pub b_field: PeriodicField,
    /// `∂_j` of the corrector, one `n × cols` field per axis.
    pub gradients: Vec<PeriodicField>,
    /// Largest relative residual over the columns.
    pub residual: f64,
}

fn dense_allowed(op: &CellOperator) -> bool {
    match op.grid.d {
        1 => op.grid.n <= 128,
        2 => op.grid.n <= 64,
        _ => false,
    }
}

fn solve_columns(op: &CellOperator, rhs: Vec<Vec<C64>>) -> Result<CellFieldSolution> {
    let grid = op.grid;
    let (n, m) = (op.n, op.m);
    let cols = rhs.len();
    let mut sols = Vec::with_capacity(cols);
    let mut worst: f64 = 0.0;
    for r in &rhs {
        let maxiter = 4 * op.unknowns() + 100;
        let mut out = pcg(op, r, PCG_TOL, maxiter.min(5000));
        if out.residual > REQUIRED_RESIDUAL && dense_allowed(op) {
            out = dense_solve(op, r)?;
        }
        if out.residual > REQUIRED_RESIDUAL {
            return Err(CellError::NotConverged { residual: out.residual });
        }
        worst = worst.max(out.residual);
        sols.push(out.x);
    }

    let len = grid.len();
    let mut field = vec![zero(); len * n * cols];
    let mut b_field = vec![zero(); len * m * cols];
    let mut grads = vec![vec![zero(); len * n * cols]; grid.d];
    for (c, x) in sols.iter().enumerate() {
        let u = modes_to_nodes(x, n, grid);
        let bu = modes_to_nodes(&op.apply_b(x), m, grid);
        for node in 0..len {
            for i in 0..n {
                field[node * n * cols + i * cols + c] = u[node * n + i];
            }
            for i in 0..m {
                b_field[node * m * cols + i * cols + c] = bu[node * m + i];
            }
        }
        for (axis, gvals) in grads.iter_mut().enumerate() {
            let mut dx = x.clone();
            for idx in 0..len {
                let k = wavevector(grid, idx)[axis];
                for i in 0..n {
                    dx[idx * n + i] *= C64::new(0.0, k);
                }
            }
            let du = modes_to_nodes(&dx, n, grid);
            for node in 0..len {
                for i in 0..n {
                    gvals[node * n * cols + i * cols + c] = du[node * n + i];
                }
            }
        }
    }
    Ok(CellFieldSolution {
        field: PeriodicField::from_values(grid, n, cols, field),
        b_field: PeriodicField::from_values(grid, m, cols, b_field),
        gradients: grads
            .into_iter()
            .map(|v| PeriodicField::from_values(grid, n, cols, v))
            .collect(),
        residual: worst,
    })
}

fn check_shapes(g: &PeriodicField, b: &SymbolB) -> Result<()> {
    if g.rows != b.m() || g.cols != b.m() {
        return Err(CellError::Shape(format!(
            "g is {}×{} but b(D) has m = {}",
            g.rows,
            g.cols,
            b.m()
        )));
    }
    if g.grid.d != b.d() {
        return Err(CellError::Shape("dimension of g and b(D) differ".into()));
    }
    if !g.hermitian || !g.positive {
        return Err(CellError::Coercivity("g must be Hermitian positive definite".into()));
    }
    Ok(())
}

/// Zero-mean periodic `Λ` (n×m) with `b(D)* g (b(D)Λ + 1_m) = 0`.
pub fn solve_lambda(g: &PeriodicField, b: &SymbolB) -> Result<CellFieldSolution> {
    check_shapes(g, b)?;
    let op = CellOperator::new(g, b);
    let grid = g.grid;
    let m = b.m();
    let rhs = (0..m)
        .map(|c| {
            let col: Vec<C64> = (0..grid.len())
                .flat_map(|node| {
                    let gb = g.block(node);
                    (0..m).map(move |r| gb[r * m + c])
                })
                .collect();
            let zhat = nodes_to_modes(&col, m, grid);
            op.apply_b_adjoint(&zhat).into_iter().map(|v| -v).collect()
        })
        .collect();
    solve_columns(&op, rhs)
}

/// Zero-mean periodic `Λ̃` (n×n) with `b(D)* g b(D)Λ̃ + Σ_j D_j a_j* = 0`.
pub fn solve_lambda_tilde(g: &PeriodicField, b: &SymbolB, a: &[PeriodicField]) -> Result<CellFieldSolution> {
    check_shapes(g, b)?;
    let n = b.n();
    if a.len() != b.d() || a.iter().any(|aj| aj.rows != n || aj.cols != n || aj.grid != g.grid) {
        return Err(CellError::Shape("need d coefficients a_j of shape n×n on the grid of g".into()));
    }
    let op = CellOperator::new(g, b);
    let grid = g.grid;
    let rhs = (0..n)
        .map(|c| {
            let mut acc = vec![zero(); grid.len() * n];
            for (j, aj) in a.iter().enumerate() {
                // column c of a_j* is the conjugate of row c of a_j
                let col: Vec<C64> = (0..grid.len())
                    .flat_map(|node| {
                        let blk = aj.block(node);
                        (0..n).map(move |i| blk[c * n + i].conj())
                    })
                    .collect();
                let yhat = nodes_to_modes(&col, n, grid);
                for idx in 0..grid.len() {
                    if !op.active[idx] {
                        continue;
                    }
                    let k = wavevector(grid, idx)[j];
                    for i in 0..n {
                        acc[idx * n + i] -= yhat[idx * n + i] * k;
                    }
                }
            }
            acc
        })
        .collect();
    solve_columns(&op, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use periodic_core::{cell_mean, make_cubic_lattice, sample_field, CMat, FieldSpec};
    use std::f64::consts::PI;

    #[test]
    fn constant_g_gives_zero_corrector() {
        let l = make_cubic_lattice(2).unwrap();
        let g = sample_field(&FieldSpec::scalar_constant(2, 3.0), &l, 16, true).unwrap();
        let s = solve_lambda(&g, &SymbolB::gradient(2, 1)).unwrap();
        assert!(s.field.values.iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn one_dimensional_derivative_matches_closed_form() {
        let l = make_cubic_lattice(1).unwrap();
        let g = sample_field(&FieldSpec::expr(1, "2 + sin(2*pi*x1)"), &l, 256, true).unwrap();
        let s = solve_lambda(&g, &SymbolB::gradient(1, 1)).unwrap();
        let g0 = 3f64.sqrt();
        for node in 0..256 {
            let y = g.grid.node(node)[0];
            let expect = g0 / (2.0 + (2.0 * PI * y).sin()) - 1.0;
            // b(D)Λ = -iΛ' and Λ = iψ with ψ' = g⁰/g − 1
            assert_abs_diff_eq!(s.b_field.values[node].re, expect, epsilon = 1e-8);
            assert_abs_diff_eq!(s.gradients[0].values[node].im, expect, epsilon = 1e-8);
        }
        assert_abs_diff_eq!(cell_mean(&s.field)[(0, 0)].norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn lambda_tilde_vanishes_for_constant_a() {
        let l = make_cubic_lattice(1).unwrap();
        let g = sample_field(&FieldSpec::expr(1, "2 + cos(2*pi*x1)"), &l, 64, true).unwrap();
        let a = sample_field(&FieldSpec::constant(&(CMat::identity(1, 1) * C64::new(0.3, 0.7))), &l, 64, false).unwrap();
        let s = solve_lambda_tilde(&g, &SymbolB::gradient(1, 1), &[a]).unwrap();
        assert!(s.field.values.iter().all(|z| z.norm() < 1e-14));
    }
}
