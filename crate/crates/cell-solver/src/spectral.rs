//! Trigonometric Galerkin discretisation of `b(D)* g b(D)` on the cell grid.
//!
//! Unknowns are Fourier coefficients on the grid's frequency set with the
//! zero and Nyquist frequencies removed; products with `g` are taken at the
//! cell-centred nodes (midpoint quadrature).

use nalgebra::DVector;
use periodic_core::fourier::{from_modes, to_modes};
use periodic_core::{CMat, CellGrid, PeriodicField, SymbolB, C64};
use std::f64::consts::PI;

use crate::{CellError, Result};

pub(crate) fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Applies [`from_modes`] to each of `ncomp` interleaved components.
pub(crate) fn modes_to_nodes(data: &[C64], ncomp: usize, grid: CellGrid) -> Vec<C64> {
    transform(data, ncomp, grid, from_modes)
}

pub(crate) fn nodes_to_modes(data: &[C64], ncomp: usize, grid: CellGrid) -> Vec<C64> {
    transform(data, ncomp, grid, to_modes)
}

fn transform(data: &[C64], ncomp: usize, grid: CellGrid, f: fn(&[C64], CellGrid) -> Vec<C64>) -> Vec<C64> {
    let len = grid.len();
    let mut out = vec![zero(); len * ncomp];
    let mut buf = vec![zero(); len];
    for c in 0..ncomp {
        for (k, v) in buf.iter_mut().enumerate() {
            *v = data[k * ncomp + c];
        }
        let t = f(&buf, grid);
        for (k, v) in t.iter().enumerate() {
            out[k * ncomp + c] = *v;
        }
    }
    out
}

/// Physical frequency `2πk` of mode `idx` on the unit cubic lattice.
pub(crate) fn wavevector(grid: CellGrid, idx: usize) -> Vec<f64> {
    grid.freqs(idx).iter().map(|&k| 2.0 * PI * k as f64).collect()
}

pub(crate) struct CellOperator<'a> {
    pub grid: CellGrid,
    pub n: usize,
    pub m: usize,
    g: &'a PeriodicField,
    symbols: Vec<CMat>,
    pub active: Vec<bool>,
    precond: Vec<CMat>,
}

impl<'a> CellOperator<'a> {
    pub fn new(g: &'a PeriodicField, b: &SymbolB) -> Self {
        let grid = g.grid;
        let gbar = periodic_core::cell_mean(g);
        let (n, m) = (b.n(), b.m());
        let mut symbols = Vec::with_capacity(grid.len());
        let mut active = Vec::with_capacity(grid.len());
        let mut precond = Vec::with_capacity(grid.len());
        for idx in 0..grid.len() {
            let bk = b.at(&wavevector(grid, idx));
            let on = idx != 0 && !grid.is_nyquist(idx);
            let p = if on {
                (bk.adjoint() * &gbar * &bk).try_inverse().unwrap_or_else(|| CMat::zeros(n, n))
            } else {
                CMat::zeros(n, n)
            };
            symbols.push(bk);
            active.push(on);
            precond.push(p);
        }
        Self {
            grid,
            n,
            m,
            g,
            symbols,
            active,
            precond,
        }
    }

    /// Modes of `b(D)U` (m components) from modes of `U` (n components).
    pub fn apply_b(&self, x: &[C64]) -> Vec<C64> {
        let (n, m) = (self.n, self.m);
        let mut out = vec![zero(); self.grid.len() * m];
        for idx in 0..self.grid.len() {
            if !self.active[idx] {
                continue;
            }
            let bk = &self.symbols[idx];
            for r in 0..m {
                let mut acc = zero();
                for c in 0..n {
                    acc += bk[(r, c)] * x[idx * n + c];
                }
                out[idx * m + r] = acc;
            }
        }
        out
    }

    /// `P_K b(ξ)* ẑ` for nodal modes `ẑ` with m components.
    pub fn apply_b_adjoint(&self, z: &[C64]) -> Vec<C64> {
        let (n, m) = (self.n, self.m);
        let mut out = vec![zero(); self.grid.len() * n];
        for idx in 0..self.grid.len() {
            if !self.active[idx] {
                continue;
            }
            let bk = &self.symbols[idx];
            for c in 0..n {
                let mut acc = zero();
                for r in 0..m {
                    acc += bk[(r, c)].conj() * z[idx * m + r];
                }
                out[idx * n + c] = acc;
            }
        }
        out
    }

    /// Multiplies nodal m-vectors by `g`.
    pub fn mul_g(&self, w: &[C64]) -> Vec<C64> {
        let m = self.m;
        let mut out = vec![zero(); w.len()];
        for node in 0..self.grid.len() {
            let gb = self.g.block(node);
            for r in 0..m {
                let mut acc = zero();
                for c in 0..m {
                    acc += gb[r * m + c] * w[node * m + c];
                }
                out[node * m + r] = acc;
            }
        }
        out
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let w = modes_to_nodes(&self.apply_b(x), self.m, self.grid);
        let z = nodes_to_modes(&self.mul_g(&w), self.m, self.grid);
        self.apply_b_adjoint(&z)
    }

    pub fn precondition(&self, r: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut out = vec![zero(); r.len()];
        for idx in 0..self.grid.len() {
            if !self.active[idx] {
                continue;
            }
            let p = &self.precond[idx];
            for i in 0..n {
                let mut acc = zero();
                for j in 0..n {
                    acc += p[(i, j)] * r[idx * n + j];
                }
                out[idx * n + i] = acc;
            }
        }
        out
    }

    pub fn unknowns(&self) -> usize {
        self.active.iter().filter(|&&a| a).count() * self.n
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) struct SolveOutcome {
    pub x: Vec<C64>,
    pub residual: f64,
}

/// Preconditioned conjugate gradients on the Hermitian operator.
pub(crate) fn pcg(op: &CellOperator, rhs: &[C64], tol: f64, maxiter: usize) -> SolveOutcome {
    let bnorm = norm(rhs);
    let mut x = vec![zero(); rhs.len()];
    if bnorm == 0.0 {
        return SolveOutcome { x, residual: 0.0 };
    }
    let mut r = rhs.to_vec();
    let mut z = op.precondition(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..maxiter {
        let ap = op.apply(&p);
        let pap = dot(&p, &ap);
        if pap.re <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm(&r) <= tol * bnorm {
            break;
        }
        z = op.precondition(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..p.len() {
            p[i] = z[i] + beta * p[i];
        }
    }
    let res = op.apply(&x);
    let residual = norm(&rhs.iter().zip(&res).map(|(a, b)| a - b).collect::<Vec<_>>()) / bnorm;
    SolveOutcome { x, residual }
}

/// Dense LU solve of the same Galerkin system (small grids only).
pub(crate) fn dense_solve(op: &CellOperator, rhs: &[C64]) -> Result<SolveOutcome> {
    let n = op.n;
    let unknowns: Vec<usize> = (0..op.grid.len())
        .filter(|&idx| op.active[idx])
        .flat_map(|idx| (0..n).map(move |c| idx * n + c))
        .collect();
    let size = unknowns.len();
    let mut mat = CMat::zeros(size, size);
    let mut e = vec![zero(); rhs.len()];
    for (col, &u) in unknowns.iter().enumerate() {
        e[u] = C64::new(1.0, 0.0);
        let ae = op.apply(&e);
        e[u] = zero();
        for (row, &v) in unknowns.iter().enumerate() {
            mat[(row, col)] = ae[v];
        }
    }
    let b = DVector::from_iterator(size, unknowns.iter().map(|&u| rhs[u]));
    let sol = mat
        .lu()
        .solve(&b)
        .ok_or_else(|| CellError::Coercivity("cell system is singular".into()))?;
    let mut x = vec![zero(); rhs.len()];
    for (i, &u) in unknowns.iter().enumerate() {
        x[u] = sol[i];
    }
    let res = op.apply(&x);
    let bnorm = norm(rhs).max(f64::MIN_POSITIVE);
    let residual = norm(&rhs.iter().zip(&res).map(|(a, b)| a - b).collect::<Vec<_>>()) / bnorm;
    Ok(SolveOutcome { x, residual })
}
