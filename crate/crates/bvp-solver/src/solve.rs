use std::time::Instant;

use periodic_core::{GridFunction, C64};
use serde::{Deserialize, Serialize};

use crate::assemble::{DiscreteSystem, OperatorKind};
use crate::dst::DstPreconditioner;
use crate::linear::{bicgstab, pcg, BandLu, KrylovOutcome};
use crate::quadrature::load_vector;
use crate::{BvpError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Normwise backward error every solve must reach.
    pub tol: f64,
    pub max_iter: usize,
    /// Band factorisations costing more than this many operations switch to
    /// preconditioned iterations (2D only).
    pub direct_cost: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 5000,
            direct_cost: 2e9,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveResult {
    pub kind: OperatorKind,
    /// Nodal values on the whole mesh.
    pub u: GridFunction,
    pub zeta: C64,
    pub epsilon: Option<f64>,
    pub residual: f64,
    /// Seconds.
    pub wallclock: f64,
}

enum Method {
    Direct(BandLu),
    Iterative(DstPreconditioner),
}

/// `(K − ζM)⁻¹` on one system, factored or preconditioned once and reused
/// for any number of right-hand sides.
pub struct ShiftedSolver<'a> {
    sys: &'a DiscreteSystem,
    zeta: C64,
    opts: SolverOptions,
    method: Method,
    a_norm: f64,
}

impl<'a> ShiftedSolver<'a> {
    pub fn new(sys: &'a DiscreteSystem, zeta: C64, opts: SolverOptions) -> Result<Self> {
        if !(zeta.re.is_finite() && zeta.im.is_finite()) {
            return Err(BvpError::Admissibility(format!("ζ = {zeta} is not finite")));
        }
        let mat = &sys.matrix;
        let n = mat.ncomp;
        let row_span = if mat.d() == 1 { 1 } else { mat.dims[0] - 1 };
        let kl = row_span * n + n - 1;
        let unknowns = mat.row_count() * n;
        let cost = unknowns as f64 * (kl * 3 * kl) as f64;
        let method = if mat.d() == 1 || cost <= opts.direct_cost {
            let (kl, entries) = mat.band_entries(zeta);
            let lu = BandLu::factor(unknowns, kl, &entries, true).map_err(|_| BvpError::Singular { zeta })?;
            let piv: Vec<f64> = lu.pivots().iter().map(|p| p.norm()).collect();
            let (lo, hi) = piv.iter().fold((f64::INFINITY, 0f64), |(a, b), &p| (a.min(p), b.max(p)));
            if lo <= 1e-14 * hi {
                return Err(BvpError::Singular { zeta });
            }
            Method::Direct(lu)
        } else {
            Method::Iterative(DstPreconditioner::new(&mat.dims, sys.mesh.h(), n, &sys.reference, zeta))
        };
        Ok(Self {
            sys,
            zeta,
            opts,
            method,
            a_norm: mat.inf_norm(zeta),
        })
    }

    pub fn system(&self) -> &DiscreteSystem {
        self.sys
    }

    /// Residual vector and the normwise backward error
    /// `‖b − Ax‖_∞ / (‖A‖_∞‖x‖_∞ + ‖b‖_∞)` over interior unknowns.
    fn residual(&self, rhs: &[C64], x: &[C64]) -> (Vec<C64>, f64) {
        let mut r = vec![C64::new(0.0, 0.0); rhs.len()];
        self.sys.matrix.apply_shifted(self.zeta, x, &mut r);
        for (ri, bi) in r.iter_mut().zip(rhs) {
            *ri = bi - *ri;
        }
        self.clear_boundary(&mut r);
        let sup = |v: &[C64]| v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let denom = self.a_norm * sup(x) + self.interior_sup(rhs);
        let res = if denom == 0.0 { 0.0 } else { sup(&r) / denom };
        (r, res)
    }

    fn interior_sup(&self, v: &[C64]) -> f64 {
        let n = self.sys.ncomp();
        self.sys
            .matrix
            .rows
            .iter()
            .flat_map(|&node| (0..n).map(move |c| node * n + c))
            .map(|i| v[i].norm())
            .fold(0.0, f64::max)
    }

    fn interior_norm(&self, v: &[C64]) -> f64 {
        let n = self.sys.ncomp();
        self.sys
            .matrix
            .rows
            .iter()
            .map(|&node| (0..n).map(|c| v[node * n + c].norm_sqr()).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    fn clear_boundary(&self, v: &mut [C64]) {
        let n = self.sys.ncomp();
        let mat = &self.sys.matrix;
        for node in 0..mat.node_count() {
            if mat.row_of(node).is_none() {
                v[node * n..(node + 1) * n].fill(C64::new(0.0, 0.0));
            }
        }
    }

    /// Solves `(K − ζM)x = rhs` for a full-node right-hand side (boundary
    /// entries ignored); the returned `x` vanishes on boundary nodes.
    pub fn solve_rhs(&self, rhs: &[C64]) -> Result<(Vec<C64>, f64)> {
        let n = self.sys.ncomp();
        let mut b = rhs.to_vec();
        self.clear_boundary(&mut b);
        let mut x = vec![C64::new(0.0, 0.0); b.len()];
        if self.interior_norm(&b) == 0.0 {
            return Ok((x, 0.0));
        }
        let tol = self.opts.tol;
        match &self.method {
            Method::Direct(lu) => {
                let rows = &self.sys.matrix.rows;
                let gather = |v: &[C64]| -> Vec<C64> { rows.iter().flat_map(|&node| v[node * n..(node + 1) * n].to_vec()).collect() };
                let mut prev = f64::INFINITY;
                let mut r = b.clone();
                for _ in 0..8 {
                    let mut dx = gather(&r);
                    lu.solve(&mut dx);
                    for (k, &node) in rows.iter().enumerate() {
                        for c in 0..n {
                            x[node * n + c] += dx[k * n + c];
                        }
                    }
                    let (rn, res) = self.residual(&b, &x);
                    r = rn;
                    if res <= tol * 1e-3 || res > 0.5 * prev {
                        prev = prev.min(res);
                        break;
                    }
                    prev = res;
                }
                if !(prev <= tol) {
                    return Err(BvpError::NotConverged { residual: prev });
                }
                Ok((x, prev))
            }
            Method::Iterative(pre) => {
                let apply = |v: &[C64], y: &mut [C64]| self.sys.matrix.apply_shifted(self.zeta, v, y);
                let precond = |v: &[C64], y: &mut [C64]| pre.apply(v, y);
                let target = 0.5 * tol * self.interior_norm(&b);
                let mut res = f64::INFINITY;
                for attempt in 0..3 {
                    let hermitian = self.zeta.im == 0.0 && attempt == 0;
                    let outcome = if hermitian {
                        pcg(&apply, &precond, &b, &mut x, target, self.opts.max_iter)
                    } else {
                        bicgstab(&apply, &precond, &b, &mut x, target, self.opts.max_iter)
                    };
                    res = self.residual(&b, &x).1;
                    if matches!(outcome, KrylovOutcome::Breakdown) && hermitian {
                        x.fill(C64::new(0.0, 0.0));
                        continue;
                    }
                    if res <= tol {
                        return Ok((x, res));
                    }
                }
                Err(BvpError::NotConverged { residual: res })
            }
        }
    }

    /// Solves with the `L²` load `(F, φ_i)` of nodal data `f`.
    pub fn solve_load(&self, f: &GridFunction) -> Result<SolveResult> {
        let start = Instant::now();
        if f.ncomp != self.sys.ncomp() {
            return Err(BvpError::Shape(format!("load needs {} components", self.sys.ncomp())));
        }
        let rhs = load_vector(&self.sys.mesh, f)?;
        let (x, residual) = self.solve_rhs(&rhs)?;
        Ok(SolveResult {
            kind: self.sys.kind,
            u: GridFunction {
                grid: self.sys.mesh.grid.clone(),
                ncomp: f.ncomp,
                values: x,
            },
            zeta: self.zeta,
            epsilon: self.sys.epsilon,
            residual,
            wallclock: start.elapsed().as_secs_f64(),
        })
    }
}

/// `u = (B − ζQ₀)⁻¹F` with homogeneous Dirichlet conditions.
pub fn solve_resolvent(system: &DiscreteSystem, zeta: C64, f: &GridFunction) -> Result<SolveResult> {
    ShiftedSolver::new(system, zeta, SolverOptions::default())?.solve_load(f)
}

/// `w` with `(B_ε − ζQ₀^ε)w = 0` in `O` and `w = trace` on `∂O` (interior
/// values of `trace` are ignored). The trace is lifted by its nodal
/// extension by zero and the remainder solved with homogeneous data.
pub fn solve_boundary_layer(system: &DiscreteSystem, zeta: C64, trace: &GridFunction) -> Result<SolveResult> {
    boundary_layer_with(&ShiftedSolver::new(system, zeta, SolverOptions::default())?, trace)
}

pub fn boundary_layer_with(solver: &ShiftedSolver, trace: &GridFunction) -> Result<SolveResult> {
    let start = Instant::now();
    let sys = solver.system();
    let n = sys.ncomp();
    if trace.grid != sys.mesh.grid || trace.ncomp != n {
        return Err(BvpError::Shape("trace does not live on this mesh".into()));
    }
    let mut lift = vec![C64::new(0.0, 0.0); trace.values.len()];
    for node in sys.mesh.boundary_nodes() {
        lift[node * n..(node + 1) * n].copy_from_slice(&trace.values[node * n..(node + 1) * n]);
    }
    let mut rhs = vec![C64::new(0.0, 0.0); lift.len()];
    sys.matrix.apply_shifted(solver.zeta, &lift, &mut rhs);
    for v in rhs.iter_mut() {
        *v = -*v;
    }
    let (w0, residual) = solver.solve_rhs(&rhs)?;
    let values: Vec<C64> = w0.iter().zip(&lift).map(|(a, b)| a + b).collect();
    Ok(SolveResult {
        kind: OperatorKind::BoundaryLayer,
        u: GridFunction {
            grid: sys.mesh.grid.clone(),
            ncomp: n,
            values,
        },
        zeta: solver.zeta,
        epsilon: sys.epsilon,
        residual,
        wallclock: start.elapsed().as_secs_f64(),
    })
}

/// Smallest eigenvalue of the pencil `(K, M)` by inverse iteration, to
/// relative accuracy `tol`.
pub fn smallest_eigenvalue(system: &DiscreteSystem, tol: f64) -> Result<f64> {
    let solver = ShiftedSolver::new(system, C64::new(0.0, 0.0), SolverOptions::default())?;
    let mesh = &system.mesh;
    let n = system.ncomp();
    let lens: Vec<f64> = mesh.domain().iter().map(|[a, b]| b - a).collect();
    let lower = mesh.grid.lower.clone();
    let mut x: Vec<C64> = (0..mesh.node_count())
        .flat_map(|node| {
            let p = mesh.grid.point(node);
            let v: f64 = p
                .iter()
                .zip(&lens)
                .zip(&lower)
                .map(|((x, l), lo)| (std::f64::consts::PI * (x - lo) / l).sin())
                .product();
            (0..n).map(move |c| C64::new(v * (1.0 + 0.1 * c as f64), 0.0))
        })
        .collect();
    let mut rho_old = f64::INFINITY;
    let mut y = vec![C64::new(0.0, 0.0); x.len()];
    for _ in 0..500 {
        system.matrix.apply_combination(C64::new(0.0, 0.0), C64::new(1.0, 0.0), &x, &mut y);
        let (xn, _) = solver.solve_rhs(&y)?;
        let mm = system.mass_form(&xn).re;
        let rho = system.stiffness_form(&xn).re / mm;
        let s = 1.0 / mm.sqrt();
        x = xn.into_iter().map(|v| v * s).collect();
        if (rho - rho_old).abs() <= tol * rho.abs() {
            return Ok(rho);
        }
        rho_old = rho;
    }
    Err(BvpError::EigenNotConverged)
}
