use std::time::Instant;

use bvp_solver::{
    assemble_effective, assemble_oscillating, boundary_layer_with, build_mesh, flux_at_points, smallest_eigenvalue,
    DiscreteSystem, ShiftedSolver, SolverOptions,
};
use cell_solver::{homogenize, CellSolution, Coefficients, EffectiveOperator};
use corrector::first_order_approx;
use model_zoo::ProblemSpec;
use periodic_core::C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::load::SmoothLoad;
use crate::norms::{error_norms, ErrorRow};
use crate::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub eps_grid: Vec<f64>,
    pub zeta_grid: Vec<C64>,
    /// `ε/h`.
    pub ratio: usize,
    pub seed: u64,
    /// `false` measures `u_ε − u₀` in place of `u_ε − v_ε`.
    pub corrector: bool,
    pub smoothing: bool,
    pub boundary_layer: bool,
    /// `δ = dist(O′, ∂O)`.
    pub interior_margin: Option<f64>,
    /// Number of extra seeded loads for `gap_l2`.
    pub gap_loads: usize,
    /// Cell resolution; `None` takes the model default.
    pub cell_n: Option<usize>,
    pub jobs: usize,
    pub solver: SolverOptions,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            eps_grid: vec![1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0],
            zeta_grid: vec![C64::new(-1.0, 0.0)],
            ratio: 16,
            seed: 1,
            corrector: true,
            smoothing: true,
            boundary_layer: false,
            interior_margin: None,
            gap_loads: 5,
            cell_n: None,
            jobs: 1,
            solver: SolverOptions::default(),
        }
    }
}

/// A model with its cell problems solved once.
pub struct Prepared {
    pub spec: ProblemSpec,
    pub coeffs: Coefficients,
    pub cell: CellSolution,
    pub eff: EffectiveOperator,
}

impl Prepared {
    pub fn new(spec: &ProblemSpec, cell_n: Option<usize>) -> Result<Self> {
        let coeffs = spec.coefficients(cell_n.unwrap_or(spec.cell_n))?;
        let (cell, eff) = homogenize(&coeffs)?;
        Ok(Self {
            spec: spec.clone(),
            coeffs,
            cell,
            eff,
        })
    }

    pub fn oscillating(&self, epsilon: f64, h: f64, margin: Option<f64>) -> Result<DiscreteSystem> {
        let mesh = build_mesh(&self.spec.domain, h, margin)?;
        Ok(assemble_oscillating(&mesh, &self.coeffs, epsilon, self.eff.lambda_shift)?)
    }

    pub fn effective(&self, h: f64, margin: Option<f64>) -> Result<DiscreteSystem> {
        let mesh = build_mesh(&self.spec.domain, h, margin)?;
        Ok(assemble_effective(&mesh, &self.eff)?)
    }
}

fn check(cfg: &SweepConfig) -> Result<()> {
    if cfg.ratio < 16 {
        return Err(HarnessError::Config(format!("ratio ε/h = {} must be at least 16", cfg.ratio)));
    }
    if cfg.eps_grid.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(HarnessError::Config("ε must be positive".into()));
    }
    if cfg.gap_loads == 0 {
        return Err(HarnessError::Config("gap_loads must be positive".into()));
    }
    Ok(())
}

fn sweep_epsilon(p: &Prepared, cfg: &SweepConfig, epsilon: f64) -> Result<Vec<ErrorRow>> {
    let at = |zeta: C64| move |e: HarnessError| HarnessError::Point { epsilon, zeta, source: Box::new(e) };
    let first = cfg.zeta_grid.first().copied().unwrap_or_default();
    let h = epsilon / cfg.ratio as f64;
    let osc = p.oscillating(epsilon, h, cfg.interior_margin).map_err(at(first))?;
    let hom = p.effective(h, cfg.interior_margin).map_err(at(first))?;
    let mesh = &osc.mesh;
    let n = p.coeffs.n();
    let load = SmoothLoad::seeded(&p.spec.domain, n, cfg.seed).on(&mesh.grid);
    let mut rows = Vec::with_capacity(cfg.zeta_grid.len());
    for &zeta in &cfg.zeta_grid {
        let run = || -> Result<ErrorRow> {
            let start = Instant::now();
            let so = ShiftedSolver::new(&osc, zeta, cfg.solver)?;
            let sh = ShiftedSolver::new(&hom, zeta, cfg.solver)?;
            let ue = so.solve_load(&load)?;
            let u0 = sh.solve_load(&load)?;
            let smooth = first_order_approx(&u0.u, mesh, &p.coeffs, &p.cell, epsilon, cfg.smoothing)?;
            let plain = if cfg.smoothing {
                first_order_approx(&u0.u, mesh, &p.coeffs, &p.cell, epsilon, false)?
            } else {
                smooth.clone()
            };
            let w = if cfg.boundary_layer && cfg.corrector {
                Some(boundary_layer_with(&so, &smooth.w_trace)?)
            } else {
                None
            };
            let flux = flux_at_points(mesh, &p.coeffs, epsilon, &ue.u)?;
            let corr = cfg.corrector.then_some(&smooth);
            let mut row = error_norms(mesh, &ue, &u0, corr, Some(&plain), w.as_ref(), Some(&flux))?;
            if !cfg.corrector {
                row.err_flux = f64::NAN;
            }
            let mut gap = 0f64;
            for s in 1..=cfg.gap_loads as u64 {
                let f = SmoothLoad::seeded(&p.spec.domain, n, cfg.seed.wrapping_add(s)).on(&mesh.grid);
                let a = so.solve_load(&f)?;
                let b = sh.solve_load(&f)?;
                let diff = periodic_core::GridFunction {
                    values: a.u.values.iter().zip(&b.u.values).map(|(x, y)| x - y).collect(),
                    ..a.u.clone()
                };
                let fnorm = bvp_solver::quadrature::l2_norm(mesh, &f, false)?;
                gap = gap.max(bvp_solver::quadrature::l2_norm(mesh, &diff, false)? / fnorm);
            }
            row.gap_l2 = gap;
            row.wall_s = start.elapsed().as_secs_f64();
            Ok(row)
        };
        rows.push(run().map_err(at(zeta))?);
    }
    Ok(rows)
}

/// Runs every `(ε, ζ)` point with the seeded load and returns the rows
/// sorted by `ε`, then `Re ζ`, then `Im ζ`. The `ε` values run concurrently
/// up to `cfg.jobs`; each `ε` assembles once and reuses it for all `ζ`.
pub fn run_sweep(p: &Prepared, cfg: &SweepConfig) -> Result<Vec<ErrorRow>> {
    check(cfg)?;
    if cfg.eps_grid.is_empty() || cfg.zeta_grid.is_empty() {
        return Ok(Vec::new());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let chunks: Vec<Result<Vec<ErrorRow>>> = pool.install(|| cfg.eps_grid.par_iter().map(|&e| sweep_epsilon(p, cfg, e)).collect());
    let mut rows = Vec::new();
    for c in chunks {
        rows.extend(c?);
    }
    rows.sort_by(|a, b| {
        a.epsilon
            .total_cmp(&b.epsilon)
            .then(a.zeta_re.total_cmp(&b.zeta_re))
            .then(a.zeta_im.total_cmp(&b.zeta_im))
    });
    Ok(rows)
}

/// Common lower bound of the spectra of the effective and oscillating
/// pencils `(K, M)`, less 5%, floored at 0.
pub fn estimate_c_flat(effective: &DiscreteSystem, oscillating: &[DiscreteSystem]) -> Result<f64> {
    let mut low = smallest_eigenvalue(effective, 1e-6)?;
    for s in oscillating {
        low = low.min(smallest_eigenvalue(s, 1e-6)?);
    }
    Ok((0.95 * low).max(0.0))
}
