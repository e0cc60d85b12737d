//! Periodic cell problems, effective coefficients and the effective symbol.
//!
//! [`homogenize`] runs the whole pipeline on a set of [`Coefficients`]: the
//! two cell problems, `g̃`, `g⁰`, `V`, `W`, the shift `λ` and the effective
//! operator with its symbol `L(ξ)`.

pub mod effective;
pub mod lambda;
pub mod shift;
mod spectral;
pub mod vertex;

use periodic_core::linalg::{cmat_serde, hermitian_part};
use periodic_core::{sample_field, CMat, CoreError, Lattice, PeriodicField, SymbolB};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use effective::{
    assemble_effective, assemble_g_tilde, compute_v, compute_w, effective_matrix, lower_symbol_constant,
    EffectiveOperator,
};
pub use lambda::{solve_lambda, solve_lambda_tilde, CellFieldSolution};
pub use shift::choose_lambda_shift;
pub use vertex::VertexField;

#[derive(Debug, Error)]
pub enum CellError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("coercivity lost: {0}")]
    Coercivity(String),
    #[error("cell solve did not converge (relative residual {residual:e})")]
    NotConverged { residual: f64 },
    #[error("effective matrix violates the Voigt-Reuss bracket")]
    VoigtReuss,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("shift search exceeded 2^64")]
    ShiftOverflow,
    #[error("effective symbol below c_* = {c_star:e} (found {found:e})")]
    Symbol { c_star: f64, found: f64 },
    #[error("doubled-resolution drift {drift:e} exceeds 1e-4")]
    Drift { drift: f64 },
    #[error("only the cubic lattice is supported by the cell solver")]
    Lattice,
}

pub type Result<T> = std::result::Result<T, CellError>;

/// All periodic coefficients of `B_ε` on one cell grid.
#[derive(Debug, Clone)]
pub struct Coefficients {
    pub lattice: Lattice,
    pub b: SymbolB,
    pub g: PeriodicField,
    pub a: Vec<PeriodicField>,
    /// Hermitian part of the supplied `Q`.
    pub q: PeriodicField,
    pub q0: PeriodicField,
}

impl Coefficients {
    pub fn new(
        lattice: Lattice,
        b: SymbolB,
        g: PeriodicField,
        a: Vec<PeriodicField>,
        q: PeriodicField,
        q0: PeriodicField,
    ) -> Result<Self> {
        if !lattice.is_cubic() {
            return Err(CellError::Lattice);
        }
        let (d, n, m) = (b.d(), b.n(), b.m());
        if lattice.dim() != d || g.grid.d != d {
            return Err(CellError::Shape("lattice, symbol and fields disagree on d".into()));
        }
        if (g.rows, g.cols) != (m, m) {
            return Err(CellError::Shape(format!("g must be {m}×{m}")));
        }
        if a.len() != d {
            return Err(CellError::Shape(format!("need {d} fields a_j")));
        }
        for f in a.iter().chain([&q, &q0]) {
            if (f.rows, f.cols) != (n, n) {
                return Err(CellError::Shape(format!("a_j, Q and Q0 must be {n}×{n}")));
            }
            if f.grid != g.grid {
                return Err(CellError::Shape("all fields must share one cell grid".into()));
            }
        }
        if !g.positive {
            return Err(CellError::Coercivity("g is not Hermitian positive definite".into()));
        }
        if !q0.positive {
            return Err(CellError::Coercivity("Q0 is not Hermitian positive definite".into()));
        }
        let q = if q.hermitian {
            q
        } else {
            // the symmetrized field no longer matches any closed-form spec
            q.map(n, n, hermitian_part)
        };
        Ok(Self { lattice, b, g, a, q, q0 })
    }

    pub fn d(&self) -> usize {
        self.b.d()
    }

    pub fn n(&self) -> usize {
        self.b.n()
    }

    pub fn m(&self) -> usize {
        self.b.m()
    }
}

/// Solutions of both cell problems and the effective matrices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellSolution {
    pub grid_n: usize,
    pub dim: usize,
    /// `Λ`, `n×m`, zero mean.
    pub lambda: PeriodicField,
    /// `Λ̃`, `n×n`, zero mean.
    pub lambda_tilde: PeriodicField,
    /// `b(D)Λ` at the cell nodes.
    pub b_lambda: PeriodicField,
    /// `b(D)Λ̃` at the cell nodes.
    pub b_lambda_tilde: PeriodicField,
    pub g_tilde: PeriodicField,
    #[serde(with = "cmat_serde")]
    pub g0: CMat,
    #[serde(with = "cmat_serde")]
    pub v: CMat,
    #[serde(with = "cmat_serde")]
    pub w: CMat,
    /// Relative residuals of the `Λ` and `Λ̃` solves.
    pub residuals: [f64; 2],
    /// Relative change of `g⁰` under grid doubling (piecewise `g` only).
    pub drift: Option<f64>,
    /// `Λ` and `Λ̃` at the grid vertices, used for off-grid evaluation.
    pub lambda_vertex: VertexField,
    pub lambda_tilde_vertex: VertexField,
}

const DRIFT_LIMIT: f64 = 1e-4;

/// Solves both cell problems and assembles `g̃`, `g⁰`, `V`, `W`.
pub fn solve_cell(c: &Coefficients) -> Result<CellSolution> {
    let lam = solve_lambda(&c.g, &c.b)?;
    let lam_t = solve_lambda_tilde(&c.g, &c.b, &c.a)?;
    let g_tilde = assemble_g_tilde(&c.g, &lam.b_field);
    let g0 = effective_matrix(&g_tilde, &c.g)?;
    let drift = match &c.g.spec {
        Some(spec) if c.g.is_piecewise() => {
            let fine = sample_field(spec, &c.lattice, 2 * c.g.grid.n, true)?;
            let fl = solve_lambda(&fine, &c.b)?;
            let g0_fine = effective_matrix(&assemble_g_tilde(&fine, &fl.b_field), &fine)?;
            let drift = (&g0_fine - &g0).norm() / g0_fine.norm();
            if drift > DRIFT_LIMIT {
                return Err(CellError::Drift { drift });
            }
            Some(drift)
        }
        _ => None,
    };
    Ok(CellSolution {
        grid_n: c.g.grid.n,
        dim: c.g.grid.d,
        v: compute_v(&lam.b_field, &lam_t.b_field, &c.g),
        w: compute_w(&lam_t.b_field, &c.g),
        lambda_vertex: VertexField::from_gradients(&lam.gradients),
        lambda_tilde_vertex: VertexField::from_gradients(&lam_t.gradients),
        lambda: lam.field,
        lambda_tilde: lam_t.field,
        b_lambda: lam.b_field,
        b_lambda_tilde: lam_t.b_field,
        g_tilde,
        g0,
        residuals: [lam.residual, lam_t.residual],
        drift,
    })
}

/// Full cell pipeline: cell solutions, shift `λ` and effective operator.
///
/// If the sampled effective symbol misses the lower bound `c_*|ξ|²` at the
/// shift found on the cell, the shift keeps doubling until it holds.
pub fn homogenize(c: &Coefficients) -> Result<(CellSolution, EffectiveOperator)> {
    let cell = solve_cell(c)?;
    let c_star = lower_symbol_constant(&c.b, &c.g)?;
    let mut lambda = choose_lambda_shift(&c.g, &c.b, &c.a, &c.q, &c.q0, c_star)?;
    loop {
        match assemble_effective(&c.b, &c.g, &cell.g0, &cell.v, &cell.w, &c.a, &c.q, &c.q0, lambda) {
            Ok(op) => return Ok((cell, op)),
            Err(CellError::Symbol { .. }) if lambda < 1.8e19 => {
                lambda = if lambda == 0.0 { 1.0 } else { 2.0 * lambda };
            }
            Err(e) => return Err(e),
        }
    }
}
