//! Effective coefficients `g̃`, `g⁰`, `V`, `W` and the effective operator.

use periodic_core::linalg::{cmat_serde, hermitian_eigenvalues, hermitian_part, loewner_le, spectral_norm};
use periodic_core::{cell_mean, harmonic_mean, CMat, PeriodicField, SymbolB, C64};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::{CellError, Result};

/// `g̃ = g (b(D)Λ + 1_m)` from the nodal values of `b(D)Λ`.
pub fn assemble_g_tilde(g: &PeriodicField, b_lambda: &PeriodicField) -> PeriodicField {
    let m = g.rows;
    let id = CMat::identity(m, m);
    let shifted = b_lambda.map(m, m, |w| w + &id);
    g.mul(&shifted)
}

/// `g⁰ = mean(g̃)`, checked against the Voigt–Reuss bracket of `g`.
pub fn effective_matrix(g_tilde: &PeriodicField, g: &PeriodicField) -> Result<CMat> {
    let g0 = hermitian_part(&cell_mean(g_tilde));
    let upper = cell_mean(g);
    let lower = harmonic_mean(g)?;
    let tol = 1e-8 * spectral_norm(&upper).max(1.0);
    if !loewner_le(&lower, &g0, tol) || !loewner_le(&g0, &upper, tol) {
        return Err(CellError::VoigtReuss);
    }
    Ok(g0)
}

/// `V = mean((b(D)Λ)* g b(D)Λ̃)`, an `m×n` matrix.
pub fn compute_v(b_lambda: &PeriodicField, b_lambda_tilde: &PeriodicField, g: &PeriodicField) -> CMat {
    cell_mean(&b_lambda.adjoint().mul(g).mul(b_lambda_tilde))
}

/// `W = mean((b(D)Λ̃)* g b(D)Λ̃)`, Hermitian and nonnegative.
pub fn compute_w(b_lambda_tilde: &PeriodicField, g: &PeriodicField) -> CMat {
    hermitian_part(&cell_mean(&b_lambda_tilde.adjoint().mul(g).mul(b_lambda_tilde)))
}

/// Constant coefficients of the effective operator `B⁰`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EffectiveOperator {
    pub b: SymbolB,
    #[serde(with = "cmat_serde")]
    pub g0: CMat,
    #[serde(with = "cmat_serde")]
    pub v: CMat,
    #[serde(with = "cmat_serde")]
    pub w: CMat,
    /// Means of `a_j + a_j*`.
    #[serde(with = "cmat_serde::vec")]
    pub a_mean: Vec<CMat>,
    /// Means of `a_j` themselves (the first-order part of `B⁰` is `Σ ā_j D_j + D_j ā_j*`).
    #[serde(with = "cmat_serde::vec")]
    pub a_bar: Vec<CMat>,
    #[serde(with = "cmat_serde")]
    pub q_mean: CMat,
    #[serde(with = "cmat_serde")]
    pub q0_mean: CMat,
    pub lambda_shift: f64,
    /// Lower symbol constant `¼α₀‖g⁻¹‖⁻¹`.
    pub c_star: f64,
    /// Smallest `C_L` with `L(ξ) ⩽ C_L(|ξ|² + 1)` on the sampled `ξ`.
    pub c_upper: f64,
}

impl EffectiveOperator {
    pub fn d(&self) -> usize {
        self.b.d()
    }

    pub fn n(&self) -> usize {
        self.b.n()
    }

    /// `L(ξ) = b(ξ)*g⁰b(ξ) − b(ξ)*V − V*b(ξ) + Σ_j mean(a_j + a_j*)ξ_j + Q̄ − W + λQ̄₀`.
    pub fn symbol(&self, xi: &[f64]) -> CMat {
        let bx = self.b.at(xi);
        let mut l = bx.adjoint() * &self.g0 * &bx - bx.adjoint() * &self.v - self.v.adjoint() * &bx;
        for (aj, &x) in self.a_mean.iter().zip(xi) {
            l += aj * C64::new(x, 0.0);
        }
        l += &self.q_mean - &self.w + &self.q0_mean * C64::new(self.lambda_shift, 0.0);
        l
    }

    /// Zeroth-order coefficient `Q̄ − W + λQ̄₀`.
    pub fn potential(&self) -> CMat {
        &self.q_mean - &self.w + &self.q0_mean * C64::new(self.lambda_shift, 0.0)
    }
}

fn sample_directions(d: usize) -> Vec<Vec<f64>> {
    match d {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..72)
            .map(|k| {
                let t = k as f64 * PI / 36.0;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        _ => {
            let mut out = Vec::new();
            for p in 0..=12 {
                let th = p as f64 * PI / 12.0;
                for a in 0..24 {
                    let ph = a as f64 * PI / 12.0;
                    out.push(vec![th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]);
                }
            }
            out
        }
    }
}

/// Largest `min eig L(ξ) / |ξ|²` margin violation over `|ξ| ∈ {1, 10}`;
/// returns `(min over ξ of λ_min(L)/|ξ|², max over ξ of λ_max(L)/(|ξ|²+1))`.
pub(crate) fn symbol_extremes(op: &EffectiveOperator) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for dir in sample_directions(op.d()) {
        for r in [1.0, 10.0] {
            let xi: Vec<f64> = dir.iter().map(|t| t * r).collect();
            let ev = hermitian_eigenvalues(&hermitian_part(&op.symbol(&xi)));
            lo = lo.min(ev[0] / (r * r));
            hi = hi.max(*ev.last().unwrap() / (r * r + 1.0));
        }
    }
    (lo, hi)
}

/// Builds `B⁰` from the cell data and checks `c_*|ξ|² ⩽ L(ξ)` on sampled `ξ`.
#[allow(clippy::too_many_arguments)]
pub fn assemble_effective(
    b: &SymbolB,
    g: &PeriodicField,
    g0: &CMat,
    v: &CMat,
    w: &CMat,
    a: &[PeriodicField],
    q: &PeriodicField,
    q0: &PeriodicField,
    lambda_shift: f64,
) -> Result<EffectiveOperator> {
    let c_star = lower_symbol_constant(b, g)?;
    let a_bar: Vec<CMat> = a.iter().map(cell_mean).collect();
    let op = EffectiveOperator {
        b: b.clone(),
        g0: g0.clone(),
        v: v.clone(),
        w: w.clone(),
        a_mean: a_bar.iter().map(|m| m + m.adjoint()).collect(),
        a_bar,
        q_mean: hermitian_part(&cell_mean(q)),
        q0_mean: hermitian_part(&cell_mean(q0)),
        lambda_shift,
        c_star,
        c_upper: 0.0,
    };
    let (lo, hi) = symbol_extremes(&op);
    if lo < c_star * (1.0 - 1e-9) {
        return Err(CellError::Symbol { c_star, found: lo });
    }
    Ok(EffectiveOperator { c_upper: hi, ..op })
}

/// `c_* = ¼ α₀ ‖g⁻¹‖_∞⁻¹`.
pub fn lower_symbol_constant(b: &SymbolB, g: &PeriodicField) -> Result<f64> {
    Ok(0.25 * b.alpha0 / g.inverse_sup_norm()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use periodic_core::{make_cubic_lattice, sample_field, FieldSpec};

    #[test]
    fn constant_g_passes_through() {
        let l = make_cubic_lattice(2).unwrap();
        let g = sample_field(&FieldSpec::scalar_constant(2, 2.5), &l, 8, true).unwrap();
        let zero = PeriodicField::zeros(g.grid, 2, 2);
        let gt = assemble_g_tilde(&g, &zero);
        let g0 = effective_matrix(&gt, &g).unwrap();
        assert!((g0 - CMat::identity(2, 2) * C64::new(2.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn bracket_violation_is_reported() {
        let l = make_cubic_lattice(1).unwrap();
        let g = sample_field(&FieldSpec::expr(1, "2 + sin(2*pi*x1)"), &l, 16, true).unwrap();
        let bogus = PeriodicField::constant(g.grid, &(CMat::identity(1, 1) * C64::new(5.0, 0.0)));
        assert!(matches!(effective_matrix(&bogus, &g), Err(CellError::VoigtReuss)));
    }

    #[test]
    fn symbol_without_lower_order_terms() {
        let l = make_cubic_lattice(2).unwrap();
        let g = sample_field(&FieldSpec::scalar_constant(2, 2.0), &l, 8, true).unwrap();
        let b = SymbolB::gradient(2, 1);
        let zero_a = vec![PeriodicField::zeros(g.grid, 1, 1); 2];
        let q = PeriodicField::zeros(g.grid, 1, 1);
        let q0 = sample_field(&FieldSpec::scalar_constant(1, 1.0), &l, 8, true).unwrap();
        let g0 = CMat::identity(2, 2) * C64::new(2.0, 0.0);
        let op = assemble_effective(&b, &g, &g0, &CMat::zeros(2, 1), &CMat::zeros(1, 1), &zero_a, &q, &q0, 3.0).unwrap();
        let l = op.symbol(&[1.0, 2.0]);
        assert!((l[(0, 0)] - C64::new(2.0 * 5.0 + 3.0, 0.0)).norm() < 1e-12);
        assert!((op.c_star - 0.5).abs() < 1e-14);
    }
}
