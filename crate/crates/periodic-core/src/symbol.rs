use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::linalg::{cmat_serde, hermitian_eigenvalues, CMat};
use crate::{CoreError, Result, C64};

/// The first-order symbol `b(ξ) = Σ_j b_j ξ_j` with constant `m×n` matrices `b_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolB {
    #[serde(with = "cmat_serde::vec")]
    pub b_matrices: Vec<CMat>,
    pub alpha0: f64,
    pub alpha1: f64,
}

impl SymbolB {
    pub fn new(b_matrices: Vec<CMat>) -> Result<Self> {
        let (alpha0, alpha1) = estimate_alpha(&b_matrices)?;
        Ok(Self {
            b_matrices,
            alpha0,
            alpha1,
        })
    }

    /// `b(D) = D ⊗ 1_n`: the gradient acting on `ℂⁿ`-valued functions, `m = d·n`.
    pub fn gradient(d: usize, n: usize) -> Self {
        let b = (0..d)
            .map(|j| {
                let mut m = CMat::zeros(d * n, n);
                for k in 0..n {
                    m[(j * n + k, k)] = C64::new(1.0, 0.0);
                }
                m
            })
            .collect();
        Self::new(b).expect("gradient symbol has full rank")
    }

    pub fn d(&self) -> usize {
        self.b_matrices.len()
    }

    pub fn m(&self) -> usize {
        self.b_matrices[0].nrows()
    }

    pub fn n(&self) -> usize {
        self.b_matrices[0].ncols()
    }

    pub fn at(&self, xi: &[f64]) -> CMat {
        let mut acc = CMat::zeros(self.m(), self.n());
        for (bj, &x) in self.b_matrices.iter().zip(xi) {
            acc += bj * C64::new(x, 0.0);
        }
        acc
    }
}

fn unit_directions(d: usize) -> Vec<Vec<f64>> {
    match d {
        1 => vec![vec![1.0]],
        2 => (0..360)
            .map(|k| {
                let t = k as f64 * PI / 180.0;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        _ => {
            let mut out = Vec::new();
            for p in 0..=36 {
                let theta = p as f64 * 5.0 * PI / 180.0;
                for a in 0..72 {
                    let phi = a as f64 * 5.0 * PI / 180.0;
                    out.push(vec![theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]);
                }
            }
            out
        }
    }
}

/// Extreme eigenvalues of `b(θ)*b(θ)` over sampled unit directions
/// (1° in d=2, 5° in d=3, exact in d=1).
pub fn estimate_alpha(b_matrices: &[CMat]) -> Result<(f64, f64)> {
    let d = b_matrices.len();
    if !(1..=3).contains(&d) {
        return Err(CoreError::Dimension(d));
    }
    let (m, n) = (b_matrices[0].nrows(), b_matrices[0].ncols());
    if b_matrices.iter().any(|b| b.nrows() != m || b.ncols() != n) {
        return Err(CoreError::Shape("all b_j must share one m×n shape".into()));
    }
    if m < n {
        return Err(CoreError::Shape(format!("need m ⩾ n, got m={m}, n={n}")));
    }
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for theta in unit_directions(d) {
        let mut bt = CMat::zeros(m, n);
        for (bj, &t) in b_matrices.iter().zip(&theta) {
            bt += bj * C64::new(t, 0.0);
        }
        let ev = hermitian_eigenvalues(&(bt.adjoint() * &bt));
        lo = lo.min(ev[0]);
        hi = hi.max(*ev.last().unwrap());
    }
    if lo <= 1e-12 {
        return Err(CoreError::Rank(lo));
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn col(v: &[f64]) -> CMat {
        CMat::from_iterator(v.len(), 1, v.iter().map(|&x| C64::new(x, 0.0)))
    }

    #[test]
    fn gradient_symbol_is_isometric() {
        for d in 1..=3 {
            let b = SymbolB::gradient(d, 1);
            assert_abs_diff_eq!(b.alpha0, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(b.alpha1, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn anisotropic_column_symbol() {
        let (a0, a1) = estimate_alpha(&[col(&[1.0, 0.0]), col(&[0.0, 2.0])]).unwrap();
        assert_abs_diff_eq!(a0, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a1, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn rank_deficient_symbol_rejected() {
        let r = estimate_alpha(&[col(&[1.0, 0.0]), col(&[0.0, 0.0])]);
        assert!(matches!(r, Err(CoreError::Rank(_))));
    }
}
