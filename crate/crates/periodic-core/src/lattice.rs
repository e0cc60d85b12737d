use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::{CoreError, Result};

/// A lattice `Γ` in `ℝ^d` with its basic cell `Ω`.
///
/// `r0` is half the length of the shortest nonzero dual vector and `r1` is
/// half the diameter of the cell spanned by the basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub basis: Vec<Vec<f64>>,
    pub cell_volume: f64,
    pub r0: f64,
    pub r1: f64,
}

fn basis_matrix(basis: &[Vec<f64>]) -> DMatrix<f64> {
    let d = basis.len();
    // columns are the basis vectors
    DMatrix::from_fn(d, d, |i, j| basis[j][i])
}

/// Every vector `Σ c_j v_j` with `c_j ∈ {-r..=r}`, excluding zero.
fn small_combinations(vectors: &DMatrix<f64>, r: i64) -> Vec<Vec<f64>> {
    let d = vectors.ncols();
    let width = (2 * r + 1) as usize;
    let total = width.pow(d as u32);
    let mut out = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rem = idx;
        let mut coeffs = vec![0i64; d];
        for c in coeffs.iter_mut() {
            *c = (rem % width) as i64 - r;
            rem /= width;
        }
        if coeffs.iter().all(|&c| c == 0) {
            continue;
        }
        let v: Vec<f64> = (0..d)
            .map(|i| (0..d).map(|j| coeffs[j] as f64 * vectors[(i, j)]).sum())
            .collect();
        out.push(v);
    }
    out
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl Lattice {
    pub fn new(basis: Vec<Vec<f64>>) -> Result<Self> {
        let d = basis.len();
        if !(1..=3).contains(&d) {
            return Err(CoreError::Dimension(d));
        }
        if basis.iter().any(|v| v.len() != d) {
            return Err(CoreError::Lattice("basis vectors must have length d".into()));
        }
        let a = basis_matrix(&basis);
        let det = a.determinant();
        if det.abs() < 1e-14 {
            return Err(CoreError::Lattice("basis vectors are linearly dependent".into()));
        }
        let dual = a
            .clone()
            .try_inverse()
            .ok_or_else(|| CoreError::Lattice("singular basis".into()))?
            .transpose()
            * (2.0 * PI);
        let r0 = small_combinations(&dual, 2)
            .iter()
            .map(|v| norm(v))
            .fold(f64::INFINITY, f64::min)
            / 2.0;
        // vertex differences of the parallelepiped have coefficients in {-1, 0, 1}
        let r1 = small_combinations(&a, 1)
            .iter()
            .map(|v| norm(v))
            .fold(0.0, f64::max)
            / 2.0;
        Ok(Self {
            basis,
            cell_volume: det.abs(),
            r0,
            r1,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Dual basis `b_i` with `⟨b_i, a_j⟩ = 2π δ_ij`.
    pub fn dual_basis(&self) -> Vec<Vec<f64>> {
        let a = basis_matrix(&self.basis);
        let dual = a.try_inverse().expect("validated basis").transpose() * (2.0 * PI);
        (0..self.dim())
            .map(|j| (0..self.dim()).map(|i| dual[(i, j)]).collect())
            .collect()
    }

    pub fn is_cubic(&self) -> bool {
        let d = self.dim();
        (0..d).all(|i| {
            (0..d).all(|j| {
                let target = if i == j { 1.0 } else { 0.0 };
                (self.basis[i][j] - target).abs() < 1e-14
            })
        })
    }

    /// Physical point `x = Σ y_j a_j` from lattice coordinates `y`.
    pub fn to_physical(&self, y: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|i| (0..d).map(|j| y[j] * self.basis[j][i]).sum())
            .collect()
    }

    /// Lattice coordinates of a physical point.
    pub fn to_lattice(&self, x: &[f64]) -> Vec<f64> {
        if self.is_cubic() {
            return x.to_vec();
        }
        let a = basis_matrix(&self.basis);
        let inv = a.try_inverse().expect("validated basis");
        let d = self.dim();
        (0..d)
            .map(|i| (0..d).map(|j| inv[(i, j)] * x[j]).sum())
            .collect()
    }
}

/// The unit cubic lattice `ℤ^d` with cell `[0, 1)^d`.
pub fn make_cubic_lattice(d: usize) -> Result<Lattice> {
    if !(1..=3).contains(&d) {
        return Err(CoreError::Dimension(d));
    }
    let basis = (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    Lattice::new(basis)
}
