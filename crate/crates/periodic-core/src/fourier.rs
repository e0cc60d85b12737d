//! Cell-centred periodic grids and their discrete Fourier transforms.

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::C64;

/// A uniform periodic grid with `n` nodes per axis in `d` dimensions.
/// Node `k` sits at `(k + 1/2)/n` in lattice coordinates; axis 0 varies fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellGrid {
    pub d: usize,
    pub n: usize,
}

impl CellGrid {
    pub fn new(d: usize, n: usize) -> Self {
        Self { d, n }
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.d];
        for k in out.iter_mut() {
            *k = idx % self.n;
            idx /= self.n;
        }
        out
    }

    pub fn flat_index(&self, k: &[usize]) -> usize {
        k.iter().rev().fold(0, |acc, &kj| acc * self.n + kj)
    }

    /// Lattice coordinates of node `idx`.
    pub fn node(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .iter()
            .map(|&k| (k as f64 + 0.5) / self.n as f64)
            .collect()
    }

    /// Signed frequency of FFT index `k` (the Nyquist index maps to `+n/2`).
    pub fn freq(&self, k: usize) -> i64 {
        if k <= self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    pub fn freqs(&self, idx: usize) -> Vec<i64> {
        self.multi_index(idx).iter().map(|&k| self.freq(k)).collect()
    }

    pub fn is_nyquist(&self, idx: usize) -> bool {
        self.n % 2 == 0 && self.multi_index(idx).iter().any(|&k| k == self.n / 2)
    }
}

/// In-place unnormalised FFT over all axes of a `d`-dimensional array with
/// `n` points per axis (axis 0 contiguous).
pub fn fft_nd(data: &mut [C64], grid: CellGrid, inverse: bool) {
    let n = grid.n;
    assert_eq!(data.len(), grid.len());
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let mut line = vec![C64::new(0.0, 0.0); n];
    let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for axis in 0..grid.d {
        let stride = n.pow(axis as u32);
        let block = stride * n;
        for outer in (0..data.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (j, v) in line.iter_mut().enumerate() {
                    *v = data[base + j * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, v) in line.iter().enumerate() {
                    data[base + j * stride] = *v;
                }
            }
        }
    }
}

/// Fourier coefficients `c_k` of nodal samples, so that
/// `f(y_j) = Σ_k c_k e^{2πi k·y_j}` at the cell-centred nodes.
pub fn to_modes(values: &[C64], grid: CellGrid) -> Vec<C64> {
    let mut c = values.to_vec();
    fft_nd(&mut c, grid, false);
    let scale = 1.0 / grid.len() as f64;
    for (idx, v) in c.iter_mut().enumerate() {
        let s: i64 = grid.freqs(idx).iter().sum();
        let phase = -PI * s as f64 / grid.n as f64;
        *v *= C64::from_polar(scale, phase);
    }
    c
}

/// Nodal values from Fourier coefficients (inverse of [`to_modes`]).
pub fn from_modes(modes: &[C64], grid: CellGrid) -> Vec<C64> {
    let mut v: Vec<C64> = modes
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            let s: i64 = grid.freqs(idx).iter().sum();
            c * C64::from_polar(1.0, PI * s as f64 / grid.n as f64)
        })
        .collect();
    fft_nd(&mut v, grid, true);
    v
}

/// Nodal values of the partial derivative `∂_axis f` of the trigonometric
/// interpolant of `values` (Nyquist modes dropped).
pub fn spectral_derivative(values: &[C64], grid: CellGrid, axis: usize) -> Vec<C64> {
    let mut c = to_modes(values, grid);
    for (idx, v) in c.iter_mut().enumerate() {
        if grid.is_nyquist(idx) {
            *v = C64::new(0.0, 0.0);
        } else {
            let k = grid.freqs(idx)[axis] as f64;
            *v *= C64::new(0.0, 2.0 * PI * k);
        }
    }
    from_modes(&c, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn modes_round_trip_2d() {
        let grid = CellGrid::new(2, 8);
        let vals: Vec<C64> = (0..grid.len())
            .map(|i| C64::new((i as f64).sin(), (3.0 * i as f64).cos()))
            .collect();
        let back = from_modes(&to_modes(&vals, grid), grid);
        for (a, b) in vals.iter().zip(&back) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn single_cosine_has_two_modes() {
        let grid = CellGrid::new(1, 16);
        let vals: Vec<C64> = (0..16)
            .map(|i| C64::new((2.0 * PI * grid.node(i)[0]).cos(), 0.0))
            .collect();
        let c = to_modes(&vals, grid);
        assert_abs_diff_eq!(c[1].re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(c[15].re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(c[0].norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn derivative_of_sine() {
        let grid = CellGrid::new(1, 32);
        let vals: Vec<C64> = (0..32)
            .map(|i| C64::new((2.0 * PI * grid.node(i)[0]).sin(), 0.0))
            .collect();
        let d = spectral_derivative(&vals, grid, 0);
        for (i, v) in d.iter().enumerate() {
            let y = grid.node(i)[0];
            assert_abs_diff_eq!(v.re, 2.0 * PI * (2.0 * PI * y).cos(), epsilon = 1e-12);
        }
    }
}
