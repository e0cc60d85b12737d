//! Functions on uniform box grids and the Steklov smoothing operator
//! `(S_ε u)(x) = |Ω|⁻¹ ∫_Ω u(x − εz) dz`.

use serde::{Deserialize, Serialize};

use crate::lattice::Lattice;
use crate::{CoreError, Result, C64};

/// Uniform node grid on an axis-aligned box: `dims[j]` nodes along axis `j`
/// starting at `lower[j]` with spacing `h` (axis 0 fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxGrid {
    pub lower: Vec<f64>,
    pub h: f64,
    pub dims: Vec<usize>,
}

impl BoxGrid {
    pub fn d(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.dims[..axis].iter().product()
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        self.dims
            .iter()
            .map(|&n| {
                let k = idx % n;
                idx /= n;
                k
            })
            .collect()
    }

    pub fn flat_index(&self, k: &[usize]) -> usize {
        k.iter().zip(&self.dims).rev().fold(0, |acc, (&kj, &n)| acc * n + kj)
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .iter()
            .zip(&self.lower)
            .map(|(&k, &lo)| lo + k as f64 * self.h)
            .collect()
    }

    /// Sub-grid obtained by dropping `cut[j]` nodes at both ends of axis `j`.
    pub fn shrink(&self, cut: &[usize]) -> Option<BoxGrid> {
        let dims: Option<Vec<usize>> = self
            .dims
            .iter()
            .zip(cut)
            .map(|(&n, &c)| n.checked_sub(2 * c).filter(|&m| m > 0))
            .collect();
        Some(BoxGrid {
            lower: self.lower.iter().zip(cut).map(|(&lo, &c)| lo + c as f64 * self.h).collect(),
            h: self.h,
            dims: dims?,
        })
    }
}

/// `ncomp` complex components per node of a [`BoxGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub grid: BoxGrid,
    pub ncomp: usize,
    pub values: Vec<C64>,
}

impl GridFunction {
    pub fn zeros(grid: BoxGrid, ncomp: usize) -> Self {
        let len = grid.len() * ncomp;
        Self {
            grid,
            ncomp,
            values: vec![C64::new(0.0, 0.0); len],
        }
    }

    pub fn from_fn(grid: BoxGrid, ncomp: usize, f: impl Fn(&[f64]) -> Vec<C64>) -> Self {
        let mut values = Vec::with_capacity(grid.len() * ncomp);
        for idx in 0..grid.len() {
            let v = f(&grid.point(idx));
            assert_eq!(v.len(), ncomp);
            values.extend(v);
        }
        Self { grid, ncomp, values }
    }

    pub fn get(&self, node: usize, comp: usize) -> C64 {
        self.values[node * self.ncomp + comp]
    }

    /// Restriction to a sub-grid with the same spacing whose nodes are nodes of this grid.
    pub fn restrict(&self, sub: &BoxGrid) -> GridFunction {
        let offs: Vec<usize> = sub
            .lower
            .iter()
            .zip(&self.grid.lower)
            .map(|(&a, &b)| ((a - b) / self.grid.h).round() as usize)
            .collect();
        let mut out = GridFunction::zeros(sub.clone(), self.ncomp);
        for idx in 0..sub.len() {
            let k: Vec<usize> = sub.multi_index(idx).iter().zip(&offs).map(|(a, b)| a + b).collect();
            let src = self.grid.flat_index(&k);
            for c in 0..self.ncomp {
                out.values[idx * self.ncomp + c] = self.values[src * self.ncomp + c];
            }
        }
        out
    }

    /// Discrete `∂_axis u`: second-order centred differences, second-order
    /// one-sided at the two ends of the axis.
    pub fn difference(&self, axis: usize) -> GridFunction {
        let g = &self.grid;
        let n = g.dims[axis];
        assert!(n >= 3, "need at least three nodes along the axis");
        let stride = g.stride(axis);
        let nc = self.ncomp;
        let inv = 1.0 / g.h;
        let mut out = GridFunction::zeros(g.clone(), nc);
        for idx in 0..g.len() {
            let k = (idx / stride) % n;
            for c in 0..nc {
                let at = |j: usize| self.values[(idx - k * stride + j * stride) * nc + c];
                let v = if k == 0 {
                    (-3.0 * at(0) + 4.0 * at(1) - at(2)) * (0.5 * inv)
                } else if k == n - 1 {
                    (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) * (0.5 * inv)
                } else {
                    (at(k + 1) - at(k - 1)) * (0.5 * inv)
                };
                out.values[idx * nc + c] = v;
            }
        }
        out
    }

    pub fn l2_norm(&self) -> f64 {
        let cell = self.grid.h.powi(self.grid.d() as i32);
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * cell).sqrt()
    }
}

/// Steklov smoothing on the unit cubic lattice by the tensor-product
/// trapezoid rule over `ε/h + 1` nodes per axis.
///
/// The result lives on the nodes whose full averaging window lies inside the
/// input grid; callers extend `u` beyond the region of interest first.
pub fn steklov_smooth(u: &GridFunction, eps: f64, lattice: &Lattice) -> Result<GridFunction> {
    if !lattice.is_cubic() {
        return Err(CoreError::Lattice("smoothing is implemented for the cubic lattice only".into()));
    }
    let h = u.grid.h;
    if h > eps / 8.0 * (1.0 + 1e-12) {
        return Err(CoreError::Grid(format!("grid too coarse: h = {h} > ε/8 = {}", eps / 8.0)));
    }
    let ratio = eps / h;
    let r = ratio.round() as usize;
    if (ratio - r as f64).abs() > 1e-8 || r % 2 != 0 {
        return Err(CoreError::Grid(format!("ε/h = {ratio} must be an even integer")));
    }
    let half = r / 2;
    let mut weights = vec![1.0 / r as f64; r + 1];
    weights[0] *= 0.5;
    weights[r] *= 0.5;

    let mut cur = u.clone();
    for axis in 0..u.grid.d() {
        let mut cut = vec![0; u.grid.d()];
        cut[axis] = half;
        let sub = cur
            .grid
            .shrink(&cut)
            .ok_or_else(|| CoreError::Grid("grid smaller than the smoothing window".into()))?;
        let stride_in = cur.grid.stride(axis);
        let nc = cur.ncomp;
        let mut out = GridFunction::zeros(sub.clone(), nc);
        for idx in 0..sub.len() {
            let mut k = sub.multi_index(idx);
            k[axis] += half;
            let centre = cur.grid.flat_index(&k);
            for c in 0..nc {
                let mut acc = C64::new(0.0, 0.0);
                for (t, w) in weights.iter().enumerate() {
                    let src = centre + t * stride_in - half * stride_in;
                    acc += cur.values[src * nc + c] * *w;
                }
                out.values[idx * nc + c] = acc;
            }
        }
        cur = out;
    }
    Ok(cur)
}
