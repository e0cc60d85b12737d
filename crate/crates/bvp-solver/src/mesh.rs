use periodic_core::BoxGrid;
use serde::{Deserialize, Serialize};

use crate::{BvpError, Result};

/// Uniform tensor mesh of an interval or rectangle with multilinear elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainMesh {
    /// All nodes, boundary included.
    pub grid: BoxGrid,
    /// `δ = dist(O', ∂O)` when an interior subdomain is carved out.
    pub interior_margin: Option<f64>,
    /// Nodes of `O'`.
    pub inner: Option<BoxGrid>,
}

/// Number of whole steps of `h` in `len`, if `len` is a multiple of `h`.
pub(crate) fn steps(len: f64, h: f64) -> Option<usize> {
    let r = len / h;
    let k = r.round();
    ((r - k).abs() <= 1e-9 * r.max(1.0) && k >= 1.0).then_some(k as usize)
}

pub fn build_mesh(domain: &[[f64; 2]], h: f64, interior_margin: Option<f64>) -> Result<DomainMesh> {
    let d = domain.len();
    if !(1..=2).contains(&d) {
        return Err(BvpError::Mesh(format!("boundary value problems need d ⩽ 2, got {d}")));
    }
    if !(h > 0.0) {
        return Err(BvpError::Mesh(format!("mesh spacing must be positive, got {h}")));
    }
    let mut dims = Vec::with_capacity(d);
    for &[lo, hi] in domain {
        let cells = steps(hi - lo, h).ok_or_else(|| BvpError::Mesh(format!("h = {h} does not divide the edge [{lo}, {hi}]")))?;
        if cells < 2 {
            return Err(BvpError::Mesh("need at least two cells per axis".into()));
        }
        dims.push(cells + 1);
    }
    let grid = BoxGrid {
        lower: domain.iter().map(|iv| iv[0]).collect(),
        h,
        dims,
    };
    let inner = match interior_margin {
        None => None,
        Some(delta) => {
            let k = steps(delta, h).ok_or_else(|| BvpError::Mesh(format!("margin δ = {delta} is not a multiple of h = {h}")))?;
            if k < 2 {
                return Err(BvpError::Mesh(format!("margin δ = {delta} must be at least 2h")));
            }
            Some(
                grid.shrink(&vec![k; d])
                    .filter(|g| g.dims.iter().all(|&n| n >= 2))
                    .ok_or_else(|| BvpError::Mesh("interior margin leaves no subdomain".into()))?,
            )
        }
    };
    Ok(DomainMesh {
        grid,
        interior_margin,
        inner,
    })
}

impl DomainMesh {
    pub fn d(&self) -> usize {
        self.grid.d()
    }

    pub fn h(&self) -> f64 {
        self.grid.h
    }

    pub fn node_count(&self) -> usize {
        self.grid.len()
    }

    /// Cells per axis.
    pub fn cells(&self) -> Vec<usize> {
        self.grid.dims.iter().map(|n| n - 1).collect()
    }

    pub fn element_count(&self) -> usize {
        self.cells().iter().product()
    }

    pub fn domain(&self) -> Vec<[f64; 2]> {
        self.grid
            .lower
            .iter()
            .zip(&self.grid.dims)
            .map(|(&lo, &n)| [lo, lo + (n - 1) as f64 * self.grid.h])
            .collect()
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        let mut idx = node;
        for &n in &self.grid.dims {
            let k = idx % n;
            if k == 0 || k == n - 1 {
                return true;
            }
            idx /= n;
        }
        false
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&k| !self.is_boundary(k)).collect()
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&k| self.is_boundary(k)).collect()
    }

    /// Lower-left node of element `e` (elements numbered like nodes, axis 0 fastest).
    pub fn element_origin(&self, e: usize) -> usize {
        let cells = self.cells();
        let mut idx = e;
        let mut node = 0;
        let mut stride = 1;
        for (j, &c) in cells.iter().enumerate() {
            node += (idx % c) * stride;
            idx /= c;
            stride *= self.grid.dims[j];
        }
        node
    }

    /// The `2^d` nodes of element `e`; local node `a` has offset bit `j` along axis `j`.
    pub fn element_nodes(&self, e: usize) -> Vec<usize> {
        let o = self.element_origin(e);
        (0..1usize << self.d())
            .map(|a| o + (0..self.d()).filter(|j| a >> j & 1 == 1).map(|j| self.grid.stride(j)).sum::<usize>())
            .collect()
    }

    /// Per-axis element index ranges `[lo, hi)` covering `O'`, or all of `O`.
    pub fn element_ranges(&self, inner_only: bool) -> Result<Vec<(usize, usize)>> {
        let cells = self.cells();
        if !inner_only {
            return Ok(cells.iter().map(|&c| (0, c)).collect());
        }
        let inner = self
            .inner
            .as_ref()
            .ok_or_else(|| BvpError::Mesh("no interior subdomain on this mesh".into()))?;
        Ok(inner
            .lower
            .iter()
            .zip(&self.grid.lower)
            .zip(&inner.dims)
            .map(|((&a, &b), &n)| {
                let off = ((a - b) / self.grid.h).round() as usize;
                (off, off + n - 1)
            })
            .collect())
    }

    /// Elements inside the given per-axis ranges.
    pub fn elements_in(&self, ranges: &[(usize, usize)]) -> Vec<usize> {
        let cells = self.cells();
        let mut out = Vec::new();
        match ranges.len() {
            1 => out.extend(ranges[0].0..ranges[0].1),
            _ => {
                for i1 in ranges[1].0..ranges[1].1 {
                    for i0 in ranges[0].0..ranges[0].1 {
                        out.push(i1 * cells[0] + i0);
                    }
                }
            }
        }
        out
    }

    /// Physical coordinates of the lower corner of element `e`.
    pub fn element_corner(&self, e: usize) -> Vec<f64> {
        self.grid.point(self.element_origin(e))
    }

    /// Per-axis index of element `e`.
    pub fn element_index(&self, e: usize) -> Vec<usize> {
        let mut idx = e;
        self.cells()
            .iter()
            .map(|&c| {
                let k = idx % c;
                idx /= c;
                k
            })
            .collect()
    }
}
