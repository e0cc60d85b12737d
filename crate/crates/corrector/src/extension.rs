use periodic_core::{BoxGrid, GridFunction};
use serde::{Deserialize, Serialize};

use crate::{CorrectorError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtensionRule {
    /// `ũ(−s) = 3u(s) − 2u(2s)` across each face: `C¹` for `C¹` data.
    Hestenes,
}

/// `u` continued to a box enlarged by `margin` nodes on every face.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtendedFunction {
    pub u: GridFunction,
    pub margin: usize,
    pub rule: ExtensionRule,
}

impl ExtendedFunction {
    pub fn restrict(&self, grid: &BoxGrid) -> GridFunction {
        self.u.restrict(grid)
    }
}

/// Nodes of margin needed by the smoothing window `ε/2` plus two for the
/// difference stencils; `ε/h` must be an even integer.
pub fn required_margin(epsilon: f64, h: f64) -> Result<usize> {
    let r = epsilon / h;
    let k = r.round();
    if (r - k).abs() > 1e-8 * r || k as usize % 2 != 0 || k < 2.0 {
        return Err(CorrectorError::Margin(format!("ε/h = {r} must be an even integer")));
    }
    Ok(k as usize / 2 + 2)
}

fn extend_axis(u: &GridFunction, axis: usize, margin: usize) -> Result<GridFunction> {
    let g = &u.grid;
    let n = g.dims[axis];
    if 2 * margin > n - 1 {
        return Err(CorrectorError::Margin(format!(
            "margin of {margin} nodes needs at least {} nodes along axis {axis}, have {n}",
            2 * margin + 1
        )));
    }
    let mut dims = g.dims.clone();
    dims[axis] += 2 * margin;
    let mut lower = g.lower.clone();
    lower[axis] -= margin as f64 * g.h;
    let grid = BoxGrid { lower, h: g.h, dims };
    let nc = u.ncomp;
    let mut out = GridFunction::zeros(grid.clone(), nc);
    let last = (n - 1) as i64;
    for idx in 0..grid.len() {
        let mut k = grid.multi_index(idx);
        let s = k[axis] as i64 - margin as i64;
        let terms: [(i64, f64); 2] = if s < 0 {
            [(-s, 3.0), (-2 * s, -2.0)]
        } else if s > last {
            let t = s - last;
            [(last - t, 3.0), (last - 2 * t, -2.0)]
        } else {
            [(s, 1.0), (s, 0.0)]
        };
        for (pos, w) in terms {
            if w == 0.0 {
                continue;
            }
            k[axis] = pos as usize;
            let src = g.flat_index(&k);
            for c in 0..nc {
                out.values[idx * nc + c] += u.values[src * nc + c] * w;
            }
        }
    }
    Ok(out)
}

/// Extends `u` by `margin` nodes across every face, one axis at a time.
/// Linear in `u`, and the restriction to the original box is `u` itself.
pub fn extend(u: &GridFunction, margin: usize) -> Result<ExtendedFunction> {
    let mut cur = u.clone();
    for axis in 0..u.grid.d() {
        cur = extend_axis(&cur, axis, margin)?;
    }
    Ok(ExtendedFunction {
        u: cur,
        margin,
        rule: ExtensionRule::Hestenes,
    })
}

/// Discrete `H²` norm from nodal values, differences and second differences
/// (centred, one-sided at the ends).
pub fn discrete_h2_norm(u: &GridFunction) -> f64 {
    let d = u.grid.d();
    let mut total = u.l2_norm().powi(2);
    for j in 0..d {
        let dj = u.difference(j);
        total += dj.l2_norm().powi(2);
        for l in 0..d {
            total += dj.difference(l).l2_norm().powi(2);
        }
    }
    total.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use periodic_core::C64;

    fn line(n: usize, f: impl Fn(f64) -> f64) -> GridFunction {
        let grid = BoxGrid {
            lower: vec![0.0],
            h: 1.0 / (n - 1) as f64,
            dims: vec![n],
        };
        GridFunction::from_fn(grid, 1, |x| vec![C64::new(f(x[0]), 0.0)])
    }

    #[test]
    fn quadratics_reflect_to_c1() {
        // ũ(−s) = 3u(s) − 2u(2s) matches value and slope of u at 0
        let u = line(33, |x| 1.0 + 2.0 * x - x * x);
        let e = extend(&u, 8).unwrap();
        let h = u.grid.h;
        let at = |k: usize| e.u.values[k].re;
        let left = (at(8) - at(7)) / h;
        let right = (at(9) - at(8)) / h;
        // one-sided slopes differ by (5 + 1)h|u''|/2 = 6h
        assert!((left - right).abs() < 6.0 * h + 1e-9);
    }

    #[test]
    fn margin_must_fit() {
        let u = line(9, |x| x);
        assert!(extend(&u, 4).is_ok());
        assert!(extend(&u, 5).is_err());
        assert!(required_margin(1.0 / 16.0, 1.0 / 256.0).unwrap() == 10);
        assert!(required_margin(1.0 / 16.0, 1.0 / 272.0).is_err());
    }
}
