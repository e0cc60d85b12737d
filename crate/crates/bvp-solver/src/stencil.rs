//! Nine-point (three-point in 1D) block stencil storage for the stiffness and
//! `Q₀`-mass matrices. Rows exist for interior nodes only; columns may refer to
//! boundary nodes, which keeps the Dirichlet lifting available.

use periodic_core::C64;
use serde::{Deserialize, Serialize};

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StencilMatrix {
    pub dims: Vec<usize>,
    pub ncomp: usize,
    /// Interior node of each row.
    pub rows: Vec<usize>,
    row_of: Vec<u32>,
    offsets: Vec<isize>,
    /// Stiffness blocks, `[row][stencil][r][c]`.
    pub k: Vec<C64>,
    /// `Q₀`-mass blocks, same layout.
    pub m: Vec<C64>,
}

fn stencil_size(d: usize) -> usize {
    3usize.pow(d as u32)
}

impl StencilMatrix {
    pub fn new(dims: &[usize], ncomp: usize) -> Self {
        let d = dims.len();
        let len: usize = dims.iter().product();
        let mut row_of = vec![NONE; len];
        let mut rows = Vec::new();
        for node in 0..len {
            let mut idx = node;
            let mut inside = true;
            for &n in dims {
                let k = idx % n;
                inside &= k != 0 && k != n - 1;
                idx /= n;
            }
            if inside {
                row_of[node] = rows.len() as u32;
                rows.push(node);
            }
        }
        let mut offsets = Vec::with_capacity(stencil_size(d));
        for s in 0..stencil_size(d) {
            let mut off = 0isize;
            let mut stride = 1isize;
            let mut t = s;
            for &n in dims {
                off += ((t % 3) as isize - 1) * stride;
                t /= 3;
                stride *= n as isize;
            }
            offsets.push(off);
        }
        let block = stencil_size(d) * ncomp * ncomp;
        Self {
            dims: dims.to_vec(),
            ncomp,
            k: vec![C64::new(0.0, 0.0); rows.len() * block],
            m: vec![C64::new(0.0, 0.0); rows.len() * block],
            rows,
            row_of,
            offsets,
        }
    }

    pub fn d(&self) -> usize {
        self.dims.len()
    }

    pub fn node_count(&self) -> usize {
        self.row_of.len()
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn row_of(&self, node: usize) -> Option<usize> {
        let r = self.row_of[node];
        (r != NONE).then_some(r as usize)
    }

    fn stencil_index(&self, from: usize, to: usize) -> usize {
        let mut s = 0;
        let mut pow = 1;
        let (mut a, mut b) = (from, to);
        for &n in &self.dims {
            let delta = (b % n) as isize - (a % n) as isize;
            debug_assert!(delta.abs() <= 1);
            s += ((delta + 1) as usize) * pow;
            pow *= 3;
            a /= n;
            b /= n;
        }
        s
    }

    /// Adds the `n×n` blocks coupling test node `row_node` to trial node `col_node`.
    pub fn add_block(&mut self, row_node: usize, col_node: usize, kb: &[C64], mb: &[C64]) {
        let Some(r) = self.row_of(row_node) else { return };
        let s = self.stencil_index(row_node, col_node);
        let nn = self.ncomp * self.ncomp;
        let base = (r * self.offsets.len() + s) * nn;
        for t in 0..nn {
            self.k[base + t] += kb[t];
            self.m[base + t] += mb[t];
        }
    }

    /// `y = (ck·K + cm·M)x` on full-node vectors; boundary entries of `y` are zero.
    pub fn apply_combination(&self, ck: C64, cm: C64, x: &[C64], y: &mut [C64]) {
        let n = self.ncomp;
        let ns = self.offsets.len();
        y.fill(C64::new(0.0, 0.0));
        for (r, &node) in self.rows.iter().enumerate() {
            for i in 0..n {
                let mut v = C64::new(0.0, 0.0);
                for (s, &off) in self.offsets.iter().enumerate() {
                    let col = (node as isize + off) as usize;
                    let base = (r * ns + s) * n * n + i * n;
                    for c in 0..n {
                        v += (ck * self.k[base + c] + cm * self.m[base + c]) * x[col * n + c];
                    }
                }
                y[node * n + i] = v;
            }
        }
    }

    /// `y = (K − ζM)x`.
    pub fn apply_shifted(&self, zeta: C64, x: &[C64], y: &mut [C64]) {
        self.apply_combination(C64::new(1.0, 0.0), -zeta, x, y);
    }

    /// `‖K − ζM‖_∞` on interior unknowns.
    pub fn inf_norm(&self, zeta: C64) -> f64 {
        let n = self.ncomp;
        let ns = self.offsets.len();
        let mut worst: f64 = 0.0;
        for (r, &node) in self.rows.iter().enumerate() {
            for i in 0..n {
                let mut sum = 0.0;
                for (s, &off) in self.offsets.iter().enumerate() {
                    if self.row_of((node as isize + off) as usize).is_none() {
                        continue;
                    }
                    let base = (r * ns + s) * n * n + i * n;
                    sum += (0..n).map(|c| (self.k[base + c] - zeta * self.m[base + c]).norm()).sum::<f64>();
                }
                worst = worst.max(sum);
            }
        }
        worst
    }

    /// Largest `|A_ij − conj(A_ji)|` among interior couplings, relative to `max |A_ij|`.
    pub fn hermitian_defect(&self, mass: bool) -> f64 {
        let vals = if mass { &self.m } else { &self.k };
        let n = self.ncomp;
        let ns = self.offsets.len();
        let mut worst: f64 = 0.0;
        let scale = vals.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        for (r, &node) in self.rows.iter().enumerate() {
            for (s, &off) in self.offsets.iter().enumerate() {
                let col = (node as isize + off) as usize;
                let Some(rc) = self.row_of(col) else { continue };
                let back = ns - 1 - s;
                for i in 0..n {
                    for c in 0..n {
                        let a = vals[(r * ns + s) * n * n + i * n + c];
                        let b = vals[(rc * ns + back) * n * n + c * n + i];
                        worst = worst.max((a - b.conj()).norm());
                    }
                }
            }
        }
        worst / scale
    }

    /// Dense band of `K − ζM` on interior unknowns (unknown `row·n + c`):
    /// returns `(kl, entries)` with `entries` the nonzero `(i, j, value)`.
    pub fn band_entries(&self, zeta: C64) -> (usize, Vec<(usize, usize, C64)>) {
        let n = self.ncomp;
        let ns = self.offsets.len();
        let mut kl = 0usize;
        let mut out = Vec::with_capacity(self.rows.len() * ns * n * n);
        for (r, &node) in self.rows.iter().enumerate() {
            for (s, &off) in self.offsets.iter().enumerate() {
                let col = (node as isize + off) as usize;
                let Some(rc) = self.row_of(col) else { continue };
                for i in 0..n {
                    for c in 0..n {
                        let base = (r * ns + s) * n * n + i * n + c;
                        let v = self.k[base] - zeta * self.m[base];
                        let (ii, jj) = (r * n + i, rc * n + c);
                        kl = kl.max(ii.abs_diff(jj));
                        out.push((ii, jj, v));
                    }
                }
            }
        }
        (kl, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_interior_nodes() {
        let s = StencilMatrix::new(&[4, 3], 1);
        assert_eq!(s.rows, vec![5, 6]);
        assert_eq!(s.offsets.len(), 9);
        assert_eq!(s.stencil_index(5, 0), 0);
        assert_eq!(s.stencil_index(5, 10), 8);
    }
}
