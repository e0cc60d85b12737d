//! Fast inverse of a constant-coefficient multilinear-element operator with
//! Dirichlet conditions: discrete sine transforms diagonalise the 1D stiffness
//! `(2/h)(1 − cos θ)` and mass `(h/3)(2 + cos θ)` in every direction.

use std::sync::Arc;

use nalgebra::DMatrix;
use periodic_core::C64;
use rustfft::{Fft, FftPlanner};

use crate::assemble::ReferenceCoefficients;

pub(crate) struct DstPreconditioner {
    node_dims: Vec<usize>,
    /// Interior nodes per axis.
    lens: Vec<usize>,
    n: usize,
    /// Inverse mode blocks, `[mode][r][c]`.
    blocks: Vec<C64>,
    ffts: Vec<Arc<dyn Fft<f64>>>,
    scale: f64,
}

fn dst_line(fft: &dyn Fft<f64>, buf: &mut [C64], line: &mut [C64]) {
    let len = line.len();
    let cells = len + 1;
    buf.fill(C64::new(0.0, 0.0));
    for j in 1..=len {
        buf[j] = line[j - 1];
        buf[2 * cells - j] = -line[j - 1];
    }
    fft.process(buf);
    for k in 1..=len {
        line[k - 1] = buf[k] * C64::new(0.0, 0.5);
    }
}

impl DstPreconditioner {
    pub(crate) fn new(node_dims: &[usize], h: f64, n: usize, reference: &ReferenceCoefficients, zeta: C64) -> Self {
        let d = node_dims.len();
        let lens: Vec<usize> = node_dims.iter().map(|&k| k - 2).collect();
        let mut planner = FftPlanner::new();
        let ffts = lens.iter().map(|&l| planner.plan_fft_forward(2 * (l + 1))).collect();
        let eig = |axis: usize| -> Vec<(f64, f64)> {
            let cells = (lens[axis] + 1) as f64;
            (1..=lens[axis])
                .map(|k| {
                    let c = (k as f64 * std::f64::consts::PI / cells).cos();
                    ((2.0 / h) * (1.0 - c), (h / 3.0) * (2.0 + c))
                })
                .collect()
        };
        let eigs: Vec<Vec<(f64, f64)>> = (0..d).map(eig).collect();
        let modes: usize = lens.iter().product();
        let shift = &reference.q - &reference.q0 * zeta;
        let fallback = &reference.q + &reference.q0 * C64::new(zeta.norm(), 0.0);
        let mut blocks = Vec::with_capacity(modes * n * n);
        for p in 0..modes {
            let mut idx = p;
            let mut ks = Vec::with_capacity(d);
            for &l in &lens {
                ks.push(idx % l);
                idx /= l;
            }
            let mass: f64 = (0..d).map(|j| eigs[j][ks[j]].1).product();
            let mut stiff = DMatrix::<C64>::zeros(n, n);
            for j in 0..d {
                let (kappa, mu) = eigs[j][ks[j]];
                stiff += &reference.gbb[j] * C64::new(kappa * mass / mu, 0.0);
            }
            let inv = (&stiff + &shift * C64::new(mass, 0.0))
                .try_inverse()
                .filter(|m| m.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
                .or_else(|| (&stiff + &fallback * C64::new(mass, 0.0)).try_inverse())
                .unwrap_or_else(|| DMatrix::identity(n, n));
            for r in 0..n {
                for c in 0..n {
                    blocks.push(inv[(r, c)]);
                }
            }
        }
        let scale = lens.iter().map(|&l| 2.0 / (l + 1) as f64).product();
        Self {
            node_dims: node_dims.to_vec(),
            lens,
            n,
            blocks,
            ffts,
            scale,
        }
    }

    fn transform(&self, plane: &mut [C64]) {
        let l0 = self.lens[0];
        let mut buf = vec![C64::new(0.0, 0.0); 2 * (l0 + 1)];
        for line in plane.chunks_mut(l0) {
            dst_line(&*self.ffts[0], &mut buf, line);
        }
        if self.lens.len() == 2 {
            let l1 = self.lens[1];
            let mut buf = vec![C64::new(0.0, 0.0); 2 * (l1 + 1)];
            let mut line = vec![C64::new(0.0, 0.0); l1];
            for i0 in 0..l0 {
                for (k, v) in line.iter_mut().enumerate() {
                    *v = plane[i0 + k * l0];
                }
                dst_line(&*self.ffts[1], &mut buf, &mut line);
                for (k, v) in line.iter().enumerate() {
                    plane[i0 + k * l0] = *v;
                }
            }
        }
    }

    fn interior_node(&self, p: usize) -> usize {
        match self.lens.len() {
            1 => p + 1,
            _ => {
                let (l0, nx) = (self.lens[0], self.node_dims[0]);
                (p / l0 + 1) * nx + p % l0 + 1
            }
        }
    }

    pub(crate) fn apply(&self, r: &[C64], z: &mut [C64]) {
        let n = self.n;
        let modes: usize = self.lens.iter().product();
        let mut planes: Vec<Vec<C64>> = (0..n)
            .map(|c| (0..modes).map(|p| r[self.interior_node(p) * n + c]).collect())
            .collect();
        for plane in planes.iter_mut() {
            self.transform(plane);
        }
        let mut v = vec![C64::new(0.0, 0.0); n];
        for p in 0..modes {
            for c in 0..n {
                v[c] = planes[c][p];
            }
            let blk = &self.blocks[p * n * n..(p + 1) * n * n];
            for rr in 0..n {
                planes[rr][p] = (0..n).map(|c| blk[rr * n + c] * v[c]).sum();
            }
        }
        z.fill(C64::new(0.0, 0.0));
        for (c, plane) in planes.iter_mut().enumerate() {
            self.transform(plane);
            for (p, val) in plane.iter().enumerate() {
                z[self.interior_node(p) * n + c] = val * self.scale;
            }
        }
    }
}
