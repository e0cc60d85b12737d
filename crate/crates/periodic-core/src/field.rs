use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::fourier::CellGrid;
use crate::lattice::Lattice;
use crate::linalg::{hermitian_eigenvalues, spectral_norm};
use crate::spec::{CompiledSpec, FieldKind, FieldSpec};
use crate::{CMat, CoreError, Result, C64};

const FLAG_TOL: f64 = 1e-12;

/// A `Γ`-periodic matrix-valued function sampled on a cell-centred grid.
///
/// When the field was sampled from a closed-form [`FieldSpec`] the spec is
/// kept, and off-grid evaluation uses it exactly; otherwise values between
/// nodes are multilinearly interpolated with wrap-around.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodicField {
    pub grid: CellGrid,
    pub rows: usize,
    pub cols: usize,
    /// Node-major, each node a row-major `rows × cols` block.
    pub values: Vec<C64>,
    pub hermitian: bool,
    pub positive: bool,
    /// Smallest nodal eigenvalue when the field is Hermitian.
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<FieldSpec>,
    #[serde(skip)]
    compiled: OnceLock<Option<CompiledSpec>>,
}

impl PartialEq for PeriodicField {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid
            && self.rows == other.rows
            && self.cols == other.cols
            && self.values == other.values
            && self.spec == other.spec
    }
}

impl PeriodicField {
    pub fn from_values(grid: CellGrid, rows: usize, cols: usize, values: Vec<C64>) -> Self {
        assert_eq!(values.len(), grid.len() * rows * cols, "value count does not match grid and shape");
        let mut f = Self {
            grid,
            rows,
            cols,
            values,
            hermitian: false,
            positive: false,
            eta: None,
            spec: None,
            compiled: OnceLock::new(),
        };
        f.inspect();
        f
    }

    pub fn from_fn(grid: CellGrid, rows: usize, cols: usize, f: impl Fn(&[f64]) -> CMat) -> Self {
        let mut values = Vec::with_capacity(grid.len() * rows * cols);
        for idx in 0..grid.len() {
            let m = f(&grid.node(idx));
            for i in 0..rows {
                for j in 0..cols {
                    values.push(m[(i, j)]);
                }
            }
        }
        Self::from_values(grid, rows, cols, values)
    }

    pub fn constant(grid: CellGrid, m: &CMat) -> Self {
        let mut f = Self::from_fn(grid, m.nrows(), m.ncols(), |_| m.clone());
        f.spec = Some(FieldSpec::constant(m));
        f
    }

    pub fn zeros(grid: CellGrid, rows: usize, cols: usize) -> Self {
        Self::from_values(grid, rows, cols, vec![C64::new(0.0, 0.0); grid.len() * rows * cols])
    }

    fn inspect(&mut self) {
        self.hermitian = false;
        self.positive = false;
        self.eta = None;
        if self.rows != self.cols {
            return;
        }
        let n = self.rows;
        let scale = self.values.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        let herm = (0..self.grid.len()).all(|node| {
            let b = self.block(node);
            (0..n).all(|i| (0..n).all(|j| (b[i * n + j] - b[j * n + i].conj()).norm() <= FLAG_TOL * scale))
        });
        if !herm {
            return;
        }
        self.hermitian = true;
        let eta = (0..self.grid.len())
            .map(|node| hermitian_eigenvalues(&self.at(node))[0])
            .fold(f64::INFINITY, f64::min);
        self.eta = Some(eta);
        self.positive = eta > FLAG_TOL;
    }

    pub fn node_count(&self) -> usize {
        self.grid.len()
    }

    pub fn block(&self, node: usize) -> &[C64] {
        let s = self.rows * self.cols;
        &self.values[node * s..(node + 1) * s]
    }

    pub fn at(&self, node: usize) -> CMat {
        CMat::from_row_slice(self.rows, self.cols, self.block(node))
    }

    /// Component `(i, j)` at every node.
    pub fn component(&self, i: usize, j: usize) -> Vec<C64> {
        let s = self.rows * self.cols;
        (0..self.grid.len()).map(|node| self.values[node * s + i * self.cols + j]).collect()
    }

    pub fn map(&self, rows: usize, cols: usize, f: impl Fn(&CMat) -> CMat) -> Self {
        let mut values = Vec::with_capacity(self.grid.len() * rows * cols);
        for node in 0..self.grid.len() {
            let m = f(&self.at(node));
            assert_eq!((m.nrows(), m.ncols()), (rows, cols));
            for i in 0..rows {
                for j in 0..cols {
                    values.push(m[(i, j)]);
                }
            }
        }
        Self::from_values(self.grid, rows, cols, values)
    }

    pub fn adjoint(&self) -> Self {
        self.map(self.cols, self.rows, |m| m.adjoint())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid);
        assert_eq!(self.cols, other.rows);
        let mut values = Vec::with_capacity(self.grid.len() * self.rows * other.cols);
        for node in 0..self.grid.len() {
            let m = self.at(node) * other.at(node);
            for i in 0..self.rows {
                for j in 0..other.cols {
                    values.push(m[(i, j)]);
                }
            }
        }
        Self::from_values(self.grid, self.rows, other.cols, values)
    }

    pub fn attach_spec(mut self, spec: FieldSpec) -> Self {
        self.spec = Some(spec);
        self.compiled = OnceLock::new();
        self
    }

    fn compiled(&self) -> Option<&CompiledSpec> {
        self.compiled
            .get_or_init(|| self.spec.as_ref().and_then(|s| s.compile(self.grid.d).ok()))
            .as_ref()
    }

    pub fn has_closed_form(&self) -> bool {
        self.compiled().is_some()
    }

    pub fn is_piecewise(&self) -> bool {
        self.spec.as_ref().is_some_and(|s| s.kind == FieldKind::Piecewise)
    }

    /// Value at lattice point `y` (any real coordinates; periodic).
    pub fn eval_cell_into(&self, y: &[f64], out: &mut [C64]) {
        if let Some(c) = self.compiled() {
            c.eval_into(y, out);
            return;
        }
        self.interpolate_into(y, out);
    }

    pub fn eval_cell(&self, y: &[f64]) -> CMat {
        let mut buf = vec![C64::new(0.0, 0.0); self.rows * self.cols];
        self.eval_cell_into(y, &mut buf);
        CMat::from_row_slice(self.rows, self.cols, &buf)
    }

    /// Multilinear interpolation between cell-centred nodes.
    pub fn interpolate_into(&self, y: &[f64], out: &mut [C64]) {
        let n = self.grid.n;
        let d = self.grid.d;
        let s = self.rows * self.cols;
        let mut base = vec![0usize; d];
        let mut frac = vec![0f64; d];
        for j in 0..d {
            let t = y[j] * n as f64 - 0.5;
            let fl = t.floor();
            frac[j] = t - fl;
            base[j] = (fl as i64).rem_euclid(n as i64) as usize;
        }
        out[..s].fill(C64::new(0.0, 0.0));
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut k = vec![0usize; d];
            for j in 0..d {
                if corner >> j & 1 == 1 {
                    w *= frac[j];
                    k[j] = (base[j] + 1) % n;
                } else {
                    w *= 1.0 - frac[j];
                    k[j] = base[j];
                }
            }
            if w == 0.0 {
                continue;
            }
            let b = self.block(self.grid.flat_index(&k));
            for (o, v) in out.iter_mut().zip(b) {
                *o += v * w;
            }
        }
    }

    /// `max_x |f(x)|` in the spectral norm over nodes.
    pub fn sup_norm(&self) -> f64 {
        (0..self.grid.len()).map(|k| spectral_norm(&self.at(k))).fold(0.0, f64::max)
    }

    /// `‖f‖_{L²(Ω)}` for the unit cell (Frobenius norm pointwise).
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.grid.len() as f64).sqrt()
    }

    /// `max_x |f(x)^{-1}|` over nodes.
    pub fn inverse_sup_norm(&self) -> Result<f64> {
        let mut best: f64 = 0.0;
        for k in 0..self.grid.len() {
            let inv = self.at(k).try_inverse().ok_or(CoreError::Singular(k))?;
            best = best.max(spectral_norm(&inv));
        }
        Ok(best)
    }
}

/// Samples a closed-form spec at the `N^d` cell-centred nodes.
pub fn sample_field(spec: &FieldSpec, lattice: &Lattice, n: usize, require_positive: bool) -> Result<PeriodicField> {
    if n < 4 || n % 2 != 0 {
        return Err(CoreError::Grid(format!("N must be even and at least 4, got {n}")));
    }
    let d = lattice.dim();
    if !spec.jumps_on_grid(n) {
        return Err(CoreError::Grid(format!("piecewise jumps do not lie on faces of the N={n} grid")));
    }
    let compiled = spec.compile(d)?;
    check_periodic(&compiled)?;
    let grid = CellGrid::new(d, n);
    let [rows, cols] = spec.shape;
    let mut values = vec![C64::new(0.0, 0.0); grid.len() * rows * cols];
    let s = rows * cols;
    for node in 0..grid.len() {
        let y = grid.node(node);
        compiled.eval_into(&y, &mut values[node * s..(node + 1) * s]);
        if values[node * s..(node + 1) * s].iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(CoreError::NonFinite(node));
        }
    }
    let field = PeriodicField::from_values(grid, rows, cols, values).attach_spec(spec.clone());
    if require_positive && !field.positive {
        let (value, node) = if field.hermitian {
            (0..grid.len())
                .map(|k| (hermitian_eigenvalues(&field.at(k))[0], k))
                .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a })
        } else {
            (f64::NAN, 0)
        };
        return Err(CoreError::NotPositive { value, node });
    }
    Ok(field)
}

fn check_periodic(c: &CompiledSpec) -> Result<()> {
    let probes = [0.137, 0.421, 0.779];
    for j in 0..c.d {
        for &p in &probes {
            let y: Vec<f64> = (0..c.d).map(|i| probes[(i + 1) % 3] * (i as f64 + 1.0) + p).collect();
            let mut z = y.clone();
            z[j] += 1.0;
            let a = c.eval(&y);
            let b = c.eval(&z);
            let scale = a.iter().map(|v| v.norm()).fold(1.0, f64::max);
            if (a - b).iter().any(|v| v.norm() > 1e-9 * scale) {
                return Err(CoreError::Spec(format!("field is not 1-periodic along axis {j}")));
            }
        }
    }
    Ok(())
}

/// Cell mean `|Ω|⁻¹ ∫_Ω f` by the midpoint rule.
pub fn cell_mean(field: &PeriodicField) -> CMat {
    let sum = pairwise_sum(0, field.node_count(), &|k| Ok(field.at(k))).expect("infallible");
    sum / C64::new(field.node_count() as f64, 0.0)
}

/// Pairwise summation of `f(lo..hi)`; keeps the rounding error of large
/// grid means at `O(log N)` ulps.
fn pairwise_sum(lo: usize, hi: usize, f: &dyn Fn(usize) -> Result<CMat>) -> Result<CMat> {
    if hi - lo <= 16 {
        let mut acc = f(lo)?;
        for k in lo + 1..hi {
            acc += f(k)?;
        }
        return Ok(acc);
    }
    let mid = lo + (hi - lo) / 2;
    Ok(pairwise_sum(lo, mid, f)? + pairwise_sum(mid, hi, f)?)
}

/// `(|Ω|⁻¹ ∫_Ω f⁻¹)⁻¹` by the midpoint rule.
pub fn harmonic_mean(field: &PeriodicField) -> Result<CMat> {
    if field.rows != field.cols {
        return Err(CoreError::Shape("harmonic mean needs a square field".into()));
    }
    let mut acc = pairwise_sum(0, field.node_count(), &|k| field.at(k).try_inverse().ok_or(CoreError::Singular(k)))?;
    acc /= C64::new(field.node_count() as f64, 0.0);
    acc.try_inverse().ok_or(CoreError::Singular(usize::MAX))
}

/// `f^ε(x) = f(x/ε)` on the unit cubic lattice.
pub fn oscillate(field: &PeriodicField, eps: f64, x: &[f64]) -> CMat {
    let y: Vec<f64> = x.iter().map(|v| v / eps).collect();
    field.eval_cell(&y)
}
