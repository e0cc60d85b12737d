use std::f64::consts::PI;

use periodic_core::{BoxGrid, GridFunction, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// `F(x) = 1 + Σ_{k=1..3} Σ_j (α_{kj} sin(kπt_j) + β_{kj} cos(kπt_j))` per
/// component, `t_j = (x_j − a_j)/L_j`, coefficients uniform in `(−½, ½)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothLoad {
    pub lower: Vec<f64>,
    pub edges: Vec<f64>,
    /// `[component][k][j]` pairs `(α, β)`.
    pub coefficients: Vec<Vec<Vec<(f64, f64)>>>,
}

impl SmoothLoad {
    pub fn seeded(domain: &[[f64; 2]], ncomp: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = domain.len();
        let coefficients = (0..ncomp)
            .map(|_| {
                (0..3)
                    .map(|_| (0..d).map(|_| (rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5))).collect())
                    .collect()
            })
            .collect();
        Self {
            lower: domain.iter().map(|r| r[0]).collect(),
            edges: domain.iter().map(|[a, b]| b - a).collect(),
            coefficients,
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<C64> {
        self.coefficients
            .iter()
            .map(|comp| {
                let mut v = 1.0;
                for (k, row) in comp.iter().enumerate() {
                    let kk = (k + 1) as f64 * PI;
                    for (j, (a, b)) in row.iter().enumerate() {
                        let t = (x[j] - self.lower[j]) / self.edges[j];
                        v += a * (kk * t).sin() + b * (kk * t).cos();
                    }
                }
                C64::new(v, 0.0)
            })
            .collect()
    }

    pub fn on(&self, grid: &BoxGrid) -> GridFunction {
        GridFunction::from_fn(grid.clone(), self.coefficients.len(), |x| self.eval(x))
    }
}
