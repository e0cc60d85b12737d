//! Tensor Gauss quadrature on the mesh elements, norms of multilinear
//! interpolants and fields sampled at quadrature points.

use periodic_core::{GridFunction, C64};
use serde::{Deserialize, Serialize};

use crate::mesh::DomainMesh;
use crate::{BvpError, Result};

/// Two-point Gauss abscissae on `[0, 1]`.
pub const GAUSS_1D: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

/// Reference coordinates of the `2^d` Gauss points (axis 0 fastest); each
/// carries weight `h^d / 2^d`.
pub fn gauss_points(d: usize) -> Vec<Vec<f64>> {
    (0..1usize << d)
        .map(|q| (0..d).map(|j| GAUSS_1D[q >> j & 1]).collect())
        .collect()
}

/// Values of the `2^d` multilinear shape functions at reference point `xi`.
pub fn shape_values(xi: &[f64]) -> Vec<f64> {
    (0..1usize << xi.len())
        .map(|a| {
            xi.iter()
                .enumerate()
                .map(|(j, &t)| if a >> j & 1 == 1 { t } else { 1.0 - t })
                .product()
        })
        .collect()
}

/// Physical gradients `[a][j]` of the shape functions at `xi`.
pub fn shape_gradients(xi: &[f64], h: f64) -> Vec<Vec<f64>> {
    let d = xi.len();
    (0..1usize << d)
        .map(|a| {
            (0..d)
                .map(|j| {
                    let mut v = if a >> j & 1 == 1 { 1.0 / h } else { -1.0 / h };
                    for (l, &t) in xi.iter().enumerate() {
                        if l != j {
                            v *= if a >> l & 1 == 1 { t } else { 1.0 - t };
                        }
                    }
                    v
                })
                .collect()
        })
        .collect()
}

/// Precomputed shape data of the reference element.
#[derive(Debug, Clone)]
pub struct ElementRule {
    pub d: usize,
    pub h: f64,
    pub points: Vec<Vec<f64>>,
    pub weight: f64,
    /// `[q][a]`.
    pub values: Vec<Vec<f64>>,
    /// `[q][a][j]`.
    pub gradients: Vec<Vec<Vec<f64>>>,
}

impl ElementRule {
    pub fn new(d: usize, h: f64) -> Self {
        let points = gauss_points(d);
        Self {
            d,
            h,
            weight: h.powi(d as i32) / (1usize << d) as f64,
            values: points.iter().map(|p| shape_values(p)).collect(),
            gradients: points.iter().map(|p| shape_gradients(p, h)).collect(),
            points,
        }
    }

    pub fn nodes(&self) -> usize {
        1 << self.d
    }

    /// Physical coordinates of Gauss point `q` in the element with lower corner `corner`.
    pub fn point(&self, corner: &[f64], q: usize) -> Vec<f64> {
        corner.iter().zip(&self.points[q]).map(|(c, t)| c + t * self.h).collect()
    }
}

/// A field given at the Gauss points of every element, `[element][point][comp]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureField {
    pub elements: usize,
    pub points: usize,
    pub ncomp: usize,
    pub values: Vec<C64>,
}

impl QuadratureField {
    pub fn zeros(elements: usize, points: usize, ncomp: usize) -> Self {
        Self {
            elements,
            points,
            ncomp,
            values: vec![C64::new(0.0, 0.0); elements * points * ncomp],
        }
    }

    pub fn at(&self, e: usize, q: usize) -> &[C64] {
        let s = (e * self.points + q) * self.ncomp;
        &self.values[s..s + self.ncomp]
    }

    pub fn at_mut(&mut self, e: usize, q: usize) -> &mut [C64] {
        let s = (e * self.points + q) * self.ncomp;
        &mut self.values[s..s + self.ncomp]
    }

    pub fn difference(&self, other: &Self) -> Self {
        assert_eq!((self.elements, self.points, self.ncomp), (other.elements, other.points, other.ncomp));
        Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
            ..self.clone()
        }
    }
}

fn check_grid(mesh: &DomainMesh, u: &GridFunction) -> Result<()> {
    if u.grid != mesh.grid {
        return Err(BvpError::Shape("nodal function does not live on this mesh".into()));
    }
    Ok(())
}

/// Values `[e][q][c]` of the multilinear interpolant of `u`.
pub fn interpolate_to_points(mesh: &DomainMesh, u: &GridFunction) -> Result<QuadratureField> {
    check_grid(mesh, u)?;
    let rule = ElementRule::new(mesh.d(), mesh.h());
    let nc = u.ncomp;
    let mut out = QuadratureField::zeros(mesh.element_count(), rule.nodes(), nc);
    for e in 0..mesh.element_count() {
        let nodes = mesh.element_nodes(e);
        for q in 0..rule.nodes() {
            let dst = out.at_mut(e, q);
            for (a, &node) in nodes.iter().enumerate() {
                let w = rule.values[q][a];
                for c in 0..nc {
                    dst[c] += u.values[node * nc + c] * w;
                }
            }
        }
    }
    Ok(out)
}

/// Gradients of the interpolant at Gauss points, components ordered `[c][j]`.
pub fn gradient_at_points(mesh: &DomainMesh, u: &GridFunction) -> Result<QuadratureField> {
    check_grid(mesh, u)?;
    let d = mesh.d();
    let rule = ElementRule::new(d, mesh.h());
    let nc = u.ncomp;
    let mut out = QuadratureField::zeros(mesh.element_count(), rule.nodes(), nc * d);
    for e in 0..mesh.element_count() {
        let nodes = mesh.element_nodes(e);
        for q in 0..rule.nodes() {
            let dst = out.at_mut(e, q);
            for (a, &node) in nodes.iter().enumerate() {
                for c in 0..nc {
                    let v = u.values[node * nc + c];
                    for j in 0..d {
                        dst[c * d + j] += v * rule.gradients[q][a][j];
                    }
                }
            }
        }
    }
    Ok(out)
}

fn sum_over(mesh: &DomainMesh, inner_only: bool, f: impl Fn(usize) -> f64) -> Result<f64> {
    let ranges = mesh.element_ranges(inner_only)?;
    Ok(mesh.elements_in(&ranges).into_iter().map(f).sum())
}

/// `‖f‖_{L²}` of a quadrature field over `O` or `O'`.
pub fn quadrature_l2_norm(mesh: &DomainMesh, f: &QuadratureField, inner_only: bool) -> Result<f64> {
    let w = ElementRule::new(mesh.d(), mesh.h()).weight;
    let s = sum_over(mesh, inner_only, |e| {
        (0..f.points).map(|q| f.at(e, q).iter().map(|z| z.norm_sqr()).sum::<f64>()).sum::<f64>() * w
    })?;
    Ok(s.sqrt())
}

/// `‖u‖_{L²}` of the multilinear interpolant (exact quadrature).
pub fn l2_norm(mesh: &DomainMesh, u: &GridFunction, inner_only: bool) -> Result<f64> {
    quadrature_l2_norm(mesh, &interpolate_to_points(mesh, u)?, inner_only)
}

/// `‖∇u‖_{L²}` of the multilinear interpolant.
pub fn h1_seminorm(mesh: &DomainMesh, u: &GridFunction, inner_only: bool) -> Result<f64> {
    quadrature_l2_norm(mesh, &gradient_at_points(mesh, u)?, inner_only)
}

/// `(‖u‖² + ‖∇u‖²)^{1/2}`.
pub fn h1_norm(mesh: &DomainMesh, u: &GridFunction, inner_only: bool) -> Result<f64> {
    Ok(l2_norm(mesh, u, inner_only)?.hypot(h1_seminorm(mesh, u, inner_only)?))
}

/// Right-hand side `(F_h, φ_i)` of the interpolated load, on full-node vectors
/// (boundary rows are left at zero).
pub fn load_vector(mesh: &DomainMesh, f: &GridFunction) -> Result<Vec<C64>> {
    check_grid(mesh, f)?;
    let rule = ElementRule::new(mesh.d(), mesh.h());
    let nc = f.ncomp;
    let na = rule.nodes();
    // local consistent mass on the reference element
    let mut mloc = vec![0.0; na * na];
    for q in 0..na {
        for a in 0..na {
            for b in 0..na {
                mloc[a * na + b] += rule.weight * rule.values[q][a] * rule.values[q][b];
            }
        }
    }
    let mut out = vec![C64::new(0.0, 0.0); f.values.len()];
    for e in 0..mesh.element_count() {
        let nodes = mesh.element_nodes(e);
        for (a, &na_node) in nodes.iter().enumerate() {
            for (b, &nb_node) in nodes.iter().enumerate() {
                let w = mloc[a * na + b];
                for c in 0..nc {
                    out[na_node * nc + c] += f.values[nb_node * nc + c] * w;
                }
            }
        }
    }
    for node in mesh.boundary_nodes() {
        for c in 0..nc {
            out[node * nc + c] = C64::new(0.0, 0.0);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_mesh;
    use approx::assert_abs_diff_eq;

    #[test]
    fn shape_functions_partition_unity() {
        for xi in [[0.3, 0.8], [0.0, 1.0], [0.5, 0.5]] {
            assert_abs_diff_eq!(shape_values(&xi).iter().sum::<f64>(), 1.0, epsilon = 1e-15);
            let g = shape_gradients(&xi, 0.1);
            for j in 0..2 {
                assert_abs_diff_eq!(g.iter().map(|ga| ga[j]).sum::<f64>(), 0.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn norms_of_bilinear_function_are_exact() {
        let mesh = build_mesh(&[[0.0, 1.0], [0.0, 2.0]], 0.25, None).unwrap();
        let u = GridFunction::from_fn(mesh.grid.clone(), 1, |x| vec![C64::new(x[0] * x[1], 0.0)]);
        // ∫∫ x²y² = 1/3 · 8/3, ∫∫ y² + x² = 8/3 + 2/3
        assert_abs_diff_eq!(l2_norm(&mesh, &u, false).unwrap(), (8.0f64 / 9.0).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(h1_seminorm(&mesh, &u, false).unwrap(), (10.0f64 / 3.0).sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn load_of_constant_sums_to_interior_mass() {
        let mesh = build_mesh(&[[0.0, 1.0]], 0.125, None).unwrap();
        let f = GridFunction::from_fn(mesh.grid.clone(), 1, |_| vec![C64::new(1.0, 0.0)]);
        let r = load_vector(&mesh, &f).unwrap();
        assert_abs_diff_eq!(r[3].re, 0.125, epsilon = 1e-15);
        assert_eq!(r[0], C64::new(0.0, 0.0));
    }
}
