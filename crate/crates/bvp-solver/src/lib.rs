//! Dirichlet problems on intervals and rectangles: the oscillating problem
//! `(B_{D,ε} − ζQ₀^ε)u_ε = F`, the effective problem `(B_D⁰ − ζQ̄₀)u₀ = F`
//! and the boundary-layer problem for `w_ε`, discretised with multilinear
//! elements.

mod assemble;
mod dst;
mod linear;
mod mesh;
pub mod quadrature;
mod solve;
mod stencil;

use periodic_core::{CoreError, C64};
use thiserror::Error;

pub use assemble::{
    assemble_effective, assemble_oscillating, flux_at_points, DiscreteSystem, OperatorKind, ReferenceCoefficients, MIN_RATIO,
};
pub use linear::BandLu;
pub use mesh::{build_mesh, DomainMesh};
pub use quadrature::QuadratureField;
pub use solve::{
    boundary_layer_with, smallest_eigenvalue, solve_boundary_layer, solve_resolvent, ShiftedSolver, SolveResult, SolverOptions,
};
pub use stencil::StencilMatrix;

#[derive(Debug, Error)]
pub enum BvpError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("mesh: {0}")]
    Mesh(String),
    #[error("mesh spacing h = {h} does not resolve ε = {epsilon} (need ε/h an integer ⩾ 16)")]
    Resolution { h: f64, epsilon: f64 },
    #[error("assembled form is not coercive; the shift λ is too small")]
    NotCoercive,
    #[error("shifted matrix is singular at ζ = {zeta}")]
    Singular { zeta: C64 },
    #[error("linear solve stalled at relative residual {residual:e}")]
    NotConverged { residual: f64 },
    #[error("inverse iteration did not converge")]
    EigenNotConverged,
    #[error("inadmissible spectral parameter: {0}")]
    Admissibility(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
}

pub type Result<T> = std::result::Result<T, BvpError>;
