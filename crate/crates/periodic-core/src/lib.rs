//! Lattice geometry, periodic coefficient fields, the differential symbol
//! `b(ξ)` and the Steklov smoothing operator.
//!
//! Cell grids are cell-centred: node `k` on an axis of resolution `N` sits at
//! `(k + 1/2)/N` in lattice coordinates, so jumps of piecewise-constant
//! coefficients placed at multiples of `1/N` fall on cell faces.

pub mod error;
pub mod field;
pub mod fourier;
pub mod lattice;
pub mod linalg;
pub mod smoothing;
pub mod spec;
pub mod symbol;

pub use error::CoreError;
pub use field::{cell_mean, harmonic_mean, oscillate, sample_field, PeriodicField};
pub use fourier::CellGrid;
pub use lattice::{make_cubic_lattice, Lattice};
pub use linalg::CMat;
pub use num_complex::Complex64 as C64;
pub use smoothing::{steklov_smooth, BoxGrid, GridFunction};
pub use spec::{FieldKind, FieldSpec};
pub use symbol::{estimate_alpha, SymbolB};

pub type Result<T> = std::result::Result<T, CoreError>;
