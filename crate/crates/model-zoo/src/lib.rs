//! Canonical homogenization problems.
//!
//! A [`ProblemSpec`] is a serializable description of the coefficients of
//! `B_ε`, the symbol `b(D)`, the domain box and, when known, the exact
//! effective matrix. Builders construct the standard instances; [`named`]
//! resolves the catalogue names used by the command-line tool.

mod builders;
mod catalog;
mod magnetic;

use cell_solver::{CellError, Coefficients};
use periodic_core::linalg::{cmat_serde, loewner_le};
use periodic_core::{cell_mean, harmonic_mean, sample_field, CMat, CoreError, FieldSpec, Lattice, SymbolB};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use builders::{build_1d_scalar, build_2d_laminate, build_zero_corrector_case};
pub use catalog::{load, magnetic_1d_data, named, NAMES};
pub use magnetic::{build_scalar_magnetic, MagneticData, MagneticProblem};

#[derive(Debug, Error)]
pub enum ZooError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Cell(#[from] CellError),
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("unknown model '{0}'")]
    Unknown(String),
    #[error("cannot read model file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed model file: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, ZooError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tag {
    ZeroCorrector,
    G0EqualsUnderline,
    Schrodinger,
    Laminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub name: String,
    pub dim: usize,
    pub n: usize,
    pub m: usize,
    /// Matrices `b_j` of `b(D) = Σ b_j D_j`; absent means the gradient `D`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Vec<Vec<[f64; 2]>>>>,
    pub g: FieldSpec,
    pub a: Vec<FieldSpec>,
    pub q: FieldSpec,
    pub q0: FieldSpec,
    /// `[lower, upper]` per axis.
    pub domain: Vec<[f64; 2]>,
    /// Default cell-grid resolution.
    pub cell_n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "cmat_serde::option")]
    pub known_effective: Option<CMat>,
    #[serde(default)]
    pub tags: Vec<Tag>,
}

impl ProblemSpec {
    pub fn symbol(&self) -> Result<SymbolB> {
        match &self.b {
            None => Ok(SymbolB::gradient(self.dim, self.n)),
            Some(rows) => {
                let mats = rows
                    .iter()
                    .map(|r| cmat_serde::from_rows(r).map_err(ZooError::Invalid))
                    .collect::<Result<Vec<_>>>()?;
                Ok(SymbolB::new(mats)?)
            }
        }
    }

    pub fn lattice(&self) -> Result<Lattice> {
        Ok(periodic_core::make_cubic_lattice(self.dim)?)
    }

    pub fn has_tag(&self, tag: Tag) -> bool {
        self.tags.contains(&tag)
    }

    /// Edge lengths of the domain box.
    pub fn edges(&self) -> Vec<f64> {
        self.domain.iter().map(|[a, b]| b - a).collect()
    }

    /// Samples every coefficient on an `N^d` cell grid.
    pub fn coefficients(&self, cell_n: usize) -> Result<Coefficients> {
        self.check_shapes()?;
        let l = self.lattice()?;
        let b = self.symbol()?;
        let g = sample_field(&self.g, &l, cell_n, true)?;
        let a = self
            .a
            .iter()
            .map(|s| sample_field(s, &l, cell_n, false))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let q = sample_field(&self.q, &l, cell_n, false)?;
        let q0 = sample_field(&self.q0, &l, cell_n, true)?;
        Ok(Coefficients::new(l, b, g, a, q, q0)?)
    }

    fn check_shapes(&self) -> Result<()> {
        let (d, n, m) = (self.dim, self.n, self.m);
        if !(1..=3).contains(&d) {
            return Err(ZooError::Invalid(format!("dimension {d} not supported")));
        }
        if self.g.shape != [m, m] {
            return Err(ZooError::Invalid(format!("g must be {m}×{m}")));
        }
        if self.a.len() != d || self.a.iter().any(|s| s.shape != [n, n]) {
            return Err(ZooError::Invalid(format!("need {d} fields a_j of shape {n}×{n}")));
        }
        if self.q.shape != [n, n] || self.q0.shape != [n, n] {
            return Err(ZooError::Invalid(format!("Q and Q0 must be {n}×{n}")));
        }
        if self.domain.len() != d || self.domain.iter().any(|[a, b]| !(b > a)) {
            return Err(ZooError::Invalid("domain needs one increasing interval per axis".into()));
        }
        let sym = self.symbol()?;
        if sym.d() != d || sym.n() != n || sym.m() != m {
            return Err(ZooError::Invalid("b(D) does not match dim, n, m".into()));
        }
        Ok(())
    }

    /// Shape checks plus the Voigt–Reuss test of `known_effective`.
    pub fn validate(&self) -> Result<()> {
        self.check_shapes()?;
        if let Some(k) = &self.known_effective {
            let l = self.lattice()?;
            let g = sample_field(&self.g, &l, self.cell_n, true)?;
            let upper = cell_mean(&g);
            let lower = harmonic_mean(&g)?;
            if !loewner_le(&lower, k, 1e-8) || !loewner_le(k, &upper, 1e-8) {
                return Err(ZooError::Invalid("known effective matrix violates Voigt-Reuss".into()));
            }
        }
        Ok(())
    }
}
