//! Error norms against the homogenized solution, the weights `c(φ)` and
//! `ρ_♭(ζ)`, sweeps over `(ε, ζ)` grids, log–log slope fits and the
//! pass/fail judgement of the rate criteria.

mod fit;
mod load;
mod norms;
mod sweep;
mod weights;

use bvp_solver::BvpError;
use cell_solver::CellError;
use corrector::CorrectorError;
use model_zoo::ZooError;
use periodic_core::{CoreError, C64};
use thiserror::Error;

pub use fit::{fit_and_judge, fit_slope, ColumnFit, Criteria, CriterionResult, RateReport, ZetaDiagnostic};
pub use load::SmoothLoad;
pub use norms::{error_norms, read_csv, write_csv, ErrorRow, CSV_HEADER};
pub use sweep::{estimate_c_flat, run_sweep, Prepared, SweepConfig};
pub use weights::{arg_2pi, c_phi, rho_flat};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Cell(#[from] CellError),
    #[error(transparent)]
    Bvp(#[from] BvpError),
    #[error(transparent)]
    Corrector(#[from] CorrectorError),
    #[error(transparent)]
    Zoo(#[from] ZooError),
    #[error("inadmissible parameter: {0}")]
    Admissibility(String),
    #[error("need at least 4 ε-points per ζ, found {0}")]
    InsufficientPoints(usize),
    #[error("mesh mismatch: {0}")]
    Mesh(String),
    #[error("at ε = {epsilon}, ζ = {zeta}: {source}")]
    Point {
        epsilon: f64,
        zeta: C64,
        #[source]
        source: Box<HarnessError>,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, HarnessError>;
