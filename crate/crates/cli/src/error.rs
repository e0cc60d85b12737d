use bvp_solver::BvpError;
use cell_solver::CellError;
use corrector::CorrectorError;
use model_zoo::ZooError;
use thiserror::Error;
use verify_harness::HarnessError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Zoo(#[from] ZooError),
    #[error(transparent)]
    Bvp(#[from] BvpError),
    #[error(transparent)]
    Corrector(#[from] CorrectorError),
    #[error(transparent)]
    Cell(#[from] CellError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("one or more criteria failed")]
    Criteria,
}

pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_SOLVER: u8 = 2;
pub const EXIT_CRITERIA: u8 = 3;

fn bvp_code(e: &BvpError) -> u8 {
    match e {
        BvpError::NotCoercive | BvpError::Singular { .. } | BvpError::NotConverged { .. } | BvpError::EigenNotConverged => EXIT_SOLVER,
        _ => EXIT_CONFIG,
    }
}

fn cell_code(e: &CellError) -> u8 {
    match e {
        CellError::Core(_) | CellError::Shape(_) => EXIT_CONFIG,
        _ => EXIT_SOLVER,
    }
}

fn corrector_code(e: &CorrectorError) -> u8 {
    match e {
        CorrectorError::Bvp(b) => bvp_code(b),
        _ => EXIT_CONFIG,
    }
}

fn harness_code(e: &HarnessError) -> u8 {
    match e {
        HarnessError::Cell(c) => cell_code(c),
        HarnessError::Bvp(b) => bvp_code(b),
        HarnessError::Corrector(c) => corrector_code(c),
        HarnessError::Zoo(ZooError::Cell(c)) => cell_code(c),
        HarnessError::Point { source, .. } => harness_code(source),
        _ => EXIT_CONFIG,
    }
}

impl CliError {
    /// 1 for configuration and admissibility errors, 2 for solver
    /// failures, 3 for failed criteria.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Harness(h) => harness_code(h),
            CliError::Zoo(ZooError::Cell(c)) | CliError::Cell(c) => cell_code(c),
            CliError::Bvp(b) => bvp_code(b),
            CliError::Corrector(c) => corrector_code(c),
            CliError::Criteria => EXIT_CRITERIA,
            _ => EXIT_CONFIG,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use periodic_core::C64;

    #[test]
    fn codes_follow_the_failure_kind() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 1);
        assert_eq!(CliError::Criteria.exit_code(), 3);
        let singular = BvpError::Singular { zeta: C64::new(1.0, 0.0) };
        let nested = HarnessError::Point {
            epsilon: 0.1,
            zeta: C64::new(1.0, 0.0),
            source: Box::new(HarnessError::Bvp(singular)),
        };
        assert_eq!(CliError::Harness(nested).exit_code(), 2);
        assert_eq!(CliError::Bvp(BvpError::Resolution { h: 0.1, epsilon: 0.1 }).exit_code(), 1);
        assert_eq!(CliError::Zoo(ZooError::Unknown("m".into())).exit_code(), 1);
    }
}
