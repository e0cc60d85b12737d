use periodic_core::{CMat, FieldSpec, C64};
use std::path::Path;

use crate::builders::{build_1d_scalar, build_2d_laminate, build_zero_corrector_case};
use crate::magnetic::{build_scalar_magnetic, MagneticData};
use crate::{ProblemSpec, Result, ZooError};

pub const NAMES: [&str; 6] = [
    "scalar-1d-sine",
    "scalar-1d-sine-long",
    "constant",
    "laminate-13",
    "zero-corrector",
    "magnetic-1d",
];

fn two_phase() -> FieldSpec {
    FieldSpec::piecewise(
        0,
        &[0.0, 0.5],
        &[CMat::identity(1, 1), CMat::identity(1, 1) * C64::new(3.0, 0.0)],
    )
}

pub fn magnetic_1d_data() -> MagneticData {
    MagneticData {
        g: FieldSpec::expr(1, "1 + 0.5*cos(2*pi*x1)"),
        a_pot: vec![FieldSpec::expr(1, "0.5 + 0.3*sin(2*pi*x1)")],
        v: FieldSpec::expr(1, "cos(2*pi*x1)"),
        v_pot: FieldSpec::expr(1, "1 + 0.5*sin(2*pi*x1)"),
        q0: FieldSpec::scalar_constant(1, 1.0),
        domain: vec![[0.0, 1.0]],
        sample_n: 32,
    }
}

/// The built-in catalogue.
pub fn named(name: &str) -> Result<ProblemSpec> {
    match name {
        "scalar-1d-sine" => build_1d_scalar(name, FieldSpec::expr(1, "2 + sin(2*pi*x1)")),
        "scalar-1d-sine-long" => {
            let mut p = build_1d_scalar(name, FieldSpec::expr(1, "2 + sin(2*pi*x1)"))?;
            p.domain = vec![[0.0, 4.0]];
            Ok(p)
        }
        "constant" => build_1d_scalar(name, FieldSpec::scalar_constant(1, 2.0)),
        "laminate-13" => build_2d_laminate(name, two_phase(), [1.0, 1.0]),
        "zero-corrector" => build_zero_corrector_case(),
        "magnetic-1d" => Ok(build_scalar_magnetic(name, &magnetic_1d_data())?.problem),
        _ => Err(ZooError::Unknown(name.to_string())),
    }
}

/// Resolves a model by catalogue name, by file path, or as `models/<name>.json`.
pub fn load(name_or_path: &str) -> Result<ProblemSpec> {
    if NAMES.contains(&name_or_path) {
        return named(name_or_path);
    }
    let direct = Path::new(name_or_path);
    let path = if direct.is_file() {
        direct.to_path_buf()
    } else {
        let candidate = Path::new("models").join(format!("{name_or_path}.json"));
        if !candidate.is_file() {
            return Err(ZooError::Unknown(name_or_path.to_string()));
        }
        candidate
    };
    let spec: ProblemSpec = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    spec.validate()?;
    Ok(spec)
}
