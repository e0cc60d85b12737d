use periodic_core::{cell_mean, harmonic_mean, make_cubic_lattice, sample_field, CMat, FieldSpec, C64};

use crate::{ProblemSpec, Result, Tag, ZooError};

/// Resolution of the quadrature used for closed-form means of scalar specs.
const MEAN_N: usize = 4096;

fn scalar_means(gamma: &FieldSpec, d: usize) -> Result<(C64, C64)> {
    if gamma.shape != [1, 1] {
        return Err(ZooError::Invalid("γ must be a scalar spec".into()));
    }
    let l = make_cubic_lattice(d)?;
    let n = if d == 1 { MEAN_N } else { 256 };
    let f = sample_field(gamma, &l, n, true)?;
    Ok((harmonic_mean(&f)?[(0, 0)], cell_mean(&f)[(0, 0)]))
}

fn unit_q0(n: usize) -> FieldSpec {
    FieldSpec::scalar_constant(n, 1.0)
}

/// `−(γ(x/ε) u')' + …` on `(0, 1)` with `Q₀ = 1` and no lower-order terms;
/// the effective coefficient is the harmonic mean of `γ`.
pub fn build_1d_scalar(name: &str, gamma: FieldSpec) -> Result<ProblemSpec> {
    let (harm, _) = scalar_means(&gamma, 1)?;
    let spec = ProblemSpec {
        name: name.to_string(),
        dim: 1,
        n: 1,
        m: 1,
        b: None,
        g: gamma,
        a: vec![FieldSpec::zero(1, 1)],
        q: FieldSpec::zero(1, 1),
        q0: unit_q0(1),
        domain: vec![[0.0, 1.0]],
        cell_n: 1024,
        known_effective: Some(CMat::from_element(1, 1, harm)),
        tags: vec![Tag::G0EqualsUnderline],
    };
    spec.validate()?;
    Ok(spec)
}

/// Scalar laminate `g(x) = γ(x₁)·diag(w₁, w₂)` on the unit square.
pub fn build_2d_laminate(name: &str, gamma: FieldSpec, weights: [f64; 2]) -> Result<ProblemSpec> {
    let c = gamma.compile(2)?;
    for (y1, y2) in [(0.13, 0.2), (0.61, 0.45), (0.9, 0.77)] {
        if (c.eval(&[y1, y2]) - c.eval(&[y1, y2 + 0.37])).norm() > 1e-14 {
            return Err(ZooError::Invalid("laminate γ must depend on x₁ only".into()));
        }
    }
    if weights.iter().any(|&w| w <= 0.0) {
        return Err(ZooError::Invalid("laminate weights must be positive".into()));
    }
    let (harm, mean) = scalar_means(&gamma, 2)?;
    let w = diag(&[C64::new(weights[0], 0.0), C64::new(weights[1], 0.0)]);
    let known = diag(&[harm * weights[0], mean * weights[1]]);
    let spec = ProblemSpec {
        name: name.to_string(),
        dim: 2,
        n: 1,
        m: 2,
        b: None,
        g: gamma.times_matrix(&w)?,
        a: vec![FieldSpec::zero(1, 1), FieldSpec::zero(1, 1)],
        q: FieldSpec::zero(1, 1),
        q0: unit_q0(1),
        domain: vec![[0.0, 1.0], [0.0, 1.0]],
        cell_n: 64,
        known_effective: Some(known),
        tags: vec![Tag::Laminate],
    };
    spec.validate()?;
    Ok(spec)
}

fn diag(v: &[C64]) -> CMat {
    CMat::from_fn(v.len(), v.len(), |i, j| if i == j { v[i] } else { C64::new(0.0, 0.0) })
}

/// Constant `g`, curl-type `a₁ = ∂₂ψ`, `a₂ = −∂₁ψ` (so `Σ_j D_j a_j* = 0`),
/// smooth `Q` and `Q₀ = 1`: both cell correctors vanish identically.
pub fn build_zero_corrector_case() -> Result<ProblemSpec> {
    // ψ = sin(2πx₁) sin(2πx₂) / (4π)
    let spec = ProblemSpec {
        name: "zero-corrector".into(),
        dim: 2,
        n: 1,
        m: 2,
        b: None,
        g: FieldSpec::expr_entries(&[vec!["1.5", "0.25"], vec!["0.25", "1"]]),
        a: vec![
            FieldSpec::expr(1, "0.5*sin(2*pi*x1)*cos(2*pi*x2)"),
            FieldSpec::expr(1, "-0.5*cos(2*pi*x1)*sin(2*pi*x2)"),
        ],
        q: FieldSpec::expr(1, "1 + 0.5*cos(2*pi*(x1 - x2))"),
        q0: unit_q0(1),
        domain: vec![[0.0, 1.0], [0.0, 1.0]],
        cell_n: 64,
        known_effective: Some(CMat::from_row_slice(
            2,
            2,
            &[C64::new(1.5, 0.0), C64::new(0.25, 0.0), C64::new(0.25, 0.0), C64::new(1.0, 0.0)],
        )),
        tags: vec![Tag::ZeroCorrector],
    };
    spec.validate()?;
    Ok(spec)
}
