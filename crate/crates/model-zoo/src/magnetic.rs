//! The scalar operator `(D − A^ε)* g^ε (D − A^ε) + ε⁻¹v^ε + 𝒱^ε` written in
//! the general form `D*g^εD + Σ_j(a_j^ε D_j + D_j a_j^ε*) + Q^ε`.
//!
//! With `ΔΦ = v`, `∫Φ = 0`, `ξ_j = −∂_jΦ` and `η = gA` one has
//! `a_j = −η_j + iξ_j` and `Q = 𝒱 + ⟨gA, A⟩`.

use periodic_core::fourier::to_modes;
use periodic_core::{harmonic_mean, make_cubic_lattice, sample_field, CMat, CellGrid, FieldSpec, PeriodicField, C64};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::{ProblemSpec, Result, Tag, ZooError};

/// Real periodic inputs of the magnetic construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagneticData {
    /// Metric, `d×d`, real symmetric positive.
    pub g: FieldSpec,
    /// Magnetic potential, one scalar field per axis.
    pub a_pot: Vec<FieldSpec>,
    /// Zero-mean singular potential.
    pub v: FieldSpec,
    /// Regular electric potential `𝒱`.
    pub v_pot: FieldSpec,
    pub q0: FieldSpec,
    pub domain: Vec<[f64; 2]>,
    /// Grid on which the products and the Poisson solve are carried out.
    pub sample_n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagneticProblem {
    pub problem: ProblemSpec,
    /// Periodic solution of `ΔΦ = v` with zero mean.
    pub phi: FieldSpec,
    /// `ξ_j = −∂_jΦ`.
    pub xi: Vec<FieldSpec>,
}

fn real_samples(f: &PeriodicField, what: &str) -> Result<Vec<f64>> {
    if f.values.iter().any(|z| z.im.abs() > 1e-12 * (1.0 + z.re.abs())) {
        return Err(ZooError::Invalid(format!("{what} must be real-valued")));
    }
    Ok(f.values.iter().map(|z| z.re).collect())
}

/// Fourier spec of a scalar field given by its modes; modes below
/// `1e-14` relative are dropped, and energy at the Nyquist frequency means
/// the sampling grid was too coarse for the products involved.
fn spec_from_modes(modes: &[C64], grid: CellGrid) -> Result<FieldSpec> {
    let scale = modes.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let mut kept = Vec::new();
    for (idx, c) in modes.iter().enumerate() {
        if c.norm() <= 1e-14 * scale {
            continue;
        }
        if grid.is_nyquist(idx) {
            return Err(ZooError::Invalid("sample_n too small: products reach the Nyquist frequency".into()));
        }
        kept.push((grid.freqs(idx), CMat::from_element(1, 1, *c)));
    }
    Ok(FieldSpec::fourier([1, 1], &kept))
}

pub fn build_scalar_magnetic(name: &str, data: &MagneticData) -> Result<MagneticProblem> {
    let d = data.a_pot.len();
    if data.g.shape != [d, d] {
        return Err(ZooError::Invalid(format!("metric must be {d}×{d}")));
    }
    let l = make_cubic_lattice(d)?;
    let n = data.sample_n;
    let g = sample_field(&data.g, &l, n, true)?;
    let grid = g.grid;
    let gv = real_samples(&g, "g")?;
    let a: Vec<Vec<f64>> = data
        .a_pot
        .iter()
        .map(|s| real_samples(&sample_field(s, &l, n, false)?, "A"))
        .collect::<Result<_>>()?;
    let v = real_samples(&sample_field(&data.v, &l, n, false)?, "v")?;
    let vp = real_samples(&sample_field(&data.v_pot, &l, n, false)?, "V")?;

    let cplx = |x: &[f64]| -> Vec<C64> { x.iter().map(|&r| C64::new(r, 0.0)).collect() };
    let vhat = to_modes(&cplx(&v), grid);
    if vhat[0].norm() > 1e-12 {
        return Err(ZooError::Invalid(format!("v must have zero mean, got {:e}", vhat[0].re)));
    }
    let mut phi_hat = vec![C64::new(0.0, 0.0); grid.len()];
    let mut xi_hat = vec![vec![C64::new(0.0, 0.0); grid.len()]; d];
    for idx in 1..grid.len() {
        if grid.is_nyquist(idx) {
            continue;
        }
        let k: Vec<f64> = grid.freqs(idx).iter().map(|&kj| 2.0 * PI * kj as f64).collect();
        let k2: f64 = k.iter().map(|x| x * x).sum();
        phi_hat[idx] = -vhat[idx] / k2;
        for j in 0..d {
            xi_hat[j][idx] = -C64::new(0.0, k[j]) * phi_hat[idx];
        }
    }

    let len = grid.len();
    let mut a_specs = Vec::with_capacity(d);
    for j in 0..d {
        let eta: Vec<C64> = (0..len)
            .map(|node| C64::new((0..d).map(|m| gv[node * d * d + j * d + m] * a[m][node]).sum(), 0.0))
            .collect();
        let eta_hat = to_modes(&eta, grid);
        let aj: Vec<C64> = eta_hat
            .iter()
            .zip(&xi_hat[j])
            .map(|(e, x)| -e + C64::new(0.0, 1.0) * x)
            .collect();
        a_specs.push(spec_from_modes(&aj, grid)?);
    }
    let q: Vec<C64> = (0..len)
        .map(|node| {
            let mut acc = vp[node];
            for j in 0..d {
                for m in 0..d {
                    acc += a[j][node] * gv[node * d * d + j * d + m] * a[m][node];
                }
            }
            C64::new(acc, 0.0)
        })
        .collect();
    let q_spec = spec_from_modes(&to_modes(&q, grid), grid)?;

    let known_effective = if d == 1 { Some(harmonic_mean(&g)?) } else { None };
    let problem = ProblemSpec {
        name: name.to_string(),
        dim: d,
        n: 1,
        m: d,
        b: None,
        g: data.g.clone(),
        a: a_specs,
        q: q_spec,
        q0: data.q0.clone(),
        domain: data.domain.clone(),
        cell_n: if d == 1 { 1024 } else { 64 },
        known_effective,
        tags: vec![Tag::Schrodinger],
    };
    problem.validate()?;
    Ok(MagneticProblem {
        problem,
        phi: spec_from_modes(&phi_hat, grid)?,
        xi: xi_hat.iter().map(|x| spec_from_modes(x, grid)).collect::<Result<_>>()?,
    })
}
