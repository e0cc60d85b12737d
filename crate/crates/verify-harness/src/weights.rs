use std::f64::consts::PI;

use periodic_core::C64;

use crate::{HarnessError, Result};

/// `c(φ)`: `|sin φ|⁻¹` for `φ ∈ (0, π/2) ∪ (3π/2, 2π)`, 1 on `[π/2, 3π/2]`.
pub fn c_phi(phi: f64) -> Result<f64> {
    if !(phi > 0.0 && phi < 2.0 * PI) {
        return Err(HarnessError::Admissibility(format!("φ = {phi} is not in (0, 2π)")));
    }
    if (PI / 2.0..=1.5 * PI).contains(&phi) {
        Ok(1.0)
    } else {
        Ok(1.0 / phi.sin().abs())
    }
}

/// `arg ζ` in `[0, 2π)`.
pub fn arg_2pi(z: C64) -> f64 {
    let a = z.arg();
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// `ρ_♭(ζ) = c(ψ)²|ζ − c_♭|⁻²` when `|ζ − c_♭| < 1`, `c(ψ)²` otherwise,
/// with `ψ = arg(ζ − c_♭)`.
pub fn rho_flat(zeta: C64, c_flat: f64) -> Result<f64> {
    let z = zeta - c_flat;
    if z.im == 0.0 && z.re >= 0.0 {
        return Err(HarnessError::Admissibility(format!("ζ = {zeta} lies on [c_♭, ∞) with c_♭ = {c_flat}")));
    }
    let c = c_phi(arg_2pi(z))?;
    let r = z.norm();
    Ok(if r < 1.0 { c * c / (r * r) } else { c * c })
}
