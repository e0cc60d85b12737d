use std::io::{Read, Write};

use bvp_solver::quadrature::{h1_norm, l2_norm, quadrature_l2_norm};
use bvp_solver::{DomainMesh, QuadratureField, SolveResult};
use corrector::CorrectorOutput;
use periodic_core::{GridFunction, C64};
use serde::{Deserialize, Serialize};

use crate::weights::arg_2pi;
use crate::{HarnessError, Result};

pub const CSV_HEADER: &str =
    "epsilon,zeta_re,zeta_im,phi,err_l2,err_h1_plain,err_h1_corr,err_h1_corr_nosmooth,err_h1_bl,err_h1_interior,err_flux,gap_l2,wall_s";

/// One `(ε, ζ)` point. Quantities that were not requested are `NaN`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub epsilon: f64,
    pub zeta_re: f64,
    pub zeta_im: f64,
    pub phi: f64,
    /// `‖u_ε − u₀‖_{L²(O)}`.
    pub err_l2: f64,
    /// `‖u_ε − u₀‖_{H¹(O)}`.
    pub err_h1_plain: f64,
    /// `‖u_ε − v_ε‖_{H¹(O)}`.
    pub err_h1_corr: f64,
    /// Same with the corrector taken without smoothing.
    pub err_h1_corr_nosmooth: f64,
    /// `‖u_ε − v_ε + w_ε‖_{H¹(O)}`.
    pub err_h1_bl: f64,
    /// `‖u_ε − v_ε‖_{H¹(O′)}`.
    pub err_h1_interior: f64,
    /// `‖p_ε − flux approximation‖_{L²(O)}`.
    pub err_flux: f64,
    /// Largest `‖u_ε − u₀‖/‖F‖` over the sampled loads.
    pub gap_l2: f64,
    pub wall_s: f64,
}

impl ErrorRow {
    pub fn zeta(&self) -> C64 {
        C64::new(self.zeta_re, self.zeta_im)
    }
}

fn combine(a: &GridFunction, b: &GridFunction, s: f64) -> GridFunction {
    GridFunction {
        values: a.values.iter().zip(&b.values).map(|(x, y)| x + y * s).collect(),
        ..a.clone()
    }
}

/// Discrete norms of every error for one solve. `corr = None` takes
/// `v_ε = u₀`; `w`, `nosmooth` and `flux_eps` are optional columns.
pub fn error_norms(
    mesh: &DomainMesh,
    u_eps: &SolveResult,
    u0: &SolveResult,
    corr: Option<&CorrectorOutput>,
    nosmooth: Option<&CorrectorOutput>,
    w: Option<&SolveResult>,
    flux_eps: Option<&QuadratureField>,
) -> Result<ErrorRow> {
    let on_mesh = |g: &GridFunction| g.grid == mesh.grid;
    let mut ok = on_mesh(&u_eps.u) && on_mesh(&u0.u) && u_eps.zeta == u0.zeta;
    ok &= corr.is_none_or(|c| on_mesh(&c.v_eps)) && nosmooth.is_none_or(|c| on_mesh(&c.v_eps)) && w.is_none_or(|w| on_mesh(&w.u));
    if !ok {
        return Err(HarnessError::Mesh("inputs live on different meshes or at different ζ".into()));
    }
    let plain = combine(&u_eps.u, &u0.u, -1.0);
    let v = corr.map_or(&u0.u, |c| &c.v_eps);
    let diff = combine(&u_eps.u, v, -1.0);
    let h1 = |g: &GridFunction| h1_norm(mesh, g, false);
    let err_h1_corr_nosmooth = match nosmooth {
        Some(c) => h1(&combine(&u_eps.u, &c.v_eps, -1.0))?,
        None => f64::NAN,
    };
    let err_h1_bl = match w {
        Some(w) => h1(&combine(&diff, &w.u, 1.0))?,
        None => f64::NAN,
    };
    let err_h1_interior = if mesh.inner.is_some() { h1_norm(mesh, &diff, true)? } else { f64::NAN };
    let err_flux = match (flux_eps, corr) {
        (Some(p), Some(c)) => quadrature_l2_norm(mesh, &p.difference(&c.flux), false)?,
        _ => f64::NAN,
    };
    let zeta = u_eps.zeta;
    Ok(ErrorRow {
        epsilon: u_eps.epsilon.unwrap_or(f64::NAN),
        zeta_re: zeta.re,
        zeta_im: zeta.im,
        phi: arg_2pi(zeta),
        err_l2: l2_norm(mesh, &plain, false)?,
        err_h1_plain: h1(&plain)?,
        err_h1_corr: h1(&diff)?,
        err_h1_corr_nosmooth,
        err_h1_bl,
        err_h1_interior,
        err_flux,
        gap_l2: f64::NAN,
        wall_s: f64::NAN,
    })
}

/// Writes rows under [`CSV_HEADER`]; without `wallclock` the timing column
/// is left empty so that equal inputs give byte-identical files.
pub fn write_csv<W: Write>(rows: &[ErrorRow], wallclock: bool, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        let mut r = r.clone();
        if !wallclock {
            r.wall_s = f64::NAN;
        }
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ErrorRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(HarnessError::Config(format!("unexpected CSV header {}", header.join(","))));
    }
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}
