use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::norms::ErrorRow;
use crate::{HarnessError, Result};

/// Least-squares line through `(log ε, log err)`: `(slope, intercept)`.
pub fn fit_slope(eps: &[f64], err: &[f64]) -> Result<(f64, f64)> {
    if eps.len() != err.len() || eps.len() < 4 {
        return Err(HarnessError::InsufficientPoints(eps.len().min(err.len())));
    }
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Thresholds; `None` disables a criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criteria {
    pub l2_slope: Option<(f64, f64)>,
    pub h1_corr_min: Option<f64>,
    /// Upper bound on the slope of the corrector-free `H¹` error.
    pub h1_plain_max: Option<f64>,
    pub bl_min: Option<f64>,
    pub interior_min: Option<f64>,
    /// Bound on `max/min` of `err_l2·|ζ|^{1/2}` along a ray at fixed `ε`.
    pub zeta_ratio_max: Option<f64>,
}

impl Default for Criteria {
    fn default() -> Self {
        Self {
            l2_slope: Some((0.9, 1.1)),
            h1_corr_min: Some(0.45),
            h1_plain_max: None,
            bl_min: Some(0.9),
            interior_min: Some(0.9),
            zeta_ratio_max: Some(4.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnFit {
    pub column: String,
    pub zeta_re: f64,
    pub zeta_im: f64,
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaDiagnostic {
    pub epsilon: f64,
    pub phi: f64,
    /// `max/min` of `err_l2·|ζ|^{1/2}` over the ray.
    pub ratio: f64,
    /// `max` of `err_l2·|ζ|^{1/2}`.
    pub max_weighted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub name: String,
    pub value: f64,
    pub threshold: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub fits: Vec<ColumnFit>,
    pub zeta_diagnostics: Vec<ZetaDiagnostic>,
    pub criteria: Vec<CriterionResult>,
    pub passed: bool,
}

impl RateReport {
    pub fn fit<'a>(&'a self, column: &'a str) -> impl Iterator<Item = &'a ColumnFit> {
        self.fits.iter().filter(move |f| f.column == column)
    }
}

type Column = (&'static str, fn(&ErrorRow) -> f64);

const COLUMNS: [Column; 7] = [
    ("err_l2", |r| r.err_l2),
    ("err_h1_plain", |r| r.err_h1_plain),
    ("err_h1_corr", |r| r.err_h1_corr),
    ("err_h1_corr_nosmooth", |r| r.err_h1_corr_nosmooth),
    ("err_h1_bl", |r| r.err_h1_bl),
    ("err_h1_interior", |r| r.err_h1_interior),
    ("err_flux", |r| r.err_flux),
];

fn key(x: f64) -> u64 {
    x.to_bits()
}

/// Slopes per column and `ζ`, ray diagnostics per `ε`, and the verdicts.
pub fn fit_and_judge(rows: &[ErrorRow], criteria: &Criteria) -> Result<RateReport> {
    let mut by_zeta: BTreeMap<(u64, u64), Vec<&ErrorRow>> = BTreeMap::new();
    for r in rows {
        by_zeta.entry((key(r.zeta_re), key(r.zeta_im))).or_default().push(r);
    }
    let mut fits = Vec::new();
    let mut results = Vec::new();
    for group in by_zeta.values() {
        if group.len() < 4 {
            return Err(HarnessError::InsufficientPoints(group.len()));
        }
        let (zr, zi) = (group[0].zeta_re, group[0].zeta_im);
        let eps: Vec<f64> = group.iter().map(|r| r.epsilon).collect();
        for (name, get) in COLUMNS {
            let vals: Vec<f64> = group.iter().map(|r| get(r)).collect();
            if vals.iter().any(|v| !v.is_finite() || *v <= 0.0) {
                continue;
            }
            let (slope, intercept) = fit_slope(&eps, &vals)?;
            fits.push(ColumnFit {
                column: name.to_string(),
                zeta_re: zr,
                zeta_im: zi,
                slope,
                intercept,
                points: vals.len(),
            });
        }
        let slope_of = |c: &str| fits.iter().rev().find(|f| f.column == c && f.zeta_re == zr && f.zeta_im == zi).map(|f| f.slope);
        let tag = format!("ζ = {zr}{:+}i", zi);
        let present = |get: fn(&ErrorRow) -> f64| group.iter().all(|r| !get(r).is_nan());
        let mut judge = |name: &str, value: Option<f64>, threshold: String, ok: &dyn Fn(f64) -> bool| {
            let value = value.unwrap_or(f64::NAN);
            results.push(CriterionResult {
                name: format!("{name} ({tag})"),
                value,
                threshold,
                passed: value.is_finite() && ok(value),
            });
        };
        if let Some((lo, hi)) = criteria.l2_slope {
            judge("L2 slope", slope_of("err_l2"), format!("[{lo}, {hi}]"), &|s| (lo..=hi).contains(&s));
        }
        if let Some(lo) = criteria.h1_corr_min {
            judge("H1 corrector slope", slope_of("err_h1_corr"), format!(">= {lo}"), &|s| s >= lo);
        }
        if let Some(hi) = criteria.h1_plain_max {
            judge("H1 corrector-free slope", slope_of("err_h1_plain"), format!("< {hi}"), &|s| s < hi);
        }
        if let (Some(lo), true) = (criteria.bl_min, present(|r| r.err_h1_bl)) {
            judge("H1 boundary-layer slope", slope_of("err_h1_bl"), format!(">= {lo}"), &|s| s >= lo);
        }
        if let (Some(lo), true) = (criteria.interior_min, present(|r| r.err_h1_interior)) {
            judge("H1 interior slope", slope_of("err_h1_interior"), format!(">= {lo}"), &|s| s >= lo);
        }
    }

    let mut rays: BTreeMap<(u64, u64), Vec<&ErrorRow>> = BTreeMap::new();
    for r in rows {
        rays.entry((key(r.epsilon), key(r.phi))).or_default().push(r);
    }
    let mut zeta_diagnostics = Vec::new();
    for ray in rays.values() {
        if ray.len() < 2 {
            continue;
        }
        let w: Vec<f64> = ray.iter().map(|r| r.err_l2 * r.zeta().norm().sqrt()).collect();
        let (lo, hi) = w.iter().fold((f64::INFINITY, 0f64), |(a, b), &x| (a.min(x), b.max(x)));
        let diag = ZetaDiagnostic {
            epsilon: ray[0].epsilon,
            phi: ray[0].phi,
            ratio: hi / lo,
            max_weighted: hi,
        };
        if let Some(max) = criteria.zeta_ratio_max {
            results.push(CriterionResult {
                name: format!("zeta scaling (ε = {}, φ = {:.4})", diag.epsilon, diag.phi),
                value: diag.ratio,
                threshold: format!("<= {max}"),
                passed: diag.ratio <= max,
            });
        }
        zeta_diagnostics.push(diag);
    }
    let passed = results.iter().all(|c| c.passed);
    Ok(RateReport {
        fits,
        zeta_diagnostics,
        criteria: results,
        passed,
    })
}
