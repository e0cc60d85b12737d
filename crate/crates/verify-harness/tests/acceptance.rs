use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use bvp_solver::quadrature::l2_norm;
use bvp_solver::{ShiftedSolver, SolverOptions};
use cell_solver::{assemble_g_tilde, effective_matrix, solve_cell, solve_lambda, Coefficients};
use model_zoo::{build_scalar_magnetic, build_zero_corrector_case, magnetic_1d_data, named};
use periodic_core::fourier::spectral_derivative;
use periodic_core::linalg::loewner_le;
use periodic_core::{cell_mean, harmonic_mean, make_cubic_lattice, sample_field, CMat, FieldSpec, SymbolB, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use verify_harness::{c_phi, estimate_c_flat, fit_slope, rho_flat, run_sweep, ErrorRow, Prepared, SmoothLoad, SweepConfig};

type Outcome = Result<(bool, String), String>;

struct Report {
    failed: usize,
}

impl Report {
    fn record(&mut self, id: usize, outcome: Outcome) {
        let (ok, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        if !ok {
            self.failed += 1;
        }
        println!("criterion {id}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn sweep(model: &str, f: impl FnOnce(&mut SweepConfig)) -> Result<(Vec<ErrorRow>, f64), String> {
    let start = Instant::now();
    let p = Prepared::new(&named(model).map_err(|e| e.to_string())?, None).map_err(|e| e.to_string())?;
    let mut cfg = SweepConfig {
        gap_loads: 1,
        jobs: jobs(),
        ..SweepConfig::default()
    };
    f(&mut cfg);
    let rows = run_sweep(&p, &cfg).map_err(|e| e.to_string())?;
    Ok((rows, start.elapsed().as_secs_f64()))
}

fn slope(rows: &[ErrorRow], col: impl Fn(&ErrorRow) -> f64) -> Result<f64, String> {
    let eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    let err: Vec<f64> = rows.iter().map(col).collect();
    fit_slope(&eps, &err).map(|(s, _)| s).map_err(|e| e.to_string())
}

fn coefficients(d: usize, g: &FieldSpec, n: usize) -> Result<Coefficients, String> {
    let l = make_cubic_lattice(d).map_err(|e| e.to_string())?;
    let zero = sample_field(&FieldSpec::zero(1, 1), &l, n, false).map_err(|e| e.to_string())?;
    let one = sample_field(&FieldSpec::scalar_constant(1, 1.0), &l, n, true).map_err(|e| e.to_string())?;
    let gf = sample_field(g, &l, n, true).map_err(|e| e.to_string())?;
    Coefficients::new(l, SymbolB::gradient(d, 1), gf, vec![zero.clone(); d], zero, one).map_err(|e| e.to_string())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let co = coefficients(1, &FieldSpec::expr(1, "2 + sin(2*pi*x1)"), 256)?;
    let g0 = solve_cell(&co).map_err(|e| e.to_string())?.g0[(0, 0)];
    let t = start.elapsed().as_secs_f64();
    let err = (g0 - C64::new(3f64.sqrt(), 0.0)).norm();
    Ok((err <= 1e-8 && t < 1.0, format!("|g0 - sqrt 3| = {err:.2e} (<= 1e-8), {t:.2} s (< 1 s)")))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let g = FieldSpec::piecewise(0, &[0.0, 0.5], &[CMat::identity(2, 2), CMat::identity(2, 2) * C64::new(3.0, 0.0)]);
    let g0 = solve_cell(&coefficients(2, &g, 128)?).map_err(|e| e.to_string())?.g0;
    let t = start.elapsed().as_secs_f64();
    let mut want = CMat::zeros(2, 2);
    want[(0, 0)] = C64::new(1.5, 0.0);
    want[(1, 1)] = C64::new(2.0, 0.0);
    let err = (g0 - want).iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok((err <= 1e-6 && t < 30.0, format!("max |g0 - diag(1.5, 2)| = {err:.2e} (<= 1e-6), {t:.2} s (< 30 s)")))
}

fn random_modes(rng: &mut ChaCha8Rng, base: &CMat, scale: f64) -> Vec<(Vec<i64>, CMat)> {
    let n = base.nrows();
    let mut modes = vec![(vec![0, 0], base.clone())];
    for _ in 0..3 {
        let k = vec![rng.random_range(-2..=2), rng.random_range(1..=2)];
        let mut c = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                c[(i, j)] = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        // entrywise bound keeps the three modes below the smallest eigenvalue of the base
        c *= C64::new(scale / (n as f64), 0.0);
        let minus = k.iter().map(|v| -v).collect();
        modes.push((minus, c.adjoint()));
        modes.push((k, c));
    }
    modes
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let l = make_cubic_lattice(2).map_err(|e| e.to_string())?;
    let b = SymbolB::gradient(2, 1);
    let mut worst = f64::INFINITY;
    let mut ok = true;
    for case in 0..50 {
        let g = if case < 25 {
            let s = FieldSpec::fourier([1, 1], &random_modes(&mut rng, &(CMat::identity(1, 1) * C64::new(2.0, 0.0)), 0.2));
            let gamma = sample_field(&s, &l, 32, true).map_err(|e| e.to_string())?;
            gamma.map(2, 2, |v| CMat::identity(2, 2) * v[(0, 0)])
        } else {
            let base = CMat::from_row_slice(2, 2, &[C64::new(2.0, 0.0), C64::new(0.3, 0.2), C64::new(0.3, -0.2), C64::new(1.5, 0.0)]);
            let s = FieldSpec::fourier([2, 2], &random_modes(&mut rng, &base, 0.15));
            sample_field(&s, &l, 32, true).map_err(|e| e.to_string())?
        };
        let lam = solve_lambda(&g, &b).map_err(|e| e.to_string())?;
        let g0 = effective_matrix(&assemble_g_tilde(&g, &lam.b_field), &g).map_err(|e| e.to_string())?;
        let lower = harmonic_mean(&g).map_err(|e| e.to_string())?;
        let upper = cell_mean(&g);
        ok &= loewner_le(&lower, &g0, 1e-8) && loewner_le(&g0, &upper, 1e-8);
        let gap = periodic_core::linalg::min_eigenvalue(&(&g0 - &lower)).min(periodic_core::linalg::min_eigenvalue(&(&upper - &g0)));
        worst = worst.min(gap);
    }
    let t = start.elapsed().as_secs_f64();
    Ok((ok && t < 120.0, format!("50 fields bracketed, min eigenvalue margin {worst:.2e} (>= -1e-8), {t:.1} s (< 120 s)")))
}

fn rate_line(rows: &[ErrorRow]) -> Result<(f64, f64, f64), String> {
    Ok((slope(rows, |r| r.err_l2)?, slope(rows, |r| r.err_h1_corr)?, slope(rows, |r| r.err_h1_plain)?))
}

fn criteria_4_5(label: &str, rows: &[ErrorRow], t: f64, limit: f64) -> Result<(Outcome, Outcome), String> {
    let (l2, corr, plain) = rate_line(rows)?;
    let c4 = ((0.9..=1.1).contains(&l2) && t < limit, format!("{label}: L2 slope {l2:.3} in [0.9, 1.1], {t:.1} s (< {limit} s)"));
    let c5 = (
        corr >= 0.45 && plain < 0.2,
        format!("{label}: corrected H1 slope {corr:.3} (>= 0.45), corrector-free H1 slope {plain:.3} (< 0.2)"),
    );
    Ok((Ok(c4), Ok(c5)))
}

fn smoothing_gap(rows: &[ErrorRow]) -> Result<f64, String> {
    slope(rows, |r| (r.err_h1_corr - r.err_h1_corr_nosmooth).abs())
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let (rows, _) = sweep("scalar-1d-sine", |c| {
        c.eps_grid = vec![1.0 / 32.0];
        c.zeta_grid = [1.0, 4.0, 16.0, 64.0].iter().map(|m| C64::from_polar(*m, PI)).collect();
    })?;
    let w: Vec<f64> = rows.iter().map(|r| r.err_l2 * r.zeta().norm().sqrt()).collect();
    let ratio = w.iter().cloned().fold(0.0, f64::max) / w.iter().cloned().fold(f64::INFINITY, f64::min);
    let t = start.elapsed().as_secs_f64();
    Ok((ratio <= 4.0 && t < 300.0, format!("max/min of err_l2 |zeta|^(1/2) = {ratio:.3} (<= 4), {t:.1} s (< 300 s)")))
}

fn criterion_9() -> Outcome {
    let spec = named("scalar-1d-sine-long").map_err(|e| e.to_string())?;
    let p = Prepared::new(&spec, None).map_err(|e| e.to_string())?;
    let eps = 1.0 / 32.0;
    let h = eps / 16.0;
    let hom = p.effective(h, None).map_err(|e| e.to_string())?;
    let osc = p.oscillating(eps, h, None).map_err(|e| e.to_string())?;
    let c_flat = estimate_c_flat(&hom, std::slice::from_ref(&osc)).map_err(|e| e.to_string())?;
    let cfg = SweepConfig {
        eps_grid: vec![eps],
        zeta_grid: [2.0, 0.5, 0.125].iter().map(|d| C64::new(c_flat - d, 0.0)).collect(),
        corrector: false,
        gap_loads: 1,
        ..SweepConfig::default()
    };
    let rows = run_sweep(&p, &cfg).map_err(|e| e.to_string())?;
    let mut w = Vec::new();
    for r in &rows {
        w.push(r.err_l2 / rho_flat(r.zeta(), c_flat).map_err(|e| e.to_string())?);
    }
    let ratio = w.iter().cloned().fold(0.0, f64::max) / w.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((ratio <= 4.0, format!("c_flat = {c_flat:.4}, max/min of err_l2 / rho_flat = {ratio:.3} (<= 4)")))
}

fn criterion_10() -> Outcome {
    let spec = build_zero_corrector_case().map_err(|e| e.to_string())?;
    let p = Prepared::new(&spec, None).map_err(|e| e.to_string())?;
    let lam = p.cell.lambda.sup_norm();
    let lam_t = p.cell.lambda_tilde.sup_norm();
    let cfg = SweepConfig {
        corrector: false,
        gap_loads: 1,
        jobs: jobs(),
        ..SweepConfig::default()
    };
    let rows = run_sweep(&p, &cfg).map_err(|e| e.to_string())?;
    let s = slope(&rows, |r| r.err_h1_plain)?;
    Ok((
        lam <= 1e-10 && lam_t <= 1e-10 && s >= 0.9,
        format!("|Lambda| = {lam:.1e}, |Lambda~| = {lam_t:.1e} (<= 1e-10), corrector-free H1 slope {s:.3} (>= 0.9)"),
    ))
}

fn criterion_12() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = 0f64;
    for model in ["scalar-1d-sine", "magnetic-1d"] {
        let p = Prepared::new(&named(model).map_err(|e| e.to_string())?, None).map_err(|e| e.to_string())?;
        let q0_inv = (0..p.coeffs.q0.grid.len())
            .map(|k| 1.0 / periodic_core::linalg::min_eigenvalue(&p.coeffs.q0.at(k)))
            .fold(0.0, f64::max);
        for _ in 0..10 {
            let eps = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0][rng.random_range(0..3)];
            let phi = rng.random_range(0.05..(2.0 * PI - 0.05));
            let zeta = C64::from_polar(10f64.powf(rng.random_range(0.0..2.0)), phi);
            let sys = p.oscillating(eps, eps / 16.0, None).map_err(|e| e.to_string())?;
            let f = SmoothLoad::seeded(&p.spec.domain, 1, rng.random()).on(&sys.mesh.grid);
            let u = ShiftedSolver::new(&sys, zeta, SolverOptions::default())
                .and_then(|s| s.solve_load(&f))
                .map_err(|e| e.to_string())?;
            let lhs = l2_norm(&sys.mesh, &u.u, false).map_err(|e| e.to_string())?;
            let bound = c_phi(phi).map_err(|e| e.to_string())? / zeta.norm() * q0_inv * l2_norm(&sys.mesh, &f, false).map_err(|e| e.to_string())?;
            worst = worst.max(lhs / bound);
        }
    }
    Ok((worst <= 1.05, format!("20 samples, max |u| / (c(phi) |zeta|^-1 |Q0^-1| |F|) = {worst:.3} (<= 1.05)")))
}

fn criterion_13(sweep_rows: &[ErrorRow], t: f64) -> Outcome {
    let data = magnetic_1d_data();
    let mp = build_scalar_magnetic("magnetic-1d", &data).map_err(|e| e.to_string())?;
    let l = make_cubic_lattice(1).map_err(|e| e.to_string())?;
    let v = sample_field(&data.v, &l, 32, false).map_err(|e| e.to_string())?;
    let mut div = vec![C64::new(0.0, 0.0); v.values.len()];
    for (j, xi) in mp.xi.iter().enumerate() {
        let s = sample_field(xi, &l, 32, false).map_err(|e| e.to_string())?;
        for (acc, dj) in div.iter_mut().zip(spectral_derivative(&s.values, s.grid, j)) {
            *acc -= dj;
        }
    }
    let err = div.iter().zip(&v.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let (c4, c5) = criteria_4_5("magnetic-1d", sweep_rows, t, 60.0)?;
    let (c4, c5) = (c4?, c5?);
    Ok((err <= 1e-10 && c4.0 && c5.0, format!("reconstruction error {err:.1e} (<= 1e-10); {}; {}", c4.1, c5.1)))
}

fn main() -> ExitCode {
    let mut report = Report { failed: 0 };
    report.record(1, criterion_1());
    report.record(2, criterion_2());
    report.record(3, criterion_3());

    let one = sweep("scalar-1d-sine", |c| c.boundary_layer = true);
    let two = sweep("laminate-13", |c| c.interior_margin = Some(0.25));
    let mag = sweep("magnetic-1d", |_| ());
    let split = |r: &Result<(Vec<ErrorRow>, f64), String>, label: &str, limit: f64| -> (Outcome, Outcome) {
        match r {
            Ok((rows, t)) => match criteria_4_5(label, rows, *t, limit) {
                Ok(v) => v,
                Err(e) => (Err(e.clone()), Err(e)),
            },
            Err(e) => (Err(e.clone()), Err(e.clone())),
        }
    };
    let (c4a, c5a) = split(&one, "scalar-1d-sine", 60.0);
    let (c4b, c5b) = split(&two, "laminate-13", 600.0);
    let both = |a: Outcome, b: Outcome| -> Outcome {
        let (a, b) = (a?, b?);
        Ok((a.0 && b.0, format!("{}; {}", a.1, b.1)))
    };
    report.record(4, both(c4a, c4b));
    report.record(5, both(c5a, c5b));

    report.record(
        6,
        one.as_ref().map_err(Clone::clone).and_then(|(rows, _)| {
            let s = slope(rows, |r| r.err_h1_bl)?;
            Ok((s >= 0.9, format!("scalar-1d-sine: boundary-layer H1 slope {s:.3} (>= 0.9)")))
        }),
    );
    report.record(
        7,
        two.as_ref().map_err(Clone::clone).and_then(|(rows, _)| {
            let s = slope(rows, |r| r.err_h1_interior)?;
            Ok((s >= 0.9, format!("laminate-13: interior H1 slope {s:.3} with margin 1/4 (>= 0.9)")))
        }),
    );
    report.record(8, criterion_8());
    report.record(9, criterion_9());
    report.record(10, criterion_10());

    let c11 = (|| -> Outcome {
        let mut ok = true;
        let mut parts = Vec::new();
        for (label, r) in [("scalar-1d-sine", &one), ("laminate-13", &two), ("magnetic-1d", &mag)] {
            let s = smoothing_gap(&r.as_ref().map_err(Clone::clone)?.0)?;
            ok &= s >= 0.9;
            parts.push(format!("{label} {s:.3}"));
        }
        Ok((ok, format!("slope of |smoothed - unsmoothed| H1 error: {} (>= 0.9)", parts.join(", "))))
    })();
    report.record(11, c11);
    report.record(12, criterion_12());
    report.record(13, mag.as_ref().map_err(Clone::clone).and_then(|(rows, t)| criterion_13(rows, *t)));

    if report.failed == 0 {
        println!("all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{} criteria failed", report.failed);
        ExitCode::FAILURE
    }
}
