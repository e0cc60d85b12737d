//! `homog`: cell solves, effective operators, single solves, sweeps and
//! rate verification for periodic homogenization problems.

mod config;
mod error;

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;
use std::process::ExitCode;

use bvp_solver::{boundary_layer_with, flux_at_points, ShiftedSolver};
use clap::{Parser, Subcommand};
use corrector::first_order_approx;
use periodic_core::{CMat, C64};
use verify_harness::{error_norms, estimate_c_flat, fit_and_judge, read_csv, run_sweep, write_csv, Prepared, RateReport};

use config::{Mode, Overrides, RunConfig};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "homog", version, about = "Periodic homogenization: cell problems, resolvent solves and rate checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solves the cell problems and prints g⁰, V, W and the shift λ.
    Cell,
    /// Prints the effective operator as JSON.
    Effective,
    /// Solves at one (ε, ζ) and prints the error row.
    Solve,
    /// Runs the (ε, ζ) sweep and writes the CSV table.
    Sweep,
    /// Runs the sweep, fits the rates and judges the criteria.
    Verify,
    /// Fits and judges a previously written CSV table.
    Report {
        /// CSV file written by `sweep`.
        input: std::path::PathBuf,
    },
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn complex(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

fn matrix(m: &CMat) -> String {
    let rows: Vec<String> = m
        .row_iter()
        .map(|r| r.iter().map(|&z| complex(z)).collect::<Vec<_>>().join(", "))
        .collect();
    format!("[{}]", rows.join("; "))
}

fn prepare(cfg: &RunConfig) -> Result<Prepared, CliError> {
    Ok(Prepared::new(&cfg.model()?, cfg.cell_n)?)
}

/// In rho-flat mode every `ζ` must lie below the estimated `c_♭`.
fn check_flat(p: &Prepared, cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.mode != Mode::RhoFlat || cfg.eps_grid.is_empty() {
        return Ok(());
    }
    let h = cfg.eps_grid.iter().cloned().fold(f64::INFINITY, f64::min) / cfg.ratio as f64;
    let hom = p.effective(h, cfg.interior_margin)?;
    let mut osc = Vec::new();
    for &e in &cfg.eps_grid {
        osc.push(p.oscillating(e, e / cfg.ratio as f64, cfg.interior_margin)?);
    }
    let c_flat = estimate_c_flat(&hom, &osc)?;
    eprintln!("c_flat = {c_flat}");
    match cfg.zetas().into_iter().find(|z| z.re >= c_flat) {
        Some(z) => Err(CliError::Config(format!("inadmissible ζ = {z}: rho-flat mode needs ζ < c_♭ = {c_flat}"))),
        None => Ok(()),
    }
}

fn cmd_cell(cfg: &RunConfig) -> Result<(), CliError> {
    let p = prepare(cfg)?;
    let mut out = io::stdout().lock();
    writeln!(out, "model: {}", p.spec.name)?;
    writeln!(out, "g0: {}", matrix(&p.cell.g0))?;
    writeln!(out, "V: {}", matrix(&p.cell.v))?;
    writeln!(out, "W: {}", matrix(&p.cell.w))?;
    writeln!(out, "lambda: {}", p.eff.lambda_shift)?;
    writeln!(out, "residuals: {:e} {:e}", p.cell.residuals[0], p.cell.residuals[1])?;
    if let Some(d) = p.cell.drift {
        writeln!(out, "drift: {d:e}")?;
    }
    if let Some(path) = &cfg.out {
        serde_json::to_writer(output(Some(path))?, &p.cell)?;
    }
    Ok(())
}

fn cmd_effective(cfg: &RunConfig) -> Result<(), CliError> {
    let p = prepare(cfg)?;
    let mut w = output(cfg.out.as_deref())?;
    serde_json::to_writer_pretty(&mut w, &p.eff)?;
    writeln!(w)?;
    Ok(())
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    serde_json::to_writer(output(Some(&dir.join(name)))?, value)?;
    Ok(())
}

fn cmd_solve(cfg: &RunConfig) -> Result<(), CliError> {
    let zetas = cfg.zetas();
    let (&[eps], &[zeta]) = (cfg.eps_grid.as_slice(), zetas.as_slice()) else {
        return Err(CliError::Config("solve takes exactly one ε and one ζ".into()));
    };
    let p = prepare(cfg)?;
    check_flat(&p, cfg)?;
    let h = eps / cfg.ratio as f64;
    let osc = p.oscillating(eps, h, cfg.interior_margin)?;
    let hom = p.effective(h, cfg.interior_margin)?;
    let mesh = &osc.mesh;
    let load = verify_harness::SmoothLoad::seeded(&p.spec.domain, p.coeffs.n(), cfg.seed).on(&mesh.grid);
    let so = ShiftedSolver::new(&osc, zeta, cfg.solver)?;
    let ue = so.solve_load(&load)?;
    let u0 = ShiftedSolver::new(&hom, zeta, cfg.solver)?.solve_load(&load)?;
    let smooth = first_order_approx(&u0.u, mesh, &p.coeffs, &p.cell, eps, cfg.smoothing)?;
    let plain = first_order_approx(&u0.u, mesh, &p.coeffs, &p.cell, eps, false)?;
    let w = match cfg.boundary_layer && cfg.corrector {
        true => Some(boundary_layer_with(&so, &smooth.w_trace)?),
        false => None,
    };
    let flux = flux_at_points(mesh, &p.coeffs, eps, &ue.u)?;
    let corr = cfg.corrector.then_some(&smooth);
    let mut row = error_norms(mesh, &ue, &u0, corr, Some(&plain), w.as_ref(), cfg.corrector.then_some(&flux))?;
    row.wall_s = ue.wallclock + u0.wallclock;
    write_csv(&[row], cfg.timing, io::stdout().lock())?;
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        write_json(dir, "u_eps.json", &ue)?;
        write_json(dir, "u0.json", &u0)?;
        write_json(dir, "v_eps.json", &smooth.v_eps)?;
        if let Some(w) = &w {
            write_json(dir, "w_eps.json", w)?;
        }
    }
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let p = prepare(cfg)?;
    check_flat(&p, cfg)?;
    let rows = run_sweep(&p, &cfg.sweep())?;
    write_csv(&rows, cfg.timing, output(cfg.out.as_deref())?)?;
    Ok(())
}

fn judge(rep: &RateReport, cfg: &RunConfig) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    for f in &rep.fits {
        writeln!(out, "slope {} (ζ = {}): {:.4}", f.column, complex(C64::new(f.zeta_re, f.zeta_im)), f.slope)?;
    }
    for c in &rep.criteria {
        writeln!(out, "{} {}: {:.4} (needs {})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.threshold)?;
    }
    if let Some(path) = &cfg.out {
        serde_json::to_writer_pretty(output(Some(path))?, rep)?;
    }
    if rep.passed {
        Ok(())
    } else {
        Err(CliError::Criteria)
    }
}

fn cmd_verify(cfg: &RunConfig) -> Result<(), CliError> {
    let p = prepare(cfg)?;
    check_flat(&p, cfg)?;
    let rows = run_sweep(&p, &cfg.sweep())?;
    judge(&fit_and_judge(&rows, &cfg.criteria)?, cfg)
}

fn cmd_report(cfg: &RunConfig, input: &Path) -> Result<(), CliError> {
    let file = File::open(input).map_err(|e| CliError::Config(format!("{}: {e}", input.display())))?;
    let rows = read_csv(file)?;
    judge(&fit_and_judge(&rows, &cfg.criteria)?, cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(&cli.overrides)?;
    if !matches!(cli.command, Command::Report { .. }) {
        cfg.validate()?;
    }
    match &cli.command {
        Command::Cell => cmd_cell(&cfg),
        Command::Effective => cmd_effective(&cfg),
        Command::Solve => cmd_solve(&cfg),
        Command::Sweep => cmd_sweep(&cfg),
        Command::Verify => cmd_verify(&cfg),
        Command::Report { input } => cmd_report(&cfg, input),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
