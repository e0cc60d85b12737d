use std::path::PathBuf;

use bvp_solver::SolverOptions;
use model_zoo::ProblemSpec;
use periodic_core::C64;
use serde::{Deserialize, Serialize};
use verify_harness::{Criteria, SweepConfig};

use crate::error::CliError;

/// A catalogue name or file path, or a full inline specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelRef {
    Name(String),
    Inline(Box<ProblemSpec>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// `ζ` off the closed half-line `[0, ∞)`.
    #[default]
    Standard,
    /// Real `ζ` below the estimated spectral floor `c_♭`.
    RhoFlat,
}

/// `ζ = r e^{iφ}` for each `r` in `magnitudes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub phi: f64,
    pub magnitudes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<ModelRef>,
    pub cell_n: Option<usize>,
    /// `ε/h`.
    pub ratio: usize,
    pub eps_grid: Vec<f64>,
    /// Explicit `ζ` values as `[re, im]`.
    pub zeta_grid: Vec<C64>,
    pub ray: Option<Ray>,
    pub corrector: bool,
    pub smoothing: bool,
    pub boundary_layer: bool,
    pub interior_margin: Option<f64>,
    pub seed: u64,
    pub gap_loads: usize,
    pub jobs: usize,
    pub mode: Mode,
    /// Records wall-clock seconds in the CSV; off keeps outputs reproducible.
    pub timing: bool,
    pub out: Option<PathBuf>,
    pub criteria: Criteria,
    pub solver: SolverOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = SweepConfig::default();
        Self {
            model: None,
            cell_n: None,
            ratio: s.ratio,
            eps_grid: s.eps_grid,
            zeta_grid: Vec::new(),
            ray: None,
            corrector: s.corrector,
            smoothing: s.smoothing,
            boundary_layer: s.boundary_layer,
            interior_margin: None,
            seed: s.seed,
            gap_loads: s.gap_loads,
            jobs: s.jobs,
            mode: Mode::Standard,
            timing: false,
            out: None,
            criteria: Criteria::default(),
            solver: s.solver,
        }
    }
}

/// Command-line overrides; every field left `None` keeps the file value.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Catalogue name, `models/<name>.json` or a path to a spec file.
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// Cell grid resolution per axis.
    #[arg(long, global = true)]
    pub cell_n: Option<usize>,
    /// Comma-separated ε values, as decimals or `1/K`.
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_fraction)]
    pub eps: Option<Vec<f64>>,
    /// Comma-separated real parts of ζ.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub zeta_re: Option<Vec<f64>>,
    /// Comma-separated imaginary parts of ζ, paired with `--zeta-re`.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub zeta_im: Option<Vec<f64>>,
    /// Ray angle in (0, 2π); used with `--mags`.
    #[arg(long, global = true)]
    pub phi: Option<f64>,
    /// Comma-separated |ζ| values along the ray.
    #[arg(long, global = true, value_delimiter = ',')]
    pub mags: Option<Vec<f64>>,
    /// ε/h, at least 16.
    #[arg(long, global = true)]
    pub ratio: Option<usize>,
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub no_smoothing: bool,
    /// Measures u_ε − u₀ in place of u_ε − v_ε.
    #[arg(long, global = true)]
    pub no_corrector: bool,
    #[arg(long, global = true)]
    pub boundary_layer: bool,
    /// Distance of the interior subdomain from the boundary.
    #[arg(long, global = true)]
    pub interior_margin: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<Mode>,
    /// Records wall-clock seconds in CSV output.
    #[arg(long, global = true)]
    pub timing: bool,
}

pub fn parse_fraction(s: &str) -> Result<f64, String> {
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{s}': {e}"));
    match s.split_once('/') {
        Some((a, b)) => Ok(parse(a)? / parse(b)?),
        None => parse(s),
    }
}

impl RunConfig {
    /// Reads the `--config` file, if any, and applies the flags on top.
    pub fn resolve(o: &Overrides) -> Result<Self, CliError> {
        let mut c = match &o.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        c.apply(o)?;
        Ok(c)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(m) = &o.model {
            self.model = Some(ModelRef::Name(m.clone()));
        }
        if let Some(n) = o.cell_n {
            self.cell_n = Some(n);
        }
        if let Some(e) = &o.eps {
            self.eps_grid = e.clone();
        }
        if o.zeta_re.is_some() || o.zeta_im.is_some() {
            let re = o.zeta_re.clone().unwrap_or_default();
            let im = o.zeta_im.clone().unwrap_or_else(|| vec![0.0; re.len()]);
            if re.len() != im.len() {
                return Err(CliError::Config(format!("{} real parts but {} imaginary parts", re.len(), im.len())));
            }
            self.zeta_grid = re.iter().zip(&im).map(|(&r, &i)| C64::new(r, i)).collect();
            self.ray = None;
        }
        match (o.phi, &o.mags) {
            (Some(phi), Some(m)) => {
                self.ray = Some(Ray { phi, magnitudes: m.clone() });
                if o.zeta_re.is_none() && o.zeta_im.is_none() {
                    self.zeta_grid.clear();
                }
            }
            (None, None) => {}
            _ => return Err(CliError::Config("--phi and --mags go together".into())),
        }
        if let Some(r) = o.ratio {
            self.ratio = r;
        }
        if let Some(j) = o.jobs {
            self.jobs = j;
        }
        if let Some(p) = &o.out {
            self.out = Some(p.clone());
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        self.smoothing &= !o.no_smoothing;
        self.corrector &= !o.no_corrector;
        self.boundary_layer |= o.boundary_layer;
        if let Some(m) = o.interior_margin {
            self.interior_margin = Some(m);
        }
        if let Some(m) = o.mode {
            self.mode = m;
        }
        self.timing |= o.timing;
        Ok(())
    }

    /// Explicit values followed by the ray, without repeats; `ζ = −1` when
    /// both are empty. Ray points drop rounding-level parts, so `φ = π`
    /// gives exactly real `ζ`.
    pub fn zetas(&self) -> Vec<C64> {
        let snap = |z: C64| {
            let tol = 1e-14 * z.norm();
            let clean = |v: f64| if v.abs() <= tol { 0.0 } else { v };
            C64::new(clean(z.re), clean(z.im))
        };
        let mut z = self.zeta_grid.clone();
        if let Some(r) = &self.ray {
            z.extend(r.magnitudes.iter().map(|&m| snap(C64::from_polar(m, r.phi))));
        }
        if z.is_empty() {
            z.push(C64::new(-1.0, 0.0));
        }
        let mut out: Vec<C64> = Vec::with_capacity(z.len());
        for v in z {
            if !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }

    pub fn model(&self) -> Result<ProblemSpec, CliError> {
        match &self.model {
            Some(ModelRef::Name(n)) => Ok(model_zoo::load(n)?),
            Some(ModelRef::Inline(spec)) => {
                spec.validate()?;
                Ok((**spec).clone())
            }
            None => Err(CliError::Config("no model given (use --model or the config file)".into())),
        }
    }

    /// Checks the grid rules and, in standard mode, the position of `ζ`.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.ratio < 16 {
            return bad(format!("ratio ε/h = {} must be at least 16", self.ratio));
        }
        if self.corrector && self.ratio % 2 != 0 {
            return bad(format!("ratio ε/h = {} must be even for the corrector", self.ratio));
        }
        for &e in &self.eps_grid {
            let k = (1.0 / e).round();
            if !(e > 0.0 && e <= 1.0 && (k * e - 1.0).abs() <= 1e-9) {
                return bad(format!("ε = {e} is not of the form 1/K"));
            }
        }
        if let Some(r) = &self.ray {
            if !(r.phi > 0.0 && r.phi < 2.0 * std::f64::consts::PI) {
                return bad(format!("ray angle φ = {} is not in (0, 2π)", r.phi));
            }
            if r.magnitudes.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
                return bad("ray magnitudes must be positive".into());
            }
        }
        for z in self.zetas() {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return bad(format!("ζ = {z} is not finite"));
            }
            match self.mode {
                Mode::Standard if z.im == 0.0 && z.re >= 0.0 => {
                    return bad(format!("inadmissible ζ = {z}: standard mode needs ζ off [0, ∞)"));
                }
                Mode::RhoFlat if z.im != 0.0 => {
                    return bad(format!("inadmissible ζ = {z}: rho-flat mode takes real ζ below c_♭"));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn sweep(&self) -> SweepConfig {
        SweepConfig {
            eps_grid: self.eps_grid.clone(),
            zeta_grid: self.zetas(),
            ratio: self.ratio,
            seed: self.seed,
            corrector: self.corrector,
            smoothing: self.smoothing,
            boundary_layer: self.boundary_layer,
            interior_margin: self.interior_margin,
            gap_loads: self.gap_loads,
            cell_n: self.cell_n,
            jobs: self.jobs,
            solver: self.solver,
        }
    }
}
