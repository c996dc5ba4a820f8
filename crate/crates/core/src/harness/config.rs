//! Experiment configuration: a flat TOML file whose keys double as CLI
//! flags. Values given on the command line override the file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::analytics::{ChannelParams, DetectionSpec};
use crate::error::{config, Error, Result};
use crate::sim::{AbsorptionMode, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Analytic,
    Simulate,
    Compare,
    Figure(Figure),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Figure {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
        }
    }
}

impl Mode {
    fn parse(mode: &str, figure: Option<&str>) -> Result<Self> {
        Ok(match mode {
            "analytic" => Mode::Analytic,
            "simulate" => Mode::Simulate,
            "compare" => Mode::Compare,
            "figure" => {
                let fig = figure.ok_or_else(|| config("figure", "required when mode = \"figure\""))?;
                Mode::Figure(match fig {
                    "fig3" => Figure::Fig3,
                    "fig4" => Figure::Fig4,
                    "fig5" => Figure::Fig5,
                    "fig6" => Figure::Fig6,
                    other => return Err(config("figure", format!("unknown figure `{other}` (fig3..fig6)"))),
                })
            }
            other => {
                return Err(config(
                    "mode",
                    format!("unknown mode `{other}` (analytic|simulate|compare|figure)"),
                ))
            }
        })
    }

    pub fn name(self) -> String {
        match self {
            Mode::Analytic => "analytic".into(),
            Mode::Simulate => "simulate".into(),
            Mode::Compare => "compare".into(),
            Mode::Figure(f) => format!("figure {}", f.name()),
        }
    }
}

/// Raw configuration keys. Every field is optional so that a file and the
/// command line can be merged before validation.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct ConfigKeys {
    #[arg(skip)]
    pub mode: Option<String>,
    #[arg(skip)]
    pub figure: Option<String>,

    /// Receiver radius (µm).
    #[arg(long = "a-um", visible_alias = "a")]
    pub a_um: Option<f64>,
    /// Diffusion coefficient (µm²/s).
    #[serde(rename = "D_um2_per_s")]
    #[arg(long = "D-um2-per-s", visible_alias = "D")]
    pub d_um2_per_s: Option<f64>,
    /// Receiver density (1/µm³).
    #[arg(long = "lambda-per-um3", visible_alias = "lambda")]
    pub lambda_per_um3: Option<f64>,
    /// Degradation rate (1/s).
    #[arg(long = "mu-per-s", visible_alias = "mu")]
    pub mu_per_s: Option<f64>,

    /// Simulation step (s).
    #[arg(long = "dt-s", visible_alias = "dt")]
    pub dt_s: Option<f64>,
    /// Simulation horizon (s).
    #[arg(long = "t-end-s", visible_alias = "t-end")]
    pub t_end_s: Option<f64>,
    /// Particles per estimate, or replications for detection estimates.
    #[arg(long)]
    pub particles: Option<u64>,
    #[arg(long = "domain-multiplier")]
    pub domain_multiplier: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `endpoint`, `segment` or `bridge`.
    #[arg(long = "absorption-mode")]
    pub absorption_mode: Option<String>,
    #[arg(long = "fresh-field-per-particle")]
    pub fresh_field_per_particle: Option<bool>,
    /// Worker threads; outputs do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long = "max-escape-rate")]
    pub max_escape_rate: Option<f64>,

    /// Molecules released per transmission.
    #[arg(long = "n-molecules", visible_alias = "N")]
    pub n_molecules: Option<u64>,
    /// Absorptions needed for detection.
    #[arg(long)]
    pub threshold: Option<u64>,
    /// Evaluation time (s).
    #[arg(long = "t-s", visible_alias = "t")]
    pub t_s: Option<f64>,
    /// Target detection probability (fig6 and analytic mode).
    #[arg(long = "target-p")]
    pub target_p: Option<f64>,

    /// Swept variable: t, lambda, a, mu or N.
    #[arg(long = "sweep-var", visible_alias = "sweep")]
    pub sweep_var: Option<String>,
    #[arg(long = "sweep-start")]
    pub sweep_start: Option<f64>,
    #[arg(long = "sweep-stop")]
    pub sweep_stop: Option<f64>,
    #[arg(long = "sweep-points")]
    pub sweep_points: Option<usize>,
    /// `log` or `linear`.
    #[arg(long = "sweep-scale")]
    pub sweep_scale: Option<String>,
    /// Explicit grid, overrides start/stop/points.
    #[arg(long = "sweep-values", value_delimiter = ',')]
    pub sweep_values: Option<Vec<f64>>,

    /// Smallest acceptable fraction of comparison points inside the 95% CI.
    #[arg(long = "accept-min-inside-ci")]
    pub accept_min_inside_ci: Option<f64>,
    /// Largest acceptable |analytic − MC|.
    #[arg(long = "accept-max-abs-error")]
    pub accept_max_abs_error: Option<f64>,

    /// Output CSV path; stdout when absent.
    #[arg(long = "output", visible_alias = "out")]
    pub output: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($f:ident),* $(,)?) => {
        ConfigKeys { $($f: $top.$f.or($base.$f)),* }
    };
}

impl ConfigKeys {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let field = e
                .message()
                .split('`')
                .nth(1)
                .unwrap_or("config file")
                .to_owned();
            config(field, e.message().trim().to_owned())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config(path.display().to_string(), e.to_string()))?;
        Self::from_toml(&text)
    }

    /// Keys of `self` replaced by those set in `top`.
    pub fn overlay(self, top: ConfigKeys) -> Self {
        let base = self;
        overlay!(base, top;
            mode, figure, a_um, d_um2_per_s, lambda_per_um3, mu_per_s, dt_s, t_end_s,
            particles, domain_multiplier, seed, absorption_mode, fresh_field_per_particle,
            workers, max_escape_rate, n_molecules, threshold, t_s, target_p, sweep_var,
            sweep_start, sweep_stop, sweep_points, sweep_scale, sweep_values,
            accept_min_inside_ci, accept_max_abs_error, output,
        )
    }
}

/// Receiver radius and diffusion coefficient used when a run does not set
/// them: 5 µm and 100 µm²/s.
pub fn base_defaults() -> ConfigKeys {
    ConfigKeys {
        a_um: Some(5.0),
        d_um2_per_s: Some(100.0),
        ..Default::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    T,
    Lambda,
    A,
    Mu,
    N,
}

impl SweepVar {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "t" => SweepVar::T,
            "lambda" => SweepVar::Lambda,
            "a" => SweepVar::A,
            "mu" => SweepVar::Mu,
            "N" => SweepVar::N,
            other => return Err(config("sweep_var", format!("unknown variable `{other}` (t|lambda|a|mu|N)"))),
        })
    }

    /// CSV column name.
    pub fn column(self) -> &'static str {
        match self {
            SweepVar::T => "t_s",
            SweepVar::Lambda => "lambda_per_um3",
            SweepVar::A => "a_um",
            SweepVar::Mu => "mu_per_s",
            SweepVar::N => "n_molecules",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub var: SweepVar,
    pub grid: Vec<f64>,
}

/// `n` points from `start` to `stop`, evenly spaced on a log or linear axis.
pub fn grid(start: f64, stop: f64, n: usize, log: bool) -> Vec<f64> {
    if n == 1 {
        return vec![start];
    }
    (0..n)
        .map(|i| {
            let f = i as f64 / (n - 1) as f64;
            if i == n - 1 {
                stop
            } else if i == 0 {
                start
            } else if log {
                10f64.powf(start.log10() + f * (stop.log10() - start.log10()))
            } else {
                start + f * (stop - start)
            }
        })
        .collect()
}

impl Sweep {
    fn from_keys(k: &ConfigKeys) -> Result<Option<Self>> {
        let Some(var) = k.sweep_var.as_deref() else {
            return Ok(None);
        };
        let var = SweepVar::parse(var)?;
        let grid = match &k.sweep_values {
            Some(values) => values.clone(),
            None => {
                let start = k.sweep_start.ok_or_else(|| config("sweep_start", "required with sweep_var"))?;
                let stop = k.sweep_stop.ok_or_else(|| config("sweep_stop", "required with sweep_var"))?;
                let points = k.sweep_points.unwrap_or(10);
                if points == 0 {
                    return Err(config("sweep_points", "must be >= 1"));
                }
                let log = match k.sweep_scale.as_deref().unwrap_or("log") {
                    "log" => true,
                    "linear" => false,
                    other => return Err(config("sweep_scale", format!("unknown scale `{other}` (log|linear)"))),
                };
                if log && !(start > 0.0 && stop > 0.0) {
                    return Err(config("sweep_start", "log grids need positive bounds"));
                }
                grid(start, stop, points, log)
            }
        };
        let sweep = Sweep { var, grid };
        sweep.validate()?;
        Ok(Some(sweep))
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(config("sweep_values", "grid must not be empty"));
        }
        if self.grid.iter().any(|x| !x.is_finite()) {
            return Err(config("sweep_values", "grid values must be finite"));
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(config("sweep_values", "grid must be strictly increasing"));
        }
        if self.var == SweepVar::N && self.grid.iter().any(|&n| n < 1.0 || n.fract() != 0.0) {
            return Err(config("sweep_values", "N values must be positive integers"));
        }
        Ok(())
    }
}

/// Pass thresholds for comparison runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Acceptance {
    pub min_inside_ci: f64,
    pub max_abs_error: f64,
}

impl Default for Acceptance {
    fn default() -> Self {
        Self {
            min_inside_ci: 0.9,
            max_abs_error: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub params: ChannelParams,
    pub sim: SimConfig,
    /// Detection setup, present when `n_molecules` is set or N is swept.
    pub spec: Option<DetectionSpec>,
    pub sweep: Option<Sweep>,
    /// Evaluation time for non-time sweeps (s).
    pub t: f64,
    pub acceptance: Acceptance,
    pub output: Option<PathBuf>,
    /// Keys set by the user, before any figure defaults.
    pub keys: ConfigKeys,
}

/// Shortest round-trip text of `x`, in exponent form outside [1e-3, 1e6).
pub fn short(x: f64) -> String {
    if x == 0.0 || (1e-3..1e6).contains(&x.abs()) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(config(field, format!("must be finite and > 0, got {v}")))
    }
}

fn relabel(field: &str, e: Error) -> Error {
    match e {
        Error::Domain { detail, .. } => config(field, detail),
        other => other,
    }
}

impl ExperimentConfig {
    /// Validates merged keys. Figure modes first fill unset keys with the
    /// figure's defaults; `keys` keeps only what the user set.
    pub fn resolve(user: ConfigKeys) -> Result<Self> {
        let mode = Mode::parse(
            user.mode.as_deref().ok_or_else(|| config("mode", "missing"))?,
            user.figure.as_deref(),
        )?;
        let keys = match mode {
            Mode::Figure(fig) => super::figures::defaults(fig),
            _ => base_defaults(),
        }
        .overlay(user.clone());
        let a = positive("a_um", keys.a_um.ok_or_else(|| config("a_um", "missing"))?)?;
        let d = positive(
            "D_um2_per_s",
            keys.d_um2_per_s.ok_or_else(|| config("D_um2_per_s", "missing"))?,
        )?;
        let lambda = keys
            .lambda_per_um3
            .ok_or_else(|| config("lambda_per_um3", "missing"))?;
        let mu = keys.mu_per_s.unwrap_or(0.0);
        let params = ChannelParams::new(a, d, lambda, mu).map_err(|e| match e {
            Error::Domain { name, detail } => config(
                match name {
                    "density" => "lambda_per_um3",
                    "degradation" => "mu_per_s",
                    "diffusion" => "D_um2_per_s",
                    _ => "a_um",
                },
                detail,
            ),
            other => other,
        })?;

        let sweep = Sweep::from_keys(&keys)?;
        let sweep_max_t = sweep
            .as_ref()
            .filter(|s| s.var == SweepVar::T)
            .map(|s| s.grid[s.grid.len() - 1]);
        if let Some(s) = &sweep {
            if s.var == SweepVar::T && s.grid[0] <= 0.0 {
                return Err(config("sweep_values", "times must be > 0"));
            }
        }
        let t = keys.t_s.or(keys.t_end_s).or(sweep_max_t);
        let t_end = keys.t_end_s.or(sweep_max_t).or(keys.t_s);

        let needs_time = !matches!(mode, Mode::Figure(_)) && sweep_max_t.is_none();
        let t = match t {
            Some(t) => positive("t_s", t)?,
            None if needs_time => return Err(config("t_s", "missing (set t_s, t_end_s or a t sweep)")),
            None => 1.0,
        };
        let t_end = positive("t_end_s", t_end.unwrap_or(t))?;
        if let Some(max) = sweep_max_t {
            if max > t_end * (1.0 + 1e-12) {
                return Err(config("t_end_s", format!("must cover the time grid up to {max}")));
            }
        }

        let mut sim = SimConfig::new(t_end);
        if let Some(dt) = keys.dt_s {
            sim.dt = positive("dt_s", dt)?;
        }
        if let Some(n) = keys.particles {
            sim.n_particles = n;
        }
        if let Some(m) = keys.domain_multiplier {
            sim.domain_multiplier = m;
        }
        if let Some(s) = keys.seed {
            sim.seed = s;
        }
        if let Some(mode) = &keys.absorption_mode {
            sim.absorption_mode = mode
                .parse::<AbsorptionMode>()
                .map_err(|e| config("absorption_mode", e))?;
        }
        if let Some(f) = keys.fresh_field_per_particle {
            sim.fresh_field_per_particle = f;
        }
        if let Some(w) = keys.workers {
            sim.workers = w;
        }
        if let Some(r) = keys.max_escape_rate {
            sim.max_escape_rate = r;
        }
        sim.validate().map_err(|e| match e {
            Error::Domain { name, detail } => config(
                match name {
                    "dt" => "dt_s",
                    "t_end" => "t_end_s",
                    "n_particles" => "particles",
                    other => other,
                },
                detail,
            ),
            other => other,
        })?;

        let n_swept = sweep.as_ref().is_some_and(|s| s.var == SweepVar::N);
        let spec = match keys.n_molecules {
            Some(n) => Some(n),
            None if n_swept => Some(sweep.as_ref().map_or(1, |s| s.grid[0] as u64)),
            None => None,
        }
        .map(|n| {
            let spec = DetectionSpec::new(n, keys.threshold.unwrap_or(1), t)
                .map_err(|e| relabel("threshold", e))?;
            match keys.target_p {
                Some(p) => spec.with_target(p).map_err(|e| relabel("target_p", e)),
                None => Ok(spec),
            }
        })
        .transpose()?;
        if keys.threshold.is_some() && spec.is_none() {
            return Err(config("threshold", "needs n_molecules"));
        }

        let mut acceptance = Acceptance::default();
        if let Some(f) = keys.accept_min_inside_ci {
            if !(0.0..=1.0).contains(&f) {
                return Err(config("accept_min_inside_ci", format!("must lie in [0, 1], got {f}")));
            }
            acceptance.min_inside_ci = f;
        }
        if let Some(e) = keys.accept_max_abs_error {
            acceptance.max_abs_error = positive("accept_max_abs_error", e)?;
        }

        Ok(Self {
            mode,
            params,
            sim,
            spec,
            sweep,
            t,
            acceptance,
            output: keys.output.clone(),
            keys: user,
        })
    }

    /// One-line description of everything that determines the output.
    /// The worker count and output path are left out on purpose.
    pub fn describe(&self) -> String {
        let p = &self.params;
        let s = &self.sim;
        let mut out = format!(
            "mcvd {} a_um={} D_um2_per_s={} lambda_per_um3={} mu_per_s={} t_s={} \
             dt_s={} t_end_s={} particles={} domain_multiplier={} seed={} \
             absorption_mode={} fresh_field_per_particle={}",
            self.mode.name(),
            short(p.radius()),
            short(p.diffusion()),
            short(p.density()),
            short(p.degradation()),
            short(self.t),
            short(s.dt),
            short(s.t_end),
            s.n_particles,
            short(s.domain_multiplier),
            s.seed,
            s.absorption_mode,
            s.fresh_field_per_particle,
        );
        if let Some(spec) = &self.spec {
            let _ = write!(out, " n_molecules={} threshold={}", spec.n_molecules(), spec.threshold());
            if let Some(target) = spec.target_p() {
                let _ = write!(out, " target_p={}", short(target));
            }
        }
        if let Some(sw) = &self.sweep {
            let values: Vec<String> = sw.grid.iter().map(|&x| short(x)).collect();
            let _ = write!(out, " sweep_var={} sweep_values={}", sw.var.column(), values.join(";"));
        }
        out
    }
}
