//! Experiment runner behind the `mcvd` command line: analytic sweeps,
//! Monte Carlo runs, analytic-vs-simulation comparisons and the figure
//! pipelines, all emitting CSV.

pub mod config;
pub mod csv;
pub mod figures;
pub mod report;

use crate::analytics::{hitting_prob_degradable, hitting_prob_limit, threshold_prob, ChannelParams, DetectionSpec};
use crate::error::{Error, Result};
use crate::geometry::RngStream;
use crate::sim::interval::ProportionInterval;
use crate::sim::{estimate_edp, estimate_hitting_curve, SimConfig};

pub use config::{Acceptance, ConfigKeys, ExperimentConfig, Figure, Mode, Sweep, SweepVar};
pub use csv::{fmt_real, parse_table, Cell, ParsedTable, Table};
pub use report::{compare_report, CompareSummary, ComparisonRow};

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status for configuration errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for acceptance-threshold or escape-rate failures.
pub const EXIT_THRESHOLD: i32 = 3;
/// Exit status for other runtime failures (I/O, numerics).
pub const EXIT_RUNTIME: i32 = 1;

/// Maps an error to the process exit status.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::Domain { .. } | Error::Capacity { .. } | Error::Infeasible(_) => EXIT_CONFIG,
        Error::EscapeRate { .. } => EXIT_THRESHOLD,
        Error::Convergence { .. } | Error::Io(_) | Error::Csv(_) => EXIT_RUNTIME,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub table: Table,
    pub summary: Option<CompareSummary>,
    /// False when a comparison missed its acceptance thresholds.
    pub passed: bool,
}

impl RunOutput {
    fn plain(table: Table) -> Self {
        Self {
            table,
            summary: None,
            passed: true,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_OK
        } else {
            EXIT_THRESHOLD
        }
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    if !cfg.params.is_sparse() {
        log::warn!(
            "receiver volume fraction {:.3} is not small; first-cumulant closed forms overestimate the hitting probability",
            cfg.params.volume_fraction()
        );
    }
    match cfg.mode {
        Mode::Analytic => analytic(cfg).map(RunOutput::plain),
        Mode::Simulate => simulate(cfg),
        Mode::Compare => compare(cfg),
        Mode::Figure(fig) => figures::run_figure(fig, cfg),
    }
}

/// One evaluation point of a sweep.
struct Point {
    value: f64,
    params: ChannelParams,
    t: f64,
    spec: Option<DetectionSpec>,
}

fn points(cfg: &ExperimentConfig) -> Result<(SweepVar, Vec<Point>)> {
    let Some(sweep) = &cfg.sweep else {
        return Ok((
            SweepVar::T,
            vec![Point {
                value: cfg.t,
                params: cfg.params,
                t: cfg.t,
                spec: cfg.spec,
            }],
        ));
    };
    let pts = sweep
        .grid
        .iter()
        .map(|&v| {
            let mut params = cfg.params;
            let mut t = cfg.t;
            let mut spec = cfg.spec;
            match sweep.var {
                SweepVar::T => t = v,
                SweepVar::Lambda => params = params.with_density(v)?,
                SweepVar::A => params = params.with_radius(v)?,
                SweepVar::Mu => params = params.with_degradation(v)?,
                SweepVar::N => {}
            }
            if let Some(s) = spec {
                let n = if sweep.var == SweepVar::N { v as u64 } else { s.n_molecules() };
                spec = Some(DetectionSpec::new(n, s.threshold(), t)?);
            }
            Ok(Point {
                value: v,
                params,
                t,
                spec,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((sweep.var, pts))
}

fn analytic(cfg: &ExperimentConfig) -> Result<Table> {
    let (var, pts) = points(cfg)?;
    let mut columns = vec![var.column(), "p_hit", "p_hit_limit"];
    if cfg.spec.is_some() {
        columns.push("p_detect");
    }
    let mut table = Table::new(cfg.describe(), &columns);
    for pt in &pts {
        let mut row: Vec<Cell> = vec![
            pt.value.into(),
            hitting_prob_degradable(&pt.params, pt.t)?.into(),
            hitting_prob_limit(&pt.params).into(),
        ];
        if let Some(spec) = &pt.spec {
            row.push(threshold_prob(&pt.params, spec)?.into());
        }
        table.push(row);
    }
    Ok(table)
}

/// Monte Carlo intervals and matching closed forms at every sweep point.
fn mc_points(cfg: &ExperimentConfig) -> Result<(SweepVar, Vec<(f64, f64, ProportionInterval)>)> {
    let (var, pts) = points(cfg)?;
    let base = RngStream::new(cfg.sim.seed, 0);
    if cfg.spec.is_none() && var == SweepVar::T {
        let grid: Vec<f64> = pts.iter().map(|p| p.t).collect();
        let curve = estimate_hitting_curve(&cfg.params, &cfg.sim, &grid)?;
        let out = (0..grid.len())
            .map(|i| (grid[i], curve.analytic[i], curve.interval(i)))
            .collect();
        return Ok((var, out));
    }
    let mut out = Vec::with_capacity(pts.len());
    for (i, pt) in pts.iter().enumerate() {
        let sim = SimConfig {
            t_end: pt.t,
            seed: if pts.len() == 1 { cfg.sim.seed } else { base.family(i as u64).seed },
            ..cfg.sim.clone()
        };
        match &pt.spec {
            Some(spec) => {
                let e = estimate_edp(&pt.params, &sim, spec)?;
                out.push((pt.value, e.analytic, e.interval));
            }
            None => {
                let curve = estimate_hitting_curve(&pt.params, &sim, &[pt.t])?;
                out.push((pt.value, curve.analytic[0], curve.interval(0)));
            }
        }
        log::info!("point {}/{} done", i + 1, pts.len());
    }
    Ok((var, out))
}

fn simulate(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let (var, results) = mc_points(cfg)?;
    let estimate = if cfg.spec.is_some() { "p_detect_mc" } else { "p_hit_mc" };
    let mut table = Table::new(
        cfg.describe(),
        &[var.column(), estimate, "ci_low", "ci_high", "ci_halfwidth"],
    );
    for (v, _, ci) in results {
        table.push(vec![v.into(), ci.estimate.into(), ci.low.into(), ci.high.into(), ci.halfwidth.into()]);
    }
    Ok(RunOutput::plain(table))
}

fn compare(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let (var, results) = mc_points(cfg)?;
    let rows: Vec<ComparisonRow> = results
        .iter()
        .map(|(v, analytic, ci)| ComparisonRow::new(*v, *analytic, ci))
        .collect();
    let mut table = comparison_table(cfg.describe(), var.column(), &rows);
    let summary = compare_report(&rows);
    table.trailer.push(summary.line());
    Ok(RunOutput {
        table,
        passed: summary.passes(&cfg.acceptance),
        summary: Some(summary),
    })
}

pub fn comparison_table(comment: String, sweep_column: &str, rows: &[ComparisonRow]) -> Table {
    let mut table = Table::new(
        comment,
        &[
            sweep_column,
            "analytic",
            "mc_estimate",
            "ci_low",
            "ci_high",
            "ci_halfwidth",
            "abs_error",
            "inside_ci",
        ],
    );
    for r in rows {
        table.push(vec![
            r.sweep_value.into(),
            r.analytic.into(),
            r.mc_estimate.into(),
            r.ci_low.into(),
            r.ci_high.into(),
            r.ci_halfwidth.into(),
            r.abs_error.into(),
            r.inside_ci().into(),
        ]);
    }
    table
}
