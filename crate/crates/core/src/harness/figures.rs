//! Figure pipelines. Each figure starts from its caption parameters, which
//! any config key or flag overrides.

use super::config::{grid, short, ConfigKeys, ExperimentConfig, Figure, SweepVar};
use super::csv::{Cell, Table};
use super::report::{compare_report, ComparisonRow};
use super::{comparison_table, RunOutput};
use crate::analytics::{
    edp_large_lambda_asymptote, edp_small_lambda_asymptote, event_detection_prob,
    time_constant_degradable, time_constant_order_bounds, ChannelParams, DetectionSpec,
};
use crate::error::{config, Result};
use crate::geometry::RngStream;
use crate::sim::{estimate_hitting_curve, SimConfig};

/// Receiver densities of the hitting-probability figure.
const FIG3_DENSITIES: [f64; 2] = [1e-5, 1e-6];
const FIG4_TIMES: [f64; 2] = [0.5, 1.0];
const FIG5_DEGRADATION: [f64; 3] = [0.0, 0.01, 1.0];
const FIG6_MOLECULES: [u64; 3] = [1, 10, 100];
/// N·λ held fixed along the second detection curve (1/µm³).
pub const FIG6_FIXED_N_LAMBDA: f64 = 1e-4;

fn sweep_keys(var: &str, start: f64, stop: f64, points: usize, scale: &str) -> ConfigKeys {
    ConfigKeys {
        sweep_var: Some(var.into()),
        sweep_start: Some(start),
        sweep_stop: Some(stop),
        sweep_points: Some(points),
        sweep_scale: Some(scale.into()),
        ..Default::default()
    }
}

/// Caption parameters and default grids of each figure.
pub fn defaults(fig: Figure) -> ConfigKeys {
    let common = super::config::base_defaults();
    let keys = match fig {
        Figure::Fig3 => ConfigKeys {
            a_um: Some(5.0),
            lambda_per_um3: Some(FIG3_DENSITIES[0]),
            mu_per_s: Some(1.0),
            ..sweep_keys("t", 1e-3, 10.0, 9, "log")
        },
        Figure::Fig4 => ConfigKeys {
            a_um: Some(5.0),
            lambda_per_um3: Some(1e-5),
            mu_per_s: Some(1.0),
            dt_s: Some(1e-4),
            t_end_s: Some(1.0),
            ..sweep_keys("a", 5.0, 40.0, 8, "linear")
        },
        Figure::Fig5 => ConfigKeys {
            a_um: Some(40.0),
            lambda_per_um3: Some(1e-8),
            ..sweep_keys("lambda", 1e-8, 1e-3, 51, "log")
        },
        Figure::Fig6 => ConfigKeys {
            a_um: Some(5.0),
            lambda_per_um3: Some(1e-10),
            mu_per_s: Some(1.0),
            t_s: Some(1.0),
            ..sweep_keys("lambda", 1e-10, 1e-1, 37, "log")
        },
    };
    common.overlay(keys)
}

pub fn run_figure(fig: Figure, cfg: &ExperimentConfig) -> Result<RunOutput> {
    match fig {
        Figure::Fig3 => fig3(cfg),
        Figure::Fig4 => fig4(cfg),
        Figure::Fig5 => fig5(cfg).map(plain),
        Figure::Fig6 => fig6(cfg).map(plain),
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|&v| short(v)).collect::<Vec<_>>().join(";")
}

fn plain(table: Table) -> RunOutput {
    RunOutput {
        table,
        summary: None,
        passed: true,
    }
}

fn sweep_grid(cfg: &ExperimentConfig, var: SweepVar) -> Result<Vec<f64>> {
    match &cfg.sweep {
        Some(s) if s.var == var => Ok(s.grid.clone()),
        _ => Err(config(
            "sweep_var",
            format!("{} sweeps `{}`", cfg.mode.name(), var.column()),
        )),
    }
}

/// Hitting probability versus time with and without degradation, Monte
/// Carlo next to the closed forms.
fn fig3(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let times = sweep_grid(cfg, SweepVar::T)?;
    let densities = match cfg.keys.lambda_per_um3 {
        Some(l) => vec![l],
        None => FIG3_DENSITIES.to_vec(),
    };
    let mut table = Table::new(
        format!("{} densities={}", cfg.describe(), join(&densities)),
        &[
            "lambda_per_um3",
            "t_s",
            "p_analytic_mu0",
            "p_mc_mu0",
            "ci_mu0",
            "p_analytic_mu",
            "p_mc_mu",
            "ci_mu",
        ],
    );
    let mut rows = Vec::new();
    for &lambda in &densities {
        let base = cfg.params.with_density(lambda)?;
        let plain = estimate_hitting_curve(&base.with_degradation(0.0)?, &cfg.sim, &times)?;
        let decay = estimate_hitting_curve(&base, &cfg.sim, &times)?;
        for (i, &t) in times.iter().enumerate() {
            table.push(vec![
                lambda.into(),
                t.into(),
                plain.analytic[i].into(),
                plain.estimate[i].into(),
                plain.ci_halfwidth[i].into(),
                decay.analytic[i].into(),
                decay.estimate[i].into(),
                decay.ci_halfwidth[i].into(),
            ]);
            rows.push(ComparisonRow::new(t, plain.analytic[i], &plain.interval(i)));
            rows.push(ComparisonRow::new(t, decay.analytic[i], &decay.interval(i)));
        }
    }
    let summary = compare_report(&rows);
    table.trailer.push(summary.line());
    Ok(RunOutput {
        table,
        passed: summary.passes(&cfg.acceptance),
        summary: Some(summary),
    })
}

/// |analytic − MC| versus receiver radius for two times, with and without
/// degradation. Also checks that MC stays below the closed form up to noise.
fn fig4(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let radii = sweep_grid(cfg, SweepVar::A)?;
    let times = match cfg.keys.t_s {
        Some(t) => vec![t],
        None => FIG4_TIMES.to_vec(),
    };
    let mu = cfg.params.degradation();
    let mut rates = vec![0.0];
    if mu > 0.0 {
        rates.push(mu);
    }
    let sim = SimConfig {
        t_end: times.iter().copied().fold(cfg.sim.t_end, f64::max),
        ..cfg.sim.clone()
    };
    let family = RngStream::new(sim.seed, 0);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut below = true;
    for (i, &a) in radii.iter().enumerate() {
        let seed = family.family(i as u64).seed;
        for &rate in &rates {
            let p = cfg.params.with_radius(a)?.with_degradation(rate)?;
            let curve = estimate_hitting_curve(&p, &SimConfig { seed, ..sim.clone() }, &times)?;
            for (k, &t) in times.iter().enumerate() {
                let row = ComparisonRow::new(a, curve.analytic[k], &curve.interval(k));
                below &= jensen_ok(&row);
                rows.push(row);
                labels.push((rate, t));
            }
        }
    }
    let comment = format!("{} times={} rates={}", cfg.describe(), join(&times), join(&rates));
    let base = comparison_table(comment, "a_um", &rows);
    let mut columns: Vec<&str> = vec!["a_um", "mu_per_s", "t_s"];
    columns.extend(base.columns[1..].iter().map(String::as_str));
    columns.push("below_analytic");
    let mut table = Table::new(base.comment.clone(), &columns);
    for ((row, cells), (rate, t)) in rows.iter().zip(base.rows).zip(labels) {
        let mut out: Vec<Cell> = vec![cells[0].clone(), rate.into(), t.into()];
        out.extend(cells.into_iter().skip(1));
        out.push(jensen_ok(row).into());
        table.push(out);
    }
    let summary = compare_report(&rows);
    table.trailer.push(summary.line());
    Ok(RunOutput {
        table,
        passed: summary.max_abs_error <= cfg.acceptance.max_abs_error && below,
        summary: Some(summary),
    })
}

/// Monte Carlo estimate no larger than the first-cumulant closed form plus
/// 1.96σ + 0.01.
pub fn jensen_ok(row: &ComparisonRow) -> bool {
    row.mc_estimate <= row.analytic + row.ci_halfwidth + 0.01
}

/// Time constant versus density for several degradation rates.
fn fig5(cfg: &ExperimentConfig) -> Result<Table> {
    let densities = sweep_grid(cfg, SweepVar::Lambda)?;
    let rates = match cfg.keys.mu_per_s {
        Some(mu) => vec![mu],
        None => FIG5_DEGRADATION.to_vec(),
    };
    let mut table = Table::new(
        format!("{} rates={}", cfg.describe(), join(&rates)),
        &["lambda_per_um3", "mu_per_s", "t_c_s", "order_bound_s"],
    );
    for &mu in &rates {
        for &lambda in &densities {
            let p = cfg.params.with_density(lambda)?.with_degradation(mu)?;
            let bounds = time_constant_order_bounds(&p)?;
            let bound = if mu == 0.0 { bounds.nondegradable } else { bounds.degradable };
            table.push(vec![lambda.into(), mu.into(), time_constant_degradable(&p)?.into(), bound.into()]);
        }
    }
    Ok(table)
}

/// Molecule counts of the fixed-N·λ curve: about four per decade from
/// N·λ/λ_min down to 1.
fn fixed_product_counts(lambda_min: f64) -> Vec<u64> {
    let top = (FIG6_FIXED_N_LAMBDA / lambda_min).max(1.0);
    let points = (top.log10() * 4.0).ceil() as usize + 1;
    let mut counts: Vec<u64> = grid(top, 1.0, points.max(2), true)
        .into_iter()
        .map(|n| n.round().max(1.0) as u64)
        .collect();
    counts.dedup();
    counts
}

/// Detection probability versus density for fixed N, and along N·λ fixed,
/// with the small- and large-density expansions.
fn fig6(cfg: &ExperimentConfig) -> Result<Table> {
    let densities = sweep_grid(cfg, SweepVar::Lambda)?;
    let counts = match cfg.keys.n_molecules {
        Some(n) => vec![n],
        None => FIG6_MOLECULES.to_vec(),
    };
    let t = cfg.t;
    let mut table = Table::new(
        format!(
            "{} molecules={} fixed_n_lambda={}",
            cfg.describe(),
            join(&counts.iter().map(|&n| n as f64).collect::<Vec<_>>()),
            short(FIG6_FIXED_N_LAMBDA)
        ),
        &[
            "series",
            "a_um",
            "n_molecules",
            "lambda_per_um3",
            "p_detect",
            "small_lambda_asymptote",
            "large_lambda_asymptote",
        ],
    );
    let push = |table: &mut Table, series: &str, p: &ChannelParams, n: u64| -> Result<()> {
        let spec = DetectionSpec::any(n, t)?;
        let small = edp_small_lambda_asymptote(p, &spec).unwrap_or(f64::NAN);
        table.push(vec![
            series.into(),
            p.radius().into(),
            n.into(),
            p.density().into(),
            event_detection_prob(p, &spec)?.into(),
            small.into(),
            edp_large_lambda_asymptote(p, &spec).into(),
        ]);
        Ok(())
    };
    for &n in &counts {
        for &lambda in &densities {
            push(&mut table, "fixed_N", &cfg.params.with_density(lambda)?, n)?;
        }
    }
    for n in fixed_product_counts(densities[0]) {
        let p = cfg.params.with_density(FIG6_FIXED_N_LAMBDA / n as f64)?;
        push(&mut table, "fixed_N_lambda", &p, n)?;
    }
    Ok(table)
}
