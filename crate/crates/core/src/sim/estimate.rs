use rayon::prelude::*;

use super::interval::{proportion_interval, ProportionInterval};
use super::particle::{simulate_particle, Fate, ParticleOutcome};
use super::SimConfig;
use crate::analytics::{hitting_prob_degradable, threshold_prob, ChannelParams, DetectionSpec};
use crate::error::{domain, Error, Result};
use crate::geometry::{ReceiverField, RngStream};

/// Stream id reserved for shared receiver fields.
const FIELD_STREAM: u64 = u64::MAX;

/// Empirical hitting CDF on a time grid, next to the closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingCurve {
    pub time_grid: Vec<f64>,
    /// Particles absorbed by each grid time.
    pub hits: Vec<u64>,
    pub estimate: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub ci_halfwidth: Vec<f64>,
    pub analytic: Vec<f64>,
    pub n_particles: u64,
    pub escaped: u64,
}

impl HittingCurve {
    pub fn inside_ci(&self, i: usize) -> bool {
        self.ci_low[i] <= self.analytic[i] && self.analytic[i] <= self.ci_high[i]
    }

    pub fn interval(&self, i: usize) -> ProportionInterval {
        proportion_interval(self.hits[i], self.n_particles)
    }

    pub fn escape_rate(&self) -> f64 {
        self.escaped as f64 / self.n_particles as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdpEstimate {
    pub estimate: f64,
    pub ci_halfwidth: f64,
    pub interval: ProportionInterval,
    pub replications: u64,
    /// Closed-form probability of at least `threshold` absorptions.
    pub analytic: f64,
    pub escape_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SausageEstimate {
    pub t: f64,
    pub estimate: f64,
    pub interval: ProportionInterval,
    pub analytic: f64,
    pub abs_error: f64,
}

/// Maps `f` over `0..n` on `workers` threads, preserving index order.
fn run_indexed<T, F>(workers: usize, n: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    if workers <= 1 {
        return (0..n).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| domain("workers", e.to_string()))?;
    pool.install(|| (0..n).into_par_iter().map(f).collect())
}

fn check_escape(escaped: u64, total: u64, limit: f64) -> Result<f64> {
    let rate = escaped as f64 / total.max(1) as f64;
    if rate > limit {
        return Err(Error::EscapeRate { rate, limit });
    }
    if escaped > 0 {
        log::warn!("{escaped} of {total} particles left the sampled domain");
    }
    Ok(rate)
}

/// Simulates `cfg.n_particles` molecules; particle `i` draws everything from
/// stream `(cfg.seed, i)`, including its own receiver field when
/// `cfg.fresh_field_per_particle` is set.
pub fn simulate_particles(p: &ChannelParams, cfg: &SimConfig) -> Result<Vec<ParticleOutcome>> {
    cfg.validate()?;
    let radius = cfg.domain_radius(p);
    let shared = if cfg.fresh_field_per_particle {
        None
    } else {
        let mut rng = RngStream::new(cfg.seed, FIELD_STREAM).rng();
        Some(ReceiverField::sample(p, radius, cfg.receiver_cap, &mut rng)?)
    };
    run_indexed(cfg.workers, cfg.n_particles, |i| {
        let mut rng = RngStream::new(cfg.seed, i).rng();
        match &shared {
            Some(field) => Ok(simulate_particle(p, field, cfg, &mut rng)),
            None => {
                let field = ReceiverField::sample(p, radius, cfg.receiver_cap, &mut rng)?;
                Ok(simulate_particle(p, &field, cfg, &mut rng))
            }
        }
    })
}

/// Monte Carlo hitting probability at each time of `time_grid`, with 95%
/// intervals and the closed-form curve.
pub fn estimate_hitting_curve(
    p: &ChannelParams,
    cfg: &SimConfig,
    time_grid: &[f64],
) -> Result<HittingCurve> {
    cfg.validate()?;
    if time_grid.is_empty() {
        return Err(domain("time_grid", "must not be empty"));
    }
    let limit = cfg.t_end * (1.0 + 1e-12);
    if let Some(&t) = time_grid.iter().find(|&&t| !(t > 0.0 && t <= limit)) {
        return Err(domain(
            "time_grid",
            format!("times must lie in (0, {}], got {t}", cfg.t_end),
        ));
    }
    let outcomes = simulate_particles(p, cfg)?;
    let n = cfg.n_particles;
    let escaped = outcomes.iter().filter(|o| o.escaped).count() as u64;
    check_escape(escaped, n, cfg.max_escape_rate)?;

    let mut hit_times: Vec<f64> = outcomes
        .iter()
        .filter(|o| o.fate == Fate::Absorbed)
        .map(|o| o.time)
        .collect();
    hit_times.sort_by(f64::total_cmp);
    let slack = 1e-9 * cfg.dt;

    let mut curve = HittingCurve {
        time_grid: time_grid.to_vec(),
        hits: Vec::with_capacity(time_grid.len()),
        estimate: Vec::with_capacity(time_grid.len()),
        ci_low: Vec::with_capacity(time_grid.len()),
        ci_high: Vec::with_capacity(time_grid.len()),
        ci_halfwidth: Vec::with_capacity(time_grid.len()),
        analytic: Vec::with_capacity(time_grid.len()),
        n_particles: n,
        escaped,
    };
    for &t in time_grid {
        let hits = hit_times.partition_point(|&h| h <= t + slack) as u64;
        let ci = proportion_interval(hits, n);
        curve.hits.push(hits);
        curve.estimate.push(ci.estimate);
        curve.ci_low.push(ci.low);
        curve.ci_high.push(ci.high);
        curve.ci_halfwidth.push(ci.halfwidth);
        curve.analytic.push(hitting_prob_degradable(p, t)?);
    }
    Ok(curve)
}

/// Monte Carlo probability that at least `spec.threshold()` of
/// `spec.n_molecules()` molecules are absorbed by `spec.t()`.
///
/// Each of the `cfg.n_particles` replications samples one receiver field
/// and releases all molecules into it, so molecules of one replication see
/// the same deployment. `cfg.t_end` is replaced by `spec.t()` and
/// `cfg.fresh_field_per_particle` is ignored.
pub fn estimate_edp(p: &ChannelParams, cfg: &SimConfig, spec: &DetectionSpec) -> Result<EdpEstimate> {
    let run = SimConfig {
        t_end: spec.t(),
        ..cfg.clone()
    };
    run.validate()?;
    let radius = run.domain_radius(p);
    let base = RngStream::new(run.seed, 0);
    let per_rep = run_indexed(run.workers, run.n_particles, |r| {
        let family = base.family(r);
        let mut field_rng = family.with_stream(FIELD_STREAM).rng();
        let field = ReceiverField::sample(p, radius, run.receiver_cap, &mut field_rng)?;
        let mut absorbed = 0u64;
        let mut escaped = 0u64;
        let mut simulated = 0u64;
        for j in 0..spec.n_molecules() {
            let o = simulate_particle(p, &field, &run, &mut family.with_stream(j).rng());
            simulated += 1;
            escaped += o.escaped as u64;
            absorbed += (o.fate == Fate::Absorbed) as u64;
            if absorbed >= spec.threshold() {
                break;
            }
        }
        Ok((absorbed >= spec.threshold(), escaped, simulated))
    })?;
    let successes = per_rep.iter().filter(|r| r.0).count() as u64;
    let escaped: u64 = per_rep.iter().map(|r| r.1).sum();
    let simulated: u64 = per_rep.iter().map(|r| r.2).sum();
    let escape_rate = check_escape(escaped, simulated, run.max_escape_rate)?;
    let interval = proportion_interval(successes, run.n_particles);
    Ok(EdpEstimate {
        estimate: interval.estimate,
        ci_halfwidth: interval.halfwidth,
        interval,
        replications: run.n_particles,
        analytic: threshold_prob(p, spec)?,
        escape_rate,
    })
}

/// Unbiased Monte Carlo estimate (up to time discretization) of the exact
/// hitting probability 1 − E[exp(−λ|Ξ|)] at `cfg.t_end`, averaging over
/// fresh receiver fields, compared with the first-cumulant closed form.
pub fn estimate_sausage_hitprob_smalllambda(
    p: &ChannelParams,
    cfg: &SimConfig,
) -> Result<SausageEstimate> {
    if !p.is_sparse() {
        return Err(domain(
            "density",
            format!(
                "receiver volume fraction {:.3} is outside the sparse regime",
                p.volume_fraction()
            ),
        ));
    }
    let run = SimConfig {
        fresh_field_per_particle: true,
        ..cfg.clone()
    };
    let curve = estimate_hitting_curve(p, &run, &[run.t_end])?;
    let interval = proportion_interval(curve.hits[0], curve.n_particles);
    Ok(SausageEstimate {
        t: run.t_end,
        estimate: curve.estimate[0],
        interval,
        analytic: curve.analytic[0],
        abs_error: (curve.analytic[0] - curve.estimate[0]).abs(),
    })
}
