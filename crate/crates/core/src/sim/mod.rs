//! Particle-based Monte Carlo estimates of hitting and detection
//! probabilities.
//!
//! Each molecule starts at the origin and takes Gaussian steps with per-axis
//! standard deviation √(2·D·dt). Its lifetime is drawn once from Exp(μ).
//! Absorption is tested at step endpoints (the classic discrete scheme),
//! along each straight step segment, or at endpoints with a Brownian-bridge
//! correction for crossings between them.
//!
//! Every particle reads its randomness from its own [`RngStream`], keyed by
//! the particle index, so results do not depend on the worker count.
//!
//! [`RngStream`]: crate::geometry::RngStream

mod estimate;
pub mod interval;
mod particle;

use std::fmt;
use std::str::FromStr;

use crate::analytics::ChannelParams;
use crate::error::{domain, Result};
use crate::geometry::DEFAULT_RECEIVER_CAP;

pub use estimate::{
    estimate_edp, estimate_hitting_curve, estimate_sausage_hitprob_smalllambda, simulate_particles,
    EdpEstimate, HittingCurve, SausageEstimate,
};
pub use particle::{simulate_particle, Fate, ParticleOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbsorptionMode {
    /// Absorb when a step ends inside a receiver.
    Endpoint,
    /// Absorb when a step's straight segment touches a receiver.
    Segment,
    /// Endpoint test plus the chance that the continuous path between two
    /// outside endpoints dipped into a receiver (Brownian-bridge crossing
    /// against the receiver's tangent plane).
    Bridge,
}

impl FromStr for AbsorptionMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "endpoint" => Ok(Self::Endpoint),
            "segment" => Ok(Self::Segment),
            "bridge" => Ok(Self::Bridge),
            other => Err(format!("unknown absorption mode `{other}` (endpoint|segment|bridge)")),
        }
    }
}

impl fmt::Display for AbsorptionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Endpoint => "endpoint",
            Self::Segment => "segment",
            Self::Bridge => "bridge",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Time step (s).
    pub dt: f64,
    /// Horizon (s).
    pub t_end: f64,
    /// Particles per curve, or replications for detection estimates.
    pub n_particles: u64,
    /// Receivers are sampled within a + multiplier·√(2·D·t_end) of the origin.
    pub domain_multiplier: f64,
    pub seed: u64,
    pub absorption_mode: AbsorptionMode,
    /// Draw a new receiver realization for every particle.
    pub fresh_field_per_particle: bool,
    /// Worker threads; results do not depend on this.
    pub workers: usize,
    /// Cap on the expected receiver count of one realization.
    pub receiver_cap: f64,
    /// Largest tolerated fraction of particles leaving the sampled domain.
    pub max_escape_rate: f64,
}

impl SimConfig {
    pub fn new(t_end: f64) -> Self {
        Self {
            dt: 1e-4,
            t_end,
            n_particles: 10_000,
            domain_multiplier: 12.0,
            seed: 0,
            absorption_mode: AbsorptionMode::Endpoint,
            fresh_field_per_particle: true,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            receiver_cap: DEFAULT_RECEIVER_CAP,
            max_escape_rate: 1e-3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(domain("dt", format!("must be finite and > 0, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= self.dt) {
            return Err(domain(
                "t_end",
                format!("must be finite and >= dt = {}, got {}", self.dt, self.t_end),
            ));
        }
        if self.n_particles < 1 {
            return Err(domain("n_particles", "must be >= 1"));
        }
        if !(self.domain_multiplier.is_finite() && self.domain_multiplier > 0.0) {
            return Err(domain(
                "domain_multiplier",
                format!("must be finite and > 0, got {}", self.domain_multiplier),
            ));
        }
        if self.workers < 1 {
            return Err(domain("workers", "must be >= 1"));
        }
        Ok(())
    }

    /// Number of steps covering `[0, t_end]`.
    pub fn steps(&self) -> u64 {
        ((self.t_end / self.dt).round() as u64).max(1)
    }

    /// Radius of the sampled receiver domain for `p`.
    pub fn domain_radius(&self, p: &ChannelParams) -> f64 {
        p.radius() + self.domain_multiplier * (2.0 * p.diffusion() * self.t_end).sqrt()
    }
}
