use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use super::{AbsorptionMode, SimConfig};
use crate::analytics::ChannelParams;
use crate::geometry::{Point3, ReceiverField};

/// Crossing exponents d₀·d₁/(D·dt) above this are treated as no crossing.
const BRIDGE_CUTOFF: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fate {
    Absorbed,
    Degraded,
    Survived,
}

/// What happened to one molecule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleOutcome {
    pub fate: Fate,
    /// Absorption or degradation time, `t_end` for survivors.
    pub time: f64,
    /// The molecule left the part of space where receivers were sampled.
    /// Such molecules are recorded as survivors.
    pub escaped: bool,
}

impl ParticleOutcome {
    pub fn absorbed_by(&self, t: f64) -> bool {
        self.fate == Fate::Absorbed && self.time <= t
    }
}

/// Follows one molecule from the origin until it is absorbed, degrades, or
/// reaches `cfg.t_end`.
///
/// Between exact receiver checks the molecule moves inside a "safe ball"
/// around the last checked point whose radius is a lower bound on the
/// distance to every receiver surface; while the current position stays in
/// that ball neither an endpoint nor a step segment can touch a receiver, so
/// skipping the check there changes nothing.
pub fn simulate_particle<R: Rng + ?Sized>(
    p: &ChannelParams,
    field: &ReceiverField,
    cfg: &SimConfig,
    rng: &mut R,
) -> ParticleOutcome {
    let dt = cfg.dt;
    let t_end = cfg.t_end;
    let steps = cfg.steps();
    let sigma = (2.0 * p.diffusion() * dt).sqrt();
    let lifetime = if p.degradation() > 0.0 {
        Exp::new(p.degradation())
            .expect("positive rate")
            .sample(rng)
    } else {
        f64::INFINITY
    };
    let escape_radius = field.domain_radius() - field.radius();
    let d_dt = p.diffusion() * dt;
    // in bridge mode the safe ball keeps both step ends this far from every
    // surface, which bounds the skipped crossing chance by e^-40
    let margin = match cfg.absorption_mode {
        AbsorptionMode::Bridge => (BRIDGE_CUTOFF * d_dt).sqrt(),
        _ => 0.0,
    };
    let clearance = |q: Point3| {
        (field.clearance(q) - margin)
            .min(escape_radius - q.norm())
            .max(0.0)
    };

    let outcome = |fate, time| ParticleOutcome {
        fate,
        time,
        escaped: false,
    };

    let mut pos = Point3::ORIGIN;
    let mut anchor = pos;
    let mut safe = clearance(pos);
    for k in 1..=steps {
        let t_prev = (k - 1) as f64 * dt;
        let t_now = k as f64 * dt;
        let step = Point3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        ) * sigma;
        let prev = pos;
        pos = pos + step;

        if (pos - anchor).norm_sq() >= safe * safe {
            let hit_time = match cfg.absorption_mode {
                AbsorptionMode::Endpoint => (field.clearance(pos) <= 0.0).then_some(t_now),
                AbsorptionMode::Segment => field
                    .first_hit_on_segment(prev, pos)
                    .map(|h| t_prev + h.fraction * dt),
                AbsorptionMode::Bridge => {
                    let crossed = field.clearance(pos) <= 0.0 || {
                        let miss = field.bridge_miss_prob(prev, pos, d_dt, margin);
                        miss < 1.0 && rng.random::<f64>() >= miss
                    };
                    crossed.then_some(t_now)
                }
            };
            if let Some(t_hit) = hit_time {
                return if lifetime < t_hit {
                    outcome(Fate::Degraded, lifetime)
                } else {
                    outcome(Fate::Absorbed, t_hit)
                };
            }
            if lifetime <= t_now {
                return outcome(Fate::Degraded, lifetime);
            }
            if pos.norm() >= escape_radius {
                return ParticleOutcome {
                    fate: Fate::Survived,
                    time: t_end,
                    escaped: true,
                };
            }
            anchor = pos;
            safe = clearance(pos);
        } else if lifetime <= t_now {
            return outcome(Fate::Degraded, lifetime);
        }
    }
    outcome(Fate::Survived, t_end)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RngStream;

    fn cfg(t_end: f64) -> SimConfig {
        SimConfig {
            workers: 1,
            ..SimConfig::new(t_end)
        }
    }

    #[test]
    fn no_receivers_no_degradation_survives() {
        let p = ChannelParams::new(5.0, 100.0, 0.0, 0.0).unwrap();
        let c = cfg(0.05);
        let field = ReceiverField::empty(5.0, c.domain_radius(&p)).unwrap();
        for i in 0..50 {
            let o = simulate_particle(&p, &field, &c, &mut RngStream::new(1, i).rng());
            assert_eq!(o.fate, Fate::Survived);
            assert_eq!(o.time, 0.05);
            assert!(!o.escaped);
        }
    }

    #[test]
    fn fast_degradation_kills_immediately() {
        let p = ChannelParams::new(5.0, 100.0, 1e-5, 1e9).unwrap();
        let c = cfg(0.01);
        let field = ReceiverField::empty(5.0, c.domain_radius(&p)).unwrap();
        for i in 0..200 {
            let o = simulate_particle(&p, &field, &c, &mut RngStream::new(2, i).rng());
            assert_eq!(o.fate, Fate::Degraded);
            assert!(o.time < 1e-7);
        }
    }

    #[test]
    fn receiver_in_contact_absorbs_first_step() {
        // surface 0.01 µm from the origin, far below one step
        let p = ChannelParams::new(5.0, 100.0, 0.0, 0.0).unwrap();
        let field = ReceiverField::new(vec![Point3::new(5.01, 0.0, 0.0)], 5.0, 200.0).unwrap();
        let c = SimConfig {
            absorption_mode: AbsorptionMode::Segment,
            ..cfg(1.0)
        };
        let mut hits = 0;
        for i in 0..100 {
            let o = simulate_particle(&p, &field, &c, &mut RngStream::new(3, i).rng());
            if o.fate == Fate::Absorbed && o.time <= 0.01 {
                hits += 1;
            }
        }
        assert!(hits > 50);
    }

    #[test]
    fn bridge_mode_catches_at_least_endpoint_hits() {
        let p = ChannelParams::new(5.0, 100.0, 0.0, 0.0).unwrap();
        let field = ReceiverField::new(vec![Point3::new(6.0, 0.0, 0.0)], 5.0, 200.0).unwrap();
        let count = |mode| {
            let c = SimConfig {
                absorption_mode: mode,
                ..cfg(0.01)
            };
            (0..2000)
                .filter(|&i| {
                    let o = simulate_particle(&p, &field, &c, &mut RngStream::new(5, i).rng());
                    o.fate == Fate::Absorbed
                })
                .count()
        };
        assert!(count(AbsorptionMode::Bridge) > count(AbsorptionMode::Endpoint));
    }

    #[test]
    fn tiny_domain_reports_escape() {
        let p = ChannelParams::new(1.0, 100.0, 0.0, 0.0).unwrap();
        let field = ReceiverField::empty(1.0, 1.5).unwrap();
        let o = simulate_particle(&p, &field, &cfg(1.0), &mut RngStream::new(4, 0).rng());
        assert!(o.escaped);
        assert_eq!(o.fate, Fate::Survived);
    }
}
