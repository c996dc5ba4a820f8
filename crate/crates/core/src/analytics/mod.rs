//! Closed-form channel quantities and their quadrature counterparts.
//!
//! All functions are pure. Units: µm, s, µm²/s, receivers/µm³, 1/s.

mod detection;
mod hitting;
pub mod quadrature;
mod time_constant;

use std::f64::consts::PI;

use crate::error::{domain, Result};

pub use detection::{
    binomial_upper_tail, detection_prob_from_hit, edp_large_lambda_asymptote,
    edp_small_lambda_asymptote, event_detection_prob, required_molecules, threshold_prob,
    LARGE_DENSITY_CONSTANT,
};
pub use hitting::{
    alpha_beta, hitting_prob, hitting_prob_degradable, hitting_prob_limit,
    hitting_prob_quadrature, hitting_rate, mean_sausage_volume, mean_sausage_volume_degradable,
    sausage_volume_quadrature,
};
pub use time_constant::{
    time_constant, time_constant_degradable, time_constant_order_bounds, OrderBounds,
};

/// Receiver volume fraction above which dropping the higher cumulants of the
/// sausage volume is no longer a good approximation.
pub const SPARSE_VOLUME_FRACTION: f64 = 0.1;

/// Physical parameters of the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    radius: f64,
    diffusion: f64,
    density: f64,
    degradation: f64,
}

impl ChannelParams {
    /// `radius` a (µm), `diffusion` D (µm²/s), `density` λ (receivers/µm³),
    /// `degradation` μ (1/s).
    pub fn new(radius: f64, diffusion: f64, density: f64, degradation: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(domain("radius", format!("must be finite and > 0, got {radius}")));
        }
        if !(diffusion.is_finite() && diffusion > 0.0) {
            return Err(domain("diffusion", format!("must be finite and > 0, got {diffusion}")));
        }
        if !(density.is_finite() && density >= 0.0) {
            return Err(domain("density", format!("must be finite and >= 0, got {density}")));
        }
        if !(degradation.is_finite() && degradation >= 0.0) {
            return Err(domain(
                "degradation",
                format!("must be finite and >= 0, got {degradation}"),
            ));
        }
        let p = Self {
            radius,
            diffusion,
            density,
            degradation,
        };
        if !p.is_sparse() {
            log::debug!(
                "receiver volume fraction {:.3} is not small; first-cumulant closed forms overestimate the hitting probability",
                p.volume_fraction()
            );
        }
        Ok(p)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn diffusion(&self) -> f64 {
        self.diffusion
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn degradation(&self) -> f64 {
        self.degradation
    }

    pub fn with_radius(self, radius: f64) -> Result<Self> {
        Self::new(radius, self.diffusion, self.density, self.degradation)
    }

    pub fn with_diffusion(self, diffusion: f64) -> Result<Self> {
        Self::new(self.radius, diffusion, self.density, self.degradation)
    }

    pub fn with_density(self, density: f64) -> Result<Self> {
        Self::new(self.radius, self.diffusion, density, self.degradation)
    }

    pub fn with_degradation(self, degradation: f64) -> Result<Self> {
        Self::new(self.radius, self.diffusion, self.density, degradation)
    }

    /// Expected fraction of space covered by receiver balls, λ·(4/3)πa³.
    pub fn volume_fraction(&self) -> f64 {
        self.density * 4.0 / 3.0 * PI * self.radius.powi(3)
    }

    pub fn is_sparse(&self) -> bool {
        self.volume_fraction() < SPARSE_VOLUME_FRACTION
    }

    /// Linear-in-time rate 4πλDa of the sausage-volume exponent.
    pub(crate) fn linear_rate(&self) -> f64 {
        4.0 * PI * self.density * self.diffusion * self.radius
    }

    /// Coefficient b with λ·κ₁(t) = linear_rate·t + 2b·√t.
    pub(crate) fn sqrt_rate(&self) -> f64 {
        4.0 * self.radius * self.radius * self.density * (PI * self.diffusion).sqrt()
    }
}

/// Rate α = 4πaλD + μ and shape β = 4a²λ√(πD/α) of the degradable hitting
/// probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaBeta {
    pub alpha: f64,
    pub beta: f64,
}

/// Inputs for event-detection computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionSpec {
    n_molecules: u64,
    threshold: u64,
    t: f64,
    target_p: Option<f64>,
}

impl DetectionSpec {
    pub fn new(n_molecules: u64, threshold: u64, t: f64) -> Result<Self> {
        if n_molecules < 1 {
            return Err(domain("n_molecules", "must be >= 1"));
        }
        if threshold < 1 || threshold > n_molecules {
            return Err(domain(
                "threshold",
                format!("must lie in [1, {n_molecules}], got {threshold}"),
            ));
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(domain("t", format!("must be finite and >= 0, got {t}")));
        }
        Ok(Self {
            n_molecules,
            threshold,
            t,
            target_p: None,
        })
    }

    /// At-least-one detection of `n_molecules` by time `t`.
    pub fn any(n_molecules: u64, t: f64) -> Result<Self> {
        Self::new(n_molecules, 1, t)
    }

    pub fn with_target(mut self, target_p: f64) -> Result<Self> {
        if !(target_p > 0.0 && target_p < 1.0) {
            return Err(domain("target_p", format!("must lie in (0, 1), got {target_p}")));
        }
        self.target_p = Some(target_p);
        Ok(self)
    }

    pub fn n_molecules(&self) -> u64 {
        self.n_molecules
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn target_p(&self) -> Option<f64> {
        self.target_p
    }
}

pub(crate) fn check_time(name: &'static str, t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(domain(name, format!("time must be finite and >= 0, got {t}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_params() {
        assert!(ChannelParams::new(0.0, 100.0, 1e-5, 0.0).is_err());
        assert!(ChannelParams::new(5.0, -1.0, 1e-5, 0.0).is_err());
        assert!(ChannelParams::new(5.0, 100.0, -1e-5, 0.0).is_err());
        assert!(ChannelParams::new(5.0, 100.0, 1e-5, f64::NAN).is_err());
        assert!(ChannelParams::new(5.0, 100.0, 0.0, 0.0).is_ok());
    }

    #[test]
    fn sparse_flag() {
        let p = ChannelParams::new(5.0, 100.0, 1e-5, 0.0).unwrap();
        assert!(p.is_sparse());
        let dense = p.with_density(1e-3).unwrap();
        assert!(!dense.is_sparse());
    }

    #[test]
    fn detection_spec_bounds() {
        assert!(DetectionSpec::new(0, 1, 1.0).is_err());
        assert!(DetectionSpec::new(5, 0, 1.0).is_err());
        assert!(DetectionSpec::new(5, 6, 1.0).is_err());
        assert!(DetectionSpec::new(5, 5, -1.0).is_err());
        assert!(DetectionSpec::any(5, 1.0).unwrap().with_target(1.0).is_err());
        let s = DetectionSpec::new(5, 2, 1.0).unwrap().with_target(0.9).unwrap();
        assert_eq!(s.target_p(), Some(0.9));
    }
}
