use std::f64::consts::PI;

use super::quadrature::{integrate, Tolerance};
use super::{check_time, AlphaBeta, ChannelParams};
use crate::error::{domain, Result};
use crate::specfun::{erf, erfc, erfcx};

/// Absolute tolerance of the hitting-probability quadrature.
pub const QUADRATURE_ABS_TOL: f64 = 1e-10;

/// Radial truncation of the sausage-volume integrand, in units of √(4Dt).
const SAUSAGE_TRUNCATION: f64 = 10.0;

/// Mean volume κ₁(t) = 4πDat + 8a²√(πDt) of the Wiener sausage of radius a
/// with the transmitter's exclusion ball removed.
pub fn mean_sausage_volume(p: &ChannelParams, t: f64) -> Result<f64> {
    check_time("t", t)?;
    let (a, d) = (p.radius(), p.diffusion());
    Ok(4.0 * PI * d * a * t + 8.0 * a * a * (PI * d * t).sqrt())
}

/// Mean sausage volume of a molecule that stops moving at an exponential
/// lifetime with rate μ. Falls back to [`mean_sausage_volume`] when μ = 0.
pub fn mean_sausage_volume_degradable(p: &ChannelParams, t: f64) -> Result<f64> {
    check_time("t", t)?;
    let mu = p.degradation();
    if mu == 0.0 {
        return mean_sausage_volume(p, t);
    }
    let (a, d) = (p.radius(), p.diffusion());
    let length2 = d / mu;
    Ok(4.0 * PI * a * length2 * -(-mu * t).exp_m1()
        + 4.0 * PI * a * a * length2.sqrt() * erf((mu * t).sqrt()))
}

fn exponent(p: &ChannelParams, t: f64) -> f64 {
    p.linear_rate() * t + 2.0 * p.sqrt_rate() * t.sqrt()
}

/// Hitting probability of a non-degradable molecule by time `t`,
/// 1 − exp(−λκ₁(t)). Ignores μ.
pub fn hitting_prob(p: &ChannelParams, t: f64) -> Result<f64> {
    check_time("t", t)?;
    Ok(-(-exponent(p, t)).exp_m1())
}

fn rate_at(p: &ChannelParams, t: f64) -> f64 {
    (p.linear_rate() + p.sqrt_rate() / t.sqrt()) * (-exponent(p, t)).exp()
}

/// Time derivative of [`hitting_prob`]. Diverges as t^{-1/2} at the origin,
/// so `t` must be strictly positive.
pub fn hitting_rate(p: &ChannelParams, t: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(domain("t", format!("hitting rate needs t > 0, got {t}")));
    }
    Ok(rate_at(p, t))
}

pub fn alpha_beta(p: &ChannelParams) -> AlphaBeta {
    let alpha = p.linear_rate() + p.degradation();
    let beta = if p.density() == 0.0 {
        0.0
    } else {
        p.sqrt_rate() / alpha.sqrt()
    };
    AlphaBeta { alpha, beta }
}

/// Hitting probability by time `t` of a molecule that degrades at rate μ.
///
/// The term exp(β²)·(erf(β+u) − erf(β)) is evaluated as
/// erfcx(β) − erfcx(β+u)·exp(−2βu − u²), which stays finite for any β.
pub fn hitting_prob_degradable(p: &ChannelParams, t: f64) -> Result<f64> {
    check_time("t", t)?;
    if p.density() == 0.0 {
        return Ok(0.0);
    }
    let mu = p.degradation();
    if mu == 0.0 {
        return hitting_prob(p, t);
    }
    let AlphaBeta { alpha, beta } = alpha_beta(p);
    let u = (alpha * t).sqrt();
    let decay = 2.0 * beta * u + u * u;
    let direct = p.linear_rate() / alpha * -(-decay).exp_m1();
    let scaled = erfcx(beta) - erfcx(beta + u) * (-decay).exp();
    let value = direct + PI.sqrt() * beta * (mu / alpha) * scaled;
    Ok(value.clamp(0.0, 1.0))
}

/// Numerical route to [`hitting_prob_degradable`]: integrates the hitting
/// rate weighted by the survival probability exp(−μs) over (0, t], after the
/// substitution s = u² that removes the endpoint singularity.
pub fn hitting_prob_quadrature(p: &ChannelParams, t: f64) -> Result<f64> {
    check_time("t", t)?;
    if t == 0.0 || p.density() == 0.0 {
        return Ok(0.0);
    }
    let mu = p.degradation();
    let integrand = |u: f64| {
        let s = u * u;
        2.0 * u * rate_at(p, s) * (-mu * s).exp()
    };
    integrate(
        integrand,
        0.0,
        t.sqrt(),
        Tolerance::absolute(QUADRATURE_ABS_TOL),
    )
}

/// Probability that a degradable molecule is ever absorbed,
/// 1 − μ/α + √π·β·(μ/α)·erfcx(β).
pub fn hitting_prob_limit(p: &ChannelParams) -> f64 {
    if p.density() == 0.0 {
        return 0.0;
    }
    let mu = p.degradation();
    if mu == 0.0 {
        return 1.0;
    }
    let AlphaBeta { alpha, beta } = alpha_beta(p);
    let value = p.linear_rate() / alpha + PI.sqrt() * beta * (mu / alpha) * erfcx(beta);
    value.clamp(0.0, 1.0)
}

/// Mean sausage volume by radial quadrature of the single-sphere hitting
/// probability (a/r)·erfc((r − a)/√(4Dt)) over the exterior of the
/// exclusion ball.
pub fn sausage_volume_quadrature(p: &ChannelParams, t: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(domain("t", format!("sausage quadrature needs t > 0, got {t}")));
    }
    let (a, d) = (p.radius(), p.diffusion());
    let spread = (4.0 * d * t).sqrt();
    integrate(
        |r| 4.0 * PI * r * r * (a / r) * erfc((r - a) / spread),
        a,
        a + SAUSAGE_TRUNCATION * spread,
        Tolerance::relative(1e-13),
    )
}
