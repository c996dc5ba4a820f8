//! Event detection with N independently emitted molecules.

use statrs::function::factorial::ln_binomial;

use super::hitting::{hitting_prob_degradable, mean_sausage_volume_degradable};
use super::{check_time, ChannelParams, DetectionSpec};
use crate::error::{domain, Error, Result};

/// Constant of the large-density expansion 1 − (cμ/(aD))^N·λ^{−N}. Its
/// derivation is not given with the expansion; it is used as published.
pub const LARGE_DENSITY_CONSTANT: f64 = 0.0095;

/// 1 − (1 − p_hit)^n, evaluated in log space.
pub fn detection_prob_from_hit(p_hit: f64, n: u64) -> f64 {
    if p_hit <= 0.0 {
        return 0.0;
    }
    if p_hit >= 1.0 {
        return 1.0;
    }
    -(n as f64 * (-p_hit).ln_1p()).exp_m1()
}

/// Probability that at least one of `spec.n_molecules()` molecules is
/// absorbed by time `spec.t()`.
pub fn event_detection_prob(p: &ChannelParams, spec: &DetectionSpec) -> Result<f64> {
    let p_hit = hitting_prob_degradable(p, spec.t())?;
    Ok(detection_prob_from_hit(p_hit, spec.n_molecules()))
}

/// P(X ≥ k) for X ~ Binomial(n, p).
///
/// Sums whichever tail avoids cancellation; binomial coefficients come from
/// log-gamma.
pub fn binomial_upper_tail(n: u64, k: u64, p: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > n || p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let (ln_p, ln_q) = (p.ln(), (-p).ln_1p());
    let term = |j: u64| (ln_binomial(n, j) + j as f64 * ln_p + (n - j) as f64 * ln_q).exp();
    let mean = n as f64 * p;
    if k as f64 > mean {
        // terms decrease monotonically past the mode
        let mut sum = 0.0;
        for j in k..=n {
            let t = term(j);
            sum += t;
            if t <= sum * 1e-17 {
                break;
            }
        }
        sum.min(1.0)
    } else {
        let lower: f64 = (0..k).map(term).sum();
        (1.0 - lower).clamp(0.0, 1.0)
    }
}

/// Probability that at least `spec.threshold()` molecules are absorbed by
/// time `spec.t()`.
pub fn threshold_prob(p: &ChannelParams, spec: &DetectionSpec) -> Result<f64> {
    let p_hit = hitting_prob_degradable(p, spec.t())?;
    Ok(binomial_upper_tail(spec.n_molecules(), spec.threshold(), p_hit))
}

/// Smallest number of molecules whose detection probability by time `t`
/// reaches `target_p`.
pub fn required_molecules(p: &ChannelParams, target_p: f64, t: f64) -> Result<u64> {
    if !(target_p > 0.0 && target_p < 1.0) {
        return Err(domain("target_p", format!("must lie in (0, 1), got {target_p}")));
    }
    check_time("t", t)?;
    let p_hit = hitting_prob_degradable(p, t)?;
    if p_hit <= 0.0 {
        return Err(Error::Infeasible(format!(
            "hitting probability by t = {t} s is zero; no number of molecules reaches {target_p}"
        )));
    }
    if p_hit >= 1.0 {
        return Ok(1);
    }
    let real = (-target_p).ln_1p() / (-p_hit).ln_1p();
    if !real.is_finite() || real > u64::MAX as f64 / 2.0 {
        return Err(Error::Infeasible(format!(
            "required molecule count {real:e} is not representable"
        )));
    }
    let mut n = (real.ceil() as u64).max(1);
    // guard the ceiling against rounding in the logarithms
    while n > 1 && detection_prob_from_hit(p_hit, n - 1) >= target_p {
        n -= 1;
    }
    while detection_prob_from_hit(p_hit, n) < target_p {
        n += 1;
    }
    Ok(n)
}

/// Leading small-density term of the detection probability with
/// degradation: N·λ·(mean degradable sausage volume).
pub fn edp_small_lambda_asymptote(p: &ChannelParams, spec: &DetectionSpec) -> Result<f64> {
    if p.degradation() == 0.0 {
        return Err(domain(
            "degradation",
            "small-density asymptote needs μ > 0; without degradation the detection probability has an exact closed form",
        ));
    }
    let volume = mean_sausage_volume_degradable(p, spec.t())?;
    Ok(spec.n_molecules() as f64 * p.density() * volume)
}

/// Large-density expansion 1 − (0.0095·μ/(aDλ))^N.
///
/// Accuracy is only documented for large λ (above about 1e-2 receivers/µm³
/// at μ = 1 s⁻¹, D = 100 µm²/s); for small λ the value leaves [0, 1].
pub fn edp_large_lambda_asymptote(p: &ChannelParams, spec: &DetectionSpec) -> f64 {
    let base = LARGE_DENSITY_CONSTANT * p.degradation()
        / (p.radius() * p.diffusion() * p.density());
    -(spec.n_molecules() as f64 * base.ln()).exp_m1()
}
