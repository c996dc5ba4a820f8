//! Time needed for the hitting process to reach 1 − 1/e of its maximum.

use std::f64::consts::PI;

use super::hitting::alpha_beta;
use super::{AlphaBeta, ChannelParams};
use crate::error::{domain, Result};

fn require_receivers(p: &ChannelParams) -> Result<()> {
    if p.density() > 0.0 {
        Ok(())
    } else {
        Err(domain("density", "time constant is undefined without receivers"))
    }
}

/// Time constant of the non-degradable hitting process (μ is ignored):
/// (a²/πD)·(√(1 + 1/(4a³λ)) − 1)².
///
/// Solves linear_rate·t + 2b√t = 1 exactly, so
/// `hitting_prob(p, time_constant(p)) == 1 − 1/e` up to rounding.
pub fn time_constant(p: &ChannelParams) -> Result<f64> {
    require_receivers(p)?;
    let (a, d, lambda) = (p.radius(), p.diffusion(), p.density());
    let y = 1.0 / (4.0 * a.powi(3) * lambda);
    // √(1+y) − 1 without cancellation for small y
    let root = y / ((1.0 + y).sqrt() + 1.0);
    Ok(a * a / (PI * d) * root * root)
}

/// Approximate time constant with degradation, (β²/α)(1 − √(1 + 1/β²))²,
/// evaluated in the equivalent form 1/(α(β + √(β² + 1))²).
pub fn time_constant_degradable(p: &ChannelParams) -> Result<f64> {
    require_receivers(p)?;
    let AlphaBeta { alpha, beta } = alpha_beta(p);
    let s = beta + (beta * beta + 1.0).sqrt();
    Ok(1.0 / (alpha * s * s))
}

/// Order-of-magnitude values of the time constant without and with
/// degradation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderBounds {
    pub nondegradable: f64,
    pub degradable: f64,
}

/// (1/(4πλDa))·min(1, 1/(16a³λ)) and
/// (1/(4πλDa))·min(4πλDa/(4πλDa + μ), 1/(16a³λ)).
pub fn time_constant_order_bounds(p: &ChannelParams) -> Result<OrderBounds> {
    require_receivers(p)?;
    let c = p.linear_rate();
    let dense = 1.0 / (16.0 * p.radius().powi(3) * p.density());
    Ok(OrderBounds {
        nondegradable: dense.min(1.0) / c,
        degradable: dense.min(c / (c + p.degradation())) / c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{hitting_prob, hitting_prob_degradable, hitting_prob_limit};

    fn params(a: f64, d: f64, lambda: f64, mu: f64) -> ChannelParams {
        ChannelParams::new(a, d, lambda, mu).unwrap()
    }

    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn nondegradable_value_and_identity() {
        let p = params(40.0, 100.0, 1e-6, 0.0);
        let tc = time_constant(&p).unwrap();
        assert!((tc - 7.518_422_029_136_406).abs() < 1e-10);
        let target = 1.0 - (-1.0f64).exp();
        assert!((hitting_prob(&p, tc).unwrap() - target).abs() < 1e-12);
        assert!(time_constant(&p.with_density(0.0).unwrap()).is_err());
    }

    #[test]
    fn appendix_bounds_hold() {
        for &lambda in &[1e-9, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3] {
            let p = params(40.0, 100.0, lambda, 0.0);
            let tc = time_constant(&p).unwrap();
            let (a, d) = (p.radius(), p.diffusion());
            assert!(tc <= 1.0 / (4.0 * PI * lambda * d * a));
            assert!(tc <= 1.0 / (64.0 * a.powi(4) * lambda * lambda * PI * d));
        }
    }

    #[test]
    fn degradable_reduces_to_nondegradable() {
        for &(a, lambda) in &[(5.0, 1e-5), (40.0, 1e-8), (40.0, 1e-3), (0.5, 0.3)] {
            let p = params(a, 100.0, lambda, 0.0);
            let r = time_constant_degradable(&p).unwrap() / time_constant(&p).unwrap();
            assert!((r - 1.0).abs() < 1e-10, "{a} {lambda}");
        }
    }

    #[test]
    fn degradable_value_against_root_find() {
        let p = params(40.0, 100.0, 1e-6, 1.0);
        let tc = time_constant_degradable(&p).unwrap();
        assert!((tc - 0.763_400_985_911_101_2).abs() < 1e-12);

        // t where the exact curve reaches (1 − 1/e) of the approximate plateau
        let ab = alpha_beta(&p);
        let plateau = 1.0 + p.degradation() / ab.alpha * (PI.sqrt() * ab.beta - 1.0);
        let k = 1.0 - (-1.0f64).exp();
        let root = bisect(|t| hitting_prob_degradable(&p, t).unwrap() - plateau * k, 1e-9, 100.0);
        assert!((root - 0.538_222_064_521_031_5).abs() < 1e-9);
        // the approximation of the time constant lands within a factor 1.5 of it
        assert!(tc / root < 1.5 && root / tc < 1.5);
        assert!(plateau >= hitting_prob_limit(&p));
    }

    /// Relative miss of the curve at the approximate time constant against
    /// (1 − 1/e) of the approximate plateau 1 + (μ/α)(√π·β − 1).
    fn plateau_fraction_error(p: &ChannelParams) -> f64 {
        let ab = alpha_beta(p);
        let plateau = 1.0 + p.degradation() / ab.alpha * (PI.sqrt() * ab.beta - 1.0);
        let target = plateau * (1.0 - (-1.0f64).exp());
        let tc = time_constant_degradable(p).unwrap();
        (hitting_prob_degradable(p, tc).unwrap() / target - 1.0).abs()
    }

    fn fig5_grid() -> impl Iterator<Item = f64> {
        (0..=50).map(|i| 10f64.powf(-8.0 + 5.0 * i as f64 / 50.0))
    }

    #[test]
    #[ignore = "known to fail: the approximate time constant misses (1 - 1/e) of the plateau by up to ~55% at mu = 1"]
    fn degradable_reaches_plateau_fraction_within_ten_percent() {
        for &mu in &[0.0, 0.01, 1.0] {
            for lambda in fig5_grid() {
                let err = plateau_fraction_error(&params(40.0, 100.0, lambda, mu));
                assert!(err <= 0.1, "mu {mu} lambda {lambda}: {err}");
            }
        }
    }

    #[test]
    fn degradable_plateau_fraction_error_profile() {
        let worst = |mu: f64| {
            fig5_grid()
                .map(|l| plateau_fraction_error(&params(40.0, 100.0, l, mu)))
                .fold(0.0, f64::max)
        };
        assert!(worst(0.0) < 1e-12);
        assert!(worst(0.01) < 0.1);
        assert!(worst(1.0) > 0.25);
        let example = plateau_fraction_error(&params(40.0, 100.0, 1e-6, 1.0));
        assert!((0.1..0.15).contains(&example), "{example}");
    }

    #[test]
    fn degradable_nonincreasing_in_density() {
        for &mu in &[0.0, 0.01, 1.0] {
            let mut prev = f64::INFINITY;
            for i in 0..=50 {
                let lambda = 10f64.powf(-8.0 + 5.0 * i as f64 / 50.0);
                let tc = time_constant_degradable(&params(40.0, 100.0, lambda, mu)).unwrap();
                assert!(tc <= prev);
                prev = tc;
            }
        }
    }

    #[test]
    fn order_bounds_select_min() {
        let sparse = params(40.0, 100.0, 1e-9, 0.0);
        let b = time_constant_order_bounds(&sparse).unwrap();
        let c = 4.0 * PI * 1e-9 * 100.0 * 40.0;
        assert!((b.nondegradable - 1.0 / c).abs() / b.nondegradable < 1e-14);

        let dense = params(40.0, 100.0, 1e-4, 0.0);
        assert!(16.0 * 40f64.powi(3) * 1e-4 > 1.0);
        let b = time_constant_order_bounds(&dense).unwrap();
        let expect = 1.0 / (64.0 * PI * 1e-8 * 100.0 * 40f64.powi(4));
        assert!((b.nondegradable - expect).abs() / expect < 1e-14);

        let p = params(40.0, 100.0, 1e-7, 1.0);
        let b = time_constant_order_bounds(&p).unwrap();
        let c = 4.0 * PI * 1e-7 * 100.0 * 40.0;
        assert!((c - 0.005_026_548).abs() < 1e-9);
        assert!((b.degradable * c - c / (c + 1.0)).abs() < 1e-15);

        assert!(time_constant_order_bounds(&p.with_density(0.0).unwrap()).is_err());
    }

    #[test]
    fn order_bounds_within_factor_ten() {
        for &mu in &[0.0, 0.01, 1.0] {
            for i in 0..=50 {
                let lambda = 10f64.powf(-8.0 + 5.0 * i as f64 / 50.0);
                let p = params(40.0, 100.0, lambda, mu);
                let b = time_constant_order_bounds(&p).unwrap();
                let exact = time_constant(&p).unwrap();
                let approx = time_constant_degradable(&p).unwrap();
                let r0 = exact / b.nondegradable;
                let r1 = approx / b.degradable;
                assert!((0.1..=10.0).contains(&r0), "mu {mu} lambda {lambda} r {r0}");
                assert!((0.1..=10.0).contains(&r1), "mu {mu} lambda {lambda} r {r1}");
            }
        }
    }
}
