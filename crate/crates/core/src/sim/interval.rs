//! Binomial confidence intervals.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.96;

/// Below this many successes (or failures) the Wilson score interval is
/// used instead of the normal approximation.
pub const WILSON_THRESHOLD: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProportionInterval {
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
    pub halfwidth: f64,
    pub wilson: bool,
}

impl ProportionInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.low <= x && x <= self.high
    }
}

/// 95% interval for a proportion of `successes` out of `n` trials.
pub fn proportion_interval(successes: u64, n: u64) -> ProportionInterval {
    assert!(n > 0 && successes <= n, "need 0 <= successes <= n, n > 0");
    let nf = n as f64;
    let p = successes as f64 / nf;
    if successes.min(n - successes) >= WILSON_THRESHOLD {
        let halfwidth = Z95 * (p * (1.0 - p) / nf).sqrt();
        return ProportionInterval {
            estimate: p,
            low: (p - halfwidth).max(0.0),
            high: (p + halfwidth).min(1.0),
            halfwidth,
            wilson: false,
        };
    }
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let spread = Z95 / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    let low = (center - spread).max(0.0);
    let high = (center + spread).min(1.0);
    ProportionInterval {
        estimate: p,
        low,
        high,
        halfwidth: 0.5 * (high - low),
        wilson: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_halfwidth() {
        let ci = proportion_interval(2_500, 10_000);
        assert!(!ci.wilson);
        assert!((ci.halfwidth - 1.96 * (0.25f64 * 0.75 / 1e4).sqrt()).abs() < 1e-15);
        assert!(ci.contains(0.25) && !ci.contains(0.27));
    }

    #[test]
    fn wilson_for_rare_events() {
        let ci = proportion_interval(0, 10_000);
        assert!(ci.wilson);
        assert_eq!(ci.low, 0.0);
        assert!(ci.high > 0.0 && ci.high < 5e-4);
        let ci = proportion_interval(3, 1000);
        assert!(ci.wilson && ci.low > 0.0 && ci.contains(0.003));
    }

    #[test]
    fn halfwidth_scales_with_inverse_sqrt_n() {
        let a = proportion_interval(1_000, 10_000).halfwidth;
        let b = proportion_interval(4_000, 40_000).halfwidth;
        assert!((a / b - 2.0).abs() < 1e-12);
    }
}
