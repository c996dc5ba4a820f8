use crate::sim::interval::ProportionInterval;

use super::config::Acceptance;

/// One analytic-vs-Monte-Carlo comparison point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub sweep_value: f64,
    pub analytic: f64,
    pub mc_estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub ci_halfwidth: f64,
    pub abs_error: f64,
}

impl ComparisonRow {
    pub fn new(sweep_value: f64, analytic: f64, ci: &ProportionInterval) -> Self {
        Self {
            sweep_value,
            analytic,
            mc_estimate: ci.estimate,
            ci_low: ci.low,
            ci_high: ci.high,
            ci_halfwidth: ci.halfwidth,
            abs_error: (analytic - ci.estimate).abs(),
        }
    }

    /// Row with a symmetric interval `mc ± halfwidth`.
    pub fn symmetric(sweep_value: f64, analytic: f64, mc_estimate: f64, ci_halfwidth: f64) -> Self {
        Self {
            sweep_value,
            analytic,
            mc_estimate,
            ci_low: mc_estimate - ci_halfwidth,
            ci_high: mc_estimate + ci_halfwidth,
            ci_halfwidth,
            abs_error: (analytic - mc_estimate).abs(),
        }
    }

    pub fn inside_ci(&self) -> bool {
        self.ci_low <= self.analytic && self.analytic <= self.ci_high
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareSummary {
    pub points: usize,
    pub max_abs_error: f64,
    pub fraction_inside_ci: f64,
}

impl CompareSummary {
    pub fn passes(&self, acceptance: &Acceptance) -> bool {
        self.fraction_inside_ci >= acceptance.min_inside_ci && self.max_abs_error <= acceptance.max_abs_error
    }

    /// Text of the `# summary` CSV line.
    pub fn line(&self) -> String {
        format!(
            "summary points={} max_abs_error={} fraction_inside_ci={}",
            self.points, self.max_abs_error, self.fraction_inside_ci
        )
    }
}

/// Largest absolute error and share of rows whose interval covers the
/// analytic value.
pub fn compare_report(rows: &[ComparisonRow]) -> CompareSummary {
    assert!(!rows.is_empty(), "compare_report needs at least one row");
    let inside = rows.iter().filter(|r| r.inside_ci()).count();
    CompareSummary {
        points: rows.len(),
        max_abs_error: rows.iter().map(|r| r.abs_error).fold(0.0, f64::max),
        fraction_inside_ci: inside as f64 / rows.len() as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::interval::proportion_interval;

    #[test]
    fn all_inside() {
        let rows: Vec<_> = (0..5)
            .map(|i| ComparisonRow::symmetric(i as f64, 0.3, 0.31, 0.02))
            .collect();
        let s = compare_report(&rows);
        assert_eq!(s.fraction_inside_ci, 1.0);
        assert!((s.max_abs_error - 0.01).abs() < 1e-12);
        assert!(s.passes(&Acceptance::default()));
    }

    #[test]
    fn flags_outside_point() {
        let row = ComparisonRow::symmetric(1.0, 0.5, 0.4, 0.05);
        assert!(!row.inside_ci());
        assert!((row.abs_error - 0.1).abs() < 1e-12);
        let s = compare_report(&[row]);
        assert_eq!(s.fraction_inside_ci, 0.0);
        assert!(!s.passes(&Acceptance::default()));
    }

    #[test]
    fn uses_asymmetric_interval() {
        let ci = proportion_interval(0, 1000);
        let row = ComparisonRow::new(0.0, 0.002, &ci);
        assert!(row.inside_ci());
        assert_eq!(row.mc_estimate, 0.0);
    }
}
