//! Relative-magnitudes sensitivity of the first post-treatment effect to
//! parallel-trend violations, using the conservative fixed-bias interval.

use serde::{Deserialize, Serialize};

use crate::did::{EventStudyResult, RelativePeriod};
use crate::error::{Error, Result};
use crate::stats::z_critical;

/// Tag carried by every sensitivity output.
pub const METHOD: &str = "fixed-bias relative magnitudes (conservative)";

pub const DEFAULT_GRID: [f64; 5] = [0.0, 0.5, 1.0, 1.5, 2.0];

/// Yardstick for the largest pre-treatment violation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolationMode {
    /// Largest change between adjacent pre-period coefficients.
    #[default]
    Consecutive,
    /// Largest absolute pre-period coefficient.
    Magnitude,
}

/// Largest pre-treatment violation `b` from the lead coefficients
/// (baseline counted as 0).
pub fn max_pre_violation(es: &EventStudyResult, mode: ViolationMode) -> Result<f64> {
    let mut leads: Vec<(u32, f64)> = es
        .leads()
        .map(|c| match c.relative {
            RelativePeriod::Lead(k) => (k, c.estimate),
            _ => unreachable!(),
        })
        .collect();
    max_violation_of(&mut leads, mode)
}

/// [`max_pre_violation`] on `(k, delta_{-k})` pairs.
pub fn max_violation_of(leads: &mut [(u32, f64)], mode: ViolationMode) -> Result<f64> {
    if leads.is_empty() {
        return Err(Error::Argument("no pre-period coefficients".into()));
    }
    leads.sort_by_key(|(k, _)| *k);
    Ok(match mode {
        ViolationMode::Magnitude => leads.iter().map(|(_, d)| d.abs()).fold(0.0, f64::max),
        ViolationMode::Consecutive => {
            let mut prev = 0.0;
            let mut b = 0.0_f64;
            for (_, d) in leads.iter() {
                b = b.max((d - prev).abs());
                prev = *d;
            }
            b
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn excludes_zero(&self) -> bool {
        self.lo > 0.0 || self.hi < 0.0
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// `delta0 -/+ (mbar * b + z * se)`.
pub fn robust_ci(delta0: f64, se: f64, b: f64, mbar: f64, level: f64) -> Result<Interval> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Argument(format!("confidence level {level} outside (0,1)")));
    }
    if !(se > 0.0) || !(b >= 0.0) || !(mbar >= 0.0) {
        return Err(Error::Argument(format!("need se > 0, b >= 0, mbar >= 0 (got {se}, {b}, {mbar})")));
    }
    let half = mbar * b + z_critical(level) * se;
    Ok(Interval { lo: delta0 - half, hi: delta0 + half })
}

#[derive(Debug, Clone, Serialize)]
pub struct GridPoint {
    pub mbar: f64,
    pub lo: f64,
    pub hi: f64,
    pub excludes_zero: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SensitivityResult {
    pub method: &'static str,
    pub delta0: f64,
    pub se: f64,
    pub max_pre_violation: f64,
    pub grid: Vec<GridPoint>,
    /// Largest grid value up to which every interval excludes 0.
    pub breakdown_mbar: Option<f64>,
    /// Significant at `mbar = 0` but not at the first positive grid value.
    pub not_robust: bool,
}

/// Scans robust intervals for `delta_0` (the first post-period coefficient)
/// over an ascending grid starting at 0.
pub fn breakdown_scan(es: &EventStudyResult, grid: &[f64], mode: ViolationMode) -> Result<SensitivityResult> {
    let d0 = es
        .get(RelativePeriod::Lag(0))
        .ok_or_else(|| Error::Argument("event study has no onset coefficient".into()))?;
    let b = max_pre_violation(es, mode)?;
    scan(d0.estimate, d0.se, b, grid)
}

/// [`breakdown_scan`] from the raw ingredients.
pub fn scan(delta0: f64, se: f64, b: f64, grid: &[f64]) -> Result<SensitivityResult> {
    if grid.first() != Some(&0.0) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument("grid must start at 0 and increase strictly".into()));
    }
    let grid: Vec<GridPoint> = grid
        .iter()
        .map(|&m| {
            robust_ci(delta0, se, b, m, 0.95).map(|ci| GridPoint {
                mbar: m,
                lo: ci.lo,
                hi: ci.hi,
                excludes_zero: ci.excludes_zero(),
            })
        })
        .collect::<Result<_>>()?;
    let breakdown_mbar = grid.iter().take_while(|g| g.excludes_zero).last().map(|g| g.mbar);
    let not_robust = grid[0].excludes_zero && grid.get(1).is_some_and(|g| !g.excludes_zero);
    Ok(SensitivityResult { method: METHOD, delta0, se, max_pre_violation: b, grid, breakdown_mbar, not_robust })
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn violation_examples() {
        let c = ViolationMode::Consecutive;
        assert_eq!(max_violation_of(&mut [(1, 0.04)], c).unwrap(), 0.04);
        assert_eq!(max_violation_of(&mut [(1, 0.0), (2, 0.0)], c).unwrap(), 0.0);
        assert_abs_diff_eq!(max_violation_of(&mut [(2, 0.01), (1, 0.05)], c).unwrap(), 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(max_violation_of(&mut [(2, 0.10), (1, 0.05)], c).unwrap(), 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(
            max_violation_of(&mut [(2, 0.10), (1, 0.05)], ViolationMode::Magnitude).unwrap(),
            0.10,
            epsilon = 1e-15
        );
        assert!(max_violation_of(&mut [], c).is_err());
    }

    #[test]
    fn robust_ci_examples() {
        let ci = robust_ci(0.1, 0.02, 0.05, 0.0, 0.95).unwrap();
        assert_abs_diff_eq!(ci.lo, 0.0608, epsilon = 1e-4);
        assert_abs_diff_eq!(ci.hi, 0.1392, epsilon = 1e-4);
        let ci = robust_ci(0.1, 0.02, 0.05, 1.0, 0.95).unwrap();
        assert_abs_diff_eq!(ci.lo, 0.0108, epsilon = 1e-4);
        assert_abs_diff_eq!(ci.hi, 0.1892, epsilon = 1e-4);
        assert_eq!(robust_ci(0.1, 0.02, 0.0, 1.7, 0.95).unwrap(), robust_ci(0.1, 0.02, 0.0, 0.0, 0.95).unwrap());
        assert!(robust_ci(0.1, 0.02, 0.0, 0.0, 1.0).is_err());
        assert!(robust_ci(0.1, 0.0, 0.0, 0.0, 0.95).is_err());
    }

    #[test]
    fn scan_examples() {
        let r = scan(0.1, 0.02, 0.02, &DEFAULT_GRID).unwrap();
        assert_eq!(r.breakdown_mbar, Some(2.0));
        assert!(r.grid.iter().all(|g| g.excludes_zero));
        assert!(r.grid[4].lo > 0.0208 - 1e-4);
        let r = scan(0.03, 0.02, 0.02, &DEFAULT_GRID).unwrap();
        assert_eq!(r.breakdown_mbar, None);
        assert!(!r.not_robust);
        let r = scan(0.05, 0.02, 0.05, &DEFAULT_GRID).unwrap();
        assert_eq!(r.breakdown_mbar, Some(0.0));
        assert!(r.not_robust);
        assert!(scan(0.1, 0.02, 0.02, &[0.5, 1.0]).is_err());
        assert_eq!(r.method, METHOD);
    }

    proptest! {
        #[test]
        fn width_is_affine_in_mbar(d in -1.0..1.0f64, se in 1e-3..1.0f64, b in 0.0..0.5f64, m in 0.0..5.0f64) {
            let w0 = robust_ci(d, se, b, 0.0, 0.95).unwrap().width();
            let w = robust_ci(d, se, b, m, 0.95).unwrap().width();
            prop_assert!((w - w0 - 2.0 * b * m).abs() <= 1e-12);
        }

        #[test]
        fn breakdown_is_monotone(d in -0.3..0.3f64, se in 1e-3..0.1f64, b in 0.0..0.1f64) {
            let r = scan(d, se, b, &DEFAULT_GRID).unwrap();
            let first_fail = r.grid.iter().position(|g| !g.excludes_zero).unwrap_or(r.grid.len());
            prop_assert!(r.grid[first_fail..].iter().all(|g| !g.excludes_zero));
        }
    }
}
