use serde::Serialize;

use super::fit::{FitResult, VcovKind};
use crate::stats::{t_critical, t_two_sided_p};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefRow {
    pub term: String,
    pub estimate: f64,
    pub se: f64,
    pub t: f64,
    pub p: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub df: usize,
    /// Set when the standard error is zero; `p` is then reported as 0.
    pub degenerate_se: bool,
}

/// Degrees of freedom for t tests: `G - 1` with clustered covariance,
/// `N - K` otherwise.
pub fn inference_df(fit: &FitResult) -> usize {
    match (fit.vcov.kind, fit.vcov.clusters) {
        (VcovKind::Cluster, Some(g)) => g - 1,
        _ => fit.df_resid(),
    }
}

pub fn coef_row(fit: &FitResult, j: usize, level: f64) -> CoefRow {
    let df = inference_df(fit);
    let estimate = fit.coefficients[j];
    let se = fit.vcov.matrix[(j, j)].max(0.0).sqrt();
    let (t, p, half, degenerate_se) = if se > 0.0 {
        let t = estimate / se;
        (t, t_two_sided_p(t, df as f64), t_critical(level, df as f64) * se, false)
    } else {
        let t = if estimate == 0.0 { 0.0 } else { estimate.signum() * f64::INFINITY };
        (t, if estimate == 0.0 { 1.0 } else { 0.0 }, 0.0, true)
    };
    CoefRow {
        term: fit.names[j].clone(),
        estimate,
        se,
        t,
        p,
        ci_lo: estimate - half,
        ci_hi: estimate + half,
        df,
        degenerate_se,
    }
}

/// Estimate, standard error, t statistic, two-sided p-value and 95% interval
/// for every coefficient under the fit's current covariance.
pub fn inference_table(fit: &FitResult) -> Vec<CoefRow> {
    (0..fit.k).map(|j| coef_row(fit, j, 0.95)).collect()
}
