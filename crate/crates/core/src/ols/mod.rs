//! Least squares with fixed effects and classical, HC1 and cluster-robust
//! covariance.

mod design;
mod fit;
mod inference;
mod qr;

pub use design::{build_design, build_design_with_response, term_name, Design, FeMode, ModelSpec, RingBand, Term};
pub use fit::{
    cluster_meat, fit_design, fit_ols, vcov_classical, vcov_cluster, vcov_white, white_meat, FitResult, Vcov, VcovKind,
};
pub use inference::{coef_row, inference_df, inference_table, CoefRow};
pub use qr::COLLINEARITY_TOL;

use crate::error::Result;
use crate::panel::Panel;

/// Builds, fits and attaches municipality-clustered covariance.
pub fn fit_clustered(panel: &Panel, spec: &ModelSpec) -> Result<FitResult> {
    let design = build_design(panel, spec)?;
    fit_design_clustered(&design)
}

/// [`fit_clustered`] for an explicit response vector.
pub fn fit_clustered_with_response(panel: &Panel, spec: &ModelSpec, y: Vec<f64>) -> Result<FitResult> {
    let design = build_design_with_response(panel, spec, y)?;
    fit_design_clustered(&design)
}

fn fit_design_clustered(design: &Design) -> Result<FitResult> {
    let fit = fit_design(design)?;
    let v = vcov_cluster(&fit, &design.clusters)?;
    Ok(fit.with_vcov(v))
}
