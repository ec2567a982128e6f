//! Difference-in-differences estimators: closed-form two-period ATT, the
//! three-period regression, group-time ATTs, leads/lags event studies and
//! spillover rings.

mod att;
mod cells;
mod event_study;
mod regression;

pub use att::{att_gt, att_gt_y, att_two_period, att_two_period_y, BootstrapOptions};
pub use cells::MeanMode;
pub use event_study::{event_study, event_study_y, EventCoef, EventStudyResult, EventStudySpec, RelativePeriod, WaldTest};
pub use regression::{
    did_regression, did_regression_y, spillover_rings, spillover_rings_y, DidRegression, SpilloverDecomposition,
    SpilloverResult,
};

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Estimand {
    Att1,
    AttGt { g: u32, t: u32 },
    Delta { t: u32 },
    Lambda { t: u32 },
    Constant,
    Eta { ring: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttEstimate {
    #[serde(flatten)]
    pub estimand: Estimand,
    pub label: String,
    pub estimate: f64,
    pub se: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub p: f64,
    /// Treated observations (tweets, or users under [`MeanMode::User`]).
    pub n_treated: usize,
    pub n_control: usize,
    /// Reported for completeness only; no causal reading.
    pub descriptive: bool,
    pub note: Option<String>,
}
