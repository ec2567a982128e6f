use serde::Serialize;

use super::{AttEstimate, Estimand};
use crate::error::{Error, Result};
use crate::ols::{
    fit_clustered_with_response, inference_table, term_name, CoefRow, FeMode, FitResult, ModelSpec, RingBand, Term,
};
use crate::panel::Panel;

#[derive(Debug, Clone)]
pub struct DidRegression {
    /// `delta_1`, `delta_2`, `lambda_1`, `lambda_2` and the constant.
    pub estimates: Vec<AttEstimate>,
    pub table: Vec<CoefRow>,
    pub fit: FitResult,
}

impl DidRegression {
    pub fn get(&self, estimand: Estimand) -> Option<&AttEstimate> {
        self.estimates.iter().find(|e| e.estimand == estimand)
    }
}

const DELTA2_NOTE: &str = "contrasts two treated cohorts; descriptive, not an ATT";

fn group_counts(panel: &Panel) -> (usize, usize) {
    let nt = panel.treatment_group().iter().filter(|d| **d).count();
    (nt, panel.len() - nt)
}

fn estimate_from_row(row: &CoefRow, estimand: Estimand, counts: (usize, usize)) -> AttEstimate {
    AttEstimate {
        estimand,
        label: row.term.clone(),
        estimate: row.estimate,
        se: row.se,
        ci_lo: row.ci_lo,
        ci_hi: row.ci_hi,
        p: row.p,
        n_treated: counts.0,
        n_control: counts.1,
        descriptive: false,
        note: None,
    }
}

fn check_three_periods(panel: &Panel) -> Result<()> {
    let periods = panel.periods();
    if let Some(t) = periods.iter().find(|t| **t > 2) {
        return Err(Error::Specification(format!("three-period regression got rows in period {t}")));
    }
    for t in 0..3 {
        if !periods.contains(&t) {
            return Err(Error::Specification(format!("three-period regression has no rows in period {t}")));
        }
    }
    Ok(())
}

fn regression_estimates(panel: &Panel, spec: &ModelSpec, fit: &FitResult, table: &[CoefRow]) -> Result<Vec<AttEstimate>> {
    let counts = group_counts(panel);
    let mut out = Vec::new();
    for (term, estimand) in [
        (Term::GroupPeriod(1), Estimand::Delta { t: 1 }),
        (Term::GroupPeriod(2), Estimand::Delta { t: 2 }),
        (Term::Period(1), Estimand::Lambda { t: 1 }),
        (Term::Period(2), Estimand::Lambda { t: 2 }),
        (Term::Intercept, Estimand::Constant),
    ] {
        let name = term_name(panel, spec, term);
        let Some(j) = fit.index_of(&name) else {
            if term == Term::GroupPeriod(1) {
                return Err(Error::RankDeficient { columns: vec![name] });
            }
            continue;
        };
        let mut e = estimate_from_row(&table[j], estimand, counts);
        if term == Term::GroupPeriod(2) {
            e.descriptive = true;
            e.note = Some(DELTA2_NOTE.into());
        }
        out.push(e);
    }
    Ok(out)
}

/// Three-period DiD regression with municipality-clustered errors.
pub fn did_regression(panel: &Panel, outcome: &str, fe: FeMode) -> Result<DidRegression> {
    did_regression_y(panel, panel.response(outcome)?, fe)
}

pub fn did_regression_y(panel: &Panel, y: Vec<f64>, fe: FeMode) -> Result<DidRegression> {
    check_three_periods(panel)?;
    let spec = ModelSpec::did("", fe);
    let fit = fit_clustered_with_response(panel, &spec, y)?;
    let table = inference_table(&fit);
    let estimates = regression_estimates(panel, &spec, &fit, &table)?;
    Ok(DidRegression { estimates, table, fit })
}

/// Spillover-adjusted decomposition of the first-period contrast.
#[derive(Debug, Clone, Serialize)]
pub struct SpilloverDecomposition {
    /// `delta_1` of the regression without ring terms.
    pub naive_delta1: f64,
    /// `delta_1` with ring terms.
    pub delta1: f64,
    /// Average spillover on treated units; not estimable here and set to 0.
    pub spill_treated: f64,
    /// `sum_k eta_k w_k`, `w_k` the share of first-period control tweets in ring `k`.
    pub spill_control: f64,
    /// `delta1 + spill_treated - spill_control`.
    pub total: f64,
}

#[derive(Debug, Clone)]
pub struct SpilloverResult {
    /// `delta_1`, `delta_2`, then one `eta` per retained ring.
    pub estimates: Vec<AttEstimate>,
    /// Ring columns removed as empty or collinear.
    pub dropped: Vec<String>,
    pub warnings: Vec<String>,
    pub decomposition: SpilloverDecomposition,
    pub fit: FitResult,
}

/// Three-period regression augmented with post-onset ring indicators for
/// control units.
pub fn spillover_rings(panel: &Panel, outcome: &str, rings: &[RingBand], fe: FeMode) -> Result<SpilloverResult> {
    spillover_rings_y(panel, panel.response(outcome)?, rings, fe)
}

pub fn spillover_rings_y(panel: &Panel, y: Vec<f64>, rings: &[RingBand], fe: FeMode) -> Result<SpilloverResult> {
    if !panel.has_distance() {
        return Err(Error::Config("spillover rings need a distance_km column".into()));
    }
    if rings.is_empty() {
        return Err(Error::Config("no ring bands given".into()));
    }
    check_three_periods(panel)?;
    let naive = did_regression_y(panel, y.clone(), fe)?;

    let mut spec = ModelSpec::did("", fe).with_rings(rings.to_vec());
    spec.terms.extend((0..rings.len()).map(Term::Ring));
    let fit = fit_clustered_with_response(panel, &spec, y)?;
    let table = inference_table(&fit);
    let counts = group_counts(panel);
    let mut estimates: Vec<AttEstimate> = regression_estimates(panel, &spec, &fit, &table)?
        .into_iter()
        .filter(|e| matches!(e.estimand, Estimand::Delta { .. }))
        .collect();

    let group = panel.treatment_group();
    let control_t1: Vec<usize> = (0..panel.len()).filter(|&i| !group[i] && panel.period(i) == 1).collect();
    let mut spill_control = 0.0;
    let mut warnings = Vec::new();
    for (k, band) in rings.iter().enumerate() {
        let name = term_name(panel, &spec, Term::Ring(k));
        match fit.index_of(&name) {
            Some(j) => {
                let mut e = estimate_from_row(&table[j], Estimand::Eta { ring: band.to_string() }, counts);
                let inside =
                    control_t1.iter().filter(|&&i| panel.distance_km(i).is_some_and(|d| band.contains(d))).count();
                if !control_t1.is_empty() {
                    spill_control += e.estimate * inside as f64 / control_t1.len() as f64;
                }
                e.note = Some(format!("{inside} first-period control tweets in ring"));
                estimates.push(e);
            }
            None => warnings.push(format!("{name} dropped: empty or collinear with earlier regressors")),
        }
    }
    let delta1 = estimates[0].estimate;
    let naive_delta1 = naive.estimates[0].estimate;
    Ok(SpilloverResult {
        estimates,
        dropped: fit.dropped.clone(),
        warnings,
        decomposition: SpilloverDecomposition {
            naive_delta1,
            delta1,
            spill_treated: 0.0,
            spill_control,
            total: delta1 - spill_control,
        },
        fit,
    })
}
