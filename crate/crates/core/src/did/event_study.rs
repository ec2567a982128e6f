use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ols::{coef_row, fit_clustered_with_response, term_name, FeMode, FitResult, ModelSpec, Term};
use crate::panel::Panel;
use crate::stats::chi2_sf;

/// Position of a period relative to treatment onset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RelativePeriod {
    /// `l = -k`: `k` periods before the baseline.
    Lead(u32),
    Baseline,
    /// `l = k`: `k` periods after onset (`0` is the onset period).
    Lag(u32),
}

impl RelativePeriod {
    /// Signed index `l`; `None` for the baseline.
    pub fn index(self) -> Option<i64> {
        match self {
            RelativePeriod::Lead(k) => Some(-i64::from(k)),
            RelativePeriod::Baseline => None,
            RelativePeriod::Lag(k) => Some(i64::from(k)),
        }
    }
}

impl fmt::Display for RelativePeriod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index() {
            Some(l) => write!(f, "{l}"),
            None => f.write_str("base"),
        }
    }
}

impl Serialize for RelativePeriod {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EventCoef {
    pub relative: RelativePeriod,
    pub period: u32,
    pub label: String,
    pub estimate: f64,
    pub se: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub p: f64,
}

/// Joint Wald test that every lead coefficient is zero.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WaldTest {
    pub statistic: f64,
    pub df: usize,
    pub p: f64,
}

#[derive(Debug, Clone)]
pub struct EventStudyResult {
    pub baseline_label: String,
    /// Ordered by period; the baseline row is exactly zero.
    pub coefficients: Vec<EventCoef>,
    /// `None` without leads.
    pub pre_test: Option<WaldTest>,
    pub fit: FitResult,
}

impl EventStudyResult {
    pub fn leads(&self) -> impl Iterator<Item = &EventCoef> {
        self.coefficients.iter().filter(|c| matches!(c.relative, RelativePeriod::Lead(_)))
    }

    pub fn lags(&self) -> impl Iterator<Item = &EventCoef> {
        self.coefficients.iter().filter(|c| matches!(c.relative, RelativePeriod::Lag(_)))
    }

    pub fn get(&self, relative: RelativePeriod) -> Option<&EventCoef> {
        self.coefficients.iter().find(|c| c.relative == relative)
    }

    /// `(relative_period, estimate, lo95, hi95)` rows for plotting.
    pub fn plot_records(&self) -> Vec<(String, f64, f64, f64)> {
        self.coefficients.iter().map(|c| (c.relative.to_string(), c.estimate, c.ci_lo, c.ci_hi)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventStudySpec {
    /// Label of the omitted period; must be the last one before onset.
    pub baseline: String,
    pub leads: u32,
    pub lags: u32,
    pub fe: FeMode,
}

impl EventStudySpec {
    pub fn new(baseline: impl Into<String>, leads: u32, lags: u32) -> Self {
        Self { baseline: baseline.into(), leads, lags, fe: FeMode::Within }
    }

    pub fn with_fe(mut self, fe: FeMode) -> Self {
        self.fe = fe;
        self
    }
}

/// Leads-and-lags regression of the outcome on group-by-period
/// interactions, omitting the baseline period.
pub fn event_study(panel: &Panel, outcome: &str, spec: &EventStudySpec) -> Result<EventStudyResult> {
    event_study_y(panel, &panel.response(outcome)?, spec)
}

pub fn event_study_y(panel: &Panel, y: &[f64], spec: &EventStudySpec) -> Result<EventStudyResult> {
    let scheme = panel.scheme();
    let b = scheme
        .period_of_label(&spec.baseline)
        .ok_or_else(|| Error::Specification(format!("baseline period {:?} not in the scheme", spec.baseline)))?;
    let onset = panel.first_cohort().ok_or_else(|| Error::NotIdentified("no treated cohort in the panel".into()))?;
    if b + 1 != onset {
        return Err(Error::Specification(format!(
            "baseline {:?} is period {b} but treatment starts in period {onset}",
            spec.baseline
        )));
    }
    if spec.leads > b {
        return Err(Error::Specification(format!("{} leads requested, {b} pre-baseline periods exist", spec.leads)));
    }
    let last = onset + spec.lags;
    if last as usize >= scheme.n_periods() {
        return Err(Error::Specification(format!(
            "{} lags requested, {} periods from onset exist",
            spec.lags,
            scheme.n_periods() - onset as usize - 1
        )));
    }
    let first = b - spec.leads;
    let keep: Vec<usize> = (0..panel.len()).filter(|&i| (first..=last).contains(&panel.period(i))).collect();
    let sub = panel.filter(|i| keep.binary_search(&i).is_ok());
    let sub_y: Vec<f64> = keep.iter().map(|&i| y[i]).collect();

    let others: Vec<u32> = (first..=last).filter(|&t| t != b).collect();
    let mut terms = vec![Term::Intercept];
    if spec.fe == FeMode::None {
        terms.push(Term::TreatmentGroup);
    }
    terms.extend(others.iter().map(|&t| Term::Period(t)));
    terms.extend(others.iter().map(|&t| Term::GroupPeriod(t)));
    let model = ModelSpec::new("", terms, spec.fe).with_baseline(b);
    let fit = fit_clustered_with_response(&sub, &model, sub_y)?;

    let mut coefficients = Vec::new();
    let mut lead_idx = Vec::new();
    for t in first..=last {
        let label = scheme.label(t).unwrap_or_default().to_string();
        let relative = if t < b {
            RelativePeriod::Lead(b - t)
        } else if t == b {
            RelativePeriod::Baseline
        } else {
            RelativePeriod::Lag(t - onset)
        };
        if t == b {
            coefficients.push(EventCoef { relative, period: t, label, estimate: 0.0, se: 0.0, ci_lo: 0.0, ci_hi: 0.0, p: 1.0 });
            continue;
        }
        let name = term_name(&sub, &model, Term::GroupPeriod(t));
        let j = fit.index_of(&name).ok_or_else(|| Error::RankDeficient { columns: vec![name] })?;
        if t < b {
            lead_idx.push(j);
        }
        let row = coef_row(&fit, j, 0.95);
        coefficients.push(EventCoef {
            relative,
            period: t,
            label,
            estimate: row.estimate,
            se: row.se,
            ci_lo: row.ci_lo,
            ci_hi: row.ci_hi,
            p: row.p,
        });
    }
    let pre_test = (!lead_idx.is_empty()).then(|| wald(&fit, &lead_idx));
    Ok(EventStudyResult { baseline_label: spec.baseline.clone(), coefficients, pre_test, fit })
}

fn wald(fit: &FitResult, idx: &[usize]) -> WaldTest {
    let m = idx.len();
    let d = nalgebra::DVector::from_iterator(m, idx.iter().map(|&j| fit.coefficients[j]));
    let v = nalgebra::DMatrix::from_fn(m, m, |a, b| fit.vcov.matrix[(idx[a], idx[b])]);
    let statistic = match v.clone().cholesky() {
        Some(ch) => d.dot(&ch.solve(&d)),
        None => v.pseudo_inverse(1e-12).map(|vi| d.dot(&(vi * &d))).unwrap_or(f64::NAN),
    };
    WaldTest { statistic, df: m, p: chi2_sf(statistic, m as f64) }
}
