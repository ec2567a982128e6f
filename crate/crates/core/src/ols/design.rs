use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::qr::{GreedyQr, COLLINEARITY_TOL};
use crate::error::{Error, Result};
use crate::panel::Panel;

/// Distance band `(lo, hi]` in kilometres around the epicenter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingBand {
    pub lo: f64,
    pub hi: f64,
}

impl RingBand {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
            return Err(Error::Config(format!("invalid ring band ({lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, d: f64) -> bool {
        self.lo < d && d <= self.hi
    }
}

impl fmt::Display for RingBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{}]", self.lo, self.hi)
    }
}

/// Regressor in a DiD specification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    /// `alpha`
    Intercept,
    /// `lambda_t`: `1[T = t]`
    Period(u32),
    /// `gamma`: `D`
    TreatmentGroup,
    /// `delta_t`: `1[T = t] x D`
    GroupPeriod(u32),
    /// `eta_k`: control unit in ring `k` observed after treatment onset.
    Ring(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeMode {
    None,
    /// Explicit user indicator columns.
    Dummy,
    /// User demeaning (grand mean added back when an intercept is present).
    #[default]
    Within,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    /// Outcome expression, see [`Panel::response`].
    pub outcome: String,
    pub terms: Vec<Term>,
    pub fe: FeMode,
    /// Omitted reference period; no `Period`/`GroupPeriod` term may name it.
    pub baseline: Option<u32>,
    pub rings: Vec<RingBand>,
}

impl ModelSpec {
    pub fn new(outcome: impl Into<String>, terms: Vec<Term>, fe: FeMode) -> Self {
        Self { outcome: outcome.into(), terms, fe, baseline: None, rings: Vec::new() }
    }

    pub fn with_baseline(mut self, baseline: u32) -> Self {
        self.baseline = Some(baseline);
        self
    }

    pub fn with_rings(mut self, rings: Vec<RingBand>) -> Self {
        self.rings = rings;
        self
    }

    /// Three-period regression: intercept, `D` (absent under user fixed
    /// effects), `lambda_1`, `lambda_2`, `delta_1`, `delta_2`.
    pub fn did(outcome: impl Into<String>, fe: FeMode) -> Self {
        let mut terms = vec![Term::Intercept];
        if fe == FeMode::None {
            terms.push(Term::TreatmentGroup);
        }
        terms.extend([Term::Period(1), Term::Period(2), Term::GroupPeriod(1), Term::GroupPeriod(2)]);
        Self::new(outcome, terms, fe).with_baseline(0)
    }

    fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for t in &self.terms {
            if !seen.insert(*t) {
                return Err(Error::Specification(format!("duplicate term {t:?}")));
            }
            match (t, self.baseline) {
                (Term::Period(p) | Term::GroupPeriod(p), Some(b)) if *p == b => {
                    return Err(Error::Specification(format!("term {t:?} names the baseline period {b}")))
                }
                (Term::Ring(k), _) if *k >= self.rings.len() => {
                    return Err(Error::Specification(format!("ring term {k} has no band")))
                }
                _ => {}
            }
        }
        for (i, a) in self.rings.iter().enumerate() {
            for b in &self.rings[i + 1..] {
                if a.lo < b.hi && b.lo < a.hi {
                    return Err(Error::Specification(format!("ring bands {a} and {b} overlap")));
                }
            }
        }
        Ok(())
    }
}

/// Design matrix ready for [`super::fit_design`].
#[derive(Debug, Clone)]
pub struct Design {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub names: Vec<String>,
    /// Columns removed for collinearity, in declaration order.
    pub dropped: Vec<String>,
    /// Municipality of each row.
    pub clusters: Vec<u32>,
    /// Fixed-effect parameters swept out by demeaning.
    pub absorbed_dof: usize,
}

pub fn term_name(panel: &Panel, spec: &ModelSpec, term: Term) -> String {
    let label = |t: u32| panel.scheme().label(t).map(str::to_string).unwrap_or_else(|| t.to_string());
    match term {
        Term::Intercept => "constant".into(),
        Term::Period(t) => format!("period={}", label(t)),
        Term::TreatmentGroup => "treated".into(),
        Term::GroupPeriod(t) => format!("treated x period={}", label(t)),
        Term::Ring(k) => format!("ring{}", spec.rings[k]),
    }
}

/// Column for `term`. Ring dummies need distances and use the first cohort's
/// onset as "post".
fn term_column(panel: &Panel, spec: &ModelSpec, term: Term, group: &[bool]) -> Result<Vec<f64>> {
    let n = panel.len();
    let periods = panel.periods();
    let col = match term {
        Term::Intercept => vec![1.0; n],
        Term::Period(t) => periods.iter().map(|&p| f64::from(u8::from(p == t))).collect(),
        Term::TreatmentGroup => group.iter().map(|&d| f64::from(u8::from(d))).collect(),
        Term::GroupPeriod(t) => {
            (0..n).map(|i| f64::from(u8::from(group[i] && periods[i] == t))).collect()
        }
        Term::Ring(k) => {
            if !panel.has_distance() {
                return Err(Error::Config("ring terms need a distance_km column".into()));
            }
            let onset = panel.first_cohort().unwrap_or(u32::MAX);
            let band = spec.rings[k];
            (0..n)
                .map(|i| {
                    let inside = panel.distance_km(i).is_some_and(|d| band.contains(d));
                    f64::from(u8::from(!group[i] && periods[i] >= onset && inside))
                })
                .collect()
        }
    };
    Ok(col)
}

/// Subtracts user means from `v` (adding back the grand mean when
/// `keep_level`).
fn demean_by(v: &mut [f64], groups: &[u32], n_groups: usize, keep_level: bool) {
    let mut sum = vec![0.0; n_groups];
    let mut cnt = vec![0usize; n_groups];
    for (x, &g) in v.iter().zip(groups) {
        sum[g as usize] += x;
        cnt[g as usize] += 1;
    }
    let grand = if keep_level { v.iter().sum::<f64>() / v.len() as f64 } else { 0.0 };
    for (x, &g) in v.iter_mut().zip(groups) {
        *x = *x - sum[g as usize] / cnt[g as usize] as f64 + grand;
    }
}

/// Assembles `y` and `X` for `spec`, applies the fixed-effect treatment and
/// removes collinear columns (reported in [`Design::dropped`]).
pub fn build_design(panel: &Panel, spec: &ModelSpec) -> Result<Design> {
    let y = panel.response(&spec.outcome)?;
    build_design_with_response(panel, spec, y)
}

/// As [`build_design`] but regresses the supplied `y` (one value per row)
/// instead of `spec.outcome`.
pub fn build_design_with_response(panel: &Panel, spec: &ModelSpec, mut y: Vec<f64>) -> Result<Design> {
    if panel.is_empty() {
        return Err(Error::Specification("empty panel".into()));
    }
    if y.len() != panel.len() {
        return Err(Error::Argument(format!("response has {} values for {} rows", y.len(), panel.len())));
    }
    spec.validate()?;
    let group = panel.treatment_group();
    let n = panel.len();

    let mut names = Vec::new();
    let mut cols = Vec::new();
    let mut dropped = Vec::new();
    for &term in &spec.terms {
        let col = term_column(panel, spec, term, &group)?;
        let name = term_name(panel, spec, term);
        if col.iter().all(|v| *v == 0.0) {
            if matches!(term, Term::Ring(_)) {
                dropped.push(name);
                continue;
            }
            return Err(Error::Specification(format!("term {name} is identically zero in this sample")));
        }
        names.push(name);
        cols.push(col);
    }

    let has_intercept = spec.terms.contains(&Term::Intercept);
    let mut absorbed_dof = 0;
    match spec.fe {
        FeMode::None => {}
        FeMode::Dummy => {
            for u in 0..panel.n_users() as u32 {
                names.push(format!("user={}", panel.user_name(u)));
                cols.push(panel.users().iter().map(|&v| f64::from(u8::from(v == u))).collect());
            }
        }
        FeMode::Within => {
            let users = panel.users();
            let j = panel.n_users();
            demean_by(&mut y, users, j, has_intercept);
            for c in cols.iter_mut() {
                demean_by(c, users, j, has_intercept);
            }
            absorbed_dof = if has_intercept { j - 1 } else { j };
        }
    }

    let x = DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]);
    let qr = GreedyQr::factor(&x, COLLINEARITY_TOL);
    let x = if qr.dropped.is_empty() {
        x
    } else {
        for &j in &qr.dropped {
            dropped.push(names[j].clone());
        }
        names = qr.kept.iter().map(|&j| names[j].clone()).collect();
        x.select_columns(qr.kept.iter())
    };
    Ok(Design {
        x,
        y: DVector::from_vec(y),
        names,
        dropped,
        clusters: panel.municipalities().to_vec(),
        absorbed_dof,
    })
}
