use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dgp::{generate_replicate, DgpConfig};
use crate::did::{
    att_gt, att_two_period, did_regression, event_study, spillover_rings, BootstrapOptions, Estimand,
    EventStudySpec, RelativePeriod,
};
use crate::error::{Error, Result};
use crate::ols::{FeMode, RingBand};
use crate::panel::Panel;

/// What each replicate estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Estimator {
    /// Closed-form two-period ATT.
    TwoPeriodAtt,
    /// `delta_1` of the three-period regression.
    Delta1 {
        #[serde(default)]
        fe: FeMode,
    },
    /// `ATT(g,t)` with a cluster bootstrap.
    AttGt { g: u32, t: u32, draws: usize },
    /// Joint Wald test of the leads; the "estimate" is the statistic.
    PreTrend {
        baseline: String,
        leads: u32,
        lags: u32,
        #[serde(default)]
        fe: FeMode,
    },
    /// Lead coefficient `delta_{-k}`.
    EventLead {
        baseline: String,
        leads: u32,
        lags: u32,
        k: u32,
        #[serde(default)]
        fe: FeMode,
    },
    /// `eta` for ring `ring` of the DGP.
    SpilloverEta {
        ring: usize,
        #[serde(default)]
        fe: FeMode,
    },
    /// `delta_1` of the regression with every DGP ring.
    SpilloverDelta1 {
        #[serde(default)]
        fe: FeMode,
    },
}

impl Estimator {
    /// Population value of the target under `cfg`; `None` for tests.
    pub fn truth(&self, cfg: &DgpConfig) -> Option<f64> {
        let g = cfg.first_cohort().unwrap_or(1);
        match self {
            Estimator::TwoPeriodAtt | Estimator::Delta1 { .. } | Estimator::SpilloverDelta1 { .. } => {
                Some(cfg.tau_at(g, g))
            }
            Estimator::AttGt { g, t, .. } => Some(cfg.tau_at(*g, *t)),
            Estimator::PreTrend { .. } => None,
            Estimator::EventLead { k, .. } => Some(-cfg.trend_slope * f64::from(*k) - cfg.anticipation),
            Estimator::SpilloverEta { ring, .. } => cfg.rings.get(*ring).map(|r| r.eta),
        }
    }

    fn rings(cfg: &DgpConfig) -> Result<Vec<RingBand>> {
        cfg.rings.iter().map(|r| RingBand::new(r.lo, r.hi)).collect()
    }

    fn run(&self, panel: &Panel, cfg: &DgpConfig, replicate: u64) -> Result<Replicate> {
        let y = cfg.outcome.as_str();
        let from = |e: &crate::did::AttEstimate| Replicate {
            replicate,
            estimate: e.estimate,
            se: e.se,
            ci_lo: e.ci_lo,
            ci_hi: e.ci_hi,
            p: e.p,
        };
        match self {
            Estimator::TwoPeriodAtt => Ok(from(&att_two_period(panel, y)?)),
            Estimator::Delta1 { fe } => {
                let r = did_regression(panel, y, *fe)?;
                Ok(from(r.get(Estimand::Delta { t: 1 }).expect("delta_1 is always reported")))
            }
            Estimator::AttGt { g, t, draws } => {
                let o = BootstrapOptions { draws: *draws, seed: cfg.seed ^ replicate, level: 0.95 };
                Ok(from(&att_gt(panel, y, *g, *t, o)?))
            }
            Estimator::PreTrend { baseline, leads, lags, fe } => {
                let es = event_study(panel, y, &EventStudySpec::new(baseline.clone(), *leads, *lags).with_fe(*fe))?;
                let w = es.pre_test.ok_or_else(|| Error::Argument("pre-trend test needs at least one lead".into()))?;
                Ok(Replicate { replicate, estimate: w.statistic, se: f64::NAN, ci_lo: f64::NAN, ci_hi: f64::NAN, p: w.p })
            }
            Estimator::EventLead { baseline, leads, lags, k, fe } => {
                let es = event_study(panel, y, &EventStudySpec::new(baseline.clone(), *leads, *lags).with_fe(*fe))?;
                let c = es
                    .get(RelativePeriod::Lead(*k))
                    .ok_or_else(|| Error::Argument(format!("no lead {k} in the event study")))?;
                Ok(Replicate { replicate, estimate: c.estimate, se: c.se, ci_lo: c.ci_lo, ci_hi: c.ci_hi, p: c.p })
            }
            Estimator::SpilloverEta { ring, fe } => {
                let bands = Self::rings(cfg)?;
                let band = bands.get(*ring).ok_or_else(|| Error::Argument(format!("DGP has no ring {ring}")))?;
                let r = spillover_rings(panel, y, &bands, *fe)?;
                let e = r
                    .estimates
                    .iter()
                    .find(|e| e.estimand == Estimand::Eta { ring: band.to_string() })
                    .ok_or_else(|| Error::RankDeficient { columns: vec![format!("ring{band}")] })?;
                Ok(from(e))
            }
            Estimator::SpilloverDelta1 { fe } => {
                let r = spillover_rings(panel, y, &Self::rings(cfg)?, *fe)?;
                Ok(from(&r.estimates[0]))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Replicate {
    pub replicate: u64,
    pub estimate: f64,
    pub se: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub replicate: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary {
    pub estimator: Estimator,
    pub truth: Option<f64>,
    pub reps: usize,
    pub completed: usize,
    pub mean: f64,
    pub bias: Option<f64>,
    /// SD of the estimates across replicates.
    pub sd: f64,
    /// `sd / sqrt(completed)`.
    pub mc_se: f64,
    /// Share of 95% intervals covering the truth.
    pub coverage: Option<f64>,
    /// Share of replicates with `p < 0.05`.
    pub rejection_rate: f64,
    pub failures: Vec<Failure>,
    pub replicates: Vec<Replicate>,
}

/// Runs `estimator` on `reps` independent panels (replicate `r` uses
/// stream `r`) and summarises in replicate order.
pub fn monte_carlo(cfg: &DgpConfig, estimator: &Estimator, reps: usize) -> Result<McSummary> {
    if reps < 2 {
        return Err(Error::Argument(format!("monte carlo needs at least 2 replicates, got {reps}")));
    }
    cfg.validate()?;
    let results: Vec<std::result::Result<Replicate, Failure>> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            generate_replicate(cfg, r)
                .and_then(|(panel, _)| estimator.run(&panel, cfg, r))
                .map_err(|e| Failure { replicate: r, error: e.to_string() })
        })
        .collect();
    let mut replicates = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(v) => replicates.push(v),
            Err(f) => failures.push(f),
        }
    }
    let truth = estimator.truth(cfg);
    let est: Vec<f64> = replicates.iter().map(|r| r.estimate).collect();
    let n = est.len();
    let mean = crate::stats::mean(&est);
    let sd = if n >= 2 { crate::stats::sample_variance(&est).sqrt() } else { f64::NAN };
    let share = |f: &dyn Fn(&Replicate) -> bool| replicates.iter().filter(|r| f(r)).count() as f64 / n as f64;
    let coverage = match (truth, estimator) {
        (_, Estimator::PreTrend { .. }) | (None, _) => None,
        (Some(v), _) => Some(share(&|r| r.ci_lo <= v && v <= r.ci_hi)),
    };
    Ok(McSummary {
        estimator: estimator.clone(),
        truth,
        reps,
        completed: n,
        mean,
        bias: truth.map(|v| mean - v),
        sd,
        mc_se: sd / (n as f64).sqrt(),
        coverage,
        rejection_rate: share(&|r| r.p < 0.05),
        failures,
        replicates,
    })
}
