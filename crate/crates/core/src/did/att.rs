use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cells::{GtCells, MeanMode};
use super::{AttEstimate, Estimand};
use crate::error::{Error, Result};
use crate::ols::{coef_row, fit_clustered_with_response, term_name, FeMode, ModelSpec, Term};
use crate::panel::{Cohort, Panel};
use crate::stats::{normal_two_sided_p, sample_variance, t_critical, t_two_sided_p};

/// Cluster-bootstrap settings for [`att_gt`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BootstrapOptions {
    pub draws: usize,
    pub seed: u64,
    pub level: f64,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        Self { draws: 999, seed: 0, level: 0.95 }
    }
}

/// Two-period ATT from group-period means, with the standard error of the
/// matching two-period regression clustered by municipality.
pub fn att_two_period(panel: &Panel, outcome: &str) -> Result<AttEstimate> {
    att_two_period_y(panel, &panel.response(outcome)?, MeanMode::Tweet)
}

pub fn att_two_period_y(panel: &Panel, y: &[f64], mode: MeanMode) -> Result<AttEstimate> {
    let cells = GtCells::gather(panel, y, mode, 1, 1)?;
    let estimate = cells.estimate();

    let keep: Vec<usize> = (0..panel.len())
        .filter(|&i| panel.period(i) <= 1 && panel.cohort(i) != Cohort::FirstTreated(0))
        .collect();
    let sub = panel.filter(|i| keep.binary_search(&i).is_ok());
    let sub_y: Vec<f64> = keep.iter().map(|&i| y[i]).collect();
    let spec = ModelSpec::new(
        "",
        vec![Term::Intercept, Term::TreatmentGroup, Term::Period(1), Term::GroupPeriod(1)],
        FeMode::None,
    )
    .with_baseline(0);
    let fit = fit_clustered_with_response(&sub, &spec, sub_y)?;
    let name = term_name(&sub, &spec, Term::GroupPeriod(1));
    let j = fit.index_of(&name).ok_or_else(|| Error::RankDeficient { columns: vec![name] })?;
    let row = coef_row(&fit, j, 0.95);
    let half = if row.se > 0.0 { t_critical(0.95, row.df as f64) * row.se } else { 0.0 };
    Ok(AttEstimate {
        estimand: Estimand::Att1,
        label: "ATT(1)".into(),
        estimate,
        se: row.se,
        ci_lo: estimate - half,
        ci_hi: estimate + half,
        p: if row.se > 0.0 { t_two_sided_p(estimate / row.se, row.df as f64) } else { f64::from(estimate == 0.0) },
        n_treated: cells.n_treated(),
        n_control: cells.n_control(),
        descriptive: false,
        note: None,
    })
}

/// `ATT(g,t)` against units not yet treated at `t`, with a municipality
/// cluster bootstrap (percentile interval).
pub fn att_gt(panel: &Panel, outcome: &str, g: u32, t: u32, opts: BootstrapOptions) -> Result<AttEstimate> {
    att_gt_y(panel, &panel.response(outcome)?, MeanMode::Tweet, g, t, opts)
}

pub fn att_gt_y(
    panel: &Panel,
    y: &[f64],
    mode: MeanMode,
    g: u32,
    t: u32,
    opts: BootstrapOptions,
) -> Result<AttEstimate> {
    if !(opts.level > 0.0 && opts.level < 1.0) {
        return Err(Error::Argument(format!("confidence level {} outside (0,1)", opts.level)));
    }
    if opts.draws < 2 {
        return Err(Error::Argument("bootstrap needs at least 2 draws".into()));
    }
    let cells = GtCells::gather(panel, y, mode, g, t)?;
    let estimate = cells.estimate();
    let draws = bootstrap_draws(&cells, opts);
    let valid: Vec<f64> = draws.iter().flatten().copied().collect();
    if valid.len() < 2 {
        return Err(Error::NotIdentified(format!(
            "ATT({g},{t}): only {} of {} bootstrap draws had every cell populated",
            valid.len(),
            opts.draws
        )));
    }
    let se = sample_variance(&valid).sqrt();
    let mut sorted = valid.clone();
    sorted.sort_by(f64::total_cmp);
    let alpha = 1.0 - opts.level;
    let failed = opts.draws - valid.len();
    Ok(AttEstimate {
        estimand: Estimand::AttGt { g, t },
        label: format!("ATT({g},{t})"),
        estimate,
        se,
        ci_lo: quantile(&sorted, alpha / 2.0),
        ci_hi: quantile(&sorted, 1.0 - alpha / 2.0),
        p: if se > 0.0 { normal_two_sided_p(estimate / se) } else { f64::from(estimate == 0.0) },
        n_treated: cells.n_treated(),
        n_control: cells.n_control(),
        descriptive: false,
        note: (failed > 0).then(|| format!("{failed} bootstrap draws skipped for empty cells")),
    })
}

/// One estimate per draw (`None` when a resample leaves a cell empty).
/// Draw `b` uses stream `b` of a ChaCha20 generator keyed by the seed.
fn bootstrap_draws(cells: &GtCells, opts: BootstrapOptions) -> Vec<Option<f64>> {
    let (_, totals) = cells.cluster_totals();
    let n = totals.len();
    (0..opts.draws)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
            rng.set_stream(b as u64);
            let mut acc = [(0.0, 0usize); 4];
            for _ in 0..n {
                let c = &totals[rng.random_range(0..n)];
                for k in 0..4 {
                    acc[k].0 += c[k].0;
                    acc[k].1 += c[k].1;
                }
            }
            if acc.iter().any(|(_, c)| *c == 0) {
                return None;
            }
            let m = acc.map(|(s, c)| s / c as f64);
            Some((m[0] - m[1]) - (m[2] - m[3]))
        })
        .collect()
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
