use std::collections::BTreeMap;

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::{Cohort, Observation, Panel, PeriodAssignment, PeriodScheme, TreatmentSchedule, Zone};

/// Name of the generator recorded in output metadata.
pub const RNG_ALGORITHM: &str = "ChaCha20";

/// Share of clamped user-period probabilities above which a configuration
/// is rejected.
pub const CLAMP_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellEffect {
    pub g: u32,
    pub t: u32,
    pub tau: f64,
}

/// Control users placed in `(lo, hi]` km receive `eta` after onset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingEffect {
    pub lo: f64,
    pub hi: f64,
    pub eta: f64,
    /// Fraction of control users located in the ring.
    pub share: f64,
}

/// Linear-probability data-generating process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DgpConfig {
    pub seed: u64,
    pub outcome: String,
    pub users_per_group: BTreeMap<Zone, usize>,
    pub municipalities_per_group: usize,
    pub tweets_per_user_per_period: usize,
    pub scheme: PeriodScheme,
    pub schedule: TreatmentSchedule,
    /// `p0` by zone.
    pub baseline_p: BTreeMap<Zone, f64>,
    /// `lambda_t`, one per period (empty means none).
    pub period_shocks: Vec<f64>,
    /// Effect on every treated cell unless overridden in `tau_gt`.
    pub tau: f64,
    pub tau_gt: Vec<CellEffect>,
    /// Extra drift per period for the earliest cohort.
    pub trend_slope: f64,
    /// Shift for each cohort in the period before its onset.
    pub anticipation: f64,
    pub rings: Vec<RingEffect>,
    /// SD of municipality random effects.
    pub cluster_sd: f64,
}

impl Default for DgpConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            outcome: "y".into(),
            users_per_group: BTreeMap::from([(Zone::Red, 500), (Zone::Orange, 500)]),
            municipalities_per_group: 50,
            tweets_per_user_per_period: 2,
            scheme: PeriodScheme::lockdown_default(),
            schedule: TreatmentSchedule::lockdown_default(),
            baseline_p: BTreeMap::from([(Zone::Red, 0.3), (Zone::Orange, 0.3)]),
            period_shocks: Vec::new(),
            tau: 0.0,
            tau_gt: Vec::new(),
            trend_slope: 0.0,
            anticipation: 0.0,
            rings: Vec::new(),
            cluster_sd: 0.02,
        }
    }
}

impl DgpConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.users_per_group.values().all(|n| *n == 0) {
            return bad("no users".into());
        }
        if self.municipalities_per_group == 0 || self.tweets_per_user_per_period == 0 {
            return bad("municipalities_per_group and tweets_per_user_per_period must be positive".into());
        }
        for zone in self.users_per_group.keys() {
            self.schedule.cohort_of(*zone)?;
            match self.baseline_p.get(zone) {
                Some(p) if (0.0..=1.0).contains(p) => {}
                Some(p) => return bad(format!("baseline_p for {zone} is {p}")),
                None => return bad(format!("no baseline_p for {zone}")),
            }
        }
        let n = self.scheme.n_periods();
        if !self.period_shocks.is_empty() && self.period_shocks.len() != n {
            return bad(format!("{} period shocks for {n} periods", self.period_shocks.len()));
        }
        if !(self.cluster_sd >= 0.0 && self.cluster_sd.is_finite()) {
            return bad(format!("cluster_sd {}", self.cluster_sd));
        }
        let mut share = 0.0;
        for (i, r) in self.rings.iter().enumerate() {
            crate::ols::RingBand::new(r.lo, r.hi)?;
            if !(0.0..=1.0).contains(&r.share) {
                return bad(format!("ring share {}", r.share));
            }
            share += r.share;
            if self.rings[i + 1..].iter().any(|o| r.lo < o.hi && o.lo < r.hi) {
                return bad("ring bands overlap".into());
            }
        }
        if share > 1.0 + 1e-12 {
            return bad(format!("ring shares sum to {share}"));
        }
        Ok(())
    }

    /// Injected effect on cohort `g` at period `t` (zero before onset).
    pub fn tau_at(&self, g: u32, t: u32) -> f64 {
        if t < g {
            return 0.0;
        }
        self.tau_gt.iter().find(|e| e.g == g && e.t == t).map_or(self.tau, |e| e.tau)
    }

    /// Earliest cohort among the configured zones.
    pub fn first_cohort(&self) -> Option<u32> {
        self.users_per_group
            .iter()
            .filter(|(_, n)| **n > 0)
            .filter_map(|(z, _)| self.schedule.cohort_of(*z).ok()?.period())
            .min()
    }

    pub fn expected_rows(&self) -> usize {
        self.users_per_group.values().sum::<usize>() * self.scheme.n_periods() * self.tweets_per_user_per_period
    }
}

/// Everything needed to score an estimate against the truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub config: DgpConfig,
    pub rng: String,
    pub stream: u64,
    pub rows: usize,
    pub clamped_cells: usize,
    pub total_cells: usize,
}

fn period_dates(scheme: &PeriodScheme) -> Vec<Vec<NaiveDate>> {
    let mut out = vec![Vec::new(); scheme.n_periods()];
    let w = scheme.window();
    for d in w.start().iter_days().take_while(|d| *d <= w.end()) {
        if let PeriodAssignment::Period(t) = scheme.assign(d) {
            out[t as usize].push(d);
        }
    }
    out
}

/// Panel from the replicate-0 stream.
pub fn generate_panel(cfg: &DgpConfig) -> Result<(Panel, GroundTruth)> {
    generate_replicate(cfg, 0)
}

/// Panel for replicate `r`: stream `r` of a ChaCha20 generator keyed by the
/// config seed, so a replicate never depends on how many others are drawn.
pub fn generate_replicate(cfg: &DgpConfig, r: u64) -> Result<(Panel, GroundTruth)> {
    cfg.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    rng.set_stream(r);
    let dates = period_dates(&cfg.scheme);
    if let Some(t) = dates.iter().position(Vec::is_empty) {
        return Err(Error::Config(format!("period {t} has no admissible dates")));
    }
    let first = cfg.first_cohort();
    let n_periods = cfg.scheme.n_periods() as u32;
    let normal = Normal::new(0.0, cfg.cluster_sd).map_err(|e| Error::Config(e.to_string()))?;
    let outer = cfg.rings.iter().map(|r| r.hi).fold(20.0, f64::max);

    let mut obs = Vec::with_capacity(cfg.expected_rows());
    let (mut clamped, mut cells) = (0usize, 0usize);
    for (&zone, &n_users) in &cfg.users_per_group {
        let cohort = cfg.schedule.cohort_of(zone)?;
        let in_d = first.is_some() && cohort.period() == first;
        let effects: Vec<f64> = (0..cfg.municipalities_per_group).map(|_| normal.sample(&mut rng)).collect();
        for u in 0..n_users {
            let m = u % cfg.municipalities_per_group;
            let (dist, eta) = if in_d {
                (rng.random_range(0.0..10.0), 0.0)
            } else {
                let draw: f64 = rng.random();
                let mut acc = 0.0;
                let mut placed = None;
                for ring in &cfg.rings {
                    acc += ring.share;
                    if draw < acc {
                        placed = Some(ring);
                        break;
                    }
                }
                match placed {
                    Some(ring) => (ring.hi - rng.random::<f64>() * (ring.hi - ring.lo), ring.eta),
                    None => (outer + rng.random_range(5.0..50.0), 0.0),
                }
            };
            let user = format!("{}{u:05}", zone.as_str());
            let muni = format!("{}-m{m:03}", zone.as_str());
            for t in 0..n_periods {
                let mut p = cfg.baseline_p[&zone] + cfg.period_shocks.get(t as usize).copied().unwrap_or(0.0)
                    + effects[m];
                if let Cohort::FirstTreated(g) = cohort {
                    p += cfg.tau_at(g, t);
                    if t + 1 == g {
                        p += cfg.anticipation;
                    }
                }
                if in_d {
                    p += cfg.trend_slope * f64::from(t);
                }
                if !in_d && first.is_some_and(|g| t >= g) {
                    p += eta;
                }
                cells += 1;
                if !(0.01..=0.99).contains(&p) {
                    clamped += 1;
                    p = p.clamp(0.01, 0.99);
                }
                let ds = &dates[t as usize];
                for k in 0..cfg.tweets_per_user_per_period {
                    let y = u8::from(rng.random::<f64>() < p);
                    obs.push(Observation {
                        tweet_id: format!("s{:07}", obs.len()),
                        user_id: user.clone(),
                        municipality: muni.clone(),
                        date: ds[(u + k) % ds.len()],
                        zone,
                        outcomes: BTreeMap::from([(cfg.outcome.clone(), y)]),
                        topic_flags: BTreeMap::new(),
                        distance_km: Some(dist),
                        text: None,
                    });
                }
            }
        }
    }
    if clamped as f64 > CLAMP_TOLERANCE * cells as f64 {
        return Err(Error::Config(format!(
            "{clamped} of {cells} user-period probabilities fell outside [0.01, 0.99]"
        )));
    }
    let rows = obs.len();
    let (panel, _) = Panel::from_observations(obs, cfg.scheme.clone(), cfg.schedule.clone())?;
    let truth = GroundTruth {
        config: cfg.clone(),
        rng: RNG_ALGORITHM.into(),
        stream: r,
        rows,
        clamped_cells: clamped,
        total_cells: cells,
    };
    Ok((panel, truth))
}
