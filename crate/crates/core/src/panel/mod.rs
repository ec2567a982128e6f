//! Tweet-level observations, period/cohort assignment and the validated
//! [`Panel`] every estimator consumes.

mod io;
mod scheme;

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};

pub use io::{load_panel, write_panel, LoadReport};
pub use scheme::{
    assign_period, cohort_of, Cohort, DateRange, PeriodAssignment, PeriodScheme, TreatmentSchedule, Zone,
};

/// One tweet.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub tweet_id: String,
    pub user_id: String,
    /// Cluster key for robust inference.
    pub municipality: String,
    pub date: NaiveDate,
    pub zone: Zone,
    pub outcomes: BTreeMap<String, u8>,
    pub topic_flags: BTreeMap<String, u8>,
    /// Distance to the outbreak epicenter, used by the spillover-ring model.
    pub distance_km: Option<f64>,
    pub text: Option<String>,
}

/// Row that was not admitted into a panel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RejectedRow {
    pub row: usize,
    pub tweet_id: String,
    pub date: NaiveDate,
}

/// Bookkeeping produced while building a panel.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BuildReport {
    pub input_rows: usize,
    pub retained: usize,
    /// Rows dropped per exclusion window, in scheme order.
    pub dropped_by_window: Vec<usize>,
    pub rejected_out_of_window: Vec<RejectedRow>,
}

impl BuildReport {
    pub fn dropped(&self) -> usize {
        self.dropped_by_window.iter().sum()
    }
}

/// Immutable, validated collection of observations stored column-wise.
///
/// Users and municipalities are interned into dense indices (sorted by name),
/// so `user(i)` and `municipality(i)` can be used directly as fixed-effect and
/// cluster keys.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    scheme: PeriodScheme,
    schedule: TreatmentSchedule,
    tweet_ids: Vec<String>,
    user_names: Vec<String>,
    users: Vec<u32>,
    municipality_names: Vec<String>,
    municipalities: Vec<u32>,
    dates: Vec<NaiveDate>,
    zones: Vec<Zone>,
    periods: Vec<u32>,
    cohorts: Vec<Cohort>,
    outcomes: BTreeMap<String, Vec<u8>>,
    topics: BTreeMap<String, Vec<u8>>,
    distance_km: Option<Vec<Option<f64>>>,
    text: Option<Vec<Option<String>>>,
}

fn check_binary(kind: &str, tweet: &str, values: &BTreeMap<String, u8>) -> Result<()> {
    match values.iter().find(|(_, v)| **v > 1) {
        Some((k, v)) => Err(Error::Validation(format!("tweet {tweet}: {kind} {k} = {v} is not binary"))),
        None => Ok(()),
    }
}

struct Interner {
    ids: BTreeMap<String, u32>,
}

impl Interner {
    fn new<'a>(names: impl Iterator<Item = &'a str>) -> Self {
        let set: BTreeSet<&str> = names.collect();
        Self { ids: set.into_iter().enumerate().map(|(i, s)| (s.to_string(), i as u32)).collect() }
    }

    fn id(&self, name: &str) -> u32 {
        self.ids[name]
    }

    fn into_names(self) -> Vec<String> {
        self.ids.into_keys().collect()
    }
}

impl Panel {
    /// Builds a panel, assigning periods and cohorts. Rows inside exclusion
    /// windows are dropped and rows outside the study window are rejected;
    /// both are counted in the report. Duplicate tweet ids, non-binary values
    /// and inconsistent outcome sets are errors.
    pub fn from_observations(
        observations: Vec<Observation>,
        scheme: PeriodScheme,
        schedule: TreatmentSchedule,
    ) -> Result<(Panel, BuildReport)> {
        Self::build(observations.into_iter().enumerate().map(|(i, o)| (i + 1, o)), scheme, schedule)
    }

    pub(crate) fn build(
        rows: impl IntoIterator<Item = (usize, Observation)>,
        scheme: PeriodScheme,
        schedule: TreatmentSchedule,
    ) -> Result<(Panel, BuildReport)> {
        let mut report = BuildReport { dropped_by_window: vec![0; scheme.exclusions().len()], ..Default::default() };
        let mut kept: Vec<(Observation, u32, Cohort)> = Vec::new();
        let mut seen = BTreeSet::new();
        let mut outcome_keys: Option<Vec<String>> = None;
        let mut topic_keys: Option<Vec<String>> = None;
        let mut has_distance = false;
        let mut has_text = false;

        for (row, obs) in rows {
            report.input_rows += 1;
            if !seen.insert(obs.tweet_id.clone()) {
                return Err(Error::Validation(format!("row {row}: duplicate tweet_id {:?}", obs.tweet_id)));
            }
            check_binary("outcome", &obs.tweet_id, &obs.outcomes)?;
            check_binary("topic flag", &obs.tweet_id, &obs.topic_flags)?;
            let ok: Vec<String> = obs.outcomes.keys().cloned().collect();
            let tk: Vec<String> = obs.topic_flags.keys().cloned().collect();
            match (&outcome_keys, &topic_keys) {
                (Some(o), Some(t)) if *o != ok || *t != tk => {
                    return Err(Error::Validation(format!(
                        "row {row}: tweet {} carries a different set of outcome or topic columns",
                        obs.tweet_id
                    )))
                }
                (None, _) => {
                    outcome_keys = Some(ok);
                    topic_keys = Some(tk);
                }
                _ => {}
            }
            let cohort = schedule.cohort_of(obs.zone)?;
            match scheme.assign(obs.date) {
                PeriodAssignment::Period(t) => {
                    has_distance |= obs.distance_km.is_some();
                    has_text |= obs.text.is_some();
                    kept.push((obs, t, cohort));
                }
                PeriodAssignment::Excluded(w) => report.dropped_by_window[w] += 1,
                PeriodAssignment::OutsideWindow => report.rejected_out_of_window.push(RejectedRow {
                    row,
                    tweet_id: obs.tweet_id,
                    date: obs.date,
                }),
            }
        }
        report.retained = kept.len();

        let users = Interner::new(kept.iter().map(|(o, _, _)| o.user_id.as_str()));
        let munis = Interner::new(kept.iter().map(|(o, _, _)| o.municipality.as_str()));
        let n = kept.len();
        let mut panel = Panel {
            tweet_ids: Vec::with_capacity(n),
            users: Vec::with_capacity(n),
            municipalities: Vec::with_capacity(n),
            dates: Vec::with_capacity(n),
            zones: Vec::with_capacity(n),
            periods: Vec::with_capacity(n),
            cohorts: Vec::with_capacity(n),
            outcomes: outcome_keys.unwrap_or_default().into_iter().map(|k| (k, Vec::with_capacity(n))).collect(),
            topics: topic_keys.unwrap_or_default().into_iter().map(|k| (k, Vec::with_capacity(n))).collect(),
            distance_km: has_distance.then(|| Vec::with_capacity(n)),
            text: has_text.then(|| Vec::with_capacity(n)),
            user_names: Vec::new(),
            municipality_names: Vec::new(),
            scheme,
            schedule,
        };
        for (obs, t, cohort) in kept {
            panel.users.push(users.id(&obs.user_id));
            panel.municipalities.push(munis.id(&obs.municipality));
            panel.tweet_ids.push(obs.tweet_id);
            panel.dates.push(obs.date);
            panel.zones.push(obs.zone);
            panel.periods.push(t);
            panel.cohorts.push(cohort);
            for (k, v) in obs.outcomes {
                panel.outcomes.get_mut(&k).expect("outcome keys checked").push(v);
            }
            for (k, v) in obs.topic_flags {
                panel.topics.get_mut(&k).expect("topic keys checked").push(v);
            }
            if let Some(d) = panel.distance_km.as_mut() {
                d.push(obs.distance_km);
            }
            if let Some(x) = panel.text.as_mut() {
                x.push(obs.text);
            }
        }
        panel.user_names = users.into_names();
        panel.municipality_names = munis.into_names();
        Ok((panel, report))
    }

    pub fn len(&self) -> usize {
        self.tweet_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweet_ids.is_empty()
    }

    pub fn scheme(&self) -> &PeriodScheme {
        &self.scheme
    }

    pub fn schedule(&self) -> &TreatmentSchedule {
        &self.schedule
    }

    pub fn tweet_id(&self, i: usize) -> &str {
        &self.tweet_ids[i]
    }

    pub fn date(&self, i: usize) -> NaiveDate {
        self.dates[i]
    }

    pub fn zone(&self, i: usize) -> Zone {
        self.zones[i]
    }

    pub fn period(&self, i: usize) -> u32 {
        self.periods[i]
    }

    pub fn periods(&self) -> &[u32] {
        &self.periods
    }

    pub fn cohort(&self, i: usize) -> Cohort {
        self.cohorts[i]
    }

    pub fn cohorts(&self) -> &[Cohort] {
        &self.cohorts
    }

    /// `D_{ij,t} = 1[t >= g]` for row `i`.
    pub fn treated_now(&self, i: usize) -> bool {
        self.cohorts[i].treated_at(self.periods[i])
    }

    /// Earliest finite cohort present in the panel: the "treatment group" of
    /// the two-group regression.
    pub fn first_cohort(&self) -> Option<u32> {
        self.cohorts.iter().filter_map(|c| c.period()).min()
    }

    /// Latest finite cohort present in the panel.
    pub fn last_cohort(&self) -> Option<u32> {
        self.cohorts.iter().filter_map(|c| c.period()).max()
    }

    /// `D_ij`: row belongs to the earliest-treated cohort.
    pub fn in_treatment_group(&self, i: usize) -> bool {
        match self.first_cohort() {
            Some(g) => self.cohorts[i] == Cohort::FirstTreated(g),
            None => false,
        }
    }

    /// `D_ij` for every row.
    pub fn treatment_group(&self) -> Vec<bool> {
        let first = self.first_cohort();
        self.cohorts.iter().map(|c| first.is_some_and(|g| *c == Cohort::FirstTreated(g))).collect()
    }

    pub fn user(&self, i: usize) -> u32 {
        self.users[i]
    }

    pub fn users(&self) -> &[u32] {
        &self.users
    }

    pub fn user_name(&self, u: u32) -> &str {
        &self.user_names[u as usize]
    }

    pub fn n_users(&self) -> usize {
        self.user_names.len()
    }

    pub fn municipality(&self, i: usize) -> u32 {
        self.municipalities[i]
    }

    pub fn municipalities(&self) -> &[u32] {
        &self.municipalities
    }

    pub fn municipality_name(&self, m: u32) -> &str {
        &self.municipality_names[m as usize]
    }

    pub fn municipality_names(&self) -> &[String] {
        &self.municipality_names
    }

    pub fn n_municipalities(&self) -> usize {
        self.municipality_names.len()
    }

    pub fn outcome_names(&self) -> impl Iterator<Item = &str> {
        self.outcomes.keys().map(String::as_str)
    }

    pub fn topic_names(&self) -> impl Iterator<Item = &str> {
        self.topics.keys().map(String::as_str)
    }

    pub fn outcome(&self, name: &str) -> Result<&[u8]> {
        self.outcomes
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Specification(format!("outcome {name:?} is not in the panel")))
    }

    pub fn topic(&self, name: &str) -> Result<&[u8]> {
        self.topics
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Specification(format!("topic {name:?} is not in the panel")))
    }

    /// Resolves an outcome expression to a numeric series. `"uncertainty"`
    /// names an outcome column; `"uncertainty:health"` is the product of the
    /// outcome with the `health` topic flag.
    pub fn response(&self, expr: &str) -> Result<Vec<f64>> {
        match expr.split_once(':') {
            None => Ok(self.outcome(expr)?.iter().map(|&v| f64::from(v)).collect()),
            Some((outcome, topic)) => {
                let y = self.outcome(outcome)?;
                let f = self.topic(topic)?;
                Ok(y.iter().zip(f).map(|(&a, &b)| f64::from(a * b)).collect())
            }
        }
    }

    pub fn has_distance(&self) -> bool {
        self.distance_km.is_some()
    }

    pub fn distance_km(&self, i: usize) -> Option<f64> {
        self.distance_km.as_ref().and_then(|d| d[i])
    }

    pub fn has_text(&self) -> bool {
        self.text.is_some()
    }

    pub fn text(&self, i: usize) -> Option<&str> {
        self.text.as_ref().and_then(|t| t[i].as_deref())
    }

    pub fn observation(&self, i: usize) -> Observation {
        Observation {
            tweet_id: self.tweet_ids[i].clone(),
            user_id: self.user_names[self.users[i] as usize].clone(),
            municipality: self.municipality_names[self.municipalities[i] as usize].clone(),
            date: self.dates[i],
            zone: self.zones[i],
            outcomes: self.outcomes.iter().map(|(k, v)| (k.clone(), v[i])).collect(),
            topic_flags: self.topics.iter().map(|(k, v)| (k.clone(), v[i])).collect(),
            distance_km: self.distance_km(i),
            text: self.text(i).map(str::to_string),
        }
    }

    pub fn observations(&self) -> impl Iterator<Item = Observation> + '_ {
        (0..self.len()).map(|i| self.observation(i))
    }

    /// Rebuilds the panel from the rows selected by `keep`, re-interning users
    /// and municipalities.
    pub fn filter(&self, keep: impl Fn(usize) -> bool) -> Panel {
        let rows: Vec<_> = (0..self.len()).filter(|&i| keep(i)).map(|i| (i + 1, self.observation(i))).collect();
        Self::build(rows, self.scheme.clone(), self.schedule.clone()).expect("subset of a valid panel is valid").0
    }

    /// Re-derives periods under another scheme (rows excluded or outside its
    /// window are dropped and reported).
    pub fn with_scheme(&self, scheme: PeriodScheme) -> Result<(Panel, BuildReport)> {
        Self::build(self.rows(), scheme, self.schedule.clone())
    }

    /// Re-derives periods and cohorts together; cohort indices refer to the
    /// new scheme's periods.
    pub fn with_design(&self, scheme: PeriodScheme, schedule: TreatmentSchedule) -> Result<(Panel, BuildReport)> {
        Self::build(self.rows(), scheme, schedule)
    }

    pub fn with_schedule(&self, schedule: TreatmentSchedule) -> Result<Panel> {
        Ok(Self::build(self.rows(), self.scheme.clone(), schedule)?.0)
    }

    /// Reassigns zones by municipality name; rows whose municipality is not in
    /// `zones` are dropped.
    pub fn with_zones(&self, zones: &BTreeMap<String, Zone>) -> Result<Panel> {
        let rows = self.rows().filter_map(|(row, mut o)| {
            let z = *zones.get(&o.municipality)?;
            o.zone = z;
            Some((row, o))
        });
        Ok(Self::build(rows, self.scheme.clone(), self.schedule.clone())?.0)
    }

    /// Adds or replaces a topic flag column.
    pub fn with_topic(&self, name: &str, flags: Vec<u8>) -> Result<Panel> {
        self.with_column(name, flags, false)
    }

    /// Adds or replaces an outcome column.
    pub fn with_outcome(&self, name: &str, values: Vec<u8>) -> Result<Panel> {
        self.with_column(name, values, true)
    }

    fn with_column(&self, name: &str, values: Vec<u8>, outcome: bool) -> Result<Panel> {
        if values.len() != self.len() {
            return Err(Error::Validation(format!(
                "column {name:?} has {} values for {} rows",
                values.len(),
                self.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| **v > 1) {
            return Err(Error::Validation(format!("column {name:?} holds non-binary value {v}")));
        }
        let mut p = self.clone();
        if outcome {
            p.outcomes.insert(name.to_string(), values);
        } else {
            p.topics.insert(name.to_string(), values);
        }
        Ok(p)
    }

    fn rows(&self) -> impl Iterator<Item = (usize, Observation)> + '_ {
        (0..self.len()).map(|i| (i + 1, self.observation(i)))
    }
}
