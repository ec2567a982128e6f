use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid calendar date")
}

/// Closed calendar interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "[NaiveDate; 2]", try_from = "[NaiveDate; 2]")]
pub struct DateRange {
    start: NaiveDate,
    end: NaiveDate,
}

impl DateRange {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if start > end {
            return Err(Error::Config(format!("date range {start}..{end} is reversed")));
        }
        Ok(Self { start, end })
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    pub fn end(&self) -> NaiveDate {
        self.end
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }

    fn within(&self, other: &DateRange) -> bool {
        other.start <= self.start && self.end <= other.end
    }
}

impl From<DateRange> for [NaiveDate; 2] {
    fn from(r: DateRange) -> Self {
        [r.start, r.end]
    }
}

impl TryFrom<[NaiveDate; 2]> for DateRange {
    type Error = Error;
    fn try_from(v: [NaiveDate; 2]) -> Result<Self> {
        DateRange::new(v[0], v[1])
    }
}

impl fmt::Display for DateRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

/// Outcome of mapping a calendar date onto the period grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeriodAssignment {
    Period(u32),
    /// The date falls inside one of the exclusion windows (index into
    /// [`PeriodScheme::exclusions`]).
    Excluded(usize),
    OutsideWindow,
}

/// Partition of a study window into consecutive periods.
///
/// A cutoff date belongs to the period it opens: with cutoffs `{Feb 23, Mar 9}`
/// the date Feb 23 is in period 1 and Mar 9 in period 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScheme", into = "RawScheme")]
pub struct PeriodScheme {
    window: DateRange,
    cutoffs: Vec<NaiveDate>,
    exclusions: Vec<DateRange>,
    labels: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawScheme {
    window: DateRange,
    cutoffs: Vec<NaiveDate>,
    #[serde(default)]
    exclusions: Vec<DateRange>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    labels: Vec<String>,
}

impl TryFrom<RawScheme> for PeriodScheme {
    type Error = Error;
    fn try_from(raw: RawScheme) -> Result<Self> {
        let scheme = PeriodScheme::new(raw.window, raw.cutoffs, raw.exclusions)?;
        if raw.labels.is_empty() {
            Ok(scheme)
        } else {
            scheme.with_labels(raw.labels)
        }
    }
}

impl From<PeriodScheme> for RawScheme {
    fn from(s: PeriodScheme) -> Self {
        RawScheme { window: s.window, cutoffs: s.cutoffs, exclusions: s.exclusions, labels: s.labels }
    }
}

impl PeriodScheme {
    pub fn new(window: DateRange, cutoffs: Vec<NaiveDate>, exclusions: Vec<DateRange>) -> Result<Self> {
        if cutoffs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("period cutoffs must be strictly increasing".into()));
        }
        if let Some(c) = cutoffs.iter().find(|c| !window.contains(**c)) {
            return Err(Error::Config(format!("cutoff {c} lies outside the study window {window}")));
        }
        if let Some(w) = exclusions.iter().find(|w| !w.within(&window)) {
            return Err(Error::Config(format!("exclusion window {w} is not inside the study window {window}")));
        }
        let labels = (0..=cutoffs.len()).map(|t| format!("t{t}")).collect();
        Ok(Self { window, cutoffs, exclusions, labels })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n_periods() {
            return Err(Error::Config(format!(
                "{} period labels given for {} periods",
                labels.len(),
                self.n_periods()
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(Error::Config(format!("duplicate period label {dup:?}")));
        }
        self.labels = labels;
        Ok(self)
    }

    /// Three-period design around the Feb 23 targeted lockdown and the Mar 9
    /// national extension, with the anticipation windows Feb 20-22 and
    /// Mar 7-8 removed.
    pub fn lockdown_default() -> Self {
        PeriodScheme::new(
            DateRange { start: ymd(2020, 1, 1), end: ymd(2020, 3, 22) },
            vec![ymd(2020, 2, 23), ymd(2020, 3, 9)],
            vec![
                DateRange { start: ymd(2020, 2, 20), end: ymd(2020, 2, 22) },
                DateRange { start: ymd(2020, 3, 7), end: ymd(2020, 3, 8) },
            ],
        )
        .and_then(|s| s.with_labels(vec!["pre".into(), "post".into(), "national".into()]))
        .expect("default scheme is valid")
    }

    /// Refined four-period grid used for the leads/lags regression: January,
    /// a Feb 1-19 baseline, the targeted lockdown and the national extension.
    pub fn lockdown_event_study() -> Self {
        PeriodScheme::new(
            DateRange { start: ymd(2020, 1, 1), end: ymd(2020, 3, 21) },
            vec![ymd(2020, 2, 1), ymd(2020, 2, 23), ymd(2020, 3, 9)],
            vec![
                DateRange { start: ymd(2020, 2, 20), end: ymd(2020, 2, 22) },
                DateRange { start: ymd(2020, 3, 7), end: ymd(2020, 3, 8) },
            ],
        )
        .and_then(|s| {
            s.with_labels(vec!["january".into(), "baseline".into(), "lockdown".into(), "national".into()])
        })
        .expect("event-study scheme is valid")
    }

    pub fn window(&self) -> DateRange {
        self.window
    }

    pub fn cutoffs(&self) -> &[NaiveDate] {
        &self.cutoffs
    }

    pub fn exclusions(&self) -> &[DateRange] {
        &self.exclusions
    }

    pub fn n_periods(&self) -> usize {
        self.cutoffs.len() + 1
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, period: u32) -> Option<&str> {
        self.labels.get(period as usize).map(String::as_str)
    }

    pub fn period_of_label(&self, label: &str) -> Option<u32> {
        self.labels.iter().position(|l| l == label).map(|p| p as u32)
    }

    pub fn assign(&self, date: NaiveDate) -> PeriodAssignment {
        if !self.window.contains(date) {
            return PeriodAssignment::OutsideWindow;
        }
        if let Some(w) = self.exclusions.iter().position(|w| w.contains(date)) {
            return PeriodAssignment::Excluded(w);
        }
        PeriodAssignment::Period(self.cutoffs.partition_point(|c| *c <= date) as u32)
    }
}

/// Maps a date to its period index under `scheme`.
pub fn assign_period(date: NaiveDate, scheme: &PeriodScheme) -> PeriodAssignment {
    scheme.assign(date)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Zone {
    Red,
    Orange,
    Other,
}

impl Zone {
    pub fn as_str(self) -> &'static str {
        match self {
            Zone::Red => "red",
            Zone::Orange => "orange",
            Zone::Other => "other",
        }
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Zone {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "red" => Ok(Zone::Red),
            "orange" => Ok(Zone::Orange),
            "other" => Ok(Zone::Other),
            other => Err(Error::Validation(format!("unknown zone {other:?}"))),
        }
    }
}

/// First period in which a unit is treated. `Never` sorts after every finite
/// period and plays the role of `g = +inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cohort {
    FirstTreated(u32),
    Never,
}

impl Cohort {
    pub fn period(self) -> Option<u32> {
        match self {
            Cohort::FirstTreated(g) => Some(g),
            Cohort::Never => None,
        }
    }

    /// `1[t >= g]`.
    pub fn treated_at(self, t: u32) -> bool {
        matches!(self, Cohort::FirstTreated(g) if t >= g)
    }
}

impl fmt::Display for Cohort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cohort::FirstTreated(g) => write!(f, "{g}"),
            Cohort::Never => f.write_str("never"),
        }
    }
}

impl FromStr for Cohort {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("never") || s.eq_ignore_ascii_case("inf") {
            return Ok(Cohort::Never);
        }
        s.parse::<u32>()
            .map(Cohort::FirstTreated)
            .map_err(|_| Error::Config(format!("invalid cohort {s:?}; expected a period index or \"never\"")))
    }
}

impl Serialize for Cohort {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cohort::FirstTreated(g) => s.serialize_u32(*g),
            Cohort::Never => s.serialize_str("never"),
        }
    }
}

impl<'de> Deserialize<'de> for Cohort {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Period(u32),
            Label(String),
        }
        match Repr::deserialize(d)? {
            Repr::Period(g) => Ok(Cohort::FirstTreated(g)),
            Repr::Label(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Zone to first-treated-period map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TreatmentSchedule {
    zone_first_treated: BTreeMap<Zone, Cohort>,
}

impl TreatmentSchedule {
    pub fn new(zone_first_treated: BTreeMap<Zone, Cohort>) -> Self {
        Self { zone_first_treated }
    }

    /// Red zone locked down in period 1, orange zone with the national
    /// extension in period 2.
    pub fn lockdown_default() -> Self {
        Self::new(BTreeMap::from([
            (Zone::Red, Cohort::FirstTreated(1)),
            (Zone::Orange, Cohort::FirstTreated(2)),
        ]))
    }

    /// Cohorts of [`lockdown_default`](Self::lockdown_default) on the
    /// four-period grid of [`PeriodScheme::lockdown_event_study`].
    pub fn lockdown_event_study() -> Self {
        Self::new(BTreeMap::from([
            (Zone::Red, Cohort::FirstTreated(2)),
            (Zone::Orange, Cohort::FirstTreated(3)),
        ]))
    }

    pub fn with(mut self, zone: Zone, cohort: Cohort) -> Self {
        self.zone_first_treated.insert(zone, cohort);
        self
    }

    pub fn entries(&self) -> impl Iterator<Item = (Zone, Cohort)> + '_ {
        self.zone_first_treated.iter().map(|(z, c)| (*z, *c))
    }

    pub fn cohort_of(&self, zone: Zone) -> Result<Cohort> {
        self.zone_first_treated
            .get(&zone)
            .copied()
            .ok_or_else(|| Error::Config(format!("zone {zone} has no entry in the treatment schedule")))
    }
}

pub fn cohort_of(zone: Zone, schedule: &TreatmentSchedule) -> Result<Cohort> {
    schedule.cohort_of(zone)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assigns_periods_around_cutoffs() {
        let s = PeriodScheme::lockdown_default();
        assert_eq!(assign_period(ymd(2020, 2, 10), &s), PeriodAssignment::Period(0));
        assert_eq!(assign_period(ymd(2020, 2, 23), &s), PeriodAssignment::Period(1));
        assert_eq!(assign_period(ymd(2020, 3, 15), &s), PeriodAssignment::Period(2));
        assert_eq!(assign_period(ymd(2020, 3, 9), &s), PeriodAssignment::Period(2));
        assert_eq!(assign_period(ymd(2020, 2, 21), &s), PeriodAssignment::Excluded(0));
        assert_eq!(assign_period(ymd(2020, 3, 7), &s), PeriodAssignment::Excluded(1));
        assert_eq!(assign_period(ymd(2019, 12, 31), &s), PeriodAssignment::OutsideWindow);
    }

    #[test]
    fn rejects_bad_schemes() {
        let w = DateRange::new(ymd(2020, 1, 1), ymd(2020, 3, 1)).unwrap();
        assert!(PeriodScheme::new(w, vec![ymd(2020, 2, 1), ymd(2020, 2, 1)], vec![]).is_err());
        let outside = DateRange::new(ymd(2020, 2, 25), ymd(2020, 3, 5)).unwrap();
        assert!(PeriodScheme::new(w, vec![ymd(2020, 2, 1)], vec![outside]).is_err());
        assert!(DateRange::new(ymd(2020, 2, 2), ymd(2020, 2, 1)).is_err());
    }

    #[test]
    fn cohorts_under_default_schedule() {
        let s = TreatmentSchedule::lockdown_default();
        assert_eq!(cohort_of(Zone::Red, &s).unwrap(), Cohort::FirstTreated(1));
        assert_eq!(cohort_of(Zone::Orange, &s).unwrap(), Cohort::FirstTreated(2));
        assert!(matches!(cohort_of(Zone::Other, &s), Err(Error::Config(_))));
        assert!(Cohort::FirstTreated(3) < Cohort::Never);
        assert!(!Cohort::Never.treated_at(u32::MAX));
    }

    #[test]
    fn scheme_round_trips_through_toml() {
        let s = PeriodScheme::lockdown_event_study();
        let text = toml::to_string(&s).unwrap();
        let back: PeriodScheme = toml::from_str(&text).unwrap();
        assert_eq!(back, s);
        let sched: TreatmentSchedule = toml::from_str("red = 1\norange = 2\nother = \"never\"\n").unwrap();
        assert_eq!(sched.cohort_of(Zone::Other).unwrap(), Cohort::Never);
    }
}
