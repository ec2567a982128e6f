use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::Serialize;

use super::{BuildReport, Observation, Panel, PeriodScheme, TreatmentSchedule, Zone};
use crate::error::{Error, Result};

const REQUIRED: [&str; 5] = ["tweet_id", "user_id", "municipality", "date", "zone"];
/// Columns written by [`write_panel`] and recomputed on load.
const DERIVED: [&str; 3] = ["period", "cohort", "treated"];
const TOPIC_PREFIX: &str = "topic_";

/// Validation report for a loaded panel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub outcomes: Vec<String>,
    pub topics: Vec<String>,
    pub n_users: usize,
    pub n_municipalities: usize,
    pub rows_by_zone: Vec<(String, usize)>,
    #[serde(flatten)]
    pub build: BuildReport,
}

enum Column {
    Required(usize),
    Derived,
    Outcome(String),
    Topic(String),
    Distance,
    Text,
}

fn parse_flag(raw: &str, row: usize, column: &str) -> Result<u8> {
    match raw.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(Error::Parse { row, message: format!("column {column}: expected 0 or 1, found {other:?}") }),
    }
}

/// Reads tweet-level records (comma separated, header row first) into a panel.
///
/// Columns `tweet_id, user_id, municipality, date, zone` are required; `text`
/// and `distance_km` are optional; `topic_<name>` columns become topic flags
/// and every other column is a binary outcome. `period`, `cohort` and
/// `treated` are ignored so that a file written by [`write_panel`] loads back
/// unchanged.
pub fn load_panel<R: Read>(
    source: R,
    scheme: &PeriodScheme,
    schedule: &TreatmentSchedule,
) -> Result<(Panel, LoadReport)> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(source);
    let headers = reader.headers().map_err(|e| Error::Parse { row: 1, message: e.to_string() })?.clone();

    let mut columns = Vec::with_capacity(headers.len());
    for name in headers.iter() {
        let name = name.trim();
        let col = if let Some(p) = REQUIRED.iter().position(|r| *r == name) {
            Column::Required(p)
        } else if DERIVED.contains(&name) {
            Column::Derived
        } else if name == "text" {
            Column::Text
        } else if name == "distance_km" {
            Column::Distance
        } else if let Some(topic) = name.strip_prefix(TOPIC_PREFIX) {
            Column::Topic(topic.to_string())
        } else if name.is_empty() {
            return Err(Error::Parse { row: 1, message: "empty column name in header".into() });
        } else {
            Column::Outcome(name.to_string())
        };
        columns.push(col);
    }
    for (p, req) in REQUIRED.iter().enumerate() {
        if !columns.iter().any(|c| matches!(c, Column::Required(q) if *q == p)) {
            return Err(Error::Parse { row: 1, message: format!("missing required column {req:?}") });
        }
    }

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::Parse { row, message: e.to_string() })?;
        let mut req: [&str; 5] = [""; 5];
        let mut obs = Observation {
            tweet_id: String::new(),
            user_id: String::new(),
            municipality: String::new(),
            date: NaiveDate::MIN,
            zone: Zone::Other,
            outcomes: Default::default(),
            topic_flags: Default::default(),
            distance_km: None,
            text: None,
        };
        for (col, raw) in columns.iter().zip(record.iter()) {
            match col {
                Column::Required(p) => req[*p] = raw,
                Column::Derived => {}
                Column::Outcome(name) => {
                    obs.outcomes.insert(name.clone(), parse_flag(raw, row, name)?);
                }
                Column::Topic(name) => {
                    obs.topic_flags.insert(name.clone(), parse_flag(raw, row, name)?);
                }
                Column::Distance => {
                    if !raw.trim().is_empty() {
                        let d = raw.trim().parse::<f64>().map_err(|_| Error::Parse {
                            row,
                            message: format!("distance_km: not a number: {raw:?}"),
                        })?;
                        if !d.is_finite() || d < 0.0 {
                            return Err(Error::Parse { row, message: format!("distance_km: invalid value {d}") });
                        }
                        obs.distance_km = Some(d);
                    }
                }
                Column::Text => {
                    if !raw.is_empty() {
                        obs.text = Some(raw.to_string());
                    }
                }
            }
        }
        for (p, name) in REQUIRED.iter().enumerate().take(3) {
            if req[p].trim().is_empty() {
                return Err(Error::Parse { row, message: format!("{name} is empty") });
            }
        }
        obs.tweet_id = req[0].trim().to_string();
        obs.user_id = req[1].trim().to_string();
        obs.municipality = req[2].trim().to_string();
        obs.date = NaiveDate::parse_from_str(req[3].trim(), "%Y-%m-%d")
            .map_err(|e| Error::Parse { row, message: format!("date {:?}: {e}", req[3]) })?;
        obs.zone = req[4].parse().map_err(|e: Error| Error::Parse { row, message: e.to_string() })?;
        rows.push((row, obs));
    }

    let (panel, build) = Panel::build(rows, scheme.clone(), schedule.clone())?;
    let mut by_zone = std::collections::BTreeMap::new();
    for i in 0..panel.len() {
        *by_zone.entry(panel.zone(i).to_string()).or_insert(0usize) += 1;
    }
    let report = LoadReport {
        outcomes: panel.outcome_names().map(str::to_string).collect(),
        topics: panel.topic_names().map(str::to_string).collect(),
        n_users: panel.n_users(),
        n_municipalities: panel.n_municipalities(),
        rows_by_zone: by_zone.into_iter().collect(),
        build,
    };
    Ok((panel, report))
}

/// Writes the canonical panel file: input columns plus the derived
/// `period`, `cohort` and `treated` columns, in a fixed column order.
pub fn write_panel<W: Write>(panel: &Panel, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header: Vec<String> = REQUIRED.iter().map(|s| s.to_string()).collect();
    header.extend(DERIVED.iter().map(|s| s.to_string()));
    header.extend(panel.outcome_names().map(str::to_string));
    header.extend(panel.topic_names().map(|t| format!("{TOPIC_PREFIX}{t}")));
    if panel.has_distance() {
        header.push("distance_km".into());
    }
    if panel.has_text() {
        header.push("text".into());
    }
    w.write_record(&header)?;

    let outcomes: Vec<&[u8]> = panel.outcome_names().map(|o| panel.outcome(o).expect("listed")).collect();
    let topics: Vec<&[u8]> = panel.topic_names().map(|t| panel.topic(t).expect("listed")).collect();
    let mut rec: Vec<String> = Vec::with_capacity(header.len());
    for i in 0..panel.len() {
        rec.clear();
        rec.push(panel.tweet_id(i).to_string());
        rec.push(panel.user_name(panel.user(i)).to_string());
        rec.push(panel.municipality_name(panel.municipality(i)).to_string());
        rec.push(panel.date(i).format("%Y-%m-%d").to_string());
        rec.push(panel.zone(i).to_string());
        rec.push(panel.period(i).to_string());
        rec.push(panel.cohort(i).to_string());
        rec.push(u8::from(panel.treated_now(i)).to_string());
        rec.extend(outcomes.iter().map(|c| c[i].to_string()));
        rec.extend(topics.iter().map(|c| c[i].to_string()));
        if panel.has_distance() {
            rec.push(panel.distance_km(i).map(|d| d.to_string()).unwrap_or_default());
        }
        if panel.has_text() {
            rec.push(panel.text(i).unwrap_or_default().to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
