//! Small panel fixtures for unit tests.

use std::collections::BTreeMap;

use chrono::NaiveDate;

use crate::panel::{Observation, Panel, PeriodScheme, TreatmentSchedule, Zone};

pub struct Row<'a> {
    pub user: &'a str,
    pub muni: &'a str,
    pub zone: Zone,
    pub period: u32,
    pub y: u8,
}

/// A date inside period `t` of [`PeriodScheme::lockdown_default`].
pub fn date_in_period(t: u32, offset: u32) -> NaiveDate {
    let (m, d) = match t {
        0 => (2, 1 + offset % 18),
        1 => (2, 23 + offset % 6),
        _ => (3, 9 + offset % 13),
    };
    NaiveDate::from_ymd_opt(2020, m, d).unwrap()
}

pub fn panel_from_rows(rows: &[Row]) -> Panel {
    let obs = rows
        .iter()
        .enumerate()
        .map(|(i, r)| Observation {
            tweet_id: format!("t{i:05}"),
            user_id: r.user.to_string(),
            municipality: r.muni.to_string(),
            date: date_in_period(r.period, i as u32),
            zone: r.zone,
            outcomes: BTreeMap::from([("y".to_string(), r.y)]),
            topic_flags: BTreeMap::new(),
            distance_km: None,
            text: None,
        })
        .collect();
    Panel::from_observations(obs, PeriodScheme::lockdown_default(), TreatmentSchedule::lockdown_default())
        .unwrap()
        .0
}

/// Deterministic pseudo-random panel: `n` rows over `users` users and
/// `munis` municipalities, red zone for the first half of municipalities.
pub fn random_panel(n: usize, users: usize, munis: usize, seed: u64) -> Panel {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut obs = Vec::with_capacity(n);
    for i in 0..n {
        let u = rng.random_range(0..users);
        let m = u % munis;
        let zone = if m < munis.div_ceil(2) { Zone::Red } else { Zone::Orange };
        let t = rng.random_range(0..3u32);
        let p = 0.3 + 0.1 * f64::from(t) + if zone == Zone::Red { 0.1 } else { 0.0 } + 0.02 * (u % 5) as f64;
        obs.push(Observation {
            tweet_id: format!("t{i:05}"),
            user_id: format!("u{u:03}"),
            municipality: format!("m{m:02}"),
            date: date_in_period(t, rng.random_range(0..20)),
            zone,
            outcomes: BTreeMap::from([("y".to_string(), u8::from(rng.random::<f64>() < p))]),
            topic_flags: BTreeMap::new(),
            distance_km: None,
            text: None,
        });
    }
    Panel::from_observations(obs, PeriodScheme::lockdown_default(), TreatmentSchedule::lockdown_default())
        .unwrap()
        .0
}
