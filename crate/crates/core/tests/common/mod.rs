#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use didkit::panel::{Cohort, TreatmentSchedule, Zone};
use didkit::sim::{generate_panel, DgpConfig};

const ECONOMY: [&str; 3] = ["economy", "market", "jobs"];
const HEALTH: [&str; 3] = ["virus", "hospital", "masks"];
const FILLER: [&str; 4] = ["today", "milan", "people", "home"];

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn schedule() -> TreatmentSchedule {
    TreatmentSchedule::lockdown_default().with(Zone::Other, Cohort::Never)
}

fn tweet_text(i: usize) -> String {
    let mut words = vec![FILLER[i % 4]];
    if i % 3 == 0 {
        words.push(ECONOMY[(i / 3) % 3]);
    }
    if i % 5 < 2 {
        words.push(HEALTH[i % 3]);
    }
    if i % 7 == 0 {
        words.push("#lockdown");
    }
    words.join(" ")
}

/// Writes a small synthetic corpus and a run configuration into `dir`;
/// returns the configuration path.
pub fn write_fixture(dir: &Path) -> PathBuf {
    let data = dir.join("data");
    fs::create_dir_all(&data).unwrap();
    let dgp = DgpConfig {
        seed: 11,
        outcome: "uncertainty".into(),
        users_per_group: BTreeMap::from([(Zone::Red, 60), (Zone::Orange, 60), (Zone::Other, 60)]),
        municipalities_per_group: 6,
        schedule: schedule(),
        baseline_p: BTreeMap::from([(Zone::Red, 0.3), (Zone::Orange, 0.3), (Zone::Other, 0.3)]),
        tau: 0.1,
        ..DgpConfig::default()
    };
    let (panel, _) = generate_panel(&dgp).unwrap();

    let mut raw = String::from("tweet_id,user_id,municipality,date,zone,distance_km,text\n");
    let mut labels = String::from("tweet_id,emotion,label,confidence\n");
    let y = panel.outcome("uncertainty").unwrap();
    for i in 0..panel.len() {
        let id = panel.tweet_id(i);
        writeln!(
            raw,
            "{id},{},{},{},{},{},{}",
            panel.user_name(panel.user(i)),
            panel.municipality_name(panel.municipality(i)),
            panel.date(i).format("%Y-%m-%d"),
            panel.zone(i),
            panel.distance_km(i).unwrap(),
            tweet_text(i)
        )
        .unwrap();
        let cu = if y[i] == 1 { 0.55 + (i % 40) as f64 / 100.0 } else { 0.05 + (i % 40) as f64 / 100.0 };
        writeln!(labels, "{id},uncertainty,{},{cu:.2}", y[i]).unwrap();
        let neg = u8::from(mix(i as u64 ^ 0x5eed) % 10 < 3);
        writeln!(labels, "{id},negative,{neg},{:.2}", if neg == 1 { 0.7 } else { 0.2 }).unwrap();
    }
    fs::write(data.join("tweets.csv"), raw).unwrap();
    fs::write(data.join("labels.csv"), labels).unwrap();
    fs::write(data.join("economics.txt"), ECONOMY.join("\n")).unwrap();
    fs::write(data.join("health.txt"), HEALTH.join("\n")).unwrap();

    let mut mortality = String::from("municipality,month,excess_mortality\n");
    let mut covariates = String::from("municipality,population,median_age\n");
    for (k, m) in panel.municipality_names().iter().enumerate() {
        let base = match m.split('-').next().unwrap() {
            "red" => 40.0,
            "orange" => 20.0,
            _ => 5.0,
        };
        for (j, month) in ["2020-02", "2020-03", "2020-04"].iter().enumerate() {
            writeln!(mortality, "{m},{month},{}", base * (j + 1) as f64 + k as f64).unwrap();
        }
        writeln!(covariates, "{m},{},{}", 10_000 + 137 * k, 40.0 + (k % 5) as f64).unwrap();
    }
    fs::write(data.join("mortality.csv"), mortality).unwrap();
    fs::write(data.join("covariates.csv"), covariates).unwrap();

    let config = r#"seed = 7
out = "out"
topics = ["economics", "health"]

[paths]
panel = "data/tweets.csv"
labels = "data/labels.csv"
dictionaries = ["data/economics.txt", "data/health.txt"]
mortality = "data/mortality.csv"
covariates = "data/covariates.csv"

[schedule]
red = 1
orange = 2
other = "never"

[model]
bootstrap_draws = 49
rings = [{ lo = 0.0, hi = 30.0 }]

[event_study.schedule]
red = 2
orange = 3
other = "never"

[placebo]
k = 4

[simulate]
reps = 20

[simulate.dgp]
municipalities_per_group = 10
tau = 0.05

[simulate.dgp.users_per_group]
red = 80
orange = 80
"#;
    let path = dir.join("run.toml");
    fs::write(&path, config).unwrap();
    path
}

/// Output files under `dir` with their bytes, by file name.
pub fn read_outputs(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for e in fs::read_dir(dir).unwrap() {
        let e = e.unwrap();
        out.insert(e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap());
    }
    out
}
