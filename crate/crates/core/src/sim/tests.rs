use std::collections::BTreeMap;

use super::*;
use crate::did::{event_study, EventStudySpec};
use crate::error::Error;
use crate::ols::FeMode;
use crate::panel::{write_panel, PeriodScheme, TreatmentSchedule, Zone};
use crate::sensitivity::{max_pre_violation, ViolationMode};

fn small(seed: u64) -> DgpConfig {
    DgpConfig {
        seed,
        users_per_group: BTreeMap::from([(Zone::Red, 120), (Zone::Orange, 120)]),
        municipalities_per_group: 10,
        ..DgpConfig::default()
    }
}

fn bytes(cfg: &DgpConfig, r: u64) -> Vec<u8> {
    let (p, _) = generate_replicate(cfg, r).unwrap();
    let mut out = Vec::new();
    write_panel(&p, &mut out).unwrap();
    out
}

#[test]
fn same_seed_same_bytes() {
    let cfg = small(11);
    assert_eq!(bytes(&cfg, 0), bytes(&cfg, 0));
    assert_ne!(bytes(&cfg, 0), bytes(&cfg, 1));
    assert_ne!(bytes(&cfg, 0), bytes(&small(12), 0));
    let (p, truth) = generate_panel(&cfg).unwrap();
    assert_eq!(p.len(), cfg.expected_rows());
    assert_eq!(truth.rows, p.len());
    assert_eq!(p.n_municipalities(), 20);
}

#[test]
fn ground_truth_round_trips() {
    let mut cfg = small(3);
    cfg.tau = 0.05;
    cfg.tau_gt = vec![CellEffect { g: 2, t: 2, tau: 0.01 }];
    cfg.trend_slope = 0.004;
    cfg.anticipation = -0.01;
    cfg.period_shocks = vec![0.0, 0.02, 0.03];
    cfg.rings = vec![RingEffect { lo: 0.0, hi: 20.0, eta: 0.03, share: 0.4 }];
    let (_, truth) = generate_panel(&cfg).unwrap();
    let json = serde_json::to_string(&truth).unwrap();
    let back: GroundTruth = serde_json::from_str(&json).unwrap();
    assert_eq!(back, truth);
    let toml_text = toml::to_string(&cfg).unwrap();
    assert_eq!(DgpConfig::from_toml(&toml_text).unwrap(), cfg);
    assert_eq!(cfg.tau_at(1, 1), 0.05);
    assert_eq!(cfg.tau_at(2, 2), 0.01);
    assert_eq!(cfg.tau_at(2, 1), 0.0);
}

#[test]
fn toml_config_with_defaults() {
    let cfg = DgpConfig::from_toml(
        "seed = 9\ntau = 0.05\n[users_per_group]\nred = 10\norange = 20\n[baseline_p]\nred = 0.2\norange = 0.25\n",
    )
    .unwrap();
    assert_eq!(cfg.users_per_group[&Zone::Orange], 20);
    assert_eq!(cfg.cluster_sd, 0.02);
    assert!(matches!(DgpConfig::from_toml("sede = 1"), Err(Error::Config(_))));
    assert!(matches!(DgpConfig::from_toml("period_shocks = [0.1]"), Err(Error::Config(_))));
}

#[test]
fn heavy_clamping_is_rejected() {
    let mut cfg = small(1);
    cfg.baseline_p = BTreeMap::from([(Zone::Red, 0.995), (Zone::Orange, 0.5)]);
    assert!(matches!(generate_panel(&cfg), Err(Error::Config(_))));
    cfg.baseline_p = BTreeMap::from([(Zone::Red, 0.6), (Zone::Orange, 0.5)]);
    let (_, t) = generate_panel(&cfg).unwrap();
    assert_eq!(t.clamped_cells, 0);
}

#[test]
fn replicate_is_independent_of_rep_count() {
    let cfg = small(5);
    let a = monte_carlo(&cfg, &Estimator::TwoPeriodAtt, 3).unwrap();
    let b = monte_carlo(&cfg, &Estimator::TwoPeriodAtt, 6).unwrap();
    assert_eq!(a.replicates[..], b.replicates[..3]);
}

#[test]
fn two_replicates_are_enough() {
    let s = monte_carlo(&small(6), &Estimator::Delta1 { fe: FeMode::None }, 2).unwrap();
    assert_eq!(s.completed, 2);
    assert!(s.mean.is_finite() && s.mc_se.is_finite());
    assert!(monte_carlo(&small(6), &Estimator::TwoPeriodAtt, 1).is_err());
}

#[test]
fn failures_are_counted_not_fatal() {
    // ATT(2,2) has no counterfactual in this design
    let s = monte_carlo(&small(7), &Estimator::AttGt { g: 2, t: 2, draws: 9 }, 3).unwrap();
    assert_eq!(s.completed, 0);
    assert_eq!(s.failures.len(), 3);
}

#[test]
fn null_dgp_is_centred() {
    let s = monte_carlo(&small(8), &Estimator::Delta1 { fe: FeMode::None }, 500).unwrap();
    assert_eq!(s.completed, 500);
    assert!(s.bias.unwrap().abs() < 3.0 * s.mc_se, "{} vs {}", s.bias.unwrap(), s.mc_se);
}

#[test]
fn pre_violation_tracks_planted_slope() {
    let cfg = DgpConfig {
        seed: 2,
        users_per_group: BTreeMap::from([(Zone::Red, 4000), (Zone::Orange, 4000)]),
        tweets_per_user_per_period: 4,
        scheme: PeriodScheme::lockdown_event_study(),
        schedule: TreatmentSchedule::lockdown_event_study(),
        trend_slope: 0.05,
        cluster_sd: 0.0,
        ..DgpConfig::default()
    };
    let (p, _) = generate_panel(&cfg).unwrap();
    let es = event_study(&p, "y", &EventStudySpec::new("baseline", 1, 1).with_fe(FeMode::None)).unwrap();
    let b = max_pre_violation(&es, ViolationMode::Consecutive).unwrap();
    assert!((b - 0.05).abs() < 0.01, "{b}");
}
