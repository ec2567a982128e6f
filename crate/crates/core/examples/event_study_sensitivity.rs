//! Leads and lags with a joint pre-trend test, then robust intervals over M.

use std::collections::BTreeMap;

use didkit::did::{event_study, EventStudySpec};
use didkit::ols::FeMode;
use didkit::panel::{PeriodScheme, TreatmentSchedule, Zone};
use didkit::sensitivity::{breakdown_scan, ViolationMode, DEFAULT_GRID};
use didkit::sim::{generate_panel, DgpConfig};

fn main() -> didkit::Result<()> {
    let cfg = DgpConfig {
        seed: 5,
        users_per_group: BTreeMap::from([(Zone::Red, 2000), (Zone::Orange, 2000)]),
        scheme: PeriodScheme::lockdown_event_study(),
        schedule: TreatmentSchedule::lockdown_event_study(),
        tau: 0.05,
        trend_slope: 0.01,
        ..DgpConfig::default()
    };
    let (panel, _) = generate_panel(&cfg)?;
    let es = event_study(&panel, "y", &EventStudySpec::new("baseline", 1, 1).with_fe(FeMode::None))?;
    println!("relative,period,estimate,lo95,hi95");
    for c in &es.coefficients {
        println!("{},{},{:.4},{:.4},{:.4}", c.relative, c.label, c.estimate, c.ci_lo, c.ci_hi);
    }
    if let Some(w) = es.pre_test {
        println!("pre-trend Wald chi2({}) = {:.3}, p = {:.3}", w.df, w.statistic, w.p);
    }

    let s = breakdown_scan(&es, &DEFAULT_GRID, ViolationMode::Consecutive)?;
    println!("{} (b = {:.4})", s.method, s.max_pre_violation);
    for g in &s.grid {
        println!("M = {:.1}: [{:.4}, {:.4}]{}", g.mbar, g.lo, g.hi, if g.excludes_zero { " *" } else { "" });
    }
    println!("breakdown M = {:?}", s.breakdown_mbar);
    Ok(())
}
