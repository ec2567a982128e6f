//! ATT(g,t) against not-yet-treated units with a cluster bootstrap.

use std::collections::BTreeMap;

use didkit::did::{att_gt, BootstrapOptions};
use didkit::panel::{Cohort, TreatmentSchedule, Zone};
use didkit::sim::{generate_panel, CellEffect, DgpConfig};
use didkit::Error;

fn main() -> didkit::Result<()> {
    let cfg = DgpConfig {
        seed: 3,
        users_per_group: BTreeMap::from([(Zone::Red, 300), (Zone::Orange, 300), (Zone::Other, 300)]),
        schedule: TreatmentSchedule::lockdown_default().with(Zone::Other, Cohort::Never),
        baseline_p: BTreeMap::from([(Zone::Red, 0.3), (Zone::Orange, 0.3), (Zone::Other, 0.3)]),
        tau: 0.05,
        tau_gt: vec![CellEffect { g: 1, t: 2, tau: 0.08 }],
        ..DgpConfig::default()
    };
    let (panel, _) = generate_panel(&cfg)?;
    let opts = BootstrapOptions { draws: 199, seed: 9, level: 0.95 };
    for (g, t) in [(1, 1), (1, 2), (2, 2), (2, 1)] {
        match att_gt(&panel, "y", g, t, opts) {
            Ok(e) => println!("{}: {:.4} (boot se {:.4}) truth {:.2}", e.label, e.estimate, e.se, cfg.tau_at(g, t)),
            Err(e @ Error::NotIdentified(_)) => println!("ATT({g},{t}): {e}"),
            Err(e) => return Err(e),
        }
    }
    Ok(())
}
