//! Distance-ring spillovers onto control users and the implied total effect.

use std::collections::BTreeMap;

use didkit::did::spillover_rings;
use didkit::ols::{FeMode, RingBand};
use didkit::panel::Zone;
use didkit::sim::{generate_panel, DgpConfig, RingEffect};

fn main() -> didkit::Result<()> {
    let cfg = DgpConfig {
        seed: 8,
        users_per_group: BTreeMap::from([(Zone::Red, 1500), (Zone::Orange, 1500)]),
        tau: 0.05,
        rings: vec![
            RingEffect { lo: 0.0, hi: 20.0, eta: 0.03, share: 0.3 },
            RingEffect { lo: 20.0, hi: 40.0, eta: 0.01, share: 0.3 },
        ],
        ..DgpConfig::default()
    };
    let (panel, _) = generate_panel(&cfg)?;
    let bands = [RingBand::new(0.0, 20.0)?, RingBand::new(20.0, 40.0)?];
    let r = spillover_rings(&panel, "y", &bands, FeMode::None)?;
    for e in &r.estimates {
        println!("{:<28} {:.4} (se {:.4})", e.label, e.estimate, e.se);
    }
    let d = &r.decomposition;
    println!(
        "naive delta_1 {:.4}; with rings {:.4}; control spillover {:.4}; total {:.4}",
        d.naive_delta1, d.delta1, d.spill_control, d.total
    );
    Ok(())
}
