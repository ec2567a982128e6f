//! Closed-form two-period DiD next to the regression it equals.

use std::collections::BTreeMap;

use didkit::did::{att_two_period, did_regression, Estimand};
use didkit::ols::FeMode;
use didkit::panel::Zone;
use didkit::sim::{generate_panel, DgpConfig};

fn main() -> didkit::Result<()> {
    let cfg = DgpConfig {
        seed: 1,
        users_per_group: BTreeMap::from([(Zone::Red, 400), (Zone::Orange, 400)]),
        tau: 0.06,
        ..DgpConfig::default()
    };
    let (panel, _) = generate_panel(&cfg)?;

    let att = att_two_period(&panel, "y")?;
    println!("{}: {:.4} (se {:.4}, 95% CI [{:.4}, {:.4}])", att.label, att.estimate, att.se, att.ci_lo, att.ci_hi);

    for fe in [FeMode::None, FeMode::Within] {
        let reg = did_regression(&panel, "y", fe)?;
        let d1 = reg.get(Estimand::Delta { t: 1 }).unwrap();
        let d2 = reg.get(Estimand::Delta { t: 2 }).unwrap();
        println!("{fe:?}: delta_1 = {:.4} (p = {:.3}), delta_2 = {:.4} [descriptive]", d1.estimate, d1.p, d2.estimate);
    }
    Ok(())
}
