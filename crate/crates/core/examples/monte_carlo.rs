//! Bias, coverage and rejection rate of delta_1 under a known effect.

use std::collections::BTreeMap;

use didkit::ols::FeMode;
use didkit::panel::Zone;
use didkit::sim::{monte_carlo, DgpConfig, Estimator};

fn main() -> didkit::Result<()> {
    let cfg = DgpConfig {
        seed: 42,
        users_per_group: BTreeMap::from([(Zone::Red, 500), (Zone::Orange, 500)]),
        tau: 0.05,
        ..DgpConfig::default()
    };
    for est in [Estimator::Delta1 { fe: FeMode::None }, Estimator::TwoPeriodAtt] {
        let s = monte_carlo(&cfg, &est, 100)?;
        println!(
            "{est:?}: mean {:.4} truth {:.2} bias {:+.4} (MC se {:.4}) coverage {:.2} rejection {:.2}",
            s.mean,
            s.truth.unwrap_or(f64::NAN),
            s.bias.unwrap_or(f64::NAN),
            s.mc_se,
            s.coverage.unwrap_or(f64::NAN),
            s.rejection_rate
        );
    }
    Ok(())
}
