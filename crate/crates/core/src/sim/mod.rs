//! Synthetic panels with known effects and Monte Carlo evaluation of the
//! estimators on them.

mod dgp;
mod mc;

pub use dgp::{
    generate_panel, generate_replicate, CellEffect, DgpConfig, GroundTruth, RingEffect, CLAMP_TOLERANCE,
    RNG_ALGORITHM,
};
pub use mc::{monte_carlo, Estimator, Failure, McSummary, Replicate};

#[cfg(test)]
mod tests;
