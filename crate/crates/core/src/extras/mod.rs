//! Multiple-testing adjustment, covariate balance, placebo-group
//! construction and descriptive shares.

mod balance;
mod bh;
mod placebo;
mod shares;

pub use balance::{balance_check, balance_row, load_covariates, BalanceRow, CovariateTable, SMD_THRESHOLD};
pub use bh::{adjust_table, bh_adjust, FamilyRule, PCell, PValueFamily};
pub use placebo::{load_mortality, placebo_groups, reference_profile, MortalityProfile, PlaceboGroups};
pub use shares::{group_shares, proportion_ci, GroupShares, ProportionCi, ShareRow};
