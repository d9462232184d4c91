//! The plug-in and hitting-time entropy estimators.

pub mod empirical;
pub mod entropy;
pub mod hitting;
pub mod schedule;

pub use empirical::EmpiricalBlockDistribution;
pub use entropy::{
    block_entropy, conditional_entropy, decomposition, decomposition_residual, delta_hat, phi_k_deviation,
    phi_k_value, plugin_rate, relative_block_entropy, remainder_bound, Decomposition,
};
pub use hitting::{default_horizon, hitting_rate, hitting_time, HittingResult, PatternAutomaton};
pub use schedule::{schedule, ScheduleKind, ScheduleParams};
