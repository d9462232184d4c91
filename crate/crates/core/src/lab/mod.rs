//! Monte Carlo checks of the concentration bounds.

pub mod bounds;
pub mod experiment;
pub mod explaw;
pub mod fit;
pub mod gap;
pub mod oscillation;

pub use bounds::{evaluate_bound, BoundCurve, BoundKind, Constant, Constants, Provenance};
pub use experiment::{
    estimate_variance, run_tail_experiment, wilson_interval, BatchSummary, BlockLength, Center, DeviationExperiment,
    EstimatorKind, ExperimentOutcome, ReplicaBatch, TailEstimate, TailSide,
};
pub use explaw::{exp_law_test, ExpLawReport};
pub use fit::{
    affine_fit, compare_tail_shapes, fit_constants, fit_variance_constant, is_estimable, AffineFit, FitResult,
    ShapeComparison, VarianceFit,
};
pub use gap::{expectation_gap_report, GapReport, GapRow};
pub use oscillation::{oscillation_oracle, oscillation_sweep, OscillationReport};
