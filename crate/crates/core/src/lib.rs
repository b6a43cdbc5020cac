//! Closed-form predictions for accumulated random steps in high dimensions,
//! with seeded Monte Carlo estimators to check them.
//!
//! Steps are taken on the sphere, in flat space and on the hyperboloid, and
//! random symmetric operators are applied to a fixed unit vector. For each
//! setting the [`predictors`] module gives the expected observable, its exact
//! standard deviation and an upper bound, and [`montecarlo`] estimates the
//! same quantities by simulation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod battery;
pub mod chains;
pub mod error;
pub mod geometry;
pub mod montecarlo;
pub mod numeric;
pub mod oracle;
pub mod predictors;
pub mod report;
pub mod sampling;
pub mod schedule;

pub use error::{Error, Result};
pub use geometry::{HyperboloidPoint, LorentzBoost, Matrix, SymMatrix, UnitVector};
pub use montecarlo::{
    compare, estimate, estimate_with_workers, predict, CompareOptions, ComparisonReport,
    Experiment, ExperimentSpec, FlatObservable, MonteCarloEstimate, OperatorObservable, Verdict,
};
pub use predictors::{Deviation, Prediction};
pub use sampling::{RandomStream, Spectrum};
pub use schedule::StepSchedule;
