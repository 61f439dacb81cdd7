//! Tornado early-detection toolkit.
//!
//! Daily 19x19 gridded weather snapshots over 5-degree regions are turned
//! into quadrant mean/std features over up to five preceding days, six
//! from-scratch classifiers are trained and compared, and forecasts are
//! verified with probability of detection (POD) and false alarm rate (FAR).
//! A seeded synthetic generator with a known Bayes-optimal oracle stands in
//! for a reanalysis archive.
//!
//! Numeric kernels are generic over the scalar type via [`scalar::Real`];
//! the aliases below fix the two supported precisions.

pub mod catalog;
pub mod classifiers;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod featurize;
pub mod grid;
pub mod rng;
pub mod scalar;
pub mod schema;
pub mod synth;
pub mod window;

pub use error::{Error, Result};
pub use scalar::Real;
pub use schema::{Label, Variable};

/// Default-precision (f64) aliases.
pub type GridSnapshot64 = grid::GridSnapshot<f64>;
pub type EventWindow64 = window::EventWindow<f64>;
pub type Dataset64 = dataset::Dataset<f64>;
pub type FeatureVector64 = featurize::FeatureVector<f64>;
pub type TrainedModel64 = classifiers::TrainedModel<f64>;
pub type EvalReport64 = eval::EvalReport<f64>;

/// Single-precision aliases.
pub type GridSnapshot32 = grid::GridSnapshot<f32>;
pub type EventWindow32 = window::EventWindow<f32>;
pub type Dataset32 = dataset::Dataset<f32>;
pub type FeatureVector32 = featurize::FeatureVector<f32>;
pub type TrainedModel32 = classifiers::TrainedModel<f32>;
