//! Fairness-aware learning over sequential data batches.
//!
//! Models deployed on a stream face a moving target: the joint distribution
//! of a sensitive attribute and the class label shifts over time, so a
//! correction fitted to yesterday's data is already stale when it scores
//! tomorrow's. This crate implements the full loop for studying that
//! problem:
//!
//! * [`stream`] - time-indexed batches of instances with a binary group and
//!   label, plus their joint (group, label) distributions.
//! * [`reweigh`] - classic sample reweighing toward group/label
//!   independence.
//! * [`anticipate`] - forecasting the next batch's distribution and
//!   blending present-looking with forward-looking weights.
//! * [`learner`] - a deterministic weighted logistic regression used as the
//!   common classifier across all regimes.
//! * [`metrics`] - per-step fairness and accuracy snapshots, and temporal
//!   aggregates over the resulting series.
//! * [`regimes`] - the four training protocols (train-once, train-once
//!   reweighed, retrain-with-reweighing, retrain-with-anticipation) under
//!   one train-on-the-past, test-on-the-future evaluation loop.
//! * [`data`] - synthetic drift generators and schema-driven CSV ingestion.
//!
//! Everything is generic over the floating-point type through [`Scalar`];
//! the crate root offers `*64`/`*32` aliases for the common instantiations.
//!
//! # Example
//!
//! ```
//! use fairstream::data::{generate, DriftSpec};
//! use fairstream::regimes::{run_regime, ExperimentConfig, RegimeId};
//!
//! let mut spec: DriftSpec<f64> = DriftSpec::default_linear_drift();
//! spec.n_batches = 4;
//! spec.batch_size = 64;
//! let stream = generate(&spec).unwrap();
//!
//! let series = run_regime(&stream, &ExperimentConfig::new(RegimeId::Abc)).unwrap();
//! assert_eq!(series.per_step().len(), 3);
//! ```

pub mod anticipate;
pub mod data;
pub mod error;
pub mod learner;
pub mod metrics;
pub mod regimes;
pub mod reweigh;
pub mod scalar;
pub mod stream;

pub use error::{Error, ErrorCategory, Result};
pub use scalar::Scalar;

/// Double-precision instantiations, the usual choice.
pub type Instance64 = stream::Instance<f64>;
pub type Batch64 = stream::Batch<f64>;
pub type GroupDistribution64 = stream::GroupDistribution<f64>;
pub type WeightTable64 = stream::WeightTable<f64>;
pub type MetricSeries64 = stream::MetricSeries<f64>;
pub type LinearModel64 = learner::LinearModel<f64>;
pub type TrainConfig64 = learner::TrainConfig<f64>;
pub type AnticipationConfig64 = anticipate::AnticipationConfig<f64>;
pub type ExperimentConfig64 = regimes::ExperimentConfig<f64>;
pub type DriftSpec64 = data::DriftSpec<f64>;

/// Single-precision instantiations for memory-constrained experiments.
pub type Instance32 = stream::Instance<f32>;
pub type Batch32 = stream::Batch<f32>;
pub type GroupDistribution32 = stream::GroupDistribution<f32>;
pub type WeightTable32 = stream::WeightTable<f32>;
pub type MetricSeries32 = stream::MetricSeries<f32>;
pub type LinearModel32 = learner::LinearModel<f32>;
pub type TrainConfig32 = learner::TrainConfig<f32>;
pub type AnticipationConfig32 = anticipate::AnticipationConfig<f32>;
pub type ExperimentConfig32 = regimes::ExperimentConfig<f32>;
pub type DriftSpec32 = data::DriftSpec<f32>;
