//! Forgetful novelty-seeking rating prediction.
//!
//! The crate is split along the pipeline:
//!
//! - [`dataset`]: MovieLens-1M (`::`-delimited) ingestion, per-user action
//!   sequences, rating centering, low-rating oversampling and summary stats.
//! - [`novelty`]: sliding-window action novelty (ANI) rows/matrices and the
//!   entropy-based user novelty index (UNI).
//! - [`numcore`]: a deliberately small reverse-mode differentiation engine,
//!   SGD, a finite-difference gradient checker and the seeded initializer.
//! - [`model`]: the two-tower rating model, its training loop and the
//!   parameter container.
//! - [`experiments`]: nDCG@all, the random-ranking baseline, leave-last-out
//!   evaluation, the k sweep and UNI trajectories.
//!
//! Numeric code is generic over the scalar type (see [`scalar`]). Novelty
//! values only need field arithmetic, so they can be computed exactly with
//! rationals; everything differentiable needs a [`Real`]. The aliases below
//! fix the common instantiations.

pub mod dataset;
pub mod error;
pub mod experiments;
pub mod model;
pub mod novelty;
pub mod numcore;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Real, Scalar};

/// Exact rational scalar used for reference novelty computations.
pub type Rational = num_rational::Ratio<i64>;

pub type AniMatrixF64 = novelty::AniMatrix<f64>;
pub type AniMatrixF32 = novelty::AniMatrix<f32>;
pub type ExactAniMatrix = novelty::AniMatrix<Rational>;
pub type UniSeriesF64 = novelty::UniSeries<f64>;

pub type TensorF64 = numcore::Tensor<f64>;
pub type TensorF32 = numcore::Tensor<f32>;
pub type GraphF64<'a> = numcore::Graph<'a, f64>;

pub type ModelParamsF64 = model::ModelParams<f64>;
pub type ModelParamsF32 = model::ModelParams<f32>;
pub type TrainingRowF64 = model::TrainingRow<f64>;
