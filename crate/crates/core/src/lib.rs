//! Data-efficient power-consumption modeling for quadrotors.
//!
//! This crate holds the algorithmic core: flight-sample types, the
//! preprocessing numerics (median filter, differentiation, 1 Hz alignment,
//! power floor), four regressors written from scratch (elastic net, random
//! forest, gradient boosted trees, multilayer perceptron), a two-layer
//! stacking ensemble, evaluation metrics and studies, error analyses and a
//! synthetic fleet generator with a physics-style power oracle.
//!
//! The crate is `no_std` with `alloc` when built without the default `std`
//! feature. File formats, log parsing and the command-line driver live in
//! the `pcmkit` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod aircraft;
pub mod analysis;
pub mod channel;
pub mod error;
pub mod evaluate;
pub mod learners;
pub mod matrix;
pub mod model;
pub mod par;
pub mod preprocess;
pub mod rng;
pub mod sample;
pub mod stacking;
pub mod synth;

pub use aircraft::{builtin_aircraft, AircraftKind, AircraftSpec};
pub use error::{Error, Result};
pub use learners::{Hyperparameters, Predictor, RegressorConfig, TrainedRegressor, Variant};
pub use matrix::Matrix;
pub use model::{ModelSpec, TrainedModel};
pub use sample::{Dataset, FeatureMatrix, FlightSample, LossConfig, SplitMode, SplitSpec, TargetVector};
pub use stacking::StackedModel;
