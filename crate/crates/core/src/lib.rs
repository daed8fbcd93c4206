//! Task-specific acceptability labels for machine translation, the two
//! detectors trained on them (a feature SVM and a bidirectional GRU with
//! attention) and the evaluation of the resulting cross-lingual pipeline.
//!
//! The trainable models are generic over [`scalar::Real`]; the aliases
//! below fix the scalar type for common use.

pub mod annotate;
pub mod biquest;
pub mod birnn;
pub mod corpus;
pub mod downstream;
pub mod error;
pub mod eval;
pub mod features;
pub mod rng;
pub mod scalar;
pub mod text;
pub mod translate;

pub use error::{Error, Result};

pub type SvmModel = biquest::SvmModel<f64>;
pub type SvmModelF32 = biquest::SvmModel<f32>;
pub type Scaler = biquest::Scaler<f64>;
pub type BirnnParams = birnn::BirnnParams<f32>;
pub type BirnnParamsF64 = birnn::BirnnParams<f64>;
pub type BirnnGradients = birnn::Gradients<f32>;
