//! Texture classification with gray-level co-occurrence features.
//!
//! The pipeline renders a seeded dataset of shapes ([`shapegen`]), extracts
//! co-occurrence statistics at four angles ([`glcm`]), classifies them with
//! K-NN or a linear SVM ([`classify`]) and measures accuracy against cost for
//! every two- and three-feature combination ([`bench`]).

pub mod bench;
pub mod classify;
pub mod config;
pub mod error;
pub mod exec;
pub mod glcm;
pub mod imaging;
pub mod shapegen;

pub use error::{Error, Result};
pub use exec::Execution;
