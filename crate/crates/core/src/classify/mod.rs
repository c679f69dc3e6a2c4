//! Classifiers over standardized feature vectors: exhaustive K-NN and a
//! one-vs-rest linear SVM trained by stochastic subgradient descent.

mod knn;
mod persist;
mod standardize;
mod svm;

pub use knn::{knn_fit, KnnModel};
pub use persist::{load_model, Model};
pub use standardize::{fit_standardizer, Standardizer};
pub use svm::{
    hinge_objective, svm_train_binary, svm_train_ovr, BinarySvm, SvmModel, SvmTraining,
};

use crate::error::{Error, Result};

pub(crate) fn check_dimension(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Validation(format!(
            "dimension mismatch: model has {expected}, query has {got}"
        )));
    }
    Ok(())
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
