use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Execution;

use super::{check_dimension, dot};

/// A single separating hyperplane `w . x + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinarySvm {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl BinarySvm {
    pub fn decision(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }
}

/// `lambda / 2 * |w|^2 + mean(max(0, 1 - y (w . x + b)))`.
pub fn hinge_objective(model: &BinarySvm, xs: &[Vec<f64>], ys: &[i8], lambda: f64) -> f64 {
    let reg = 0.5 * lambda * dot(&model.weights, &model.weights);
    let loss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| (1.0 - y as f64 * model.decision(x)).max(0.0))
        .sum();
    reg + loss / xs.len() as f64
}

/// Primal stochastic subgradient descent on the regularized hinge loss with
/// step `1 / (lambda * t)`, one seeded pass order per epoch. Returns the
/// average of all iterates.
pub fn svm_train_binary(
    xs: &[Vec<f64>],
    ys: &[i8],
    lambda: f64,
    epochs: usize,
    seed: u64,
) -> Result<BinarySvm> {
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(Error::Validation(format!(
            "{} vectors but {} labels",
            xs.len(),
            ys.len()
        )));
    }
    if ys.iter().any(|&y| y != 1 && y != -1) {
        return Err(Error::Validation("binary labels must be -1 or +1".into()));
    }
    if !ys.contains(&1) || !ys.contains(&-1) {
        return Err(Error::DegenerateTraining(
            "binary training needs both +1 and -1 samples".into(),
        ));
    }
    if epochs == 0 {
        return Err(Error::Config("epochs must be at least 1".into()));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Config(format!("lambda must be positive, got {lambda}")));
    }
    let dim = xs[0].len();
    if xs.iter().any(|x| x.len() != dim) {
        return Err(Error::Validation("training vectors differ in dimension".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut w_sum = vec![0.0; dim];
    let mut b_sum = 0.0;
    let mut t = 0u64;
    for _ in 0..epochs {
        for i in (1..order.len()).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let (x, y) = (&xs[i], ys[i] as f64);
            let margin = y * (dot(&w, x) + b);
            let shrink = 1.0 - eta * lambda;
            if margin < 1.0 {
                for (wj, xj) in w.iter_mut().zip(x) {
                    *wj = shrink * *wj + eta * y * xj;
                }
                b += eta * y;
            } else {
                w.iter_mut().for_each(|wj| *wj *= shrink);
            }
            for (s, wj) in w_sum.iter_mut().zip(&w) {
                *s += wj;
            }
            b_sum += b;
        }
    }
    let n = t as f64;
    Ok(BinarySvm {
        weights: w_sum.into_iter().map(|s| s / n).collect(),
        bias: b_sum / n,
    })
}

/// Epoch count and seed a model was trained with; absent after reloading.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SvmTraining {
    pub epochs: usize,
    pub seed: u64,
}

/// One-vs-rest linear SVM, one hyperplane per class in label order.
#[derive(Clone, Debug, PartialEq)]
pub struct SvmModel {
    pub(crate) planes: Vec<BinarySvm>,
    pub(crate) lambda: f64,
    pub(crate) training: Option<SvmTraining>,
}

/// SplitMix64 finalizer over `(seed, class)`.
fn class_seed(seed: u64, class: usize) -> u64 {
    let mut z = seed ^ (class as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn svm_train_ovr(
    xs: &[Vec<f64>],
    labels: &[u8],
    n_classes: usize,
    lambda: f64,
    epochs: usize,
    seed: u64,
    exec: Execution,
) -> Result<SvmModel> {
    if n_classes < 2 {
        return Err(Error::Validation(format!(
            "one-vs-rest needs at least 2 classes, got {n_classes}"
        )));
    }
    for c in 0..n_classes {
        if !labels.iter().any(|&l| l as usize == c) {
            return Err(Error::Validation(format!("class {c} missing from training set")));
        }
    }
    if let Some(&l) = labels.iter().find(|&&l| l as usize >= n_classes) {
        return Err(Error::Validation(format!(
            "label {l} outside {n_classes} classes"
        )));
    }
    let planes = exec.try_map_range(n_classes, |c| {
        let ys: Vec<i8> = labels
            .iter()
            .map(|&l| if l as usize == c { 1 } else { -1 })
            .collect();
        svm_train_binary(xs, &ys, lambda, epochs, class_seed(seed, c))
    })?;
    Ok(SvmModel {
        planes,
        lambda,
        training: Some(SvmTraining { epochs, seed }),
    })
}

impl SvmModel {
    pub fn from_planes(planes: Vec<BinarySvm>, lambda: f64) -> Result<Self> {
        let dim = planes.first().map(|p| p.weights.len()).unwrap_or(0);
        if planes.is_empty() || planes.iter().any(|p| p.weights.len() != dim) {
            return Err(Error::Validation(
                "SVM needs at least one plane, all of one dimension".into(),
            ));
        }
        Ok(SvmModel {
            planes,
            lambda,
            training: None,
        })
    }

    pub fn planes(&self) -> &[BinarySvm] {
        &self.planes
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn training(&self) -> Option<SvmTraining> {
        self.training
    }

    pub fn n_classes(&self) -> usize {
        self.planes.len()
    }

    pub fn dimension(&self) -> usize {
        self.planes[0].weights.len()
    }

    /// Class with the largest decision value; ties go to the lower label.
    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        check_dimension(self.dimension(), x.len())?;
        let mut best = 0;
        let mut best_score = self.planes[0].decision(x);
        for (c, plane) in self.planes.iter().enumerate().skip(1) {
            let score = plane.decision(x);
            if score > best_score {
                best = c;
                best_score = score;
            }
        }
        Ok(best as u8)
    }

    pub fn predict_batch(&self, queries: &[Vec<f64>], exec: Execution) -> Result<Vec<u8>> {
        exec.try_map_range(queries.len(), |i| self.predict(&queries[i]))
    }
}
