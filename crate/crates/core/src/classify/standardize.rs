use crate::error::{Error, Result};

/// Per-dimension z-scoring fitted on training data.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardizer {
    mean: Vec<f64>,
    std: Vec<f64>,
}

/// Population mean and standard deviation per dimension. Constant dimensions
/// get `std = 1`, so they map to 0.
pub fn fit_standardizer(train: &[Vec<f64>]) -> Result<Standardizer> {
    if train.len() < 2 {
        return Err(Error::Validation(format!(
            "standardizer needs at least 2 vectors, got {}",
            train.len()
        )));
    }
    let dim = train[0].len();
    if dim == 0 || train.iter().any(|v| v.len() != dim) {
        return Err(Error::Validation(
            "training vectors must share one non-zero dimension".into(),
        ));
    }
    let n = train.len() as f64;
    let mut mean = vec![0.0; dim];
    let mut std = vec![0.0; dim];
    for d in 0..dim {
        let first = train[0][d];
        if train.iter().all(|v| v[d] == first) {
            mean[d] = first;
            std[d] = 1.0;
            continue;
        }
        let m = train.iter().map(|v| v[d]).sum::<f64>() / n;
        let var = train.iter().map(|v| (v[d] - m) * (v[d] - m)).sum::<f64>() / n;
        mean[d] = m;
        std[d] = var.sqrt();
    }
    Ok(Standardizer { mean, std })
}

impl Standardizer {
    pub fn dimension(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        super::check_dimension(self.dimension(), x.len())?;
        Ok(x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect())
    }

    pub fn transform_all(&self, xs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        xs.iter().map(|x| self.transform(x)).collect()
    }
}
