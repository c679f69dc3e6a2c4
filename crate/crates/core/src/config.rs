//! Run configuration shared by every pipeline stage.
//!
//! Values are layered: defaults, then an optional `key=value` file, then
//! explicit overrides. Keys use the same kebab-case spelling as CLI flags.

use std::fmt;
use std::path::PathBuf;

use crate::bench::CellConfig;
use crate::error::{Error, Result};
use crate::shapegen::GenerationConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub images_per_class: usize,
    pub image_side: usize,
    pub gray_levels: usize,
    pub glcm_distance: usize,
    pub noise_sigma: f64,
    pub train_fraction: f64,
    pub knn_k: usize,
    pub svm_lambda: f64,
    pub svm_epochs: usize,
    pub output_dir: PathBuf,
    /// Worker threads; 1 runs sequentially, 0 uses every core.
    pub jobs: usize,
    /// Number of consecutive seeds swept, starting at `seed`.
    pub seeds: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            images_per_class: 1000,
            image_side: 64,
            gray_levels: 8,
            glcm_distance: 1,
            noise_sigma: 0.0,
            train_fraction: 0.9,
            knn_k: 3,
            svm_lambda: 0.01,
            svm_epochs: 100,
            output_dir: PathBuf::from("out"),
            jobs: 0,
            seeds: 1,
        }
    }
}

pub const KEYS: [&str; 13] = [
    "seed",
    "images-per-class",
    "image-side",
    "gray-levels",
    "glcm-distance",
    "noise-sigma",
    "train-fraction",
    "knn-k",
    "svm-lambda",
    "svm-epochs",
    "output-dir",
    "jobs",
    "seeds",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value {value:?} for {key}")))
}

impl RunConfig {
    /// Sets one field from its kebab-case (or snake_case) key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        match key.as_str() {
            "seed" => self.seed = parse(&key, value)?,
            "images-per-class" => self.images_per_class = parse(&key, value)?,
            "image-side" => self.image_side = parse(&key, value)?,
            "gray-levels" => self.gray_levels = parse(&key, value)?,
            "glcm-distance" => self.glcm_distance = parse(&key, value)?,
            "noise-sigma" => self.noise_sigma = parse(&key, value)?,
            "train-fraction" => self.train_fraction = parse(&key, value)?,
            "knn-k" => self.knn_k = parse(&key, value)?,
            "svm-lambda" => self.svm_lambda = parse(&key, value)?,
            "svm-epochs" => self.svm_epochs = parse(&key, value)?,
            "output-dir" => self.output_dir = PathBuf::from(value.trim()),
            "jobs" => self.jobs = parse(&key, value)?,
            "seeds" => self.seeds = parse(&key, value)?,
            _ => {
                return Err(Error::Config(format!(
                    "unknown key {key:?}; valid keys: {}",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Applies `key=value` lines; blank lines and `#` comments are skipped.
    pub fn apply_file_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("config line {}: expected key=value", n + 1))
            })?;
            self.set(key, value)
                .map_err(|e| Error::Config(format!("config line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.images_per_class < 10 {
            return fail(format!(
                "images-per-class must be >= 10, got {}",
                self.images_per_class
            ));
        }
        if self.image_side < 8 {
            return fail(format!("image-side must be >= 8, got {}", self.image_side));
        }
        if !(2..=256).contains(&self.gray_levels) {
            return fail(format!(
                "gray-levels must be in [2, 256], got {}",
                self.gray_levels
            ));
        }
        if self.glcm_distance == 0 || self.glcm_distance >= self.image_side {
            return fail(format!(
                "glcm-distance must be in [1, image-side), got {}",
                self.glcm_distance
            ));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return fail(format!("noise-sigma must be >= 0, got {}", self.noise_sigma));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return fail(format!(
                "train-fraction must be in (0, 1), got {}",
                self.train_fraction
            ));
        }
        if self.knn_k == 0 {
            return fail("knn-k must be >= 1".into());
        }
        if !(self.svm_lambda > 0.0 && self.svm_lambda.is_finite()) {
            return fail(format!("svm-lambda must be > 0, got {}", self.svm_lambda));
        }
        if self.svm_epochs == 0 {
            return fail("svm-epochs must be >= 1".into());
        }
        if self.seeds == 0 {
            return fail("seeds must be >= 1".into());
        }
        Ok(())
    }

    pub fn generation(&self) -> GenerationConfig {
        GenerationConfig {
            n_per_class: self.images_per_class,
            side: self.image_side,
            levels: self.gray_levels,
            noise_sigma: self.noise_sigma,
            seed: self.seed,
        }
    }

    pub fn cell(&self) -> CellConfig {
        CellConfig {
            distance: self.glcm_distance,
            knn_k: self.knn_k,
            svm_lambda: self.svm_lambda,
            svm_epochs: self.svm_epochs,
            seed: self.seed,
        }
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed={}", self.seed)?;
        writeln!(f, "images-per-class={}", self.images_per_class)?;
        writeln!(f, "image-side={}", self.image_side)?;
        writeln!(f, "gray-levels={}", self.gray_levels)?;
        writeln!(f, "glcm-distance={}", self.glcm_distance)?;
        writeln!(f, "noise-sigma={}", self.noise_sigma)?;
        writeln!(f, "train-fraction={}", self.train_fraction)?;
        writeln!(f, "knn-k={}", self.knn_k)?;
        writeln!(f, "svm-lambda={}", self.svm_lambda)?;
        writeln!(f, "svm-epochs={}", self.svm_epochs)?;
        writeln!(f, "output-dir={}", self.output_dir.display())?;
        writeln!(f, "jobs={}", self.jobs)?;
        write!(f, "seeds={}", self.seeds)
    }
}
