//! Seeded synthetic dataset of filled triangles, squares and circles.
//!
//! Sample `k` is rendered from its own ChaCha stream `(seed, k)`, so images can
//! be generated in any order (or in parallel) with identical output.

use std::f64::consts::TAU;
use std::fmt;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::imaging::{preprocess, read_pgm, write_pgm, GrayImage};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShapeClass {
    Triangle = 0,
    Square = 1,
    Circle = 2,
}

impl ShapeClass {
    pub const ALL: [ShapeClass; 3] = [ShapeClass::Triangle, ShapeClass::Square, ShapeClass::Circle];
    pub const COUNT: usize = 3;

    pub fn label(self) -> u8 {
        self as u8
    }

    pub fn from_label(label: u8) -> Option<Self> {
        ShapeClass::ALL.get(label as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ShapeClass::Triangle => "triangle",
            ShapeClass::Square => "square",
            ShapeClass::Circle => "circle",
        }
    }
}

impl fmt::Display for ShapeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub const SCALE_RANGE: (f64, f64) = (0.3, 0.9);
pub const CENTER_RANGE: (f64, f64) = (0.35, 0.65);

/// Geometry and shading of one rendered shape.
///
/// `scale` is the diameter of the shape's circumscribed circle as a fraction
/// of the image side; the circle itself is the disk of that diameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapeParams {
    pub class: ShapeClass,
    pub rotation: f64,
    pub scale: f64,
    pub center_x: f64,
    pub center_y: f64,
    pub foreground: u16,
    pub background: u16,
    pub noise_sigma: f64,
}

impl ShapeParams {
    pub fn validate(&self, levels: usize) -> Result<()> {
        let fail = |msg: String| Err(Error::Validation(msg));
        if !(0.0..TAU).contains(&self.rotation) {
            return fail(format!("rotation {} outside [0, 2pi)", self.rotation));
        }
        if !(SCALE_RANGE.0..=SCALE_RANGE.1).contains(&self.scale) {
            return fail(format!("scale {} outside [0.3, 0.9]", self.scale));
        }
        for c in [self.center_x, self.center_y] {
            if !(CENTER_RANGE.0..=CENTER_RANGE.1).contains(&c) {
                return fail(format!("center {c} outside [0.35, 0.65]"));
            }
        }
        let radius = self.scale / 2.0;
        for c in [self.center_x, self.center_y] {
            if c - radius < 0.0 || c + radius > 1.0 {
                return fail(format!(
                    "scale {} at center {c} leaves the image under rotation",
                    self.scale
                ));
            }
        }
        if self.foreground == self.background {
            return fail("foreground equals background".into());
        }
        if self.foreground as usize >= levels || self.background as usize >= levels {
            return fail(format!(
                "foreground/background ({}, {}) must be below {levels}",
                self.foreground, self.background
            ));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return fail(format!("noise sigma {} must be >= 0", self.noise_sigma));
        }
        Ok(())
    }

    /// Point-in-shape test on a point relative to the shape center, in pixels.
    fn contains(&self, dx: f64, dy: f64, radius: f64) -> bool {
        if self.class == ShapeClass::Circle {
            // rotation-free so that every rotation renders identically
            return dx * dx + dy * dy <= radius * radius;
        }
        let (s, c) = self.rotation.sin_cos();
        let lx = c * dx + s * dy;
        let ly = -s * dx + c * dy;
        match self.class {
            ShapeClass::Square => {
                let half = radius / 2f64.sqrt();
                lx.abs() <= half && ly.abs() <= half
            }
            ShapeClass::Triangle => {
                // apex up (negative y), base at y = radius / 2
                let half_base = radius * 3f64.sqrt() / 2.0;
                let verts = [
                    (0.0, -radius),
                    (half_base, radius / 2.0),
                    (-half_base, radius / 2.0),
                ];
                (0..3).all(|i| {
                    let (ax, ay) = verts[i];
                    let (bx, by) = verts[(i + 1) % 3];
                    (bx - ax) * (ly - ay) - (by - ay) * (lx - ax) >= 0.0
                })
            }
            ShapeClass::Circle => unreachable!(),
        }
    }
}

/// Default `(foreground, background)` levels: interior values so noise clamps symmetrically.
pub fn default_shading(levels: usize) -> (u16, u16) {
    let bg = levels / 8;
    ((levels - 1 - bg) as u16, bg as u16)
}

/// Rasterizes `params` by sampling pixel centers; `rng` is consumed only for noise.
pub fn render_shape<R: Rng + ?Sized>(
    params: &ShapeParams,
    side: usize,
    levels: usize,
    rng: &mut R,
) -> Result<GrayImage> {
    if side < 8 {
        return Err(Error::Validation(format!("image side must be >= 8, got {side}")));
    }
    params.validate(levels)?;
    let sidef = side as f64;
    let (cx, cy) = (params.center_x * sidef, params.center_y * sidef);
    let radius = params.scale * sidef / 2.0;
    let mut image = GrayImage::from_fn(side, side, levels, |r, c| {
        let dx = c as f64 + 0.5 - cx;
        let dy = r as f64 + 0.5 - cy;
        if params.contains(dx, dy, radius) {
            params.foreground
        } else {
            params.background
        }
    })?;
    if params.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, params.noise_sigma)
            .map_err(|e| Error::Validation(e.to_string()))?;
        let max = (levels - 1) as f64;
        let noisy: Vec<u16> = image
            .pixels()
            .iter()
            .map(|&v| (v as f64 + normal.sample(rng)).round().clamp(0.0, max) as u16)
            .collect();
        image = GrayImage::new(side, side, levels, noisy)?;
    }
    Ok(image)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenerationConfig {
    pub n_per_class: usize,
    pub side: usize,
    pub levels: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub image: GrayImage,
    pub class: ShapeClass,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    pub samples: Vec<Sample>,
    pub split: Option<Split>,
    pub seed: u64,
    pub config: GenerationConfig,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.samples.iter().map(|s| s.class.label()).collect()
    }

    pub fn split(&self) -> Result<&Split> {
        self.split
            .as_ref()
            .ok_or_else(|| Error::Validation("dataset has no train/test split".into()))
    }

    /// PGM file name for sample `index`.
    pub fn file_name(&self, index: usize) -> String {
        format!("{}_{index:05}.pgm", self.samples[index].class)
    }
}

fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Class of sample `index`: classes are interleaved.
pub fn class_of(index: usize) -> ShapeClass {
    ShapeClass::ALL[index % ShapeClass::COUNT]
}

/// Draws the geometry for sample `index` from its dedicated stream.
pub fn draw_params<R: Rng + ?Sized>(
    class: ShapeClass,
    levels: usize,
    noise_sigma: f64,
    rng: &mut R,
) -> ShapeParams {
    let rotation = rng.random_range(0.0..TAU);
    let scale = rng.random_range(SCALE_RANGE.0..=SCALE_RANGE.1);
    let radius = scale / 2.0;
    let lo = CENTER_RANGE.0.max(radius);
    let hi = CENTER_RANGE.1.min(1.0 - radius);
    let center_x = rng.random_range(lo..=hi);
    let center_y = rng.random_range(lo..=hi);
    let (foreground, background) = default_shading(levels);
    ShapeParams {
        class,
        rotation,
        scale,
        center_x,
        center_y,
        foreground,
        background,
        noise_sigma,
    }
}

pub fn generate_dataset(config: GenerationConfig, exec: Execution) -> Result<LabeledDataset> {
    if config.n_per_class < 10 {
        return Err(Error::Validation(format!(
            "need at least 10 images per class, got {}",
            config.n_per_class
        )));
    }
    if config.levels < 2 || config.levels > 256 {
        return Err(Error::Range(format!(
            "levels must be in [2, 256], got {}",
            config.levels
        )));
    }
    let n = config.n_per_class * ShapeClass::COUNT;
    let samples = exec.try_map_range(n, |k| {
        let mut rng = sample_rng(config.seed, k);
        let class = class_of(k);
        let params = draw_params(class, config.levels, config.noise_sigma, &mut rng);
        let image = render_shape(&params, config.side, config.levels, &mut rng)?;
        Ok::<_, Error>(Sample { image, class })
    })?;
    Ok(LabeledDataset {
        samples,
        split: None,
        seed: config.seed,
        config,
    })
}

const SPLIT_STREAM_TAG: u64 = 0x5EED_5B11_7000_0000;

/// Stratified split: each class is shuffled and its first
/// `round(fraction * size)` members (kept within `[1, size - 1]`) go to train.
pub fn split_dataset(
    mut dataset: LabeledDataset,
    train_fraction: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Range(format!(
            "train fraction {train_fraction} outside (0, 1)"
        )));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in ShapeClass::ALL {
        let mut members: Vec<usize> = (0..dataset.len())
            .filter(|&i| dataset.samples[i].class == class)
            .collect();
        if members.len() < 2 {
            return Err(Error::Validation(format!(
                "class {class} has {} samples; stratification needs at least 2",
                members.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(SPLIT_STREAM_TAG | class.label() as u64);
        // Fisher-Yates
        for i in (1..members.len()).rev() {
            let j = rng.random_range(0..=i);
            members.swap(i, j);
        }
        let n_train = ((train_fraction * members.len() as f64).round() as usize)
            .clamp(1, members.len() - 1);
        train.extend_from_slice(&members[..n_train]);
        test.extend_from_slice(&members[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    dataset.split = Some(Split { train, test });
    Ok(dataset)
}

pub const MANIFEST_NAME: &str = "manifest.csv";

/// Writes `<class>_<index>.pgm` files plus `manifest.csv` (`filename,label,split`).
pub fn write_dataset(dataset: &LabeledDataset, dir: &Path) -> Result<()> {
    let split = dataset.split()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut in_train = vec![false; dataset.len()];
    for &i in &split.train {
        in_train[i] = true;
    }
    let mut manifest = String::from("filename,label,split\n");
    for (i, sample) in dataset.samples.iter().enumerate() {
        let name = dataset.file_name(i);
        let path = dir.join(&name);
        fs::write(&path, write_pgm(&sample.image)?).map_err(|e| Error::io(&path, e))?;
        let which = if in_train[i] { "train" } else { "test" };
        manifest.push_str(&format!("{name},{},{which}\n", sample.class.label()));
    }
    let path = dir.join(MANIFEST_NAME);
    fs::write(&path, manifest).map_err(|e| Error::io(&path, e))
}

/// Loads a dataset directory, resizing to `side x side` and quantizing to `levels`.
pub fn read_dataset(dir: &Path, side: usize, levels: usize, seed: u64) -> Result<LabeledDataset> {
    let path = dir.join(MANIFEST_NAME);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some("filename,label,split") => {}
        other => {
            return Err(Error::Validation(format!(
                "{}: bad manifest header {other:?}",
                path.display()
            )))
        }
    }
    let mut samples = Vec::new();
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (lineno, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let bad = |what: &str| {
            Error::Validation(format!("{}:{}: {what}", path.display(), lineno + 2))
        };
        let fields: Vec<&str> = line.split(',').collect();
        let [name, label, which] = fields[..] else {
            return Err(bad("expected filename,label,split"));
        };
        let class = label
            .parse::<u8>()
            .ok()
            .and_then(ShapeClass::from_label)
            .ok_or_else(|| bad(&format!("bad label {label:?}")))?;
        match which {
            "train" => train.push(samples.len()),
            "test" => test.push(samples.len()),
            _ => return Err(bad(&format!("bad split {which:?}"))),
        }
        let img_path = dir.join(name);
        let bytes = fs::read(&img_path).map_err(|e| Error::io(&img_path, e))?;
        let image = read_pgm(&bytes)
            .and_then(|img| preprocess(&img, side, levels))
            .map_err(|e| Error::Validation(format!("{}: {e}", img_path.display())))?;
        samples.push(Sample { image, class });
    }
    let mut per_class = [0usize; ShapeClass::COUNT];
    for s in &samples {
        per_class[s.class.label() as usize] += 1;
    }
    let n_per_class = per_class.iter().copied().min().unwrap_or(0);
    Ok(LabeledDataset {
        samples,
        split: Some(Split { train, test }),
        seed,
        config: GenerationConfig {
            n_per_class,
            side,
            levels,
            noise_sigma: 0.0,
            seed,
        },
    })
}
