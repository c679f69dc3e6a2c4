//! Gray-level co-occurrence matrices and the five texture statistics
//! (energy, contrast, homogeneity, entropy, correlation) computed from them.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::imaging::GrayImage;

/// The four fixed co-occurrence directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Angle {
    Deg0,
    Deg45,
    Deg90,
    Deg135,
}

impl Angle {
    /// Ascending order; feature vectors are laid out in this order.
    pub const ALL: [Angle; 4] = [Angle::Deg0, Angle::Deg45, Angle::Deg90, Angle::Deg135];

    pub fn degrees(self) -> u32 {
        match self {
            Angle::Deg0 => 0,
            Angle::Deg45 => 45,
            Angle::Deg90 => 90,
            Angle::Deg135 => 135,
        }
    }

    /// Unit (row, column) step; rows grow downwards.
    fn unit_step(self) -> (isize, isize) {
        match self {
            Angle::Deg0 => (0, 1),
            Angle::Deg45 => (-1, 1),
            Angle::Deg90 => (-1, 0),
            Angle::Deg135 => (-1, -1),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.degrees())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AngleOffset {
    pub angle: Angle,
    pub dr: isize,
    pub dc: isize,
    pub distance: usize,
}

impl AngleOffset {
    pub fn new(angle: Angle, distance: usize) -> Self {
        let (ur, uc) = angle.unit_step();
        AngleOffset {
            angle,
            dr: ur * distance as isize,
            dc: uc * distance as isize,
            distance,
        }
    }

    /// In-bounds pixel pairs this offset visits on a `width x height` image.
    pub fn pair_count(&self, width: usize, height: usize) -> u64 {
        let rows = height.saturating_sub(self.dr.unsigned_abs());
        let cols = width.saturating_sub(self.dc.unsigned_abs());
        (rows * cols) as u64
    }
}

/// In-bounds pairs summed over all four angles at `distance`.
pub fn four_angle_pair_count(width: usize, height: usize, distance: usize) -> u64 {
    Angle::ALL
        .iter()
        .map(|&a| AngleOffset::new(a, distance).pair_count(width, height))
        .sum()
}

/// Symmetric, normalized co-occurrence matrix for one offset.
#[derive(Clone, Debug, PartialEq)]
pub struct GlcmMatrix {
    levels: usize,
    counts: Vec<u64>,
    probabilities: Vec<f64>,
    pair_count: u64,
}

impl GlcmMatrix {
    /// Builds a matrix from raw symmetric counts (row-major `levels x levels`).
    pub fn from_counts(levels: usize, counts: Vec<u64>, pair_count: u64) -> Result<Self> {
        if counts.len() != levels * levels {
            return Err(Error::Dimension(format!(
                "{} counts for {levels} levels",
                counts.len()
            )));
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::Validation("co-occurrence counts are all zero".into()));
        }
        let norm = total as f64;
        let probabilities = counts.iter().map(|&c| c as f64 / norm).collect();
        Ok(GlcmMatrix {
            levels,
            counts,
            probabilities,
            pair_count,
        })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Pixel pairs visited while counting; each contributes two symmetric counts.
    pub fn pair_count(&self) -> u64 {
        self.pair_count
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    #[inline]
    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.probabilities[i * self.levels + j]
    }

    fn cells(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let l = self.levels;
        self.probabilities
            .iter()
            .enumerate()
            .map(move |(k, &p)| (k / l, k % l, p))
    }
}

/// Counts every in-bounds `(p, p + offset)` pair and its transpose, then normalizes.
pub fn compute_glcm(image: &GrayImage, offset: AngleOffset) -> Result<GlcmMatrix> {
    let (w, h) = (image.width(), image.height());
    let pairs = offset.pair_count(w, h);
    if pairs == 0 {
        return Err(Error::EmptyPairs {
            dr: offset.dr,
            dc: offset.dc,
            width: w,
            height: h,
        });
    }
    let l = image.levels();
    let mut counts = vec![0u64; l * l];
    let px = image.pixels();

    let (dr, dc) = (offset.dr, offset.dc);
    let r0 = dr.min(0).unsigned_abs();
    let r1 = h - dr.max(0) as usize;
    let c0 = dc.min(0).unsigned_abs();
    let c1 = w - dc.max(0) as usize;
    for r in r0..r1 {
        let row = &px[r * w..(r + 1) * w];
        let nr = (r as isize + dr) as usize;
        let nrow = &px[nr * w..(nr + 1) * w];
        for c in c0..c1 {
            let a = row[c] as usize;
            let b = nrow[(c as isize + dc) as usize] as usize;
            counts[a * l + b] += 1;
            counts[b * l + a] += 1;
        }
    }
    GlcmMatrix::from_counts(l, counts, pairs)
}

/// Sum of squared probabilities.
pub fn energy(glcm: &GlcmMatrix) -> f64 {
    glcm.probabilities.iter().map(|p| p * p).sum()
}

pub fn contrast(glcm: &GlcmMatrix) -> f64 {
    glcm.cells()
        .map(|(i, j, p)| {
            let d = i as f64 - j as f64;
            d * d * p
        })
        .sum()
}

pub fn homogeneity(glcm: &GlcmMatrix) -> f64 {
    glcm.cells()
        .map(|(i, j, p)| {
            let d = i as f64 - j as f64;
            p / (1.0 + d * d)
        })
        .sum()
}

/// Natural-log entropy with `0 * ln 0 = 0`.
pub fn entropy(glcm: &GlcmMatrix) -> f64 {
    -glcm
        .probabilities
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GlcmMarginals {
    pub mu_x: f64,
    pub mu_y: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
}

pub fn marginals(glcm: &GlcmMatrix) -> GlcmMarginals {
    let l = glcm.levels;
    let mut px = vec![0.0; l];
    let mut py = vec![0.0; l];
    for (i, j, p) in glcm.cells() {
        px[i] += p;
        py[j] += p;
    }
    let moments = |m: &[f64]| {
        let mu: f64 = m.iter().enumerate().map(|(i, p)| i as f64 * p).sum();
        let var: f64 = m
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let d = i as f64 - mu;
                d * d * p
            })
            .sum();
        (mu, var.sqrt())
    };
    let (mu_x, sigma_x) = moments(&px);
    let (mu_y, sigma_y) = moments(&py);
    GlcmMarginals {
        mu_x,
        mu_y,
        sigma_x,
        sigma_y,
    }
}

/// Below this `sigma_x * sigma_y` the correlation is reported as 0.
const DEGENERATE_SIGMA_PRODUCT: f64 = 1e-12;

/// Index correlation, clamped to `[-1, 1]`; 0 when either marginal has no spread.
pub fn correlation(glcm: &GlcmMatrix) -> f64 {
    let m = marginals(glcm);
    let denom = m.sigma_x * m.sigma_y;
    if denom <= DEGENERATE_SIGMA_PRODUCT {
        return 0.0;
    }
    let cross: f64 = glcm.cells().map(|(i, j, p)| (i * j) as f64 * p).sum();
    ((cross - m.mu_x * m.mu_y) / denom).clamp(-1.0, 1.0)
}

/// The five statistics, in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureKind {
    Energy,
    Contrast,
    Homogeneity,
    Entropy,
    Correlation,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 5] = [
        FeatureKind::Energy,
        FeatureKind::Contrast,
        FeatureKind::Homogeneity,
        FeatureKind::Entropy,
        FeatureKind::Correlation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Energy => "energy",
            FeatureKind::Contrast => "contrast",
            FeatureKind::Homogeneity => "homogeneity",
            FeatureKind::Entropy => "entropy",
            FeatureKind::Correlation => "correlation",
        }
    }

    pub fn evaluate(self, glcm: &GlcmMatrix) -> f64 {
        match self {
            FeatureKind::Energy => energy(glcm),
            FeatureKind::Contrast => contrast(glcm),
            FeatureKind::Homogeneity => homogeneity(glcm),
            FeatureKind::Entropy => entropy(glcm),
            FeatureKind::Correlation => correlation(glcm),
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let valid: Vec<_> = FeatureKind::ALL.iter().map(|k| k.name()).collect();
                Error::Usage(format!(
                    "unknown feature {s:?}; valid names: {}",
                    valid.join(", ")
                ))
            })
    }
}

/// Two or three distinct features, stored in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureCombo(Vec<FeatureKind>);

impl FeatureCombo {
    pub fn new(features: &[FeatureKind]) -> Result<Self> {
        let mut members = features.to_vec();
        members.sort();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Usage(format!(
                "duplicate feature in combination {}",
                features
                    .iter()
                    .map(|k| k.name())
                    .collect::<Vec<_>>()
                    .join("+")
            )));
        }
        if !(2..=3).contains(&members.len()) {
            return Err(Error::Usage(format!(
                "a combination has 2 or 3 features, got {}",
                members.len()
            )));
        }
        Ok(FeatureCombo(members))
    }

    pub fn features(&self) -> &[FeatureKind] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Length of the extracted vector: one slot per (angle, feature).
    pub fn dimension(&self) -> usize {
        Angle::ALL.len() * self.0.len()
    }

    /// Column names `<feature>_<angle>` in vector order.
    pub fn column_names(&self) -> Vec<String> {
        Angle::ALL
            .iter()
            .flat_map(|a| self.0.iter().map(move |k| format!("{k}_{a}")))
            .collect()
    }
}

impl fmt::Display for FeatureCombo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            f.write_str(k.name())?;
        }
        Ok(())
    }
}

impl FromStr for FeatureCombo {
    type Err = Error;

    /// Parses `name+name(+name)`, case-insensitively, in any order.
    fn from_str(s: &str) -> Result<Self> {
        let kinds = s
            .split('+')
            .map(|t| t.trim().to_ascii_lowercase().parse())
            .collect::<Result<Vec<FeatureKind>>>()?;
        FeatureCombo::new(&kinds)
    }
}

/// All 10 pairs then all 10 triples, lexicographic by canonical index.
pub fn enumerate_combos() -> Vec<FeatureCombo> {
    let all = FeatureKind::ALL;
    let n = all.len();
    let mut combos = Vec::with_capacity(20);
    for a in 0..n {
        for b in a + 1..n {
            combos.push(FeatureCombo(vec![all[a], all[b]]));
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                combos.push(FeatureCombo(vec![all[a], all[b], all[c]]));
            }
        }
    }
    combos
}

/// Extracted values ordered by angle, then feature.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub combo: FeatureCombo,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    /// Value of `feature` at `angle`, if the feature belongs to the combo.
    pub fn get(&self, angle: Angle, feature: FeatureKind) -> Option<f64> {
        let pos = self.combo.0.iter().position(|&k| k == feature)?;
        Some(self.values[angle.index() * self.combo.len() + pos])
    }
}

/// Builds one GLCM per angle and evaluates the combo on each.
///
/// Returns the vector together with the number of pixel pairs visited.
pub fn extract_features_counted(
    image: &GrayImage,
    combo: &FeatureCombo,
    distance: usize,
) -> Result<(FeatureVector, u64)> {
    let mut values = Vec::with_capacity(combo.dimension());
    let mut ops = 0;
    for angle in Angle::ALL {
        let glcm = compute_glcm(image, AngleOffset::new(angle, distance))?;
        ops += glcm.pair_count();
        values.extend(combo.0.iter().map(|k| k.evaluate(&glcm)));
    }
    Ok((
        FeatureVector {
            combo: combo.clone(),
            values,
        },
        ops,
    ))
}

pub fn extract_features(
    image: &GrayImage,
    combo: &FeatureCombo,
    distance: usize,
) -> Result<FeatureVector> {
    extract_features_counted(image, combo, distance).map(|(v, _)| v)
}

/// Scientific notation with 17 significant digits; parses back to the same `f64`.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `sample_index,label,<feature>_<angle>...` rows.
pub fn write_feature_csv<W: Write>(
    mut out: W,
    combo: &FeatureCombo,
    rows: &[(usize, u8, FeatureVector)],
) -> std::io::Result<()> {
    let mut header = vec!["sample_index".to_string(), "label".to_string()];
    header.extend(combo.column_names());
    writeln!(out, "{}", header.join(","))?;
    for (index, label, vector) in rows {
        write!(out, "{index},{label}")?;
        for v in &vector.values {
            write!(out, ",{}", fmt17(*v))?;
        }
        writeln!(out)?;
    }
    Ok(())
}
