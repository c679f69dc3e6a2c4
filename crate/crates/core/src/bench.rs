//! Accuracy-versus-cost sweep over every feature combination and both
//! classifiers, plus an empirical scaling probe for GLCM construction.

use std::fmt;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classify::{fit_standardizer, knn_fit, svm_train_ovr, Standardizer};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::glcm::{
    compute_glcm, enumerate_combos, extract_features_counted, four_angle_pair_count, Angle,
    AngleOffset, FeatureCombo,
};
use crate::imaging::GrayImage;
use crate::shapegen::{LabeledDataset, ShapeClass};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassifierKind {
    Knn,
    Svm,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 2] = [ClassifierKind::Knn, ClassifierKind::Svm];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Knn => "knn",
            ClassifierKind::Svm => "svm",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-cell knobs. `seed` drives the SVM pass order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellConfig {
    pub distance: usize,
    pub knn_k: usize,
    pub svm_lambda: f64,
    pub svm_epochs: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchResult {
    pub classifier: ClassifierKind,
    pub combo: FeatureCombo,
    pub accuracy: f64,
    pub n_correct: usize,
    pub extract_ms: f64,
    pub train_ms: f64,
    pub predict_ms: f64,
    pub glcm_cell_ops: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
}

impl BenchResult {
    pub fn cell_name(&self) -> String {
        cell_name(self.classifier, &self.combo)
    }

    pub fn total_ms(&self) -> f64 {
        self.extract_ms + self.train_ms + self.predict_ms
    }

    /// Cost used for ranking: extraction plus prediction.
    pub fn inference_ms(&self) -> f64 {
        self.extract_ms + self.predict_ms
    }
}

fn cell_name(classifier: ClassifierKind, combo: &FeatureCombo) -> String {
    format!("{classifier} {combo}")
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn run_cell_inner(
    dataset: &LabeledDataset,
    combo: &FeatureCombo,
    classifier: ClassifierKind,
    config: &CellConfig,
) -> Result<BenchResult> {
    let split = dataset.split()?;
    if split.train.is_empty() || split.test.is_empty() {
        return Err(Error::Validation("train and test splits must be non-empty".into()));
    }

    let start = Instant::now();
    let mut features = Vec::with_capacity(dataset.len());
    let mut ops = 0u64;
    for sample in &dataset.samples {
        let (v, n) = extract_features_counted(&sample.image, combo, config.distance)?;
        features.push(v.values);
        ops += n;
    }
    let extract_ms = elapsed_ms(start);

    let labels = dataset.labels();
    let gather = |idx: &[usize]| -> Vec<Vec<f64>> {
        idx.iter().map(|&i| features[i].clone()).collect()
    };
    let train_x = gather(&split.train);
    let test_x = gather(&split.test);
    let train_y: Vec<u8> = split.train.iter().map(|&i| labels[i]).collect();
    let test_y: Vec<u8> = split.test.iter().map(|&i| labels[i]).collect();

    enum Fitted {
        Knn(crate::classify::KnnModel),
        Svm(crate::classify::SvmModel),
    }

    let start = Instant::now();
    let standardizer: Standardizer = fit_standardizer(&train_x)?;
    let train_z = standardizer.transform_all(&train_x)?;
    let model = match classifier {
        ClassifierKind::Knn => Fitted::Knn(knn_fit(train_z, train_y, config.knn_k)?),
        ClassifierKind::Svm => Fitted::Svm(svm_train_ovr(
            &train_z,
            &train_y,
            ShapeClass::COUNT,
            config.svm_lambda,
            config.svm_epochs,
            config.seed,
            Execution::Sequential,
        )?),
    };
    let train_ms = elapsed_ms(start);

    let start = Instant::now();
    let test_z = standardizer.transform_all(&test_x)?;
    let predicted = match &model {
        Fitted::Knn(m) => m.predict_batch(&test_z, Execution::Sequential)?,
        Fitted::Svm(m) => m.predict_batch(&test_z, Execution::Sequential)?,
    };
    let predict_ms = elapsed_ms(start);

    let n_correct = predicted.iter().zip(&test_y).filter(|(p, y)| p == y).count();
    Ok(BenchResult {
        classifier,
        combo: combo.clone(),
        accuracy: n_correct as f64 / test_y.len() as f64,
        n_correct,
        extract_ms,
        train_ms,
        predict_ms,
        glcm_cell_ops: ops,
        n_train: split.train.len(),
        n_test: split.test.len(),
        seed: config.seed,
    })
}

/// Extracts, trains and predicts one (combo, classifier) cell on a single thread.
pub fn run_cell(
    dataset: &LabeledDataset,
    combo: &FeatureCombo,
    classifier: ClassifierKind,
    config: &CellConfig,
) -> Result<BenchResult> {
    run_cell_inner(dataset, combo, classifier, config).map_err(|e| Error::Cell {
        cell: cell_name(classifier, combo),
        source: Box::new(e),
    })
}

/// Mean accuracy of one (classifier, combo size) group.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupMean {
    pub classifier: ClassifierKind,
    pub combo_size: usize,
    pub mean_accuracy: f64,
    pub cells: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSummary {
    pub results: Vec<BenchResult>,
    pub means: Vec<GroupMean>,
}

impl SweepSummary {
    /// Groups `results` by classifier (K-NN first) then combo size.
    pub fn from_results(results: Vec<BenchResult>) -> Self {
        let mut means = Vec::new();
        for classifier in ClassifierKind::ALL {
            for size in [2, 3] {
                let accs: Vec<f64> = results
                    .iter()
                    .filter(|r| r.classifier == classifier && r.combo.len() == size)
                    .map(|r| r.accuracy)
                    .collect();
                if accs.is_empty() {
                    continue;
                }
                means.push(GroupMean {
                    classifier,
                    combo_size: size,
                    mean_accuracy: accs.iter().sum::<f64>() / accs.len() as f64,
                    cells: accs.len(),
                });
            }
        }
        SweepSummary { results, means }
    }

    pub fn mean(&self, classifier: ClassifierKind, combo_size: usize) -> Option<f64> {
        self.means
            .iter()
            .find(|m| m.classifier == classifier && m.combo_size == combo_size)
            .map(|m| m.mean_accuracy)
    }

    pub fn find(&self, classifier: ClassifierKind, combo: &FeatureCombo) -> Option<&BenchResult> {
        self.results
            .iter()
            .find(|r| r.classifier == classifier && &r.combo == combo)
    }

    /// Results sorted by accuracy (descending), then extract+predict time
    /// (ascending); fully tied cells keep sweep order.
    pub fn ranking(&self) -> Vec<&BenchResult> {
        let mut ranked: Vec<&BenchResult> = self.results.iter().collect();
        ranked.sort_by(|a, b| {
            b.accuracy
                .total_cmp(&a.accuracy)
                .then(a.inference_ms().total_cmp(&b.inference_ms()))
        });
        ranked
    }
}

/// All 20 combos x {K-NN, SVM}, in combo order with K-NN first. Cells may run
/// concurrently; each cell itself is single-threaded.
pub fn sweep(dataset: &LabeledDataset, config: &CellConfig, exec: Execution) -> Result<SweepSummary> {
    let cells: Vec<(FeatureCombo, ClassifierKind)> = enumerate_combos()
        .into_iter()
        .flat_map(|c| ClassifierKind::ALL.map(|k| (c.clone(), k)))
        .collect();
    let results = exec.try_map_range(cells.len(), |i| {
        let (combo, kind) = &cells[i];
        run_cell(dataset, combo, *kind, config)
    })?;
    Ok(SweepSummary::from_results(results))
}

/// Sweeps once per seed and pools every cell into one summary.
pub fn sweep_seeds(
    dataset: &LabeledDataset,
    config: &CellConfig,
    seeds: &[u64],
    exec: Execution,
) -> Result<SweepSummary> {
    let mut results = Vec::with_capacity(40 * seeds.len());
    for &seed in seeds {
        let cfg = CellConfig { seed, ..*config };
        results.extend(sweep(dataset, &cfg, exec)?.results);
    }
    Ok(SweepSummary::from_results(results))
}

pub const CELL_CSV_HEADER: &str =
    "classifier,combo_size,combo,n_train,n_test,accuracy,extract_ms,train_ms,predict_ms,glcm_cell_ops,seed";
pub const SUMMARY_CSV_HEADER: &str = "classifier,combo_size,mean_accuracy,cells";
pub const PROBE_CSV_HEADER: &str = "side,median_ms,cell_ops";

pub fn cells_csv(summary: &SweepSummary) -> String {
    let mut out = String::from(CELL_CSV_HEADER);
    out.push('\n');
    for r in &summary.results {
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.6},{:.6},{:.6},{},{}\n",
            r.classifier,
            r.combo.len(),
            r.combo,
            r.n_train,
            r.n_test,
            r.accuracy,
            r.extract_ms,
            r.train_ms,
            r.predict_ms,
            r.glcm_cell_ops,
            r.seed
        ));
    }
    out
}

pub fn summary_csv(summary: &SweepSummary) -> String {
    let mut out = String::from(SUMMARY_CSV_HEADER);
    out.push('\n');
    for m in &summary.means {
        out.push_str(&format!(
            "{},{},{},{}\n",
            m.classifier, m.combo_size, m.mean_accuracy, m.cells
        ));
    }
    out
}

pub fn ranking_text(summary: &SweepSummary) -> String {
    let mut out = String::from(
        "rank  classifier  combo                                 accuracy  extract+predict_ms  train_ms\n",
    );
    for (i, r) in summary.ranking().iter().enumerate() {
        out.push_str(&format!(
            "{:>4}  {:<10}  {:<36}  {:>8.4}  {:>18.3}  {:>8.3}\n",
            i + 1,
            r.classifier.name(),
            r.combo.to_string(),
            r.accuracy,
            r.inference_ms(),
            r.train_ms
        ));
    }
    out.push('\n');
    for m in &summary.means {
        out.push_str(&format!(
            "mean accuracy {} {}-feature: {:.4} over {} cells\n",
            m.classifier, m.combo_size, m.mean_accuracy, m.cells
        ));
    }
    out
}

pub const CELLS_FILE: &str = "cells.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const RANKING_FILE: &str = "ranking.txt";

/// Writes `cells.csv`, `summary.csv` and `ranking.txt` into `dir`.
pub fn emit_report(summary: &SweepSummary, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, body) in [
        (CELLS_FILE, cells_csv(summary)),
        (SUMMARY_FILE, summary_csv(summary)),
        (RANKING_FILE, ranking_text(summary)),
    ] {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeRow {
    pub side: usize,
    pub pixels: usize,
    pub median_ms: f64,
    pub cell_ops: u64,
}

/// Builds per trial; each trial's time is divided back down to one build.
const BUILDS_PER_TRIAL: usize = 8;

fn random_image(side: usize, levels: usize, rng: &mut ChaCha8Rng) -> Result<GrayImage> {
    GrayImage::from_fn(side, side, levels, |_, _| rng.random_range(0..levels) as u16)
}

fn build_all_angles(image: &GrayImage, distance: usize) -> Result<u64> {
    let mut ops = 0;
    for angle in Angle::ALL {
        ops += compute_glcm(image, AngleOffset::new(angle, distance))?.pair_count();
    }
    Ok(ops)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Times four-angle GLCM construction on random `side x side` images.
///
/// One warm-up build per side is discarded. `cell_ops` is the counted number
/// of pixel pairs visited by a single four-angle build.
pub fn complexity_probe(
    sides: &[usize],
    levels: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<ProbeRow>> {
    if sides.len() < 3 {
        return Err(Error::Usage(format!(
            "complexity probe needs at least 3 side lengths, got {}",
            sides.len()
        )));
    }
    if let Some(s) = sides.iter().find(|&&s| s < 16) {
        return Err(Error::Usage(format!("side lengths must be >= 16, got {s}")));
    }
    if trials < 5 {
        return Err(Error::Usage(format!("need at least 5 trials, got {trials}")));
    }
    if !(2..=256).contains(&levels) {
        return Err(Error::Range(format!("levels must be in [2, 256], got {levels}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(sides.len());
    for &side in sides {
        let image = random_image(side, levels, &mut rng)?;
        let ops = build_all_angles(&image, 1)?;
        let mut times = Vec::with_capacity(trials);
        for _ in 0..trials {
            let start = Instant::now();
            for _ in 0..BUILDS_PER_TRIAL {
                let counted = build_all_angles(std::hint::black_box(&image), 1)?;
                debug_assert_eq!(counted, ops);
            }
            times.push(elapsed_ms(start) / BUILDS_PER_TRIAL as f64);
        }
        rows.push(ProbeRow {
            side,
            pixels: side * side,
            median_ms: median(&mut times),
            cell_ops: ops,
        });
    }
    Ok(rows)
}

/// Closed-form pair count for one four-angle build on a `side x side` image.
pub fn expected_probe_ops(side: usize) -> u64 {
    four_angle_pair_count(side, side, 1)
}

/// Least-squares slope of `ln(time)` against `ln(x)`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = points.iter().fold((0.0, 0.0), |(num, den), &(x, y)| {
        let dx = x.ln() - mx;
        (num + dx * (y.ln() - my), den + dx * dx)
    });
    num / den
}

pub fn probe_csv(rows: &[ProbeRow]) -> String {
    let mut out = String::from(PROBE_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{:.6},{}\n", r.side, r.median_ms, r.cell_ops));
    }
    out
}

/// Growth exponents of build time against side length and against pixel count.
pub fn probe_summary(rows: &[ProbeRow]) -> String {
    let by_side: Vec<(f64, f64)> = rows.iter().map(|r| (r.side as f64, r.median_ms)).collect();
    let by_pixels: Vec<(f64, f64)> = rows.iter().map(|r| (r.pixels as f64, r.median_ms)).collect();
    let mut out = String::new();
    for w in rows.windows(2) {
        out.push_str(&format!(
            "side {} -> {}: time x{:.3}, ops x{:.3}\n",
            w[0].side,
            w[1].side,
            w[1].median_ms / w[0].median_ms,
            w[1].cell_ops as f64 / w[0].cell_ops as f64
        ));
    }
    out.push_str(&format!(
        "time ~ side^{:.3} ~ pixels^{:.3}\n",
        log_log_slope(&by_side),
        log_log_slope(&by_pixels)
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapegen::{generate_dataset, split_dataset, GenerationConfig};

    fn dataset(n: usize, side: usize) -> LabeledDataset {
        let ds = generate_dataset(
            GenerationConfig {
                n_per_class: n,
                side,
                levels: 8,
                noise_sigma: 0.0,
                seed: 11,
            },
            Execution::Parallel,
        )
        .unwrap();
        split_dataset(ds, 0.9, 11).unwrap()
    }

    fn config() -> CellConfig {
        CellConfig {
            distance: 1,
            knn_k: 3,
            svm_lambda: 0.01,
            svm_epochs: 20,
            seed: 5,
        }
    }

    #[test]
    fn knn_k1_on_overlapping_split_is_perfect() {
        let mut ds = dataset(10, 32);
        let split = ds.split.as_mut().unwrap();
        split.train = (0..ds.samples.len()).collect();
        split.test = (0..ds.samples.len()).step_by(4).collect();
        let mut cfg = config();
        cfg.knn_k = 1;
        let combo: FeatureCombo = "energy+contrast+entropy".parse().unwrap();
        let r = run_cell(&ds, &combo, ClassifierKind::Knn, &cfg).unwrap();
        assert_eq!(r.accuracy, 1.0);
    }

    #[test]
    fn cell_is_deterministic_and_counts_ops() {
        let ds = dataset(10, 24);
        let combo: FeatureCombo = "energy+homogeneity".parse().unwrap();
        for kind in ClassifierKind::ALL {
            let a = run_cell(&ds, &combo, kind, &config()).unwrap();
            let b = run_cell(&ds, &combo, kind, &config()).unwrap();
            assert_eq!((a.accuracy, a.glcm_cell_ops), (b.accuracy, b.glcm_cell_ops));
            assert_eq!(a.glcm_cell_ops, 30 * four_angle_pair_count(24, 24, 1));
            assert_eq!((a.n_train, a.n_test), (27, 3));
            assert!(a.n_correct <= a.n_test);
            assert!((0.0..=1.0).contains(&a.accuracy));
            assert!(a.extract_ms >= 0.0 && a.train_ms >= 0.0 && a.predict_ms >= 0.0);
        }
    }

    #[test]
    fn cell_errors_name_the_cell() {
        let ds = dataset(10, 24);
        let mut cfg = config();
        cfg.knn_k = 1000;
        let combo: FeatureCombo = "energy+entropy".parse().unwrap();
        let err = run_cell(&ds, &combo, ClassifierKind::Knn, &cfg).unwrap_err();
        assert!(err.to_string().starts_with("cell knn energy+entropy:"), "{err}");
        assert!(matches!(err.root(), Error::Config(_)));
    }

    #[test]
    fn sweep_shape_and_means() {
        let ds = dataset(10, 24);
        let s = sweep(&ds, &config(), Execution::Parallel).unwrap();
        assert_eq!(s.results.len(), 40);
        assert_eq!(s.results[0].classifier, ClassifierKind::Knn);
        assert_eq!(s.results[1].classifier, ClassifierKind::Svm);
        assert_eq!(s.results[0].combo, s.results[1].combo);
        assert_eq!(s.means.len(), 4);
        for m in &s.means {
            let members: Vec<f64> = s
                .results
                .iter()
                .filter(|r| r.classifier == m.classifier && r.combo.len() == m.combo_size)
                .map(|r| r.accuracy)
                .collect();
            assert_eq!(members.len(), 10);
            let avg = members.iter().sum::<f64>() / 10.0;
            assert!((avg - m.mean_accuracy).abs() < 1e-12);
        }
        let csv = cells_csv(&s);
        assert_eq!(csv.lines().count(), 41);
        assert_eq!(csv.lines().next().unwrap(), CELL_CSV_HEADER);
        assert_eq!(summary_csv(&s).lines().count(), 5);
        let ranking = s.ranking();
        assert_eq!(ranking.len(), 40);
        for w in ranking.windows(2) {
            assert!(
                w[0].accuracy > w[1].accuracy
                    || (w[0].accuracy == w[1].accuracy
                        && w[0].inference_ms() <= w[1].inference_ms())
            );
        }
    }

    #[test]
    fn multi_seed_pools_cells() {
        let ds = dataset(10, 16);
        let s = sweep_seeds(&ds, &config(), &[1, 2], Execution::Parallel).unwrap();
        assert_eq!(s.results.len(), 80);
        assert!(s.means.iter().all(|m| m.cells == 20));
    }

    #[test]
    fn probe_preconditions_and_counts() {
        assert!(complexity_probe(&[16, 32], 8, 5, 0).is_err());
        assert!(complexity_probe(&[8, 16, 32], 8, 5, 0).is_err());
        assert!(complexity_probe(&[16, 32, 64], 8, 4, 0).is_err());
        let rows = complexity_probe(&[16, 32, 64], 8, 5, 0).unwrap();
        assert_eq!(rows.len(), 3);
        for r in &rows {
            let n = r.side as u64;
            // 0 and 90 degrees: n(n-1) each; diagonals: (n-1)^2 each
            assert_eq!(r.cell_ops, 2 * n * (n - 1) + 2 * (n - 1) * (n - 1));
            assert_eq!(r.cell_ops, expected_probe_ops(r.side));
        }
        let csv = probe_csv(&rows);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("side,median_ms,cell_ops\n16,"));
    }

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<(f64, f64)> = [2.0, 4.0, 8.0].iter().map(|&x| (x, 3.0 * x * x)).collect();
        assert!((log_log_slope(&pts) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn report_files_written() {
        let ds = dataset(10, 16);
        let s = sweep(&ds, &config(), Execution::Sequential).unwrap();
        let dir = tempfile::tempdir().unwrap();
        emit_report(&s, dir.path()).unwrap();
        for f in [CELLS_FILE, SUMMARY_FILE, RANKING_FILE] {
            assert!(dir.path().join(f).exists());
        }
        let ranking = fs::read_to_string(dir.path().join(RANKING_FILE)).unwrap();
        let entries = ranking
            .lines()
            .filter(|l| l.split_whitespace().next().is_some_and(|t| t.parse::<usize>().is_ok()))
            .count();
        assert_eq!(entries, 40);
    }
}
