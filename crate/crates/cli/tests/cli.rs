use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn glcm_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glcm-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn generate(dir: &Path, per_class: &str) {
    let out = glcm_lab(&[
        "generate",
        "--images-per-class",
        per_class,
        "--output-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn pgm_files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".pgm"))
        .collect();
    names.sort();
    names
}

#[test]
fn generate_writes_files_and_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    generate(&a, "10");
    generate(&b, "10");
    let names = pgm_files(&a);
    assert_eq!(names.len(), 30);
    assert!(names.contains(&"triangle_00000.pgm".to_string()));
    let manifest = fs::read_to_string(a.join("manifest.csv")).unwrap();
    assert_eq!(manifest.lines().count(), 31);
    assert_eq!(manifest.lines().filter(|l| l.ends_with(",test")).count(), 3);
    for name in names.iter().chain(["manifest.csv".to_string()].iter()) {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn extract_columns_and_combo_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("d");
    generate(&data, "10");
    let d = data.to_str().unwrap();

    let out = glcm_lab(&["extract", d, "energy+homogeneity"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 31);
    for line in &lines {
        assert_eq!(line.split(',').count(), 2 + 8, "{line}");
    }

    let file = tmp.path().join("f.csv");
    let out = glcm_lab(&[
        "extract",
        d,
        "contrast+correlation+entropy",
        "-o",
        file.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&file).unwrap();
    assert_eq!(text.lines().next().unwrap().split(',').count(), 2 + 12);

    let dup = glcm_lab(&["extract", d, "energy+energy"]);
    assert_eq!(dup.status.code(), Some(1));

    let unknown = glcm_lab(&["extract", d, "energy+roughness"]);
    assert_eq!(unknown.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&unknown.stderr);
    for name in ["energy", "contrast", "homogeneity", "entropy", "correlation"] {
        assert!(msg.contains(name), "{msg}");
    }
}

#[test]
fn sweep_report_shapes() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("d");
    let report = tmp.path().join("r");
    generate(&data, "10");
    let out = glcm_lab(&[
        "sweep",
        data.to_str().unwrap(),
        "--svm-epochs",
        "20",
        "--output-dir",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cells = fs::read_to_string(report.join("cells.csv")).unwrap();
    assert_eq!(cells.lines().count(), 41);
    let summary = fs::read_to_string(report.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 5);
    let ranking = fs::read_to_string(report.join("ranking.txt")).unwrap();
    let ranks: Vec<usize> = ranking
        .lines()
        .filter_map(|l| l.split_whitespace().next()?.parse().ok())
        .collect();
    assert_eq!(ranks, (1..=40).collect::<Vec<_>>());
}

#[test]
fn sweep_on_missing_dataset_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = glcm_lab(&["sweep", tmp.path().join("nope").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn probe_rows_and_missing_sides() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_str().unwrap();
    let out = glcm_lab(&["probe", "--sides", "16,32,64", "--trials", "5", "--output-dir", dir]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("probe.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "side,median_ms,cell_ops");
    assert_eq!(lines.len(), 4);
    // 4 angles on an n x n image: 4n^2 - 6n + 2 pairs
    for (line, n) in lines[1..].iter().zip([16u64, 32, 64]) {
        let ops: u64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(ops, 4 * n * n - 6 * n + 2);
    }

    assert_eq!(glcm_lab(&["probe", "--output-dir", dir]).status.code(), Some(1));
    assert_eq!(
        glcm_lab(&["probe", "--sides", "64,128", "--output-dir", dir]).status.code(),
        Some(1)
    );
}

#[test]
fn help_lists_features_and_angles() {
    let out = glcm_lab(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for word in ["energy", "contrast", "homogeneity", "entropy", "correlation"] {
        assert!(text.contains(word), "{word}");
    }
    assert!(text.contains("0, 45, 90, 135"));
}

#[test]
fn usage_and_config_errors_exit_1() {
    assert_eq!(glcm_lab(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(glcm_lab(&["--knn-k", "0", "generate"]).status.code(), Some(1));
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "images-per-class=12\nimage-side=32\n").unwrap();
    let out_dir = tmp.path().join("d");
    let out = glcm_lab(&[
        "generate",
        "--config",
        cfg.to_str().unwrap(),
        "--image-side",
        "24",
        "--output-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("images-per-class=12") && stderr.contains("image-side=24"));
    assert_eq!(pgm_files(&out_dir).len(), 36);
    let head = fs::read(out_dir.join("circle_00002.pgm")).unwrap();
    assert!(head.starts_with(b"P5\n24 24\n255\n"));
}
