use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use glcm_lab::bench::{self, complexity_probe, emit_report, probe_csv, probe_summary};
use glcm_lab::config::RunConfig;
use glcm_lab::exec::configure_threads;
use glcm_lab::glcm::{extract_features, write_feature_csv, FeatureCombo};
use glcm_lab::shapegen::{generate_dataset, read_dataset, split_dataset, write_dataset};
use glcm_lab::{Error, Execution};

const AFTER_HELP: &str = "\
Features: energy, contrast, homogeneity, entropy, correlation
Angles (fixed, not configurable): 0, 45, 90, 135 degrees at the chosen distance
Combos are spelled name+name or name+name+name, e.g. energy+homogeneity

Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 internal error";

#[derive(Parser, Debug)]
#[command(name = "glcm-lab", version, about = "GLCM texture features for shape classification")]
#[command(after_help = AFTER_HELP)]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,

    #[command(subcommand)]
    command: Command,
}

/// Overrides for the run configuration; unset flags fall through to the
/// config file and then to the defaults.
#[derive(Args, Debug, Default)]
struct ConfigArgs {
    /// key=value file applied before the flags
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    images_per_class: Option<usize>,
    #[arg(long, global = true)]
    image_side: Option<usize>,
    #[arg(long, global = true)]
    gray_levels: Option<usize>,
    #[arg(long, global = true)]
    glcm_distance: Option<usize>,
    #[arg(long, global = true)]
    noise_sigma: Option<f64>,
    #[arg(long, global = true)]
    train_fraction: Option<f64>,
    #[arg(long, global = true)]
    knn_k: Option<usize>,
    #[arg(long, global = true)]
    svm_lambda: Option<f64>,
    #[arg(long, global = true)]
    svm_epochs: Option<usize>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Worker threads: 1 is sequential, 0 uses every core
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Number of consecutive seeds to sweep, starting at --seed
    #[arg(long, global = true)]
    seeds: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render the shape dataset into --output-dir as PGM files plus manifest.csv
    Generate,
    /// Write per-sample GLCM feature vectors for one combo as CSV
    Extract {
        /// Dataset directory (PGM files + manifest.csv)
        dataset: PathBuf,
        /// Feature combo, e.g. energy+homogeneity
        combo: String,
        /// Output file; stdout when omitted
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate every combo with both classifiers; writes cells.csv,
    /// summary.csv and ranking.txt into --output-dir
    Sweep {
        /// Dataset directory (PGM files + manifest.csv)
        dataset: PathBuf,
        /// Evaluate only this combo (both classifiers)
        #[arg(long)]
        combo: Option<String>,
    },
    /// Time GLCM construction across image sides; writes probe.csv into --output-dir
    Probe {
        /// Comma-separated side lengths, at least three
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        sides: Vec<usize>,
        #[arg(long, default_value_t = 11)]
        trials: usize,
    },
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e.root() {
            Error::Usage(_) | Error::Config(_) => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Data(format!("{}: {e}", path.display()))
}

fn resolve_config(args: &ConfigArgs) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
        cfg.apply_file_text(&text)?;
    }
    macro_rules! apply {
        ($($field:ident),*) => {
            $(if let Some(v) = args.$field.clone() { cfg.$field = v; })*
        };
    }
    apply!(
        seed,
        images_per_class,
        image_side,
        gray_levels,
        glcm_distance,
        noise_sigma,
        train_fraction,
        knn_k,
        svm_lambda,
        svm_epochs,
        output_dir,
        jobs,
        seeds
    );
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = resolve_config(&cli.config)?;
    eprintln!("# effective config\n{cfg}");
    configure_threads(cfg.jobs);
    let exec = Execution::from_jobs(cfg.jobs);

    match cli.command {
        Command::Generate => {
            let ds = generate_dataset(cfg.generation(), exec)?;
            let ds = split_dataset(ds, cfg.train_fraction, cfg.seed)?;
            write_dataset(&ds, &cfg.output_dir)?;
            let split = ds.split()?;
            eprintln!(
                "wrote {} images ({} train, {} test) to {}",
                ds.len(),
                split.train.len(),
                split.test.len(),
                cfg.output_dir.display()
            );
        }
        Command::Extract {
            dataset,
            combo,
            output,
        } => {
            let combo: FeatureCombo = combo.parse()?;
            let ds = read_dataset(&dataset, cfg.image_side, cfg.gray_levels, cfg.seed)?;
            let rows = exec.try_map_range(ds.len(), |i| {
                let s = &ds.samples[i];
                extract_features(&s.image, &combo, cfg.glcm_distance)
                    .map(|v| (i, s.class.label(), v))
            })?;
            match output {
                Some(path) => {
                    let file = fs::File::create(&path).map_err(|e| io_failure(&path, e))?;
                    let mut w = io::BufWriter::new(file);
                    write_feature_csv(&mut w, &combo, &rows)
                        .and_then(|_| w.flush())
                        .map_err(|e| io_failure(&path, e))?;
                }
                None => {
                    let stdout = io::stdout();
                    write_feature_csv(stdout.lock(), &combo, &rows)
                        .map_err(|e| Failure::Data(format!("stdout: {e}")))?;
                }
            }
        }
        Command::Sweep { dataset, combo } => {
            let ds = read_dataset(&dataset, cfg.image_side, cfg.gray_levels, cfg.seed)?;
            let cell = cfg.cell();
            let seeds: Vec<u64> = (0..cfg.seeds as u64).map(|i| cfg.seed + i).collect();
            let summary = match combo {
                Some(name) => {
                    let combo: FeatureCombo = name.parse()?;
                    let mut results = Vec::new();
                    for &seed in &seeds {
                        let c = bench::CellConfig { seed, ..cell };
                        for kind in bench::ClassifierKind::ALL {
                            results.push(bench::run_cell(&ds, &combo, kind, &c)?);
                        }
                    }
                    bench::SweepSummary::from_results(results)
                }
                None => bench::sweep_seeds(&ds, &cell, &seeds, exec)?,
            };
            emit_report(&summary, &cfg.output_dir)?;
            print!("{}", bench::ranking_text(&summary));
        }
        Command::Probe { sides, trials } => {
            if sides.len() < 3 {
                return Err(Failure::Usage(format!(
                    "probe needs --sides with at least 3 side lengths, got {}",
                    sides.len()
                )));
            }
            let rows = complexity_probe(&sides, cfg.gray_levels, trials, cfg.seed)?;
            fs::create_dir_all(&cfg.output_dir).map_err(|e| io_failure(&cfg.output_dir, e))?;
            let path = cfg.output_dir.join("probe.csv");
            fs::write(&path, probe_csv(&rows)).map_err(|e| io_failure(&path, e))?;
            print!("{}", probe_summary(&rows));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failure::Usage(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Ok(Err(Failure::Data(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(_) => {
            eprintln!("error: internal failure");
            ExitCode::from(3)
        }
    }
}
