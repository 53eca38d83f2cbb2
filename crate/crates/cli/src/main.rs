//! `handrecon` command-line tool.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use handrecon::io::{self, read_labeled_file, read_poses_file, write_labeled, write_matrix_file};
use handrecon::prior::DEFAULT_RIDGE;
use handrecon::reporting::ConfigEcho;
use handrecon::simulator::{
    run_with_prior, synthetic_split, SimulationConfigFile, DEFAULT_TEST_SIZE, DEFAULT_TRAIN_SIZE,
};
use handrecon::stats::pose_errors;
use handrecon::{
    build_prior, default_hand_model, estimate_measurement_matrix, estimate_noise_covariance, render_report,
    CalibrationSet, DMatrix, Error, EvaluationReport, HandModel, MeasurementModel, Method, PriorModel,
    ReportFormat, Result, SimulationConfig,
};

#[derive(Parser)]
#[command(name = "handrecon", version, about = "Reconstruct hand postures from sparse glove measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a Gaussian pose prior to a CSV of grasp poses.
    BuildPrior {
        #[arg(long)]
        poses: PathBuf,
        /// Output folder for prior.json and cov.csv.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RIDGE)]
        ridge: f64,
    },
    /// Simulate a glove on test poses and compare reconstruction methods.
    Simulate(SimulateArgs),
    /// Estimate the glove measurement matrix (and noise covariance) from reference poses.
    Calibrate {
        #[arg(long)]
        poses: PathBuf,
        /// Glove readings, one row per pose, one column per sensor channel.
        #[arg(long)]
        readings: PathBuf,
        /// Long recordings of static poses (`window_id,channel,value`).
        #[arg(long)]
        raw_windows: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct full poses from measurement rows.
    Estimate(EstimateArgs),
    /// Summarize estimation errors against reference poses.
    Evaluate {
        #[arg(long)]
        estimates: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        /// Second set of estimates to compare against.
        #[arg(long)]
        baseline: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// Prior folder written by `build-prior`.
    #[arg(long, requires = "test")]
    prior: Option<PathBuf>,
    #[arg(long, requires = "prior")]
    test: Option<PathBuf>,
    #[arg(long, conflicts_with = "paper_defaults")]
    config: Option<PathBuf>,
    /// Metacarpal glove, 7° noise; generates a synthetic 114/54 split when
    /// no prior and test set are given.
    #[arg(long)]
    paper_defaults: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated methods; the first is compared against the rest.
    #[arg(long, value_delimiter = ',', default_value = "mve,pinv")]
    method: Vec<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    prior: PathBuf,
    /// Headerless m × n measurement matrix.
    #[arg(long, conflicts_with = "measured", required_unless_present = "measured")]
    model: Option<PathBuf>,
    /// Headerless m × m noise covariance; defaults to zero.
    #[arg(long)]
    noise: Option<PathBuf>,
    /// Comma-separated measured DoF names (selection glove).
    #[arg(long, value_delimiter = ',')]
    measured: Option<Vec<String>>,
    /// CSV with a header row and one measurement vector per row.
    #[arg(long)]
    measurements: PathBuf,
    #[arg(long, value_enum, default_value_t = EstimateMethod::Mve)]
    method: EstimateMethod,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimateMethod {
    Pinv,
    Mve,
    Conditional,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Markdown,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::FAILURE
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    let model = default_hand_model();
    match cmd {
        Command::BuildPrior { poses, out, ridge } => {
            require_file(&poses)?;
            let prior = build_prior(&read_poses_file(&poses, &model)?, ridge)?;
            prior.save(&out)
        }
        Command::Simulate(args) => simulate(&model, args),
        Command::Calibrate { poses, readings, raw_windows, out } => {
            calibrate(&model, &poses, &readings, raw_windows.as_deref(), &out)
        }
        Command::Estimate(args) => estimate(&model, args),
        Command::Evaluate { estimates, reference, baseline, format, out } => {
            evaluate(&model, &estimates, &reference, baseline.as_deref(), format, out.as_deref())
        }
    }
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Config(format!("input file `{}` does not exist", path.display())))
    }
}

fn simulate(model: &HandModel, args: SimulateArgs) -> Result<()> {
    let methods = args
        .method
        .iter()
        .map(|s| Method::parse(s).ok_or_else(|| Error::Config(format!("unknown method `{s}`"))))
        .collect::<Result<Vec<_>>>()?;
    let mut cfg = match (&args.config, args.paper_defaults) {
        (Some(path), _) => {
            require_file(path)?;
            SimulationConfigFile::load(path)?.resolve(model, path.parent().unwrap_or(Path::new(".")))?
        }
        (None, true) => SimulationConfig::paper_defaults(model, 0)?,
        (None, false) => return Err(Error::Config("give `--config` or `--paper-defaults`".into())),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let (prior, test, train_size) = match (&args.prior, &args.test) {
        (Some(prior), Some(test)) => {
            require_file(test)?;
            (PriorModel::load(prior, model)?, read_poses_file(test, model)?, None)
        }
        _ if args.paper_defaults => {
            let (train, test) = synthetic_split(model, cfg.seed, DEFAULT_TRAIN_SIZE, DEFAULT_TEST_SIZE)?;
            (build_prior(&train, DEFAULT_RIDGE)?, test, Some(train.len()))
        }
        _ => return Err(Error::Config("give `--prior` and `--test`, or `--paper-defaults`".into())),
    };
    let train_size = train_size.or(Some(prior.sample_count()));
    let report = run_with_prior(&prior, &test, &cfg, &methods, train_size)?;
    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("report.json"), render_report(&report, ReportFormat::Json)?)?;
    fs::write(args.out.join("report.md"), render_report(&report, ReportFormat::Markdown)?)?;
    Ok(())
}

fn calibrate(model: &HandModel, poses: &Path, readings: &Path, raw: Option<&Path>, out: &Path) -> Result<()> {
    require_file(poses)?;
    require_file(readings)?;
    let poses = read_poses_file(poses, model)?;
    let (channels, y) = read_labeled_file(readings)?;
    if y.nrows() != poses.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} reference poses but {} reading rows",
            poses.len(),
            y.nrows()
        )));
    }
    let cal = CalibrationSet::new(poses.poses().transpose(), y.transpose())?;
    let h = estimate_measurement_matrix(&cal)?;
    fs::create_dir_all(out)?;
    write_matrix_file(&out.join("H.csv"), &h)?;
    if let Some(raw) = raw {
        require_file(raw)?;
        let windows = io::read_raw_windows_file(raw, &channels)?;
        write_matrix_file(&out.join("R.csv"), &estimate_noise_covariance(&windows)?)?;
    }
    Ok(())
}

fn estimate(model: &HandModel, args: EstimateArgs) -> Result<()> {
    require_file(&args.measurements)?;
    let prior = PriorModel::load(&args.prior, model)?;
    let (header, y) = read_labeled_file(&args.measurements)?;
    let (mm, y) = match (&args.model, &args.measured) {
        (Some(h), _) => {
            require_file(h)?;
            let h = io::read_matrix_file(h)?;
            let r = match &args.noise {
                Some(r) => io::read_matrix_file(r)?,
                None => DMatrix::zeros(h.nrows(), h.nrows()),
            };
            (MeasurementModel::new(h, r)?, y)
        }
        (None, Some(names)) => {
            // bind measurement columns to the listed DoFs by header name
            let cols = names
                .iter()
                .map(|n| {
                    header.iter().position(|h| h == n).ok_or_else(|| {
                        Error::Config(format!("measurements have no column for measured DoF `{n}`"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let h = handrecon::selection_matrix(model, names)?;
            let r = match &args.noise {
                Some(r) => io::read_matrix_file(r)?,
                None => DMatrix::zeros(names.len(), names.len()),
            };
            (MeasurementModel::new(h, r)?, y.select_columns(&cols))
        }
        (None, None) => return Err(Error::Config("give `--model` or `--measured`".into())),
    };
    let method = match args.method {
        EstimateMethod::Pinv => Method::Pinv,
        EstimateMethod::Mve => Method::MveSmw,
        EstimateMethod::Conditional => Method::ConditionalGaussian,
    };
    let est = handrecon::simulator::estimate_all(method, &prior, &mm, &y)?;
    let names: Vec<&str> = model.names().collect();
    write_labeled(fs::File::create(&args.out)?, &names, &est)
}

fn evaluate(
    model: &HandModel,
    estimates: &Path,
    reference: &Path,
    baseline: Option<&Path>,
    format: Format,
    out: Option<&Path>,
) -> Result<()> {
    require_file(estimates)?;
    require_file(reference)?;
    let reference = read_poses_file(reference, model)?;
    let mut summaries = vec![("estimates".to_string(), pose_errors(&read_poses_file(estimates, model)?, &reference)?)];
    if let Some(b) = baseline {
        require_file(b)?;
        summaries.push(("baseline".to_string(), pose_errors(&read_poses_file(b, model)?, &reference)?));
    }
    let echo = ConfigEcho {
        rng: "none".into(),
        seed: None,
        h_spec: "external estimates".into(),
        sigma_deg: None,
        noise_trace: 0.0,
        trials_per_pose: 1,
        train_size: None,
        test_size: reference.len(),
        prior_ridge: None,
    };
    let report = EvaluationReport::from_summaries(echo, summaries)?;
    let format = match format {
        Format::Json => ReportFormat::Json,
        Format::Markdown => ReportFormat::Markdown,
    };
    let text = render_report(&report, format)?;
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}
