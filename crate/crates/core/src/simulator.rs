//! Synthetic glove measurements and the reconstruction experiment.
//!
//! Noise is drawn per trial from its own ChaCha8 stream (stream id
//! `pose_index * trials_per_pose + trial` under the configured seed), so the
//! output does not depend on evaluation order.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{self, MeasurementModel, Method, MveGain};
use crate::hand_model::{HandModel, METACARPAL_DOFS};
use crate::io;
use crate::linalg;
use crate::prior::{self, build_prior, PoseSet, PriorModel, DEFAULT_RIDGE};
use crate::reporting::{ConfigEcho, EvaluationReport};
use crate::stats::ErrorSummary;

/// Name recorded in reports for the noise generator.
pub const RNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.9), stream = pose_index * trials_per_pose + trial";

/// Per-measurement noise standard deviation of the simulated glove, degrees.
pub const DEFAULT_SIGMA_DEG: f64 = 7.0;
/// Training (prior) and test set sizes of the reference experiment.
pub const DEFAULT_TRAIN_SIZE: usize = 114;
pub const DEFAULT_TEST_SIZE: usize = 54;

#[derive(Clone, Debug)]
pub struct SimulationConfig {
    /// `H` and the `R` assumed by the estimators.
    pub measurement: MeasurementModel,
    /// Covariance of the injected noise (m × m).
    pub noise_cov: DMatrix<f64>,
    pub seed: u64,
    pub trials_per_pose: usize,
    /// Human-readable description of `H`, echoed into reports.
    pub h_spec: String,
    pub sigma_deg: Option<f64>,
}

impl SimulationConfig {
    /// Measures the named DoFs directly with i.i.d. noise of `sigma_deg`.
    pub fn selection<S: AsRef<str>>(model: &HandModel, names: &[S], sigma_deg: f64, seed: u64) -> Result<Self> {
        if !(sigma_deg >= 0.0) || !sigma_deg.is_finite() {
            return Err(Error::Config(format!("noise sigma must be a nonnegative number, got {sigma_deg}")));
        }
        let measurement = MeasurementModel::selection(model, names, sigma_deg)?;
        let noise_cov = measurement.r().clone();
        let h_spec = format!(
            "selection: {}",
            names.iter().map(|s| s.as_ref()).collect::<Vec<_>>().join(",")
        );
        Ok(SimulationConfig { measurement, noise_cov, seed, trials_per_pose: 1, h_spec, sigma_deg: Some(sigma_deg) })
    }

    /// Metacarpal selection glove with 7° noise.
    pub fn paper_defaults(model: &HandModel, seed: u64) -> Result<Self> {
        Self::selection(model, &METACARPAL_DOFS, DEFAULT_SIGMA_DEG, seed)
    }

    /// General `H` with noise covariance `r`, injected and assumed alike.
    pub fn with_matrix(h: DMatrix<f64>, r: DMatrix<f64>, seed: u64) -> Result<Self> {
        let h_spec = format!("matrix {}x{}", h.nrows(), h.ncols());
        let measurement = MeasurementModel::new(h, r)?;
        let noise_cov = measurement.r().clone();
        Ok(SimulationConfig { measurement, noise_cov, seed, trials_per_pose: 1, h_spec, sigma_deg: None })
    }

    pub fn trials(mut self, trials_per_pose: usize) -> Self {
        self.trials_per_pose = trials_per_pose;
        self
    }

    fn echo(&self, train_size: Option<usize>, test_size: usize, ridge: f64) -> ConfigEcho {
        ConfigEcho {
            rng: RNG_NAME.to_string(),
            seed: Some(self.seed),
            h_spec: self.h_spec.clone(),
            sigma_deg: self.sigma_deg,
            noise_trace: self.noise_cov.trace(),
            trials_per_pose: self.trials_per_pose,
            train_size,
            test_size,
            prior_ridge: Some(ridge),
        }
    }
}

/// JSON form of a [`SimulationConfig`].
///
/// Exactly one of `measured_dofs` / `H_csv` and at most one of `sigma_deg` /
/// `R_csv` must be given; relative paths resolve against the file's folder.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measured_dofs: Option<Vec<String>>,
    #[serde(rename = "H_csv", default, skip_serializing_if = "Option::is_none")]
    pub h_csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_deg: Option<f64>,
    #[serde(rename = "R_csv", default, skip_serializing_if = "Option::is_none")]
    pub r_csv: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub trials: usize,
}

fn one() -> usize {
    1
}

impl SimulationConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn resolve(&self, model: &HandModel, base: &Path) -> Result<SimulationConfig> {
        if self.trials == 0 {
            return Err(Error::Config("`trials` must be at least 1".into()));
        }
        if self.sigma_deg.is_some() && self.r_csv.is_some() {
            return Err(Error::Config("give either `sigma_deg` or `R_csv`, not both".into()));
        }
        let cfg = match (&self.measured_dofs, &self.h_csv) {
            (Some(names), None) => {
                let mut cfg = SimulationConfig::selection(model, names, self.sigma_deg.unwrap_or(0.0), self.seed)?;
                if let Some(r) = &self.r_csv {
                    let r = io::read_matrix_file(&base.join(r))?;
                    cfg.measurement = cfg.measurement.with_noise(r)?;
                    cfg.noise_cov = cfg.measurement.r().clone();
                    cfg.sigma_deg = None;
                }
                cfg
            }
            (None, Some(h)) => {
                let h = io::read_matrix_file(&base.join(h))?;
                if h.ncols() != model.n() {
                    return Err(Error::DimensionMismatch(format!(
                        "H has {} columns, hand model has {} DoFs",
                        h.ncols(),
                        model.n()
                    )));
                }
                let m = h.nrows();
                let r = match (&self.r_csv, self.sigma_deg) {
                    (Some(r), _) => io::read_matrix_file(&base.join(r))?,
                    (None, s) => DMatrix::identity(m, m) * s.unwrap_or(0.0).powi(2),
                };
                let mut cfg = SimulationConfig::with_matrix(h, r, self.seed)?;
                cfg.sigma_deg = self.sigma_deg;
                cfg
            }
            _ => return Err(Error::Config("give exactly one of `measured_dofs` or `H_csv`".into())),
        };
        Ok(cfg.trials(self.trials))
    }
}

/// Noisy measurements, `trials_per_pose` rows per pose in pose order.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulatedMeasurements {
    pub pose_index: Vec<usize>,
    pub y: DMatrix<f64>,
}

/// `y = H x + ν` for every pose and trial, `ν ~ N(0, noise_cov)`.
pub fn simulate_measurements(poses: &PoseSet, cfg: &SimulationConfig) -> Result<SimulatedMeasurements> {
    let h = cfg.measurement.h();
    if h.ncols() != poses.model().n() {
        return Err(Error::DimensionMismatch(format!(
            "measurement matrix has {} columns, poses have {} DoFs",
            h.ncols(),
            poses.model().n()
        )));
    }
    let m = h.nrows();
    if cfg.noise_cov.shape() != (m, m) {
        return Err(Error::DimensionMismatch("noise covariance does not match H".into()));
    }
    if cfg.trials_per_pose == 0 {
        return Err(Error::Config("trials_per_pose must be at least 1".into()));
    }
    let factor = prior::covariance_factor(&cfg.noise_cov);
    let noiseless = cfg.noise_cov.iter().all(|&v| v == 0.0);
    let trials = cfg.trials_per_pose;
    let rows = poses.len() * trials;
    let mut y = DMatrix::zeros(rows, m);
    let mut pose_index = Vec::with_capacity(rows);
    for i in 0..poses.len() {
        let clean = h * poses.pose(i);
        for t in 0..trials {
            let row = i * trials + t;
            let mut yi = clean.clone();
            if !noiseless {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(row as u64);
                let z = DVector::from_iterator(m, (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)));
                yi += &factor * z;
            }
            y.row_mut(row).copy_from(&yi.transpose());
            pose_index.push(i);
        }
    }
    Ok(SimulatedMeasurements { pose_index, y })
}

/// Runs `method` on every row of `y`.
pub fn estimate_all(
    method: Method,
    prior: &PriorModel,
    model: &MeasurementModel,
    y: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = prior.n();
    let mut out = DMatrix::zeros(y.nrows(), n);
    let mve = if method == Method::MveSmw { Some(MveGain::new(prior, model)?) } else { None };
    for (i, row) in y.row_iter().enumerate() {
        let yi = row.transpose();
        let x = match &mve {
            Some(g) => g.apply(&yi)?,
            None => estimators::estimate(method, prior, model, &yi)?.x_hat,
        };
        out.row_mut(i).copy_from(&x.transpose());
    }
    Ok(out)
}

/// Builds the prior from `train` and evaluates `methods` on `test`.
pub fn run_reconstruction_experiment(
    train: &PoseSet,
    test: &PoseSet,
    cfg: &SimulationConfig,
    methods: &[Method],
) -> Result<EvaluationReport> {
    if train.model() != test.model() {
        return Err(Error::DimensionMismatch("training and test sets use different hand models".into()));
    }
    let prior = build_prior(train, DEFAULT_RIDGE)?;
    run_with_prior(&prior, test, cfg, methods, Some(train.len()))
}

/// Evaluates `methods` on `test` against an existing prior.
pub fn run_with_prior(
    prior: &PriorModel,
    test: &PoseSet,
    cfg: &SimulationConfig,
    methods: &[Method],
    train_size: Option<usize>,
) -> Result<EvaluationReport> {
    if test.is_empty() {
        return Err(Error::InsufficientSamples(0));
    }
    if prior.model() != test.model() {
        return Err(Error::DimensionMismatch("prior and test set use different hand models".into()));
    }
    let sim = simulate_measurements(test, cfg)?;
    let reference = test.poses().select_rows(&sim.pose_index);
    let names: Vec<String> = test.model().names().map(str::to_string).collect();
    let summaries = methods
        .iter()
        .map(|&method| {
            let est = estimate_all(method, prior, &cfg.measurement, &sim.y)?;
            let abs = (est - &reference).abs();
            Ok((method.label().to_string(), ErrorSummary::from_abs_errors(names.clone(), &abs)))
        })
        .collect::<Result<Vec<_>>>()?;
    EvaluationReport::from_summaries(cfg.echo(train_size, test.len(), prior.ridge()), summaries)
}

/// Gaussian prior with synergy structure: principal variances decay
/// geometrically by `ratio` from `leading_variance`, along a random
/// orthonormal basis drawn from `seed`.
pub fn synergy_prior(
    model: &HandModel,
    mean: DVector<f64>,
    leading_variance: f64,
    ratio: f64,
    seed: u64,
) -> Result<PriorModel> {
    let n = model.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = a.qr().q();
    let variances = DVector::from_fn(n, |i, _| leading_variance * ratio.powi(i as i32));
    let mut cov = &q * DMatrix::from_diagonal(&variances) * q.transpose();
    linalg::symmetrize(&mut cov);
    PriorModel::new(model.clone(), mean, cov, 0, 0.0)
}

/// Typical grasp joint angles (degrees) of the 15-DoF model, used as the
/// mean of synthetic priors.
pub const SYNTHETIC_MEAN_DEG: [f64; 15] =
    [35.0, 20.0, 25.0, 15.0, 10.0, 40.0, 45.0, 42.0, 48.0, 5.0, 45.0, 50.0, 12.0, 40.0, 45.0];

/// Training and test pose sets for the default synthetic experiment.
pub fn synthetic_split(model: &HandModel, seed: u64, train_size: usize, test_size: usize) -> Result<(PoseSet, PoseSet)> {
    if model.n() != SYNTHETIC_MEAN_DEG.len() {
        return Err(Error::DimensionMismatch("synthetic data needs the 15-DoF model".into()));
    }
    let truth = synergy_prior(model, DVector::from_column_slice(&SYNTHETIC_MEAN_DEG), 400.0, 0.6, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let train = truth.sample(train_size, &mut rng, "synthetic-train")?;
    rng.set_stream(2);
    let test = truth.sample(test_size, &mut rng, "synthetic-test")?;
    Ok((train, test))
}
