//! Glove calibration from paired reference poses and readings.
//!
//! The measurement matrix solves `Y_g = Ĥ X_g` in the least-squares sense,
//! `Ĥ = Y_g ((X_gᵀ)†)ᵀ`. With more calibration poses than DoFs the same
//! formula gives the overdetermined least-squares fit, which is the
//! recommended setup. No offset term is fitted: readings are assumed to be
//! a strictly linear function of the joint angles.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;

/// Default number of raw samples averaged per calibration pose.
pub const DEFAULT_WINDOW_LEN: usize = 50;

/// Paired calibration data.
#[derive(Clone, Debug)]
pub struct CalibrationSet {
    /// `n × N`, one reference pose per column (degrees).
    pub reference_poses: DMatrix<f64>,
    /// `m × N`, one averaged reading per column.
    pub glove_readings: DMatrix<f64>,
    /// Optional raw windows, each `W × m`, used to estimate the noise.
    pub raw_windows: Option<Vec<DMatrix<f64>>>,
}

impl CalibrationSet {
    pub fn new(reference_poses: DMatrix<f64>, glove_readings: DMatrix<f64>) -> Result<Self> {
        if reference_poses.ncols() != glove_readings.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{} reference poses but {} readings",
                reference_poses.ncols(),
                glove_readings.ncols()
            )));
        }
        if reference_poses.iter().chain(glove_readings.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput("calibration data".into()));
        }
        Ok(CalibrationSet { reference_poses, glove_readings, raw_windows: None })
    }

    pub fn with_raw_windows(mut self, windows: Vec<DMatrix<f64>>) -> Self {
        self.raw_windows = Some(windows);
        self
    }
}

/// Least-squares measurement matrix `Ĥ` with `Y_g ≈ Ĥ X_g`.
pub fn estimate_measurement_matrix(cal: &CalibrationSet) -> Result<DMatrix<f64>> {
    let x = &cal.reference_poses;
    let dofs = x.nrows();
    let rank = linalg::rank(x);
    if rank < dofs {
        return Err(Error::RankDeficientPoses { rank, dofs });
    }
    let xt = x.transpose();
    let svd = xt.svd(true, true);
    let tol = x.nrows().max(x.ncols()) as f64 * f64::EPSILON * svd.singular_values.max();
    let xt_pinv = svd.pseudo_inverse(tol).map_err(|e| Error::Config(e.to_string()))?;
    Ok(&cal.glove_readings * xt_pinv.transpose())
}

/// Pooled covariance of the fluctuations of each raw window about its own
/// mean. Each window is `W × m`; the result is `m × m`.
pub fn estimate_noise_covariance(windows: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
    let first = windows
        .first()
        .ok_or_else(|| Error::InsufficientWindowSamples(0))?;
    let m = first.ncols();
    let mut scatter = DMatrix::zeros(m, m);
    let mut dof = 0usize;
    for w in windows {
        if w.ncols() != m {
            return Err(Error::DimensionMismatch(format!(
                "raw window with {} channels, expected {m}",
                w.ncols()
            )));
        }
        if w.nrows() < 2 {
            return Err(Error::InsufficientWindowSamples(w.nrows()));
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput("raw window".into()));
        }
        let mean = w.row_mean();
        let mut centered = w.clone();
        for mut row in centered.row_iter_mut() {
            row -= &mean;
        }
        scatter += centered.transpose() * &centered;
        dof += w.nrows() - 1;
    }
    let mut r = scatter / dof as f64;
    linalg::symmetrize(&mut r);
    Ok(r)
}
