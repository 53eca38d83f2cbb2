use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prior::PoseSet;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScopeStats {
    pub mean: f64,
    /// Sample standard deviation (N − 1); zero for a single value.
    pub std: f64,
    pub max: f64,
}

impl ScopeStats {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return ScopeStats { mean: 0.0, std: 0.0, max: 0.0 };
        }
        ScopeStats {
            mean: super::mean(values),
            std: super::variance(values).sqrt(),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Absolute estimation errors, per pose and per DoF, in degrees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub dof_names: Vec<String>,
    /// Mean absolute DoF error of each pose.
    pub per_pose_errors: Vec<f64>,
    /// `per_dof_errors[j][i]`: absolute error of DoF `j` in pose `i`.
    pub per_dof_errors: Vec<Vec<f64>>,
    pub pose: ScopeStats,
    pub per_dof: Vec<ScopeStats>,
}

impl ErrorSummary {
    /// Builds a summary from a poses × DoFs matrix of absolute errors.
    pub fn from_abs_errors(dof_names: Vec<String>, abs: &DMatrix<f64>) -> Self {
        let per_pose_errors: Vec<f64> = abs.row_iter().map(|r| r.mean()).collect();
        let per_dof_errors: Vec<Vec<f64>> = abs.column_iter().map(|c| c.iter().copied().collect()).collect();
        let pose = ScopeStats::of(&per_pose_errors);
        let per_dof = per_dof_errors.iter().map(|v| ScopeStats::of(v)).collect();
        ErrorSummary { dof_names, per_pose_errors, per_dof_errors, pose, per_dof }
    }

    pub fn pose_count(&self) -> usize {
        self.per_pose_errors.len()
    }
}

/// Absolute errors of `estimates` against `reference`, pose by pose.
pub fn pose_errors(estimates: &PoseSet, reference: &PoseSet) -> Result<ErrorSummary> {
    if estimates.poses().shape() != reference.poses().shape() {
        return Err(Error::DimensionMismatch(format!(
            "estimates are {:?}, reference is {:?}",
            estimates.poses().shape(),
            reference.poses().shape()
        )));
    }
    if estimates.model() != reference.model() {
        return Err(Error::DimensionMismatch("estimates and reference use different hand models".into()));
    }
    let abs = (estimates.poses() - reference.poses()).abs();
    let names = reference.model().names().map(str::to_string).collect();
    Ok(ErrorSummary::from_abs_errors(names, &abs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hand_model::default_hand_model;

    fn set(m: DMatrix<f64>) -> PoseSet {
        PoseSet::new(default_hand_model(), m, "t").unwrap()
    }

    #[test]
    fn identical_sets() {
        let x = DMatrix::from_fn(4, 15, |i, j| (i * j) as f64);
        let s = pose_errors(&set(x.clone()), &set(x)).unwrap();
        assert!(s.per_pose_errors.iter().all(|&e| e == 0.0));
        assert_eq!(s.pose, ScopeStats { mean: 0.0, std: 0.0, max: 0.0 });
    }

    #[test]
    fn uniform_offset() {
        let x = DMatrix::from_fn(4, 15, |i, j| (i + j) as f64 * 1.5);
        let s = pose_errors(&set(x.add_scalar(1.0)), &set(x)).unwrap();
        assert!(s.per_pose_errors.iter().all(|&e| (e - 1.0).abs() < 1e-12));
        assert_eq!(s.pose.std, 0.0);
        assert!(s.per_dof.iter().all(|d| (d.mean - 1.0).abs() < 1e-12 && d.max <= 1.0 + 1e-12));
    }

    #[test]
    fn single_large_dof_error() {
        let reference = DMatrix::zeros(1, 15);
        let mut est = DMatrix::zeros(1, 15);
        est[(0, 14)] = 15.0;
        let s = pose_errors(&set(est), &set(reference)).unwrap();
        assert_eq!(s.per_pose_errors, vec![1.0]);
        assert_eq!(s.per_dof[14].max, 15.0);
    }

    #[test]
    fn mismatched_rows() {
        let a = set(DMatrix::zeros(2, 15));
        let b = set(DMatrix::zeros(3, 15));
        assert!(matches!(pose_errors(&a, &b), Err(Error::DimensionMismatch(_))));
    }
}
