//! Gaussian grasp prior: pose sets, mean/covariance estimation, synergies
//! and a chi-square Q-Q normality diagnostic.

use std::fs;
use std::path::Path;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::hand_model::HandModel;
use crate::io;
use crate::linalg;

/// Ridge added to the sample covariance by default, in deg².
pub const DEFAULT_RIDGE: f64 = 1e-9;

/// `N` poses of a hand model, one pose per row, in degrees.
#[derive(Clone, Debug, PartialEq)]
pub struct PoseSet {
    model: HandModel,
    poses: DMatrix<f64>,
    source: String,
}

impl PoseSet {
    pub fn new(model: HandModel, poses: DMatrix<f64>, source: impl Into<String>) -> Result<Self> {
        let source = source.into();
        if poses.ncols() != model.n() {
            return Err(Error::DimensionMismatch(format!(
                "pose set has {} columns, hand model has {} DoFs",
                poses.ncols(),
                model.n()
            )));
        }
        if poses.nrows() == 0 {
            return Err(Error::InsufficientSamples(0));
        }
        if poses.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput(format!("pose set `{source}`")));
        }
        Ok(PoseSet { model, poses, source })
    }

    pub fn model(&self) -> &HandModel {
        &self.model
    }

    pub fn poses(&self) -> &DMatrix<f64> {
        &self.poses
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.poses.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.nrows() == 0
    }

    pub fn pose(&self, i: usize) -> DVector<f64> {
        self.poses.row(i).transpose()
    }
}

/// Gaussian prior `N(mu, cov)` over joint angles.
///
/// `cov` already includes `ridge · I`.
#[derive(Clone, Debug, PartialEq)]
pub struct PriorModel {
    model: HandModel,
    mu: DVector<f64>,
    cov: DMatrix<f64>,
    sample_count: usize,
    ridge: f64,
}

impl PriorModel {
    pub fn new(
        model: HandModel,
        mu: DVector<f64>,
        cov: DMatrix<f64>,
        sample_count: usize,
        ridge: f64,
    ) -> Result<Self> {
        let n = model.n();
        if mu.len() != n || cov.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "prior of dimension {} / {:?} for a {n}-DoF model",
                mu.len(),
                cov.shape()
            )));
        }
        if mu.iter().chain(cov.iter()).any(|v| !v.is_finite()) || !(ridge >= 0.0) {
            return Err(Error::NonFiniteInput("prior".into()));
        }
        if !linalg::is_symmetric(&cov, 1e-10) {
            return Err(Error::InvalidModel("prior covariance is not symmetric".into()));
        }
        let mut cov = cov;
        linalg::symmetrize(&mut cov);
        Ok(PriorModel { model, mu, cov, sample_count, ridge })
    }

    pub fn model(&self) -> &HandModel {
        &self.model
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    /// Cholesky factor of the covariance, if it is positive definite.
    pub fn cholesky(&self) -> Option<Cholesky<f64, nalgebra::Dyn>> {
        Cholesky::new(self.cov.clone())
    }

    pub fn is_invertible(&self) -> bool {
        linalg::spd_condition_number(&self.cov) <= linalg::MAX_CONDITION
    }

    /// Squared Mahalanobis distance of `x` from the mean.
    pub fn mahalanobis_sq(&self, x: &DVector<f64>) -> Result<f64> {
        let chol = self.cholesky().ok_or(Error::SingularCovariance)?;
        let d = x - &self.mu;
        Ok(d.dot(&chol.solve(&d)))
    }

    /// Draws `count` poses from the prior.
    pub fn sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R, source: &str) -> Result<PoseSet> {
        let factor = covariance_factor(&self.cov);
        let n = self.n();
        let mut poses = DMatrix::zeros(count, n);
        for i in 0..count {
            let z = DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
            let x = &self.mu + &factor * z;
            poses.row_mut(i).copy_from(&x.transpose());
        }
        PoseSet::new(self.model.clone(), poses, source)
    }

    /// Writes `prior.json` and `cov.csv` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let meta = PriorFile {
            dof_names: self.model.names().map(str::to_string).collect(),
            mu: self.mu.iter().copied().collect(),
            sample_count: self.sample_count,
            ridge: self.ridge,
            cov_file: "cov.csv".into(),
        };
        fs::write(dir.join("prior.json"), serde_json::to_string_pretty(&meta)? + "\n")?;
        let mut f = fs::File::create(dir.join("cov.csv"))?;
        io::write_labeled(&mut f, &meta.dof_names, &self.cov)
    }

    /// Loads a bundle written by [`PriorModel::save`], reordering to `model`.
    pub fn load(dir: &Path, model: &HandModel) -> Result<Self> {
        let meta: PriorFile = serde_json::from_str(&fs::read_to_string(dir.join("prior.json"))?)?;
        let idx = model.indices_of(&meta.dof_names)?;
        let n = model.n();
        if idx.len() != n || meta.mu.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "prior has {} DoFs, hand model has {n}",
                meta.dof_names.len()
            )));
        }
        let (header, cov_raw) = io::read_labeled_file(&dir.join(&meta.cov_file))?;
        if header != meta.dof_names || cov_raw.shape() != (n, n) {
            return Err(Error::DimensionMismatch("covariance file does not match prior.json".into()));
        }
        let mut mu = DVector::zeros(n);
        let mut cov = DMatrix::zeros(n, n);
        for (a, &ia) in idx.iter().enumerate() {
            mu[ia] = meta.mu[a];
            for (b, &ib) in idx.iter().enumerate() {
                cov[(ia, ib)] = cov_raw[(a, b)];
            }
        }
        PriorModel::new(model.clone(), mu, cov, meta.sample_count, meta.ridge)
    }
}

#[derive(Serialize, Deserialize)]
struct PriorFile {
    dof_names: Vec<String>,
    mu: Vec<f64>,
    sample_count: usize,
    ridge: f64,
    cov_file: String,
}

/// `L` with `L Lᵀ = cov`; falls back to the symmetric square root for
/// semidefinite matrices.
pub(crate) fn covariance_factor(cov: &DMatrix<f64>) -> DMatrix<f64> {
    if let Some(chol) = Cholesky::new(cov.clone()) {
        return chol.l();
    }
    let (vals, vecs) = linalg::sorted_symmetric_eigen(cov);
    let sqrt = vals.map(|v| v.max(0.0).sqrt());
    &vecs * DMatrix::from_diagonal(&sqrt)
}

/// Sample mean and unbiased covariance of a pose set, plus `ridge · I`.
pub fn build_prior(poses: &PoseSet, ridge: f64) -> Result<PriorModel> {
    let x = poses.poses();
    let count = x.nrows();
    if count < 2 {
        return Err(Error::InsufficientSamples(count));
    }
    if !ridge.is_finite() || ridge < 0.0 {
        return Err(Error::NonFiniteInput("ridge".into()));
    }
    let mu = x.row_mean().transpose();
    let mut centered = x.clone();
    for mut row in centered.row_iter_mut() {
        row -= mu.transpose();
    }
    let mut cov = centered.transpose() * &centered / (count as f64 - 1.0);
    linalg::symmetrize(&mut cov);
    for i in 0..cov.nrows() {
        cov[(i, i)] += ridge;
    }
    PriorModel::new(poses.model().clone(), mu, cov, count, ridge)
}

/// Principal components ("postural synergies") of the prior covariance.
#[derive(Clone, Debug)]
pub struct SynergyDecomposition {
    /// Descending, clamped at zero.
    pub eigenvalues: DVector<f64>,
    /// Orthonormal columns, matching `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
    pub explained_variance_ratio: DVector<f64>,
    /// Number of slightly negative eigenvalues that were set to zero.
    pub clamped: usize,
}

impl SynergyDecomposition {
    pub fn cumulative_explained(&self) -> Vec<f64> {
        self.explained_variance_ratio
            .iter()
            .scan(0.0, |acc, r| {
                *acc += r;
                Some(*acc)
            })
            .collect()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.eigenvectors * DMatrix::from_diagonal(&self.eigenvalues) * self.eigenvectors.transpose()
    }
}

pub fn synergies(prior: &PriorModel) -> SynergyDecomposition {
    let (mut vals, vecs) = linalg::sorted_symmetric_eigen(prior.cov());
    let mut clamped = 0;
    for v in vals.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
            clamped += 1;
        }
    }
    let total = vals.sum();
    let ratio = if total > 0.0 { &vals / total } else { DVector::zeros(vals.len()) };
    SynergyDecomposition { eigenvalues: vals, eigenvectors: vecs, explained_variance_ratio: ratio, clamped }
}

/// Ordered squared Mahalanobis distances against chi-square quantiles.
#[derive(Clone, Debug)]
pub struct NormalityDiagnostic {
    pub squared_mahalanobis: Vec<f64>,
    pub chi_square_quantiles: Vec<f64>,
    /// Adjusted R² of the points about the line `y = x`; `None` when every
    /// distance is identical (no spread to explain).
    pub adjusted_r_squared: Option<f64>,
}

/// Chi-square Q-Q diagnostic of a pose set against the prior.
///
/// Plotting positions are `(i − 0.5) / N`. The reference line is fixed
/// (slope 1, intercept 0), so no parameters enter the R² adjustment.
pub fn normality_diagnostic(poses: &PoseSet, prior: &PriorModel) -> Result<NormalityDiagnostic> {
    if poses.model().n() != prior.n() {
        return Err(Error::DimensionMismatch("pose set and prior have different DoF counts".into()));
    }
    let chol = prior.cholesky().ok_or(Error::SingularCovariance)?;
    let mut d: Vec<f64> = (0..poses.len())
        .map(|i| {
            let dev = poses.pose(i) - prior.mu();
            dev.dot(&chol.solve(&dev))
        })
        .collect();
    d.sort_by(f64::total_cmp);
    let count = d.len();
    let chi = ChiSquared::new(prior.n() as f64).map_err(|e| Error::Config(e.to_string()))?;
    let q: Vec<f64> = (1..=count)
        .map(|i| chi.inverse_cdf((i as f64 - 0.5) / count as f64))
        .collect();
    let mean = d.iter().sum::<f64>() / count as f64;
    let ss_tot: f64 = d.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = d.iter().zip(&q).map(|(v, qi)| (v - qi).powi(2)).sum();
    let adjusted = if ss_tot > 0.0 && count > 1 {
        let r2 = 1.0 - ss_res / ss_tot;
        let fitted = 0.0;
        let n = count as f64;
        Some(1.0 - (1.0 - r2) * (n - 1.0) / (n - fitted - 1.0))
    } else {
        None
    };
    Ok(NormalityDiagnostic { squared_mahalanobis: d, chi_square_quantiles: q, adjusted_r_squared: adjusted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hand_model::default_hand_model;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_dof() -> HandModel {
        HandModel::from_names([("A".into(), String::new()), ("B".into(), String::new())]).unwrap()
    }

    fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let a = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        &a * a.transpose() + DMatrix::identity(n, n) * 0.5
    }

    #[test]
    fn two_pose_prior() {
        let ps = PoseSet::new(two_dof(), DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 2.0, 2.0]), "t").unwrap();
        let p = build_prior(&ps, 0.0).unwrap();
        assert_eq!(p.mu().as_slice(), &[1.0, 1.0]);
        assert_eq!(p.cov(), &DMatrix::from_element(2, 2, 2.0));
        assert_eq!(p.sample_count(), 2);
        assert!(!p.is_invertible());
    }

    #[test]
    fn constant_poses_give_zero_covariance() {
        let ps = PoseSet::new(two_dof(), DMatrix::from_row_slice(3, 2, &[1.0, 5.0, 1.0, 5.0, 1.0, 5.0]), "t").unwrap();
        let p = build_prior(&ps, 0.0).unwrap();
        assert_eq!(p.cov(), &DMatrix::zeros(2, 2));
        assert!(!p.is_invertible());
        let p = build_prior(&ps, DEFAULT_RIDGE).unwrap();
        assert_eq!(p.cov(), &(DMatrix::identity(2, 2) * DEFAULT_RIDGE));
        assert!(p.is_invertible());
    }

    #[test]
    fn build_prior_errors() {
        let ps = PoseSet::new(two_dof(), DMatrix::from_row_slice(1, 2, &[1.0, 2.0]), "t").unwrap();
        assert!(matches!(build_prior(&ps, 0.0), Err(Error::InsufficientSamples(1))));
        assert!(matches!(
            PoseSet::new(two_dof(), DMatrix::from_row_slice(1, 2, &[1.0, f64::NAN]), "t"),
            Err(Error::NonFiniteInput(_))
        ));
    }

    #[test]
    fn sampled_mean_within_three_standard_errors() {
        let model = default_hand_model();
        let mut rng = ChaCha8Rng::seed_from_u64(114);
        let cov = random_spd(15, &mut rng) * 25.0;
        let mu = DVector::from_fn(15, |i, _| 5.0 * i as f64 - 20.0);
        let truth = PriorModel::new(model, mu.clone(), cov.clone(), 0, 0.0).unwrap();
        let ps = truth.sample(114, &mut rng, "sampled").unwrap();
        let est = build_prior(&ps, 0.0).unwrap();
        for i in 0..15 {
            let se = (cov[(i, i)] / 114.0).sqrt();
            assert!((est.mu()[i] - mu[i]).abs() < 3.0 * se, "dof {i}");
        }
    }

    #[test]
    fn synergy_examples() {
        let model = two_dof();
        let p = PriorModel::new(model.clone(), DVector::zeros(2), DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0]), 0, 0.0).unwrap();
        let s = synergies(&p);
        assert_eq!(s.eigenvalues.as_slice(), &[4.0, 1.0]);
        assert_relative_eq!(s.eigenvectors[(0, 0)].abs(), 1.0);
        assert_relative_eq!(s.eigenvectors[(1, 1)].abs(), 1.0);

        let p = PriorModel::new(model, DVector::zeros(2), DMatrix::from_element(2, 2, 2.0), 0, 0.0).unwrap();
        let s = synergies(&p);
        assert_relative_eq!(s.eigenvalues[0], 4.0, epsilon = 1e-12);
        assert!(s.eigenvalues[1].abs() < 1e-12);
        let v = s.eigenvectors.column(0);
        assert_relative_eq!(v[0].abs(), 1.0 / 2f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(v[0], v[1], epsilon = 1e-12);
        assert_relative_eq!(*s.cumulative_explained().last().unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn synergy_reconstruction_and_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cov = random_spd(15, &mut rng);
        let p = PriorModel::new(default_hand_model(), DVector::zeros(15), cov.clone(), 0, 0.0).unwrap();
        let s = synergies(&p);
        assert!(linalg::relative_frobenius(&s.reconstruct(), &cov) < 1e-8);
        assert_relative_eq!(s.eigenvalues.sum(), cov.trace(), max_relative = 1e-9);
        assert_relative_eq!(s.eigenvectors.transpose() * &s.eigenvectors, DMatrix::identity(15, 15), epsilon = 1e-10);
        assert!(s.eigenvalues.as_slice().windows(2).all(|w| w[0] >= w[1]));
        assert_relative_eq!(*s.cumulative_explained().last().unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn diagnostic_at_the_mean_is_degenerate() {
        let model = two_dof();
        let ps = PoseSet::new(model.clone(), DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]), "t").unwrap();
        let p = build_prior(&ps, DEFAULT_RIDGE).unwrap();
        let d = normality_diagnostic(&ps, &p).unwrap();
        assert!(d.squared_mahalanobis.iter().all(|&v| v == 0.0));
        assert_eq!(d.adjusted_r_squared, None);
        let singular = build_prior(&ps, 0.0).unwrap();
        assert!(matches!(normality_diagnostic(&ps, &singular), Err(Error::SingularCovariance)));
    }

    #[test]
    fn diagnostic_on_exact_gaussian_samples() {
        let model = default_hand_model();
        let mut rng = ChaCha8Rng::seed_from_u64(5000);
        let cov = random_spd(15, &mut rng) * 10.0;
        let truth = PriorModel::new(model, DVector::from_element(15, 30.0), cov, 0, 0.0).unwrap();
        let ps = truth.sample(5000, &mut rng, "mc").unwrap();
        let d = normality_diagnostic(&ps, &truth).unwrap();
        assert!(d.squared_mahalanobis.windows(2).all(|w| w[0] <= w[1]));
        assert!(d.chi_square_quantiles.windows(2).all(|w| w[0] <= w[1]));
        let r2 = d.adjusted_r_squared.unwrap();
        assert!(r2 > 0.95, "adjusted R² = {r2}");
    }

    #[test]
    fn bundle_roundtrip() {
        let model = default_hand_model();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cov = random_spd(15, &mut rng);
        let p = PriorModel::new(model.clone(), DVector::from_fn(15, |i, _| i as f64 * 0.37), cov, 42, 1e-9).unwrap();
        let dir = tempfile::tempdir().unwrap();
        p.save(dir.path()).unwrap();
        let back = PriorModel::load(dir.path(), &model).unwrap();
        assert_eq!(back, p);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn pose_matrix() -> impl Strategy<Value = DMatrix<f64>> {
            (3usize..12).prop_flat_map(|rows| {
                proptest::collection::vec(-60.0f64..60.0, rows * 3)
                    .prop_map(move |v| DMatrix::from_row_slice(rows, 3, &v))
            })
        }

        fn three_dof() -> HandModel {
            HandModel::from_names(["A", "B", "C"].map(|s| (s.to_string(), String::new()))).unwrap()
        }

        proptest! {
            #[test]
            fn prior_is_row_permutation_invariant(x in pose_matrix(), seed in any::<u64>()) {
                use rand::seq::SliceRandom;
                let mut order: Vec<usize> = (0..x.nrows()).collect();
                order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
                let shuffled = DMatrix::from_fn(x.nrows(), 3, |i, j| x[(order[i], j)]);
                let a = build_prior(&PoseSet::new(three_dof(), x, "a").unwrap(), 0.0).unwrap();
                let b = build_prior(&PoseSet::new(three_dof(), shuffled, "b").unwrap(), 0.0).unwrap();
                let scale = a.cov().amax().max(1.0);
                prop_assert!((a.mu() - b.mu()).amax() < 1e-10 * 60.0);
                prop_assert!((a.cov() - b.cov()).amax() < 1e-10 * scale);
            }

            #[test]
            fn mahalanobis_is_affine_invariant(
                a in proptest::collection::vec(-1.0f64..1.0, 9),
                shift in proptest::collection::vec(-10.0f64..10.0, 3),
                x in proptest::collection::vec(-5.0f64..5.0, 3),
            ) {
                let mut map = DMatrix::from_row_slice(3, 3, &a);
                map += DMatrix::identity(3, 3) * 2.0;
                prop_assume!(map.determinant().abs() > 0.1);
                let cov = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
                let mu = DVector::from_vec(vec![1.0, -2.0, 0.5]);
                let x = DVector::from_vec(x);
                let shift = DVector::from_vec(shift);
                let p = PriorModel::new(three_dof(), mu.clone(), cov.clone(), 0, 0.0).unwrap();
                let mut mapped_cov = &map * &cov * map.transpose();
                linalg::symmetrize(&mut mapped_cov);
                let q = PriorModel::new(three_dof(), &map * &mu + &shift, mapped_cov, 0, 0.0).unwrap();
                let d1 = p.mahalanobis_sq(&x).unwrap();
                let d2 = q.mahalanobis_sq(&(&map * &x + &shift)).unwrap();
                prop_assert!((d1 - d2).abs() <= 1e-8 * d1.max(1e-4));
            }
        }
    }
}
