#![allow(dead_code)]

use handrecon::hand_model::{default_hand_model, HandModel};
use handrecon::{DMatrix, DVector, PriorModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn gaussian_vector(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// SPD matrix with eigenvalues log-uniform in `[lo, hi]` on a random basis.
pub fn random_spd(n: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let q = gaussian_matrix(n, n, rng).qr().q();
    let eig = DVector::from_fn(n, |_, _| (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp());
    let m = &q * DMatrix::from_diagonal(&eig) * q.transpose();
    (&m + m.transpose()) * 0.5
}

pub fn random_prior(model: &HandModel, rng: &mut ChaCha8Rng) -> PriorModel {
    let n = model.n();
    let cov = random_spd(n, 0.5, 400.0, rng);
    let mu = gaussian_vector(n, rng) * 20.0;
    PriorModel::new(model.clone(), mu, cov, 0, 0.0).unwrap()
}

pub fn hand() -> HandModel {
    default_hand_model()
}

/// Largest elementwise deviation relative to the magnitude of `b` (at least 1).
pub fn rel_dev(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax() / b.amax().max(1.0)
}

/// `m` distinct DoF indices out of `n`.
pub fn random_subset(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx.truncate(m);
    idx
}

/// Squared Mahalanobis distance via an explicit inverse, independent of the
/// estimators' factorisations.
pub fn mahalanobis_cost(prior: &PriorModel, x: &DVector<f64>) -> f64 {
    let inv = prior.cov().clone().try_inverse().expect("invertible prior");
    let d = x - prior.mu();
    (d.transpose() * inv * &d)[(0, 0)]
}
